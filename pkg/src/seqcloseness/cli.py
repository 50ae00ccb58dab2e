"""Command-line front end.

Subcommands: ``closeness``, ``evolve``, ``cluster``, ``simulate``,
``baseline``, ``export-response``. Every output file starts with a comment
line recording the full run configuration, and every run with the same
``--seed`` writes byte-identical files regardless of ``--threads``. The seed
falls back to the ``SEQCLOSENESS_SEED`` environment variable.

Exit codes separate operation from verdict: 0 means the run completed
(whatever the statistical outcome), 2 means an input could not be read or
parsed, 3 means the test was undetermined because every state was a sentinel.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import click
import numpy as np

from . import ingest, simdata
from ._rng import substream
from .baselines import ks_two_sample, wilcoxon_rank_sum
from .clustering import LEVEL_NAMES_K3, kmeans_rows
from .evolution import pairwise_closeness, segment_by_calendar
from .quantize import StateSequence, build_uniform_spec, infer_p_max, quantize_sequence
from .tester import (
    AGGREGATION_METHODS,
    ClosenessParams,
    UndeterminedError,
    aggregate,
    closeness_analysis,
)

SCHEMA_VERSION = 1

EXIT_INPUT_ERROR = 2
EXIT_UNDETERMINED = 3

try:
    _VERSION = version("seqcloseness")
except PackageNotFoundError:  # running from a source tree
    _VERSION = "0.0.0"


def _provenance(command: str, config: dict) -> str:
    pairs = " ".join(f"{k}={v}" for k, v in sorted(config.items()))
    return f"# seqcloseness {_VERSION} {command} {pairs}"


def _fail_input(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_INPUT_ERROR)


def _read_table(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        _fail_input(f"cannot read {path}: {exc}")
    if not rows:
        _fail_input(f"{path} is empty")
    return [h.strip() for h in rows[0]], rows[1:]


def _load_sequence(spec_arg: str, n_bins: int, n_dims: int, p_max: float | None):
    """Resolve one sequence input.

    Returns ``("states", StateSequence)`` for raw state lists and embedded
    fixtures, or ``("values", ndarray)`` for proportion series that still
    need quantization.
    """
    if spec_arg.startswith("fixture:"):
        name = spec_arg.split(":", 1)[1]
        data = simdata.fixtures()
        if name not in ("qx", "qy", "qz"):
            _fail_input(f"unknown fixture {name!r} (expected qx, qy or qz)")
        seq = getattr(data, name)
        n_states = n_bins**n_dims
        if n_states < seq.n_states:
            _fail_input(f"--B {n_bins} is too small for fixture {name} (5 states)")
        return "states", StateSequence(seq.states, n_states)

    header, rows = _read_table(spec_arg)
    if header == ["state"]:
        try:
            states = np.array([int(r[0]) for r in rows], dtype=np.int64)
        except ValueError as exc:
            _fail_input(f"{spec_arg}: bad state value: {exc}")
        n_states = n_bins**n_dims
        if states.size and (states.min() < 1 or states.max() > n_states):
            _fail_input(
                f"{spec_arg}: states outside [1, {n_states}]; adjust --B/--dim"
            )
        return "states", StateSequence(states, n_states)

    value_columns = [i for i, h in enumerate(header) if h.startswith("value")]
    if not value_columns:
        _fail_input(
            f"{spec_arg}: expected a 'state' column or 'value' column(s), got {header}"
        )
    if len(value_columns) != n_dims:
        _fail_input(
            f"{spec_arg}: found {len(value_columns)} value column(s), --dim is {n_dims}"
        )
    try:
        values = np.array(
            [[float(r[i]) for i in value_columns] for r in rows], dtype=float
        )
    except ValueError as exc:
        _fail_input(f"{spec_arg}: bad value: {exc}")
    return "values", values


def _quantize_pair(a, b, n_bins: int, n_dims: int, p_max: float | None):
    """Quantize the 'values' inputs with one shared spec (shared p_max)."""
    value_arrays = [x[1] for x in (a, b) if x[0] == "values"]
    if value_arrays:
        if p_max is None:
            p_max = infer_p_max(np.concatenate(value_arrays).ravel(), n_bins)
        spec = build_uniform_spec(p_max, n_bins, n_dims)
    out = []
    for kind, payload in (a, b):
        out.append(payload if kind == "states" else quantize_sequence(spec, payload))
    return out[0], out[1], p_max


def _write_csv(path: Path, provenance: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(provenance + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_matrix(path: Path, provenance: str, labels, matrix: np.ndarray) -> None:
    rows = [[label] + [repr(float(v)) for v in row] for label, row in zip(labels, matrix)]
    _write_csv(path, provenance, ["label", *labels], rows)


def _echo_summary_json(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@click.group()
@click.version_option(_VERSION)
def main():
    """Closeness testing of sequential data and derived analyses."""


seed_option = click.option(
    "--seed",
    type=int,
    default=0,
    show_default=True,
    envvar="SEQCLOSENESS_SEED",
    help="Master seed (falls back to SEQCLOSENESS_SEED).",
)
out_dir_option = click.option(
    "--out-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
    help="Directory for output files.",
)


def tester_options(fn):
    for option in reversed(
        [
            click.option("--epsilon", type=float, default=0.1, show_default=True),
            click.option("--C", "sample_scale", type=float, default=100.0, show_default=True),
            click.option("--N", "n_trials", type=int, default=5, show_default=True),
            click.option("--B", "n_bins", type=int, default=20, show_default=True),
            click.option("--mu", "min_transitions", type=int, default=1, show_default=True),
            click.option("--dim", "n_dims", type=int, default=1, show_default=True),
            click.option("--pmax", "p_max", type=float, default=None),
            click.option(
                "--agg",
                "aggregation",
                type=click.Choice(AGGREGATION_METHODS),
                default="mean",
                show_default=True,
            ),
            seed_option,
        ]
    ):
        fn = option(fn)
    return fn


@main.command()
@click.argument("input_x")
@click.argument("input_y")
@tester_options
@out_dir_option
def closeness(
    input_x,
    input_y,
    epsilon,
    sample_scale,
    n_trials,
    n_bins,
    min_transitions,
    n_dims,
    p_max,
    aggregation,
    seed,
    out_dir,
):
    """Test closeness of two sequences (CSV files or fixture:qx/qy/qz)."""
    a = _load_sequence(input_x, n_bins, n_dims, p_max)
    b = _load_sequence(input_y, n_bins, n_dims, p_max)
    seq_x, seq_y, p_max = _quantize_pair(a, b, n_bins, n_dims, p_max)

    config = dict(
        epsilon=epsilon, C=sample_scale, N=n_trials, B=n_bins, mu=min_transitions,
        dim=n_dims, pmax=p_max, agg=aggregation, seed=seed,
        input_x=input_x, input_y=input_y,
    )
    params = ClosenessParams(
        epsilon=epsilon,
        sample_scale=sample_scale,
        n_trials=n_trials,
        min_transitions=min_transitions,
        n_states=n_bins**n_dims,
        seed=seed,
    )
    try:
        result = closeness_analysis(seq_x, seq_y, params)
    except ValueError as exc:
        _fail_input(str(exc))

    out_dir.mkdir(parents=True, exist_ok=True)
    provenance = _provenance("closeness", config)
    _write_csv(
        out_dir / "per_state.csv",
        provenance,
        ["state", "accept_prob", "reject_prob", "z", "d", "sentinel"],
        [
            [r.from_state, repr(r.accept_prob), repr(r.reject_prob),
             repr(r.z_mean), repr(r.d_mean), int(r.sentinel)]
            for r in result.per_state
        ],
    )

    try:
        summary = aggregate(result, aggregation)
    except UndeterminedError as exc:
        click.echo(f"undetermined: {exc}", err=True)
        sys.exit(EXIT_UNDETERMINED)

    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "closeness",
        "config": config,
        "summary": {
            "accept_prob": summary.accept_prob,
            "reject_prob": summary.reject_prob,
            "z": summary.z,
            "d": summary.d,
            "method": summary.method,
            "states_used": summary.states_used,
            "n_states": params.n_states,
        },
    }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _echo_summary_json(payload)


@main.command()
@click.argument("input_series", required=False)
@click.option("--counts", type=click.Path(exists=False), default=None,
              help="Counts panel CSV (date,segment_id,count).")
@click.option("--populations", type=click.Path(exists=False), default=None,
              help="Populations CSV (segment_id,population).")
@click.option("--segment", "segment_id", default="total", show_default=True,
              help="Segment to analyze from the panel, or 'total' to pool all.")
@click.option("--period", type=click.Choice(("week", "month")), default="week",
              show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--symmetrize", is_flag=True, help="Also write *_sym.csv views.")
@tester_options
@out_dir_option
def evolve(
    input_series,
    counts,
    populations,
    segment_id,
    period,
    threads,
    symmetrize,
    epsilon,
    sample_scale,
    n_trials,
    n_bins,
    min_transitions,
    n_dims,
    p_max,
    aggregation,
    seed,
    out_dir,
):
    """Pairwise closeness between the calendar segments of a dated series."""
    if input_series is None and counts is None:
        _fail_input("provide a dated series CSV or --counts/--populations")
    if input_series is not None:
        header, rows = _read_table(input_series)
        if not header or header[0] != "date":
            _fail_input(f"{input_series}: expected a leading 'date' column, got {header}")
        value_columns = [i for i, h in enumerate(header) if h.startswith("value")]
        if len(value_columns) != n_dims:
            _fail_input(
                f"{input_series}: found {len(value_columns)} value column(s), "
                f"--dim is {n_dims}"
            )
        try:
            dates = [dt.date.fromisoformat(r[0]) for r in rows]
            values = np.array(
                [[float(r[i]) for i in value_columns] for r in rows], dtype=float
            )
        except ValueError as exc:
            _fail_input(f"{input_series}: {exc}")
        source = input_series
    else:
        if populations is None:
            _fail_input("--counts requires --populations")
        try:
            panel = ingest.load_counts(counts)
            pops = ingest.load_populations(populations)
            series = ingest.proportions(panel, pops)
        except (OSError, ValueError) as exc:
            _fail_input(str(exc))
        if segment_id == "total":
            by_date: dict[dt.date, int] = {}
            for row in panel.rows:
                by_date[row.date] = by_date.get(row.date, 0) + row.count
            total_pop = sum(pops.sizes.values())
            dates = sorted(by_date)
            values = np.array([[by_date[d] / total_pop] for d in dates])
        else:
            if segment_id not in pops:
                _fail_input(f"unknown segment {segment_id!r}")
            seg_dates, seg_values = series.series(segment_id)
            dates = list(seg_dates)
            values = seg_values[:, None]
        source = f"{counts}|{populations}|{segment_id}"

    if p_max is None:
        p_max = infer_p_max(values.ravel(), n_bins)
    spec = build_uniform_spec(p_max, n_bins, n_dims)
    try:
        seq = quantize_sequence(spec, values)
        labels, segments = segment_by_calendar(dates, seq, period)
    except ValueError as exc:
        _fail_input(str(exc))
    if len(segments) < 2:
        _fail_input(f"need at least 2 {period} segments, got {len(segments)}")

    params = ClosenessParams(
        epsilon=epsilon,
        sample_scale=sample_scale,
        n_trials=n_trials,
        min_transitions=min_transitions,
        n_states=spec.n_states,
        seed=seed,
    )
    matrices = pairwise_closeness(
        segments, params, aggregation=aggregation, labels=labels, max_workers=threads
    )

    config = dict(
        epsilon=epsilon, C=sample_scale, N=n_trials, B=n_bins, mu=min_transitions,
        dim=n_dims, pmax=p_max, agg=aggregation, seed=seed, period=period,
        input=source, segments=len(labels),
    )
    provenance = _provenance("evolve", config)
    out_dir.mkdir(parents=True, exist_ok=True)
    views = {"": matrices} | ({"_sym": matrices.symmetrized()} if symmetrize else {})
    for suffix, m in views.items():
        for name in ("accept", "reject", "z", "d"):
            _write_matrix(
                out_dir / f"{name}{suffix}.csv", provenance, m.labels, getattr(m, name)
            )
    for i, j, message in matrices.warnings:
        click.echo(f"warning: cell ({matrices.labels[i]}, {matrices.labels[j]}): {message}",
                   err=True)
    click.echo(f"wrote {len(labels)}x{len(labels)} matrices to {out_dir}")


@main.command()
@click.argument("matrix_csv")
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--symmetrize", is_flag=True,
              help="Cluster (M + M^T) / 2 instead of the raw rows.")
@seed_option
@out_dir_option
def cluster(matrix_csv, k, symmetrize, seed, out_dir):
    """Group the rows of a distance matrix into severity-ordered clusters."""
    header, rows = _read_table(matrix_csv)
    if len(header) < 2 or header[0] != "label":
        _fail_input(f"{matrix_csv}: expected a 'label' header row")
    labels = [r[0] for r in rows]
    try:
        matrix = np.array([[float(v) for v in r[1:]] for r in rows])
    except ValueError as exc:
        _fail_input(f"{matrix_csv}: bad matrix value: {exc}")
    if matrix.shape != (len(labels), len(header) - 1):
        _fail_input(f"{matrix_csv}: ragged matrix")
    if symmetrize:
        if matrix.shape[0] != matrix.shape[1]:
            _fail_input("--symmetrize needs a square matrix")
        matrix = (matrix + matrix.T) / 2.0
    try:
        assignment = kmeans_rows(matrix, k=k, seed=seed)
    except ValueError as exc:
        _fail_input(str(exc))

    config = dict(k=k, seed=seed, symmetrize=symmetrize, input=matrix_csv)
    out_dir.mkdir(parents=True, exist_ok=True)
    severity = assignment.severity
    out_rows = []
    for label, cluster_id, rank in zip(labels, assignment.labels, severity):
        row = [label, int(cluster_id), int(rank)]
        if k == 3:
            row.append(LEVEL_NAMES_K3[int(rank)])
        out_rows.append(row)
    header_out = ["label", "cluster", "severity_rank"] + (["severity"] if k == 3 else [])
    _write_csv(out_dir / "clusters.csv", _provenance("cluster", config), header_out, out_rows)
    click.echo(f"wrote {len(labels)} assignments to {out_dir / 'clusters.csv'}")


@main.command()
@click.option("--matrix", "matrix_csv", default=None,
              help="Transition matrix CSV; omit to use the built-in 5-state matrix.")
@click.option("--length", type=int, default=100, show_default=True)
@click.option("--initial", type=int, default=None,
              help="Initial state (1-based); uniform when omitted.")
@click.option("--emit-fixtures", is_flag=True,
              help="Also write the embedded qx/qy/qz sequences and matrix.")
@seed_option
@out_dir_option
def simulate(matrix_csv, length, initial, emit_fixtures, seed, out_dir):
    """Sample a trajectory from a transition matrix."""
    if matrix_csv is None:
        matrix = simdata.fixtures().matrix
        source = "builtin"
    else:
        header, rows = _read_table(matrix_csv)
        try:
            body = [[float(v) for v in r[1:]] for r in rows]
            matrix = simdata.renormalize_rows(np.array(body))
        except ValueError as exc:
            _fail_input(f"{matrix_csv}: {exc}")
        source = matrix_csv

    try:
        seq = simdata.generate_trajectory(matrix, length, substream(seed), initial)
    except ValueError as exc:
        _fail_input(str(exc))

    config = dict(matrix=source, length=length, initial=initial, seed=seed)
    provenance = _provenance("simulate", config)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "trajectory.csv", provenance, ["state"],
               [[int(s)] for s in seq.states])
    if emit_fixtures:
        data = simdata.fixtures()
        for name in ("qx", "qy", "qz"):
            _write_csv(out_dir / f"{name}.csv", provenance, ["state"],
                       [[int(s)] for s in getattr(data, name).states])
        _write_matrix(out_dir / "matrix.csv", provenance,
                      [f"state_{i + 1}" for i in range(matrix.shape[0])], data.matrix)
    click.echo(f"wrote length-{length} trajectory to {out_dir / 'trajectory.csv'}")


@main.command()
@click.argument("input_x")
@click.argument("input_y")
@click.option("--B", "n_bins", type=int, default=20, show_default=True)
@click.option("--dim", "n_dims", type=int, default=1, show_default=True)
@click.option("--pmax", "p_max", type=float, default=None)
@out_dir_option
def baseline(input_x, input_y, n_bins, n_dims, p_max, out_dir):
    """Classical two-sample tests on the pooled state values of two sequences."""
    a = _load_sequence(input_x, n_bins, n_dims, p_max)
    b = _load_sequence(input_y, n_bins, n_dims, p_max)
    seq_x, seq_y, p_max = _quantize_pair(a, b, n_bins, n_dims, p_max)

    x, y = seq_x.states.astype(float), seq_y.states.astype(float)
    try:
        reports = [wilcoxon_rank_sum(x, y), ks_two_sample(x, y)]
    except ValueError as exc:
        _fail_input(str(exc))

    config = dict(B=n_bins, dim=n_dims, pmax=p_max, input_x=input_x, input_y=input_y)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "baseline.csv",
        _provenance("baseline", config),
        ["method", "statistic", "p_value"],
        [[r.method, repr(float(r.statistic)), repr(float(r.p_value))] for r in reports],
    )
    for r in reports:
        click.echo(f"{r.method}: statistic={r.statistic:.6g} p_value={r.p_value:.6g}")


@main.command("export-response")
@click.option("--z", "z_csv", required=True, help="z matrix CSV from evolve.")
@click.option("--d", "d_csv", required=True, help="d matrix CSV from evolve.")
@click.option("--predictors", "predictors_csv", required=True,
              help="Predictor CSV keyed by a 'week' column.")
@click.option("--delay", type=click.Choice(("0", "1", "2")), default="0",
              show_default=True)
@out_dir_option
def export_response(z_csv, d_csv, predictors_csv, delay, out_dir):
    """Join weekly closeness distances with a predictor table."""
    from .evolution import EvolutionMatrices

    def read_matrix(path):
        header, rows = _read_table(path)
        if not header or header[0] != "label":
            _fail_input(f"{path}: expected a 'label' header row")
        labels = [r[0] for r in rows]
        try:
            return labels, np.array([[float(v) for v in r[1:]] for r in rows])
        except ValueError as exc:
            _fail_input(f"{path}: bad value: {exc}")

    z_labels, z_matrix = read_matrix(z_csv)
    d_labels, d_matrix = read_matrix(d_csv)
    if z_labels != d_labels:
        _fail_input("z and d matrices carry different labels")
    n = len(z_labels)
    matrices = EvolutionMatrices(
        accept=np.eye(n), reject=np.zeros((n, n)),
        z=z_matrix, d=d_matrix, labels=tuple(z_labels),
    )

    header, rows = _read_table(predictors_csv)
    if "week" not in header:
        _fail_input(f"{predictors_csv}: predictor table needs a 'week' column")
    predictors = [dict(zip(header, r)) for r in rows]

    joined, unmatched = ingest.export_response_table(matrices, predictors, int(delay))
    config = dict(z=z_csv, d=d_csv, predictors=predictors_csv, delay=delay)
    out_dir.mkdir(parents=True, exist_ok=True)
    columns = ["week", "Z", "D"] + [c for c in header if c != "week"]
    _write_csv(
        out_dir / "response.csv",
        _provenance("export-response", config),
        columns,
        [[row.get(c, "") for c in columns] for row in joined],
    )
    for week in unmatched:
        click.echo(f"warning: response week {week} has no matching predictors", err=True)
    click.echo(f"wrote {len(joined)} joined rows to {out_dir / 'response.csv'}")


if __name__ == "__main__":
    main()
