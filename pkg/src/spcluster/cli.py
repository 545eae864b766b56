"""Command-line interface: ``spc simulate | cluster | select | eval``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Every failure prints a single ``spc: error: ...`` line on stderr.

Typical round trip::

    spc simulate --scenario 3 --seed 7 --out-dir run/
    spc cluster run/data.csv --omega 0.5 -o run/path.json
    spc select run/path.json --assignment run/assignment.csv
    spc eval run/assignment.csv run/truth.csv

Use ``--omega 0.5`` when objects outnumber features and ``--omega 0.1`` for
high-dimensional data (n < p).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import document
from .core import DataError, DataMatrix
from .evaluation import LabeledPartition, adjusted_rand_index, ari_c, ari_n, s_n
from .scheduler import PathConfig, PathError, run_path
from .simgen import ScenarioSpec, SimulationError, generate, preset

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- CSV helpers ---------------------------------------------------------

def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_matrix(path) -> np.ndarray:
    """Numeric CSV; a first row with any non-numeric cell is a header."""
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric cell {cell!r} at row {i + 1}") from None
    return out


def _open_out(path):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from exc


def write_matrix(path, values: np.ndarray, header: bool = False):
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j + 1}" for j in range(values.shape[1])])
        for row in values:
            w.writerow([repr(float(v)) for v in row])


def _read_table(path, columns) -> dict:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(columns) - set(reader.fieldnames or ())
            if missing:
                raise DataError(f"{path}: missing columns {sorted(missing)}")
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return {c: np.array([int(r[c]) for r in rows]) for c in columns}
    except (TypeError, ValueError):
        raise DataError(f"{path}: non-integer entry") from None


def standardize(values: np.ndarray) -> np.ndarray:
    mean = values.mean(axis=0)
    sd = values.std(axis=0, ddof=1)
    sd[sd == 0] = 1.0
    return (values - mean) / sd


# --- commands ------------------------------------------------------------

def cmd_simulate(args) -> int:
    seed = int(os.environ["SPC_SEED"]) if os.environ.get("SPC_SEED") else args.seed
    base = preset(args.scenario, args.high_dim, seed)
    spec = ScenarioSpec(
        n_clustered=args.n if args.n is not None else base.n_clustered,
        p=args.p if args.p is not None else base.p,
        k=args.k if args.k is not None else base.k,
        noise_count=args.noise if args.noise is not None else base.noise_count,
        overlap=args.overlap or base.overlap,
        correlated=args.correlated,
        cluster_sd=args.sd,
        seed=seed,
    )
    data, truth = generate(spec)
    out = Path(args.out_dir)
    write_matrix(out / "data.csv", data.values, header=args.header)
    with _open_out(out / "truth.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "label", "is_noise"])
        for i, lab in enumerate(truth.labels):
            noise = lab == truth.noise_label
            w.writerow([i, 0 if noise else int(lab) + 1, int(noise)])
    print(f"wrote {out / 'data.csv'} ({data.n} x {data.p}) and {out / 'truth.csv'}")
    return 0


def cmd_cluster(args) -> int:
    raw = read_matrix(args.data)
    values = standardize(raw) if args.standardize else raw
    data = DataMatrix(values)
    config = PathConfig(omega=args.omega, tau=args.tau, phi=args.phi, alpha=args.alpha,
                        grid_size=args.grid_size, allow_splits=args.allow_splits,
                        noise_cutoff=args.cutoff)
    t0 = time.perf_counter()
    path = run_path(data, config)
    elapsed = time.perf_counter() - t0
    timings = {"path_seconds": elapsed} if args.timings else None
    doc = document.path_document(path, data, a=args.a, standardized=args.standardize,
                                 timings=timings)
    with _open_out(args.output) as fh:
        fh.write(document.dumps(doc))
    ks = [r["k_total"] for r in doc["solutions"]]
    print(f"{len(ks)} solutions, K_total {ks[0]} -> {ks[-1]}; wrote {args.output}")
    return 0


def cmd_select(args) -> int:
    try:
        text = Path(args.path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {args.path}: {exc.strerror}") from exc
    doc = document.loads(text)
    records = doc["solutions"]
    if len({r["k_total"] for r in records}) < 2:
        raise DataError("path has a single distinct cluster count; nothing to select")
    sel = document.select_records(records, args.a)
    rec = records[sel["solution_index"]]
    sizes = np.asarray(rec["sizes"])
    assignment = np.asarray(rec["assignment"])
    noise = sizes[assignment - 1] <= args.cutoff
    k_clust = int(np.count_nonzero(sizes > args.cutoff))
    with _open_out(args.assignment) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "cluster", "is_noise"])
        for i, (c, nz) in enumerate(zip(assignment, noise)):
            w.writerow([i, int(c), int(nz)])
    print(f"solution_index={sel['solution_index']}")
    print(f"k_star={sel['k_star']}")
    print(f"k_clust={k_clust}")
    print(f"delta={rec['delta']!r}")
    print(f"lambda={rec['lambda']!r}")
    print(f"noise_objects={int(noise.sum())}")
    print(f"assignment={args.assignment}")
    return 0


def cmd_eval(args) -> int:
    est = _read_table(args.assignment, ("index", "cluster", "is_noise"))
    tru = _read_table(args.truth, ("index", "label", "is_noise"))
    if est["index"].size != tru["index"].size:
        raise DataError(f"length mismatch: {est['index'].size} assignments vs "
                        f"{tru['index'].size} truth rows")
    est = {k: v[np.argsort(est["index"], kind="stable")] for k, v in est.items()}
    tru = {k: v[np.argsort(tru["index"], kind="stable")] for k, v in tru.items()}
    if not np.array_equal(est["index"], tru["index"]):
        raise DataError("object indices of the two files differ")
    e_lab = np.where(est["is_noise"] == 1, -1, est["cluster"])
    t_lab = np.where(tru["is_noise"] == 1, -1, tru["label"])
    estimated, truth = LabeledPartition(e_lab), LabeledPartition(t_lab)
    scores = {
        "ari": adjusted_rand_index(e_lab, t_lab),
        "ari_c": ari_c(estimated, truth),
        "ari_n": ari_n(estimated, truth),
        "s_n": s_n(estimated, truth),
    }
    for key, val in scores.items():
        print(f"{key}={val:.6f}")
    print(f"k_clust={estimated.cluster_ids.size}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spc", description="Solution path clustering.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate a synthetic scenario")
    p.add_argument("--scenario", type=int, choices=(1, 2, 3, 4), default=1,
                   help="1 separated, 2 overlapping, 3 separated+noise, 4 overlapping+noise")
    p.add_argument("--high-dim", action="store_true", help="n=100, p=200 preset instead of n=400, p=20")
    p.add_argument("--n", type=int, help="number of clustered objects")
    p.add_argument("--p", type=int, help="dimension")
    p.add_argument("--k", type=int, help="number of clusters")
    p.add_argument("--noise", type=int, help="number of noise objects")
    p.add_argument("--overlap", action="store_true")
    p.add_argument("--correlated", action="store_true")
    p.add_argument("--sd", type=float, default=0.5, help="cluster standard deviation")
    p.add_argument("--seed", type=int, default=0, help="random seed (SPC_SEED overrides)")
    p.add_argument("--header", action="store_true", help="write a header row in data.csv")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cluster", help="compute a solution path")
    p.add_argument("data")
    p.add_argument("--omega", type=float, required=True,
                   help="initial fusion fraction: 0.5 for n > p, 0.1 for n < p")
    p.add_argument("--tau", type=float, default=None, help="default 0.9 * omega")
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.9)
    p.add_argument("--grid-size", type=int, default=None, help="default min(20, p)")
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--allow-splits", action="store_true")
    p.add_argument("--cutoff", type=int, default=3, help="clusters this small count as noise")
    p.add_argument("--a", type=float, default=0.05, help="selection threshold")
    p.add_argument("--timings", action="store_true", help="record wall-clock timings")
    p.add_argument("-o", "--output", default="path.json")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("select", help="choose a solution from a path document")
    p.add_argument("path")
    p.add_argument("--a", type=float, default=0.05)
    p.add_argument("--cutoff", type=int, default=3)
    p.add_argument("--assignment", default="assignment.csv")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eval", help="score an assignment against the truth")
    p.add_argument("assignment")
    p.add_argument("truth")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        code, msg = EXIT_USAGE, str(exc)
    except (PathError, SimulationError, FloatingPointError, ArithmeticError) as exc:
        code, msg = EXIT_NUMERIC, str(exc)
    except (DataError, document.SchemaError) as exc:
        code, msg = EXIT_DATA, str(exc)
    except ValueError as exc:
        # configuration values rejected by the library (omega, tau, ...)
        code, msg = EXIT_USAGE, str(exc)
    print(f"spc: error: {' '.join(msg.split())}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
