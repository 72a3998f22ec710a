"""Benchmark harness: penalty sweeps, sparsity spectra, and the command line.

The sweep runs the synthesis loop over a grid of l1 weights and tabulates
cost degradation against sparsity, one CSV row per weight.  The spectrum
writer renders the magnitude pattern of a gain matrix as a logarithmic
gray-scale image (binary PGM) plus the raw log magnitudes as CSV, which is
how sparsity patterns are eyeballed across runs.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import model
from .densela import evaluate_gain, lqr_gain
from .driver import SynthesisParams, SynthesisResult, result_to_dict, synthesize
from .formulation import InvalidParams
from .model import PlantModel

FloatArray = np.ndarray

#: Default l1 weight grid: a decade-stepped ladder from 0.001 to 10.
DEFAULT_ALPHA1_GRID = (
    0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009, 0.01,
    0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1,
    0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0,
    2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0,
)

_SWEEP_COLUMNS = (
    "alpha1",
    "J_opt",
    "J_eval",
    "card",
    "degradation_pct",
    "sparsity_pct",
    "iters",
    "status",
    "wall_ms",
)


class EmptyMatrix(ValueError):
    """Spectrum rendering received a matrix with no entries."""


@dataclass(frozen=True)
class SweepRecord:
    """One sweep row.

    ``degradation_pct`` is ``100 * (J_opt - J_lqr) / J_lqr``, the percent
    price paid for sparsity relative to the dense LQR optimum;
    ``sparsity_pct`` is ``100 * card / (n*m)``, the share of gain entries
    still live at the zero threshold (so "80% zeros" reads as
    ``sparsity_pct == 20``).  Failed rows carry ``card = -1``, NaN in the
    float columns, and an ``error:`` prefixed status; the sweep itself
    keeps going.
    """

    alpha1: float
    J_opt: float
    J_eval: float
    card: int
    degradation_pct: float
    sparsity_pct: float
    iters: int
    status: str
    wall_ms: float


def _row_from_result(
    alpha1: float, result: SynthesisResult, j_lqr: float, gain_size: int, wall_ms: float
) -> SweepRecord:
    degradation = 100.0 * (result.J_opt - j_lqr) / j_lqr
    sparsity = 100.0 * result.cardinality / gain_size
    return SweepRecord(
        alpha1=alpha1,
        J_opt=result.J_opt,
        J_eval=result.J_eval,
        card=result.cardinality,
        degradation_pct=degradation,
        sparsity_pct=sparsity,
        iters=len(result.iterations),
        status=result.status.value,
        wall_ms=wall_ms,
    )


def _sweep_row(task: tuple[PlantModel, SynthesisParams, float, float]) -> SweepRecord:
    plant, params, alpha1, j_lqr = task
    start = time.perf_counter()
    try:
        row_params = dataclasses.replace(params, alpha1=alpha1)
        result = synthesize(plant, row_params)
        wall_ms = 1000.0 * (time.perf_counter() - start)
        return _row_from_result(alpha1, result, j_lqr, plant.m * plant.n, wall_ms)
    except Exception as exc:  # noqa: BLE001 - a bad row must not kill the sweep
        wall_ms = 1000.0 * (time.perf_counter() - start)
        return SweepRecord(
            alpha1=alpha1,
            J_opt=math.nan,
            J_eval=math.nan,
            card=-1,
            degradation_pct=math.nan,
            sparsity_pct=math.nan,
            iters=0,
            status=f"error:{type(exc).__name__}",
            wall_ms=wall_ms,
        )


def sweep(
    plant: PlantModel,
    params: SynthesisParams = SynthesisParams(),
    alpha1_grid=DEFAULT_ALPHA1_GRID,
    workers: int = 1,
    csv_path: str | None = None,
) -> list[SweepRecord]:
    """Synthesize over an increasing grid of l1 weights, one record per weight.

    Rows are returned in grid order regardless of `workers`.  A failing
    row is recorded (status ``error:<type>``) and the sweep continues.
    When `csv_path` is given the records are also written there.
    """
    grid = [float(a) for a in alpha1_grid]
    if not grid:
        raise ValueError("alpha1 grid must be nonempty")
    if any(not (math.isfinite(a) and a >= 0.0) for a in grid):
        raise ValueError("alpha1 grid entries must be finite and nonnegative")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha1 grid must be strictly increasing")
    if workers < 1:
        raise ValueError("workers must be at least 1")

    _, _, j_lqr = lqr_gain(plant)
    tasks = [(plant, params, alpha1, j_lqr) for alpha1 in grid]
    if workers == 1:
        records = [_sweep_row(task) for task in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_sweep_row, tasks))
    if csv_path is not None:
        write_sweep_csv(csv_path, records)
    return records


def write_sweep_csv(path: str, records: list[SweepRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(_SWEEP_COLUMNS) + "\n")
        for r in records:
            fields = [
                _fmt(r.alpha1),
                _fmt(r.J_opt),
                _fmt(r.J_eval),
                str(r.card),
                _fmt(r.degradation_pct),
                _fmt(r.sparsity_pct),
                str(r.iters),
                r.status.replace(",", ";"),
                _fmt(r.wall_ms),
            ]
            fh.write(",".join(fields) + "\n")


def read_sweep_csv(path: str) -> list[SweepRecord]:
    """Parse a file written by :func:`write_sweep_csv` back into records."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != ",".join(_SWEEP_COLUMNS):
            raise ValueError(f"unexpected sweep CSV header: {header!r}")
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(_SWEEP_COLUMNS):
                raise ValueError(f"malformed sweep CSV row: {line!r}")
            records.append(
                SweepRecord(
                    alpha1=float(parts[0]),
                    J_opt=float(parts[1]),
                    J_eval=float(parts[2]),
                    card=int(parts[3]),
                    degradation_pct=float(parts[4]),
                    sparsity_pct=float(parts[5]),
                    iters=int(parts[6]),
                    status=parts[7],
                    wall_ms=float(parts[8]),
                )
            )
    return records


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# Spectrum rendering
# ---------------------------------------------------------------------------

def emit_spectrum(M: FloatArray, floor_db: float = -8.0) -> tuple[np.ndarray, FloatArray]:
    """Render |M| on a log10 gray scale with an absolute black floor.

    Returns ``(pixels, logvals)``: `pixels` is uint8 with 255 at the
    largest magnitude and 0 for entries at or below the floor, where
    `floor_db` is an absolute log10 cutoff (the default -8 paints
    everything below 1e-8 black, exact zeros included); in between the
    map is linear in log10|M_ij|.  `logvals` is log10|M| with -inf at
    zeros.  A matrix with no entry above the floor renders all black.

    Raises
    ------
    EmptyMatrix
        If M has no entries.
    """
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if M.size == 0:
        raise EmptyMatrix("cannot render a spectrum of an empty matrix")
    if not (math.isfinite(floor_db) and floor_db < 0.0):
        raise ValueError(f"floor_db must be finite and negative, got {floor_db}")
    with np.errstate(divide="ignore"):
        logvals = np.log10(np.abs(M))
    finite = logvals[np.isfinite(logvals)]
    pixels = np.zeros(M.shape, dtype=np.uint8)
    floor = floor_db
    if finite.size and float(finite.max()) > floor:
        peak = float(finite.max())
        span = peak - floor
        clipped = np.clip(logvals, floor, peak)
        pixels = np.rint(255.0 * (clipped - floor) / span).astype(np.uint8)
    return pixels, logvals


def write_pgm(path: str, pixels: np.ndarray) -> None:
    """Write a binary (P5) gray-scale image, one byte per pixel."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    if pixels.ndim != 2 or pixels.size == 0:
        raise EmptyMatrix("pixel array must be 2-d and nonempty")
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes(order="C"))


def write_spectrum_csv(path: str, logvals: FloatArray) -> None:
    np.savetxt(path, np.atleast_2d(logvals), delimiter=",", fmt="%.17g")


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    defaults = SynthesisParams()
    parser.add_argument("--alpha1", type=float, default=defaults.alpha1,
                        help="l1 penalty weight (default %(default)s)")
    parser.add_argument("--alpha", type=float, default=defaults.alpha,
                        help="budget schedule scale (default %(default)s)")
    parser.add_argument("--beta", type=float, default=defaults.beta,
                        help="budget schedule decay (default %(default)s)")
    parser.add_argument("--delta", type=float, default=defaults.delta,
                        help="coupling regularizer (default %(default)s)")
    parser.add_argument("--eps1", type=float, default=defaults.eps1,
                        help="floor on X (default %(default)s)")
    parser.add_argument("--eps2", type=float, default=defaults.eps2,
                        help="relative stopping tolerance (default %(default)s)")
    parser.add_argument("--tau", type=float, default=defaults.tau,
                        help="zero threshold on gain entries (default %(default)s)")
    parser.add_argument("--max-iters", type=int, default=defaults.max_iters,
                        help="pass cap for the loop (default %(default)s)")
    parser.add_argument("--solver-accuracy", type=float, default=defaults.solver_accuracy,
                        help="conic solver tolerance (default %(default)s)")


def _params_from_args(args: argparse.Namespace) -> SynthesisParams:
    return SynthesisParams(
        alpha1=args.alpha1,
        alpha=args.alpha,
        beta=args.beta,
        delta=args.delta,
        eps1=args.eps1,
        eps2=args.eps2,
        tau=args.tau,
        max_iters=args.max_iters,
        solver_accuracy=args.solver_accuracy,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparselqr",
        description="Sparse state-feedback synthesis and benchmarking toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a benchmark plant (B = Q = R = I)")
    p_gen.add_argument("family", choices=("decaying", "cyclic"))
    p_gen.add_argument("--n", type=int, required=True, help="state dimension")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--alpha-a", type=float, default=5.0,
                       help="decay rate of the decaying family")
    p_gen.add_argument("--beta-a", type=float, default=0.8903,
                       help="decay exponent of the decaying family")
    p_gen.add_argument("--out", required=True, help="plant JSON path")
    p_gen.add_argument("--matrix-out", default=None, help="also write A as CSV")

    p_lqr = sub.add_parser("lqr", help="dense LQR gain and cost")
    p_lqr.add_argument("--plant", required=True)
    p_lqr.add_argument("--out", default=None, help="result JSON path (default: stdout)")

    p_synth = sub.add_parser("synth", help="synthesize a sparse gain")
    p_synth.add_argument("--plant", required=True)
    _add_param_flags(p_synth)
    p_synth.add_argument("--out", default=None, help="result JSON path (default: stdout)")
    p_synth.add_argument("--gain-out", default=None, help="also write K as CSV")

    p_sweep = sub.add_parser("sweep", help="sweep the l1 weight over a grid")
    p_sweep.add_argument("--plant", required=True)
    _add_param_flags(p_sweep)
    p_sweep.add_argument("--grid", default=None,
                         help="comma-separated alpha1 values (default: built-in ladder)")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out", required=True, help="sweep CSV path")

    p_eval = sub.add_parser("eval", help="evaluate a fixed gain on a plant")
    p_eval.add_argument("--plant", required=True)
    p_eval.add_argument("--gain", required=True, help="gain matrix CSV")
    p_eval.add_argument("--tau", type=float, default=SynthesisParams().tau)
    p_eval.add_argument("--out", default=None, help="result JSON path (default: stdout)")

    p_spec = sub.add_parser("spectrum", help="render a magnitude spectrum image")
    p_spec.add_argument("--matrix", required=True, help="matrix CSV")
    p_spec.add_argument("--floor-db", type=float, default=-8.0)
    p_spec.add_argument("--out", required=True,
                        help="output basename; writes <out>.pgm and <out>.csv")

    p_sec = sub.add_parser("secant", help="single-entry gain intervals for a cyclic plant")
    p_sec.add_argument("--plant", default=None, help="plant JSON (uses its A)")
    p_sec.add_argument("--matrix", default=None, help="A matrix CSV")
    p_sec.add_argument("--out", default=None, help="result JSON path (default: stdout)")
    return parser


def _emit_json(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=1)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _finite_or_none(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


def _cmd_gen(args: argparse.Namespace) -> int:
    if args.family == "decaying":
        spec = model.DecayingSpec(n=args.n, alphaA=args.alpha_a, betaA=args.beta_a, seed=args.seed)
    else:
        spec = model.CyclicSpec(n=args.n, seed=args.seed)
    A = model.generate(spec)
    plant = model.identity_plant(A)
    model.save_plant_json(args.out, plant)
    if args.matrix_out is not None:
        model.save_matrix_csv(args.matrix_out, A)
    print(f"wrote {args.family} plant n={plant.n} seed={args.seed} to {args.out}")
    return 0


def _cmd_lqr(args: argparse.Namespace) -> int:
    plant = model.load_plant_json(args.plant)
    K0, X0, j_lqr = lqr_gain(plant)
    _emit_json(
        {"schema": "lqr/1", "J_lqr": j_lqr, "K0": K0.tolist(), "X0": X0.tolist()},
        args.out,
    )
    if args.out is not None:
        print(f"J_lqr = {j_lqr:.6f}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    plant = model.load_plant_json(args.plant)
    params = _params_from_args(args)
    result = synthesize(plant, params)
    _emit_json(result_to_dict(result, params), args.out)
    if args.gain_out is not None:
        model.save_matrix_csv(args.gain_out, result.K_opt)
    print(
        f"status={result.status.value} J_opt={result.J_opt:.6f} "
        f"card={result.cardinality} passes={len(result.iterations)}"
    )
    if result.status.value == "stalled_infeasible":
        return 3
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    plant = model.load_plant_json(args.plant)
    params = _params_from_args(args)
    if args.grid is None:
        grid = DEFAULT_ALPHA1_GRID
    else:
        grid = tuple(float(tok) for tok in args.grid.split(",") if tok.strip())
    records = sweep(plant, params, grid, workers=args.workers, csv_path=args.out)
    failures = sum(1 for r in records if r.status.startswith("error:"))
    print(f"wrote {len(records)} rows to {args.out} ({failures} failed)")
    return 0 if failures == 0 else 3


def _cmd_eval(args: argparse.Namespace) -> int:
    plant = model.load_plant_json(args.plant)
    K = model.load_matrix_csv(args.gain)
    ev = evaluate_gain(plant, K, tau=args.tau)
    _emit_json(
        {
            "schema": "gain-eval/1",
            "stable": ev.stable,
            "spectral_abscissa": ev.spectral_abscissa,
            "cost": _finite_or_none(ev.cost),
            "cardinality": ev.cardinality,
            "lyap_residual": _finite_or_none(ev.lyap_residual),
            "tau": args.tau,
        },
        args.out,
    )
    return 0


def _cmd_spectrum(args: argparse.Namespace) -> int:
    M = model.load_matrix_csv(args.matrix)
    pixels, logvals = emit_spectrum(M, floor_db=args.floor_db)
    write_pgm(args.out + ".pgm", pixels)
    write_spectrum_csv(args.out + ".csv", logvals)
    print(f"wrote {args.out}.pgm and {args.out}.csv")
    return 0


def _cmd_secant(args: argparse.Namespace) -> int:
    if (args.plant is None) == (args.matrix is None):
        print("secant: provide exactly one of --plant or --matrix", file=sys.stderr)
        return 1
    if args.plant is not None:
        A = model.load_plant_json(args.plant).A
    else:
        A = model.load_matrix_csv(args.matrix)
    bounds = model.secant_bounds(A)
    _emit_json(
        {
            "schema": "secant-bounds/1",
            "n": bounds.n,
            "threshold": bounds.threshold,
            "diag_upper": bounds.diag_upper.tolist(),
            "subdiag_lower": bounds.subdiag_lower.tolist(),
            "subdiag_upper": bounds.subdiag_upper.tolist(),
            "corner_lower": bounds.corner_lower,
            "corner_upper": bounds.corner_upper,
        },
        args.out,
    )
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "lqr": _cmd_lqr,
    "synth": _cmd_synth,
    "sweep": _cmd_sweep,
    "eval": _cmd_eval,
    "spectrum": _cmd_spectrum,
    "secant": _cmd_secant,
}


def cli(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code.

    0 on success, 1 on usage errors, 2 on invalid input data, 3 when a
    synthesis or sweep row failed to produce a usable result.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except (
        model.PlantValidationError,
        model.InvalidSpec,
        model.NotCyclicPattern,
        model.DegenerateProduct,
        InvalidParams,
        EmptyMatrix,
        json.JSONDecodeError,
        ValueError,
        OSError,
    ) as exc:
        print(f"sparselqr: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli())
