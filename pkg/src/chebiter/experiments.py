"""Reference experiments: each driver builds a seeded problem instance,
runs the plain, best-constant, and Chebyshev-scheduled iterations on it,
and writes error traces plus a summary table (and images, for the
deblurring study) into an output directory.

Defaults are the desk-scale study settings; rerunning a driver with the
same arguments reproduces its output files byte for byte.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .core import (
    EigenRange,
    FixedPointMap,
    InertialSchedule,
    StopCriteria,
    StopReason,
    chebyshev_schedule,
    constant_sor_schedule,
    plain_schedule,
    run_inertial,
)
from .errors import InvalidInput
from .problems import (
    build_ista,
    deblur_map,
    fista_run,
    gen_gram_matrix,
    gen_jacobi_instance,
    gen_sparse_instance,
    gen_synthetic_image,
    blur_map,
    jacobi_map,
    power_map,
    tanh_affine_map,
    tanh_equation_map,
)
from .spectral import (
    convergence_bound,
    estimate_eigen_range,
    per_step_rate,
    per_step_rate_limit,
    period_contraction_bound,
)
from .traceio import TraceRecord, write_pgm, write_trace_csv

__all__ = [
    "ExperimentResult",
    "bounds_rows",
    "run_jacobi",
    "run_toy_power",
    "run_tanh_solve",
    "run_tanh_gram",
    "run_ista",
    "run_deblur",
]


@dataclass
class ExperimentResult:
    """Everything a driver produced: traces, summary rows, optional
    images, headline numbers for printing, and divergence warnings."""

    name: str
    records: List[TraceRecord]
    summary: List[dict]
    fieldnames: List[str]
    images: Dict[str, np.ndarray] = field(default_factory=dict)
    headline: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def trace_path(self, out_dir) -> str:
        return os.path.join(out_dir, f"{self.name}_traces.csv")

    def summary_path(self, out_dir) -> str:
        return os.path.join(out_dir, f"{self.name}_summary.csv")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _emit(result: ExperimentResult, out_dir) -> None:
    if out_dir is None:
        return
    os.makedirs(out_dir, exist_ok=True)
    write_trace_csv(result.trace_path(out_dir), result.records)
    with open(result.summary_path(out_dir), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=result.fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in result.summary:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
    for key, img in result.images.items():
        write_pgm(os.path.join(out_dir, f"{result.name}_{key}.pgm"), img)


def _iters_to(errors: np.ndarray, threshold: float) -> int:
    """First iterate index at or below threshold, or -1 if never reached."""
    hits = np.nonzero(errors <= threshold)[0]
    return int(hits[0]) if hits.size else -1


def _run_solvers(
    fpmap: FixedPointMap,
    schedules: Dict[str, InertialSchedule],
    x0: np.ndarray,
    iters: int,
    x_ref: np.ndarray,
    result: ExperimentResult,
    run_prefix: str = "",
):
    """Run each named schedule, append trace records, return the traces."""
    traces = {}
    for solver, sched in schedules.items():
        tr = run_inertial(fpmap, sched, x0, StopCriteria(max_iters=iters), x_ref=x_ref)
        if tr.stop_reason is StopReason.DIVERGENCE:
            result.warnings.append(
                f"{result.name}: run {run_prefix}{solver} diverged after {tr.steps} steps"
            )
        result.records.append(
            TraceRecord(
                run_id=f"{run_prefix}{solver}",
                solver=solver,
                errors=tr.errors,
                omegas=tr.factors_used,
            )
        )
        traces[solver] = tr
    return traces


def _standard_schedules(rng: EigenRange, periods: Sequence[int]) -> Dict[str, InertialSchedule]:
    """plain, the best constant factor, and one Chebyshev schedule per
    requested period above one (a period of 1 is the constant factor)."""
    schedules: Dict[str, InertialSchedule] = {"plain": plain_schedule()}
    if 1 in periods:
        schedules["sor"] = constant_sor_schedule(rng)
    for T in periods:
        if T > 1:
            schedules[f"cheb{T}"] = chebyshev_schedule(rng, T)
    return schedules


def bounds_rows(a: float, b: float, periods: Sequence[int]) -> List[dict]:
    """Contraction bound table for the range [a, b] at each period."""
    rng = EigenRange(a, b, unchecked=True)
    if rng.a <= 0.0:
        raise InvalidInput(f"bounds need a > 0, got a={a}")
    rows = []
    for T in periods:
        cb = convergence_bound(rng, T)
        rows.append(
            {
                "period": int(T),
                "range_a": rng.a,
                "range_b": rng.b,
                "sor_factor": 2.0 / (rng.a + rng.b),
                "sor_rate": cb.sor_rate,
                "period_bound": cb.period_bound,
                "per_step": cb.per_step,
                "limit": cb.limit,
            }
        )
    return rows


BOUNDS_FIELDS = [
    "period",
    "range_a",
    "range_b",
    "sor_factor",
    "sor_rate",
    "period_bound",
    "per_step",
    "limit",
]


def run_jacobi(
    out_dir=None,
    n: int = 64,
    seed: int = 0,
    periods: Sequence[int] = (1, 8),
    iters: int = 40,
) -> ExperimentResult:
    """Jacobi iteration on a random diagonally dominant system.

    The right-hand side is zero, so errors are exact distances to the
    solution. The eigenvalue range comes from the map's own spectrum
    certificate at the solution.
    """
    fields = [
        "solver",
        "period",
        "range_a",
        "range_b",
        "period_bound",
        "per_step",
        "final_error",
        "iters_to_threshold",
        "threshold",
    ]
    result = ExperimentResult(name="jacobi", records=[], summary=[], fieldnames=fields)
    inst = gen_jacobi_instance(n, seed)
    fpmap, _ = jacobi_map(inst.P, inst.q)
    x_star = np.zeros(n)
    rng = estimate_eigen_range(fpmap, x_star).clipped()
    schedules = _standard_schedules(rng, periods)
    traces = _run_solvers(fpmap, schedules, inst.x0, iters, x_star, result)
    threshold = 1e-6 * float(np.linalg.norm(inst.x0))
    for solver, tr in traces.items():
        T = schedules[solver].period
        sched_rng = schedules[solver].range
        result.summary.append(
            {
                "solver": solver,
                "period": T,
                "range_a": sched_rng.a if sched_rng else "",
                "range_b": sched_rng.b if sched_rng else "",
                "period_bound": period_contraction_bound(rng, T) if solver != "plain" else "",
                "per_step": per_step_rate(rng, T) if solver != "plain" else "",
                "final_error": float(tr.errors[-1]),
                "iters_to_threshold": _iters_to(tr.errors, threshold),
                "threshold": threshold,
            }
        )
    result.headline = {"range_a": rng.a, "range_b": rng.b}
    _emit(result, out_dir)
    return result


def run_toy_power(
    out_dir=None,
    periods: Sequence[int] = (1, 2, 8),
    iters: int = 40,
    pilot_iters: int = 60,
) -> ExperimentResult:
    """Two-dimensional fractional power map study from the start (2, 2).

    A plain pilot run locates the fixed point (the plain iteration
    contracts comfortably here); the schedule range is then measured at
    that point and the solvers compared on iterations to 1e-10.
    """
    fields = [
        "solver",
        "period",
        "range_a",
        "range_b",
        "per_step",
        "final_error",
        "iters_to_threshold",
        "threshold",
    ]
    result = ExperimentResult(name="toy_power", records=[], summary=[], fieldnames=fields)
    fpmap = power_map()
    x0 = np.array([2.0, 2.0])
    pilot = run_inertial(fpmap, plain_schedule(), x0, StopCriteria(max_iters=pilot_iters))
    x_star = pilot.x_final
    rng = estimate_eigen_range(fpmap, x_star).clipped()
    schedules = _standard_schedules(rng, periods)
    traces = _run_solvers(fpmap, schedules, x0, iters, x_star, result)
    threshold = 1e-10
    for solver, tr in traces.items():
        T = schedules[solver].period
        sched_rng = schedules[solver].range
        result.summary.append(
            {
                "solver": solver,
                "period": T,
                "range_a": sched_rng.a if sched_rng else "",
                "range_b": sched_rng.b if sched_rng else "",
                "per_step": per_step_rate(rng, T) if solver != "plain" else "",
                "final_error": float(tr.errors[-1]),
                "iters_to_threshold": _iters_to(tr.errors, threshold),
                "threshold": threshold,
            }
        )
    result.headline = {
        "fixed_point_1": float(x_star[0]),
        "fixed_point_2": float(x_star[1]),
        "range_a": rng.a,
        "range_b": rng.b,
    }
    _emit(result, out_dir)
    return result


def run_tanh_solve(
    out_dir=None,
    y: Tuple[float, float] = (0.1, 0.6),
    period: int = 8,
    iters: int = 20,
    pilot_iters: int = 40,
) -> ExperimentResult:
    """Solving x + tanh(x) = y, where the plain iteration barely moves.

    Every eigenvalue of B lies in (1, 2], so the pilot phase runs a
    Chebyshev schedule on that whole interval (the plain iteration would
    need thousands of steps), then the measured range at the solution
    drives the comparison runs.
    """
    fields = ["solver", "period", "range_a", "range_b", "final_error"]
    result = ExperimentResult(name="tanh_solve", records=[], summary=[], fieldnames=fields)
    fpmap = tanh_equation_map(np.asarray(y, dtype=float))
    n = fpmap.dim
    x0 = np.zeros(n)
    coarse = EigenRange(1.0, 2.0, unchecked=True).clipped()
    pilot = run_inertial(
        fpmap, chebyshev_schedule(coarse, period), x0, StopCriteria(max_iters=pilot_iters)
    )
    x_star = pilot.x_final
    rng = estimate_eigen_range(fpmap, x_star).clipped()
    schedules = {"plain": plain_schedule(), f"cheb{period}": chebyshev_schedule(rng, period)}
    traces = _run_solvers(fpmap, schedules, x0, iters, x_star, result)
    for solver, tr in traces.items():
        sched_rng = schedules[solver].range
        result.summary.append(
            {
                "solver": solver,
                "period": schedules[solver].period,
                "range_a": sched_rng.a if sched_rng else "",
                "range_b": sched_rng.b if sched_rng else "",
                "final_error": float(tr.errors[-1]),
            }
        )
    plain_err = float(traces["plain"].errors[-1])
    cheb_err = float(traces[f"cheb{period}"].errors[-1])
    result.headline = {
        "solution_1": float(x_star[0]),
        "solution_2": float(x_star[1]),
        "range_a": rng.a,
        "range_b": rng.b,
        "plain_final": plain_err,
        "cheb_final": cheb_err,
        "improvement": plain_err / cheb_err if cheb_err > 0 else float("inf"),
    }
    _emit(result, out_dir)
    return result


def run_tanh_gram(
    out_dir=None,
    n: int = 128,
    seed: int = 0,
    std: float = 0.022,
    lam_max: float = 0.97,
    periods: Sequence[int] = (2, 4, 8),
    iters: int = 400,
) -> ExperimentResult:
    """Contraction of x <- tanh(A x) for a Gram matrix A toward zero.

    A is rescaled so its top eigenvalue is exactly lam_max, pinning the
    schedule range at (1 - lam_max, 1 - lam_min). Per-period error ratios
    from the traces can be compared against the closed-form bound.
    """
    fields = [
        "solver",
        "period",
        "range_a",
        "range_b",
        "period_bound",
        "per_step",
        "limit",
        "final_error",
        "iters_to_threshold",
        "threshold",
    ]
    result = ExperimentResult(name="tanh_gram", records=[], summary=[], fieldnames=fields)
    A = gen_gram_matrix(n, std, seed, normalize_to=lam_max)
    fpmap = tanh_affine_map(A)
    x_star = np.zeros(n)
    rng = estimate_eigen_range(fpmap, x_star).clipped()
    schedules = _standard_schedules(rng, tuple(periods) + (1,))
    x0 = np.ones(n)
    traces = _run_solvers(fpmap, schedules, x0, iters, x_star, result)
    threshold = 1e-10
    for solver, tr in traces.items():
        T = schedules[solver].period
        result.summary.append(
            {
                "solver": solver,
                "period": T,
                "range_a": rng.a,
                "range_b": rng.b,
                "period_bound": period_contraction_bound(rng, T) if solver != "plain" else "",
                "per_step": per_step_rate(rng, T) if solver != "plain" else "",
                "limit": per_step_rate_limit(rng),
                "final_error": float(tr.errors[-1]),
                "iters_to_threshold": _iters_to(tr.errors, threshold),
                "threshold": threshold,
            }
        )
    result.headline = {"range_a": rng.a, "range_b": rng.b}
    _emit(result, out_dir)
    return result


def run_ista(
    out_dir=None,
    n: int = 256,
    m: int = 128,
    density: float = 0.1,
    noise_sigma: float = 0.1,
    seeds: int = 100,
    iters: int = 1500,
    period: int = 8,
    fista_iters: int = 100,
    record_first: int = 3,
) -> ExperimentResult:
    """Sparse recovery sweep comparing the scheduled smooth-shrinkage
    iteration against its plain version and an accelerated baseline.

    Per seed: the plain iteration runs to the full budget and its final
    recovery error becomes the target; the schedule range is measured at
    the plain solution through the spectrum certificate; the scheduled
    run then counts iterations until it reaches the target. The baseline
    comparison is at fista_iters iterations for both methods. Full traces
    are recorded for the first record_first seeds, summary rows for all.
    """
    fields = [
        "seed",
        "range_a",
        "range_b",
        "target_error",
        "cheb_iters_to_target",
        "plain_error_at_baseline",
        "fista_error_at_baseline",
        "fista_win",
    ]
    result = ExperimentResult(name="ista", records=[], summary=[], fieldnames=fields)
    stop = StopCriteria(max_iters=iters)
    hit_counts = []
    fista_wins = 0
    for seed in range(seeds):
        inst = gen_sparse_instance(n, m, density, noise_sigma, seed)
        prob = build_ista(inst)
        x0 = np.zeros(n)
        plain_tr = run_inertial(prob.fpmap, plain_schedule(), x0, stop, x_ref=inst.x_true)
        target = float(plain_tr.errors[-1])
        rng = estimate_eigen_range(prob.fpmap, plain_tr.x_final, fp_tol=1e-3).clipped()
        sched = chebyshev_schedule(rng, period)
        cheb_tr = run_inertial(prob.fpmap, sched, x0, stop, x_ref=inst.x_true)
        hit = _iters_to(cheb_tr.errors, target)
        hit_counts.append(hit if hit >= 0 else iters + 1)
        fista = fista_run(inst, fista_iters)
        plain_at = float(plain_tr.errors[min(fista_iters, plain_tr.steps)])
        fista_at = float(fista.errors[-1])
        win = fista_at < plain_at
        fista_wins += int(win)
        if seed < record_first:
            result.records.append(
                TraceRecord(f"seed{seed}/plain", "plain", plain_tr.errors, plain_tr.factors_used)
            )
            result.records.append(
                TraceRecord(f"seed{seed}/cheb{period}", f"cheb{period}", cheb_tr.errors, cheb_tr.factors_used)
            )
            result.records.append(
                TraceRecord(f"seed{seed}/fista", "fista", fista.errors, np.full(fista.steps, 1.0))
            )
        result.summary.append(
            {
                "seed": seed,
                "range_a": rng.a,
                "range_b": rng.b,
                "target_error": target,
                "cheb_iters_to_target": hit,
                "plain_error_at_baseline": plain_at,
                "fista_error_at_baseline": fista_at,
                "fista_win": int(win),
            }
        )
    hits = np.asarray(hit_counts, dtype=float)
    result.headline = {
        "median_iters_to_target": float(np.median(hits)),
        "max_iters_to_target": float(np.max(hits)),
        "budget": float(iters),
        "fista_win_rate": fista_wins / seeds,
    }
    _emit(result, out_dir)
    return result


def run_deblur(
    out_dir=None,
    height: int = 28,
    width: int = 28,
    relax: float = 0.8,
    range_a: float = 0.18,
    range_b: float = 0.98,
    period: int = 8,
    iters: int = 128,
    seeds: int = 10,
) -> ExperimentResult:
    """Image deblurring through the saturating blur model.

    The observation is y = sigmoid(C x); the residual iteration starts at
    y itself. The schedule uses a fixed conservative range rather than a
    per-image estimate, which is how this solver would run when the true
    image (and so the true range) is unknown. Images for the first seed
    are saved as PGM files alongside the traces.
    """
    fields = [
        "seed",
        "range_a",
        "range_b",
        "measured_a",
        "measured_b",
        "mse_plain",
        "mse_cheb",
        "cheb_win",
    ]
    result = ExperimentResult(name="deblur", records=[], summary=[], fieldnames=fields)
    rng = EigenRange(range_a, range_b)
    forward = blur_map(height, width)
    schedules = {"plain": plain_schedule(), f"cheb{period}": chebyshev_schedule(rng, period)}
    stop = StopCriteria(max_iters=iters)
    wins = 0
    for seed in range(seeds):
        img = gen_synthetic_image(height, width, seed)
        x_true = img.ravel()
        y = np.asarray(forward.eval(x_true))
        fpmap = deblur_map(y, height, width, relax=relax)
        measured = estimate_eigen_range(fpmap, x_true)
        traces = _run_solvers(fpmap, schedules, y.copy(), iters, x_true, result, run_prefix=f"seed{seed}/")
        finals = {}
        for solver, tr in traces.items():
            finals[solver] = float(np.mean((tr.x_final - x_true) ** 2))
        win = finals[f"cheb{period}"] < finals["plain"]
        wins += int(win)
        result.summary.append(
            {
                "seed": seed,
                "range_a": rng.a,
                "range_b": rng.b,
                "measured_a": measured.a,
                "measured_b": measured.b,
                "mse_plain": finals["plain"],
                "mse_cheb": finals[f"cheb{period}"],
                "cheb_win": int(win),
            }
        )
        if seed == 0:
            result.images["truth"] = img
            result.images["observed"] = y.reshape(height, width)
            result.images["plain"] = traces["plain"].x_final.reshape(height, width)
            result.images[f"cheb{period}"] = traces[f"cheb{period}"].x_final.reshape(
                height, width
            )
    result.headline = {"wins": float(wins), "seeds": float(seeds)}
    _emit(result, out_dir)
    return result
