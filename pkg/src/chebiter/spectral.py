"""Chebyshev polynomial bounds, eigenvalue utilities, and range estimation.

The quantities here answer two questions about a relaxed fixed-point
iteration whose error propagates through B = I - J(x*):

* how much does a full period of Chebyshev factors contract the error
  component at eigenvalue lambda of B (period_polynomial, and its max
  over [a, b] in closed form, period_contraction_bound);
* what eigenvalue range [a, b] should the schedule be built for
  (estimate_eigen_range and the eigensolver helpers underneath it).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import EigenRange, FixedPointMap, InertialSchedule
from .errors import (
    DimensionError,
    InvalidInput,
    InvalidRange,
    NonFiniteValue,
    NotAFixedPoint,
    NotSymmetric,
    SpectrumNotCertifiedReal,
)

__all__ = [
    "chebyshev_eval",
    "monic_chebyshev",
    "period_polynomial",
    "period_contraction_bound",
    "per_step_rate",
    "per_step_rate_limit",
    "ConvergenceBound",
    "convergence_bound",
    "period_spectral_radius",
    "jacobian_fd",
    "symmetric_eigenvalues",
    "real_spectrum_via_similarity",
    "PowerResult",
    "power_iteration",
    "estimate_eigen_range",
]

# Accuracy and runtime of the dense symmetric path were only checked up
# to this size; larger problems should use the power-iteration path.
MAX_DENSE_DIM = 1024

_REL_ASYM_TOL = 1e-10


def chebyshev_eval(x, degree: int):
    """Chebyshev polynomial C_degree evaluated by the three-term recursion.

    Works for scalar or array x, inside or outside [-1, 1]. On [-1, 1]
    it agrees with cos(degree * arccos(x)).
    """
    d = int(degree)
    if d < 0:
        raise InvalidInput(f"degree must be >= 0, got {degree}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if d == 0:
        return prev
    cur = x.copy()
    for _ in range(d - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def monic_chebyshev(x, rng: EigenRange, degree: int):
    """Monic polynomial of given degree with roots at the Chebyshev points
    of [a, b]: 2^(1-T) * ((b-a)/2)^T * C_T((2x - b - a)/(b - a)).

    A zero-width range degenerates to (x - a)^T.
    """
    T = int(degree)
    if T < 1:
        raise InvalidInput(f"degree must be >= 1, got {degree}")
    x = np.asarray(x, dtype=float)
    hw = rng.halfwidth
    if hw == 0.0:
        return (x - rng.center) ** T
    return 2.0 ** (1 - T) * hw**T * chebyshev_eval((x - rng.center) / hw, T)


def period_polynomial(lam, schedule: InertialSchedule):
    """Error amplification over one full period at eigenvalue lam of B.

    Equals prod_k (1 - w_k * lam). For the Chebyshev schedule this is the
    monic Chebyshev polynomial on [a, b] normalized to 1 at lam = 0.
    """
    lam = np.asarray(lam, dtype=float)
    out = np.ones_like(lam)
    for w in schedule.factors:
        out = out * (1.0 - w * lam)
    return out


def _check_bound_range(rng: EigenRange) -> None:
    if rng.a <= 0.0:
        raise InvalidRange(
            f"contraction bound needs a > 0, got range ({rng.a}, {rng.b})"
        )


def period_contraction_bound(rng: EigenRange, period: int) -> float:
    """Max of |period polynomial| over [a, b] for the Chebyshev schedule.

    In closed form sech(T * acosh((b + a)/(b - a))), evaluated as
    2 e^(-t) / (1 + e^(-2t)) so large arguments underflow gracefully
    instead of overflowing cosh. A zero-width range returns 0: one period
    of factors annihilates a single-point spectrum.
    """
    T = int(period)
    if T < 1:
        raise InvalidInput(f"period must be >= 1, got {period}")
    _check_bound_range(rng)
    if rng.a == rng.b:
        return 0.0
    u = (rng.b + rng.a) / (rng.b - rng.a)
    t = T * math.acosh(u)
    return 2.0 * math.exp(-t) / (1.0 + math.exp(-2.0 * t))


def per_step_rate(rng: EigenRange, period: int) -> float:
    """Geometric mean contraction per step: the period bound to the 1/T.

    Computed in the log domain so very long periods stay accurate; the
    result decreases toward per_step_rate_limit as T grows but never
    reaches it.
    """
    T = int(period)
    if T < 1:
        raise InvalidInput(f"period must be >= 1, got {period}")
    _check_bound_range(rng)
    if rng.a == rng.b:
        return 0.0
    u = (rng.b + rng.a) / (rng.b - rng.a)
    t = T * math.acosh(u)
    log_bound = math.log(2.0) - t - math.log1p(math.exp(-2.0 * t))
    return math.exp(log_bound / T)


def per_step_rate_limit(rng: EigenRange) -> float:
    """Infimum of the per-step rate over all periods: exp(-acosh(u)).

    For (0.1, 0.9) this is exactly 1/2; the constant best factor only
    reaches (b - a)/(b + a), which is worse whenever a < b.
    """
    _check_bound_range(rng)
    if rng.a == rng.b:
        return 0.0
    u = (rng.b + rng.a) / (rng.b - rng.a)
    return math.exp(-math.acosh(u))


@dataclass(frozen=True)
class ConvergenceBound:
    """Contraction guarantees for one range and period.

    period_bound is the worst-case error ratio across a full period,
    per_step its T-th root, and limit the infimum of per_step over all
    periods. sor_rate is the rate of the best constant factor for the
    same range, (b - a)/(b + a), for comparison.
    """

    range: EigenRange
    period: int
    period_bound: float
    per_step: float
    limit: float
    sor_rate: float


def convergence_bound(rng: EigenRange, period: int) -> ConvergenceBound:
    """Bundle the period bound, per-step rate, limit, and constant-factor
    rate for a range."""
    _check_bound_range(rng)
    sor = (rng.b - rng.a) / (rng.b + rng.a)
    return ConvergenceBound(
        range=rng,
        period=int(period),
        period_bound=period_contraction_bound(rng, period),
        per_step=per_step_rate(rng, period),
        limit=per_step_rate_limit(rng),
        sor_rate=sor,
    )


def period_spectral_radius(eigenvalues, schedule: InertialSchedule) -> float:
    """Spectral radius of the full-period propagation matrix.

    The period propagator is a polynomial in B, so its eigenvalues are the
    period polynomial evaluated at the eigenvalues of B, independent of
    the order the factors are applied in.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        raise InvalidInput("need at least one eigenvalue")
    return float(np.max(np.abs(period_polynomial(lam, schedule))))


def jacobian_fd(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: Optional[float] = None
) -> np.ndarray:
    """Dense Jacobian of f at x by central differences.

    The default step eps^(1/3) * (1 + |x|_inf) balances truncation and
    rounding error for the second-order central formula.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"x must be a vector, got shape {x.shape}")
    if h is None:
        h = float(np.finfo(float).eps) ** (1.0 / 3.0) * (1.0 + float(np.max(np.abs(x))))
    n = x.size
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        cols.append((np.asarray(f(x + e), dtype=float) - np.asarray(f(x - e), dtype=float)) / (2.0 * h))
    J = np.column_stack(cols)
    if J.shape != (n, n):
        raise DimensionError(f"map output length {J.shape[0]} != input length {n}")
    return J


def _rel_asymmetry(S: np.ndarray) -> float:
    denom = max(float(np.linalg.norm(S)), np.finfo(float).tiny)
    return float(np.linalg.norm(S - S.T)) / denom


def _check_square(S, what: str) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NonFiniteValue(f"{what} has non-finite entries")
    return S


def symmetric_eigenvalues(S, asym_tol: float = _REL_ASYM_TOL) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending.

    Rejects matrices whose relative asymmetry |S - S^T|_F / |S|_F exceeds
    asym_tol and sizes beyond MAX_DENSE_DIM; asymmetry within the
    tolerance is treated as roundoff and symmetrized away.
    """
    S = _check_square(S, "matrix")
    n = S.shape[0]
    if n > MAX_DENSE_DIM:
        raise InvalidInput(f"dense solver limited to n <= {MAX_DENSE_DIM}, got n = {n}")
    if _rel_asymmetry(S) > asym_tol:
        raise NotSymmetric(
            f"matrix has relative asymmetry {_rel_asymmetry(S):.3e} > {asym_tol:.1e}"
        )
    return np.linalg.eigvalsh((S + S.T) / 2.0)


def real_spectrum_via_similarity(A, q, asym_tol: float = _REL_ASYM_TOL) -> np.ndarray:
    """Spectrum of diag(q) @ A for symmetric A and nonnegative q, ascending.

    Although diag(q) A is not symmetric, its spectrum is real: rows where
    q_i = 0 are zero rows, so after moving them last the matrix is block
    triangular with a zero block, contributing exact zero eigenvalues;
    the remaining block D A' (D = diag of the positive q_i) is similar to
    the symmetric matrix D^(1/2) A' D^(1/2) via D^(1/2). The returned
    values are the eigenvalues of that symmetric matrix plus the zeros.
    """
    A = _check_square(A, "A")
    n = A.shape[0]
    if n > MAX_DENSE_DIM:
        raise InvalidInput(f"dense solver limited to n <= {MAX_DENSE_DIM}, got n = {n}")
    if _rel_asymmetry(A) > asym_tol:
        raise NotSymmetric(
            f"A has relative asymmetry {_rel_asymmetry(A):.3e} > {asym_tol:.1e}"
        )
    q = np.asarray(q, dtype=float)
    if q.shape != (n,):
        raise DimensionError(f"q has shape {q.shape}, expected ({n},)")
    if not np.all(np.isfinite(q)):
        raise NonFiniteValue("q has non-finite entries")
    if np.any(q < 0.0):
        raise InvalidInput("q must be nonnegative for the similarity to be real")

    support = q > 0.0
    k = int(np.count_nonzero(support))
    if k == 0:
        return np.zeros(n)
    s = np.sqrt(q[support])
    core = (s[:, None] * A[np.ix_(support, support)]) * s[None, :]
    lam = np.linalg.eigvalsh((core + core.T) / 2.0)
    return np.sort(np.concatenate([lam, np.zeros(n - k)]))


@dataclass(frozen=True)
class PowerResult:
    """Dominant eigenvalue estimate with its defect |Bv - value * v|."""

    value: float
    residual: float
    iters: int


def power_iteration(
    B, rtol: float = 1e-10, max_iters: int = 10000
) -> PowerResult:
    """Signed dominant eigenvalue of B by power iteration.

    Starts from the fixed vector linspace(1, 2, n) so results are
    deterministic. Stops once the residual |Bv - lam v| falls below
    rtol * max(1, |lam|); if it never does (clustered or complex dominant
    eigenvalues) the loop runs out and the caller should inspect the
    returned residual.
    """
    B = _check_square(B, "matrix")
    n = B.shape[0]
    if not (rtol > 0.0):
        raise InvalidInput(f"rtol must be > 0, got {rtol}")
    if int(max_iters) < 1:
        raise InvalidInput(f"max_iters must be >= 1, got {max_iters}")
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    lam = 0.0
    residual = math.inf
    iters = 0
    for iters in range(1, int(max_iters) + 1):
        w = B @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return PowerResult(value=0.0, residual=0.0, iters=iters)
        lam = float(v @ w)
        residual = float(np.linalg.norm(w - lam * v))
        if residual <= rtol * max(1.0, abs(lam)):
            break
        v = w / nw
    return PowerResult(value=lam, residual=residual, iters=iters)


def _verify_fixed_point(
    fpmap: FixedPointMap, x_star: np.ndarray, fp_tol: float = 1e-6
) -> np.ndarray:
    x = np.asarray(x_star, dtype=float)
    if x.shape != (fpmap.dim,):
        raise DimensionError(f"x_star has shape {x.shape}, expected ({fpmap.dim},)")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("x_star has non-finite components")
    defect = float(np.linalg.norm(np.asarray(fpmap.eval(x), dtype=float) - x))
    tol = fp_tol * (1.0 + float(np.linalg.norm(x)))
    if defect > tol:
        raise NotAFixedPoint(
            f"|f(x) - x| = {defect:.3e} exceeds {tol:.3e}; pass an actual fixed point"
        )
    return x


def estimate_eigen_range(
    fpmap: FixedPointMap,
    x_star: np.ndarray,
    method: str = "dense",
    asym_tol: float = _REL_ASYM_TOL,
    power_rtol: float = 1e-10,
    power_max_iters: int = 10000,
    fp_tol: float = 1e-6,
) -> EigenRange:
    """Measure the eigenvalue range of B = I - J at a fixed point.

    x_star must satisfy |f(x) - x| <= fp_tol * (1 + |x|); loosen fp_tol
    when probing the range at a pilot iterate that is only approximately
    stationary. The result is an unchecked measurement; clip it before
    building a schedule from it. Resolution order:

    * a map that certifies its Jacobian spectrum (jacobian_spectrum hook)
      is trusted directly, B eigenvalues being 1 minus that spectrum;
    * otherwise the Jacobian comes from the map's analytic jacobian or
      central differences, and "dense" takes exact symmetric eigenvalues.
      A Jacobian that is not symmetric to asym_tol gets symmetrized after
      a SpectrumNotCertifiedReal warning; the symmetrized range is wrong
      for genuinely asymmetric Jacobians, so such maps should provide the
      spectrum hook instead;
    * "power" estimates both endpoints by power iteration with a shifted
      second pass, recording the larger of the two defects as residual.
    """
    x = _verify_fixed_point(fpmap, x_star, fp_tol=fp_tol)

    if fpmap.jacobian_spectrum is not None:
        eig_j = np.asarray(fpmap.jacobian_spectrum(x), dtype=float)
        if eig_j.ndim != 1 or eig_j.size != fpmap.dim:
            raise DimensionError(
                f"jacobian_spectrum returned shape {eig_j.shape}, expected ({fpmap.dim},)"
            )
        if not np.all(np.isfinite(eig_j)):
            raise NonFiniteValue("jacobian_spectrum returned non-finite values")
        eig_b = 1.0 - eig_j
        return EigenRange(float(eig_b.min()), float(eig_b.max()), unchecked=True)

    if fpmap.jacobian is not None:
        J = _check_square(fpmap.jacobian(x), "jacobian")
        if J.shape[0] != fpmap.dim:
            raise DimensionError(
                f"jacobian has shape {J.shape}, expected ({fpmap.dim}, {fpmap.dim})"
            )
    else:
        J = jacobian_fd(fpmap.eval, x)
    B = np.eye(fpmap.dim) - J

    if method == "dense":
        if _rel_asymmetry(B) > asym_tol:
            warnings.warn(
                "Jacobian is not symmetric and the map does not certify a real "
                "spectrum; estimating from the symmetrized matrix",
                SpectrumNotCertifiedReal,
                stacklevel=2,
            )
        lam = symmetric_eigenvalues((B + B.T) / 2.0, asym_tol=math.inf)
        return EigenRange(float(lam[0]), float(lam[-1]), unchecked=True)

    if method == "power":
        first = power_iteration(B, rtol=power_rtol, max_iters=power_max_iters)
        shifted = power_iteration(
            first.value * np.eye(fpmap.dim) - B,
            rtol=power_rtol,
            max_iters=power_max_iters,
        )
        other = first.value - shifted.value
        lo, hi = sorted((first.value, other))
        return EigenRange(
            lo, hi, unchecked=True, residual=max(first.residual, shifted.residual)
        )

    raise InvalidInput(f"unknown method {method!r}, expected 'dense' or 'power'")
