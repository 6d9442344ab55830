"""The convex witness function, the martingale maximal inequality, and the
exit-time martingale of a harmonic function.

The key object is Y_r = u(B at the exit of D(0, r)), sampled jointly over an
increasing radius ladder by chaining exact exit points, so the maximal
inequality can be checked without time-discretization bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .brownian import wos_from_many
from .harmonic import HarmonicFn, hardy_integrals
from .sphere import SurfaceQuadrature, eval_on_points
from .stats import mc_estimate

_SERIES_CUTOFF = 1e-4


def lambda_bar(v):
    """exp(-|v|) - 1 + |v|, the symmetric convex witness with lambda_bar <= |v|.

    For |v| below 1e-4 the alternating series v^2/2! - |v|^3/3! + ... is used
    so the three-term cancellation cannot eat the value; above, expm1 keeps
    full precision.  Accepts scalars or arrays.
    """
    a = np.abs(np.asarray(v, dtype=float))
    small = a < _SERIES_CUTOFF
    out = np.empty_like(a)
    s = a[small]
    out[small] = 0.5 * s * s * (1.0 - (s / 3.0) * (1.0 - (s / 4.0) * (1.0 - s / 5.0)))
    big = a[~small]
    out[~small] = np.expm1(-big) + big
    return float(out) if np.isscalar(v) or np.asarray(v).ndim == 0 else out


def lambda_bar_series(v: float) -> float:
    """Series branch regardless of magnitude (exposed for branch-agreement tests)."""
    s = abs(float(v))
    return 0.5 * s * s * (1.0 - (s / 3.0) * (1.0 - (s / 4.0) * (1.0 - s / 5.0)))


def lambda_bar_closed(v: float) -> float:
    """Closed-form branch regardless of magnitude."""
    s = abs(float(v))
    return float(np.expm1(-s) + s)


@dataclass(frozen=True)
class MartingaleSample:
    """Sampled martingale: values[i, j] is path i observed at stage j."""

    times_or_radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times_or_radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != t.size or v.shape[1] < 1:
            raise ValueError("values must be (paths, stages) matching times_or_radii")
        if np.any(np.diff(t) < 0):
            raise ValueError("times_or_radii must be nondecreasing")
        object.__setattr__(self, "times_or_radii", t)
        object.__setattr__(self, "values", v)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def stages(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class MaximalInequalityReport:
    """Both sides of the premise with 3-sigma margins, and the conclusion check.

    ``premise_holds`` is decided conservatively: the left side plus three
    standard errors must stay below the right side evaluated at means shifted
    three standard errors against us.  When the premise fails the theorem is
    vacuous and ``passed`` is None.
    """

    premise_holds: bool
    lhs: float
    lhs_se: float
    rhs: float
    exceedance: float
    exceedance_se: float
    bound: float
    passed: bool | None


def maximal_inequality_check(z: MartingaleSample, eps: float) -> MaximalInequalityReport:
    """Check E lb(Z_n) - E lb(Z_0) < (1/6) eps^3 exp(-(3/eps)(E|Z_0| v E|Z_n|))
    and, when it holds with margin, that P(max_k |Z_k - Z_0| > eps) < eps."""
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    vals = z.values
    z0, zn = vals[:, 0], vals[:, -1]
    diff = lambda_bar(zn) - lambda_bar(z0)
    lhs_est = mc_estimate(diff)
    e0, en = mc_estimate(np.abs(z0)), mc_estimate(np.abs(zn))
    worst_mean = max(e0.mean + 3.0 * e0.std_error, en.mean + 3.0 * en.std_error)
    rhs = (eps**3 / 6.0) * math.exp(-(3.0 / eps) * worst_mean)
    premise = (lhs_est.mean + 3.0 * lhs_est.std_error) < rhs
    dev = np.max(np.abs(vals - z0[:, None]), axis=1)
    exc = float(np.mean(dev > eps))
    exc_se = math.sqrt(max(exc * (1.0 - exc), 1e-300) / z.n_paths)
    passed = (exc < eps + 3.0 * exc_se) if premise else None
    return MaximalInequalityReport(
        premise_holds=premise,
        lhs=lhs_est.mean,
        lhs_se=lhs_est.std_error,
        rhs=rhs,
        exceedance=exc,
        exceedance_se=exc_se,
        bound=eps,
        passed=passed,
    )


def sample_Y_skeleton(
    rng: np.random.Generator, u: HarmonicFn, radii, n_paths: int
) -> MartingaleSample:
    """Joint sample of (Y_{r_1}, ..., Y_{r_k}) over n_paths Brownian paths.

    Chains exact exit points through the increasing balls: start at 0, draw
    the exit point of D(0, r_1), from there the exit point of D(0, r_2), and
    so on.  The joint law is exact; no time grid is involved.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 1 or np.any(np.diff(radii) <= 0) or radii[-1] >= 1.0 or radii[0] <= 0.0:
        raise ValueError("radii must be strictly increasing inside (0, 1)")
    xs = np.zeros((n_paths, u.dim))
    values = np.empty((n_paths, radii.size))
    for j, r in enumerate(radii):
        xs = wos_from_many(rng, xs, float(r))
        values[:, j] = eval_on_points(u.eval, xs)
    return MartingaleSample(times_or_radii=radii, values=values)


@dataclass(frozen=True)
class MonotonicityReport:
    r_grid: np.ndarray
    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray
    max_down_step: float   # worst downward step of I1 and I3 (provably monotone)
    i2_down_step: float    # worst downward step of I2 (no direction in general)
    identity_defect: float
    i2_max: float
    passed: bool


def monotonicity_report(u: HarmonicFn, r_grid, quad: SurfaceQuadrature) -> MonotonicityReport:
    """I1, I2, I3 on a radius grid with their largest downward steps.

    Passes when I1 and I3 never step down beyond QUAD_MONOTONE_TOL, I2 stays
    <= 1, and I3 = I2 - 1 + I1 holds to INTEGRAL_IDENTITY_TOL.  I2's worst
    downward step is reported but carries no requirement: any member with
    u(0) = 0 starts I2 at 1 and I2 <= 1 throughout, so I2 can only come down.
    """
    grid = np.asarray(r_grid, dtype=float)
    if np.any(np.diff(grid) <= 0) or grid[0] <= 0.0 or grid[-1] >= 1.0:
        raise ValueError("r_grid must be increasing inside (0, 1)")
    i1 = np.empty(grid.size)
    i2 = np.empty(grid.size)
    i3 = np.empty(grid.size)
    for j, r in enumerate(grid):
        i1[j], i2[j], i3[j] = hardy_integrals(u, float(r), quad)
    down = 0.0
    i2_down = 0.0
    if grid.size > 1:
        down = float(min(np.min(np.diff(i1)), np.min(np.diff(i3))))
        i2_down = float(np.min(np.diff(i2)))
    identity = float(np.max(np.abs(i3 - (i2 - 1.0 + i1))))
    ok = (
        down >= -tol.QUAD_MONOTONE_TOL
        and float(np.max(i2)) <= 1.0 + tol.INTEGRAL_IDENTITY_TOL
        and identity <= tol.INTEGRAL_IDENTITY_TOL
    )
    return MonotonicityReport(grid, i1, i2, i3, down, i2_down, identity, float(np.max(i2)), ok)


def martingale_drift_report(sample: MartingaleSample, n_bins: int = 10) -> float:
    """Worst |z-score| of E[Y_next - Y_prev | Y_prev bucket] over quantile buckets.

    A sampled-martingale witness: conditional increments should vanish, so
    each bucket mean should sit within a few standard errors of zero.
    """
    worst = 0.0
    vals = sample.values
    for j in range(sample.stages - 1):
        prev, nxt = vals[:, j], vals[:, j + 1]
        edges = np.quantile(prev, np.linspace(0.0, 1.0, n_bins + 1))
        for b in range(n_bins):
            lo, hi = edges[b], edges[b + 1]
            mask = (prev >= lo) & (prev <= hi if b == n_bins - 1 else prev < hi)
            if mask.sum() < 20:
                continue
            est = mc_estimate(nxt[mask] - prev[mask])
            if est.std_error > 0:
                worst = max(worst, abs(est.mean) / est.std_error)
    return worst
