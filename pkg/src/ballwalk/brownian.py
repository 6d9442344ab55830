"""Brownian paths, first-exit engines, and exit-time distribution checks.

Two engines produce exit points from a ball centered at the origin:

* a discretized Euler walk with a half-space Brownian-bridge correction for
  sub-step excursions (the standard remedy for exit-detection bias), and
* an exact-in-distribution sampler that draws the exit point from its known
  density against the uniform distribution by rejection.

All simulation is chunked over paths with one Philox stream per chunk, so
results are a function of (seed, stream_id, config) alone, independent of
how chunks are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .sphere import uniform_sphere_sample
from .stats import KsReport, McEstimate, ks_two_sample, mc_estimate
from .streams import rng_stream

CHUNK = 8192  # paths per rng stream; fixed so worker count cannot matter


def normal_cdf(x):
    """Standard normal CDF via the complementary error function (<= 1e-12 abs)."""
    return special.ndtr(x)


def reflection_prob(t: float, lam: float) -> float:
    """P(sup over [0, t] of a standard 1-d Brownian motion >= lam).

    Equals 2 (1 - Phi(lam / sqrt(t))); evaluated through the lower tail for
    accuracy at large lam / sqrt(t).
    """
    if not (t > 0.0 and lam > 0.0):
        raise ValueError("reflection_prob needs t > 0 and lam > 0")
    return float(2.0 * special.ndtr(-lam / math.sqrt(t)))


def tightness_N(r_tilde: float, k: int) -> int:
    """Smallest positive integer N with 2 Phi(r_tilde / sqrt(N)) - 1 < 2^-k.

    Nondecreasing in k; bounds P(exit time > t) <= 2^(1-k) for t > N.
    """
    if not r_tilde > 0.0:
        raise ValueError("r_tilde must be positive")
    if k < 0:
        raise ValueError("k must be >= 0")
    target = 2.0 ** (-k)

    def ok(n: int) -> bool:
        return 2.0 * float(special.ndtr(r_tilde / math.sqrt(n))) - 1.0 < target

    if target >= 1.0:
        return 1
    x = float(special.ndtri((1.0 + target) / 2.0))
    n = max(1, int((r_tilde / x) ** 2) + 1)
    while not ok(n):
        n += 1
    while n > 1 and ok(n - 1):
        n -= 1
    return n


@dataclass(frozen=True)
class PathConfig:
    """Discretized-path settings; (seed, stream_id) key the random stream."""

    m: int
    dt: float
    horizon: float
    seed: int
    stream_id: int = 0
    bridge_correction: bool = True

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("dimension must be >= 1")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.horizon < self.dt:
            raise ValueError("horizon must be >= dt")


@dataclass(frozen=True)
class ExitEvent:
    tau: float
    exit_point: np.ndarray
    method: str
    dt_used: float | None = None


@dataclass(frozen=True)
class CensoredExit:
    """Horizon ran out before the path left the ball."""

    elapsed: float


def _project(points: np.ndarray, r: float) -> np.ndarray:
    nrm = np.linalg.norm(points, axis=-1, keepdims=True)
    return points * (r / nrm)


def _crossing_fraction(x0: np.ndarray, x1: np.ndarray, r: float) -> np.ndarray:
    """Bisection for s in [0,1] with |x0 + s (x1 - x0)| = r, rows vectorized."""
    lo = np.zeros(x0.shape[0])
    hi = np.ones(x0.shape[0])
    d = x1 - x0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        inside = np.linalg.norm(x0 + mid[:, None] * d, axis=1) < r
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def simulate_exit(cfg: PathConfig, x0, r: float):
    """One discretized path until it leaves D(0, r); returns (event, trace).

    The trace rows are (t, x_1 .. x_m) including the start and the exit (or
    censoring) point.  At a grid crossing the exit time comes from bisection
    on the linear interpolant; between two interior steps a sub-step
    excursion is declared with probability exp(-2 d0 d1 / dt) where d0, d1
    are the distances to the sphere, and then the exit is placed at the
    midpoint time with the midpoint projected radially to the sphere.
    """
    x0 = np.asarray(x0, dtype=float)
    if not float(np.linalg.norm(x0)) < r:
        raise ValueError("start must lie in the open ball")
    rng = rng_stream(cfg.seed, cfg.stream_id)
    sq = math.sqrt(cfg.dt)
    rows = [np.concatenate([[0.0], x0])]
    x = x0.copy()
    t = 0.0
    while t < cfg.horizon:
        step = rng.standard_normal(cfg.m) * sq
        u = rng.random()
        x_new = x + step
        t_new = t + cfg.dt
        if float(np.linalg.norm(x_new)) >= r:
            s = float(_crossing_fraction(x[None, :], x_new[None, :], r)[0])
            tau = t + s * cfg.dt
            pt = _project(x + s * (x_new - x), r)
            rows.append(np.concatenate([[tau], pt]))
            return ExitEvent(tau, pt, "discretized", cfg.dt), np.array(rows)
        if cfg.bridge_correction:
            d0 = r - float(np.linalg.norm(x))
            d1 = r - float(np.linalg.norm(x_new))
            if u < math.exp(-2.0 * d0 * d1 / cfg.dt):
                tau = t + 0.5 * cfg.dt
                pt = _project(0.5 * (x + x_new), r)
                rows.append(np.concatenate([[tau], pt]))
                return ExitEvent(tau, pt, "discretized", cfg.dt), np.array(rows)
        x, t = x_new, t_new
        rows.append(np.concatenate([[t], x]))
    return CensoredExit(elapsed=t), np.array(rows)


def _chunk_ranges(n: int):
    return [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]


def exit_points_batch(cfg: PathConfig, x0, r: float, n_paths: int, workers: int = 1):
    """Vectorized discretized exits for many paths.

    Returns (taus, points, censored): censored paths carry the elapsed time
    in ``taus`` and NaN rows in ``points``.  Chunks of CHUNK paths each own
    stream (seed, stream_id, chunk); output is byte-identical for any
    ``workers``.
    """
    x0 = np.asarray(x0, dtype=float)
    if not float(np.linalg.norm(x0)) < r:
        raise ValueError("start must lie in the open ball")
    taus = np.empty(n_paths)
    points = np.full((n_paths, cfg.m), np.nan)
    censored = np.zeros(n_paths, dtype=bool)

    def run_chunk(chunk_index: int, lo: int, hi: int):
        rng = rng_stream(cfg.seed, cfg.stream_id, chunk_index)
        c = hi - lo
        x = np.tile(x0, (c, 1))
        t = np.zeros(c)
        alive = np.arange(c)
        ctau = np.empty(c)
        cpts = np.full((c, cfg.m), np.nan)
        ccen = np.zeros(c, dtype=bool)
        sq = math.sqrt(cfg.dt)
        n_steps = int(math.ceil(cfg.horizon / cfg.dt))
        for _ in range(n_steps):
            if alive.size == 0:
                break
            xi = rng.standard_normal((alive.size, cfg.m)) * sq
            u = rng.random(alive.size)
            xa = x[alive]
            xn = xa + xi
            t_new = t[alive] + cfg.dt
            nrm_new = np.linalg.norm(xn, axis=1)
            crossed = nrm_new >= r
            if cfg.bridge_correction:
                d0 = r - np.linalg.norm(xa, axis=1)
                d1 = r - nrm_new
                bridge = (~crossed) & (u < np.exp(-2.0 * d0 * np.maximum(d1, 0.0) / cfg.dt))
            else:
                bridge = np.zeros(alive.size, dtype=bool)
            if np.any(crossed):
                idx = alive[crossed]
                s = _crossing_fraction(xa[crossed], xn[crossed], r)
                ctau[idx] = t[idx] + s * cfg.dt
                cpts[idx] = _project(xa[crossed] + s[:, None] * (xn[crossed] - xa[crossed]), r)
            if np.any(bridge):
                idx = alive[bridge]
                ctau[idx] = t[idx] + 0.5 * cfg.dt
                cpts[idx] = _project(0.5 * (xa[bridge] + xn[bridge]), r)
            done = crossed | bridge
            x[alive] = xn
            t[alive] = t_new
            alive = alive[~done]
        if alive.size:
            ccen[alive] = True
            ctau[alive] = t[alive]
        taus[lo:hi] = ctau
        points[lo:hi] = cpts
        censored[lo:hi] = ccen

    ranges = _chunk_ranges(n_paths)
    if workers <= 1:
        for ci, (lo, hi) in enumerate(ranges):
            run_chunk(ci, lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(run_chunk, ci, lo, hi) for ci, (lo, hi) in enumerate(ranges)]
            for f in futs:
                f.result()
    return taus, points, censored


def wos_density_bounds(s: float, m: int) -> tuple[float, float]:
    """Range of the exit-point density against uniform for a start at |x| = s."""
    return (1.0 - s * s) / (1.0 + s) ** m, (1.0 - s * s) / (1.0 - s) ** m


def wos_exit_points(rng: np.random.Generator, x, r: float, n: int) -> np.ndarray:
    """Exact-in-distribution exit points of D(0, r) for a start at x (rows, n of them).

    For a centered start the law is uniform; otherwise rejection sampling
    against the uniform proposal with the density's maximum
    (1 - s^2) / (1 - s)^m, s = |x| / r, attained at the nearest boundary
    point, as acceptance bound.
    """
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    s = float(np.linalg.norm(x)) / r
    if not s < 1.0:
        raise ValueError("start must lie in the open ball")
    if s < 1e-12:
        return uniform_sphere_sample(rng, m, r=r, size=n)
    xb = x / r
    mmax = (1.0 - s * s) / (1.0 - s) ** m
    out = np.empty((n, m))
    need = n
    while need:
        batch = max(256, int(need / max(1e-3, 1.0 / mmax) * 1.2))
        batch = min(batch, 4_000_000)
        z = uniform_sphere_sample(rng, m, size=batch)
        f = (1.0 - s * s) / np.linalg.norm(z - xb, axis=1) ** m
        keep = rng.random(batch) * mmax < f
        got = z[keep][:need]
        out[n - need : n - need + got.shape[0]] = got
        need -= got.shape[0]
    return r * out


def wos_exit_point(rng: np.random.Generator, x, r: float) -> np.ndarray:
    """Single exact exit point; see wos_exit_points."""
    return wos_exit_points(rng, x, r, 1)[0]


def wos_from_many(rng: np.random.Generator, xs: np.ndarray, r: float) -> np.ndarray:
    """Exit points of D(0, r) for one path each starting at the rows of xs."""
    xs = np.asarray(xs, dtype=float)
    n, m = xs.shape
    s = np.linalg.norm(xs, axis=1) / r
    if not np.all(s < 1.0):
        raise ValueError("all starts must lie in the open ball")
    out = np.empty((n, m))
    central = s < 1e-12
    if np.any(central):
        out[central] = uniform_sphere_sample(rng, m, size=int(central.sum()))
    pending = np.flatnonzero(~central)
    while pending.size:
        z = uniform_sphere_sample(rng, m, size=pending.size)
        sp = s[pending]
        f = (1.0 - sp * sp) / np.linalg.norm(z - xs[pending] / r, axis=1) ** m
        mmax = (1.0 - sp * sp) / (1.0 - sp) ** m
        keep = rng.random(pending.size) * mmax < f
        out[pending[keep]] = z[keep]
        pending = pending[~keep]
    return r * out


def reflection_crossing_mc(
    t: float,
    lam: float,
    dt: float,
    n_paths: int,
    seed: int,
    stream_id: int = 0,
    bridge_correction: bool = True,
    workers: int = 1,
) -> McEstimate:
    """Monte Carlo P(sup over [0, t] of a 1-d Brownian path >= lam).

    Euler steps plus the half-space bridge correction for sub-step crossings,
    the empirical counterpart of ``reflection_prob``.
    """
    if not (t > 0.0 and lam > 0.0 and dt > 0.0):
        raise ValueError("t, lam, dt must be positive")
    hits = np.zeros(n_paths, dtype=bool)

    def run_chunk(chunk_index: int, lo: int, hi: int):
        rng = rng_stream(seed, stream_id, chunk_index)
        c = hi - lo
        x = np.zeros(c)
        alive = np.arange(c)
        hit = np.zeros(c, dtype=bool)
        sq = math.sqrt(dt)
        for _ in range(int(round(t / dt))):
            if alive.size == 0:
                break
            xi = rng.standard_normal(alive.size) * sq
            u = rng.random(alive.size)
            xa = x[alive]
            xn = xa + xi
            crossed = xn >= lam
            if bridge_correction:
                p = np.exp(-2.0 * (lam - xa) * np.maximum(lam - xn, 0.0) / dt)
                crossed |= (~crossed) & (u < p)
            hit[alive[crossed]] = True
            x[alive] = xn
            alive = alive[~crossed]
        hits[lo:hi] = hit

    ranges = _chunk_ranges(n_paths)
    if workers <= 1:
        for ci, (lo, hi) in enumerate(ranges):
            run_chunk(ci, lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(run_chunk, ci, lo, hi) for ci, (lo, hi) in enumerate(ranges)]
            for f in futs:
                f.result()
    p = float(np.mean(hits))
    se = math.sqrt(max(p * (1.0 - p), 1e-300) / n_paths)
    return McEstimate(p, se, n_paths)


@dataclass(frozen=True)
class ScalingReport:
    ks: KsReport
    mean_scaled: float
    mean_unit_scaled: float
    mean_se: float
    censored: int


def scaling_check(
    seed: int,
    r: float,
    n_paths: int,
    dt: float = 1e-4,
    m: int = 2,
    horizon: float = 400.0,
) -> ScalingReport:
    """Exit times from radius sqrt(r) against r times exit times from radius 1.

    Time scaling says the two laws are equal; the report carries the
    two-sample KS verdict and the two means.
    """
    if not r > 0.0:
        raise ValueError("r must be positive")
    cfg_a = PathConfig(m=m, dt=dt, horizon=horizon, seed=seed, stream_id=0)
    cfg_b = PathConfig(m=m, dt=dt, horizon=horizon, seed=seed, stream_id=1)
    tau_a, _, cen_a = exit_points_batch(cfg_a, np.zeros(m), math.sqrt(r), n_paths)
    tau_b, _, cen_b = exit_points_batch(cfg_b, np.zeros(m), 1.0, n_paths)
    a = tau_a[~cen_a]
    b = r * tau_b[~cen_b]
    ks = ks_two_sample(a, b)
    ea, eb = mc_estimate(a), mc_estimate(b)
    se = math.hypot(ea.std_error, eb.std_error)
    return ScalingReport(ks, ea.mean, eb.mean, se, int(cen_a.sum() + cen_b.sum()))


@dataclass(frozen=True)
class ContinuityReport:
    exceedance: float
    exceedance_se: float
    bound: float
    gap_bound: float
    passed: bool
    min_diff: float


def exit_continuity_check(
    seed: int,
    x,
    r1: float,
    r2: float,
    kappa: int,
    n_paths: int,
    dt: float = 1e-4,
    horizon: float = 400.0,
) -> ContinuityReport:
    """Coupled exits from the nested balls D(0, r1) and D(0, r2).

    Preconditions (checked, named on failure): 0 <= r2 - r1 < 2^(-kappa-1)
    and 2 Phi((r2 - r1) / sqrt(2^(-kappa-1))) - 1 < 2^(-kappa-1).  The report
    compares the empirical P(tau2 - tau1 > 2^(-kappa+4)) with the bound
    2^(-kappa+1).  Both crossings are read off the same Euler path so the
    coupling is exact; tau2 >= tau1 pathwise by construction.
    """
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    gap = r2 - r1
    half = 2.0 ** (-kappa - 1)
    if not 0.0 <= gap < half:
        raise ValueError(f"precondition failed: r2 - r1 = {gap} not in [0, 2^-(kappa+1)) = [0, {half})")
    stat = 2.0 * float(special.ndtr(gap / math.sqrt(half))) - 1.0
    if not stat < half:
        raise ValueError(
            f"precondition failed: 2 Phi((r2-r1)/sqrt(2^-(kappa+1))) - 1 = {stat:.6f} >= {half}"
        )
    if not float(np.linalg.norm(x)) < r1:
        raise ValueError("start must lie inside the inner ball")
    exceed_thr = 2.0 ** (-kappa + 4)
    n_exc = 0
    n_done = 0
    min_diff = math.inf

    for ci, (lo, hi) in enumerate(_chunk_ranges(n_paths)):
        rng = rng_stream(seed, 0, ci)
        c = hi - lo
        xs = np.tile(x, (c, 1))
        t = np.zeros(c)
        tau1 = np.full(c, np.nan)
        alive = np.arange(c)
        sq = math.sqrt(dt)
        n_steps = int(math.ceil(horizon / dt))
        diffs = np.full(c, np.nan)
        for _ in range(n_steps):
            if alive.size == 0:
                break
            xi = rng.standard_normal((alive.size, m)) * sq
            xn = xs[alive] + xi
            t_new = t[alive] + dt
            nrm = np.linalg.norm(xn, axis=1)
            first = np.isnan(tau1[alive]) & (nrm >= r1)
            tau1[alive[first]] = t_new[first]
            out2 = nrm >= r2
            if np.any(out2):
                idx = alive[out2]
                diffs[idx] = t_new[out2] - tau1[idx]
            xs[alive] = xn
            t[alive] = t_new
            alive = alive[~out2]
        done = ~np.isnan(diffs)
        n_done += int(done.sum())
        n_exc += int(np.sum(diffs[done] > exceed_thr))
        if np.any(done):
            min_diff = min(min_diff, float(np.min(diffs[done])))
    p = n_exc / max(n_done, 1)
    se = math.sqrt(max(p * (1.0 - p), 1e-300) / max(n_done, 1))
    bound = 2.0 ** (-kappa + 1)
    return ContinuityReport(p, se, bound, exceed_thr, p <= bound + 3.0 * se, min_diff)
