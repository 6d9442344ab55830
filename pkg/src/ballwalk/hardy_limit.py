"""Rate calculus and the Monte Carlo check of the boundary limit theorem.

The theorem: for a harmonic u whose boundary integrals I1 and I2 converge
with known rates, there is an increasing radius ladder r_q -> 1 and a limit
value V with, for every q,

    P( sup over s in [tau(r_q), tau(1)) of |V - u(B_s)| > 2^(3-q) ) < 2^(4-q).

The experiment truncates at a radius just below 1, takes V as u at the
truncation exit point, and measures the per-q exceedance along discretized
paths.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .brownian import PathConfig, _chunk_ranges, _crossing_fraction, _project, tightness_N
from .harmonic import HarmonicFn, RateData
from .sphere import eval_on_points
from .streams import rng_stream

VARIANTS = ("paper-133", "paper-step10", "conservative-min")


def delta3(rates: RateData, eps: float) -> float:
    """Combined rate min(delta1(eps/2), delta2(eps/2)) for the integral I3."""
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    return min(rates.delta1(eps / 2.0), rates.delta2(eps / 2.0))


def gamma_limit(rates: RateData) -> float:
    """Limit of I3 as r -> 1: b2 - 1 + b1."""
    return rates.b2 - 1.0 + rates.b1


@dataclass(frozen=True)
class RadiusSchedule:
    q_max: int
    radii: np.ndarray
    rate_source: RateData
    variant: str

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.size != self.q_max or np.any(np.diff(r) <= 0) or r[0] <= 0 or r[-1] >= 1:
            raise ValueError("radii must be strictly increasing in (0, 1), one per q")
        object.__setattr__(self, "radii", r)


def schedule_epsilons(q: int, b1: float, variant: str) -> float:
    """Per-q tolerance fed to delta3; the two published constants disagree,
    so ``conservative-min`` takes the smaller (which satisfies both chains)."""
    damp = math.exp(-3.0 * 2.0**q * b1)
    e_133 = (1.0 / 12.0) * 2.0**-q * damp
    e_s10 = (1.0 / 6.0) * 2.0 ** (-3 * q) * damp
    if variant == "paper-133":
        return e_133
    if variant == "paper-step10":
        return e_s10
    if variant == "conservative-min":
        return min(e_133, e_s10)
    raise ValueError(f"unknown schedule variant {variant!r}")


def radius_schedule(rates: RateData, q_max: int, variant: str = "conservative-min") -> RadiusSchedule:
    """Radius ladder r_q = 1 - delta3(eps_q), monotonized by running maxima.

    Estimated rates saturate below their grid resolution, which can tie
    consecutive radii; ties are broken by halving the remaining distance to 1,
    staying below every radius the unsaturated schedule would give.  Raises
    if the ladder escapes (0, 1).
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    radii = []
    prev = 0.0
    for q in range(1, q_max + 1):
        eq = schedule_epsilons(q, rates.b1, variant)
        r = 1.0 - delta3(rates, eq)
        r = max(r, prev)
        if r <= prev:
            r = 1.0 - (1.0 - prev) / 2.0
        if not 0.0 < r < 1.0:
            raise ValueError(f"schedule escaped (0, 1) at q={q}: rates too coarse for q_max")
        radii.append(r)
        prev = r
    return RadiusSchedule(q_max=q_max, radii=np.array(radii), rate_source=rates, variant=variant)


@dataclass(frozen=True)
class LimitRow:
    q: int
    radius: float
    bound: float
    exceedance: float
    std_error: float
    passed: bool


@dataclass(frozen=True)
class LimitReport:
    rows: list[LimitRow]
    n_paths: int
    n_censored: int
    censor_allowance: float
    censor_ok: bool
    truncation_gap: float | None
    passed: bool


def limit_experiment(
    u: HarmonicFn,
    sched: RadiusSchedule,
    cfg: PathConfig,
    n_paths: int,
    r_trunc: float = 0.999,
    workers: int = 1,
) -> LimitReport:
    """Per-q exceedance of |V - u(B_s)| > 2^(3-q) along discretized paths.

    Each path runs from 0 until it leaves D(0, r_trunc); V is u at that exit
    point.  For every scheduled radius the first grid crossing opens the
    observation window, and the running min/max of u along the remaining path
    gives the sup exactly.  Censored paths (horizon hit) are excluded and
    counted against the tightness allowance for the configured horizon.
    """
    if not sched.radii[-1] < r_trunc < 1.0:
        raise ValueError("need max schedule radius < r_trunc < 1")
    q_max = sched.q_max
    radii = sched.radii
    sup_dev = np.full((n_paths, q_max), np.nan)
    censored = np.zeros(n_paths, dtype=bool)
    trunc_gap = np.zeros(n_paths) if u.boundary_fn is not None else None

    def run_chunk(chunk_index: int, lo: int, hi: int):
        rng = rng_stream(cfg.seed, cfg.stream_id, chunk_index)
        c = hi - lo
        m = cfg.m
        x = np.zeros((c, m))
        t = np.zeros(c)
        umin = np.full((c, q_max), np.inf)
        umax = np.full((c, q_max), -np.inf)
        crossed = np.zeros((c, q_max), dtype=bool)
        vhat = np.full(c, np.nan)
        exit_pts = np.full((c, m), np.nan)
        cen = np.zeros(c, dtype=bool)
        alive = np.arange(c)
        sq = math.sqrt(cfg.dt)
        n_steps = int(math.ceil(cfg.horizon / cfg.dt))
        for _ in range(n_steps):
            if alive.size == 0:
                break
            xi = rng.standard_normal((alive.size, m)) * sq
            uu = rng.random(alive.size)
            xa = x[alive]
            xn = xa + xi
            nrm = np.linalg.norm(xn, axis=1)
            exited = nrm >= r_trunc
            if cfg.bridge_correction:
                d0 = r_trunc - np.linalg.norm(xa, axis=1)
                d1 = r_trunc - nrm
                exited |= (~exited) & (uu < np.exp(-2.0 * d0 * np.maximum(d1, 0.0) / cfg.dt))
            inside = ~exited
            if np.any(inside):
                rows = alive[inside]
                crossed[rows] |= nrm[inside, None] >= radii[None, :]
                windowed = crossed[rows, 0]  # radii increase, so q=1 opens first
                if np.any(windowed):
                    wrows = rows[windowed]
                    uv = eval_on_points(u.eval, xn[inside][windowed])
                    cmask = crossed[wrows]
                    uvc = np.where(cmask, uv[:, None], np.nan)
                    umin[wrows] = np.fmin(umin[wrows], uvc)
                    umax[wrows] = np.fmax(umax[wrows], uvc)
            if np.any(exited):
                rows = alive[exited]
                xa_e, xn_e = xa[exited], xn[exited]
                hard = np.linalg.norm(xn_e, axis=1) >= r_trunc
                pts = np.empty((rows.size, m))
                if np.any(hard):
                    s = _crossing_fraction(xa_e[hard], xn_e[hard], r_trunc)
                    pts[hard] = _project(xa_e[hard] + s[:, None] * (xn_e[hard] - xa_e[hard]), r_trunc)
                if np.any(~hard):
                    pts[~hard] = _project(0.5 * (xa_e[~hard] + xn_e[~hard]), r_trunc)
                exit_pts[rows] = pts
                vhat[rows] = eval_on_points(u.eval, pts)
            x[alive] = xn
            t[alive] = t[alive] + cfg.dt
            alive = alive[~exited]
        cen[alive] = True
        dev_hi = umax - vhat[:, None]
        dev_lo = vhat[:, None] - umin
        dev = np.maximum(dev_hi, dev_lo)
        dev[~np.isfinite(dev)] = 0.0  # window never opened or empty
        dev[cen] = np.nan
        sup_dev[lo:hi] = dev
        censored[lo:hi] = cen
        if trunc_gap is not None:
            good = ~cen
            proj = np.full((c, m), np.nan)
            proj[good] = exit_pts[good] / r_trunc
            g2 = np.zeros(c)
            g2[good] = np.abs(vhat[good] - eval_on_points(u.boundary_fn, proj[good]))
            trunc_gap[lo:hi] = g2

    ranges = _chunk_ranges(n_paths)
    if workers <= 1:
        for ci, (lo, hi) in enumerate(ranges):
            run_chunk(ci, lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(run_chunk, ci, lo, hi) for ci, (lo, hi) in enumerate(ranges)]
            for f in futs:
                f.result()

    n_cen = int(censored.sum())
    n_ok = n_paths - n_cen
    rows: list[LimitRow] = []
    all_pass = True
    for j in range(q_max):
        bound = 2.0 ** (-(j + 1) + 4)
        thr = 2.0 ** (-(j + 1) + 3)
        devs = sup_dev[~censored, j]
        p = float(np.mean(devs > thr)) if n_ok else 1.0
        se = math.sqrt(max(p * (1.0 - p), 1e-300) / max(n_ok, 1))
        ok = p <= bound + 3.0 * se
        all_pass &= ok
        rows.append(LimitRow(j + 1, float(radii[j]), bound, p, se, ok))

    # Tightness allowance: the sharpest bound 2^(1-k) whose N_{2,k} the horizon clears.
    k = 0
    while tightness_N(2.0, k + 1) < cfg.horizon:
        k += 1
    allowance = 2.0 ** (-k + 1)
    cen_frac = n_cen / n_paths
    cen_se = math.sqrt(max(cen_frac * (1 - cen_frac), 1e-300) / n_paths)
    cen_ok = cen_frac <= allowance + 3.0 * cen_se
    gap = float(np.max(trunc_gap)) if trunc_gap is not None and n_ok else None
    return LimitReport(
        rows=rows,
        n_paths=n_paths,
        n_censored=n_cen,
        censor_allowance=allowance,
        censor_ok=cen_ok,
        truncation_gap=gap,
        passed=all_pass and cen_ok,
    )
