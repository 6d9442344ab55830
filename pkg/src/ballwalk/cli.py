"""Experiment orchestrator.

Each subcommand checks one family of quantitative claims, writes a CSV of the
underlying numbers and a JSON verdict, and exits 0 on pass / 1 on failure.
``report`` folds all verdicts in a directory into summary.json and exits with
the number of failed suites.  Outputs are byte-stable: same config and seed
give identical files at any worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import tolerances as tol
from .brownian import (
    PathConfig,
    exit_continuity_check,
    exit_points_batch,
    reflection_crossing_mc,
    reflection_prob,
    scaling_check,
    simulate_exit,
    tightness_N,
    wos_exit_points,
)
from .harmonic import catalog, estimate_rates, zero_fn
from .hardy_limit import limit_experiment, radius_schedule
from .martingale import (
    MartingaleSample,
    lambda_bar,
    lambda_bar_closed,
    lambda_bar_series,
    maximal_inequality_check,
    monotonicity_report,
    sample_Y_skeleton,
)
from .sphere import SurfaceQuadrature, mc_surface_area, surface_area, surface_integral
from .stats import ks_one_sample, ks_two_sample, mc_estimate
from .streams import rng_stream

EXIT_CONFIG_ERROR = 64

SUITES = (
    "constants",
    "exit-dist",
    "reflection",
    "tightness",
    "scaling",
    "continuity",
    "martingale",
    "hardy-limit",
)


@dataclass(frozen=True)
class RunConfig:
    m: int = 2
    dt: float = 1e-4
    horizon: float = 200.0
    n_paths: int = 4000
    seed: int = 20260809
    q_max: int = 3
    r_trunc: float = 0.999
    variant: str = "conservative-min"
    out_dir: str = "out"
    workers: int = 1

    def validate(self):
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.horizon < self.dt:
            raise ConfigError("horizon must be >= dt")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")
        if self.q_max < 1:
            raise ConfigError("q_max must be >= 1")
        if not 0.0 < self.r_trunc < 1.0:
            raise ConfigError("r_trunc must lie in (0, 1)")
        if self.variant not in ("paper-133", "paper-step10", "conservative-min"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


class ConfigError(ValueError):
    pass


_INT_KEYS = {"m", "n_paths", "seed", "q_max", "workers"}
_FLOAT_KEYS = {"dt", "horizon", "r_trunc"}
_STR_KEYS = {"variant", "out_dir"}


def parse_config_file(path: str) -> dict:
    """Line-based ``key=value`` file; '#' starts a comment; unknown keys error."""
    values: dict = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in _INT_KEYS:
            values[key] = int(val)
        elif key in _FLOAT_KEYS:
            values[key] = float(val)
        elif key in _STR_KEYS:
            values[key] = val
        else:
            raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
    return values


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def write_csv(path: Path, columns: list[str], rows: list[list], meta: dict):
    head = " ".join(f"{k}={v}" for k, v in meta.items())
    lines = [f"# {head}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def verdict(claim: str, target, estimate, tolerance, passed) -> dict:
    return {
        "claim": claim,
        "target": None if target is None else float(target),
        "estimate": None if estimate is None else float(estimate),
        "tolerance": None if tolerance is None else float(tolerance),
        "pass": bool(passed),
    }


def write_suite(out_dir: Path, suite: str, cfg: RunConfig, columns, rows, verdicts) -> bool:
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {"suite": suite, "seed": cfg.seed, "dt": _fmt(cfg.dt), "n_paths": cfg.n_paths}
    write_csv(out_dir / f"{suite}.csv", columns, rows, meta)
    ok = all(v["pass"] for v in verdicts)
    echo = {f.name: getattr(cfg, f.name) for f in fields(RunConfig) if f.name != "out_dir"}
    payload = {
        "suite": suite,
        "seed": cfg.seed,
        "config": echo,
        "verdicts": verdicts,
        "pass": ok,
    }
    (out_dir / f"{suite}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return ok


# ---------------------------------------------------------------- suites


def suite_constants(cfg: RunConfig, out: Path) -> bool:
    rows, verdicts = [], []
    for m in (2, 3, 4, 5):
        closed = surface_area(m, 1.0)
        if m in (2, 3):
            quad = SurfaceQuadrature(m, 1.0, "chart-gauss", 4096 if m == 2 else 192)
            est = surface_integral(lambda z: np.ones(z.shape[0]), quad)
            tolerance = 1e-10 if m == 2 else 1e-8
            claim = f"chart quadrature of 1 over the unit (m-1)-sphere equals sigma({m},1)"
        else:
            mc = mc_surface_area(m, 10**6, cfg.seed + m)
            est = mc.mean
            tolerance = max(5.0 * mc.std_error, 1e-12)
            claim = f"weighted-disc Monte Carlo reproduces sigma({m},1) within 5 se"
        err = abs(est - closed)
        rows.append([m, closed, est, err])
        verdicts.append(verdict(claim, closed, est, tolerance, err <= tolerance))
    # closed forms pinned to their independent expressions
    pinned = {2: 2 * math.pi, 3: 4 * math.pi, 4: 2 * math.pi**2, 5: 8 * math.pi**2 / 3}
    for m, val in pinned.items():
        verdicts.append(
            verdict(
                f"sigma({m},1) closed form equals {val:.6f}...",
                val,
                surface_area(m, 1.0),
                0.0 if m == 4 else 1e-12,
                abs(surface_area(m, 1.0) - val) <= (0.0 if m == 4 else 1e-12),
            )
        )
    return write_suite(out, "constants", cfg, ["m", "closed_form", "quadrature", "abs_err"], rows, verdicts)


def suite_exit_dist(cfg: RunConfig, out: Path) -> bool:
    verdicts = []
    # (a) centered start, m=3: first coordinate of discretized exit points is U[-1, 1]
    cfg3 = PathConfig(m=3, dt=cfg.dt, horizon=cfg.horizon, seed=cfg.seed, stream_id=10)
    taus, pts, cen = exit_points_batch(cfg3, np.zeros(3), 1.0, cfg.n_paths, workers=cfg.workers)
    z1 = pts[~cen, 0]
    ks = ks_one_sample(z1, lambda t: np.clip((t + 1.0) / 2.0, 0.0, 1.0))
    verdicts.append(
        verdict(
            "m=3 centered exit: z1 is uniform on [-1,1] (KS at 5%)",
            0.0,
            ks.statistic,
            ks.threshold,
            ks.passed,
        )
    )
    verdicts.append(
        verdict("centered exit: censoring negligible at this horizon", 0.0, float(cen.mean()), 0.01, cen.mean() <= 0.01)
    )
    # (b) off-center x=(0.5, 0), m=2: exact sampler has E z1 = 0.5
    rng = rng_stream(cfg.seed, 11)
    zw = wos_exit_points(rng, np.array([0.5, 0.0]), 1.0, 5 * cfg.n_paths)
    est = mc_estimate(zw[:, 0])
    verdicts.append(
        verdict(
            "off-center exact exit: E z1 equals the harmonic extension value x1 = 0.5",
            0.5,
            est.mean,
            3.0 * est.std_error,
            abs(est.mean - 0.5) <= 3.0 * est.std_error,
        )
    )
    # (c) engine agreement, m=2, x=(0.5, 0): two-sample KS on z1
    n_half = max(cfg.n_paths // 2, 50)
    cfg2 = PathConfig(m=2, dt=cfg.dt, horizon=cfg.horizon, seed=cfg.seed, stream_id=12)
    _, pts2, cen2 = exit_points_batch(cfg2, np.array([0.5, 0.0]), 1.0, n_half, workers=cfg.workers)
    rng2 = rng_stream(cfg.seed, 13)
    zw2 = wos_exit_points(rng2, np.array([0.5, 0.0]), 1.0, n_half)
    ks2 = ks_two_sample(pts2[~cen2, 0], zw2[:, 0])
    verdicts.append(
        verdict(
            "discretized and exact exit engines sample the same z1 law (KS at 5%)",
            0.0,
            ks2.statistic,
            ks2.threshold,
            ks2.passed,
        )
    )
    # export one demo path trace as (t, x1..xm) rows
    event, trace = simulate_exit(
        PathConfig(m=2, dt=cfg.dt, horizon=cfg.horizon, seed=cfg.seed, stream_id=14),
        np.zeros(2),
        1.0,
    )
    out.mkdir(parents=True, exist_ok=True)
    write_csv(
        out / "exit-dist-trace.csv",
        ["t", "x1", "x2"],
        [list(row) for row in trace],
        {"suite": "exit-dist", "seed": cfg.seed, "tau": _fmt(getattr(event, "tau", float("nan")))},
    )
    rows = [[i, t, *p] for i, (t, p) in enumerate(zip(taus[~cen][:2000], pts[~cen][:2000]))]
    cols = ["path", "tau", "z1", "z2", "z3"]
    return write_suite(out, "exit-dist", cfg, cols, rows, verdicts)


def suite_reflection(cfg: RunConfig, out: Path) -> bool:
    target = reflection_prob(1.0, 1.0)
    est = reflection_crossing_mc(
        1.0, 1.0, cfg.dt, cfg.n_paths, cfg.seed, stream_id=20, workers=cfg.workers
    )
    err = abs(est.mean - target)
    print(f"reflection: target {target:.5f}, estimate {est.mean:.5f} +- {est.std_error:.5f}")
    vvs = [
        verdict(
            "P(sup_{s<=t} B_s >= lam) = 2 (1 - Phi(lam/sqrt(t))) at t=1, lam=1",
            target,
            est.mean,
            0.005,
            err <= 0.005,
        )
    ]
    rows = [[1.0, 1.0, target, est.mean, est.std_error, err]]
    return write_suite(
        out, "reflection", cfg, ["t", "lam", "target", "estimate", "std_error", "abs_err"], rows, vvs
    )


def suite_tightness(cfg: RunConfig, out: Path) -> bool:
    print(f"tightness: N(2,1) = {tightness_N(2.0, 1)}")
    verdicts = [
        verdict("smallest N with 2 Phi(2/sqrt(N)) - 1 < 1/2 is 9", 9, tightness_N(2.0, 1), 0, tightness_N(2.0, 1) == 9)
    ]
    rows = []
    for k in (1, 2, 3):
        n_k = tightness_N(2.0, k)
        horizon = n_k + 1.0
        pc = PathConfig(m=cfg.m, dt=cfg.dt, horizon=horizon, seed=cfg.seed, stream_id=30 + k)
        _, _, cen = exit_points_batch(pc, np.zeros(cfg.m), 1.0, cfg.n_paths, workers=cfg.workers)
        frac = float(cen.mean())
        se = math.sqrt(max(frac * (1 - frac), 1e-300) / cfg.n_paths)
        bound = 2.0 ** (-k + 1)
        rows.append([k, n_k, horizon, frac, se, bound])
        verdicts.append(
            verdict(
                f"P(exit time > {horizon:g}) <= 2^(1-{k}) for the unit ball from 0",
                bound,
                frac,
                bound + 3 * se,
                frac <= bound + 3 * se,
            )
        )
    cols = ["k", "N_2k", "horizon", "censored_frac", "std_error", "bound"]
    return write_suite(out, "tightness", cfg, cols, rows, verdicts)


def suite_scaling(cfg: RunConfig, out: Path) -> bool:
    rep = scaling_check(cfg.seed, 4.0, cfg.n_paths, dt=cfg.dt, m=cfg.m, horizon=cfg.horizon)
    print(f"scaling: KS {rep.ks.statistic:.4f} vs threshold {rep.ks.threshold:.4f} -> {'pass' if rep.ks.passed else 'fail'}")
    verdicts = [
        verdict(
            "exit times from radius 2 and 4x exit times from radius 1 share one law (KS at 5%)",
            0.0,
            rep.ks.statistic,
            rep.ks.threshold,
            rep.ks.passed,
        ),
        verdict(
            "their means agree within 3 combined standard errors",
            rep.mean_unit_scaled,
            rep.mean_scaled,
            3.0 * rep.mean_se,
            abs(rep.mean_scaled - rep.mean_unit_scaled) <= 3.0 * rep.mean_se,
        ),
    ]
    rows = [[4.0, rep.ks.statistic, rep.ks.threshold, rep.mean_scaled, rep.mean_unit_scaled, rep.censored]]
    cols = ["r", "ks_stat", "ks_threshold", "mean_sqrt_r", "mean_r_times_unit", "censored"]
    return write_suite(out, "scaling", cfg, cols, rows, verdicts)


def suite_continuity(cfg: RunConfig, out: Path) -> bool:
    kappa, r1, gap = 2, 0.9, 0.045
    rep = exit_continuity_check(
        cfg.seed, np.zeros(cfg.m), r1, r1 + gap, kappa, cfg.n_paths, dt=cfg.dt, horizon=cfg.horizon
    )
    verdicts = [
        verdict(
            "P(tau'' - tau' > 2^(4-kappa)) <= 2^(1-kappa) for nested balls (kappa=2)",
            rep.bound,
            rep.exceedance,
            rep.bound + 3 * rep.exceedance_se,
            rep.passed,
        ),
        verdict("tau'' >= tau' pathwise", 0.0, rep.min_diff, 0.0, rep.min_diff >= 0.0),
    ]
    rows = [[kappa, r1, r1 + gap, rep.exceedance, rep.exceedance_se, rep.bound, rep.gap_bound, rep.min_diff]]
    cols = ["kappa", "r1", "r2", "exceedance", "std_error", "prob_bound", "gap_bound", "min_diff"]
    return write_suite(out, "continuity", cfg, cols, rows, verdicts)


def suite_martingale(cfg: RunConfig, out: Path) -> bool:
    verdicts = []
    rows = []
    # lambda_bar property suite
    rng = rng_stream(cfg.seed, 40)
    v = rng.uniform(-10.0, 10.0, size=10_000)
    lb = lambda_bar(v)
    ok_bounds = bool(np.all(lb >= 0.0) and np.all(lb <= np.abs(v)))
    verdicts.append(verdict("0 <= lambda_bar(v) <= |v|", 0.0, float(np.max(lb - np.abs(v))), 0.0, ok_bounds))
    h = 1e-2
    second = lambda_bar(v - h) - 2.0 * lambda_bar(v) + lambda_bar(v + h)
    verdicts.append(
        verdict(
            "lambda_bar is convex (second differences >= -1e-12)",
            0.0,
            float(np.min(second)),
            1e-12,
            bool(np.min(second) >= -1e-12),
        )
    )
    branch_gap = max(
        abs(lambda_bar_series(1e-4) - lambda_bar_closed(1e-4)),
        abs(lambda_bar_series(-1e-4) - lambda_bar_closed(-1e-4)),
    )
    verdicts.append(
        verdict("series and closed-form branches agree at the 1e-4 switchover", 0.0, branch_gap, 1e-16, branch_gap <= 1e-16)
    )
    # fair-coin counterexample: premise must fail
    coin = MartingaleSample(np.array([0.0, 1.0]), np.array([[0.0, 1.0], [0.0, -1.0]] * 500))
    coin_rep = maximal_inequality_check(coin, 0.5)
    verdicts.append(
        verdict(
            "premise fails for the +-1 fair coin at eps = 1/2",
            0.0,
            coin_rep.lhs,
            coin_rep.rhs,
            not coin_rep.premise_holds,
        )
    )
    # Y skeleton of x1 between 0.90 and 0.91, premise-verified eps
    u = catalog(2, with_rates=False)[0]
    rng = rng_stream(cfg.seed, 41)
    sk = sample_Y_skeleton(rng, u, np.array([0.90, 0.91]), cfg.n_paths)
    eps_used, rep = None, None
    for eps in (0.3, 0.4, 0.5, 0.7, 1.0, 1.5, 2.0):
        cand = maximal_inequality_check(sk, eps)
        if cand.premise_holds:
            eps_used, rep = eps, cand
            break
    if rep is None:
        verdicts.append(verdict("maximal inequality premise holds at some eps <= 2", None, None, None, False))
    else:
        verdicts.append(
            verdict(
                f"premise holds at eps={eps_used}: P(max_k |Z_k - Z_0| > eps) < eps",
                eps_used,
                rep.exceedance,
                eps_used,
                bool(rep.passed),
            )
        )
        rows.append([eps_used, rep.lhs, rep.lhs_se, rep.rhs, rep.exceedance, rep.exceedance_se])
    # monotonicity of the boundary integrals across the catalog
    grid = np.arange(0.1, 0.951, 0.05)
    for m in (2, 3):
        small = SurfaceQuadrature(m, 1.0, "chart-gauss", 128)
        big = SurfaceQuadrature(m, 1.0, "chart-gauss", 2048 if m == 2 else 224)
        for member in catalog(m, with_rates=False):
            quad = big if member.name == "poisson-slice" else small
            mono = monotonicity_report(member, grid, quad)
            verdicts.append(
                verdict(
                    f"I1, I3 nondecreasing, I2 <= 1, I3 = I2 - 1 + I1 for {member.name} (m={m})",
                    0.0,
                    mono.max_down_step,
                    tol.QUAD_MONOTONE_TOL,
                    mono.passed,
                )
            )
    cols = ["eps", "premise_lhs", "premise_lhs_se", "premise_rhs", "exceedance", "exceedance_se"]
    return write_suite(out, "martingale", cfg, cols, rows, verdicts)


def suite_hardy_limit(cfg: RunConfig, out: Path) -> bool:
    verdicts = []
    rows = []
    slice_quad = SurfaceQuadrature(2, 1.0, "chart-gauss", 1024)
    members = {
        "x1": estimate_rates(catalog(2, with_rates=False)[0]),
        "poisson-slice": estimate_rates(catalog(2, with_rates=False)[-1], quad=slice_quad),
        "zero": zero_fn(2).hardy,
    }
    fns = {
        "x1": catalog(2, with_rates=False)[0],
        "poisson-slice": catalog(2, with_rates=False)[-1],
        "zero": zero_fn(2),
    }
    pc = PathConfig(m=2, dt=cfg.dt, horizon=cfg.horizon, seed=cfg.seed, stream_id=50)
    for name, rates in members.items():
        sched = radius_schedule(rates, cfg.q_max, cfg.variant)
        rep = limit_experiment(
            fns[name], sched, replace(pc, stream_id=50 + list(members).index(name)),
            cfg.n_paths, cfg.r_trunc, workers=cfg.workers,
        )
        for row in rep.rows:
            rows.append([name, row.q, row.radius, row.bound, row.exceedance, row.std_error, row.passed])
            verdicts.append(
                verdict(
                    f"{name}: P(sup over [tau(r_{row.q}), tau(r_trunc)) of |V - u(B_s)| > 2^(3-{row.q})) <= 2^(4-{row.q})",
                    row.bound,
                    row.exceedance,
                    row.bound + 3 * row.std_error,
                    row.passed,
                )
            )
        verdicts.append(
            verdict(
                f"{name}: censoring within the tightness allowance",
                rep.censor_allowance,
                rep.n_censored / rep.n_paths,
                rep.censor_allowance,
                rep.censor_ok,
            )
        )
        if name == "zero":
            total = sum(r.exceedance for r in rep.rows)
            verdicts.append(verdict("zero function: exceedance identically 0", 0.0, total, 0.0, total == 0.0))
    # variant dominance: conservative-min radii dominate both published constants
    rates = members["x1"]
    cons = radius_schedule(rates, cfg.q_max, "conservative-min").radii
    for var in ("paper-133", "paper-step10"):
        other = radius_schedule(rates, cfg.q_max, var).radii
        ok = bool(np.all(cons >= other - 1e-15))
        verdicts.append(verdict(f"conservative-min radii dominate {var}", 0.0, float(np.min(cons - other)), 0.0, ok))
    cols = ["member", "q", "r_q", "bound", "exceedance", "std_error", "pass"]
    return write_suite(out, "hardy-limit", cfg, cols, rows, verdicts)


def run_report(out: Path) -> int:
    """Fold every suite verdict in ``out`` into summary.json; exit = #failed."""
    suites = []
    failed = 0
    for name in SUITES:
        p = out / f"{name}.json"
        if not p.exists():
            continue
        data = json.loads(p.read_text())
        suites.append({"suite": name, "pass": data["pass"], "n_verdicts": len(data["verdicts"])})
        if not data["pass"]:
            failed += 1
    summary = {"suites": suites, "failed": failed}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return failed


_RUNNERS = {
    "constants": suite_constants,
    "exit-dist": suite_exit_dist,
    "reflection": suite_reflection,
    "tightness": suite_tightness,
    "scaling": suite_scaling,
    "continuity": suite_continuity,
    "martingale": suite_martingale,
    "hardy-limit": suite_hardy_limit,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ballwalk", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in (*SUITES, "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--paths", type=int, default=None, help="number of Monte Carlo paths")
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--variant", default=None, choices=["paper-133", "paper-step10", "conservative-min"])
        p.add_argument("--q-max", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--m", type=int, default=None)
        p.add_argument("--horizon", type=float, default=None)
    return ap


def load_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    overrides = {
        "seed": args.seed,
        "out_dir": args.out,
        "n_paths": args.paths,
        "dt": args.dt,
        "variant": args.variant,
        "q_max": args.q_max,
        "workers": args.workers,
        "m": args.m,
        "horizon": args.horizon,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    out = Path(cfg.out_dir)
    if args.command == "report":
        return run_report(out)
    ok = _RUNNERS[args.command](cfg, out)
    print(f"{args.command}: {'PASS' if ok else 'FAIL'} (outputs in {out})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
