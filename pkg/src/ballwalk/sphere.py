"""Surface-area integration, uniform sampling, and volumes for (m-1)-spheres.

The sphere is charted by its first m-1 coordinates theta over the unit
(m-1)-disc, one chart per hemisphere, with area element
r^(m-1) / sqrt(1 - |theta|^2).  The singular weight is never evaluated near
the equator: for m = 2 Chebyshev-Gauss quadrature has exactly that weight,
for m = 3 the substitution rho = sin(u) cancels it, and the Monte Carlo rule
importance-samples theta with density proportional to the weight (drop the
last coordinate of a uniform sphere point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .stats import McEstimate, mc_estimate
from .streams import rng_stream


def surface_area(m: int, r: float = 1.0) -> float:
    """Total surface area of the (m-1)-sphere of radius r.

    sigma_{m,1} = pi^(m/2) m / (m/2)!  for even m, and
    2^((m+1)/2) pi^((m-1)/2) / (1*3*...*(m-2))  for odd m.
    """
    if m < 2:
        raise ValueError("surface_area needs dimension m >= 2")
    if not r > 0.0:
        raise ValueError("radius must be positive")
    if m % 2 == 0:
        s1 = math.pi ** (m // 2) * m / math.factorial(m // 2)
    else:
        odd = 1
        for i in range(1, m - 1, 2):
            odd *= i
        s1 = 2.0 ** ((m + 1) // 2) * math.pi ** ((m - 1) // 2) / odd
    return r ** (m - 1) * s1


def ball_volume(m: int, r: float = 1.0) -> float:
    """Volume of the m-ball of radius r: r^m sigma_{m,1} / m."""
    if m < 2:
        raise ValueError("ball_volume needs dimension m >= 2")
    if not r > 0.0:
        raise ValueError("radius must be positive")
    return r**m * surface_area(m, 1.0) / m


@dataclass(frozen=True)
class SurfaceQuadrature:
    """A concrete rule for integrating over the sphere ``|z| = r`` in R^m.

    ``chart-gauss`` is deterministic and available for m in {2, 3}; for m = 3
    ``node_count`` is the per-axis resolution (total nodes 4 n^2).
    ``chart-montecarlo`` works in any dimension and needs a seed.
    """

    m: int
    r: float = 1.0
    method: str = "chart-gauss"
    node_count: int = 256
    seed: int | None = None

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("quadrature needs dimension m >= 2")
        if not self.r > 0.0:
            raise ValueError("radius must be positive")
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        if self.method == "chart-gauss":
            if self.m not in (2, 3):
                raise ValueError("chart-gauss is only available for m in {2, 3}")
        elif self.method == "chart-montecarlo":
            if self.seed is None:
                raise ValueError("chart-montecarlo needs a seed")
        else:
            raise ValueError(f"unknown quadrature method {self.method!r}")


def quad_nodes(quad: SurfaceQuadrature) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on the sphere ``|z| = r`` and weights summing to ~surface_area.

    Every node pairs the two hemisphere points over the same chart point, so
    integrands odd in the last coordinate cancel exactly.
    """
    m, r, n = quad.m, quad.r, quad.node_count
    if quad.method == "chart-gauss" and m == 2:
        k = np.arange(1, n + 1)
        theta = np.cos((2 * k - 1) * math.pi / (2 * n))  # Chebyshev-Gauss nodes
        h = np.sqrt(1.0 - theta**2)
        pts = np.concatenate(
            [np.column_stack([theta, h]), np.column_stack([theta, -h])]
        )
        w = np.full(2 * n, r * math.pi / n)
        return r * pts, w
    if quad.method == "chart-gauss" and m == 3:
        # rho = sin(u) turns the disc integral into r^2 sin(u) du dphi.
        gl_x, gl_w = np.polynomial.legendre.leggauss(n)
        u = (gl_x + 1.0) * (math.pi / 4.0)
        wu = gl_w * (math.pi / 4.0) * np.sin(u)
        nphi = 2 * n
        phi = 2.0 * math.pi * np.arange(nphi) / nphi
        wphi = 2.0 * math.pi / nphi
        su, cu = np.sin(u), np.cos(u)
        x1 = np.outer(su, np.cos(phi)).ravel()
        x2 = np.outer(su, np.sin(phi)).ravel()
        x3 = np.outer(cu, np.ones(nphi)).ravel()
        pts = np.concatenate(
            [np.column_stack([x1, x2, x3]), np.column_stack([x1, x2, -x3])]
        )
        w = np.concatenate([np.outer(wu, np.full(nphi, wphi)).ravel()] * 2) * r**2
        return r * pts, w
    # Monte Carlo: theta with density prop. to the chart weight is exactly the
    # first m-1 coordinates of a uniform sphere point.
    rng = rng_stream(quad.seed)
    u = uniform_sphere_sample(rng, m, size=n)
    theta = u[:, : m - 1]
    h = np.abs(u[:, m - 1])
    pts = np.concatenate(
        [np.column_stack([theta, h]), np.column_stack([theta, -h])]
    )
    w = np.full(2 * n, surface_area(m, r) / (2 * n))
    return r * pts, w


def eval_on_points(g: Callable, pts: np.ndarray) -> np.ndarray:
    """Evaluate g on rows of pts, accepting vectorized or scalar callables."""
    try:
        vals = np.asarray(g(pts), dtype=float)
        if vals.shape == (pts.shape[0],):
            return vals
    except Exception:
        pass
    return np.array([float(g(p)) for p in pts])


def surface_integral(g: Callable, quad: SurfaceQuadrature) -> float:
    """Approximation of the surface-area integral of g over ``|z| = r``."""
    pts, w = quad_nodes(quad)
    return float(np.dot(w, eval_on_points(g, pts)))


def surface_integral_report(g: Callable, quad: SurfaceQuadrature) -> tuple[float, float]:
    """(value, residual estimate).

    For the deterministic charts the residual is the change under halving the
    node count; for Monte Carlo it is the standard error of the weighted mean.
    """
    pts, w = quad_nodes(quad)
    vals = eval_on_points(g, pts)
    value = float(np.dot(w, vals))
    if quad.method == "chart-montecarlo":
        n = quad.node_count
        pair = (vals[:n] + vals[n:]) * (surface_area(quad.m, quad.r) / 2.0)
        se = float(np.std(pair, ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
        return value, se
    coarse = SurfaceQuadrature(
        quad.m, quad.r, quad.method, max(1, quad.node_count // 2), quad.seed
    )
    return value, abs(value - surface_integral(g, coarse))


def mc_surface_area(m: int, n: int, seed: int) -> McEstimate:
    """Monte Carlo estimate of surface_area(m, 1) from weighted disc samples.

    In polar chart coordinates the total area is
    2 sigma_{m-1,1} * integral of rho^(m-2) / sqrt(1 - rho^2) over (0, 1);
    the substitution rho = sin(u) removes the singular weight, leaving a
    plain average of sin(u)^(m-2) with u uniform on (0, pi/2).
    """
    if m < 3:
        raise ValueError("the radial chart estimator needs m >= 3")
    rng = rng_stream(seed)
    u = rng.uniform(0.0, math.pi / 2.0, size=n)
    scale = 2.0 * surface_area(m - 1, 1.0) * (math.pi / 2.0)
    est = mc_estimate(np.sin(u) ** (m - 2))
    return McEstimate(scale * est.mean, scale * est.std_error, n)


def uniform_sphere_sample(
    rng: np.random.Generator,
    m: int,
    y=None,
    r: float = 1.0,
    size: int | None = None,
):
    """Uniform point(s) on the sphere of radius r about y.

    Normalizes a vector of independent standard Gaussians; rows with norm
    below 1e-300 (probability ~0) are redrawn.
    """
    if m < 1:
        raise ValueError("dimension must be >= 1")
    if not r > 0.0:
        raise ValueError("radius must be positive")
    n = 1 if size is None else int(size)
    x = rng.standard_normal((n, m))
    norms = np.linalg.norm(x, axis=1)
    while np.any(norms < 1e-300):
        bad = norms < 1e-300
        x[bad] = rng.standard_normal((int(bad.sum()), m))
        norms = np.linalg.norm(x, axis=1)
    pts = r * x / norms[:, None]
    if y is not None:
        pts = pts + np.asarray(y, dtype=float)
    return pts[0] if size is None else pts


def shell_average(
    g: Callable,
    m: int,
    s: float,
    r: float,
    n: int,
    rng: np.random.Generator,
    return_estimate: bool = False,
):
    """Monte Carlo average of g(r x / |x|) over the shell s < |x| < r.

    Samples the shell by rejection from the bounding cube [-r, r]^m and
    radially projects accepted points to the outer sphere, estimating the
    normalized shell integral that converges to the surface average as s -> r.
    """
    if not 0.0 < s < r:
        raise ValueError("shell needs 0 < s < r")
    vals = []
    accept = 0
    while accept < n:
        batch = max(1024, n)
        x = rng.uniform(-r, r, size=(batch, m))
        nrm = np.linalg.norm(x, axis=1)
        keep = (nrm > s) & (nrm < r)
        if not np.any(keep):
            continue
        x = x[keep][: n - accept]
        nrm = nrm[keep][: n - accept]
        vals.append(eval_on_points(g, r * x / nrm[:, None]))
        accept += x.shape[0]
    est = mc_estimate(np.concatenate(vals))
    return est if return_estimate else est.mean
