"""Dimension-generic vectors, balls, and rotations.

Points are plain 1-d numpy arrays; the array length is the ambient dimension.
Rotation matrices are (m, m) orthogonal arrays with determinant +1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tolerances as tol


@dataclass(frozen=True)
class BallSpec:
    """An open ball, or an open shell when ``inner_radius`` is set."""

    center: np.ndarray
    radius: float
    inner_radius: float | None = None

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.ndim != 1 or center.shape[0] < 1:
            raise ValueError("center must be a 1-d vector of dimension >= 1")
        object.__setattr__(self, "center", center)
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        if self.inner_radius is not None and not 0.0 < self.inner_radius < self.radius:
            raise ValueError("inner_radius must lie in (0, radius)")

    @property
    def dim(self) -> int:
        return self.center.shape[0]


def angle(x, y) -> float:
    """Unsigned angle between two nonzero vectors, in [0, pi].

    The cosine is clamped to [-1, 1] before arccos so that collinear inputs
    survive roundoff.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise ValueError("angle is undefined for a zero vector")
    c = float(np.dot(x, y)) / (nx * ny)
    return float(np.arccos(min(1.0, max(-1.0, c))))


def _complement_basis(e1: np.ndarray, e2: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Orthonormal basis of span{e1, e2}^perp by Gram-Schmidt over standard basis.

    Seed vectors whose residual norm falls below ``GRAM_SCHMIDT_SKIP`` are
    dropped; exactly m - 2 survive.
    """
    m = e1.shape[0]
    basis = [e1, e2]
    for j in order:
        v = np.zeros(m)
        v[j] = 1.0
        for b in basis:
            v -= np.dot(b, v) * b
        nv = float(np.linalg.norm(v))
        if nv < tol.GRAM_SCHMIDT_SKIP:
            continue
        basis.append(v / nv)
        if len(basis) == m:
            break
    if len(basis) != m:
        raise RuntimeError("Gram-Schmidt failed to complete the basis")
    return np.array(basis[2:])


def rotation_to(z, seed_order: Sequence[int] | None = None) -> np.ndarray:
    """Rotation matrix mapping the first standard basis vector e1 to z.

    Acts as a plane rotation on span{e1, z} and as the identity on the
    orthogonal complement, which makes it continuous in z with value I at
    z = e1.  ``seed_order`` permutes the standard basis fed to Gram-Schmidt
    for the complement; the result does not depend on it beyond roundoff.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.shape[0] < 2:
        raise ValueError("z must be a vector of dimension >= 2")
    m = z.shape[0]
    if abs(float(np.linalg.norm(z)) - 1.0) > tol.UNIT_NORM_TOL:
        raise ValueError("z must be a unit vector")
    e1 = np.zeros(m)
    e1[0] = 1.0
    if float(np.linalg.norm(z - e1)) < tol.REFERENCE_SNAP:
        return np.eye(m)
    cos_t = float(z[0])
    w = z - cos_t * e1
    sin_t = float(np.linalg.norm(w))
    if sin_t < 1e-12:
        # z is (numerically) the antipode -e1; any plane through e1 works.
        e2 = np.zeros(m)
        e2[1] = 1.0
        cos_t, sin_t = -1.0, 0.0
    else:
        e2 = w / sin_t
    order = range(m) if seed_order is None else seed_order
    comp = _complement_basis(e1, e2, order)
    alpha = (
        cos_t * np.outer(e1, e1)
        - sin_t * np.outer(e1, e2)
        + sin_t * np.outer(e2, e1)
        + cos_t * np.outer(e2, e2)
    )
    for b in comp:
        alpha += np.outer(b, b)
    return alpha


def rotate_about(alpha: np.ndarray, y, z) -> np.ndarray:
    """Image of z under the rotation alpha about the point y: y + alpha (z - y)."""
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    m = y.shape[0]
    if alpha.shape != (m, m) or z.shape != (m,):
        raise ValueError("dimension mismatch between rotation, center, and point")
    return y + alpha @ (z - y)


def rotation_defects(alpha: np.ndarray) -> tuple[float, float]:
    """(Frobenius norm of a^T a - I, |det a - 1|) for invariant checks."""
    alpha = np.asarray(alpha, dtype=float)
    m = alpha.shape[0]
    ortho = float(np.linalg.norm(alpha.T @ alpha - np.eye(m)))
    det = abs(float(np.linalg.det(alpha)) - 1.0)
    return ortho, det


def random_rotation(rng: np.random.Generator, m: int) -> np.ndarray:
    """Haar-ish random member of SO(m) via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
