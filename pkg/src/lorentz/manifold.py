"""Closed-form geometry of the hyperboloid (Lorentz) model.

Points live in ambient Minkowski space R^{d+1} on the sheet

    <x, x>_L = -K,  x_0 > 0,

which has constant sectional curvature -1/K. Every function accepts either a
single vector of shape ``(d+1,)`` or a batch of shape ``(..., d+1)``; the last
axis is always the ambient coordinate axis. ``K`` is a positive float.

All functions are pure and operate in float64.
"""

from __future__ import annotations

import numpy as np

EPS_NORM = 1e-15


class DimensionError(ValueError):
    """Raised when ambient vectors have incompatible shapes."""


class PreconditionError(ValueError):
    """Raised when an input violates a documented precondition."""


def _as_array(x):
    return np.asarray(x, dtype=np.float64)


def _check_curvature(K):
    if not K > 0:
        raise PreconditionError(f"curvature K must be positive, got {K!r}")


def minkowski_inner(u, v):
    """Minkowski inner product -u_0 v_0 + sum_{i>=1} u_i v_i along the last axis."""
    u = _as_array(u)
    v = _as_array(v)
    if u.shape[-1:] != v.shape[-1:]:
        raise DimensionError(f"ambient dimension mismatch: {u.shape} vs {v.shape}")
    if u.shape[-1] < 2:
        raise DimensionError("ambient vectors need at least 2 coordinates")
    return -u[..., 0] * v[..., 0] + np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def minkowski_norm(v):
    """Minkowski norm sqrt(<v, v>_L) of a spacelike vector, clamped at 0."""
    return np.sqrt(np.maximum(minkowski_inner(v, v), 0.0))


def origin(d, K=1.0):
    """The north pole (sqrt(K), 0, ..., 0) of H^{d,K}."""
    o = np.zeros(d + 1)
    o[0] = np.sqrt(K)
    return o


NEAR_ALPHA = 1.5


def distance(x, y, K=1.0):
    """Geodesic distance sqrt(K) * arcosh(-<x, y>_L / K).

    arcosh loses half the significant digits just above 1, so for nearby
    points the equivalent chord form 2 sqrt(K) arsinh(|x - y|_L / (2 sqrt(K)))
    is used instead. The two agree exactly on the manifold.
    """
    _check_curvature(K)
    x = _as_array(x)
    y = _as_array(y)
    alpha = -minkowski_inner(x, y) / K
    sqrt_k = np.sqrt(K)
    far = sqrt_k * np.arccosh(np.maximum(alpha, 1.0))
    diff = x - y
    chord = np.sqrt(np.maximum(minkowski_inner(diff, diff), 0.0))
    near = 2.0 * sqrt_k * np.arcsinh(chord / (2.0 * sqrt_k))
    return np.where(alpha < NEAR_ALPHA, near, far)


def exp_map(x, v, K=1.0):
    """Exponential map at ``x`` applied to the tangent vector ``v``.

    Tangent vectors with Minkowski norm below ``EPS_NORM`` map to ``x``.
    """
    _check_curvature(K)
    x = _as_array(x)
    v = _as_array(v)
    sqrt_k = np.sqrt(K)
    norm = minkowski_norm(v)
    small = norm < EPS_NORM
    safe = np.where(small, 1.0, norm)
    theta = (safe / sqrt_k)[..., None]
    out = np.cosh(theta) * x + sqrt_k * np.sinh(theta) * v / safe[..., None]
    return np.where(small[..., None], x, out)


def log_map(x, y, K=1.0):
    """Logarithmic map at ``x``: the tangent vector pointing to ``y``.

    ``log_map(x, x)`` is the zero vector.
    """
    _check_curvature(K)
    x = _as_array(x)
    y = _as_array(y)
    alpha = np.maximum(-minkowski_inner(x, y) / K, 1.0)
    u = y - alpha[..., None] * x
    u_norm = minkowski_norm(u)
    small = u_norm < EPS_NORM
    dist = distance(x, y, K)
    scale = np.where(small, 0.0, dist / np.where(small, 1.0, u_norm))
    return scale[..., None] * u


def geodesic(x, u, t, K=1.0, tol=1e-8):
    """Point at arc length ``t`` along the unit-speed geodesic from ``x`` in direction ``u``."""
    _check_curvature(K)
    x = _as_array(x)
    u = _as_array(u)
    if np.any(np.abs(minkowski_inner(u, u) - 1.0) > tol):
        raise PreconditionError("geodesic direction must have unit Minkowski norm")
    theta = np.asarray(t, dtype=np.float64) / np.sqrt(K)
    theta = theta[..., None] if np.ndim(theta) else theta
    return np.cosh(theta) * x + np.sqrt(K) * np.sinh(theta) * u


def parallel_transport(x, y, v, K=1.0):
    """Transport ``v`` from T_x to T_y along the connecting geodesic.

    The log-map expression

        P(v) = v - <log_x y, v>_L / d(x, y)^2 * (log_x y + log_y x)

    simplifies, after substituting the closed-form log maps and using
    <x, v>_L = 0, to

        P(v) = v + <y, v>_L / (K - <x, y>_L) * (x + y),

    which is what is evaluated here. It avoids the cancellation in
    ``y - alpha x`` that costs several digits far from the origin.
    :func:`parallel_transport_logmap` evaluates the unsimplified expression.
    """
    _check_curvature(K)
    x = _as_array(x)
    y = _as_array(y)
    v = _as_array(v)
    coef = minkowski_inner(y, v) / (K - minkowski_inner(x, y))
    return v + coef[..., None] * (x + y)


def parallel_transport_logmap(x, y, v, K=1.0):
    """Transport via log maps and distance, term by term as written above.

    Coinciding points return ``v`` unchanged.
    """
    _check_curvature(K)
    x = _as_array(x)
    y = _as_array(y)
    v = _as_array(v)
    lxy = log_map(x, y, K)
    lyx = log_map(y, x, K)
    d2 = distance(x, y, K) ** 2
    same = d2 < EPS_NORM
    coef = np.where(same, 0.0, minkowski_inner(lxy, v) / np.where(same, 1.0, d2))
    return v - coef[..., None] * (lxy + lyx)


def project_to_hyperboloid(x, K=1.0):
    """Recompute x_0 = sqrt(K + |x_{1:}|^2) so that the point lies on H^{d,K}."""
    _check_curvature(K)
    x = np.array(x, dtype=np.float64, copy=True)
    x[..., 0] = np.sqrt(K + np.sum(x[..., 1:] ** 2, axis=-1))
    return x


def project_to_tangent(x, v, K=1.0):
    """Project an ambient vector onto T_x H^{d,K}: v + <x, v>_L / K * x."""
    _check_curvature(K)
    x = _as_array(x)
    v = _as_array(v)
    return v + (minkowski_inner(x, v) / K)[..., None] * x


def to_poincare(x, K=1.0):
    """Map a hyperboloid point to the unit Poincare ball.

    Coordinates are first scaled by 1/sqrt(K) onto H^{d,1}.
    """
    _check_curvature(K)
    x = _as_array(x) / np.sqrt(K)
    return x[..., 1:] / (x[..., :1] + 1.0)


def from_poincare(p, K=1.0):
    """Inverse of :func:`to_poincare`."""
    _check_curvature(K)
    p = _as_array(p)
    sq = np.sum(p * p, axis=-1, keepdims=True)
    if np.any(sq >= 1.0):
        raise PreconditionError("Poincare coordinates must lie inside the unit ball")
    h = np.concatenate([1.0 + sq, 2.0 * p], axis=-1) / (1.0 - sq)
    return np.sqrt(K) * h


def poincare_distance(p, q):
    """Distance on the unit Poincare ball (curvature -1)."""
    p = _as_array(p)
    q = _as_array(q)
    num = np.sum((p - q) ** 2, axis=-1)
    den = (1.0 - np.sum(p * p, axis=-1)) * (1.0 - np.sum(q * q, axis=-1))
    return np.arccosh(1.0 + 2.0 * num / den)


def rescale(x, K, K_new):
    """Map H^{d,K} onto H^{d,K_new} by x -> sqrt(K_new / K) * x.

    Minkowski inner products scale by K_new / K and distances by sqrt(K_new / K).
    """
    _check_curvature(K)
    _check_curvature(K_new)
    return np.sqrt(K_new / K) * _as_array(x)


def is_on_manifold(x, K=1.0, tol=1e-9):
    x = _as_array(x)
    return bool(np.all(np.abs(minkowski_inner(x, x) + K) <= tol) and np.all(x[..., 0] > 0))


def random_points(rng, n, d, K=1.0, max_radius=3.0):
    """Sample ``n`` points on H^{d,K} with geodesic radius from the origin up to ``max_radius``."""
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(0.0, max_radius, size=(n, 1))
    tangent = np.concatenate([np.zeros((n, 1)), radii * dirs], axis=1)
    return exp_map(np.broadcast_to(origin(d, K), (n, d + 1)), tangent, K)


def random_tangent(rng, x, K=1.0, max_norm=5.0, min_norm=0.0):
    """Sample tangent vectors at the points ``x`` with Minkowski norms in [min_norm, max_norm]."""
    x = _as_array(x)
    raw = rng.standard_normal(x.shape)
    t = project_to_tangent(x, raw, K)
    norms = minkowski_norm(t)[..., None]
    target = rng.uniform(min_norm, max_norm, size=norms.shape)
    return t / norms * target
