"""Hyperboloid operations on tape variables, batched over rows.

Points are ``(n, d+1)`` Vars, curvature ``K`` is a scalar Var. Tangent vectors
at the origin are carried as their ``(n, d)`` tail, because their 0-th
coordinate is identically zero.

Every exp map is followed by a projection onto the hyperboloid and every log
map by a projection onto the tangent space.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad

MIN_SQNORM = 1e-30
# exp-map arguments are capped so cosh/sinh stay finite
MAX_THETA = 50.0


def _col(s):
    return ad.reshape(s, (s.shape[0], 1))


def scale_rows(s, x):
    """Multiply row i of the matrix ``x`` by ``s[i]``."""
    return ad.tile_cols(s, x.shape[1]) * x


def broadcast_row(tape, v, n):
    """Stack ``n`` copies of the vector ``v`` as rows."""
    return ad.matmul(tape.const(np.ones((n, 1))), ad.reshape(v, (1, v.shape[0])))


def with_time(x0, rest):
    return ad.concat([_col(x0), rest], axis=1)


def sq_rownorm(x):
    return ad.sum(x * x, axis=1)


def proj(x, K):
    rest = x[:, 1:]
    return with_time(ad.sqrt(K + sq_rownorm(rest)), rest)


def proj_tan(x, v, K):
    return v + scale_rows(ad.minkowski_inner(x, v) / K, x)


def expmap0(tail, K):
    """exp_o of the tangent vector (0, tail), projected onto H^{d,K}."""
    sqrt_k = ad.sqrt(K)
    norm = ad.clamp(ad.l2_norm(tail), lo=1e-15)
    theta = ad.clamp(norm / sqrt_k, hi=MAX_THETA)
    rest = scale_rows(sqrt_k * ad.sinh(theta) / norm, tail)
    return with_time(ad.sqrt(K + sq_rownorm(rest)), rest)


def logmap0(x, K):
    """Tail of log_o(x). Uses |x_rest| = sqrt(K) sinh(d / sqrt(K)), stable near o."""
    sqrt_k = ad.sqrt(K)
    rest = x[:, 1:]
    norm = ad.clamp(ad.l2_norm(rest), lo=1e-15)
    return scale_rows(sqrt_k * ad.arsinh(norm / sqrt_k) / norm, rest)


def expmap(x, v, K):
    sqrt_k = ad.sqrt(K)
    norm = ad.sqrt(ad.clamp(ad.minkowski_inner(v, v), lo=MIN_SQNORM))
    theta = ad.clamp(norm / sqrt_k, hi=MAX_THETA)
    out = scale_rows(ad.cosh(theta), x) + scale_rows(sqrt_k * ad.sinh(theta) / norm, v)
    return proj(out, K)


def logmap(x, y, K):
    alpha = ad.clamp(-ad.minkowski_inner(x, y) / K, lo=1.0)
    u = y - scale_rows(alpha, x)
    unorm = ad.sqrt(ad.clamp(ad.minkowski_inner(u, u), lo=MIN_SQNORM))
    dist = ad.sqrt(K) * ad.arcosh(alpha)
    return proj_tan(x, scale_rows(dist / unorm, u), K)


def sqdist(x, y, K):
    """Squared geodesic distance K * arcosh(-<x, y>_L / K)^2, row-wise."""
    a = ad.arcosh(ad.clamp(-ad.minkowski_inner(x, y) / K, lo=1.0))
    return K * a * a


def origin_rows(tape, n, d, K):
    o = ad.concat([ad.reshape(ad.sqrt(K), (1,)), tape.const(np.zeros(d))], axis=0)
    return broadcast_row(tape, o, n)


def transp0(tape, x, b, K):
    """Parallel transport of the origin tangent vector (0, b) to every row of ``x``."""
    n, D = x.shape
    v = ad.concat([tape.const(np.zeros((n, 1))), broadcast_row(tape, b, n)], axis=1)
    inner = ad.matvec(x[:, 1:], b)
    coef = inner / (K + ad.sqrt(K) * x[:, 0])
    out = v + scale_rows(coef, x + origin_rows(tape, n, D - 1, K))
    return proj_tan(x, out, K)
