"""Adam over Euclidean parameters, positive curvature parameterization,
DropConnect masks and early stopping."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad

EPS_K = 1e-4


class NonFiniteGradient(FloatingPointError):
    pass


def softplus(x):
    return np.logaddexp(0.0, x)


def softplus_inverse(y):
    return y + np.log(-np.expm1(-y))


def curvature_raw(K):
    """Unconstrained value whose curvature is ``K``."""
    if not K > EPS_K:
        raise ValueError(f"curvature must exceed {EPS_K}")
    return float(softplus_inverse(K - EPS_K))


def curvature_value(raw):
    return float(softplus(raw) + EPS_K)


def curvature_param(raw_var):
    """K = softplus(raw) + EPS_K on the tape; always strictly positive."""
    return ad.log(1.0 + ad.exp(raw_var)) + EPS_K if raw_var.value < 30 else raw_var + EPS_K


@dataclass
class AdamState:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState, frozen=()):
    """One bias-corrected Adam update; returns a new parameter dict.

    ``frozen`` names are returned untouched and keep no moments. Weight decay
    is added to the gradient (L2 penalty).
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient for parameter {name!r}")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    out = {}
    for name, p in params.items():
        if name in frozen or name not in grads:
            out[name] = p
            continue
        g = grads[name]
        if state.weight_decay:
            g = g + state.weight_decay * p
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        state.m[name] = m
        state.v[name] = v
        out[name] = p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return out


def dropconnect_mask(shape, rate, rng):
    """Bernoulli(1 - rate) keep-mask; no inverse-rate rescaling."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("rate must lie in [0, 1)")
    if rate == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= rate).astype(np.float64)


@dataclass
class EarlyStopState:
    patience: int = 100
    best: float = -np.inf
    best_epoch: int = -1
    best_params: dict | None = None
    since_improvement: int = 0


def early_stop_update(state: EarlyStopState, epoch, val_metric, params=None):
    """Record ``val_metric`` (higher is better); return True when training should stop."""
    if val_metric > state.best:
        state.best = val_metric
        state.best_epoch = epoch
        state.best_params = copy.deepcopy(params) if params is not None else None
        state.since_improvement = 0
        return False
    state.since_improvement += 1
    return state.since_improvement >= state.patience
