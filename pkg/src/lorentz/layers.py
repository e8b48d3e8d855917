"""HGCN layer primitives, full layer composition, and the Euclidean GCN baseline.

Layer functions take tape Vars. Node embeddings are stored row-wise: an
``(n, d+1)`` Var holds one hyperboloid point per node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import diffgeo as dg
from .autodiff import ContractError
from .config import ModelConfig


@dataclass
class MessageGraph:
    """Neighbourhood structure N(i) = {i} plus the neighbours of i."""

    n: int
    mask: np.ndarray  # (n, n) bool, includes the diagonal
    src: np.ndarray  # directed pairs (i, j), i != j, both directions
    dst: np.ndarray
    uniform: np.ndarray  # (n, n) row-stochastic weights over the mask
    sym_norm: np.ndarray  # D^-1/2 (A + I) D^-1/2

    @classmethod
    def from_edges(cls, n, edges):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        mask = np.eye(n, dtype=bool)
        mask[edges[:, 0], edges[:, 1]] = True
        mask[edges[:, 1], edges[:, 0]] = True
        off = mask & ~np.eye(n, dtype=bool)
        src, dst = np.nonzero(off)
        deg = mask.sum(axis=1).astype(np.float64)
        uniform = mask / deg[:, None]
        inv_sqrt = 1.0 / np.sqrt(deg)
        sym_norm = mask * inv_sqrt[:, None] * inv_sqrt[None, :]
        return cls(n, mask, src, dst, uniform, sym_norm)


def feature_to_hyperbolic(x_euc, K):
    """Lift Euclidean feature rows onto H^{d,K} through exp_o((0, x))."""
    return dg.expmap0(x_euc, K)


def hyp_linear(W, x, K):
    """exp_o(W log_o(x)); W acts on the last d tangent coordinates at o."""
    return dg.expmap0(ad.matmul(dg.logmap0(x, K), ad.transpose(W)), K)


def hyp_bias_add(x, b, K):
    """exp_x(P_{o->x}((0, b)))."""
    tape = x.tape
    return dg.expmap(x, dg.transp0(tape, x, b, K), K)


def attention_logits(h, att, K):
    """Dense (n, n) logits att[:d] . log_o(h_i) + att[d:] . log_o(h_j)."""
    tails = dg.logmap0(h, K)
    n, d = tails.shape
    if att.shape != (2 * d,):
        raise ContractError(f"attention parameters need shape ({2 * d},), got {att.shape}")
    left = ad.matvec(tails, att[:d])
    right = ad.matvec(tails, att[d:])
    return ad.tile_cols(left, n) + ad.transpose(ad.tile_cols(right, n))


def hyp_attention_weights(h, att, K, mask):
    """Row-stochastic attention weights over each neighbourhood ``mask[i]``."""
    mask = np.asarray(mask, dtype=bool)
    if not np.all(mask.any(axis=1)):
        raise ContractError("every node needs a non-empty neighbourhood")
    return ad.softmax(attention_logits(h, att, K), mask)


def hyp_aggregate(h, weights, graph: MessageGraph, K, locus="center"):
    """Weighted aggregation of neighbour embeddings in a tangent space.

    ``locus="center"`` works in T_{h_i} for each centre node i; ``"origin"``
    averages log_o images and maps back from T_o. ``weights`` is an ``(n, n)``
    Var or array whose rows are supported on the neighbourhood mask.
    """
    tape = h.tape
    if not isinstance(weights, ad.Var):
        weights = tape.const(weights)
    if locus == "origin":
        return dg.expmap0(ad.matmul(weights, dg.logmap0(h, K)), K)
    if locus != "center":
        raise ValueError(f"unknown aggregation locus {locus!r}")
    n = graph.n
    if graph.src.size == 0:
        return h
    hi = h[graph.src]
    hj = h[graph.dst]
    w = weights[(graph.src, graph.dst)]
    msgs = dg.scale_rows(w, dg.logmap(hi, hj, K))
    # the self term log_{h_i}(h_i) is identically zero
    agg = ad.segment_sum(msgs, graph.src, n)
    return dg.expmap(h, dg.proj_tan(h, agg, K), K)


def hyp_activation(x, K_in, K_out, activation="relu"):
    """exp_o^{K_out}(sigma(log_o^{K_in}(x)))."""
    if activation not in ad.ACTIVATIONS:
        raise ValueError(f"activation {activation!r} does not satisfy sigma(0) = 0")
    return dg.expmap0(ad.ACTIVATIONS[activation](dg.logmap0(x, K_in)), K_out)


def hgcn_layer(x, W, b, att, K_in, K_out, graph: MessageGraph, cfg: ModelConfig):
    """One HGCN layer: feature transform, bias, aggregation, activation."""
    h = hyp_bias_add(hyp_linear(W, x, K_in), b, K_in)
    if cfg.use_attention:
        weights = hyp_attention_weights(h, att, K_in, graph.mask)
    else:
        weights = graph.uniform
    y = hyp_aggregate(h, weights, graph, K_in, cfg.aggregation)
    return hyp_activation(y, K_in, K_out, cfg.activation)


def hgcn_param_shapes(in_dim, cfg: ModelConfig):
    shapes = {}
    d = in_dim
    for i, dout in enumerate(cfg.dims):
        shapes[f"W{i}"] = (dout, d)
        shapes[f"b{i}"] = (dout,)
        shapes[f"att{i}"] = (2 * dout,)
        d = dout
    return shapes


def gcn_param_shapes(in_dim, cfg: ModelConfig):
    shapes = {}
    d = in_dim
    for i, dout in enumerate(cfg.dims):
        shapes[f"W{i}"] = (dout, d)
        shapes[f"b{i}"] = (dout,)
        d = dout
    return shapes


def init_params(shapes, rng):
    """Glorot-uniform weights, zero biases, small attention vectors."""
    params = {}
    for name, shape in shapes.items():
        if name.startswith("W"):
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            params[name] = rng.uniform(-limit, limit, size=shape)
        elif name.startswith("att"):
            limit = np.sqrt(6.0 / (shape[0] + 1))
            params[name] = rng.uniform(-limit, limit, size=shape)
        else:
            params[name] = np.zeros(shape)
    return params


def _masked(tape, var, masks, name):
    if masks is None or name not in masks:
        return var
    return var * tape.const(masks[name])


def hgcn_forward(params, curvatures, graph: MessageGraph, features, cfg: ModelConfig, masks=None):
    """Run every HGCN layer; returns the final ``(n, d_L + 1)`` embeddings.

    ``params`` maps names (``W0``, ``b0``, ``att0``, ...) to Vars; ``curvatures``
    holds the ``len(cfg.dims) + 1`` curvature Vars K_0 ... K_L. ``masks`` are the
    DropConnect masks for the current training step (``None`` at evaluation).
    """
    if len(curvatures) != len(cfg.dims) + 1:
        raise ContractError("need one curvature per layer boundary")
    tape = curvatures[0].tape
    x = feature_to_hyperbolic(features, curvatures[0])
    for i in range(len(cfg.dims)):
        W = _masked(tape, params[f"W{i}"], masks, f"W{i}")
        att = _masked(tape, params[f"att{i}"], masks, f"att{i}")
        x = hgcn_layer(x, W, params[f"b{i}"], att, curvatures[i], curvatures[i + 1], graph, cfg)
    return x


def gcn_forward(params, graph: MessageGraph, features, cfg: ModelConfig, masks=None):
    """Symmetric-normalised GCN: H <- sigma(A_hat H W^T + b) per layer."""
    tape = features.tape
    adj = tape.const(graph.sym_norm)
    act = ad.ACTIVATIONS[cfg.activation]
    h = features
    for i in range(len(cfg.dims)):
        W = _masked(tape, params[f"W{i}"], masks, f"W{i}")
        z = ad.matmul(adj, ad.matmul(h, ad.transpose(W)))
        h = act(z + dg.broadcast_row(tape, params[f"b{i}"], graph.n))
    return h
