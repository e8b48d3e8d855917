"""Link-prediction and node-classification heads, losses, and curvature rescaling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import diffgeo as dg
from . import manifold

PROB_CLAMP = 1e-7


@dataclass
class FermiDiracParams:
    r: float = 2.0
    t: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("temperature t must be positive")


def fermi_dirac(sqdist, r, t):
    """1 / (exp((d^2 - r) / t) + 1), written as sigmoid((r - d^2) / t)."""
    return ad.sigmoid((r - sqdist) / t)


def fermi_dirac_score(x_i, x_j, p: FermiDiracParams, K):
    """Edge probability for two hyperboloid points (plain numpy)."""
    d = manifold.distance(x_i, x_j, K)
    z = (d * d - p.r) / p.t
    return 1.0 / (np.exp(z) + 1.0)


def pair_sqdist(emb, pairs, K=None, euclidean=False):
    """Squared distances for the index pairs ``pairs`` (shape (m, 2)) of the embedding rows."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    a = emb[pairs[:, 0]]
    b = emb[pairs[:, 1]]
    if euclidean:
        diff = a - b
        return ad.sum(diff * diff, axis=1)
    return dg.sqdist(a, b, K)


def binary_cross_entropy(probs, labels):
    p = ad.clamp(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
    y = probs.tape.const(np.asarray(labels, dtype=np.float64))
    ll = y * ad.log(p) + (1.0 - y) * ad.log(1.0 - p)
    return -ad.sum(ll) / float(len(labels))


def lp_scores(emb, pairs, r, t, K=None, euclidean=False):
    return fermi_dirac(pair_sqdist(emb, pairs, K, euclidean), r, t)


def lp_loss(emb, pos, neg, r, t, K=None, euclidean=False):
    """Mean binary cross-entropy of Fermi-Dirac scores on positive and negative pairs."""
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 2)
    neg = np.asarray(neg, dtype=np.int64).reshape(-1, 2)
    pairs = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    return binary_cross_entropy(lp_scores(emb, pairs, r, t, K, euclidean), labels)


def nc_logits(emb, W_cls, b_cls, K=None, euclidean=False):
    """Euclidean multinomial-logistic logits on log_o of the embeddings."""
    feats = emb if euclidean else dg.logmap0(emb, K)
    return ad.matmul(feats, ad.transpose(W_cls)) + dg.broadcast_row(emb.tape, b_cls, emb.shape[0])


def cross_entropy(logits, labels, nodes):
    nodes = np.asarray(nodes, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    logp = ad.log_softmax(logits[nodes])
    picked = logp[(np.arange(len(nodes)), labels[nodes])]
    return -ad.sum(picked) / float(len(nodes))


def nc_loss(logits, labels, nodes, lp_reg_weight=0.0, lp_term=None):
    """Softmax cross-entropy on ``nodes`` plus ``lp_reg_weight`` times an LP loss term."""
    if lp_reg_weight < 0:
        raise ValueError("lp_reg_weight must be >= 0")
    loss = cross_entropy(logits, labels, nodes)
    if lp_reg_weight > 0 and lp_term is not None:
        loss = loss + lp_reg_weight * lp_term
    return loss


def reconstruct_edges(H, K, p: FermiDiracParams, b, squared=False):
    """Pairs (i, j), i < j, whose decoder probability is at least ``b``.

    Equivalent to d <= r + t log((1 - b) / b); with ``squared=True`` the
    distance is squared first, as in the decoder itself.
    """
    H = np.asarray(H, dtype=np.float64)
    n = H.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    d = manifold.distance(H[iu], H[ju], K)
    if squared:
        d = d * d
    cutoff = p.r + p.t * np.log((1.0 - b) / b)
    keep = d <= cutoff
    return set(zip(iu[keep].tolist(), ju[keep].tolist()))


def theorem1_rescale(H, K, K_new, p: FermiDiracParams, squared=False):
    """Move embeddings from H^{d,K} to H^{d,K_new} and rescale decoder parameters to match.

    Points scale by sqrt(K_new / K), so every distance scales by the same
    factor; scaling r and t by it keeps r + t log((1 - b) / b) proportional for
    every threshold b. For the squared-distance criterion the factor is K_new / K.
    """
    if not (K > 0 and K_new > 0):
        raise ValueError("curvatures must be positive")
    s = K_new / K if squared else np.sqrt(K_new / K)
    return manifold.rescale(H, K, K_new), FermiDiracParams(r=s * p.r, t=s * p.t)
