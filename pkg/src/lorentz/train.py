"""Training and evaluation of HGCN / GCN models for link prediction and node classification."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import data as gdata
from . import decoders, layers, metrics, optim
from .config import RunConfig

log = logging.getLogger(__name__)

STREAMS = {"init": 0, "dropconnect": 1, "sampling": 2, "splits": 3}


class TrainingError(RuntimeError):
    pass


def substream(seed, name):
    """Independent generator for one named purpose within a seeded run."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), STREAMS[name]]))


@dataclass
class Prepared:
    graph: gdata.Graph
    message_graph: layers.MessageGraph
    lp_split: gdata.LpSplit | None = None
    nc_split: gdata.NcSplit | None = None
    all_non_edges_excluded: list = field(default_factory=list)


def prepare(cfg: RunConfig, graph: gdata.Graph) -> Prepared:
    """Build splits and the message-passing graph shared by every seed."""
    if cfg.normalize_features:
        graph = gdata.Graph(graph.n, graph.edges, gdata.scale_features(graph.features), graph.labels)
    if cfg.task == "lp":
        split = gdata.split_edges(graph, cfg.split_ratios, seed=cfg.split_seed)
        mg = layers.MessageGraph.from_edges(graph.n, split.train_pos)
        return Prepared(graph, mg, lp_split=split,
                        all_non_edges_excluded=[split.val_neg, split.test_neg])
    if graph.labels is None:
        raise ValueError("node classification needs labels")
    nc = gdata.split_nodes(graph.n, cfg.split_ratios, seed=cfg.split_seed)
    return Prepared(graph, layers.MessageGraph.from_edges(graph.n, graph.edges), nc_split=nc)


class Model:
    """Parameter layout and forward pass for one configuration."""

    def __init__(self, cfg: RunConfig, in_dim, n_classes=None):
        self.cfg = cfg
        self.mc = cfg.model_config
        self.hyperbolic = cfg.model == "hgcn"
        if self.hyperbolic:
            self.shapes = layers.hgcn_param_shapes(in_dim, self.mc)
        else:
            self.shapes = layers.gcn_param_shapes(in_dim, self.mc)
        if cfg.task == "nc":
            self.shapes["cls_W"] = (n_classes, self.mc.dims[-1])
            self.shapes["cls_b"] = (n_classes,)
        self.n_layers = len(self.mc.dims)

    def init(self, rng):
        params = layers.init_params(self.shapes, rng)
        if self.hyperbolic:
            for i in range(self.n_layers + 1):
                params[f"curv{i}"] = np.array(optim.curvature_raw(self.mc.init_curvature))
        params["fd_r"] = np.array(float(self.cfg.fermi_dirac.r))
        params["fd_t"] = np.array(float(np.log(self.cfg.fermi_dirac.t)))
        return params

    def frozen(self):
        names = set()
        if self.hyperbolic and not self.mc.trainable_curvature:
            names.update(f"curv{i}" for i in range(self.n_layers + 1))
        if not self.cfg.fermi_dirac.trainable:
            names.update(("fd_r", "fd_t"))
        return names

    def dropconnect_masks(self, rng):
        rate = self.mc.dropconnect
        if rate == 0.0:
            return None
        return {
            name: optim.dropconnect_mask(shape, rate, rng)
            for name, shape in self.shapes.items()
            if (name.startswith("W") or name.startswith("att"))
        }

    def forward(self, tape, params, graph: gdata.Graph, mg, masks=None):
        """Returns (vars, embeddings, curvature Vars or None)."""
        frozen = self.frozen()
        vs = {k: (tape.const(v) if k in frozen else tape.param(v)) for k, v in params.items()}
        feats = tape.const(graph.features)
        if self.hyperbolic:
            curvs = [optim.curvature_param(vs[f"curv{i}"]) for i in range(self.n_layers + 1)]
            emb = layers.hgcn_forward(vs, curvs, mg, feats, self.mc, masks)
            return vs, emb, curvs
        return vs, layers.gcn_forward(vs, mg, feats, self.mc, masks), None

    def decoder_terms(self, vs):
        return vs["fd_r"], ad.exp(vs["fd_t"])

    def lp_scores(self, vs, emb, curvs, pairs):
        r, t = self.decoder_terms(vs)
        K = curvs[-1] if curvs else None
        return decoders.lp_scores(emb, pairs, r, t, K, euclidean=not self.hyperbolic)

    def lp_loss(self, vs, emb, curvs, pos, neg):
        r, t = self.decoder_terms(vs)
        K = curvs[-1] if curvs else None
        return decoders.lp_loss(emb, pos, neg, r, t, K, euclidean=not self.hyperbolic)

    def logits(self, vs, emb, curvs):
        K = curvs[-1] if curvs else None
        return decoders.nc_logits(emb, vs["cls_W"], vs["cls_b"], K, euclidean=not self.hyperbolic)

    def curvatures(self, params):
        if not self.hyperbolic:
            return []
        return [optim.curvature_value(float(params[f"curv{i}"])) for i in range(self.n_layers + 1)]


def _lp_eval(model, params, prep, which):
    tape = ad.Tape()
    vs, emb, curvs = model.forward(tape, params, prep.graph, prep.message_graph)
    split = prep.lp_split
    pos = getattr(split, f"{which}_pos")
    neg = getattr(split, f"{which}_neg")
    pairs = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    scores = model.lp_scores(vs, emb, curvs, pairs).value
    return metrics.roc_auc(scores, labels), emb.value


def _nc_metric(pred, labels, n_classes):
    if n_classes == 2:
        return metrics.f1_binary(pred, labels)
    return metrics.accuracy(pred, labels)


def _nc_eval(model, params, prep, which, n_classes):
    tape = ad.Tape()
    vs, emb, curvs = model.forward(tape, params, prep.graph, prep.message_graph)
    nodes = getattr(prep.nc_split, which)
    pred = np.argmax(model.logits(vs, emb, curvs).value[nodes], axis=1)
    labels = prep.graph.labels[nodes]
    return _nc_metric(pred, labels, n_classes), metrics.accuracy(pred, labels), emb.value


@dataclass
class SeedResult:
    seed: int
    test_metric: float
    val_metric: float
    best_epoch: int
    epochs_run: int
    curvatures: list
    params: dict
    embeddings: np.ndarray
    test_accuracy: float | None = None


def train_seed(cfg: RunConfig, prep: Prepared, seed: int) -> SeedResult:
    graph = prep.graph
    n_classes = int(graph.labels.max()) + 1 if cfg.task == "nc" else None
    model = Model(cfg, graph.features.shape[1], n_classes)
    params = model.init(substream(seed, "init"))
    rng_drop = substream(seed, "dropconnect")
    rng_sample = substream(seed, "sampling")
    oc = cfg.optimizer
    adam = optim.AdamState(lr=oc.lr, beta1=oc.beta1, beta2=oc.beta2, eps=oc.eps,
                           weight_decay=oc.weight_decay)
    stopper = optim.EarlyStopState(patience=oc.patience)
    frozen = model.frozen()
    epoch = -1
    for epoch in range(oc.max_epochs):
        tape = ad.Tape()
        masks = model.dropconnect_masks(rng_drop)
        vs, emb, curvs = model.forward(tape, params, graph, prep.message_graph, masks)
        if cfg.task == "lp":
            pos = prep.lp_split.train_pos
            neg = gdata.sample_non_edges(graph.n, graph.edges, len(pos), rng_sample,
                                         exclude=prep.all_non_edges_excluded)
            loss = model.lp_loss(vs, emb, curvs, pos, neg)
        else:
            logits = model.logits(vs, emb, curvs)
            lp_term = None
            if cfg.lp_reg_weight > 0:
                neg = gdata.sample_non_edges(graph.n, graph.edges, graph.m, rng_sample)
                lp_term = model.lp_loss(vs, emb, curvs, graph.edges, neg)
            loss = decoders.nc_loss(logits, graph.labels, prep.nc_split.train,
                                    cfg.lp_reg_weight, lp_term)
        if not np.isfinite(loss.value):
            raise TrainingError(f"seed {seed}: non-finite loss at epoch {epoch}")
        grads_by_id = tape.backward(loss)
        grads = {k: grads_by_id[v.id] for k, v in vs.items() if k not in frozen}
        try:
            params = optim.adam_step(params, grads, adam, frozen=frozen)
        except optim.NonFiniteGradient as exc:
            raise TrainingError(f"seed {seed}: {exc} at epoch {epoch}") from None
        if cfg.task == "lp":
            val, _ = _lp_eval(model, params, prep, "val")
        else:
            val, _, _ = _nc_eval(model, params, prep, "val", n_classes)
        if optim.early_stop_update(stopper, epoch, val, params):
            break
    best = stopper.best_params
    test_acc = None
    if cfg.task == "lp":
        test, emb = _lp_eval(model, best, prep, "test")
    else:
        test, test_acc, emb = _nc_eval(model, best, prep, "test", n_classes)
    return SeedResult(
        seed=seed,
        test_metric=float(test),
        val_metric=float(stopper.best),
        best_epoch=int(stopper.best_epoch),
        epochs_run=epoch + 1,
        curvatures=model.curvatures(best),
        params=best,
        embeddings=emb,
        test_accuracy=test_acc,
    )
