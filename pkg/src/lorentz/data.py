"""Graphs, loaders, the synthetic disease-tree generator, splits and delta-hyperbolicity."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

EXACT_DELTA_MAX_NODES = 300


class GraphFormatError(ValueError):
    """A graph file could not be parsed."""


class GraphValidationError(ValueError):
    pass


@dataclass
class Graph:
    n: int
    edges: np.ndarray  # (m, 2) int64, i < j, sorted, unique
    features: np.ndarray  # (n, d)
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.edges = canonical_edges(self.edges, self.n)
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] != self.n:
            raise GraphValidationError(
                f"feature matrix needs {self.n} rows, got shape {self.features.shape}"
            )
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.n,):
                raise GraphValidationError(f"need {self.n} labels, got {self.labels.shape[0]}")

    @property
    def m(self):
        return len(self.edges)


def canonical_edges(edges, n):
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(e) == 0:
        return e
    if e.min() < 0 or e.max() >= n:
        raise GraphValidationError(f"edge endpoint out of range [0, {n})")
    if np.any(e[:, 0] == e[:, 1]):
        raise GraphValidationError("self-loops are not allowed in the input graph")
    e = np.sort(e, axis=1)
    return np.unique(e, axis=0)


def _read_edges(path):
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            parts = s.split("\t")
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'i<TAB>j', got {s!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: non-integer node id in {s!r}") from None
    return edges


def _read_features(path):
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: non-numeric feature value") from None
    if rows and len({len(r) for r in rows}) != 1:
        raise GraphFormatError(f"{path}: rows have different lengths")
    return np.array(rows, dtype=np.float64)


def _read_labels(path):
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                labels.append(int(s))
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: expected an integer label") from None
    return np.array(labels, dtype=np.int64)


def load_graph(edge_file, feature_file, label_file=None) -> Graph:
    """Load a graph from a TSV edge list, a header-less feature CSV and an optional label file.

    The node count is the number of feature rows.
    """
    edges = _read_edges(edge_file)
    features = _read_features(feature_file)
    labels = _read_labels(label_file) if label_file is not None else None
    return Graph(features.shape[0], np.array(edges, dtype=np.int64), features, labels)


def load_edges(edge_file):
    """Edge list only; the node count is one more than the largest id."""
    edges = np.array(_read_edges(edge_file), dtype=np.int64).reshape(-1, 2)
    n = int(edges.max()) + 1 if len(edges) else 0
    return n, canonical_edges(edges, n)


def save_graph(graph: Graph, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "edges.tsv", "w", encoding="utf-8") as fh:
        for i, j in graph.edges:
            fh.write(f"{i}\t{j}\n")
    np.savetxt(directory / "features.csv", graph.features, delimiter=",", fmt="%.17g")
    if graph.labels is not None:
        np.savetxt(directory / "labels.txt", graph.labels, fmt="%d")


def generate_disease_tree(
    n_nodes,
    branching=(2, 3),
    beta=0.9,
    feature_dim=16,
    seed=0,
    inherit=0.0,
    susceptibility_range=(0.0, 1.0),
):
    """Random tree with an SIR-style infection cascade from the root.

    Nodes are attached breadth-first, each parent drawing its number of
    children uniformly from ``branching``. Every node gets a susceptibility
    s drawn uniformly from ``susceptibility_range`` and stored in feature column 0; the root is infected and an
    infected parent infects each child with probability ``beta * s_child``.
    Labels are 1 for infected nodes.

    The remaining feature columns are standard normal noise. With
    ``inherit > 0`` a child's noise vector is ``inherit * parent + noise``,
    so feature similarity follows the tree.
    """
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    if feature_dim < 1:
        raise ValueError("feature_dim must be >= 1")
    rng = np.random.default_rng(seed)
    parent = np.full(n_nodes, -1, dtype=np.int64)
    next_id = 1
    frontier = 0
    while next_id < n_nodes:
        k = int(rng.choice(branching))
        for _ in range(k):
            if next_id >= n_nodes:
                break
            parent[next_id] = frontier
            next_id += 1
        frontier += 1
    lo, hi = susceptibility_range
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError("susceptibility_range must satisfy 0 <= lo <= hi <= 1")
    susceptibility = rng.uniform(lo, hi, size=n_nodes)
    infected = np.zeros(n_nodes, dtype=np.int64)
    infected[0] = 1
    draws = rng.uniform(0.0, 1.0, size=n_nodes)
    for v in range(1, n_nodes):
        if infected[parent[v]] and draws[v] < beta * susceptibility[v]:
            infected[v] = 1
    noise = rng.standard_normal((n_nodes, feature_dim - 1))
    if inherit:
        for v in range(1, n_nodes):
            noise[v] += inherit * noise[parent[v]]
    features = np.concatenate([susceptibility[:, None], noise], axis=1)
    edges = np.stack([parent[1:], np.arange(1, n_nodes)], axis=1)
    return Graph(n_nodes, edges, features, infected)


def scale_features(features):
    """Divide all features by the largest row norm; relative geometry is unchanged."""
    top = np.max(np.linalg.norm(features, axis=1), initial=0.0)
    return features / top if top > 0 else features


def parse_disease_spec(spec: str) -> dict:
    """Parse ``'disease:n_nodes=300,feature_dim=16,seed=0'`` into keyword arguments."""
    if not spec.startswith("disease:"):
        raise ValueError(f"dataset string must start with 'disease:', got {spec!r}")
    kwargs = {}
    body = spec[len("disease:"):]
    allowed = {"n_nodes": int, "beta": float, "feature_dim": int, "seed": int, "inherit": float}
    for item in filter(None, body.split(",")):
        key, _, value = item.partition("=")
        key = key.strip()
        if key == "branching":
            kwargs[key] = tuple(int(v) for v in value.split("/"))
        elif key in allowed:
            kwargs[key] = allowed[key](value)
        else:
            raise ValueError(f"unknown disease generator option {key!r}")
    kwargs.setdefault("n_nodes", 300)
    return kwargs


def load_dataset(spec, base_dir=None) -> Graph:
    if isinstance(spec, str):
        return generate_disease_tree(**parse_disease_spec(spec))
    if isinstance(spec, dict):
        unknown = set(spec) - {"edges", "features", "labels"}
        if unknown or "edges" not in spec or "features" not in spec:
            raise ValueError("file dataset needs 'edges' and 'features' (and optional 'labels')")
        base = Path(base_dir) if base_dir else Path(".")

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else base / p

        labels = resolve(spec["labels"]) if spec.get("labels") else None
        return load_graph(resolve(spec["edges"]), resolve(spec["features"]), labels)
    raise ValueError("dataset must be a 'disease:' string or a dict of file paths")


@dataclass
class LpSplit:
    train_pos: np.ndarray
    val_pos: np.ndarray
    test_pos: np.ndarray
    val_neg: np.ndarray
    test_neg: np.ndarray


@dataclass
class NcSplit:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def edge_keys(pairs, n):
    p = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
    return p[:, 0] * n + p[:, 1]


def sample_non_edges(n, edges, count, rng, exclude=()):
    """``count`` distinct unordered non-edges (i < j) drawn uniformly at random."""
    forbidden = set(edge_keys(edges, n).tolist())
    for extra in exclude:
        forbidden.update(edge_keys(extra, n).tolist())
    available = n * (n - 1) // 2 - len(forbidden)
    if count > available:
        raise ValueError(f"requested {count} non-edges but only {available} exist")
    chosen = []
    seen = set()
    while len(chosen) < count:
        i = rng.integers(0, n, size=2 * (count - len(chosen)) + 8)
        j = rng.integers(0, n, size=i.shape[0])
        for a, b in zip(i.tolist(), j.tolist()):
            if a == b:
                continue
            if a > b:
                a, b = b, a
            key = a * n + b
            if key in forbidden or key in seen:
                continue
            seen.add(key)
            chosen.append((a, b))
            if len(chosen) == count:
                break
    return np.array(chosen, dtype=np.int64).reshape(-1, 2)


def split_edges(graph: Graph, ratios=(0.85, 0.05, 0.10), seed=0) -> LpSplit:
    """Random train/val/test partition of the edges plus matching negative pairs."""
    m = graph.m
    n_val = int(round(ratios[1] * m))
    n_test = int(round(ratios[2] * m))
    if n_val < 1 or n_test < 1 or m - n_val - n_test < 1:
        raise ValueError(f"{m} edges are too few for split ratios {tuple(ratios)}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m)
    e = graph.edges[perm]
    val_pos = e[:n_val]
    test_pos = e[n_val:n_val + n_test]
    train_pos = e[n_val + n_test:]
    neg = sample_non_edges(graph.n, graph.edges, n_val + n_test, rng)
    return LpSplit(train_pos, val_pos, test_pos, neg[:n_val], neg[n_val:])


def split_nodes(n, ratios=(0.70, 0.15, 0.15), seed=0) -> NcSplit:
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_val = int(round(ratios[1] * n))
    n_test = int(round(ratios[2] * n))
    return NcSplit(np.sort(perm[n_val + n_test:]), np.sort(perm[:n_val]),
                   np.sort(perm[n_val:n_val + n_test]))


def csr(n, edges):
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    both = np.concatenate([e, e[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, both[:, 0] + 1, 1)
    return np.cumsum(indptr), both[:, 1].copy()


def hop_distances(n, edges):
    indptr, indices = csr(n, edges)
    return kernels.all_pairs_bfs(indptr, indices, n)


def largest_component(n, edges):
    """Node ids of the largest connected component, and its edges relabelled."""
    D = hop_distances(n, edges)
    best = np.array([], dtype=np.int64)
    unseen = np.ones(n, dtype=bool)
    for s in range(n):
        if unseen[s]:
            comp = np.nonzero(D[s] >= 0)[0]
            unseen[comp] = False
            if len(comp) > len(best):
                best = comp
    relabel = -np.ones(n, dtype=np.int64)
    relabel[best] = np.arange(len(best))
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    keep = (relabel[e[:, 0]] >= 0) & (relabel[e[:, 1]] >= 0)
    return best, relabel[e[keep]]


def delta_hyperbolicity(n, edges, mode="exact", samples=50000, seed=0, return_info=False):
    """Gromov four-point delta of the hop metric.

    ``mode="exact"`` takes the max over all 4-subsets (up to
    ``EXACT_DELTA_MAX_NODES`` nodes); ``"sampled"`` over ``samples`` random
    4-subsets, which gives a lower bound. Disconnected graphs are reduced to
    their largest component. Graphs with fewer than 4 nodes have delta 0.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError("mode must be 'exact' or 'sampled'")
    comp, sub_edges = largest_component(n, edges)
    connected = len(comp) == n
    if not connected:
        log.warning("graph is disconnected; using largest component (%d of %d nodes)", len(comp), n)
    k = len(comp)
    delta = 0.0
    if k >= 4:
        D = hop_distances(k, sub_edges)
        if mode == "exact":
            if k > EXACT_DELTA_MAX_NODES:
                raise ValueError(
                    f"exact mode is limited to {EXACT_DELTA_MAX_NODES} nodes; use sampled mode"
                )
            delta = kernels.delta_exact(D)
        else:
            rng = np.random.default_rng(seed)
            quads = np.array([rng.choice(k, 4, replace=False) for _ in range(samples)], dtype=np.int64)
            delta = kernels.delta_quads(D, quads)
    delta = float(delta)
    if return_info:
        return delta, {"component_nodes": k, "connected": connected}
    return delta
