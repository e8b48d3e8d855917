import networkx as nx
import numpy as np
import pytest

from lorentz import data, kernels

cython_only = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")


def _random_connected(n, p, seed):
    G = nx.gnp_random_graph(n, p, seed=seed)
    G.add_edges_from((i, i + 1) for i in range(n - 1))
    return list(G.edges)


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=cython_only)])
def test_bfs_matches_networkx(backend):
    edges = _random_connected(40, 0.05, 1) + []
    n = 45  # nodes 40..44 are isolated
    indptr, indices = data.csr(n, edges)
    D = kernels.all_pairs_bfs(indptr, indices, n, backend=backend)
    G = nx.Graph(edges)
    G.add_nodes_from(range(n))
    lengths = dict(nx.all_pairs_shortest_path_length(G))
    for s in range(n):
        for t in range(n):
            assert D[s, t] == lengths[s].get(t, -1)


@cython_only
@pytest.mark.parametrize("seed", range(5))
def test_backends_agree(seed):
    n = 30
    edges = _random_connected(n, 0.08, seed)
    indptr, indices = data.csr(n, edges)
    Dp = kernels.all_pairs_bfs(indptr, indices, n, backend="python")
    Dc = kernels.all_pairs_bfs(indptr, indices, n, backend="cython")
    assert np.array_equal(Dp, Dc)
    assert kernels.delta_exact(Dp, backend="python") == kernels.delta_exact(Dc, backend="cython")
    quads = np.random.default_rng(seed).integers(0, n, size=(500, 4))
    assert kernels.delta_quads(Dp, quads, backend="python") == kernels.delta_quads(Dc, quads, backend="cython")


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.delta_exact(np.zeros((4, 4), dtype=np.int32), backend="fortran")


def test_empty_quads_give_zero():
    D = np.zeros((4, 4), dtype=np.int32)
    assert kernels.delta_quads(D, np.zeros((0, 4), dtype=np.int64)) == 0.0


def test_pure_python_switch(monkeypatch):
    import importlib

    monkeypatch.setenv("LORENTZ_PURE_PYTHON", "1")
    try:
        reloaded = importlib.reload(kernels)
        assert reloaded.BACKEND == "python"
    finally:
        monkeypatch.delenv("LORENTZ_PURE_PYTHON")
        importlib.reload(kernels)
