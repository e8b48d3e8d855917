import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gradcases
from lorentz import autodiff as ad
from lorentz import layers
from lorentz import manifold as M
from lorentz.config import ModelConfig

COSH1 = 1.54308063481524377847790562076
SINH1 = 1.17520119364380145688235185060


def _lift(tape, tails, K):
    return layers.feature_to_hyperbolic(tape.const(tails), tape.const(K))


def test_feature_lift_examples():
    tape = ad.Tape()
    np.testing.assert_allclose(_lift(tape, np.zeros((1, 3)), 4.0).value, [[2.0, 0, 0, 0]])
    np.testing.assert_allclose(_lift(tape, np.ones((1, 1)), 1.0).value, [[COSH1, SINH1]], rtol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), K=st.sampled_from([0.25, 1.0, 4.0]))
def test_feature_lift_lands_on_manifold_and_matches_exp(seed, K):
    rng = np.random.default_rng(seed)
    tails = rng.uniform(-3, 3, size=(10, 4))
    x = _lift(ad.Tape(), tails, K).value
    assert M.is_on_manifold(x, K, tol=1e-9 * np.abs(x).max() ** 2)
    o = np.broadcast_to(M.origin(4, K), x.shape)
    ref = M.exp_map(o, np.concatenate([np.zeros((10, 1)), tails], axis=1), K)
    np.testing.assert_allclose(x, ref, rtol=1e-10)


def test_hyp_linear_examples():
    rng = np.random.default_rng(0)
    tape = ad.Tape()
    K = tape.const(2.0)
    tails = rng.uniform(-1, 1, size=(5, 3))
    x = _lift(tape, tails, 2.0)
    np.testing.assert_allclose(layers.hyp_linear(tape.const(np.eye(3)), x, K).value, x.value, atol=1e-9)
    zero = layers.hyp_linear(tape.const(np.zeros((2, 3))), x, K).value
    np.testing.assert_allclose(zero, np.tile(M.origin(2, 2.0), (5, 1)), atol=1e-12)
    doubled = layers.hyp_linear(tape.const(2.0 * np.eye(3)), x, K).value
    np.testing.assert_allclose(doubled, _lift(tape, 2.0 * tails, 2.0).value, rtol=1e-9)


def test_hyp_bias_add_examples():
    rng = np.random.default_rng(1)
    K = 0.5
    tape = ad.Tape()
    x = _lift(tape, rng.uniform(-1, 1, size=(6, 3)), K)
    b = rng.standard_normal(3)
    np.testing.assert_allclose(
        layers.hyp_bias_add(x, tape.const(np.zeros(3)), tape.const(K)).value, x.value, atol=1e-9)
    at_origin = _lift(tape, np.zeros((1, 3)), K)
    np.testing.assert_allclose(
        layers.hyp_bias_add(at_origin, tape.const(b), tape.const(K)).value,
        _lift(tape, b[None, :], K).value, rtol=1e-9)
    out = layers.hyp_bias_add(x, tape.const(b), tape.const(K)).value
    assert M.is_on_manifold(out, K, tol=1e-7)
    np.testing.assert_allclose(M.distance(x.value, out, K), np.linalg.norm(b), atol=1e-8)


def _graph(n, edges):
    return layers.MessageGraph.from_edges(n, edges)


def test_attention_weight_examples():
    tape = ad.Tape()
    K = tape.const(1.0)
    h = _lift(tape, np.array([[0.3, -0.2], [0.1, 0.5], [0.3, -0.2]]), 1.0)
    alone = _graph(3, [])
    w = layers.hyp_attention_weights(h, tape.const(np.ones(4)), K, alone.mask).value
    np.testing.assert_array_equal(w, np.eye(3))
    full = _graph(3, [(0, 1), (0, 2), (1, 2)])
    w = layers.hyp_attention_weights(h, tape.const(np.zeros(4)), K, full.mask).value
    np.testing.assert_allclose(w, np.full((3, 3), 1 / 3), atol=1e-15)
    # node 1 sees nodes 0 and 2, which are the same point: equal weight on them
    star = _graph(3, [(0, 1), (1, 2)])
    w = layers.hyp_attention_weights(h, tape.const(np.array([0.4, -1.0, 2.0, 0.7])), K, star.mask).value
    assert w[1, 0] == pytest.approx(w[1, 2], abs=1e-15)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(w[star.mask] > 0)


def test_attention_rejects_empty_neighbourhood():
    tape = ad.Tape()
    h = _lift(tape, np.zeros((2, 2)), 1.0)
    with pytest.raises(ad.ContractError):
        layers.hyp_attention_weights(h, tape.const(np.zeros(4)), tape.const(1.0), np.zeros((2, 2), bool))


@pytest.mark.parametrize("locus", ["center", "origin"])
def test_aggregate_examples(locus):
    tape = ad.Tape()
    K = 1.5
    y = _lift(tape, np.array([[0.4, -0.7]]), K).value[0]
    g = _graph(2, [(0, 1)])
    h = tape.const(np.stack([y, y]))
    out = layers.hyp_aggregate(h, np.full((2, 2), 0.5), g, tape.const(K), locus).value
    np.testing.assert_allclose(out, h.value, atol=1e-9)
    self_only = _graph(2, [])
    h2 = _lift(tape, np.array([[0.4, -0.7], [1.2, 0.1]]), K)
    out = layers.hyp_aggregate(h2, np.eye(2), self_only, tape.const(K), locus).value
    np.testing.assert_allclose(out, h2.value, atol=1e-9)


def test_aggregate_single_neighbour_weight_one_moves_to_it():
    tape = ad.Tape()
    K = 1.0
    h = _lift(tape, np.array([[0.4, -0.7], [1.2, 0.1]]), K)
    g = _graph(2, [(0, 1)])
    w = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = layers.hyp_aggregate(h, w, g, tape.const(K), "center").value
    np.testing.assert_allclose(out, h.value[::-1], atol=1e-9)


def test_activation_examples():
    tape = ad.Tape()
    x = _lift(tape, np.array([[0.3, -1.1, 0.2]]), 2.0)
    same = layers.hyp_activation(x, tape.const(2.0), tape.const(2.0), "identity").value
    np.testing.assert_allclose(same, x.value, atol=1e-9)
    o = _lift(tape, np.zeros((1, 3)), 2.0)
    for act in ("relu", "tanh", "identity"):
        out = layers.hyp_activation(o, tape.const(2.0), tape.const(0.5), act).value
        np.testing.assert_allclose(out, [M.origin(3, 0.5)], atol=1e-12)
    neg = _lift(tape, np.array([[-0.3, -1.1, -0.2]]), 2.0)
    out = layers.hyp_activation(neg, tape.const(2.0), tape.const(3.0), "relu").value
    np.testing.assert_allclose(out, [M.origin(3, 3.0)], atol=1e-12)
    moved = layers.hyp_activation(x, tape.const(2.0), tape.const(0.5), "tanh").value
    assert M.is_on_manifold(moved, 0.5, tol=1e-9)


def test_activation_rejects_unsupported_sigma():
    tape = ad.Tape()
    with pytest.raises(ValueError):
        layers.hyp_activation(_lift(tape, np.zeros((1, 2)), 1.0), tape.const(1.0), tape.const(1.0), "sigmoid")


def test_hgcn_single_layer_identity_reproduces_lifted_features():
    tape = ad.Tape()
    feats = np.random.default_rng(2).uniform(-1, 1, size=(4, 3))
    cfg = ModelConfig(dims=[3], activation="identity", use_attention=False)
    params = {"W0": tape.const(np.eye(3)), "b0": tape.const(np.zeros(3)), "att0": tape.const(np.zeros(6))}
    curvs = [tape.const(1.3), tape.const(1.3)]
    out = layers.hgcn_forward(params, curvs, _graph(4, []), tape.const(feats), cfg).value
    np.testing.assert_allclose(out, _lift(tape, feats, 1.3).value, atol=1e-9)


@pytest.mark.parametrize("use_attention", [True, False])
@pytest.mark.parametrize("aggregation", ["center", "origin"])
def test_hgcn_outputs_stay_on_manifold(use_attention, aggregation):
    rng = np.random.default_rng(4)
    n, f = 30, 5
    edges = [(i, int(rng.integers(0, i))) for i in range(1, n)]
    cfg = ModelConfig(dims=[8, 4], use_attention=use_attention, aggregation=aggregation)
    tape = ad.Tape()
    params = {k: tape.const(v) for k, v in layers.init_params(layers.hgcn_param_shapes(f, cfg), rng).items()}
    Ks = [0.7, 1.0, 2.5]
    out = layers.hgcn_forward(params, [tape.const(k) for k in Ks], _graph(n, edges),
                              tape.const(rng.uniform(-1, 1, size=(n, f))), cfg).value
    assert out.shape == (n, 5)
    assert M.is_on_manifold(out, Ks[-1], tol=1e-7)


def test_hgcn_needs_one_curvature_per_boundary():
    tape = ad.Tape()
    cfg = ModelConfig(dims=[2])
    with pytest.raises(ad.ContractError):
        layers.hgcn_forward({}, [tape.const(1.0)], _graph(2, []), tape.const(np.zeros((2, 2))), cfg)


def test_uniform_weights_cover_the_closed_neighbourhood():
    g = _graph(4, [(0, 1), (1, 2), (1, 3)])
    np.testing.assert_allclose(g.uniform[1], [0.25, 0.25, 0.25, 0.25])
    np.testing.assert_allclose(g.uniform[0], [0.5, 0.5, 0.0, 0.0])


def test_gcn_examples():
    tape = ad.Tape()
    x = np.array([[0.5, -0.25]])
    cfg = ModelConfig(dims=[2], activation="relu")
    params = {"W0": tape.const(np.eye(2)), "b0": tape.const(np.zeros(2))}
    out = layers.gcn_forward(params, _graph(1, []), tape.const(x), cfg).value
    np.testing.assert_allclose(out, [[0.5, 0.0]])
    rng = np.random.default_rng(0)
    cfg = ModelConfig(dims=[6, 3])
    params = {k: tape.const(v) for k, v in layers.init_params(layers.gcn_param_shapes(4, cfg), rng).items()}
    out = layers.gcn_forward(params, _graph(7, [(0, 1), (2, 5)]), tape.const(rng.standard_normal((7, 4))), cfg)
    assert out.shape == (7, 3)


def test_dropconnect_masks_zero_weights():
    tape = ad.Tape()
    W = tape.param(np.ones((2, 2)))
    mask = np.array([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(layers._masked(tape, W, {"W0": mask}, "W0").value, mask)
    assert layers._masked(tape, W, None, "W0") is W


LAYER_CASES = [
    "expmap0", "logmap0", "expmap", "logmap", "sqdist", "transp0", "feature_to_hyperbolic",
    "hyp_linear", "hyp_bias_add", "hyp_attention_weights", "hyp_aggregate_center",
    "hyp_aggregate_origin", "hyp_activation_tanh", "hyp_activation_relu",
    "hgcn_forward_att_center", "hgcn_forward_att_origin", "hgcn_forward_uniform_center", "gcn_forward",
]


@pytest.mark.parametrize("name", LAYER_CASES)
def test_layer_gradients(name):
    for seed in range(2):
        assert gradcases.max_error(name, seed) <= 1e-4
