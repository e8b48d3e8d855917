import numpy as np
import pytest

from lorentz import data, train
from lorentz.config import config_from_dict


def _cfg(**over):
    base = {"dataset": "disease:n_nodes=60,inherit=1.0,feature_dim=4", "seeds": [0],
            "model_config": {"dims": [4, 4]}, "optimizer": {"max_epochs": 8, "patience": 5}}
    for k, v in over.items():
        if isinstance(v, dict) and k in base:
            base[k] = {**base[k], **v}
        else:
            base[k] = v
    return config_from_dict(base)


def _run(cfg, seed=0):
    g = data.load_dataset(cfg.dataset)
    return train.train_seed(cfg, train.prepare(cfg, g), seed)


def test_substreams_are_independent_and_reproducible():
    a = train.substream(3, "init").random(5)
    assert np.array_equal(a, train.substream(3, "init").random(5))
    assert not np.array_equal(a, train.substream(3, "dropconnect").random(5))
    assert not np.array_equal(a, train.substream(4, "init").random(5))


def test_fixed_curvature_is_not_trained():
    cfg = _cfg(model_config={"trainable_curvature": False, "init_curvature": 0.7})
    res = _run(cfg)
    assert res.curvatures == pytest.approx([0.7] * 3, rel=1e-12)


def test_trainable_curvature_moves():
    res = _run(_cfg())
    assert any(abs(k - 1.0) > 1e-6 for k in res.curvatures)
    assert all(k > 0 for k in res.curvatures)


def test_embeddings_lie_on_the_final_hyperboloid():
    from lorentz import manifold as M

    res = _run(_cfg())
    assert M.is_on_manifold(res.embeddings, res.curvatures[-1], tol=1e-7)


def test_dropconnect_is_not_applied_at_evaluation(monkeypatch):
    cfg = _cfg(model_config={"dropconnect": 0.5})
    seen = []
    real = train.Model.forward

    def spy(self, tape, params, graph, mg, masks=None):
        seen.append(masks is not None)
        return real(self, tape, params, graph, mg, masks)

    monkeypatch.setattr(train.Model, "forward", spy)
    res = _run(cfg)
    # one masked training pass and one unmasked validation pass per epoch, then the test pass
    assert seen == [True, False] * res.epochs_run + [False]


def test_training_is_deterministic():
    a, b = _run(_cfg()), _run(_cfg())
    assert a.test_metric == b.test_metric and np.array_equal(a.embeddings, b.embeddings)


def test_gcn_baseline_runs():
    res = _run(_cfg(model="gcn"))
    assert 0.0 <= res.test_metric <= 1.0 and res.curvatures == []


def test_node_classification_runs():
    res = _run(_cfg(task="nc", split_ratios=[0.6, 0.2, 0.2], lp_reg_weight=0.5))
    assert 0.0 <= res.test_metric <= 1.0 and 0.0 <= res.test_accuracy <= 1.0


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_raises_training_error():
    with pytest.raises(train.TrainingError):
        _run(_cfg(optimizer={"lr": 1e300}))
