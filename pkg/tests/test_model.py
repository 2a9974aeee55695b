import numpy as np
import pytest

from tcn_cws.config import ConvConfig
from tcn_cws.corpus import make_batches
from tcn_cws.model import Model, param_shapes

from conftest import central_difference, relative_error


def test_param_shapes_default():
    shapes = param_shapes(ConvConfig(), 3000)
    assert shapes["embedding"] == (3000, 100)
    assert shapes["layer0.block0.kernel"] == (3, 100, 100)
    assert shapes["layer3.block1.gain"] == (100,)
    assert shapes["decoder.weight"] == (100, 4)
    assert shapes["crf.transitions"] == (4, 4)
    assert "layer0.proj" not in shapes
    assert len(shapes) == 1 + 4 * 2 * 4 + 3


def test_initialization():
    cfg = ConvConfig(n=6, fs=6, ly=2)
    p = Model.create(cfg, 12, np.random.default_rng(0)).params
    assert np.all(p["crf.transitions"] == 0)
    assert np.all(p["layer1.block0.gain"] == 1) and np.all(p["layer1.block0.shift"] == 0)
    assert np.all(p["layer0.block1.bias"] == 0) and np.all(p["decoder.bias"] == 0)
    r = np.sqrt(6 / (3 * 6 + 3 * 6))
    assert np.abs(p["layer0.block0.kernel"]).max() <= r
    assert np.abs(p["embedding"]).max() <= 0.1
    again = Model.create(cfg, 12, np.random.default_rng(0)).params
    assert all(np.array_equal(p[k], again[k]) for k in p)


def test_projection_when_widths_differ(rng):
    cfg = ConvConfig(n=3, fs=4, ly=2, dp=0.2)
    model = Model.create(cfg, 10, rng)
    assert model.params["layer0.proj"].shape == (3, 4)
    chars, labels = np.array([2, 5, 3, 9, 4]), np.array([0, 2, 3, 0, 2])
    _, grads = model.loss_and_grads(chars, labels, "train", np.random.default_rng(1))
    f = lambda: model.loss(chars, labels, "train", np.random.default_rng(1))
    for name in ("layer0.proj", "layer0.block0.kernel", "embedding"):
        assert relative_error(grads[name], central_difference(f, model.params[name])) < 1e-5


def test_batch_gradient_is_mean(rng):
    model = Model.create(ConvConfig(n=3, fs=3, ly=1), 8, rng)
    data = [(rng.integers(2, 8, n), rng.integers(0, 4, n)) for n in (3, 5)]
    batch = make_batches(data, 2, seed=0)[0]
    total, grads = model.batch_loss_and_grads(batch, mode="infer")
    singles = [model.loss_and_grads(c, y, "infer") for c, y in data]
    assert total == pytest.approx(sum(l for l, _ in singles), abs=1e-12)
    for k in grads:
        assert np.allclose(grads[k], (singles[0][1][k] + singles[1][1][k]) / 2, atol=1e-14)


def test_predict_returns_labels(rng):
    model = Model.create(ConvConfig(n=3, fs=3, ly=2), 8, rng)
    path = model.predict(np.array([2, 3, 4, 5]))
    assert path.shape == (4,) and set(path.tolist()) <= {0, 1, 2, 3}
