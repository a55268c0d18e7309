import os
from pathlib import Path

import numpy as np
import pytest

import wamim

SOURCE = Path(os.environ.get("WAMIM_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def haar_step(x):
    a, b = x[0::2, 0::2], x[0::2, 1::2]
    c, d = x[1::2, 0::2], x[1::2, 1::2]
    return (a + b + c + d) / 2, (a - b + c - d) / 2, (a + b - c - d) / 2, (a - b - c + d) / 2


def test_hand_case():
    ll, h, v, d = wamim.dwt_level(np.array([[1.0, 3.0], [5.0, 7.0]]))
    assert (ll[0, 0], h[0, 0], v[0, 0], d[0, 0]) == (8.0, -2.0, -4.0, 0.0)


def test_dwt_matches_numpy_and_inverts():
    rng = np.random.default_rng(0)
    img = rng.uniform(-1, 1, size=(3, 32, 32))
    pyr = wamim.dwt(img, 3)
    assert len(pyr["levels"]) == 3
    approx = img
    for level in pyr["levels"]:
        bands = [np.stack(haar_step(ch)) for ch in approx]
        ll = np.stack([b[0] for b in bands])
        for k, name in enumerate("HVD", start=1):
            np.testing.assert_allclose(level[name], np.stack([b[k] for b in bands]), atol=1e-12)
        approx = ll
    np.testing.assert_allclose(pyr["approx"], approx, atol=1e-12)
    np.testing.assert_allclose(wamim.idwt(pyr), img, atol=1e-12)
    energy = sum((lv[n] ** 2).sum() for lv in pyr["levels"] for n in "HVD") + (pyr["approx"] ** 2).sum()
    assert abs(energy - (img**2).sum()) / (img**2).sum() < 1e-12


def test_odd_dimensions_raise():
    with pytest.raises(wamim.DimensionError):
        wamim.dwt(np.zeros((1, 12, 12)), 3)
    assert issubclass(wamim.DimensionError, ValueError)


def test_targets_shapes_and_normalization():
    img = np.random.default_rng(1).uniform(0, 1, size=(3, 224, 224))
    targets = wamim.build_targets(img, 5, [2, 3, 4, 5], [3, 6, 9, 12], [1, 1, 1, 1])
    assert [t.shape for t in targets] == [(9, 56, 56), (9, 28, 28), (9, 14, 14), (12, 7, 7)]
    for t in targets:
        flat = t.reshape(t.shape[0], -1)
        np.testing.assert_allclose(flat.mean(axis=1), 0, atol=1e-12)


def test_mask_count_and_rescale():
    for g, r in [(8, 0.75), (14, 0.4), (14, 0.9)]:
        m = wamim.gen_block_mask(g, r, 2, seed=5)
        assert m.shape == (g, g)
        assert m.sum() == wamim.mask_target_count(g, r) == int(np.floor(r * g * g + 0.5))
    m = wamim.gen_block_mask(4, 0.5, 2, seed=3)
    np.testing.assert_array_equal(wamim.rescale_mask(m, 8), np.kron(m, np.ones((2, 2), np.uint8)))
    coarse = wamim.rescale_mask(m, 2)
    expect = m.reshape(2, 2, 2, 2).min(axis=(1, 3))
    np.testing.assert_array_equal(coarse, expect)
    np.testing.assert_array_equal(wamim.gen_block_mask(8, 0.75, 2, 9), wamim.gen_block_mask(8, 0.75, 2, 9))


def test_masked_distance_ignores_visible_cells():
    rng = np.random.default_rng(2)
    pred, target = rng.normal(size=(2, 4, 4)), rng.normal(size=(2, 4, 4))
    mask = (rng.uniform(size=(4, 4)) < 0.5).astype(np.uint8)
    mask[0, 0] = 1
    mean, count = wamim.masked_distance(pred, target, mask, "l2")
    sel = mask.astype(bool)
    assert count == sel.sum()
    assert mean == pytest.approx(((pred - target) ** 2)[:, sel].mean(), rel=1e-14)
    pred2 = pred.copy()
    pred2[:, ~sel] += 100.0
    assert wamim.masked_distance(pred2, target, mask, "l2") == (mean, count)


def test_model_loss_and_gradient_direction():
    model = wamim.Model(seed=0)
    img = np.random.default_rng(3).uniform(0, 1, size=(3, 32, 32))
    mask = wamim.gen_block_mask(model.grid, 0.75, 2, 4)
    preds = model.predict(img, mask)
    assert [p.shape for p in preds] == [(9, 16, 16), (9, 8, 8), (9, 4, 4), (12, 2, 2)]
    report, grads = model.loss_and_grad(img, mask)
    assert report == model.loss(img, mask)
    assert np.isfinite(report["total"])
    params = model.params()
    assert set(grads) == set(params)
    assert all(grads[k].shape == params[k].shape for k in params)


def test_verify_suite_and_commands(tmp_path):
    ok, text = wamim.verify("dwt")
    assert ok and "PASS" in text
    with pytest.raises(wamim.ConfigError):
        wamim.verify("nope")

    code, _ = wamim.cli_targets(tmp_path / "a")
    assert code == 0
    wamim.cli_targets(tmp_path / "b")
    assert (tmp_path / "a" / "targets.wtns").read_bytes() == (tmp_path / "b" / "targets.wtns").read_bytes()

    cfg = SOURCE / "configs" / "desk_reference.ini"
    assert wamim.config_ini(cfg) == wamim.config_ini()
    assert "seed = 7" in wamim.config_ini(seed=7)
