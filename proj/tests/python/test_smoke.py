import math
import os
from pathlib import Path

import numpy as np
import pytest

import invdesc

DATA = Path(os.environ.get("INVDESC_REPO_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_load_image_and_gradient():
    img = invdesc.load_image(str(DATA / "patches" / "camera_64.pgm"))
    assert img.shape == (64, 64)
    assert 0.0 <= img.min() and img.max() <= 1.0
    gx, gy = invdesc.gradient(img)
    assert gx.shape == gy.shape == img.shape
    angle, magnitude = invdesc.polar_gradient(img)
    assert np.allclose(magnitude, np.hypot(gx, gy))
    assert np.all((angle >= -math.pi) & (angle < math.pi))


def test_missing_image_raises():
    with pytest.raises(invdesc.ImageIoError):
        invdesc.load_image(str(DATA / "does_not_exist.pgm"))


def test_ramp_gradient():
    ramp = np.tile(np.arange(8, dtype=float) * 0.1, (6, 1))
    gx, gy = invdesc.gradient(ramp)
    # Border columns see a replicated edge and carry half the slope.
    assert np.allclose(gx[:, 1:-1], 0.1)
    assert np.allclose(gx[:, [0, -1]], 0.05)
    assert np.allclose(gy, 0.0)


def test_marginal_is_uniform_for_a_flat_patch_and_normalized():
    assert invdesc.contrast_marginal(0.3, 0.0, 0.0) == pytest.approx(1 / (2 * math.pi), abs=1e-15)
    for noise in ("fixed", "proportional", "joint"):
        alphas, values = invdesc.likelihood_curve(0.4, 1.3, noise=noise, n_grid=4096)
        assert alphas.shape == values.shape == (4096,)
        assert values.sum() * 2 * math.pi / 4096 == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        invdesc.contrast_marginal(0.0, 0.0, 1.0, noise="bogus")


def test_half_gaussian_moment_large_mean():
    assert invdesc.half_gaussian_moment(5.0, 0.1) == pytest.approx(5.0, rel=1e-12)


def test_sift_descriptor_shape_and_flat_patch():
    d = invdesc.sift_descriptor(np.full((16, 16), 0.4))
    assert d.shape == (4, 4, 8)
    assert np.all(d == 0.0)
    rng = np.random.default_rng(0)
    patch = rng.random((16, 16))
    assert np.allclose(invdesc.sift_descriptor(3.0 * patch), 3.0 * invdesc.sift_descriptor(patch), rtol=1e-12)


def test_clamp_normalize():
    h = invdesc.clamp_normalize([4.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 0.5)
    assert h.sum() * 2 * math.pi / 8 == pytest.approx(1.0)


def test_kernel_distances_decrease():
    d = [row[2] for row in invdesc.kernel_sup_distances()]
    assert len(d) == 3 and d[0] > d[1] > d[2]


def test_relu_equivalence_on_flat_and_two_edge_images():
    rows = invdesc.relu_equivalence(np.full((48, 48), 0.5), [1.0, 2.0], [0.0, 1.0])
    assert len(rows) == 4
    assert all(r["rel_error"] == 0.0 for r in rows)
    bar = invdesc.two_edge_image(9, 96)
    err = [r["rel_error"] for r in invdesc.relu_equivalence(bar, [2.0, 4.0, 8.0], [0.0])]
    assert err[0] < err[1] < err[2]


def test_sal_match_recovers_planted_patch():
    rng = np.random.default_rng(1)
    image = rng.random((40, 40))
    patch = rng.random((10, 10))
    image[12:22, 16:26] = patch
    best = invdesc.sal_match(patch, image, stride=2)
    assert (best["tx"], best["ty"], best["s"]) == (16.0, 12.0, 1.0)


def test_hierarchy_check():
    rows = invdesc.hierarchy_check(models=5, seed=3)
    assert len(rows) == 5
    assert max(r["max_abs_discrepancy"] for r in rows) < 1e-12
