import math
import os
import shutil

import numpy as np
import pytest

import ppw


def test_sample_shapes_and_determinism():
    spec = ppw.EnsembleSpec.harmonic(ppw.Manifold.sphere2(), 3)
    assert spec.N == 16
    a = ppw.sample(spec, 5)
    b = ppw.sample(spec, 5)
    assert a.shape == (16, 3)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-12)

    t = ppw.sample(ppw.EnsembleSpec.iid(ppw.Manifold.torus(2), 10), 1)
    assert t.shape == (10, 2)
    assert np.all((t >= 0.0) & (t < 1.0))


def test_north_pole_w2_brackets_closed_form():
    s2 = ppw.Manifold.sphere2()
    est = ppw.w2_to_volume(s2, np.array([[0.0, 0.0, 1.0]]), 8192)
    exact = math.sqrt((math.pi ** 2 - 4.0) / 2.0)
    assert est.bracket_low <= exact <= est.bracket_high
    assert abs(est.value - exact) < 0.02


def test_smoothing_bound_dominates_w2():
    s2 = ppw.Manifold.sphere2()
    pts = ppw.sample(ppw.EnsembleSpec.spherical(32), 2)
    est = ppw.w2_to_volume(s2, pts, 32 * 64)
    b = ppw.smoothing_bound(s2, pts)
    assert b.value >= est.bracket_low
    assert 0.0 < b.t <= 1.0
    assert ppw.w1_packing_lower_bound(32, s2) <= est.bracket_high


def test_lattice_counts():
    assert ppw.count_ball(2, 2.0) == 13
    assert ppw.count_ball("inf", 1.0) == 9
    assert ppw.count_ball(1, 1.0) == 5
    g = ppw.gauss_circle(10.0)
    assert g["holds"] and g["count"] == 317
    assert ppw.annulus_difference_count(2, [1, 0], 2.0) == 5


def test_rate_fit_recovers_slope():
    ns = [16.0, 64.0, 256.0, 1024.0]
    fit = ppw.fit_rate(ns, [3.0 * n ** -0.5 for n in ns])
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.model == "pure_power"


def test_invalid_input_raises():
    with pytest.raises(ValueError):
        ppw.w2_to_volume(ppw.Manifold.sphere2(), np.zeros((3, 2)), 64)
    with pytest.raises(ValueError):
        ppw.Manifold.parse("klein_bottle")


def test_sweep_and_report(tmp_path):
    conf = "[run]\nmanifold = T2\nseed = 4\nreplicas = 2\nm_mult = 8\n\n[ensemble iid]\nN = 8, 16, 32, 64\n"
    rows = ppw.run_sweep(conf, str(tmp_path))
    assert [r["N"] for r in rows] == [8, 16, 32, 64]
    assert rows[0]["slope_pure"] is not None
    text, code = ppw.report(str(tmp_path))
    assert code == 0
    assert text.startswith("ppw sweep report")
    assert (tmp_path / "report.txt").exists()
    assert (tmp_path / "all.svg").exists()


def test_golden_fixture_report(tmp_path):
    fixtures = os.environ.get("PPW_FIXTURE_DIR")
    if not fixtures:
        pytest.skip("PPW_FIXTURE_DIR not set")
    shutil.copy(os.path.join(fixtures, "summary.csv"), tmp_path / "summary.csv")
    text, code = ppw.report(str(tmp_path))
    with open(os.path.join(fixtures, "expected_report.txt")) as f:
        assert text == f.read()
    assert code == 0
