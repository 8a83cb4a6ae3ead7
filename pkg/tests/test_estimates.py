import json

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from dualmink import estimates as es
from dualmink.bodies import Ellipsoid, ball, cube


def test_row_relations_and_audit():
    rep = es.Report("t")
    assert rep.add({}, 1.0, 2.0, "<=").passed
    assert not rep.add({}, 3.0, 2.0, "<=").passed
    assert rep.add({}, 2.0 + 1e-12, 2.0, "~=", 1e-10).passed
    assert rep.add({}, 5.0, [1, 10], "in").passed
    assert not rep.add({}, 1.0, 1.0, "<").passed
    assert not rep.passed and rep.audit()
    back = json.loads(rep.to_json())
    for row in back["rows"]:
        assert es.Row(row["params"], row["lhs"], row["rhs"], row["relation"], row["tol"]).passed == row["passed"]
    assert rep.to_csv().count("\n") == 6
    with pytest.raises(ValueError):
        es.Row({}, 1.0, 1.0, "!!")


def test_power_diff_example():
    rep = es.check_power_diff(1.0, [0.1])
    row = rep.rows[0]
    res = minimize_scalar(lambda h: -(h - h**1.1), bounds=(0, 1), method="bounded", options={"xatol": 1e-12})
    assert row.params["max_diff"] == pytest.approx(-res.fun, rel=1e-6)
    assert row.params["argmax_h"] == pytest.approx(res.x, abs=1e-4)
    assert row.params["max_diff"] == pytest.approx(0.0350, abs=5e-5)
    assert rep.passed


@pytest.mark.parametrize("deltas", [[0.0], [0.3], [0.1, -0.25]])
def test_power_diff_rejects_bad_delta(deltas):
    with pytest.raises(ValueError):
        es.check_power_diff(1.0, deltas)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_singular_axis_integral(s):
    rep = es.singular_axis_integral(3, s)
    assert rep.passed
    assert rep.metadata["exact"] == pytest.approx(4 * np.pi / (1 - s), rel=1e-12)
    with pytest.raises(ValueError):
        es.singular_axis_integral(3, 1.0)


def test_lower_bound_unit_ball():
    rep = es.check_total_lower_bound(ball(1.0), 0.0, 3.0, 0.5)
    assert rep.rows[0].lhs == pytest.approx(4 * np.pi, rel=1e-12)
    assert rep.rows[0].rhs == pytest.approx(np.pi, rel=1e-12)
    with pytest.raises(ValueError):
        es.check_total_lower_bound(Ellipsoid([1.0, 1.0, 2.0]), 0.0, 3.0, 0.3)
    with pytest.raises(ValueError):
        es.check_total_lower_bound(ball(1.0), 1.5, 3.0, 0.2)


def test_lower_bound_cube_uses_mc():
    rep = es.check_total_lower_bound(cube(), 0.0, 3.0, 0.28)
    assert rep.passed and rep.rows[0].lhs == pytest.approx(24.0, rel=1e-2)


def test_hmax_sandwich_ball_exact():
    rep = es.hmax_sandwich(ball(2.0), 1.5)
    assert rep.rows[0].lhs == pytest.approx(4 * np.pi * 2**1.5, rel=1e-12)
    assert rep.passed
    two = es.hmax_sandwich(ball(1.0, n=2), 2.0)
    # hemisphere moment on S^1: int cos^2 over half circle = pi/2
    assert two.metadata["c"] == pytest.approx(np.pi / 2)


def test_negative_moment_against_1d_quadrature():
    for R in (2.0, 8.0):
        E = Ellipsoid([1.0, 1.0, R])
        h = lambda t: np.sqrt((1 - t * t) + R * R * t * t) ** (-0.5)
        full = 4 * np.pi * quad(h, 0, 1, epsabs=0, epsrel=1e-13)[0]
        band = 4 * np.pi * quad(h, 0, 0.1, epsabs=0, epsrel=1e-13)[0]
        assert es.ellipsoid_negative_moment(E, 0.5) == pytest.approx(full, rel=1e-8)
        assert es.ellipsoid_negative_moment(E, 0.5, band=0.1) == pytest.approx(band, rel=1e-8)


def test_negative_moment_ball_and_circle():
    assert es.ellipsoid_negative_moment(ball(2.0), 0.5) == pytest.approx(4 * np.pi * 2**-0.5, rel=1e-12)
    E = Ellipsoid([1.0, 3.0])
    ref = quad(lambda t: (np.cos(t) ** 2 + 9 * np.sin(t) ** 2) ** -0.25, 0, 2 * np.pi, epsrel=1e-13)[0]
    assert es.ellipsoid_negative_moment(E, 0.5) == pytest.approx(ref, rel=1e-8)


def test_ellipsoid_moment_bounds_and_errors():
    rep = es.ellipsoid_moments(Ellipsoid([1.0, 2.0, 3.0]), 0.5, family=None, decay_check=False)
    assert rep.passed
    with pytest.raises(ValueError):
        es.ellipsoid_moments(ball(1.0), 0.5, xis=[0.6])


def test_family_scan_ball_identity():
    rep = es.family_scan("ball", [0.5, 1.0, 2.0], 0.5, 3.0)
    assert rep.passed
    for m in rep.metadata["members"]:
        assert m["ratio_raw"] == pytest.approx(m["param"] ** 2.5, rel=1e-12)
    with pytest.raises(ValueError):
        es.family_scan("torus", [1.0], 0.5, 3.0)


def test_family_scan_random_polytope():
    rep = es.family_scan("random_polytope", [1, 2], 0.0, 3.0, mc_samples=50_000)
    assert rep.passed and len(rep.metadata["members"]) == 2
