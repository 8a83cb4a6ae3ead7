import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from dualmink.bodies import (
    AsymmetricBodyError,
    Ellipsoid,
    NonConvexError,
    NonSmoothDirectionError,
    OriginNotInteriorError,
    Polytope,
    SupportBody,
    ball,
    box,
    cube,
    inscribed_john_ellipsoid,
    to_support_field,
    unit_ball_volume,
)


def _dirs(n, count, seed=0):
    v = np.random.default_rng(seed).standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_unit_ball_volumes():
    assert unit_ball_volume(2) == pytest.approx(np.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * np.pi / 3)


def test_ellipsoid_support_matches_boundary_sampling():
    R = Rotation.from_euler("xyz", [0.3, -0.4, 1.1]).as_matrix()
    E = Ellipsoid([1.0, 2.0, 3.0], rotation=R, center=[0.1, -0.2, 0.3])
    # boundary points c + R diag(a) w for unit w
    W = _dirs(3, 200000, 1)
    X = E.center + (W * E.axes) @ E.rotation.T
    V = _dirs(3, 50, 2)
    brute = (V @ X.T).max(axis=1)
    assert np.abs(E.support(V) - brute).max() < 1e-3
    assert np.all(E.support(V) >= brute - 1e-12)


def test_ellipsoid_radial_and_boundary_consistent():
    E = Ellipsoid([1.0, 2.0, 3.0], center=[0.2, 0.0, -0.1])
    V = _dirs(3, 100)
    x = E.radial(V)[:, None] * V
    y = E._Minv @ (x - E.center).T
    assert np.allclose(np.linalg.norm(y, axis=0), 1.0, atol=1e-12)
    bp = E.boundary_point(V)
    assert np.allclose(np.einsum("ij,ij->i", bp, V), E.support(V), atol=1e-12)


def test_ellipsoid_geometry():
    E = Ellipsoid([3.0, 1.0, 2.0])
    assert np.allclose(E.axes, [1, 2, 3])
    assert E.volume() == pytest.approx(8 * np.pi)
    assert E.diameter() == pytest.approx(6.0)
    assert ball(2.0, n=2).volume() == pytest.approx(4 * np.pi)


def test_ellipsoid_errors():
    with pytest.raises(OriginNotInteriorError):
        Ellipsoid([1.0, 1.0, 1.0], center=[2.0, 0, 0])
    with pytest.raises(ValueError):
        Ellipsoid([1.0, -1.0, 1.0])


def test_cube_and_box():
    C = cube()
    V = _dirs(3, 100)
    assert np.allclose(C.support(V), np.abs(V).sum(axis=1))
    assert np.allclose(C.radial(V), 1 / np.abs(V).max(axis=1))
    assert C.volume() == pytest.approx(8.0)
    assert C.diameter() == pytest.approx(2 * np.sqrt(3))
    assert len(C.normals) == 6 and np.allclose(C.areas, 4.0)
    B = box([1.0, 2.0, 3.0])
    assert B.volume() == pytest.approx(48.0)
    assert np.allclose(B.centroid(), 0, atol=1e-12)


def test_polytope_errors():
    with pytest.raises(OriginNotInteriorError):
        Polytope(np.array([[1, 1, 1], [2, 1, 1], [1, 2, 1], [1, 1, 2.0]]))
    with pytest.raises(NonSmoothDirectionError):
        cube().boundary_point(np.array([[1.0, 1.0, 0.0]]) / np.sqrt(2))


def test_polytope_linear_image_volume():
    Phi = np.array([[2.0, 0.3, 0], [0, 1.0, 0.5], [0.1, 0, 0.5]])
    assert cube().linear_image(Phi).volume() == pytest.approx(8 * abs(np.linalg.det(Phi)))


def test_support_body_from_ellipsoid(g3):
    E = Ellipsoid([1.0, 2.0, 3.0])
    S = to_support_field(E, g3)
    assert S.margin > 0
    assert S.volume() == pytest.approx(E.volume(), rel=1e-8)
    assert np.allclose(S.centroid(), 0, atol=1e-8)
    V = _dirs(3, 30)
    assert np.abs(S.support(V) - E.support(V)).max() < 1e-5
    assert S.diameter() <= E.diameter() + 1e-9
    assert S.diameter() > 0.95 * E.diameter()


def test_translated_support_body_centroid(g3):
    c = np.array([0.1, -0.2, 0.05])
    S = to_support_field(ball(1.0, center=c), g3)
    assert np.allclose(S.centroid(), c, atol=1e-10)
    assert S.volume() == pytest.approx(4 * np.pi / 3, rel=1e-12)


def test_nonconvex_support_rejected(g3):
    Y = g3.synthesize(g3.unit_coefficients(4, 0))
    with pytest.raises(NonConvexError) as exc:
        SupportBody.from_values(g3, 1 + 0.5 * Y)
    assert exc.value.node is not None


def test_polytope_support_field_needs_mollifier(g3):
    with pytest.raises(ValueError):
        to_support_field(cube(), g3)
    S = to_support_field(cube(), g3, mollify=0.1)
    assert not S.smooth


def test_john_ellipsoid_of_box_and_ellipsoid(g3):
    J = inscribed_john_ellipsoid(box([1.0, 2.0, 3.0]))
    assert np.allclose(J.axes, [1, 2, 3], rtol=1e-4)
    S = to_support_field(Ellipsoid([1.0, 2.0, 3.0]), g3)
    assert np.allclose(inscribed_john_ellipsoid(S).axes, [1, 2, 3], rtol=1e-3)


def test_john_ellipsoid_rejects_asymmetric():
    with pytest.raises(AsymmetricBodyError):
        inscribed_john_ellipsoid(Polytope(np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1.0]])))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_john_containment_random_symmetric(seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((10, 3))
    P = Polytope(np.vstack([V, -V]))
    J = inscribed_john_ellipsoid(P)
    D = _dirs(3, 2000, seed)
    hJ, hP = J.support(D), P.support(D)
    # E inside K inside sqrt(n) E, with the solver tolerance as slack
    assert np.all(hJ <= hP * (1 + 1e-4))
    assert np.all(hP <= np.sqrt(3) * hJ * (1 + 1e-4))
