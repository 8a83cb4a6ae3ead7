"""Convex bodies containing the origin in their interior.

Three representations share one duck-typed interface (``support``,
``radial``, ``boundary_point``, ``volume``, ``diameter``):

* :class:`Ellipsoid` -- half-axes, principal directions and an optional
  center (a translated ball is an ellipsoid with equal axes).
* :class:`Polytope` -- vertex list; facets come from the convex hull.
* :class:`SupportBody` -- support function sampled on a spherical grid.

Module-level functions mirror the methods so callers can write
``support(body, v)`` for any variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from .sphere import (
    ScalarField,
    SphericalGrid,
    coordinate_derivatives,
    frame_hessian,
    integrate,
    tangent_gradient,
)

__all__ = [
    "Ellipsoid",
    "Polytope",
    "SupportBody",
    "ConvexBody",
    "NonConvexError",
    "OriginNotInteriorError",
    "NonSmoothDirectionError",
    "AsymmetricBodyError",
    "ball",
    "box",
    "cube",
    "support",
    "radial",
    "boundary_point",
    "volume",
    "diameter",
    "centroid",
    "inscribed_john_ellipsoid",
    "to_support_field",
    "unit_ball_volume",
]

PSD_TOL = 1e-8
INTERIOR_TOL = 1e-6


class NonConvexError(ValueError):
    """Negative curvature radius found on a sampled support function."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class OriginNotInteriorError(ValueError):
    pass


class NonSmoothDirectionError(ValueError):
    pass


class AsymmetricBodyError(ValueError):
    pass


def unit_ball_volume(n):
    """kappa_n, the volume of the unit ball in R^n."""
    return pi ** (n / 2) / gamma(n / 2 + 1)


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _scalar_or_array(result, v):
    return result if np.ndim(v) > 1 else result[0]


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``{c + M y : |y| <= 1}`` with ``M = R diag(axes) R^T``.

    Half-axes are stored ascending; rotation columns are the matching
    principal directions.
    """

    axes: np.ndarray
    rotation: np.ndarray = None
    center: np.ndarray = None

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=float)
        n = axes.size
        R = np.eye(n) if self.rotation is None else np.asarray(self.rotation, dtype=float)
        c = np.zeros(n) if self.center is None else np.asarray(self.center, dtype=float)
        if np.any(axes <= 0):
            raise ValueError("half-axes must be positive")
        if R.shape != (n, n) or not np.allclose(R.T @ R, np.eye(n), atol=1e-12):
            raise ValueError("rotation must be an orthogonal n x n matrix")
        order = np.argsort(axes, kind="stable")
        axes, R = axes[order], R[:, order]
        M = (R * axes) @ R.T
        Minv = (R / axes) @ R.T
        if np.linalg.norm(Minv @ c) >= 1 - INTERIOR_TOL:
            raise OriginNotInteriorError("origin is not interior to the ellipsoid")
        for name, val in (("axes", axes), ("rotation", R), ("center", c), ("_M", M), ("_Minv", Minv)):
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.axes.size

    @property
    def is_centered(self):
        return not np.any(self.center)

    def support(self, v):
        v = np.atleast_2d(v)
        return _scalar_or_array(np.linalg.norm(v @ self._M, axis=-1) + v @ self.center, v)

    def radial(self, v):
        v = _unit(np.atleast_2d(v))
        a = np.sum((v @ self._Minv) ** 2, axis=-1)
        b = (v @ self._Minv) @ (self._Minv @ self.center)
        c = np.sum((self._Minv @ self.center) ** 2) - 1.0
        t = (b + np.sqrt(b * b - a * c)) / a
        return _scalar_or_array(t, v)

    def boundary_point(self, v):
        v = np.atleast_2d(v)
        Mv = v @ self._M
        x = self.center + (Mv @ self._M) / np.linalg.norm(Mv, axis=-1, keepdims=True)
        return _scalar_or_array(x, v)

    def outer_normal(self, x):
        """Unit outer normal at boundary points ``x``."""
        x = np.atleast_2d(x)
        y = (x - self.center) @ self._Minv @ self._Minv
        return _scalar_or_array(_unit(y), x)

    def curvature_density(self, v):
        """det(hess h + h I) at unit ``v``: (prod axes)^2 / |M v|^{n+1}."""
        v = np.atleast_2d(v)
        r = np.linalg.norm(v @ self._M, axis=-1)
        return _scalar_or_array(np.prod(self.axes) ** 2 / r ** (self.n + 1), v)

    def volume(self):
        return unit_ball_volume(self.n) * float(np.prod(self.axes))

    def diameter(self):
        return 2.0 * float(self.axes[-1])

    def centroid(self):
        return self.center.copy()

    def scaled(self, lam):
        return Ellipsoid(self.axes * lam, self.rotation, self.center * lam)

    def max_support(self):
        """max over the sphere of h, i.e. the largest distance from o to K."""
        # exact for centered ellipsoids; otherwise a dense probe
        if self.is_centered:
            return float(self.axes[-1])
        return float(np.max(self.support(_probe_directions(self.n, 20000))))


def ball(radius=1.0, center=None, n=3):
    if center is not None:
        n = len(center)
    return Ellipsoid(np.full(n, float(radius)), None, center)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of ``vertices``; facets are ``(normal, offset, area)``."""

    vertices: np.ndarray
    normals: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)
    areas: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.shape[1] not in (2, 3):
            raise ValueError("polytopes are supported for n in {2, 3}")
        hull = ConvexHull(V)
        V = V[hull.vertices]
        hull = ConvexHull(V)
        diam = float(np.max(pdist(V)))
        # merge coplanar simplices into facets
        eq = hull.equations
        keys = np.round(np.c_[eq[:, :-1], eq[:, -1] / diam], 9)
        facet_of = np.unique(keys, axis=0, return_inverse=True)[1].ravel()
        nf = facet_of.max() + 1
        normals = np.zeros((nf, V.shape[1]))
        offsets = np.zeros(nf)
        areas = np.zeros(nf)
        for i, simplex in enumerate(hull.simplices):
            f = facet_of[i]
            normals[f] = eq[i, :-1]
            offsets[f] = -eq[i, -1]
            P = V[simplex]
            if V.shape[1] == 2:
                areas[f] += np.linalg.norm(P[1] - P[0])
            else:
                areas[f] += 0.5 * np.linalg.norm(np.cross(P[1] - P[0], P[2] - P[0]))
        if offsets.min() < INTERIOR_TOL * diam:
            raise OriginNotInteriorError(
                f"origin not strictly interior (min facet offset {offsets.min():.3g})"
            )
        if np.any(areas <= 0):
            raise ValueError("degenerate facet")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "areas", areas)
        object.__setattr__(self, "_simplices", hull.simplices)
        object.__setattr__(self, "_diameter", diam)

    @property
    def n(self):
        return self.vertices.shape[1]

    def support(self, v):
        v = np.atleast_2d(v)
        return _scalar_or_array(np.max(v @ self.vertices.T, axis=-1), v)

    def radial(self, v):
        v = _unit(np.atleast_2d(v))
        c = v @ self.normals.T
        with np.errstate(divide="ignore"):
            t = np.where(c > 0, self.offsets / np.where(c > 0, c, 1.0), np.inf)
        return _scalar_or_array(t.min(axis=-1), v)

    def hit_facet(self, v):
        """Index of the facet crossed by the ray through unit ``v``."""
        v = _unit(np.atleast_2d(v))
        c = v @ self.normals.T
        with np.errstate(divide="ignore"):
            t = np.where(c > 0, self.offsets / np.where(c > 0, c, 1.0), np.inf)
        return t.argmin(axis=-1)

    def boundary_point(self, v):
        v = np.atleast_2d(v)
        vals = v @ self.vertices.T
        order = np.argsort(vals, axis=-1)
        top, second = np.take_along_axis(vals, order[:, -2:], axis=-1).T[::-1]
        if np.any(top - second <= 1e-12 * np.maximum(1.0, np.abs(top))):
            raise NonSmoothDirectionError("direction lies on a wall of the normal fan")
        return _scalar_or_array(self.vertices[order[:, -1]], v)

    def volume(self):
        """Fan triangulation from the origin over the hull simplices."""
        S = self.vertices[self._simplices]
        return float(np.abs(np.linalg.det(S)).sum() / gamma(self.n + 1))

    def diameter(self):
        return self._diameter

    def centroid(self):
        S = self.vertices[self._simplices]
        vols = np.abs(np.linalg.det(S)) / gamma(self.n + 1)
        cents = S.sum(axis=1) / (self.n + 1)
        return (vols[:, None] * cents).sum(0) / vols.sum()

    def linear_image(self, Phi):
        return Polytope(self.vertices @ np.asarray(Phi, dtype=float).T)

    def scaled(self, lam):
        return Polytope(self.vertices * lam)

    def max_support(self):
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))


def box(half_widths):
    hw = np.asarray(half_widths, dtype=float)
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * hw.size, indexing="ij")).reshape(hw.size, -1).T
    return Polytope(signs * hw)


def cube(n=3, half_width=1.0):
    return box(np.full(n, half_width))


@dataclass(frozen=True, eq=False)
class SupportBody:
    """A convex body given by its support function on a spherical grid.

    ``margin`` is the smallest eigenvalue of ``hess u + u I`` over the
    nodes (the convexity certificate); ``smooth`` is False for mollified
    polytopes, whose sampled support function has kinks.
    """

    u: ScalarField
    margin: float = None
    smooth: bool = True

    def __post_init__(self):
        g = self.u.grid
        d = coordinate_derivatives(g, self.u)
        A = frame_hessian(g, d)
        eig = np.linalg.eigvalsh(A)[:, 0]
        object.__setattr__(self, "margin", float(eig.min()))
        object.__setattr__(self, "_worst_node", int(eig.argmin()))
        if self.u.values.min() <= 0:
            raise OriginNotInteriorError("support function must be positive on the sphere")
        if self.smooth and self.margin < -PSD_TOL:
            raise NonConvexError(
                f"convexity certificate violated at node {self._worst_node} "
                f"(min eigenvalue {self.margin:.3g})",
                node=self._worst_node,
            )
        grad = tangent_gradient(g, d)
        Dh = np.einsum("ia,iaj->ij", grad, g.frames) + self.u.values[:, None] * g.nodes
        object.__setattr__(self, "_Dh", Dh)
        object.__setattr__(self, "_det", np.linalg.det(A) if g.n == 3 else A[:, 0, 0])

    @classmethod
    def from_values(cls, grid, values, smooth=True):
        return cls(ScalarField(grid, values), smooth=smooth)

    @property
    def grid(self):
        return self.u.grid

    @property
    def n(self):
        return self.grid.n

    @property
    def worst_node(self):
        return self._worst_node

    def support(self, v):
        return self.grid.evaluate(self.u.values, v)

    def radial(self, v):
        """Largest t with ``<t v, w> <= h(w)`` for every grid node w."""
        v = _unit(np.atleast_2d(v))
        c = v @ self.grid.nodes.T
        h = self.u.values
        t = np.where(c > 0, h / np.where(c > 0, c, 1.0), np.inf).min(axis=-1)
        return _scalar_or_array(t, v)

    def boundary_point(self, v):
        """``Dh(v) = grad u + u v``; spectral at nodes, finite differences elsewhere."""
        v = np.atleast_2d(v)
        grad, _ = self.grid.homogeneous_derivatives(self.u.values, v)
        return _scalar_or_array(grad, v)

    def node_boundary_points(self):
        return self._Dh

    def volume(self):
        return float(integrate(self.grid, self.u.values * self._det) / self.n)

    def diameter(self):
        """Grid lower bound: max distance among the sampled boundary points."""
        pts = self._Dh
        if len(pts) > self.n + 1:
            pts = pts[ConvexHull(pts).vertices]
        return float(np.max(pdist(pts)))

    def centroid(self):
        # cone over dS with apex o has its centroid n/(n+1) of the way to x
        dV = self.grid.weights * self.u.values * self._det / self.n
        return (self.n / (self.n + 1)) * (dV @ self._Dh) / dV.sum()

    def scaled(self, lam):
        return SupportBody(ScalarField(self.grid, self.u.values * lam), smooth=self.smooth)

    def max_support(self):
        return float(self.u.values.max())


ConvexBody = Ellipsoid | Polytope | SupportBody


def support(body, v):
    """h_K(v) = max over x in K of <x, v>."""
    return body.support(v)


def radial(body, v):
    """rho_K(v) = max{t >= 0 : t v in K}."""
    return body.radial(v)


def boundary_point(body, v):
    """Boundary point with outer normal v, i.e. Dh_K(v)."""
    return body.boundary_point(v)


def volume(body):
    return body.volume()


def diameter(body):
    return body.diameter()


def centroid(body):
    return body.centroid()


def _probe_directions(n, count, seed=12345):
    rng = np.random.default_rng(seed)
    return _unit(rng.standard_normal((count, n)))


def _check_symmetric(body, tol=1e-10):
    if isinstance(body, SupportBody):
        v = body.grid.nodes
        h = body.u.values
        gap = np.abs(h - h[body.grid.antipode]).max()
    else:
        v = _probe_directions(body.n, 256)
        gap = np.abs(body.support(v) - body.support(-v)).max()
    if gap > tol * max(1.0, body.max_support()):
        raise AsymmetricBodyError(f"body is not o-symmetric (|h(v) - h(-v)| up to {gap:.3g})")


def _centered_mvee(Y, tol=1e-7, max_iter=100000):
    """Minimum-volume centered ellipsoid ``{x : x^T A x <= 1}`` containing rows of Y.

    Khachiyan's coordinate ascent with Todd-Yildirim away steps on the dual
    weights; stops when all ``g_i <= n (1 + tol)``.
    """
    m, n = Y.shape
    u = np.full(m, 1.0 / m)
    for _ in range(max_iter):
        X = (Y.T * u) @ Y
        g = np.einsum("ij,jk,ik->i", Y, np.linalg.inv(X), Y)
        j = int(np.argmax(g))
        active = u > 0
        k = int(np.flatnonzero(active)[np.argmin(g[active])])
        up = g[j] / n - 1.0
        down = 1.0 - g[k] / n
        if max(up, down) <= tol:
            break
        if up >= down:
            step = (g[j] - n) / (n * (g[j] - 1.0))
            u *= 1.0 - step
            u[j] += step
        else:
            cap = u[k] / (1.0 - u[k])
            step = (n - g[k]) / (n * (g[k] - 1.0)) if g[k] > 1.0 else cap
            step = min(step, cap)
            u *= 1.0 + step
            u[k] -= step
            u[u < 0] = 0.0
    X = (Y.T * u) @ Y
    return np.linalg.inv(n * X)


def inscribed_john_ellipsoid(body, tol=1e-7):
    """Maximal-volume centered ellipsoid inside an o-symmetric body.

    Computed as the polar of the minimum-volume enclosing ellipsoid of the
    polar body's vertex set: facet points ``w/h`` for polytopes, ``v/h(v)``
    over grid nodes for support bodies.  Satisfies ``E <= K <= sqrt(n) E``.
    """
    _check_symmetric(body)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(body.axes, body.rotation)
    if isinstance(body, Polytope):
        Y = body.normals / body.offsets[:, None]
    else:
        Y = body.grid.nodes / body.u.values[:, None]
    A = _centered_mvee(Y, tol=tol)
    # polar of {y^T A y <= 1} is {x^T A^{-1} x <= 1}, whose half-axes are sqrt(eig A)
    mu, R = np.linalg.eigh(A)
    return Ellipsoid(np.sqrt(mu), R)


def to_support_field(body, grid, mollify=None):
    """Sample a body's support function on ``grid``.

    Polytopes require a positive ``mollify`` radius; the result is the
    support function of ``P + mollify * B``, i.e. ``h_P + mollify``.  That
    function still has kinks across the normal fan, so its certificate is
    recorded but not enforced.
    """
    if not isinstance(grid, SphericalGrid):
        raise TypeError("grid must be a SphericalGrid")
    if body.n != grid.n:
        raise ValueError(f"body dimension {body.n} does not match grid dimension {grid.n}")
    if isinstance(body, SupportBody):
        values = body.support(grid.nodes) if body.grid is not grid else body.u.values
        return SupportBody(ScalarField(grid, values), smooth=body.smooth)
    if isinstance(body, Polytope):
        if mollify is None or mollify <= 0:
            raise ValueError("polytopes need a positive mollification radius")
        values = body.support(grid.nodes) + mollify
        return SupportBody(ScalarField(grid, values), smooth=False)
    return SupportBody(ScalarField(grid, body.support(grid.nodes)))
