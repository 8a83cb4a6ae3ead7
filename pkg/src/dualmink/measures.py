"""Surface area, cone volume and (L_p) dual curvature measures.

Smooth bodies are handled through densities on a spherical grid, polytopes
through exact facet atoms, and any body with an available Gauss map through
a Monte Carlo estimate of the radial form

    C_{p,q,K}(S^{n-1}) = int h_K(nu_K(rho_K(v) v))^{-p} rho_K(v)^q dv.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import Ellipsoid, NonConvexError, Polytope, SupportBody, to_support_field
from .sphere import (
    ScalarField,
    SphericalGrid,
    coordinate_derivatives,
    frame_hessian,
    integrate,
    tangent_gradient,
)
from ._util import spawn_generators, worker_count

__all__ = [
    "AtomicMeasure",
    "DensityMeasure",
    "sk_density",
    "cone_volume_density",
    "lp_dual_density",
    "body_density",
    "polytope_cone_volume",
    "radial_total_mc",
    "radial_total_quadrature",
    "total",
]

CLAMP = 1e-8


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    directions: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if not np.allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-12):
            raise ValueError("atom directions must be unit vectors")
        if np.any(m <= 0):
            raise ValueError("atom masses must be positive")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "masses", m)

    def total(self):
        return float(self.masses.sum())


@dataclass(frozen=True, eq=False)
class DensityMeasure:
    grid: SphericalGrid
    density: ScalarField

    def __post_init__(self):
        if np.any(self.density.values < 0):
            raise ValueError("density must be non-negative")

    @property
    def values(self):
        return self.density.values

    def total(self):
        return float(integrate(self.grid, self.density))


def _geometry(grid, u):
    """(u, |grad u|^2, det(hess u + u I)) at the nodes, det unclamped."""
    d = coordinate_derivatives(grid, u)
    g = tangent_gradient(grid, d)
    A = frame_hessian(grid, d)
    det = np.linalg.det(A) if grid.n == 3 else A[..., 0, 0]
    return d["u"], np.sum(g * g, axis=-1), det


def _clamped(det):
    if det.min() < -CLAMP:
        node = int(det.argmin())
        raise NonConvexError(
            f"negative curvature density {det[node]:.3g} at node {node}", node=node
        )
    return np.where(det < 0, 0.0, det)


def _field_values(u):
    return u.u if isinstance(u, SupportBody) else u


def sk_density(grid, u):
    """Surface area measure density det(hess u + u I)."""
    _, _, det = _geometry(grid, _field_values(u))
    return DensityMeasure(grid, ScalarField(grid, _clamped(det)))


def cone_volume_density(grid, u):
    """Cone volume density (1/n) u det(hess u + u I)."""
    uu, _, det = _geometry(grid, _field_values(u))
    return DensityMeasure(grid, ScalarField(grid, uu * _clamped(det) / grid.n))


def lp_dual_raw(grid, u, p, q):
    """Unclamped left-hand side of the L_p dual Minkowski Monge-Ampere equation."""
    uu, g2, det = _geometry(grid, u)
    return (g2 + uu * uu) ** ((q - grid.n) / 2) * uu ** (1 - p) * det


def lp_dual_density(grid, u, p, q):
    """Density of the L_p q-th dual curvature measure of the body with support u.

    ``(|grad u|^2 + u^2)^{(q-n)/2} u^{1-p} det(hess u + u I)``.
    """
    u = _field_values(u)
    values = u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)
    if values.min() <= 0:
        raise ValueError("support function must be positive at every node")
    uu, g2, det = _geometry(grid, u)
    dens = (g2 + uu * uu) ** ((q - grid.n) / 2) * uu ** (1 - p) * _clamped(det)
    return DensityMeasure(grid, ScalarField(grid, dens))


def body_density(body, grid, p, q):
    """L_p q-th dual curvature density of a smooth body at the grid nodes.

    Ellipsoids use the closed-form Gauss map and curvature; support bodies go
    through the grid derivatives.
    """
    if isinstance(body, Ellipsoid):
        v = grid.nodes
        h = body.support(v)
        x = body.boundary_point(v)
        dens = np.linalg.norm(x, axis=1) ** (q - grid.n) * h ** (1 - p) * body.curvature_density(v)
        return DensityMeasure(grid, ScalarField(grid, dens))
    if isinstance(body, SupportBody):
        if body.grid is not grid:
            body = to_support_field(body, grid)
        return lp_dual_density(grid, body.u, p, q)
    raise TypeError("polytope measures are atomic; use polytope_cone_volume or radial_total_mc")


def polytope_cone_volume(P):
    """Cone volume atoms ``(w_i, h_i * area_i / n)``, one per facet."""
    if not isinstance(P, Polytope):
        raise TypeError("expected a Polytope")
    return AtomicMeasure(P.normals, P.offsets * P.areas / P.n)


def _radial_integrand(body, v, p, q):
    rho = body.radial(v)
    if p == 0:
        return rho**q
    if isinstance(body, Ellipsoid):
        nu = body.outer_normal(rho[:, None] * v)
        h = body.support(nu)
    elif isinstance(body, Polytope):
        h = body.offsets[body.hit_facet(v)]
    else:
        raise TypeError("radial Monte Carlo needs an Ellipsoid or Polytope")
    return h ** (-p) * rho**q


def radial_total_mc(body, p, q, N=1_000_000, seed=0, chunk=250_000):
    """Monte Carlo estimate of the total L_p q-th dual curvature measure.

    Directions are normalized Gaussian vectors from Philox streams spawned
    from ``seed``, one stream per chunk, so the estimate does not depend on
    how chunks are scheduled.

    Returns
    -------
    (estimate, std_error)
    """
    if isinstance(body, SupportBody):
        raise TypeError("support bodies have no exact Gauss map; use the density path")
    if not isinstance(body, (Ellipsoid, Polytope)):
        raise TypeError(f"unsupported body type {type(body).__name__}")
    n = body.n
    sizes = [min(chunk, N - i) for i in range(0, N, chunk)]
    gens = spawn_generators(seed, len(sizes))

    def run(args):
        size, rng = args
        v = rng.standard_normal((size, n))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        f = _radial_integrand(body, v, p, q)
        return f.sum(), (f * f).sum()

    workers = worker_count()
    if workers > 1 and len(sizes) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, zip(sizes, gens)))
    else:
        parts = [run(a) for a in zip(sizes, gens)]
    s1 = sum(a for a, _ in parts)
    s2 = sum(b for _, b in parts)
    mean = s1 / N
    var = max(s2 / N - mean * mean, 0.0) * N / (N - 1)
    area = 2 * np.pi if n == 2 else 4 * np.pi
    return area * mean, area * np.sqrt(var / N)


def radial_total_quadrature(body, grid, p, q):
    """Grid quadrature of the same radial integrand (smooth bodies only)."""
    return float(integrate(grid, _radial_integrand(body, grid.nodes, p, q)))


def total(measure):
    """Total mass of a density or atomic measure."""
    return measure.total()
