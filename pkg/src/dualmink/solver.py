"""Damped Newton solver for the L_p q-th dual Minkowski equation on S^{n-1}.

Solves

    (|grad u|^2 + u^2)^{(q-n)/2} u^{1-p} det(hess u + u I) = f

for a positive, convex ``u`` near the isotropic solution.  The linearization
at ``u = 1`` is ``Delta + (q - p)``; its spectral inverse serves as a fixed
approximate Jacobian.  When that step stalls, the exact Jacobian restricted
to harmonics of degree at most ``harmonic_degree`` is assembled and a Newton
step is taken instead.

:func:`solve_curve` is an independent n=2 implementation on a periodic
finite-difference grid with an exact sparse Jacobian.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._util import spawn_generators, worker_count
from .bodies import PSD_TOL, SupportBody
from .measures import lp_dual_raw
from .sphere import (
    ScalarField,
    build_grid,
    coordinate_derivatives,
    eigenvalue,
    frame_hessian,
    integrate,
    tangent_gradient,
)

__all__ = [
    "ProblemSpec",
    "SolverConfig",
    "Solution",
    "ResonanceError",
    "NonConvergenceError",
    "residual",
    "linearized_solve_at_one",
    "solve",
    "solve_curve",
    "uniqueness_probe",
]

log = logging.getLogger(__name__)


class ResonanceError(ValueError):
    def __init__(self, k, message):
        super().__init__(message)
        self.k = k


class NonConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    """One instance ``(n, p, q, f)``.

    ``f`` is a positive constant, a ``(constant, harmonics)`` pair where
    harmonics are ``(k, m, coef)`` triples, or a nodal array/ScalarField.
    """

    n: int
    p: float
    q: float
    f: object = 1.0

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"unsupported dimension n={self.n}")
        if not self.q > 0:
            raise ValueError("q must be positive")

    def f_values(self, grid):
        """Synthesize the data on ``grid``; raises if f is not positive."""
        f = self.f
        if isinstance(f, ScalarField):
            vals = f.values if f.grid is grid else f.grid.evaluate(f.values, grid.nodes)
        elif np.isscalar(f):
            vals = np.full(grid.size, float(f))
        elif isinstance(f, tuple) and len(f) == 2:
            const, harmonics = f
            vals = np.full(grid.size, float(const))
            for k, m, coef in harmonics:
                vals = vals + coef * grid.synthesize(grid.unit_coefficients(k, m))
        else:
            vals = np.asarray(f, dtype=float)
            if vals.shape != (grid.size,):
                raise ValueError("raw data must have one value per grid node")
        if not np.all(vals > 0):
            raise ValueError(f"data f must be positive (min {vals.min():.3g})")
        return vals


@dataclass(frozen=True)
class SolverConfig:
    tol_residual: float = 1e-10
    max_iter: int = 100
    min_step: float = 2.0**-20
    fd_step: float = 1e-4
    positivity_floor: float = 1e-8
    harmonic_degree: int = 16
    quasi_backtracks: int = 3
    even: bool = False

    def __post_init__(self):
        for name in ("tol_residual", "max_iter", "min_step", "fd_step", "positivity_floor", "harmonic_degree"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class Solution:
    u: ScalarField
    residual_sup: float
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)
    history: list = field(default_factory=list)

    def summary(self):
        return {
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "residual_sup": float(self.residual_sup),
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()},
        }


def _raw_values(u):
    return u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)


def residual(u, spec, grid=None, f=None):
    """Nodal residual ``lp_dual_density(u, p, q) - f``."""
    grid = u.grid if isinstance(u, ScalarField) else grid
    values = _raw_values(u)
    if values.min() <= 0:
        raise ValueError("u must be positive at every node")
    if f is None:
        f = spec.f_values(grid)
    return ScalarField(grid, lp_dual_raw(grid, values, spec.p, spec.q) - f)


def _multipliers(grid, spec, resonance_tol=1e-8):
    return spec.q - spec.p - eigenvalue(grid.n, grid.degrees)


def linearized_solve_at_one(g, spec, grid=None, even=False):
    """Solve ``Delta phi + (q - p) phi = g`` in the harmonic basis.

    At q = n this is the operator ``Delta + (n - p)``.  A degree whose
    multiplier vanishes (within 1e-8) raises :class:`ResonanceError` if ``g``
    has a non-negligible component there; otherwise that component is set
    to zero.
    """
    grid = g.grid if isinstance(g, ScalarField) else grid
    vals = _raw_values(g)
    Z = grid.analyze(vals)
    mult = _multipliers(grid, spec)
    if grid.n == 3:
        mult = np.broadcast_to(mult, Z.shape)
    resonant = np.abs(mult) < 1e-8
    if np.any(resonant):
        scale = max(1.0, float(np.abs(vals).max()))
        bad = resonant & (np.abs(Z) > 1e-10 * scale)
        if even:
            bad &= (grid.degrees % 2 == 0) if grid.n == 3 else (np.arange(Z.shape[-1]) % 2 == 0)
        if np.any(bad):
            k = int(np.atleast_1d(grid.degrees if grid.n == 2 else grid.degrees)[np.nonzero(bad)][0])
            raise ResonanceError(k, f"operator Delta + {spec.q - spec.p:g} is singular on degree {k}")
    with np.errstate(divide="ignore", invalid="ignore"):
        X = np.where(resonant, 0.0, Z / np.where(resonant, 1.0, mult))
    if even:
        X = X * _even_mask(grid)
    return ScalarField(grid, grid.synthesize(X))


def _even_mask(grid):
    deg = grid.degrees if grid.n == 3 else np.arange(grid.lmax + 1)
    return (deg % 2 == 0).astype(float)


def _geometry(grid, values):
    d = coordinate_derivatives(grid, values)
    A = frame_hessian(grid, d)
    return d, A


def _psd_margin(A):
    return float(np.linalg.eigvalsh(A)[:, 0].min())


def _admissible(grid, values, config):
    if values.min() <= config.positivity_floor:
        return False
    _, A = _geometry(grid, values)
    return _psd_margin(A) >= -PSD_TOL


class _Basis:
    """Harmonics of degree <= L_h with their coordinate derivatives at the nodes."""

    def __init__(self, grid, degree, even):
        degree = min(degree, grid.lmax)
        slots = []
        if grid.n == 2:
            for k in range(degree + 1):
                if even and k % 2:
                    continue
                slots += [(k, "cos")] + ([(k, "sin")] if k else [])
        else:
            for k in range(degree + 1):
                if even and k % 2:
                    continue
                slots += [(k, m) for m in range(-k, k + 1)]
        self.slots = slots
        Z = np.stack([grid.unit_coefficients(k, m) for k, m in slots])
        self.derivs = grid.synthesize(Z, derivatives=True)
        self.values = self.derivs["u"]


def _jacobian(grid, values, spec, basis):
    """Exact derivative of the residual applied to each basis harmonic, shape (N, nb)."""
    n, p, q = grid.n, spec.p, spec.q
    d, A = _geometry(grid, values)
    g = tangent_gradient(grid, d)
    u = values
    r2 = np.sum(g * g, axis=-1) + u * u
    det = np.linalg.det(A) if n == 3 else A[:, 0, 0]
    G = r2 ** ((q - n) / 2) * u ** (1 - p) * det
    bd = {k: v for k, v in basis.derivs.items()}
    bd["u"] = basis.values
    gb = tangent_gradient(grid, bd)  # (nb, N, n-1)
    Ab = frame_hessian(grid, bd)  # (nb, N, n-1, n-1)
    dot = np.einsum("na,bna->bn", g, gb) + u * basis.values
    if n == 3:
        cof = A[:, 1, 1] * Ab[..., 0, 0] + A[:, 0, 0] * Ab[..., 1, 1] - 2 * A[:, 0, 1] * Ab[..., 0, 1]
    else:
        cof = Ab[..., 0, 0]
    J = G * ((q - n) * dot / r2 + (1 - p) * basis.values / u) + r2 ** ((q - n) / 2) * u ** (1 - p) * cof
    return J.T


def _diagnostics(grid, values, spec):
    _, A = _geometry(grid, values)
    body_ok = True
    try:
        body = SupportBody(ScalarField(grid, values), smooth=False)
        vol, diam = body.volume(), body.diameter()
    except ValueError:
        body_ok, vol, diam = False, np.nan, np.nan
    tot = integrate(grid, lp_dual_raw(grid, values, spec.p, spec.q)) if body_ok else np.nan
    return {
        "min_u": float(values.min()),
        "convexity_margin": _psd_margin(A),
        "diameter_bound": float(diam),
        "volume": float(vol),
        "total_measure": float(tot),
    }


def _sup(r):
    return float(np.max(np.abs(r)))


def solve(spec, grid=None, config=None, u0=None):
    """Damped quasi-Newton solve of the equation defined by ``spec``.

    Starts from ``(mean f)^{1/(q-p)}`` unless ``u0`` is given.  Steps are
    halved until the residual sup-norm decreases and the iterate stays
    positive and convex; after ``quasi_backtracks`` failed halvings the
    exact Jacobian on the low harmonics is used for that iteration.
    """
    config = config or SolverConfig()
    grid = grid or build_grid(spec.n)
    if grid.n != spec.n:
        raise ValueError("grid dimension does not match the problem")
    f = spec.f_values(grid)
    if u0 is None:
        if spec.q == spec.p:
            if np.ptp(f) > 0:
                raise ValueError("q = p needs an explicit initial guess for non-constant f")
            raise ValueError("q = p: the equation is scale invariant; supply u0")
        mean_f = integrate(grid, f) / grid.area
        u = np.full(grid.size, mean_f ** (1.0 / (spec.q - spec.p)))
    else:
        u = grid.project(_raw_values(u0))
    if config.even:
        u = grid.synthesize(grid.analyze(u) * _even_mask(grid))
    if not _admissible(grid, u, config):
        raise ValueError("initial guess must be positive and convex")

    res = lp_dual_raw(grid, u, spec.p, spec.q) - f
    rsup = _sup(res)
    history = [rsup]
    basis = None
    it = 0
    while rsup > config.tol_residual and it < config.max_iter:
        it += 1
        accepted = False
        for mode in ("quasi", "newton"):
            if mode == "quasi":
                try:
                    step = -linearized_solve_at_one(ScalarField(grid, res), spec, even=config.even).values
                except ValueError:
                    continue
                max_halvings = config.quasi_backtracks
            else:
                if basis is None:
                    basis = _Basis(grid, config.harmonic_degree, config.even)
                J = _jacobian(grid, u, spec, basis)
                W = basis.values * grid.weights  # Galerkin projection onto the basis
                c = np.linalg.lstsq(W @ J, -(W @ res), rcond=None)[0]
                step = c @ basis.values
                max_halvings = int(round(-np.log2(config.min_step)))
            t = 1.0
            for _ in range(max_halvings + 1):
                trial = u + t * step
                if _admissible(grid, trial, config):
                    tres = lp_dual_raw(grid, trial, spec.p, spec.q) - f
                    tsup = _sup(tres)
                    if tsup < (1 - 1e-4 * t) * rsup:
                        u, res, rsup = trial, tres, tsup
                        accepted = True
                        break
                t *= 0.5
            log.debug("iter %d mode %s step %g residual %.3e accepted %s", it, mode, t, rsup, accepted)
            if accepted:
                break
        history.append(rsup)
        if not accepted:
            break

    return Solution(
        u=ScalarField(grid, u),
        residual_sup=rsup,
        iterations=it,
        converged=rsup <= config.tol_residual,
        diagnostics=_diagnostics(grid, u, spec),
        history=history,
    )


# -- independent n = 2 path -------------------------------------------------

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _periodic_stencil(M, coeffs, h):
    offsets = np.arange(-2, 3)
    rows = np.repeat(np.arange(M), 5)
    cols = (rows + np.tile(offsets, M)) % M
    vals = np.tile(coeffs, M) / h
    return sp.csr_matrix((vals, (rows, cols)), shape=(M, M))


def solve_curve(spec, config=None, M=512, u0=None):
    """Solve ``(u'^2 + u^2)^{(q-2)/2} u^{1-p} (u'' + u) = f`` on M uniform angles.

    Derivatives use fourth-order periodic central differences and Newton
    steps use the exact sparse Jacobian of that discretization.  Returns a
    :class:`Solution` on ``build_grid(2, M)`` so results are directly
    comparable with :func:`solve`.
    """
    if spec.n != 2:
        raise ValueError("solve_curve handles n = 2 only")
    config = config or SolverConfig()
    grid = build_grid(2, M)
    f = spec.f_values(grid)
    h = 2 * np.pi / M
    D1 = _periodic_stencil(M, _D1, h)
    D2 = _periodic_stencil(M, _D2, h * h)
    p, q = spec.p, spec.q
    if u0 is None:
        if q == p:
            raise ValueError("q = p needs an explicit initial guess")
        u = np.full(M, (f.mean()) ** (1.0 / (q - p)))
    else:
        u = np.array(_raw_values(u0), dtype=float)

    def F(u):
        up, upp = D1 @ u, D2 @ u
        r2 = up * up + u * u
        return r2 ** ((q - 2) / 2) * u ** (1 - p) * (upp + u) - f, (up, upp, r2)

    def ok(u):
        return u.min() > config.positivity_floor and (D2 @ u + u).min() >= -PSD_TOL

    res, aux = F(u)
    rsup = _sup(res)
    history = [rsup]
    it = 0
    while rsup > config.tol_residual and it < config.max_iter:
        it += 1
        up, upp, r2 = aux
        a = r2 ** ((q - 2) / 2)
        b = u ** (1 - p)
        c = upp + u
        # d/du of a*b*c, with r2 = up^2 + u^2
        da_du = (q - 2) * r2 ** ((q - 4) / 2) * u
        da_dup = (q - 2) * r2 ** ((q - 4) / 2) * up
        db_du = (1 - p) * u ** (-p)
        J = (
            sp.diags(da_du * b * c + a * db_du * c + a * b)
            + sp.diags(da_dup * b * c) @ D1
            + sp.diags(a * b) @ D2
        )
        step = spla.spsolve(J.tocsc(), -res)
        t = 1.0
        accepted = False
        while t >= config.min_step:
            trial = u + t * step
            if ok(trial):
                tres, taux = F(trial)
                tsup = _sup(tres)
                if tsup < (1 - 1e-4 * t) * rsup:
                    u, res, aux, rsup = trial, tres, taux, tsup
                    accepted = True
                    break
            t *= 0.5
        history.append(rsup)
        if not accepted:
            break
    return Solution(
        u=ScalarField(grid, u),
        residual_sup=rsup,
        iterations=it,
        converged=rsup <= config.tol_residual,
        diagnostics={"min_u": float(u.min()), "convexity_margin": float((D2 @ u + u).min())},
        history=history,
    )


# -- uniqueness probe ---------------------------------------------------------


def _random_perturbation(grid, rng, scale, even, max_degree=2):
    """Band-limited field with sup-norm ``scale`` (degrees 1..max_degree)."""
    slots = []
    for k in range(1, max_degree + 1):
        if even and k % 2:
            continue
        if grid.n == 2:
            slots += [(k, "cos"), (k, "sin")]
        else:
            slots += [(k, m) for m in range(-k, k + 1)]
    field_ = np.zeros(grid.size)
    for k, m in slots:
        field_ += rng.standard_normal() * grid.synthesize(grid.unit_coefficients(k, m))
    return field_ * (scale / np.abs(field_).max())


def uniqueness_probe(spec, grid=None, config=None, num_starts=10, seed=0, perturb_scale=0.2, even=False):
    """Solve from several random starts and measure the spread of the results.

    Each start is ``base * (1 + w)`` with ``w`` a random degree-<=2 field of
    sup-norm ``perturb_scale``, halved until the start is convex.  With
    ``even=True`` both the data and all iterates are restricted to even
    harmonics.

    Returns a dict with the per-start outcomes, the number of converged
    starts and the largest pairwise sup-distance between converged solutions.
    """
    config = config or SolverConfig()
    grid = grid or build_grid(spec.n)
    if even:
        config = replace(config, even=True)
        f = spec.f_values(grid)
        spec = replace(spec, f=grid.synthesize(grid.analyze(f) * _even_mask(grid)))
    f = spec.f_values(grid)
    base = (integrate(grid, f) / grid.area) ** (1.0 / (spec.q - spec.p))
    gens = spawn_generators(seed, num_starts)

    def run(i):
        rng = gens[i]
        scale = perturb_scale
        w = _random_perturbation(grid, rng, 1.0, even)
        while True:
            u0 = base * (1 + scale * w)
            if _admissible(grid, u0, config) or scale < 1e-3:
                break
            scale *= 0.5
        try:
            sol = solve(spec, grid, config, u0=u0)
        except (ValueError, FloatingPointError) as exc:
            return {"start": i, "scale": scale, "converged": False, "error": str(exc)}, None
        rec = {
            "start": i,
            "scale": scale,
            "converged": bool(sol.converged),
            "iterations": sol.iterations,
            "residual_sup": sol.residual_sup,
        }
        return rec, (sol.u.values if sol.converged else None)

    workers = worker_count()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, range(num_starts)))
    else:
        results = [run(i) for i in range(num_starts)]
    sols = [u for _, u in results if u is not None]
    spread = max((_sup(a - b) for a, b in itertools.combinations(sols, 2)), default=0.0)
    return {
        "n": spec.n,
        "p": spec.p,
        "q": spec.q,
        "even": even,
        "num_starts": num_starts,
        "converged": len(sols),
        "spread": spread,
        "starts": [r for r, _ in results],
    }
