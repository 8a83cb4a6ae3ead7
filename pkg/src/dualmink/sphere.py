"""Quadrature grids on S^1 and S^2 with spectral differentiation.

For n=3 the grid is Gauss-Legendre in cos(theta) times a uniform longitude
rule; fields are expanded in real orthonormal spherical harmonics up to
degree ``L - 2``.  For n=2 the grid is ``L`` uniform angles and fields are
trigonometric polynomials.  Derivatives at the nodes are computed from the
expansion, which keeps the discrete operators exactly linear and smooth in
the nodal values.

Off-grid quantities (values, gradients and Hessians at arbitrary unit
vectors) are obtained by harmonic synthesis; Hessians there use central
differences of the 1-homogeneous extension ``H(x) = |x| u(x/|x|)``, whose
Euclidean Hessian restricted to the tangent space is ``hess u + u I``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "SphericalGrid",
    "ScalarField",
    "TangentField",
    "FrameHessianField",
    "GridMismatchError",
    "build_grid",
    "integrate",
    "gradient",
    "sphere_hessian",
    "laplacian",
    "spherical_harmonic_field",
    "sphere_area",
    "eigenvalue",
]

FD_STEP = 1e-4


class GridMismatchError(ValueError):
    """Field sampled on a different grid than the one supplied."""


def sphere_area(n):
    """Surface area of S^{n-1}."""
    return {2: 2 * np.pi, 3: 4 * np.pi}[n]


def eigenvalue(n, k):
    """Eigenvalue of -Laplace-Beltrami on S^{n-1} for degree k."""
    return k * k + (n - 2) * k


def _legendre(t, lmax, derivative=False):
    """Associated Legendre functions orthonormal on [-1, 1].

    Returns ``P[..., l, m]`` (zero for m > l) and, if requested, the
    derivative with respect to the colatitude ``theta = arccos(t)``.
    The derivative is singular at the poles and must not be requested there.
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    P = np.zeros(t.shape + (lmax + 1, lmax + 1))
    P[..., 0, 0] = 1.0 / np.sqrt(2.0)
    for m in range(1, lmax + 1):
        P[..., m, m] = -np.sqrt((2 * m + 1) / (2 * m)) * s * P[..., m - 1, m - 1]
    for m in range(lmax):
        P[..., m + 1, m] = np.sqrt(2 * m + 3) * t * P[..., m, m]
    for m in range(lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            P[..., l, m] = a * (t * P[..., l - 1, m] - b * P[..., l - 2, m])
    if not derivative:
        return P
    l = np.arange(lmax + 1)[:, None]
    m = np.arange(lmax + 1)[None, :]
    with np.errstate(invalid="ignore"):
        c = np.sqrt((2 * l + 1) / np.maximum(2 * l - 1, 1) * np.clip(l * l - m * m, 0, None))
    Pprev = np.zeros_like(P)
    Pprev[..., 1:, :] = P[..., :-1, :]
    dP = (l * t[..., None, None] * P - c * Pprev) / s[..., None, None]
    return P, dP


class SphericalGrid:
    """Quadrature nodes and weights on S^{n-1} for n in {2, 3}.

    Use :func:`build_grid` to construct one.  Instances are immutable; the
    arrays they expose are read-only.
    """

    def __init__(self, n, L):
        if n not in (2, 3):
            raise ValueError(f"unsupported dimension n={n}; expected 2 or 3")
        if int(L) != L or L < 4:
            raise ValueError(f"resolution L={L} too small; need L >= 4")
        self.n = int(n)
        self.L = int(L)
        if self.n == 3:
            t, w = np.polynomial.legendre.leggauss(self.L)
            self._t = t
            self._w = w
            self._theta = np.arccos(t)
            self._phi = np.pi * np.arange(2 * self.L) / self.L
            self.lmax = self.L - 2
            th, ph = np.meshgrid(self._theta, self._phi, indexing="ij")
            st = np.sin(th)
            nodes = np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=-1)
            nodes = nodes.reshape(-1, 3)
            weights = np.repeat(w, 2 * self.L) * (np.pi / self.L)
        else:
            self._phi = 2 * np.pi * np.arange(self.L) / self.L
            self.lmax = (self.L - 1) // 2
            nodes = np.stack([np.cos(self._phi), np.sin(self._phi)], axis=-1)
            weights = np.full(self.L, 2 * np.pi / self.L)
        nodes.flags.writeable = False
        weights.flags.writeable = False
        self.nodes = nodes
        self.weights = weights

    def __repr__(self):
        return f"SphericalGrid(n={self.n}, L={self.L}, size={self.size})"

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def area(self):
        return sphere_area(self.n)

    @property
    def shape(self):
        return (self.L, 2 * self.L) if self.n == 3 else (self.L,)

    # -- tabulated quantities -------------------------------------------------

    @cached_property
    def _tables(self):
        P, dP = _legendre(self._t, self.lmax, derivative=True)
        return P, dP

    @cached_property
    def _norm(self):
        c = np.full(self.lmax + 1, 1.0 / np.sqrt(np.pi))
        c[0] = 1.0 / np.sqrt(2 * np.pi)
        return c

    @cached_property
    def frames(self):
        """Per-node orthonormal tangent frame, shape (N, n-1, n).

        n=3: rows are (e_theta, e_phi); n=2: the single row is d/dphi.
        """
        if self.n == 2:
            f = np.stack([-np.sin(self._phi), np.cos(self._phi)], axis=-1)[:, None, :]
        else:
            th, ph = np.meshgrid(self._theta, self._phi, indexing="ij")
            e_th = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], -1)
            e_ph = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], -1)
            f = np.stack([e_th.reshape(-1, 3), e_ph.reshape(-1, 3)], axis=1)
        f.flags.writeable = False
        return f

    @cached_property
    def antipode(self):
        """Index of -v for every node v (both grid families are symmetric)."""
        if self.n == 2:
            if self.L % 2:
                raise ValueError("odd L on S^1 has no antipodal node pairs")
            return (np.arange(self.L) + self.L // 2) % self.L
        j = np.arange(self.L)[:, None]
        k = np.arange(2 * self.L)[None, :]
        return ((self.L - 1 - j) * 2 * self.L + (k + self.L) % (2 * self.L)).ravel()

    @cached_property
    def degrees(self):
        """Degree of each harmonic coefficient slot, shape (lmax+1, lmax+1)."""
        if self.n == 2:
            return np.arange(self.lmax + 1)
        l = np.arange(self.lmax + 1)
        return np.broadcast_to(l[:, None], (self.lmax + 1, self.lmax + 1))

    # -- transforms -----------------------------------------------------------

    def analyze(self, values):
        """Complex harmonic coefficients ``Z`` of nodal values.

        n=3: ``Z[..., l, m]`` with m >= 0, where the real field is
        ``sum Re(Z_lm e^{i m phi}) c_m Pbar_lm(cos theta)``.
        n=2: ``Z[..., k]`` with the field ``sum Re(Z_k e^{i k phi}) c_k``.
        Leading batch dimensions are allowed.
        """
        values = np.asarray(values, dtype=float)
        batch = values.shape[:-1]
        if self.n == 2:
            U = np.fft.rfft(values, axis=-1)[..., : self.lmax + 1]
            return U * (2 * np.pi / self.L) * self._norm
        U = np.fft.rfft(values.reshape(batch + self.shape), axis=-1)[..., : self.lmax + 1]
        P, _ = self._tables
        Z = np.einsum("...jm,j,jlm->...lm", U, self._w, P)
        Z *= (np.pi / self.L) * self._norm
        return Z * (np.arange(self.lmax + 1)[:, None] <= np.arange(self.lmax + 1)[None, :]).T

    def _irfft(self, B):
        # B[..., m] fourier amplitudes with field = sum_m Re(B_m e^{i m phi})
        nphi = 2 * self.L if self.n == 3 else self.L
        F = np.zeros(B.shape[:-1] + (nphi // 2 + 1,), dtype=complex)
        F[..., : B.shape[-1]] = B * (nphi / 2.0)
        F[..., 0] *= 2.0
        return np.fft.irfft(F, n=nphi, axis=-1)

    def synthesize(self, Z, derivatives=False):
        """Nodal values (and optionally coordinate derivatives) from ``Z``.

        With ``derivatives=True`` returns a dict with keys ``u``, ``t``
        (d/dtheta), ``p`` (d/dphi), ``tt``, ``tp``, ``pp`` for n=3 and
        ``u``, ``p``, ``pp`` for n=2.  Arrays have shape ``batch + (N,)``.
        """
        Z = np.asarray(Z)
        m = np.arange(self.lmax + 1)
        if self.n == 2:
            B = Z * self._norm
            out = {"u": self._irfft(B)}
            if derivatives:
                out["p"] = self._irfft(B * (1j * m))
                out["pp"] = self._irfft(B * (-(m**2)))
            return out if derivatives else out["u"]
        batch = Z.shape[:-2]
        P, dP = self._tables
        B = np.einsum("...lm,jlm->...jm", Z, P) * self._norm
        flat = lambda a: a.reshape(batch + (-1,))
        u = flat(self._irfft(B))
        if not derivatives:
            return u
        Bt = np.einsum("...lm,jlm->...jm", Z, dP) * self._norm
        t = self._t[:, None]
        s = np.sqrt(1 - t * t)
        l = np.arange(self.lmax + 1)
        lam = (l * (l + 1))[:, None] - (m**2)[None, :] / (s * s)[..., None]
        # Legendre ODE gives d2P/dtheta2 = -cot(theta) dP - (l(l+1) - m^2/sin^2) P
        d2P = -(t / s)[..., None] * dP - lam * P
        Btt = np.einsum("...lm,jlm->...jm", Z, d2P) * self._norm
        im = 1j * m
        return {
            "u": u,
            "t": flat(self._irfft(Bt)),
            "p": flat(self._irfft(B * im)),
            "tt": flat(self._irfft(Btt)),
            "tp": flat(self._irfft(Bt * im)),
            "pp": flat(self._irfft(B * (-(m**2)))),
        }

    def project(self, values):
        """Band-limit nodal values to the grid's harmonic space."""
        return self.synthesize(self.analyze(values))

    def coefficient(self, Z, k, m):
        """Real coefficient of ``Y_k^m`` (see :func:`spherical_harmonic_field`)."""
        if self.n == 2:
            return Z[..., k].real if m in ("cos", 0) else -Z[..., k].imag
        return Z[..., k, abs(m)].real if m >= 0 else -Z[..., k, abs(m)].imag

    def unit_coefficients(self, k, m):
        """Coefficient array of the normalized real harmonic ``Y_k^m``."""
        _check_harmonic(self, k, m)
        if self.n == 2:
            Z = np.zeros(self.lmax + 1, dtype=complex)
            Z[k] = 1.0 if (m in ("cos", 0) or k == 0) else -1j
            return Z
        Z = np.zeros((self.lmax + 1, self.lmax + 1), dtype=complex)
        Z[k, abs(m)] = 1.0 if m >= 0 else -1j
        return Z

    def evaluate(self, values, points, Z=None):
        """Evaluate the band-limited interpolant of nodal values at unit vectors."""
        if Z is None:
            Z = self.analyze(values)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        pts = pts / np.linalg.norm(pts, axis=-1, keepdims=True)
        if self.n == 2:
            phi = np.arctan2(pts[:, 1], pts[:, 0])
            m = np.arange(self.lmax + 1)
            out = (np.exp(1j * np.outer(phi, m)) * (Z * self._norm)).real.sum(-1)
        else:
            phi = np.arctan2(pts[:, 1], pts[:, 0])
            P = _legendre(np.clip(pts[:, 2], -1.0, 1.0), self.lmax)
            B = np.einsum("lm,plm->pm", Z, P) * self._norm
            m = np.arange(self.lmax + 1)
            out = (B * np.exp(1j * np.outer(phi, m))).real.sum(-1)
        return out if np.ndim(points) > 1 else out[0]

    def homogeneous_derivatives(self, values, points, step=FD_STEP):
        """Central-difference gradient and Hessian of ``|x| u(x/|x|)``.

        Returns ``(grad, hess)`` with shapes (P, n) and (P, n, n).  The
        Euclidean gradient at a unit vector v is ``Dh(v) = grad u + u v``;
        the Hessian restricted to v-perp is ``hess u + u I``.
        """
        Z = self.analyze(values)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = self.n
        H = lambda x: np.linalg.norm(x, axis=-1) * self.evaluate(None, x, Z=Z)
        E = np.eye(n) * step
        h0 = H(pts)
        grad = np.empty((len(pts), n))
        hess = np.empty((len(pts), n, n))
        for a in range(n):
            hp, hm = H(pts + E[a]), H(pts - E[a])
            grad[:, a] = (hp - hm) / (2 * step)
            hess[:, a, a] = (hp - 2 * h0 + hm) / step**2
            for b in range(a):
                hpp = H(pts + E[a] + E[b])
                hpm = H(pts + E[a] - E[b])
                hmp = H(pts - E[a] + E[b])
                hmm = H(pts - E[a] - E[b])
                hess[:, a, b] = hess[:, b, a] = (hpp - hpm - hmp + hmm) / (4 * step**2)
        return grad, hess


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real values sampled at the nodes of ``grid``."""

    grid: SphericalGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise GridMismatchError(
                f"field has shape {v.shape}, grid has {self.grid.size} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class TangentField:
    grid: SphericalGrid
    vectors: np.ndarray


@dataclass(frozen=True, eq=False)
class FrameHessianField:
    """Per-node symmetric matrices in the grid's tangent frames."""

    grid: SphericalGrid
    matrices: np.ndarray

    def det(self):
        return np.linalg.det(self.matrices) if self.grid.n == 3 else self.matrices[:, 0, 0]

    def min_eigenvalue(self):
        return np.linalg.eigvalsh(self.matrices)[:, 0]

    def trace(self):
        return np.trace(self.matrices, axis1=1, axis2=2)


def build_grid(n, L=None):
    """Build the quadrature grid on S^{n-1}.

    Parameters
    ----------
    n : int
        Ambient dimension, 2 or 3.
    L : int, optional
        Resolution.  n=3: L Gauss-Legendre latitudes times 2L longitudes;
        n=2: L uniform angles.  Defaults to 32 (n=3) and 512 (n=2).
    """
    if L is None:
        L = 32 if n == 3 else 512
    return SphericalGrid(n, L)


def _values(grid, field):
    if isinstance(field, ScalarField):
        if field.grid is not grid:
            raise GridMismatchError("field belongs to a different grid")
        return field.values
    v = np.asarray(field, dtype=float)
    if v.shape[-1:] != (grid.size,):
        raise GridMismatchError(f"field has shape {v.shape}, grid has {grid.size} nodes")
    return v


def integrate(grid, field):
    """Quadrature of a field over S^{n-1}."""
    return _values(grid, field) @ grid.weights


def coordinate_derivatives(grid, u):
    """Spectral coordinate derivatives of a nodal field (see ``synthesize``)."""
    values = _values(grid, u)
    d = grid.synthesize(grid.analyze(values), derivatives=True)
    d["u"] = values
    return d


def tangent_gradient(grid, d):
    """Gradient components in the node frames from coordinate derivatives."""
    if grid.n == 2:
        return d["p"][..., None]
    s = np.sqrt(1 - grid._t**2).repeat(2 * grid.L)
    return np.stack([d["t"], d["p"] / s], axis=-1)


def frame_hessian(grid, d):
    """Frame components of ``hess u + u I`` from coordinate derivatives."""
    u = d["u"]
    if grid.n == 2:
        return (d["pp"] + u)[..., None, None]
    t = grid._t.repeat(2 * grid.L)
    s = np.sqrt(1 - t * t)
    h11 = d["tt"] + u
    h12 = (d["tp"] - (t / s) * d["p"]) / s
    h22 = d["pp"] / (s * s) + (t / s) * d["t"] + u
    return np.stack([np.stack([h11, h12], -1), np.stack([h12, h22], -1)], -2)


def gradient(grid, u):
    """Spherical gradient of ``u`` as ambient tangent vectors."""
    g = tangent_gradient(grid, coordinate_derivatives(grid, u))
    return TangentField(grid, np.einsum("...a,...ai->...i", g, grid.frames))


def sphere_hessian(grid, u):
    """``hess u + u I`` in the per-node frames; its det is the S_K density."""
    return FrameHessianField(grid, frame_hessian(grid, coordinate_derivatives(grid, u)))


def laplacian(grid, u):
    """Laplace-Beltrami operator applied through the harmonic multipliers."""
    values = _values(grid, u)
    Z = grid.analyze(values)
    lam = eigenvalue(grid.n, grid.degrees)
    return ScalarField(grid, grid.synthesize(-lam * Z))


def _check_harmonic(grid, k, m):
    if int(k) != k or k < 0 or k > grid.lmax:
        raise ValueError(f"degree k={k} outside 0..{grid.lmax}")
    if grid.n == 2:
        if m not in ("cos", "sin", 0):
            raise ValueError(f"order label {m!r} invalid on S^1; use 'cos' or 'sin'")
        if k == 0 and m == "sin":
            raise ValueError("sin(0*theta) vanishes")
    elif int(m) != m or abs(m) > k:
        raise ValueError(f"order m={m} invalid for degree k={k}")


def spherical_harmonic_field(grid, k, m=0):
    """Real orthonormal harmonic of degree k sampled on the grid.

    n=3: m in -k..k (m > 0 cosine, m < 0 sine type).
    n=2: m is ``'cos'`` or ``'sin'``; the field is cos(k phi)/sqrt(pi)
    (or 1/sqrt(2 pi) for k = 0).
    """
    if grid.n == 2 and m == 0:
        m = "cos"
    return ScalarField(grid, grid.synthesize(grid.unit_coefficients(k, m)))
