"""Exterior conformal maps onto the unit disc and Green functions with pole at infinity.

Every map sends the complement of the closed domain G onto the closed unit
disc with infinity going to 0.  Infinity itself is represented by ``INFINITY``.
"""
import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .errors import ConfigurationError, DegeneracyError, DomainError
from .geometry import Arc, DomainSpec, SampledJordan, Segment, TangentDisc

INFINITY = complex(math.inf, 0.0)
OUTSIDE_TOL = 1e-9
DERIV_FLOOR = 1e-12


def is_infinity(z) -> bool:
    return cmath.isinf(complex(z))


class ExteriorMap:
    """Base class; subclasses fill in the vectorised ``_forward`` / ``_inverse``."""

    kind = "abstract"
    phi_infinity = 0j

    def _forward(self, z):
        raise NotImplementedError

    def _inverse(self, w):
        raise NotImplementedError

    def _deriv_abs(self, zeta):
        return _fd_boundary_derivative(self, zeta)

    def forward(self, z):
        """Vectorised forward map; no domain check."""
        z = np.asarray(z, dtype=complex)
        inf = np.isinf(z)
        out = np.empty(z.shape, dtype=complex)
        out[inf] = self.phi_infinity
        if np.any(~inf):
            with np.errstate(divide="ignore", invalid="ignore"):
                out[~inf] = self._forward(z[~inf])
        return out

    def inverse(self, w):
        """Vectorised inverse map; w = 0 goes to ``INFINITY``."""
        w = np.asarray(w, dtype=complex)
        zero = w == self.phi_infinity
        out = np.empty(w.shape, dtype=complex)
        out[zero] = INFINITY
        if np.any(~zero):
            out[~zero] = self._inverse(w[~zero])
        return out

    @property
    def phi_zero(self) -> complex:
        return complex(self.forward(np.array([0j]))[0])


@dataclass(frozen=True)
class DiscMoebius(ExteriorMap):
    """phi(z) = rho / (z - x0)."""

    x0: float
    rho: float
    kind = "disc"

    def _forward(self, z):
        return self.rho / (z - self.x0)

    def _inverse(self, w):
        return self.x0 + self.rho / w

    def _deriv_abs(self, zeta):
        return self.rho / np.abs(zeta - self.x0) ** 2


@dataclass(frozen=True)
class SegmentJoukowski(ExteriorMap):
    """phi(z) = J^{-1}(z) / (1 - eps), J(w) = a (w + 1/w) + b sending [-1, 1]-slit disc onto C minus [1, x0]."""

    x0: float
    eps: float
    kind = "segment"

    @property
    def a(self):
        return (self.x0 - 1) / 4.0

    @property
    def b(self):
        return (self.x0 + 1) / 2.0

    def joukowski(self, w):
        """The affine Joukowski map J."""
        w = np.asarray(w, dtype=complex)
        return self.a * (w + 1 / w) + self.b

    def joukowski_inverse(self, z):
        """Root of J(w) = z inside the closed unit disc."""
        u = (np.asarray(z, dtype=complex) - self.b) / (2 * self.a)
        return kern.joukowski_inverse(np.atleast_1d(u)).reshape(np.shape(u))

    def _forward(self, z):
        return self.joukowski_inverse(z) / (1 - self.eps)

    def _inverse(self, w):
        return self.joukowski(w * (1 - self.eps))

    def _deriv_abs(self, zeta):
        w = self.joukowski_inverse(zeta)
        dz = self.a * np.abs(1 - 1 / w ** 2)
        with np.errstate(divide="ignore"):
            return 1.0 / ((1 - self.eps) * dz)


@dataclass(frozen=True)
class ArcRadial(ExteriorMap):
    """phi(z) = (s + eps) / psi(z), psi the exterior-branch root of psi^2 - (z-1) psi - s^2 z = 0."""

    theta0: float
    eps: float
    kind = "arc"

    @property
    def s(self):
        return math.sin(self.theta0 / 4)

    def psi(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return kern.arc_psi(z, math.cos(self.theta0 / 2), self.s)

    def psi_inverse(self, p):
        p = np.asarray(p, dtype=complex)
        return p * (p + 1) / (p + self.s ** 2)

    def _forward(self, z):
        return (self.s + self.eps) / self.psi(z).reshape(np.shape(z))

    def _inverse(self, w):
        return self.psi_inverse((self.s + self.eps) / w)

    def _deriv_abs(self, zeta):
        p = self.psi(zeta).reshape(np.shape(zeta))
        s2 = self.s ** 2
        dz_dpsi = (p * p + 2 * s2 * p + s2) / (p + s2) ** 2
        with np.errstate(divide="ignore"):
            return (self.s + self.eps) / (np.abs(p) ** 2 * np.abs(dz_dpsi))


@dataclass(frozen=True)
class UserSupplied(ExteriorMap):
    """Map given by a tabulated boundary correspondence phi(zeta_k) = exp(i t_k).

    The forward map is the exterior Cauchy integral of the piecewise-linear
    boundary data, the inverse the trapezoid rule for w z(w).  Both are only
    as accurate as the table (about 1e-3 for a few hundred nodes).
    """

    boundary: tuple
    angles: tuple
    nodes: int = 1024
    kind = "user"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        zeta = np.asarray(self.boundary, dtype=complex)
        t = np.asarray(self.angles, dtype=float)
        if zeta.shape != t.shape or zeta.size < 8:
            raise ConfigurationError("need matching boundary/angle tables with at least 8 entries")
        t_unw = np.unwrap(t)
        steps = np.diff(t_unw)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ConfigurationError("boundary angles must be monotone")
        area = 0.5 * np.sum(zeta.real * np.roll(zeta.imag, -1) - np.roll(zeta.real, -1) * zeta.imag)
        if area == 0:
            raise ConfigurationError("degenerate boundary polygon")
        # exterior maps reverse orientation: ccw boundary must give decreasing angle
        if (area > 0) == (steps[0] > 0):
            raise ConfigurationError("boundary orientation and angle direction are inconsistent")
        self._cache["zeta"] = zeta
        self._cache["f"] = np.exp(1j * t)
        self._cache["orient"] = 1.0 if area > 0 else -1.0
        # resample z(e^{iu}) on an equispaced grid for the inverse
        order = np.argsort(np.mod(t, 2 * np.pi))
        tt = np.mod(t, 2 * np.pi)[order]
        zz = zeta[order]
        tt = np.concatenate([tt - 2 * np.pi, tt, tt + 2 * np.pi])
        zz = np.concatenate([zz, zz, zz])
        u = 2 * np.pi * np.arange(self.nodes) / self.nodes
        zu = np.interp(u, tt, zz.real) + 1j * np.interp(u, tt, zz.imag)
        self._cache["u"] = np.exp(1j * u)
        self._cache["zu"] = zu

    @classmethod
    def from_builtin(cls, emap: ExteriorMap, m: int = 512):
        """Tabulate a built-in map (used to test the tabulated machinery)."""
        t = -2 * np.pi * np.arange(m) / m
        zeta = emap.inverse(np.exp(1j * t))
        return cls(tuple(zeta), tuple(t))

    @property
    def points(self):
        return tuple(self._cache["zeta"])

    def _forward(self, z):
        c = self._cache
        integral = kern.cauchy_polyline(np.atleast_1d(z), c["zeta"], c["f"])
        # exterior Cauchy formula: phi(z) = -(1/2 pi i) * ccw integral
        return (-c["orient"] * integral / (2j * np.pi)).reshape(np.shape(z))

    def _inverse(self, w):
        c = self._cache
        u, zu = c["u"], c["zu"]
        w = np.atleast_1d(w)
        out = np.empty(w.shape, dtype=complex)
        on = np.abs(w) >= 1 - 1e-12
        if np.any(on):
            ang = np.mod(np.angle(w[on]), 2 * np.pi)
            uu = np.mod(np.angle(u), 2 * np.pi)
            order = np.argsort(uu)
            uu, z_s = uu[order], zu[order]
            uu = np.concatenate([uu - 2 * np.pi, uu, uu + 2 * np.pi])
            z_s = np.concatenate([z_s, z_s, z_s])
            out[on] = np.interp(ang, uu, z_s.real) + 1j * np.interp(ang, uu, z_s.imag)
        if np.any(~on):
            ww = w[~on][:, None]
            # w z(w) holomorphic in the disc: trapezoid Cauchy integral on |u| = 1
            out[~on] = np.mean(u * zu * u / (u - ww), axis=1) / w[~on]
        return out


def exterior_map(domain: DomainSpec) -> ExteriorMap:
    fam = domain.family
    if isinstance(fam, TangentDisc):
        return DiscMoebius(fam.x0, domain.rho)
    if isinstance(fam, Segment):
        return SegmentJoukowski(fam.x0, domain.inflation)
    if isinstance(fam, Arc):
        return ArcRadial(fam.theta0, domain.inflation)
    if isinstance(fam, SampledJordan):
        return domain.exterior
    raise ConfigurationError(f"no exterior map for {fam!r}")


def _as_map(m):
    return exterior_map(m) if isinstance(m, DomainSpec) else m


def map_forward(emap, z) -> complex:
    """phi(z) for z outside G; raises DomainError inside."""
    emap = _as_map(emap)
    if is_infinity(z):
        return emap.phi_infinity
    w = complex(emap.forward(np.array([complex(z)]))[0])
    if not abs(w) <= 1 + OUTSIDE_TOL:
        raise DomainError(f"{z} lies inside G")
    return w


def map_inverse(emap, w) -> complex:
    emap = _as_map(emap)
    w = complex(w)
    if abs(w) > 1 + OUTSIDE_TOL:
        raise DomainError("|w| > 1")
    return complex(emap.inverse(np.array([w]))[0])


def _fd_boundary_derivative(emap, zeta, h=1e-6):
    """|phi'| from a central difference along the boundary tangent."""
    zeta = np.asarray(zeta, dtype=complex)
    w = emap.forward(zeta)
    # tangent direction of the boundary at zeta from nearby preimages
    t = np.angle(w)
    dt = 1e-4
    tangent = emap.inverse(np.exp(1j * (t + dt))) - emap.inverse(np.exp(1j * (t - dt)))
    tangent = tangent / np.abs(tangent)
    diff = emap.forward(zeta + h * tangent) - emap.forward(zeta - h * tangent)
    return np.abs(diff) / (2 * h)


def boundary_derivative_abs(emap, zeta, finite_difference=False) -> float:
    """|phi'(zeta)| on the boundary of G."""
    emap = _as_map(emap)
    zeta = complex(zeta)
    w = complex(emap.forward(np.array([zeta]))[0])
    if abs(abs(w) - 1) > 1e-8:
        raise DomainError(f"{zeta} is not on the boundary of G")
    arr = np.array([zeta])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        val = float((_fd_boundary_derivative(emap, arr) if finite_difference else emap._deriv_abs(arr))[0])
    if not np.isfinite(val) or val < DERIV_FLOOR:
        raise DegeneracyError(f"boundary derivative is {val} at {zeta}")
    return val


def green_infinity(emap, z) -> float:
    """Green function of the exterior of G with pole at infinity: -log|phi(z)|."""
    emap = _as_map(emap)
    if is_infinity(z):
        return math.inf
    w = map_forward(emap, z)
    return max(-math.log(abs(w)), 0.0)


def green_infinity_many(emap, z) -> np.ndarray:
    """Vectorised Green function; points inside G get NaN."""
    emap = _as_map(emap)
    w = emap.forward(np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore"):
        g = -np.log(np.abs(w))
    g = np.where(np.abs(w) <= 1 + OUTSIDE_TOL, np.maximum(g, 0.0), np.nan)
    return g
