"""Compact sets K, the domains G around them, and the derived sets r(K, alpha), K(alpha)."""
import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from . import _kernels as kern
from .errors import ConfigurationError, DomainError, UnsupportedError

MEMBER_TOL = 1e-9


@dataclass(frozen=True)
class RationalExponent:
    """alpha = sigma / tau with coprime positive integers."""

    sigma: int
    tau: int

    def __post_init__(self):
        if int(self.sigma) != self.sigma or int(self.tau) != self.tau:
            raise ConfigurationError("sigma and tau must be integers")
        if self.sigma <= 0 or self.tau <= 0:
            raise ConfigurationError("sigma and tau must be positive")
        if math.gcd(self.sigma, self.tau) != 1:
            raise ConfigurationError(f"{self.sigma}/{self.tau} is not in lowest terms")

    @classmethod
    def of(cls, value, tau=None):
        """Build from ``(sigma, tau)``, a Fraction, or a string like ``"1/2"``; reduces."""
        frac = Fraction(value) if tau is None else Fraction(int(value), int(tau))
        if frac <= 0:
            raise ConfigurationError("alpha must be positive")
        return cls(frac.numerator, frac.denominator)

    @property
    def alpha(self) -> float:
        return self.sigma / self.tau

    def __str__(self):
        return f"{self.sigma}/{self.tau}"


class CompactFamily:
    """Common interface of the parametric compact sets."""

    kind = "abstract"

    def contains(self, z, tol=MEMBER_TOL):
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def distance(self, z) -> float:
        raise NotImplementedError

    def samples(self, m: int) -> np.ndarray:
        """``m`` points of K, uniform in the exterior-map parameter."""
        raise NotImplementedError

    def bbox(self):
        raise NotImplementedError

    def sublevel_samples(self, exp: RationalExponent, level: float, m: int) -> np.ndarray:
        """Points of ``{z in K : |z|^sigma |1-z|^tau <= level}`` (component of 1)."""
        raise UnsupportedError(f"sub-level sampling is not available for {self.kind}")

    def max_weight_product(self, exp: RationalExponent) -> float:
        """sup over K of |z|^sigma |1 - z|^tau, on a fine sample."""
        z = self.samples(4096)
        return float(np.max(np.abs(z) ** exp.sigma * np.abs(1 - z) ** exp.tau))


def _weight_product(z, exp):
    return np.abs(z) ** exp.sigma * np.abs(1 - z) ** exp.tau


def _last_below(fun, level, hi=1.0):
    """sup{p in [0, hi] : fun(p) <= level} for fun increasing with fun(0) = 0."""
    if fun(hi) <= level:
        return hi
    if level <= 0:
        return 0.0
    return bisect(lambda p: fun(p) - level, 0.0, hi, xtol=1e-15, maxiter=500)


@dataclass(frozen=True)
class TangentDisc(CompactFamily):
    """Closed disc with centre x0 and radius x0 - 1, tangent to the unit circle at 1."""

    x0: float
    kind = "disc"

    def __post_init__(self):
        if not self.x0 > 1:
            raise ConfigurationError("disc family needs x0 > 1")

    @property
    def radius(self):
        return self.x0 - 1.0

    def contains(self, z, tol=MEMBER_TOL):
        return np.abs(np.asarray(z) - self.x0) <= self.radius + tol

    def diameter(self):
        return 2.0 * self.radius

    def distance(self, z):
        return max(abs(complex(z) - self.x0) - self.radius, 0.0)

    def samples(self, m):
        t = math.pi + 2 * math.pi * np.arange(m) / m
        return self.x0 + self.radius * np.exp(1j * t)

    def bbox(self):
        return (1.0, 2 * self.x0 - 1.0, -self.radius, self.radius)

    def sublevel_samples(self, exp, level, m):
        # K is convex and tangent to Re z = 1 at 1, so L is star-shaped from 1
        # and its boundary is the ray endpoints below.
        angles = np.linspace(-math.pi / 2, math.pi / 2, m - 1)
        pts = [1.0 + 0j]
        x0, rad = self.x0, self.radius
        for a in angles:
            e = complex(math.cos(a), math.sin(a))
            # ray 1 + t e leaves K at t = 2 (x0-1) cos a
            t_max = max(2 * rad * math.cos(a), 0.0)
            if t_max <= 0:
                continue
            def h(p, e=e, t_max=t_max):
                z = 1 + p * t_max * e
                return abs(z) ** exp.sigma * abs(1 - z) ** exp.tau
            p = _last_below(h, level)
            if p > 0:
                pts.append(1 + p * t_max * e)
        return np.asarray(pts, dtype=complex)


@dataclass(frozen=True)
class Segment(CompactFamily):
    """The real interval [1, x0]."""

    x0: float
    kind = "segment"

    def __post_init__(self):
        if not self.x0 > 1:
            raise ConfigurationError("segment family needs x0 > 1")

    def contains(self, z, tol=MEMBER_TOL):
        z = np.asarray(z, dtype=complex)
        return (np.abs(z.imag) <= tol) & (z.real >= 1 - tol) & (z.real <= self.x0 + tol)

    def diameter(self):
        return self.x0 - 1.0

    def distance(self, z):
        z = complex(z)
        x = min(max(z.real, 1.0), self.x0)
        return abs(z - x)

    def samples(self, m):
        t = math.pi * np.arange(m) / max(m - 1, 1)
        return ((self.x0 + 1) / 2 - (self.x0 - 1) / 2 * np.cos(t)).astype(complex)

    def bbox(self):
        pad = 0.05 * (self.x0 - 1)
        return (1.0 - pad, self.x0 + pad, -pad, pad)

    def sublevel_samples(self, exp, level, m):
        span = self.x0 - 1.0
        p = _last_below(lambda q: float(_weight_product(1 + q * span, exp)), level)
        return (1 + p * span * np.linspace(0.0, 1.0, m)).astype(complex)


@dataclass(frozen=True)
class Arc(CompactFamily):
    """{e^{i t} : |t| <= theta0 / 2}."""

    theta0: float
    kind = "arc"

    def __post_init__(self):
        if not 0 < self.theta0 < 2 * math.pi:
            raise ConfigurationError("arc family needs theta0 in (0, 2 pi)")

    @property
    def s(self):
        return math.sin(self.theta0 / 4)

    def contains(self, z, tol=MEMBER_TOL):
        z = np.asarray(z, dtype=complex)
        return (np.abs(np.abs(z) - 1) <= tol) & (np.abs(np.angle(z)) <= self.theta0 / 2 + tol)

    def diameter(self):
        if self.theta0 <= math.pi:
            return 2 * math.sin(self.theta0 / 2)
        return 2.0

    def distance(self, z):
        z = complex(z)
        half = self.theta0 / 2

        def d(t):
            return abs(z - complex(math.cos(t), math.sin(t)))

        grid = np.linspace(-half, half, 257)
        vals = np.abs(z - np.exp(1j * grid))
        k = int(np.argmin(vals))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        best = min(d(-half), d(half), float(vals[k]))
        if z != 0:
            # radial projection; the search alone stalls near the kink where the distance is 0
            best = min(best, d(min(max(cmath.phase(z), -half), half)))
        if hi > lo:
            res = minimize_scalar(d, bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
            best = min(best, float(res.fun))
        return best

    def samples(self, m):
        # psi = s e^{i b} covers the arc once for |b| <= bc, cos bc = -s
        s = self.s
        bc = math.acos(-s)
        b = -bc + 2 * bc * np.arange(m) / max(m - 1, 1)
        psi = s * np.exp(1j * b)
        z = psi * (psi + 1) / (psi + s * s)
        # round-off near the endpoints can step just past the arc
        half = self.theta0 / 2
        return np.exp(1j * np.clip(np.angle(z), -half, half))

    def bbox(self):
        half = self.theta0 / 2
        t = np.linspace(-half, half, 2001)
        x, y = np.cos(t), np.sin(t)
        pad = 0.05
        return (float(x.min()) - pad, float(x.max()) + pad, float(y.min()) - pad, float(y.max()) + pad)

    def sublevel_samples(self, exp, level, m):
        half = self.theta0 / 2
        p = _last_below(lambda q: abs(1 - complex(math.cos(q * half), math.sin(q * half))) ** exp.tau, level)
        t = p * half * np.linspace(-1.0, 1.0, m)
        return np.exp(1j * t)

    def max_weight_product(self, exp):
        half = min(self.theta0 / 2, math.pi)
        return float(abs(1 - complex(math.cos(half), math.sin(half))) ** exp.tau)


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b - a).real * (c - a).imag - (b - a).imag * (c - a).real
    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return (o1 * o2 < 0) and (o3 * o4 < 0)


@dataclass(frozen=True)
class SampledJordan(CompactFamily):
    """Closed region bounded by a user-supplied closed polyline."""

    points: Tuple[complex, ...]
    kind = "jordan"

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        n = len(pts)
        if n < 3:
            raise ConfigurationError("need at least three boundary points")
        arr = np.asarray(pts)
        if np.any(np.abs(arr) < 1 - 1e-12):
            raise ConfigurationError("sampled boundary must satisfy |z| >= 1")
        for k in range(n):
            a, b = arr[k], arr[(k + 1) % n]
            # crossing of (-inf, 0]
            if (a.imag == 0 and a.real <= 0) or (a.imag * b.imag < 0 and
                                                  a.real - a.imag * (b.real - a.real) / (b.imag - a.imag) <= 0):
                raise ConfigurationError("boundary meets (-inf, 0]")
            for j in range(k + 2, n):
                if k == 0 and j == n - 1:
                    continue
                if _segments_cross(a, b, arr[j], arr[(j + 1) % n]):
                    raise ConfigurationError("boundary polyline self-intersects")
        if bool(kern.point_in_polygon(np.array([0j]), arr)[0]):
            raise ConfigurationError("region contains the origin")

    @property
    def vertices(self):
        return np.asarray(self.points, dtype=complex)

    def contains(self, z, tol=MEMBER_TOL):
        z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
        inside = kern.point_in_polygon(z_arr, self.vertices)
        near = kern.polyline_distance(z_arr, self.vertices) <= tol
        out = (inside | near).reshape(np.shape(z))
        return bool(out) if np.ndim(z) == 0 else out

    def diameter(self):
        v = self.vertices
        return float(np.max(np.abs(v[:, None] - v[None, :])))

    def distance(self, z):
        z_arr = np.array([complex(z)])
        if kern.point_in_polygon(z_arr, self.vertices)[0]:
            return 0.0
        return float(kern.polyline_distance(z_arr, self.vertices)[0])

    def samples(self, m):
        v = self.vertices
        closed = np.append(v, v[0])
        seg = np.abs(np.diff(closed))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        s = cum[-1] * np.arange(m) / m
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(v) - 1)
        frac = (s - cum[k]) / np.where(seg[k] > 0, seg[k], 1.0)
        return closed[k] + frac * (closed[k + 1] - closed[k])

    def bbox(self):
        v = self.vertices
        return (v.real.min(), v.real.max(), v.imag.min(), v.imag.max())


@dataclass(frozen=True)
class DomainSpec:
    """A domain G containing K: the family plus an inflation parameter.

    ``inflation`` is rho - (x0 - 1) for the disc, and epsilon for the segment
    and arc.  ``exterior`` carries the caller's map for ``SampledJordan``.
    """

    family: CompactFamily
    inflation: float = 0.0
    exterior: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        fam, eps = self.family, self.inflation
        if eps < 0:
            raise ConfigurationError("inflation must be >= 0")
        if isinstance(fam, TangentDisc):
            if fam.radius + eps >= fam.x0:
                raise ConfigurationError("disc domain must keep 0 outside (rho < x0)")
        elif isinstance(fam, Segment):
            t0 = (math.sqrt(fam.x0) - 1) / (math.sqrt(fam.x0) + 1)
            if eps >= 1 - t0:
                raise ConfigurationError(f"segment inflation must be < {1 - t0:.6g} to avoid (-inf, 0]")
        elif isinstance(fam, Arc):
            if eps >= 1 - fam.s:
                raise ConfigurationError(f"arc inflation must be < 1 - sin(theta0/4) = {1 - fam.s:.6g}")
        elif isinstance(fam, SampledJordan):
            if self.exterior is None:
                raise ConfigurationError("sampled Jordan domains need a user-supplied exterior map")
        else:
            raise ConfigurationError(f"unknown family {fam!r}")

    @classmethod
    def disc(cls, x0, rho):
        return cls(TangentDisc(x0), rho - (x0 - 1.0))

    @property
    def rho(self):
        return self.family.radius + self.inflation


def boundary_sample(domain: DomainSpec, m: int) -> np.ndarray:
    """m points on the boundary of G: the inverse exterior map at equispaced circle points."""
    from .conformal import exterior_map

    if m < 4:
        raise ConfigurationError("need m >= 4 boundary samples")
    w = np.exp(2j * math.pi * np.arange(m) / m)
    return exterior_map(domain).inverse(w)


def diam_and_dist(family: CompactFamily, z) -> Tuple[float, float]:
    return family.diameter(), family.distance(z)


def r_k_alpha(family: CompactFamily, exp: RationalExponent, M: float) -> float:
    """sup{r in [0,1) : r^sigma (1+r)^tau < M^-tau}, i.e. the root of M^tau r^sigma (1+r)^tau = 1."""
    if not M > 1:
        raise ConfigurationError("M must exceed 1")
    s, t = exp.sigma, exp.tau
    Mt = M ** t

    def f(r):
        return Mt * r ** s * (1 + r) ** t - 1.0

    # f(0) = -1 and f(1) = M^tau 2^tau - 1 > 0, so the root lies in (0, 1)
    r = bisect(f, 0.0, 1.0, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
    # return the admissible side of the root
    while f(r) > 0:
        r = np.nextafter(r, 0.0)
    return float(r)


def k_alpha_member(family: CompactFamily, exp: RationalExponent, M: float, z) -> bool:
    """z in K(alpha), i.e. |z|^sigma |1 - z|^tau < M^-tau; z must lie in K."""
    if not bool(family.contains(z)):
        raise DomainError(f"{z} is not in K")
    z = complex(z)
    return abs(z) ** exp.sigma * abs(1 - z) ** exp.tau < M ** (-exp.tau)


def k_alpha_mask(family: CompactFamily, exp: RationalExponent, M: float, z) -> np.ndarray:
    """Vectorised K(alpha) indicator for arbitrary points (False off K)."""
    z = np.asarray(z, dtype=complex)
    inside = np.asarray(family.contains(z), dtype=bool)
    return inside & kern.sublevel(z, exp.sigma, exp.tau, M ** (-exp.tau))
