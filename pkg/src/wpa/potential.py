"""Poisson kernel, the positivity criterion for z^alpha approximation, and the derived constants."""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels as kern
from .conformal import exterior_map, green_infinity_many
from .errors import ConfigurationError, DomainError, UnsupportedError
from .geometry import Arc, CompactFamily, DomainSpec, SampledJordan, Segment, TangentDisc

PASS_TOL = 1e-12
LIMIT_INFLATIONS = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class CriterionReport:
    alpha: float
    min_density: float
    argmin_zeta: complex
    sample_count: int
    passed: bool

    @property
    def pass_(self):
        return self.passed


def poisson_kernel(z, zeta) -> float:
    z, zeta = complex(z), complex(zeta)
    if abs(z) >= 1:
        raise DomainError("Poisson kernel needs |z| < 1")
    if abs(abs(zeta) - 1) > 1e-9:
        raise DomainError("zeta must lie on the unit circle")
    return float(kern.poisson(z, np.array([zeta]))[0])


def _density_on_circle(emap, alpha, t):
    w = np.exp(1j * np.atleast_1d(t))
    return kern.pv_density(w, emap.phi_infinity, emap.phi_zero, float(alpha))


def pv_density(emap, alpha, zeta) -> float:
    """(1 + alpha) P(phi(inf), phi(zeta)) - alpha P(phi(0), phi(zeta))."""
    if isinstance(emap, DomainSpec):
        emap = exterior_map(emap)
    if alpha < 0:
        raise ConfigurationError("alpha must be >= 0")
    w = complex(emap.forward(np.array([complex(zeta)]))[0])
    if abs(abs(w) - 1) > 1e-8:
        raise DomainError(f"{zeta} is not on the boundary of G")
    return float(kern.pv_density(np.array([w / abs(w)]), emap.phi_infinity, emap.phi_zero, float(alpha))[0])


def _scan_min(fun, m):
    """Coarse scan of a 2 pi periodic function, then bounded refinement around the best sample."""
    t = 2 * np.pi * np.arange(m) / m
    vals = fun(t)
    k = int(np.argmin(vals))
    best_t, best_v = float(t[k]), float(vals[k])
    h = 2 * np.pi / m
    res = minimize_scalar(lambda x: float(fun(np.array([x]))[0]), bounds=(best_t - h, best_t + h),
                          method="bounded", options={"xatol": 1e-10})
    if res.fun < best_v:
        best_t, best_v = float(res.x), float(res.fun)
    return best_t, best_v


def pv_criterion(domain, alpha, m=256) -> CriterionReport:
    if m < 64:
        raise ConfigurationError("need m >= 64 boundary samples")
    emap = exterior_map(domain) if isinstance(domain, DomainSpec) else domain
    t, v = _scan_min(lambda tt: _density_on_circle(emap, alpha, tt), m)
    zeta = complex(emap.inverse(np.array([np.exp(1j * t)]))[0])
    return CriterionReport(float(alpha), v, zeta, m, v >= -PASS_TOL)


def _ratio_fun(emap):
    """P(phi(0), .) / P(phi(inf), .) on the circle."""
    p0, pinf = emap.phi_zero, emap.phi_infinity

    def ratio(t):
        w = np.exp(1j * np.atleast_1d(t))
        return kern.poisson(p0, w) / kern.poisson(pinf, w)
    return ratio


def alpha_threshold(domain, m=256, check=True) -> float:
    """Largest alpha for which the criterion holds on G (``math.inf`` if all do)."""
    if m < 64:
        raise ConfigurationError("need m >= 64 boundary samples")
    emap = exterior_map(domain) if isinstance(domain, DomainSpec) else domain
    ratio = _ratio_fun(emap)
    _, neg_max = _scan_min(lambda t: -ratio(t), m)
    c = -neg_max
    if c <= 1:
        return math.inf
    # density >= 0  <=>  alpha <= 1 / (ratio - 1), tightest where the ratio peaks
    alpha = 1.0 / (c - 1.0)
    if check:
        lo = pv_criterion(emap, max(alpha - 1e-6, 0.0), m)
        hi = pv_criterion(emap, alpha + 1e-6, m)
        if not lo.passed or hi.passed:
            raise ArithmeticError(f"threshold bracketing failed at alpha={alpha}")
    return alpha


def harnack_alpha_bound(domain, m=256) -> float:
    """1/(C-1) with C the largest ratio P(phi(0), .) / P(phi(inf), .) sampled on the boundary."""
    if m < 64:
        raise ConfigurationError("need m >= 64 boundary samples")
    emap = exterior_map(domain) if isinstance(domain, DomainSpec) else domain
    ratio = _ratio_fun(emap)
    t = 2 * np.pi * np.arange(m) / m
    c = float(np.max(ratio(t)))
    _, neg = _scan_min(lambda tt: -ratio(tt), m)
    c = max(c, -neg)
    return math.inf if c <= 1 else 1.0 / (c - 1.0)


def _closed_form_alpha_k(family):
    if isinstance(family, TangentDisc):
        return 1.0 / (2 * family.x0 - 1)
    if isinstance(family, Segment):
        return 1.0 / (math.sqrt(family.x0) - 1)
    if isinstance(family, Arc):
        s = family.s
        return (1 - s) / (2 * s)
    raise UnsupportedError(f"no closed form for {family.kind}")


def _limit_alpha_k(family, m=256):
    if isinstance(family, SampledJordan):
        raise UnsupportedError("shrinking-domain limit needs a parametric family")
    pts = []
    for e in LIMIT_INFLATIONS:
        try:
            dom = DomainSpec(family, e)
        except ConfigurationError:
            continue  # too fat for this family
        pts.append((e, alpha_threshold(dom, m)))
    if len(pts) < 2:
        raise ConfigurationError("fewer than two admissible inflations")
    (e1, a1), (e2, a2) = pts[-2], pts[-1]
    slope = (a1 - a2) / (e1 - e2)
    return a2 - slope * e2


def alpha_k(family: CompactFamily, method="closed_form") -> float:
    """Supremum of alpha over domains around K: the published closed form or the shrinking-domain limit."""
    if method == "closed_form":
        return _closed_form_alpha_k(family)
    if method == "limit":
        return _limit_alpha_k(family)
    raise ConfigurationError(f"unknown method {method!r}")


def alpha_k_report(family: CompactFamily) -> dict:
    """Both alpha_K values side by side: the published closed form under 'paper', the threshold limit under 'criterion-limit'."""
    out = {"criterion-limit": alpha_k(family, "limit")}
    try:
        out["paper"] = alpha_k(family, "closed_form")
    except UnsupportedError:
        out["paper"] = None
    if isinstance(family, TangentDisc):
        out["criterion-limit-exact"] = 1.0 / (2 * (family.x0 - 1))
    return out


def solynin_phi(x: float) -> float:
    if x < 0:
        raise ConfigurationError("x must be >= 0")
    return 2 * math.log(math.sqrt(1 + x) + math.sqrt(x))


def solynin_bound(family: CompactFamily, z) -> float:
    return solynin_phi(family.distance(z) / family.diameter())


def _numeric_m_k(family, m=4096):
    emap = exterior_map(DomainSpec(family, 0.0)) if not isinstance(family, SampledJordan) else None
    if emap is None:
        raise UnsupportedError("numeric M_K for sampled sets needs the domain's map; use m_k_for_map")
    return m_k_for_map(emap, m)


def m_k_for_map(emap, m=4096) -> float:
    """sup of exp(g) over the unit circle (maximum principle covers the closed disc)."""

    def neg_g(t):
        z = np.exp(1j * np.atleast_1d(t))
        g = green_infinity_many(emap, z)
        return -np.nan_to_num(g, nan=0.0)

    _, v = _scan_min(neg_g, m)
    return math.exp(-v)


def m_k(family: CompactFamily, method="closed_form") -> float:
    if method == "numeric":
        return _numeric_m_k(family)
    if method != "closed_form":
        raise ConfigurationError(f"unknown method {method!r}")
    if isinstance(family, TangentDisc):
        return (family.x0 + 1) / (family.x0 - 1)
    if isinstance(family, Segment):
        return math.exp(solynin_phi(2 / (family.x0 - 1)))
    warnings.warn(f"no closed form M_K for {family.kind}; using the numeric maximum", RuntimeWarning)
    return _numeric_m_k(family)
