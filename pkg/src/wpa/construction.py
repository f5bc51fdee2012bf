"""Perturbation polynomials, the partial-sum-controlled constructor, and the stage builders.

The perturbation is C^n z^(sigma n) (1 - z)^(tau n).  Its coefficients reach
1e100 and beyond, and its partial sums at 1 cancel catastrophically if
summed term by term, so every polynomial built here keeps its perturbation
part symbolic: a shared scale n log C, exact binomial identities for partial
sums, and a closed-form evaluator for values.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import mpmath
import numpy as np

from .errors import (ConfigurationError, DomainError, InfeasibleError, PrecisionError,
                     ScaleError, UnsupportedError, WPAError)
from .geometry import CompactFamily, RationalExponent, k_alpha_mask, r_k_alpha
from .weighted_approx import ComplexPolynomial, FitResult, _target_values, weighted_fit

LOG_DOUBLE_MAX = 709.0
INFEASIBLE_MARGIN = 1e-9
N_TRIES = 64
REVERIFY_SLACK = 0.10
REVERIFY_FLOOR = 1e-12


def _log_binom(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def pi_log_coefficients(n, C, sigma, tau):
    """(signs, log|b_k|) for k = sigma n .. (sigma + tau) n."""
    m = np.arange(tau * n + 1)
    logs = n * math.log(C) + np.array([_log_binom(tau * n, int(k)) for k in m])
    signs = np.where(m % 2 == 0, 1.0, -1.0)
    return signs, logs


def pi_poly(n: int, C: float, sigma: int, tau: int) -> ComplexPolynomial:
    """C^n z^(sigma n) (1 - z)^(tau n) with coefficients assembled in log domain."""
    if n < 1 or not C > 0:
        raise ConfigurationError("need n >= 1 and C > 0")
    if isinstance(C, int):
        # exact integer coefficients
        a = [0] * (sigma * n) + [C ** n * (-1) ** m * math.comb(tau * n, m) for m in range(tau * n + 1)]
        return ComplexPolynomial(tuple(a))
    signs, logs = pi_log_coefficients(n, C, sigma, tau)
    if logs.max() > LOG_DOUBLE_MAX:
        raise PrecisionError(f"coefficients reach 1e{logs.max() / math.log(10):.0f}; "
                             "use pi_partial_sum_at_one_exact or the scaled representation")
    a = np.zeros((sigma + tau) * n + 1, dtype=complex)
    a[sigma * n:] = signs * np.exp(logs)
    return ComplexPolynomial(a, lambda z: pi_values(n, C, sigma, tau, z))


def pi_log_abs(n, C, sigma, tau, z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        return n * (math.log(C) + sigma * np.log(np.abs(z)) + tau * np.log(np.abs(1 - z)))


def pi_values(n, C, sigma, tau, z):
    """Closed-form values; +inf modulus where they exceed the double range."""
    z = np.asarray(z, dtype=complex)
    la = pi_log_abs(n, C, sigma, tau, z)
    arg = n * (sigma * np.angle(z) + tau * np.angle(1 - z))
    with np.errstate(over="ignore", invalid="ignore"):
        mod = np.exp(la)
        out = mod * np.exp(1j * arg)
    return np.where(np.isinf(mod), complex(math.inf, 0), out)


def _pi_index_check(n, sigma, tau, j):
    if not sigma * n <= j <= (sigma + tau) * n - 1:
        raise DomainError(f"j={j} outside [{sigma * n}, {(sigma + tau) * n - 1}]")


def _alternating_binomial_sum(n, sigma, tau, j):
    return sum((-1) ** k * math.comb(tau * n, k) for k in range(j - sigma * n + 1))


def pi_partial_sum_at_one_exact(n: int, sigma: int, tau: int, j: int) -> int:
    """S_j(perturbation)(1) / C^n as an exact integer, cross-checked by direct summation."""
    _pi_index_check(n, sigma, tau, j)
    m = j - sigma * n
    closed = (-1) ** m * math.comb(tau * n - 1, m)
    direct = _alternating_binomial_sum(n, sigma, tau, j)
    if closed != direct:
        raise ArithmeticError(f"partial-sum identity failed at n={n}, j={j}: {closed} != {direct}")
    return closed


def choose_C(M: float, sigma: int, tau: int, r: float, L_samples) -> float:
    """Geometric mean of M^tau and the largest C keeping the perturbation small on |z|<=r and on L."""
    L = np.asarray(L_samples, dtype=complex)
    h = np.abs(L) ** sigma * np.abs(1 - L) ** tau
    sup_l = float(h.max()) if h.size else 0.0
    u_disc = r ** (-sigma) * (1 + r) ** (-tau) if r > 0 else math.inf
    u_l = 1.0 / sup_l if sup_l > 0 else math.inf
    U = min(u_disc, u_l)
    Mt = M ** tau
    if not U > Mt * (1 + INFEASIBLE_MARGIN):
        raise InfeasibleError(f"no admissible C: upper limit {U:.6g} <= M^tau = {Mt:.6g}")
    return math.sqrt(Mt * U)


@dataclass
class ControlledPolynomial:
    """z^(n sigma) Q(z) + C^n z^(sigma n) (1 - z)^(tau n), kept in parts."""

    fit: FitResult
    n: int
    C: float
    exp: RationalExponent

    @property
    def log_scale(self) -> float:
        return self.n * math.log(self.C)

    @property
    def valuation(self) -> int:
        return self.n * self.exp.sigma

    @property
    def degree(self) -> int:
        return self.n * (self.exp.sigma + self.exp.tau)

    def values(self, z):
        s, t = self.exp.sigma, self.exp.tau
        return self.fit.weighted_values(z) + pi_values(self.n, self.C, s, t, z)

    def _fit_mantissas(self):
        """Fit coefficients divided by C^n, on k = valuation .. degree."""
        q = np.asarray(self.fit.Q.coeffs, dtype=complex)
        out = np.zeros(self.exp.tau * self.n + 1, dtype=complex)
        out[: q.size] = q * math.exp(-self.log_scale)
        return out

    def coefficient_mantissas(self):
        """a_k / C^n for k = valuation .. degree."""
        signs, logs = pi_log_coefficients(self.n, 1.0, self.exp.sigma, self.exp.tau)
        return signs * np.exp(logs) + self._fit_mantissas()

    def partial_sum_mantissas(self, route="closed"):
        """S_j(P)(1) / C^n for j = valuation .. degree - 1.

        ``closed`` uses the binomial identity, ``alternating`` the exact
        integer sums; the two are independent routes to the same numbers.
        """
        s, t, n = self.exp.sigma, self.exp.tau, self.n
        idx = range(s * n, (s + t) * n)
        if route == "closed":
            pi = [(-1) ** (j - s * n) * math.comb(t * n - 1, j - s * n) for j in idx]
        elif route == "alternating":
            pi, acc = [], 0
            for k in range(t * n):
                acc += (-1) ** k * math.comb(t * n, k)
                pi.append(acc)
        else:
            raise ConfigurationError(f"unknown route {route!r}")
        fit_ps = np.cumsum(self._fit_mantissas())[:-1]
        return np.array([float(p) for p in pi]) + fit_ps

    def polynomial(self) -> ComplexPolynomial:
        """Plain coefficient form; raises PrecisionError beyond the double range."""
        mant = self.coefficient_mantissas()
        if self.log_scale + math.log(max(np.abs(mant).max(), 1e-300)) > LOG_DOUBLE_MAX:
            raise PrecisionError("coefficients exceed the double range")
        a = np.zeros(self.degree + 1, dtype=complex)
        a[self.valuation:] = mant * math.exp(self.log_scale)
        return ComplexPolynomial(a, self.values)

    def to_json(self):
        return {"n": self.n, "C": self.C, "valuation": self.valuation, "degree": self.degree,
                "log10_scale": self.log_scale / math.log(10), "fit": self.fit.to_json()}


def _log_or_inf(x):
    return math.log(x) if x > 0 else -math.inf


@dataclass
class ConstructionCertificate:
    n_used: int
    C_used: float
    bound1: float
    bound2: float
    min_partial_real_abs: float
    min_coeff_abs: float
    epsilon: float
    B: float
    passed: bool
    log10_min_partial_real_abs: float = math.nan
    log10_min_coeff_abs: float = math.nan
    log10_lower_bound_coeff: float = math.nan
    log10_lower_bound_partial: float = math.nan
    phi_norm_K: float = math.nan
    lower_bounds_hold: bool = False
    dense: dict = field(default_factory=dict)
    reverified: bool = False

    def to_json(self):
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, float) and not math.isfinite(v):
                v = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
            out[k] = v
        return out


def _measure(P: ControlledPolynomial, target, L, disc):
    """The four certificate quantities, moduli returned as natural logs where they may overflow."""
    b1 = float(np.max(np.abs(P.values(L) - _target_values(target, L)))) if L.size else 0.0
    b2 = float(np.max(np.abs(P.values(disc))))
    return b1, b2


def _log_min_abs(mant, log_scale):
    m = float(np.min(np.abs(mant)))
    return log_scale + _log_or_inf(m)


def _densify(L, factor, family, exp, level):
    """Insert points between consecutive samples, keeping only those in K below ``level``."""
    L = np.asarray(L, dtype=complex)
    if L.size < 2:
        return L
    t = np.linspace(0, 1, factor, endpoint=False)[1:]
    mids = (L[:-1, None] + (L[1:] - L[:-1])[:, None] * t[None, :]).ravel()
    # arcs: project back to the circle
    if getattr(family, "kind", "") == "arc":
        mids = mids / np.abs(mids)
    h = np.abs(mids) ** exp.sigma * np.abs(1 - mids) ** exp.tau
    keep = np.asarray(family.contains(mids), dtype=bool) & (h <= level * (1 + 1e-12))
    return np.concatenate([L, mids[keep]])


def _circle(r, m):
    return r * np.exp(2j * math.pi * np.arange(m) / m)


def lemma_construct(family: CompactFamily, exp: RationalExponent, epsilon: float, target, N: int,
                    B: float, r: float, L_samples, M: Optional[float] = None,
                    k_samples: int = 512, disc_samples: int = 512, n_start: Optional[int] = None,
                    n_tries: int = N_TRIES, dense_factor: int = 4, l_emphasis: float = 1.0):
    """Find P = z^(n sigma) Q + perturbation with val(P) >= N meeting the four certificate bounds.

    Returns ``(ControlledPolynomial, ConstructionCertificate)``.  The smallest
    passing n is used; after ``n_tries`` values of n a ScaleError carries
    the last certificate as its shortfall.

    ``l_emphasis`` < 1 down-weights K samples outside the sub-level set
    spanned by L in the minimax fit.  The fit then trades accuracy away
    from L for accuracy on L; all four certificate bounds are still
    measured directly.
    """
    from .potential import m_k

    if epsilon <= 0 or B < 0 or N < 0:
        raise ConfigurationError("need epsilon > 0, B >= 0, N >= 0")
    if not bool(family.contains(1.0)):
        raise DomainError("1 must belong to K")
    if M is None:
        M = m_k(family)
    s, t = exp.sigma, exp.tau
    L = np.atleast_1d(np.asarray(L_samples, dtype=complex))
    if L.size and not np.all(k_alpha_mask(family, exp, M, L)):
        raise DomainError("L samples must lie in K(alpha)")
    r_star = r_k_alpha(family, exp, M)
    if not 0 < r < r_star:
        raise ConfigurationError(f"r must lie in (0, {r_star:.12g})")
    C = choose_C(M, s, t, r, L)
    level = float(np.max(np.abs(L) ** s * np.abs(1 - L) ** t)) if L.size else 0.0
    disc = _circle(r, disc_samples)
    k_norm = float(np.max(np.abs(_target_values(target, family.samples(k_samples)))))

    first = max(math.ceil(N / s), 1) if n_start is None else n_start
    cert = None
    for n in range(first, first + n_tries):
        m = max(k_samples, 4 * (n * t + 1))
        zk = family.samples(m)
        wts = None
        if l_emphasis != 1.0:
            hk = np.abs(zk) ** s * np.abs(1 - zk) ** t
            wts = np.where(hk <= level * (1 + 1e-12), 1.0, l_emphasis)
        fit = weighted_fit(zk, exp, n, target, wts)
        P = ControlledPolynomial(fit, n, C, exp)
        cert = _certify(P, target, L, disc, epsilon, B, M, k_norm)
        if cert.passed:
            _reverify(cert, P, target, family, exp, level, L, r, disc_samples, dense_factor)
            return P, cert
    raise ScaleError(f"no certificate within n < {first + n_tries}", shortfall=cert)


def _certify(P, target, L, disc, epsilon, B, M, k_norm):
    s, t, n = P.exp.sigma, P.exp.tau, P.n
    b1, b2 = _measure(P, target, L, disc)
    ls = P.log_scale
    lp = _log_min_abs(P.partial_sum_mantissas("closed").real, ls)
    lc = _log_min_abs(P.coefficient_mantissas(), ls)
    log_b = _log_or_inf(B)
    passed = b1 < epsilon and b2 < epsilon and lp >= log_b and lc >= log_b
    # Lower bounds implied by Bernstein's inequality, in log domain
    log_slack = t * n * math.log(M) + math.log(k_norm + epsilon / 2)
    log10 = math.log(10)

    def log_diff(extra):
        d = log_slack + extra - ls
        return ls + math.log(-math.expm1(d)) if d < 0 else -math.inf

    l_lb_c, l_lb_p = log_diff(0.0), log_diff(math.log(n * t))
    holds = lc >= l_lb_c - 1e-9 and lp >= l_lb_p - 1e-9
    return ConstructionCertificate(
        n_used=n, C_used=P.C, bound1=b1, bound2=b2,
        min_partial_real_abs=math.exp(lp) if lp < LOG_DOUBLE_MAX else math.inf,
        min_coeff_abs=math.exp(lc) if lc < LOG_DOUBLE_MAX else math.inf,
        epsilon=epsilon, B=B, passed=bool(passed),
        log10_min_partial_real_abs=lp / log10, log10_min_coeff_abs=lc / log10,
        log10_lower_bound_coeff=l_lb_c / log10, log10_lower_bound_partial=l_lb_p / log10,
        phi_norm_K=k_norm, lower_bounds_hold=bool(holds))


def _reverify(cert, P, target, family, exp, level, L, r, disc_samples, factor):
    L_dense = _densify(L, factor, family, exp, level)
    disc = _circle(r, factor * disc_samples)
    b1, b2 = _measure(P, target, L_dense, disc)
    ls = P.log_scale
    lp = _log_min_abs(P.partial_sum_mantissas("alternating").real, ls)
    lc = _log_min_abs(P.coefficient_mantissas(), ls)
    log10 = math.log(10)
    cert.dense = {"bound1": b1, "bound2": b2, "L_samples": int(L_dense.size),
                  "disc_samples": int(disc.size),
                  "log10_min_partial_real_abs": lp / log10, "log10_min_coeff_abs": lc / log10}
    tol_log = math.log1p(-REVERIFY_SLACK)
    cert.reverified = bool(
        b1 <= (1 + REVERIFY_SLACK) * cert.bound1 + REVERIFY_FLOOR
        and b2 <= (1 + REVERIFY_SLACK) * cert.bound2 + REVERIFY_FLOOR
        and lp >= cert.log10_min_partial_real_abs * log10 + tol_log
        and lc >= cert.log10_min_coeff_abs * log10 + tol_log)


def partial_sums_at(P, z):
    """S_j(P)(z) for j = 0..degree by cumulative summation."""
    if isinstance(P, ControlledPolynomial):
        P = P.polynomial()
    return P.partial_sums(z)


# ----------------------------------------------------------------------------
# stage builder


@dataclass
class StageRecord:
    stage: int
    P: Optional[ControlledPolynomial]
    epsilon_n: float
    s_n: float
    B_n: float
    target_id: int
    halfspace_ok: bool
    certificate: Optional[ConstructionCertificate] = None
    target_error_dense: float = math.nan
    min_coeff_log10: float = math.nan
    failure: Optional[str] = None

    def to_json(self):
        return {"stage": self.stage, "epsilon_n": self.epsilon_n, "s_n": self.s_n,
                "B_n": self.B_n, "target_id": self.target_id, "halfspace_ok": self.halfspace_ok,
                "target_error_dense": self.target_error_dense,
                "min_coeff_log10": self.min_coeff_log10, "failure": self.failure,
                "P": None if self.P is None else self.P.to_json(),
                "certificate": None if self.certificate is None else self.certificate.to_json()}


@dataclass
class StagePrefix:
    """sum of the stage polynomials; supports are disjoint and increasing."""

    stages: List[ControlledPolynomial] = field(default_factory=list)

    def values(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for P in self.stages:
            out = out + P.values(z)
        return out

    @property
    def degree(self):
        return self.stages[-1].degree if self.stages else 0

    def polynomial(self) -> ComplexPolynomial:
        out = ComplexPolynomial.zero()
        for P in self.stages:
            out = out + P.polynomial()
        return ComplexPolynomial(out.coeffs, self.values)

    def value_at_one(self) -> complex:
        return complex(self.values(np.array([1.0 + 0j]))[0]) if self.stages else 0j

    def real_partial_sums_at_one(self):
        """Re S_j(f)(1) for every j up to the degree, as mpmath numbers (no overflow)."""
        out, base = [], mpmath.mpf(0)
        prev_end = -1
        for P in self.stages:
            out.extend([base] * (P.valuation - prev_end - 1))
            scale = mpmath.exp(P.log_scale)
            for m in P.partial_sum_mantissas("closed").real:
                out.append(base + mpmath.mpf(float(m)) * scale)
            base = base + mpmath.mpf(float(P.values(np.array([1.0 + 0j]))[0].real))
            out.append(base)
            prev_end = P.degree
        return out


def halfspace_ok(values) -> bool:
    return all(v <= -1 or v >= 0 for v in values)


def _tapered(fun, exp, level, width):
    """fun times a smooth cutoff equal to 1 on {h <= level} and ~0 past level * (1 + width)."""
    from scipy.special import erfc

    def g(z):
        z = np.asarray(z, dtype=complex)
        h = np.abs(z) ** exp.sigma * np.abs(1 - z) ** exp.tau
        u = (h - level) / (level * width) if level > 0 else np.where(h > 0, np.inf, -np.inf)
        chi = np.where(u <= 0, 1.0, 0.5 * erfc(12.0 * (u - 0.5)))
        live = chi > 1e-300
        out = np.zeros(z.shape, dtype=complex)
        if np.any(live):
            with np.errstate(over="ignore", invalid="ignore"):
                out[live] = fun(z[live]) * chi[live]
        return np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)
    return g


def stage_build(family: CompactFamily, exp: RationalExponent, targets: Sequence, stages: int,
                mode: str = "halfspace", M: Optional[float] = None, l_samples: int = 512,
                localize: Optional[bool] = None, taper_width: float = 0.25, l_emphasis: float = 0.05,
                k_samples: int = 512, n_tries: int = N_TRIES):
    """Finite prefix of the staged construction.

    Stage n approximates target_n minus the earlier stages on L_n with
    epsilon_n = 2^-n, radius s_n = r(K, alpha)(1 - 2^-n) and valuation above
    the previous degree.  ``halfspace`` mode takes B_n = |Re f(1)| + 1,
    ``growing_coeffs`` takes B_n = n.

    For sets with empty interior every continuous function is admissible,
    so by default the stage target is multiplied by a smooth cutoff that is
    1 on L_n.  This leaves the L_n conclusion untouched while keeping the
    target bounded on the rest of K, where the earlier stages are huge.

    Returns ``(StagePrefix, records)``; a failing stage ends the build with a
    record whose ``failure`` field explains why.
    """
    from .potential import m_k

    if mode not in ("halfspace", "growing_coeffs"):
        raise ConfigurationError(f"unknown mode {mode!r}")
    if not 1 <= stages <= 8:
        raise ConfigurationError("stages must be between 1 and 8")
    if not targets:
        raise ConfigurationError("need at least one target")
    if localize is None:
        localize = family.kind in ("segment", "arc")
    if M is None:
        M = m_k(family)
    s, t = exp.sigma, exp.tau
    tgt = [tg if isinstance(tg, ComplexPolynomial) or callable(tg) else ComplexPolynomial.constant(tg)
           for tg in targets]
    if mode == "halfspace":
        for i, tg in enumerate(tgt):
            if not complex(np.asarray(_target_values(tg, np.array([1.0 + 0j])))[0]).real > 0:
                raise ConfigurationError(f"target {i} must have Re target(1) > 0")
    r_star = r_k_alpha(family, exp, M)
    prefix = StagePrefix()
    records = []
    for n in range(1, stages + 1):
        eps_n = 2.0 ** (-n)
        s_n = r_star * (1 - 2.0 ** (-n))
        level = (1 - 1 / n) * M ** (-t)
        tid = (n - 1) % len(tgt)
        target_n = tgt[tid]
        f1 = prefix.value_at_one()
        B_n = abs(f1.real) + 1 if mode == "halfspace" else float(n)
        N = prefix.degree + 1 if prefix.stages else 1
        try:
            L = family.sublevel_samples(exp, level, l_samples)
        except UnsupportedError as exc:
            records.append(StageRecord(n, None, eps_n, s_n, B_n, tid, False, failure=str(exc)))
            break

        def phi(z, prev=StagePrefix(list(prefix.stages)), tg=target_n):
            return _target_values(tg, np.asarray(z, dtype=complex)) - prev.values(z)

        phi_fit = _tapered(phi, exp, max(level, 1e-300), taper_width) if (localize and prefix.stages) else phi
        try:
            P, cert = lemma_construct(family, exp, eps_n, phi_fit, N, B_n, s_n, L, M=M,
                                      k_samples=k_samples, n_tries=n_tries,
                                      l_emphasis=l_emphasis if prefix.stages else 1.0)
        except WPAError as exc:
            rec = StageRecord(n, None, eps_n, s_n, B_n, tid, False, failure=f"{type(exc).__name__}: {exc}")
            if isinstance(exc, ScaleError):
                rec.certificate = exc.shortfall
            records.append(rec)
            break
        prefix.stages.append(P)
        sums = prefix.real_partial_sums_at_one()
        lo = (prefix.stages[-2].degree + 1) if len(prefix.stages) > 1 else 0
        hs = halfspace_ok(sums[lo:])
        L_dense = _densify(L, 4, family, exp, level if level > 0 else 0.0)
        err = float(np.max(np.abs(prefix.values(L_dense) - _target_values(target_n, L_dense))))
        rec = StageRecord(n, P, eps_n, s_n, B_n, tid, bool(hs), cert, err,
                          cert.log10_min_coeff_abs)
        records.append(rec)
    return prefix, records
