"""Discrete minimax fits of z^(n sigma) Q(z), deg Q <= n tau, to targets on K.

Monomial coefficients of a good fit are large and alternate in sign, so
evaluating them on K loses everything to cancellation.  Fits therefore carry
a stable evaluator that replays the Arnoldi recursion they were built with.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels as kern
from ._parallel import ordered_map
from .errors import ConditioningError, ConfigurationError
from .geometry import CompactFamily, RationalExponent

LAWSON_MAX_ITER = 200
LAWSON_RTOL = 1e-10
ROUNDOFF_FLOOR = 1e-13


@dataclass(frozen=True)
class ComplexPolynomial:
    """sum a_k z^k stored densely from k = 0.

    ``coeffs`` is a complex array, or a tuple of ints/Fractions in exact mode.
    ``evaluator`` optionally replaces Horner's rule for values (not for
    partial sums, which always use the coefficients).
    """

    coeffs: object
    evaluator: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        c = self.coeffs
        if isinstance(c, (tuple, list)) and c and all(isinstance(x, (int, Fraction)) for x in c):
            object.__setattr__(self, "coeffs", tuple(c))
        else:
            arr = np.asarray(c, dtype=complex).ravel()
            if arr.size == 0:
                arr = np.zeros(1, dtype=complex)
            object.__setattr__(self, "coeffs", arr)

    @classmethod
    def from_values(cls, values, valuation=0):
        """Coefficients ``values`` placed on k = valuation, valuation + 1, ..."""
        vals = np.asarray(values, dtype=complex)
        a = np.zeros(valuation + vals.size, dtype=complex)
        a[valuation:] = vals
        return cls(a)

    @classmethod
    def constant(cls, c):
        return cls(np.array([c], dtype=complex))

    @classmethod
    def zero(cls):
        return cls(np.zeros(1, dtype=complex))

    @property
    def exact(self) -> bool:
        return isinstance(self.coeffs, tuple)

    def _nonzero(self):
        if self.exact:
            return [k for k, a in enumerate(self.coeffs) if a != 0]
        return list(np.flatnonzero(self.coeffs))

    @property
    def is_zero(self) -> bool:
        return not self._nonzero()

    @property
    def valuation(self) -> int:
        nz = self._nonzero()
        return int(nz[0]) if nz else 0

    @property
    def degree(self) -> int:
        nz = self._nonzero()
        return int(nz[-1]) if nz else 0

    def coefficient(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __call__(self, z):
        if self.evaluator is not None:
            return self.evaluator(np.asarray(z, dtype=complex))
        if self.exact:
            if np.ndim(z) == 0:
                acc = 0
                for a in reversed(self.coeffs):
                    acc = acc * z + a
                return acc
            return kern.horner(np.asarray(self.coeffs, dtype=complex), np.asarray(z, dtype=complex))
        z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
        out = kern.horner(self.coeffs, z_arr)
        return out[0] if np.ndim(z) == 0 else out.reshape(np.shape(z))

    def partial_sums(self, z):
        """S_j(z) for j = 0..degree."""
        d = self.degree
        if self.exact:
            sums, acc, p = [], 0, 1
            for a in self.coeffs[: d + 1]:
                acc = acc + a * p
                sums.append(acc)
                p = p * z
            return sums
        z = complex(z)
        k = np.arange(d + 1)
        terms = self.coeffs[: d + 1] * (z ** k if z != 1 else 1.0)
        return np.cumsum(terms)

    def __add__(self, other):
        if not isinstance(other, ComplexPolynomial):
            return NotImplemented
        if self.exact and other.exact:
            n = max(len(self.coeffs), len(other.coeffs))
            return ComplexPolynomial(tuple(self.coefficient(k) + other.coefficient(k) for k in range(n)))
        a, b = np.asarray(self.coeffs, dtype=complex), np.asarray(other.coeffs, dtype=complex)
        n = max(a.size, b.size)
        c = np.zeros(n, dtype=complex)
        c[: a.size] += a
        c[: b.size] += b
        ev = None
        if self.evaluator is not None or other.evaluator is not None:
            def ev(z, p=self, q=other):
                return p(z) + q(z)
        return ComplexPolynomial(c, ev)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if self.exact and isinstance(c, (int, Fraction)):
            return ComplexPolynomial(tuple(c * a for a in self.coeffs))
        ev = None if self.evaluator is None else (lambda z, f=self.evaluator: c * f(z))
        return ComplexPolynomial(np.asarray(self.coeffs, dtype=complex) * c, ev)

    def to_json(self):
        c = np.asarray(self.coeffs, dtype=complex)
        return {"valuation": self.valuation, "degree": self.degree,
                "coeffs_re": c.real.tolist(), "coeffs_im": c.imag.tolist()}


def _log_power(z, val):
    """val * Log z, with Log 0 = -inf handled for val = 0."""
    if val == 0:
        return np.zeros(z.shape, dtype=complex)
    with np.errstate(divide="ignore"):
        return val * np.log(np.abs(z)) + 1j * (val * np.angle(z))


@dataclass
class _ArnoldiBasis:
    """Orthonormal basis z^val p_k(z), k <= deg, on the sample set."""

    val: int
    log_norm: float
    H: np.ndarray
    coef: np.ndarray

    def evaluate(self, z, c):
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        deg = len(c) - 1
        W = np.zeros((z.size, deg + 1), dtype=complex)
        W[:, 0] = np.exp(_log_power(z, self.val) - self.log_norm)
        for k in range(deg):
            v = z * W[:, k] - W[:, : k + 1] @ self.H[: k + 1, k]
            W[:, k + 1] = v / self.H[k + 1, k]
        return (W @ c).reshape(shape)


def _arnoldi(z, val, deg):
    m = z.size
    lp = _log_power(z, val)
    shift = float(np.max(lp.real))
    w = np.exp(lp - shift)
    nrm = np.linalg.norm(w) / math.sqrt(m)
    if nrm == 0:
        raise ConditioningError("weight vanishes on every sample")
    log_norm = shift + math.log(nrm)
    Q = np.zeros((m, deg + 1), dtype=complex)
    H = np.zeros((deg + 2, deg + 1), dtype=complex)
    coef = np.zeros((deg + 1, deg + 1), dtype=complex)
    Q[:, 0] = w / nrm
    coef[0, 0] = math.exp(-log_norm) if -log_norm < 700 else math.inf
    for k in range(deg):
        v = z * Q[:, k]
        c = np.zeros(deg + 1, dtype=complex)
        c[1:] = coef[k, :-1]
        for _ in range(2):
            h = Q[:, : k + 1].conj().T @ v / m
            v = v - Q[:, : k + 1] @ h
            c = c - h @ coef[: k + 1]
            H[: k + 1, k] += h
        hn = np.linalg.norm(v) / math.sqrt(m)
        if not hn > 1e-13:
            raise ConditioningError(f"Arnoldi breakdown at degree {k + 1}: subdiagonal {hn:.3g}")
        H[k + 1, k] = hn
        Q[:, k + 1] = v / hn
        coef[k + 1] = c / hn
    return Q, _ArnoldiBasis(val, log_norm, H, coef)


def _lawson(Q, f):
    """Discrete minimax by Lawson's reweighted least squares, keeping the best iterate."""
    m = Q.shape[0]
    wts = np.full(m, 1.0 / m)
    floor = ROUNDOFF_FLOOR * max(1.0, float(np.max(np.abs(f))))
    best, prev = None, None
    for _ in range(LAWSON_MAX_ITER):
        sw = np.sqrt(wts)
        c, *_ = np.linalg.lstsq(sw[:, None] * Q, sw * f, rcond=None)
        r = np.abs(Q @ c - f)
        e = float(r.max())
        if best is None or e < best[0]:
            best = (e, c, r)
        if e <= floor or (prev is not None and abs(prev - e) <= LAWSON_RTOL * e):
            break
        prev = e
        wts = wts * r
        s = wts.sum()
        if not s > 0:
            break
        wts = wts / s
    return best[1], best[2]


@dataclass
class FitResult:
    Q: ComplexPolynomial
    n: int
    exp: RationalExponent
    sup_residual: float
    residuals: np.ndarray
    samples: np.ndarray
    _basis: Optional[_ArnoldiBasis] = field(default=None, repr=False)
    _c: Optional[np.ndarray] = field(default=None, repr=False)

    def weighted_values(self, z):
        """z^(n sigma) Q(z), evaluated stably."""
        z = np.asarray(z, dtype=complex)
        if self._basis is None:
            return np.zeros(z.shape, dtype=complex)
        return self._basis.evaluate(z, self._c)

    @property
    def weighted(self) -> ComplexPolynomial:
        """z^(n sigma) Q as a polynomial, with the stable evaluator attached."""
        val = self.n * self.exp.sigma
        q = np.asarray(self.Q.coeffs, dtype=complex)
        return ComplexPolynomial(ComplexPolynomial.from_values(q, val).coeffs, self.weighted_values)

    def to_json(self):
        return {"n": self.n, "sigma": self.exp.sigma, "tau": self.exp.tau,
                "sup_residual": self.sup_residual, "Q": self.Q.to_json()}


def _target_values(target, z):
    if isinstance(target, ComplexPolynomial) or callable(target):
        vals = target(z)
    else:
        vals = target
    return np.broadcast_to(np.asarray(vals, dtype=complex), z.shape).copy()


def weighted_fit(samples, exp: RationalExponent, n: int, target, weights=None) -> FitResult:
    """Minimise max |z^(n sigma) Q(z) - target(z)| over the samples, deg Q <= n tau.

    ``weights`` (positive, one per sample) turns this into the weighted
    minimax problem max w |z^(n sigma) Q - target|; ``sup_residual`` is
    always the unweighted maximum.
    """
    z = np.asarray(samples, dtype=complex).ravel()
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    deg = n * exp.tau
    if z.size < 4 * (deg + 1):
        raise ConfigurationError(f"need at least {4 * (deg + 1)} samples for degree {deg}, got {z.size}")
    if np.unique(np.round(z, 14)).size < deg + 1:
        raise ConditioningError("fewer distinct samples than unknowns")
    f = _target_values(target, z)
    if not np.any(f):
        return FitResult(ComplexPolynomial(np.zeros(deg + 1)), n, exp, 0.0, np.zeros(z.size), z)
    Q, basis = _arnoldi(z, n * exp.sigma, deg)
    if weights is None:
        c, r = _lawson(Q, f)
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.shape != z.shape or np.any(w <= 0):
            raise ConfigurationError("weights must be positive, one per sample")
        c, _ = _lawson(w[:, None] * Q, w * f)
        r = np.abs(Q @ c - f)
    mono = c @ basis.coef
    return FitResult(ComplexPolynomial(mono), n, exp, float(r.max()), r, z, basis, c)


@dataclass(frozen=True)
class EnvelopeReport:
    probes: tuple
    lhs: tuple
    rhs: tuple
    passed: tuple
    k_norm: float

    @property
    def all_passed(self) -> bool:
        return all(self.passed)


def bernstein_envelope_check(fit: FitResult, family: CompactFamily, exp: RationalExponent, probes,
                             M: Optional[float] = None, k_norm: Optional[float] = None,
                             k_samples: int = 2048) -> EnvelopeReport:
    """Check |z^(n sigma) Q(z)| <= (|z|^sigma M^tau)^n * sup_K |z^(n sigma) Q| at each probe."""
    from .potential import m_k

    if M is None:
        M = m_k(family)
    if k_norm is None:
        k_norm = float(np.max(np.abs(fit.weighted_values(family.samples(k_samples)))))
    p = np.asarray(probes, dtype=complex).ravel()
    if np.any(np.abs(p) > 1 + 1e-12):
        raise ConfigurationError("probes must lie in the closed unit disc")
    lhs = np.abs(fit.weighted_values(p))
    rhs = (np.abs(p) ** exp.sigma * M ** exp.tau) ** fit.n * k_norm * (1 + 1e-6)
    return EnvelopeReport(tuple(p), tuple(lhs), tuple(rhs), tuple(bool(x) for x in lhs <= rhs), k_norm)


def scaled_fit(fit: FitResult, factor: complex) -> FitResult:
    """The same fit with Q multiplied by ``factor``."""
    c = None if fit._c is None else fit._c * factor
    return FitResult(fit.Q.scale(factor), fit.n, fit.exp, fit.sup_residual * abs(factor),
                     fit.residuals * abs(factor), fit.samples, fit._basis, c)


def dense_residual(fit: FitResult, family: CompactFamily, target, factor: int = 2) -> float:
    """Sup residual on a ``factor`` times denser K sample, to expose discretisation slack."""
    z = family.samples(factor * fit.samples.size)
    return float(np.max(np.abs(fit.weighted_values(z) - _target_values(target, z))))


def convergence_scan(family: CompactFamily, exp: RationalExponent, target, n_list: Sequence[int],
                     samples: int = 512, threads: Optional[int] = None):
    """Rows (n, sup_residual), one per n; fits run concurrently but rows keep the input order."""
    ns = list(n_list)
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigurationError("n_list must be increasing")
    z = family.samples(samples)

    def one(n):
        return (n, weighted_fit(z, exp, n, target).sup_residual)
    return ordered_map(one, ns, threads)


def scan_to_csv(rows) -> str:
    lines = ["n,sup_residual"]
    lines += [f"{n},{r:.12g}" for n, r in rows]
    return "\n".join(lines) + "\n"
