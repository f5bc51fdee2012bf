import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wpa.acceptance import STAGE_TARGETS, lemma_instance
from wpa.construction import (choose_C, halfspace_ok, lemma_construct, partial_sums_at,
                              pi_partial_sum_at_one_exact, pi_poly, pi_values, stage_build)
from wpa.errors import ConfigurationError, DomainError, InfeasibleError, PrecisionError, ScaleError
from wpa.geometry import RationalExponent, Segment, r_k_alpha
from wpa.potential import m_k
from wpa.weighted_approx import ComplexPolynomial

HALF = RationalExponent(1, 2)
SEG = Segment(3.0)


@pytest.fixture(scope="module")
def lemma():
    return lemma_instance()


@pytest.fixture(scope="module")
def halfspace_build():
    return stage_build(SEG, HALF, STAGE_TARGETS[:2], 2, mode="halfspace")


@pytest.fixture(scope="module")
def growing_build():
    return stage_build(SEG, HALF, STAGE_TARGETS, 3, mode="growing_coeffs")


def test_pi_poly_examples():
    assert pi_poly(1, 1, 1, 1).coeffs == (0, 1, -1)
    p = pi_poly(1, 2, 2, 3)
    assert p.coeffs[2:] == (2, -6, 6, -2)
    assert p.valuation == 2 and p.degree == 5


@given(st.integers(1, 12), st.integers(1, 4), st.integers(1, 4), st.integers(1, 5))
def test_pi_coefficients_at_least_c_to_n(n, s, t, C):
    P = pi_poly(n, C, s, t)
    nz = [abs(a) for a in P.coeffs if a != 0]
    assert min(nz) >= C ** n
    assert P.valuation == s * n and P.degree == (s + t) * n


@given(st.integers(1, 12), st.integers(1, 4), st.integers(1, 4), st.floats(0.5, 3.0))
def test_pi_log_domain_matches_direct(n, s, t, C):
    P = pi_poly(n, C, s, t)
    rng = np.random.default_rng(n * 100 + s * 10 + t)
    z = rng.uniform(-1.2, 1.2, 50) + 1j * rng.uniform(-1.2, 1.2, 50)
    direct = C ** n * z ** (s * n) * (1 - z) ** (t * n)
    from_coeffs = np.polyval(np.asarray(P.coeffs)[::-1], z)
    scale = np.maximum(np.abs(direct), 1e-300)
    assert np.max(np.abs(pi_values(n, C, s, t, z) - direct) / scale) < 1e-9
    # monomial sums cancel; compare against the largest term, not the value
    terms = np.abs(np.asarray(P.coeffs))[None, :] * np.abs(z[:, None]) ** np.arange(len(P.coeffs))
    assert np.max(np.abs(from_coeffs - direct) / terms.sum(axis=1)) < 1e-12


def test_pi_overflow_is_precision_error():
    with pytest.raises(PrecisionError):
        pi_poly(400, 30.0, 1, 2)


def test_exact_partial_sum_examples():
    assert pi_partial_sum_at_one_exact(1, 1, 1, 1) == 1
    assert pi_partial_sum_at_one_exact(2, 1, 2, 4) == 3
    assert pi_partial_sum_at_one_exact(2, 1, 2, 3) == -3
    with pytest.raises(DomainError):
        pi_partial_sum_at_one_exact(2, 1, 2, 6)


@given(st.integers(1, 12), st.integers(1, 4), st.integers(1, 4), st.data())
def test_partial_sum_identity(n, s, t, data):
    j = data.draw(st.integers(s * n, (s + t) * n - 1))
    direct = sum((-1) ** k * math.comb(t * n, k) for k in range(j - s * n + 1))
    assert pi_partial_sum_at_one_exact(n, s, t, j) == direct
    assert pi_poly(n, 1, s, t).partial_sums(1)[j] == direct


def test_partial_sums_at_examples():
    assert partial_sums_at(ComplexPolynomial((0, 1, -1)), 1) == [0, 1, 0]
    assert partial_sums_at(pi_poly(2, 1, 1, 2), 1) == [0, 0, 1, -3, 3, -1, 0]


def test_choose_c_example():
    L = np.array([(1 + math.sqrt(1 - 0.4)) / 2 + 0j])  # |z||1-z| = 0.1 exactly
    assert choose_C(2.0, 1, 1, 0.2, L) == pytest.approx(2.8867513459481289, rel=1e-12)


def test_choose_c_infeasible_at_root():
    M = m_k(SEG)
    with pytest.raises(InfeasibleError):
        choose_C(M, 1, 2, r_k_alpha(SEG, HALF, M), np.array([1.0 + 0j]))


@given(st.floats(1.05, 20), st.integers(1, 3), st.integers(1, 3), st.floats(0.01, 0.99))
def test_choose_c_strict_inequalities(M, s, t, frac):
    e = RationalExponent(s // math.gcd(s, t), t // math.gcd(s, t))
    r = frac * r_k_alpha(None, e, M)
    d = (0.25 * M ** -e.tau / 2 ** e.sigma) ** (1 / e.tau)  # weight product <= M^-tau / 4
    L = np.array([1.0 + 0j, 1.0 + d])
    C = choose_C(M, e.sigma, e.tau, r, L)
    assert C > M ** e.tau
    assert C * r ** e.sigma * (1 + r) ** e.tau < 1
    h = np.abs(L) ** e.sigma * np.abs(1 - L) ** e.tau
    assert np.all(C * h < 1)


def test_lemma_instance_certificate(lemma):
    P, cert = lemma
    assert cert.passed and cert.reverified and cert.lower_bounds_hold
    assert cert.bound1 < 0.1 and cert.bound2 < 0.1
    assert cert.min_partial_real_abs >= 10 and cert.min_coeff_abs >= 10
    assert P.valuation >= 5 and P.valuation == cert.n_used
    assert cert.n_used == 42


def test_lemma_partial_sum_routes_agree(lemma):
    P, _ = lemma
    closed = P.partial_sum_mantissas("closed")
    alt = P.partial_sum_mantissas("alternating")
    assert np.max(np.abs(closed - alt) / np.maximum(np.abs(closed), 1e-300)) < 1e-9


def test_lemma_zero_target_uses_perturbation_only():
    M = m_k(SEG)
    r = 0.9 * r_k_alpha(SEG, HALF, M)
    L = np.linspace(1.0, 1.15, 64) + 0j
    P, cert = lemma_construct(SEG, HALF, 0.1, ComplexPolynomial.zero(), 1, 0.0, r, L, M=M)
    assert cert.passed
    assert P.fit.Q.is_zero
    C, n = cert.C_used, cert.n_used
    pi_sup = float(np.max(np.abs(pi_values(n, C, 1, 2, L))))
    assert cert.bound1 == pytest.approx(pi_sup, rel=1e-9)


def test_lemma_scale_error_carries_shortfall():
    M = m_k(SEG)
    r = 0.9 * r_k_alpha(SEG, HALF, M)
    L = np.linspace(1.0, 1.15, 64) + 0j
    with pytest.raises(ScaleError) as info:
        lemma_construct(SEG, HALF, 1e-14, ComplexPolynomial.constant(1), 5, 10.0, r, L, M=M, n_tries=2)
    assert info.value.shortfall is not None and not info.value.shortfall.passed


def test_lemma_rejects_radius_at_root():
    M = m_k(SEG)
    with pytest.raises(ConfigurationError):
        lemma_construct(SEG, HALF, 0.1, ComplexPolynomial.constant(1), 5, 10.0,
                        r_k_alpha(SEG, HALF, M), np.array([1.0 + 0j]), M=M)


def test_two_stage_halfspace(halfspace_build):
    prefix, recs = halfspace_build
    assert len(recs) == 2 and all(r.failure is None for r in recs)
    assert all(r.halfspace_ok for r in recs)
    assert halfspace_ok(prefix.real_partial_sums_at_one())
    for r in recs:
        assert r.target_error_dense < 2.0 ** -r.stage


def test_stage_supports_disjoint(halfspace_build, growing_build):
    for prefix, _ in (halfspace_build, growing_build):
        for a, b in zip(prefix.stages, prefix.stages[1:]):
            assert b.valuation > a.degree


def test_growing_coefficients(growing_build):
    prefix, recs = growing_build
    assert len(prefix.stages) == 3
    for n, P in enumerate(prefix.stages, start=1):
        lc = math.log10(float(np.min(np.abs(P.coefficient_mantissas())))) + P.log_scale / math.log(10)
        assert lc >= math.log10(n)


def test_stage_records_serialise(halfspace_build):
    import json
    _, recs = halfspace_build
    json.dumps([r.to_json() for r in recs], allow_nan=True)
