"""The acceptance suite, shared by ``wpa verify`` and tests/test_acceptance.py."""
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .conformal import ArcRadial, DiscMoebius, SegmentJoukowski, green_infinity
from .construction import lemma_construct, pi_partial_sum_at_one_exact, stage_build
from .geometry import Arc, DomainSpec, RationalExponent, Segment, TangentDisc, r_k_alpha
from .potential import (alpha_k, alpha_threshold, harnack_alpha_bound, m_k, poisson_kernel,
                        solynin_bound, solynin_phi)
from .weighted_approx import ComplexPolynomial, convergence_scan, scan_to_csv, weighted_fit


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  [{self.key}] {self.title} ({self.seconds:.2f}s): {self.detail}"

    def to_json(self):
        return {"key": self.key, "title": self.title, "passed": self.passed,
                "detail": self.detail, "seconds": round(self.seconds, 3)}


def _alpha_k_limits():
    rows, ok = [], True
    for x0 in (2.0, 4.0, 9.0):
        t0 = time.perf_counter()
        got = alpha_k(Segment(x0), "limit")
        want = 1 / (math.sqrt(x0) - 1)
        dt = time.perf_counter() - t0
        good = abs(got - want) <= 1e-3 and dt < 5
        ok &= good
        rows.append(f"segment x0={x0:g}: {got:.6f} vs {want:.6f}")
    for th in (math.pi / 2, math.pi, 3 * math.pi / 2):
        t0 = time.perf_counter()
        got = alpha_k(Arc(th), "limit")
        s = math.sin(th / 4)
        want = (1 - s) / (2 * s)
        dt = time.perf_counter() - t0
        good = abs(got - want) <= 1e-3 and dt < 5
        ok &= good
        rows.append(f"arc theta0={th:.4f}: {got:.6f} vs {want:.6f}")
    return ok, "; ".join(rows)


def _disc_threshold():
    rows, ok = [], True
    for x0, rho in ((2.0, 1.2), (3.0, 1.5), (1.5, 0.4)):
        got = alpha_threshold(DiscMoebius(x0, rho), 4096)
        want = (x0 - rho) / (2 * rho)
        ok &= abs(got - want) <= 1e-9
        published = 1 / (2 * x0 - 1)
        rows.append(f"D({x0:g},{rho:g}): {got:.12g} vs {want:.12g} (published disc alpha_K {published:.6g}, not asserted)")
    return ok, "; ".join(rows)


def _m_k():
    ok, rows = True, []
    for x0 in (2.0, 3.0, 5.0):
        got = m_k(TangentDisc(x0), "numeric")
        want = (x0 + 1) / (x0 - 1)
        ok &= abs(got - want) <= 1e-12
        rows.append(f"disc {x0:g}: {abs(got - want):.1e}")
    for x0 in (3.0, 5.0):
        got = m_k(Segment(x0), "numeric")
        want = math.exp(solynin_phi(2 / (x0 - 1)))
        ok &= abs(got - want) <= 1e-6
        rows.append(f"segment {x0:g}: {abs(got - want):.1e}")
    arc = Arc(math.pi)
    got = m_k(arc, "numeric")
    bound = math.exp(solynin_bound(arc, -1))
    ok &= abs(got - (1 + math.sqrt(2))) <= 1e-6 and got <= bound
    rows.append(f"arc pi: {got:.9f} (Solynin {bound:.6f})")
    return ok, "; ".join(rows)


def _solynin_equality():
    K = Segment(3.0)
    emap = SegmentJoukowski(3.0, 0.0)
    g = green_infinity(emap, -1)
    want = solynin_phi(2 / (3.0 - 1))
    ok = abs(g - want) <= 1e-9
    rng = np.random.default_rng(20240601)
    strict = 0
    while strict < 100:
        z = complex(rng.uniform(-2, 6), rng.uniform(0.05, 3) * rng.choice([-1, 1]))
        if green_infinity(emap, z) < solynin_bound(K, z):
            strict += 1
        else:
            ok = False
            break
    return ok, f"g(-1)={g:.12g}, bound={want:.12g}; strict at {strict}/100 off-line points"


def _pi_identities():
    count = 0
    for n in range(1, 13):
        for s in range(1, 5):
            for t in range(1, 5):
                for j in range(s * n, (s + t) * n):
                    pi_partial_sum_at_one_exact(n, s, t, j)  # raises on mismatch
                    count += 1
    return True, f"{count} exact identities"


def _r_root():
    worst = 0.0
    for M in np.linspace(1.05, 40.0, 10):
        for s, t in ((1, 1), (1, 2), (2, 1), (3, 2), (2, 5)):
            r = r_k_alpha(None, RationalExponent(s, t), float(M))
            worst = max(worst, abs(M ** t * r ** s * (1 + r) ** t - 1))
    return worst <= 1e-12, f"max residual {worst:.2e} over 50 combinations"


def _weighted_fit():
    e = RationalExponent(1, 2)
    z = Segment(4.0).samples(512)
    exact = weighted_fit(z, e, 2, ComplexPolynomial(np.array([0, 0, 3, -1]))).sup_residual
    rows = dict(convergence_scan(Segment(4.0), e, ComplexPolynomial.constant(1), [4, 16]))
    ok = exact < 1e-8 and rows[16] < 0.5 * rows[4]
    return ok, f"representable {exact:.1e}; residual n=4 {rows[4]:.3e}, n=16 {rows[16]:.3e}"


def lemma_instance():
    """The Segment x0=3, alpha=1/2, eps=0.1, B=10, N=5 instance on L=[1, 1.15]."""
    K = Segment(3.0)
    e = RationalExponent(1, 2)
    M = m_k(K)
    r = 0.9 * r_k_alpha(K, e, M)
    L = np.linspace(1.0, 1.15, 64) + 0j
    return lemma_construct(K, e, 0.1, ComplexPolynomial.constant(1), 5, 10.0, r, L, M=M)


def _lemma():
    t0 = time.perf_counter()
    P, cert = lemma_instance()
    dt = time.perf_counter() - t0
    ok = cert.passed and cert.reverified and dt < 60
    return ok, (f"n={cert.n_used}, bound1={cert.bound1:.4g}, bound2={cert.bound2:.4g}, "
                f"log10 min partial={cert.log10_min_partial_real_abs:.2f}, reverified={cert.reverified}, {dt:.1f}s")


STAGE_TARGETS = (ComplexPolynomial.constant(1), ComplexPolynomial(np.array([2, -1])))


def _stage_builder():
    K = Segment(3.0)
    e = RationalExponent(1, 2)
    msgs, ok = [], True
    prefix, recs = stage_build(K, e, STAGE_TARGETS, 3, mode="halfspace")
    sums = prefix.real_partial_sums_at_one()
    hs = all(v <= -1 or v >= 0 for v in sums)
    errs = [r.target_error_dense < r.epsilon_n for r in recs]
    ok &= len(recs) == 3 and all(r.failure is None for r in recs) and hs and all(errs)
    msgs.append(f"halfspace: {len(recs)} stages, halfspace={hs}, errors="
                + ",".join(f"{r.target_error_dense:.3g}<{r.epsilon_n:g}" for r in recs))
    prefix, recs = stage_build(K, e, STAGE_TARGETS, 3, mode="growing_coeffs")
    mins = []
    for n, P in enumerate(prefix.stages, start=1):
        lc = math.log10(float(np.min(np.abs(P.coefficient_mantissas())))) + P.log_scale / math.log(10)
        mins.append(lc)
        ok &= lc >= math.log10(n)
    ok &= len(prefix.stages) == 3
    msgs.append("growing: log10 min|a_k| per stage " + ",".join(f"{v:.1f}" for v in mins))
    return ok, "; ".join(msgs)


def _monotonicity():
    disc = [alpha_threshold(DomainSpec(TangentDisc(2.0), rho - 1.0), 1024) for rho in (1.1, 1.3, 1.6)]
    seg = [alpha_threshold(DomainSpec(Segment(4.0), e), 1024) for e in (0.05, 0.1, 0.2)]
    ok = all(a - b > 1e-6 for a, b in zip(disc, disc[1:])) and all(a - b > 1e-6 for a, b in zip(seg, seg[1:]))
    return ok, "disc " + ", ".join(f"{v:.6f}" for v in disc) + "; segment " + ", ".join(f"{v:.6f}" for v in seg)


BUILTIN_MAPS = (DiscMoebius(2.0, 1.2), DiscMoebius(3.0, 1.5), SegmentJoukowski(4.0, 0.1),
                SegmentJoukowski(3.0, 0.05), ArcRadial(math.pi, 0.05), ArcRadial(math.pi / 2, 0.1),
                ArcRadial(1.5 * math.pi, 0.02))


def exterior_grid(emap, count=100):
    """``count`` deterministic exterior points of a map's domain."""
    xs = np.linspace(-4, 8, 41)
    ys = np.linspace(-5, 5, 37)
    z = (xs[:, None] + 1j * ys[None, :]).ravel()
    w = emap.forward(z)
    z = z[np.abs(w) < 1 - 1e-6]
    idx = np.linspace(0, z.size - 1, count).astype(int)
    return z[idx]


def _infrastructure():
    worst_rt = 0.0
    for emap in BUILTIN_MAPS:
        z = exterior_grid(emap)
        back = emap.inverse(emap.forward(z))
        worst_rt = max(worst_rt, float(np.max(np.abs(back - z) / np.maximum(1, np.abs(z)))))
    zeta = np.exp(2j * math.pi * np.arange(4096) / 4096)
    norm = sum(poisson_kernel(0.3 + 0.2j, w) for w in zeta) * 2 * math.pi / 4096
    worst_h = max(abs(harnack_alpha_bound(m) - alpha_threshold(m)) for m in BUILTIN_MAPS)
    args = (Segment(4.0), RationalExponent(1, 2), ComplexPolynomial.constant(1), [2, 4, 6, 8])
    one = scan_to_csv(convergence_scan(*args, threads=1)).encode()
    many = scan_to_csv(convergence_scan(*args, threads=4)).encode()
    ok = worst_rt < 1e-10 and abs(norm - 1) < 1e-8 and worst_h < 1e-9 and one == many
    return ok, (f"round-trip {worst_rt:.1e}; Poisson mass {abs(norm - 1):.1e}; "
                f"harnack vs threshold {worst_h:.1e}; thread-identical={one == many}")


CRITERIA: Dict[str, tuple] = {
    "alpha-k-limits": ("alpha_K shrinking-domain limits match the segment and arc closed forms", _alpha_k_limits),
    "disc-threshold": ("open-disc threshold equals (x0-rho)/(2 rho)", _disc_threshold),
    "m-k": ("M_K closed forms and numeric maxima", _m_k),
    "solynin-equality": ("Solynin equality on the segment line, strict off it", _solynin_equality),
    "pi-identities": ("exact partial sums of the perturbation polynomial", _pi_identities),
    "r-root": ("r(K, alpha) root residuals", _r_root),
    "weighted-fit": ("weighted minimax fits", _weighted_fit),
    "lemma-constructor": ("partial-sum-controlled constructor certificate", _lemma),
    "stage-builder": ("three-stage prefixes in halfspace and growing-coefficient modes", _stage_builder),
    "monotonicity": ("thresholds strictly decrease as domains grow", _monotonicity),
    "infrastructure": ("round-trips, Poisson mass, Harnack agreement, thread determinism", _infrastructure),
}


def run_criterion(key: str) -> CriterionResult:
    title, fn = CRITERIA[key]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported like one
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CriterionResult(key, title, bool(ok), detail, time.perf_counter() - t0)


def run_acceptance(only: Optional[List[str]] = None, echo: Optional[Callable[[str], None]] = None):
    keys = list(CRITERIA) if not only else list(only)
    unknown = [k for k in keys if k not in CRITERIA]
    if unknown:
        raise KeyError(f"unknown criteria: {', '.join(unknown)}")
    results = []
    for k in keys:
        res = run_criterion(k)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
