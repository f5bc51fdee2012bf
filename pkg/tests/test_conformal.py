import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wpa.acceptance import BUILTIN_MAPS, exterior_grid
from wpa.conformal import (INFINITY, ArcRadial, DiscMoebius, SegmentJoukowski, UserSupplied,
                           boundary_derivative_abs, green_infinity, green_infinity_many, is_infinity,
                           map_forward, map_inverse)
from wpa.errors import ConfigurationError, DegeneracyError, DomainError
from wpa.geometry import Arc, DomainSpec, Segment, TangentDisc, boundary_sample


def test_infinity_sentinel():
    for emap in BUILTIN_MAPS:
        assert map_forward(emap, INFINITY) == 0
        assert is_infinity(map_inverse(emap, 0))


def test_arc_psi_at_zero():
    emap = ArcRadial(math.pi, 0.05)
    assert emap.psi(0)[0] == pytest.approx(-1, abs=1e-14)
    assert map_forward(emap, 0) == pytest.approx(-(math.sin(math.pi / 4) + 0.05), abs=1e-14)


def test_joukowski_pieces():
    emap = SegmentJoukowski(4.0, 0.0)
    assert emap.joukowski(-1)[()] == pytest.approx(1.0)
    assert emap.joukowski(1)[()] == pytest.approx(4.0)
    assert emap.joukowski_inverse(0)[()] == pytest.approx(-1 / 3, abs=1e-15)


def test_disc_inverse():
    assert map_inverse(DiscMoebius(2.0, 1.2), 1) == pytest.approx(3.2)


def test_forward_rejects_interior_and_inverse_rejects_outside_disc():
    with pytest.raises(DomainError):
        map_forward(DiscMoebius(2.0, 1.2), 2.0)
    with pytest.raises(DomainError):
        map_inverse(DiscMoebius(2.0, 1.2), 1.5)
    with pytest.raises(DomainError):
        green_infinity(SegmentJoukowski(4.0, 0.1), 2.0 + 0.01j)


@pytest.mark.parametrize("emap", BUILTIN_MAPS, ids=lambda m: f"{m.kind}")
def test_round_trips(emap):
    z = exterior_grid(emap, 100)
    assert np.max(np.abs(emap.inverse(emap.forward(z)) - z) / np.maximum(1, np.abs(z))) < 1e-10
    r = np.linspace(1e-6, 1, 15)
    t = np.linspace(0, 2 * math.pi, 24, endpoint=False)
    w = (r[:, None] * np.exp(1j * t[None, :])).ravel()
    assert np.max(np.abs(emap.forward(emap.inverse(w)) - w)) < 1e-10


@pytest.mark.parametrize("emap", BUILTIN_MAPS, ids=lambda m: f"{m.kind}")
def test_boundary_modulus_and_green_zero(emap):
    zeta = emap.inverse(np.exp(2j * math.pi * np.arange(64) / 64))
    assert np.max(np.abs(np.abs(emap.forward(zeta)) - 1)) < 1e-10
    assert np.max(green_infinity_many(emap, zeta)) < 1e-9
    assert all(boundary_derivative_abs(emap, z) > 0 for z in zeta)


def test_disc_derivative_is_one_over_rho():
    emap = DiscMoebius(2.0, 1.2)
    for zeta in boundary_sample(DomainSpec.disc(2.0, 1.2), 16):
        assert boundary_derivative_abs(emap, zeta) == pytest.approx(1 / 1.2, rel=1e-12)


@pytest.mark.parametrize("emap", [SegmentJoukowski(4.0, 0.1), ArcRadial(math.pi, 0.05), DiscMoebius(3.0, 1.5)],
                         ids=["segment", "arc", "disc"])
def test_analytic_derivative_matches_difference(emap):
    zeta = emap.inverse(np.exp(2j * math.pi * (np.arange(64) + 0.3) / 64))
    for z in zeta:
        a = boundary_derivative_abs(emap, z)
        fd = boundary_derivative_abs(emap, z, finite_difference=True)
        assert abs(a - fd) <= 1e-6 * max(1, a)


def test_segment_derivative_degenerate_on_slit():
    with pytest.raises(DegeneracyError):
        boundary_derivative_abs(SegmentJoukowski(3.0, 0.0), 1.0)


def test_green_examples():
    assert green_infinity(DomainSpec(TangentDisc(3.0)), -1) == pytest.approx(math.log(2), abs=1e-14)
    assert green_infinity(DomainSpec(Arc(math.pi)), -1) == pytest.approx(0.88137358701954303, abs=1e-12)
    assert green_infinity(DomainSpec(Arc(math.pi)), 2) == pytest.approx(0.8277854153395761, abs=1e-12)
    assert green_infinity(DomainSpec(Segment(3.0)), -1) == pytest.approx(1.7627471740390861, abs=1e-12)


@given(st.floats(1.1, 8), st.floats(0, 2 * math.pi), st.floats(1.001, 30))
def test_disc_green_matches_closed_form(x0, t, scale):
    z = x0 + (x0 - 1) * scale * complex(math.cos(t), math.sin(t))
    g = green_infinity(DomainSpec(TangentDisc(x0)), z)
    assert g == pytest.approx(math.log(abs(z - x0) / (x0 - 1)), abs=1e-12)


@given(st.sampled_from(BUILTIN_MAPS), st.floats(0, 2 * math.pi), st.floats(1e-3, 0.999))
def test_green_positive_outside(emap, t, r):
    z = emap.inverse(np.array([r * complex(math.cos(t), math.sin(t))]))[0]
    assert green_infinity(emap, z) > 0


@given(st.floats(0.3, 6.0), st.floats(0.01, 0.05), st.floats(0, 2 * math.pi))
def test_arc_branch_continuity(theta0, eps, start):
    emap = ArcRadial(theta0, eps)
    # a circle of radius 1.5 around 0 never touches K or G
    t = start + np.linspace(0, 2 * math.pi, 2001)
    z = 1.5 * np.exp(1j * t)
    psi = emap.psi(z)
    step = np.abs(np.diff(z))
    assert np.all(np.abs(np.diff(psi)) < 10 * step)
    assert np.all(np.abs(psi) >= math.sin(theta0 / 4) - 1e-12)


def test_user_supplied_map_tracks_builtin():
    ref = ArcRadial(math.pi, 0.05)
    user = UserSupplied.from_builtin(ref, 512)
    z = exterior_grid(ref, 40)
    far = z[np.abs(ref.forward(z)) < 0.9]
    assert np.max(np.abs(user.forward(far) - ref.forward(far))) < 1e-3
    w = 0.5 * np.exp(1j * np.linspace(0, 6, 7))
    assert np.max(np.abs(user.inverse(w) - ref.inverse(w))) < 1e-3


def test_user_supplied_rejects_wrong_orientation():
    ref = DiscMoebius(3.0, 1.5)
    t = 2 * np.pi * np.arange(64) / 64  # increasing: wrong for an exterior map
    with pytest.raises(ConfigurationError):
        UserSupplied(tuple(ref.inverse(np.exp(-1j * t))), tuple(t))
