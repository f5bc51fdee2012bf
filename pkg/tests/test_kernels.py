import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wpa import _kernels
from wpa._parallel import ordered_map, thread_count

NP = _kernels.numpy_kernels
NB = _kernels.numba_kernels
pytestmark = pytest.mark.skipif(NB is None, reason="numba not installed")

rng = np.random.default_rng(2024)
Z = rng.uniform(-4, 6, 400) + 1j * rng.uniform(-4, 4, 400)
CIRCLE = np.exp(2j * math.pi * rng.uniform(size=300))
SQUARE = np.array([2 + 0j, 3 + 0j, 3 + 1j, 2 + 1j])


def close(a, b, rtol=1e-12):
    a, b = np.asarray(a), np.asarray(b)
    return np.all(np.abs(a - b) <= rtol * np.maximum(1, np.abs(b)))


def test_poisson_and_density():
    for z in (0j, 0.3 + 0.2j, -0.7j):
        assert close(NB.poisson(z, CIRCLE), NP.poisson(z, CIRCLE))
    assert close(NB.pv_density(CIRCLE, 0j, 0.4 - 0.1j, 0.7), NP.pv_density(CIRCLE, 0j, 0.4 - 0.1j, 0.7))


def test_horner():
    c = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    zz = 0.9 * CIRCLE
    assert close(NB.horner(c, zz), NP.horner(c, zz), 1e-11)


@given(st.integers(1, 5), st.integers(1, 5), st.floats(1e-3, 2.0))
def test_sublevel(s, t, level):
    assert np.array_equal(NB.sublevel(Z, s, t, level), NP.sublevel(Z, s, t, level))


@given(st.floats(0.1, 6.2))
def test_arc_psi(theta0):
    c, s = math.cos(theta0 / 2), math.sin(theta0 / 4)
    assert close(NB.arc_psi(Z, c, s), NP.arc_psi(Z, c, s), 1e-10)


def test_joukowski_inverse():
    assert close(NB.joukowski_inverse(Z), NP.joukowski_inverse(Z), 1e-12)


def test_polyline_kernels():
    assert close(NB.polyline_distance(Z, SQUARE), NP.polyline_distance(Z, SQUARE))
    assert np.array_equal(NB.point_in_polygon(Z, SQUARE), NP.point_in_polygon(Z, SQUARE))


def test_cauchy_polyline():
    zeta = 1.5 * np.exp(-2j * math.pi * np.arange(64) / 64) + 3
    f = np.exp(-2j * math.pi * np.arange(64) / 64)
    far = Z[np.abs(Z - 3) > 1.7]
    assert close(NB.cauchy_polyline(far, zeta, f), NP.cauchy_polyline(far, zeta, f), 1e-10)


def test_env_flag_selects_numpy():
    env = dict(os.environ, WPA_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from wpa import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_ordered_map_keeps_order(monkeypatch):
    assert ordered_map(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]
    monkeypatch.setenv("WPA_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("WPA_THREADS", "junk")
    assert thread_count() == 1
