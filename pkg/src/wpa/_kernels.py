"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba versions are explicit loops compiled with ``@njit``; the numpy
versions are vectorised.  Both are always importable as ``numpy_kernels`` and
``numba_kernels`` (the latter is ``None`` when numba is missing) so tests and
the benchmark can compare them.  Module-level names resolve to the active
backend, chosen once at import:

* ``WPA_DISABLE_NUMBA=1`` forces the numpy path.
* otherwise numba is used when importable.
"""
import cmath
import math
import os
from types import SimpleNamespace

import numpy as np

TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# numpy implementations


def _np_poisson(z, zeta):
    z = complex(z)
    zeta = np.asarray(zeta, dtype=complex)
    d = zeta - z
    return (1.0 - abs(z) ** 2) / (TWO_PI * (d.real * d.real + d.imag * d.imag))


def _np_pv_density(w, phi_inf, phi_zero, alpha):
    return (1.0 + alpha) * _np_poisson(phi_inf, w) - alpha * _np_poisson(phi_zero, w)


def _np_horner(coeffs, z):
    coeffs = np.asarray(coeffs, dtype=complex)
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for c in coeffs[::-1]:
        out = out * z + c
    return out


def _np_sublevel(z, sigma, tau, level):
    z = np.asarray(z, dtype=complex)
    return np.abs(z) ** sigma * np.abs(1.0 - z) ** tau < level


def _np_arc_psi(z, c, s):
    z = np.asarray(z, dtype=complex)
    e = complex(c, math.sqrt(max(0.0, 1.0 - c * c)))
    root = np.sqrt(z - e) * np.sqrt(z - e.conjugate())
    a = z - 1.0 + root
    b = z - 1.0 - root
    big = np.where(np.abs(a) >= np.abs(b), a, b) / 2.0
    # the two roots multiply to -s^2 z
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, -s * s * z / big, 0.0)
    tie = np.abs(np.abs(big) - np.abs(small)) <= 1e-12 * np.maximum(1.0, np.abs(big))
    with np.errstate(divide="ignore", invalid="ignore"):
        flip = tie & ((small / z).real > (big / z).real)
    return np.where(flip, small, big)


def _np_joukowski_inverse(u):
    u = np.asarray(u, dtype=complex)
    root = np.sqrt(u - 1.0) * np.sqrt(u + 1.0)
    a = u + root
    b = u - root
    big = np.where(np.abs(a) >= np.abs(b), a, b)
    return 1.0 / big


def _np_polyline_distance(z, verts):
    z = np.asarray(z, dtype=complex).ravel()
    v = np.asarray(verts, dtype=complex)
    a = v
    d = np.roll(v, -1) - v
    dd = np.maximum(np.abs(d) ** 2, 1e-300)
    out = np.full(z.shape, np.inf)
    # chunk over points to bound memory
    for lo in range(0, z.size, 4096):
        zz = z[lo:lo + 4096, None]
        t = ((zz - a) * d.conj()).real / dd
        t = np.clip(t, 0.0, 1.0)
        out[lo:lo + 4096] = np.abs(zz - (a + t * d)).min(axis=1)
    return out


def _np_point_in_polygon(z, verts):
    z = np.asarray(z, dtype=complex).ravel()
    v = np.asarray(verts, dtype=complex)
    x, y = z.real[:, None], z.imag[:, None]
    x1, y1 = v.real, v.imag
    x2, y2 = np.roll(v, -1).real, np.roll(v, -1).imag
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = (y1 > y) != (y2 > y)
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        hits = cross & (x < xint)
    return (hits.sum(axis=1) % 2) == 1


def _np_cauchy_polyline(z, zeta, f):
    """sum over closed polyline edges of int f(s)/(s-z) ds, f linear per edge."""
    z = np.asarray(z, dtype=complex).ravel()
    zeta = np.asarray(zeta, dtype=complex)
    f = np.asarray(f, dtype=complex)
    dz = np.roll(zeta, -1) - zeta
    df = np.roll(f, -1) - f
    out = np.zeros(z.shape, dtype=complex)
    for lo in range(0, z.size, 2048):
        a = zeta[None, :] - z[lo:lo + 2048, None]
        lg = np.log((a + dz) / a)
        out[lo:lo + 2048] = (f * lg + df * (1.0 - a / dz * lg)).sum(axis=1)
    return out


numpy_kernels = SimpleNamespace(
    poisson=_np_poisson,
    pv_density=_np_pv_density,
    horner=_np_horner,
    sublevel=_np_sublevel,
    arc_psi=_np_arc_psi,
    joukowski_inverse=_np_joukowski_inverse,
    polyline_distance=_np_polyline_distance,
    point_in_polygon=_np_point_in_polygon,
    cauchy_polyline=_np_cauchy_polyline,
    name="numpy",
)


# --------------------------------------------------------------------------
# numba implementations


def _build_numba():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return None

    @njit(cache=True)
    def poisson_loop(z, zeta, out):
        num = 1.0 - (z.real * z.real + z.imag * z.imag)
        for i in range(zeta.size):
            d = zeta[i] - z
            out[i] = num / (TWO_PI * (d.real * d.real + d.imag * d.imag))

    @njit(cache=True)
    def pv_loop(w, pinf, p0, alpha, out):
        ninf = 1.0 - (pinf.real * pinf.real + pinf.imag * pinf.imag)
        n0 = 1.0 - (p0.real * p0.real + p0.imag * p0.imag)
        for i in range(w.size):
            a = w[i] - pinf
            b = w[i] - p0
            out[i] = ((1.0 + alpha) * ninf / (a.real * a.real + a.imag * a.imag)
                      - alpha * n0 / (b.real * b.real + b.imag * b.imag)) / TWO_PI

    @njit(cache=True)
    def horner_loop(coeffs, z, out):
        n = coeffs.size
        for i in range(z.size):
            acc = 0j
            for k in range(n - 1, -1, -1):
                acc = acc * z[i] + coeffs[k]
            out[i] = acc

    @njit(cache=True)
    def sublevel_loop(z, sigma, tau, level, out):
        # squared moduli against level^2, integer powers by repeated products
        lev2 = level * level
        for i in range(z.size):
            x, y = z[i].real, z[i].imag
            a = x * x + y * y
            b = (1.0 - x) * (1.0 - x) + y * y
            h = 1.0
            for _ in range(sigma):
                h *= a
            for _ in range(tau):
                h *= b
            out[i] = h < lev2

    @njit(cache=True)
    def arc_psi_loop(z, c, s, out):
        e = complex(c, math.sqrt(max(0.0, 1.0 - c * c)))
        ec = e.conjugate()
        for i in range(z.size):
            zi = z[i]
            root = cmath.sqrt(zi - e) * cmath.sqrt(zi - ec)
            a = zi - 1.0 + root
            b = zi - 1.0 - root
            big = (a if abs(a) >= abs(b) else b) / 2.0
            small = -s * s * zi / big if big != 0 else 0j
            res = big
            if abs(abs(big) - abs(small)) <= 1e-12 * max(1.0, abs(big)):
                if (small / zi).real > (big / zi).real:
                    res = small
            out[i] = res

    @njit(cache=True)
    def jinv_loop(u, out):
        for i in range(u.size):
            root = cmath.sqrt(u[i] - 1.0) * cmath.sqrt(u[i] + 1.0)
            a = u[i] + root
            b = u[i] - root
            out[i] = 1.0 / (a if abs(a) >= abs(b) else b)

    @njit(cache=True)
    def polyline_loop(z, v, out):
        n = v.size
        for i in range(z.size):
            best = np.inf
            for k in range(n):
                a = v[k]
                d = v[(k + 1) % n] - a
                dd = d.real * d.real + d.imag * d.imag
                if dd < 1e-300:
                    dd = 1e-300
                t = ((z[i] - a) * d.conjugate()).real / dd
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                dist = abs(z[i] - (a + t * d))
                if dist < best:
                    best = dist
            out[i] = best

    @njit(cache=True)
    def pip_loop(z, v, out):
        n = v.size
        for i in range(z.size):
            x = z[i].real
            y = z[i].imag
            inside = False
            for k in range(n):
                x1 = v[k].real
                y1 = v[k].imag
                x2 = v[(k + 1) % n].real
                y2 = v[(k + 1) % n].imag
                if (y1 > y) != (y2 > y):
                    xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                    if x < xint:
                        inside = not inside
            out[i] = inside

    @njit(cache=True)
    def cauchy_loop(z, zeta, f, out):
        n = zeta.size
        for i in range(z.size):
            acc = 0j
            for k in range(n):
                k1 = (k + 1) % n
                dz = zeta[k1] - zeta[k]
                df = f[k1] - f[k]
                a = zeta[k] - z[i]
                lg = cmath.log((a + dz) / a)
                acc += f[k] * lg + df * (1.0 - a / dz * lg)
            out[i] = acc

    def _c(x):
        return np.ascontiguousarray(np.asarray(x, dtype=complex).ravel())

    def poisson(z, zeta):
        zeta_arr = np.asarray(zeta, dtype=complex)
        out = np.empty(zeta_arr.size)
        poisson_loop(complex(z), _c(zeta_arr), out)
        return out.reshape(zeta_arr.shape)

    def pv_density(w, phi_inf, phi_zero, alpha):
        w_arr = np.asarray(w, dtype=complex)
        out = np.empty(w_arr.size)
        pv_loop(_c(w_arr), complex(phi_inf), complex(phi_zero), float(alpha), out)
        return out.reshape(w_arr.shape)

    def horner(coeffs, z):
        z_arr = np.asarray(z, dtype=complex)
        out = np.empty(z_arr.size, dtype=complex)
        horner_loop(_c(coeffs), _c(z_arr), out)
        return out.reshape(z_arr.shape)

    def sublevel(z, sigma, tau, level):
        z_arr = np.asarray(z, dtype=complex)
        out = np.empty(z_arr.size, dtype=np.bool_)
        sublevel_loop(_c(z_arr), int(sigma), int(tau), float(level), out)
        return out.reshape(z_arr.shape)

    def arc_psi(z, c, s):
        z_arr = np.asarray(z, dtype=complex)
        out = np.empty(z_arr.size, dtype=complex)
        arc_psi_loop(_c(z_arr), float(c), float(s), out)
        return out.reshape(z_arr.shape)

    def joukowski_inverse(u):
        u_arr = np.asarray(u, dtype=complex)
        out = np.empty(u_arr.size, dtype=complex)
        jinv_loop(_c(u_arr), out)
        return out.reshape(u_arr.shape)

    def polyline_distance(z, verts):
        z_arr = _c(z)
        out = np.empty(z_arr.size)
        polyline_loop(z_arr, _c(verts), out)
        return out

    def point_in_polygon(z, verts):
        z_arr = _c(z)
        out = np.empty(z_arr.size, dtype=np.bool_)
        pip_loop(z_arr, _c(verts), out)
        return out

    def cauchy_polyline(z, zeta, f):
        z_arr = _c(z)
        out = np.empty(z_arr.size, dtype=complex)
        cauchy_loop(z_arr, _c(zeta), _c(f), out)
        return out

    return SimpleNamespace(
        poisson=poisson,
        pv_density=pv_density,
        horner=horner,
        sublevel=sublevel,
        arc_psi=arc_psi,
        joukowski_inverse=joukowski_inverse,
        polyline_distance=polyline_distance,
        point_in_polygon=point_in_polygon,
        cauchy_polyline=cauchy_polyline,
        name="numba",
    )


numba_kernels = _build_numba()


def _select():
    if os.environ.get("WPA_DISABLE_NUMBA", "").strip() not in ("", "0") or numba_kernels is None:
        return numpy_kernels
    return numba_kernels


active = _select()
BACKEND = active.name

poisson = active.poisson
pv_density = active.pv_density
horner = active.horner
sublevel = active.sublevel
arc_psi = active.arc_psi
joukowski_inverse = active.joukowski_inverse
polyline_distance = active.polyline_distance
point_in_polygon = active.point_in_polygon
cauchy_polyline = active.cauchy_polyline
