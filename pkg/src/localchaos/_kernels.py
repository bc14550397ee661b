"""Compiled inner loops: potentials, stability entries and fixed-step RK4.

Everything here works on plain floats and float64 arrays so it can be
jitted by numba. Model parameters travel as a packed vector::

    par = [mass, m_e, m_j, r_j, omega_j, delta_t, rho, theta]

The public modules wrap these functions; nothing here validates input.
"""

import math

import numpy as np
from numba import njit

KIND_TOY = 0
KIND_TODA = 1
KIND_HARMONIC = 2
KIND_KEPLER = 3
KIND_THREE_BODY = 4

IND_LYAPUNOV = 0
IND_GEM = 1

# G * M_sun in AU^3 / yr^2
GM = 4.0 * math.pi**2
COLLISION_GUARD = 1e-6

STATUS_OK = 0
STATUS_DOMAIN = 1


@njit(cache=True)
def potential(kind, par, x, y, t):
    """Return (status, V, gx, gy, hxx, hxy, hyy) at (x, y, t)."""
    if kind == KIND_TODA:
        x2 = x * x
        y2 = y * y
        v = 0.5 * (x2 + y2) + x2 * y - y2 * y / 3.0 + 1.5 * x2 * x2 + 0.5 * y2 * y2
        gx = x + 2.0 * x * y + 6.0 * x2 * x
        gy = y + x2 - y2 + 2.0 * y2 * y
        return STATUS_OK, v, gx, gy, 1.0 + 2.0 * y + 18.0 * x2, 2.0 * x, 1.0 - 2.0 * y + 6.0 * y2

    if kind == KIND_HARMONIC:
        return STATUS_OK, 0.5 * (x * x + y * y), x, y, 1.0, 0.0, 1.0

    if kind == KIND_KEPLER or kind == KIND_THREE_BODY:
        m_e = par[1]
        r2 = x * x + y * y
        r = math.sqrt(r2)
        if not r >= COLLISION_GUARD:
            return STATUS_DOMAIN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        k = GM * m_e
        ir3 = 1.0 / (r2 * r)
        ir5 = ir3 / r2
        v = -k / r
        gx = k * x * ir3
        gy = k * y * ir3
        hxx = k * (ir3 - 3.0 * x * x * ir5)
        hxy = -3.0 * k * x * y * ir5
        hyy = k * (ir3 - 3.0 * y * y * ir5)

        m_j = par[2]
        if kind == KIND_THREE_BODY and m_j != 0.0:
            r_j = par[3]
            w = par[4]
            dx = x - r_j * math.cos(w * t)
            dy = y - r_j * math.sin(w * t)
            d2 = dx * dx + dy * dy
            d = math.sqrt(d2)
            if not d >= COLLISION_GUARD:
                return STATUS_DOMAIN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
            kj = GM * m_e * m_j
            id3 = 1.0 / (d2 * d)
            id5 = id3 / d2
            v += 0.5 * m_j * r_j * r_j * w * w - GM * m_j / r_j - kj / d
            gx += kj * dx * id3
            gy += kj * dy * id3
            hxx += kj * (id3 - 3.0 * dx * dx * id5)
            hxy -= 3.0 * kj * dx * dy * id5
            hyy += kj * (id3 - 3.0 * dy * dy * id5)
        return STATUS_OK, v, gx, gy, hxx, hxy, hyy

    return STATUS_DOMAIN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0


@njit(cache=True)
def stability_entries(indicator, mass, energy, eps_turn, v, gx, gy, hxx, hxy, hyy):
    """Return (valid, a, b, c) for the symmetric matrix N = [[a, b], [b, c]]."""
    if indicator == IND_GEM:
        gap = energy - v
        if not gap >= eps_turn:
            return False, 0.0, 0.0, 0.0
        f = 1.5 / gap
        return (
            True,
            -(f * gx * gx + hxx) / mass,
            -(f * gx * gy + hxy) / mass,
            -(f * gy * gy + hyy) / mass,
        )
    return True, -hxx / mass, -hxy / mass, -hyy / mass


@njit(cache=True)
def sym_eigenvalues(a, b, c):
    """Eigenvalues (lo, hi) of [[a, b], [b, c]]."""
    mean = 0.5 * (a + c)
    rad = math.hypot(0.5 * (a - c), b)
    return mean - rad, mean + rad


@njit(cache=True)
def _phase_rhs(kind, par, t, s, out):
    st, v, gx, gy, hxx, hxy, hyy = potential(kind, par, s[0], s[1], t)
    m = par[0]
    out[0] = s[2] / m
    out[1] = s[3] / m
    out[2] = -gx
    out[3] = -gy
    return st


@njit(cache=True)
def _energy(kind, par, s, t):
    st, v, gx, gy, hxx, hxy, hyy = potential(kind, par, s[0], s[1], t)
    return st, 0.5 * (s[2] * s[2] + s[3] * s[3]) / par[0] + v


@njit(cache=True)
def phase_rk4(kind, par, t0, s0, h, n, out, energy):
    """Classical RK4 on (x, y, px, py).

    Fills ``out[0..k]`` and ``energy[0..k]`` and returns (status, k) where k
    is the index of the last valid sample.
    """
    dim = 4
    s = s0.copy()
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    tmp = np.empty(dim)

    st, e = _energy(kind, par, s, t0)
    if st != STATUS_OK:
        return st, -1
    out[0, :] = s
    energy[0] = e
    for i in range(n):
        t = t0 + i * h
        st = _phase_rhs(kind, par, t, s, k1)
        if st != STATUS_OK:
            return st, i
        for j in range(dim):
            tmp[j] = s[j] + 0.5 * h * k1[j]
        st = _phase_rhs(kind, par, t + 0.5 * h, tmp, k2)
        if st != STATUS_OK:
            return st, i
        for j in range(dim):
            tmp[j] = s[j] + 0.5 * h * k2[j]
        st = _phase_rhs(kind, par, t + 0.5 * h, tmp, k3)
        if st != STATUS_OK:
            return st, i
        for j in range(dim):
            tmp[j] = s[j] + h * k3[j]
        st = _phase_rhs(kind, par, t + h, tmp, k4)
        if st != STATUS_OK:
            return st, i
        for j in range(dim):
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        st, e = _energy(kind, par, s, t0 + (i + 1) * h)
        if st != STATUS_OK:
            return st, i
        out[i + 1, :] = s
        energy[i + 1] = e
    return STATUS_OK, n


@njit(cache=True)
def _deviation_rhs(nmat, z, out):
    out[0] = z[2]
    out[1] = z[3]
    out[2] = nmat[0, 0] * z[0] + nmat[0, 1] * z[1]
    out[3] = nmat[1, 0] * z[0] + nmat[1, 1] * z[1]


@njit(cache=True)
def deviation_rk4(nhalf, z0, h, n, out):
    """RK4 for zeta' = M zeta with N given on the half-step grid.

    ``nhalf[k]`` is N at t0 + k*h/2, shape (2n+1, 2, 2).
    """
    dim = 4
    z = z0.copy()
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    tmp = np.empty(dim)
    out[0, :] = z
    for i in range(n):
        _deviation_rhs(nhalf[2 * i], z, k1)
        for j in range(dim):
            tmp[j] = z[j] + 0.5 * h * k1[j]
        _deviation_rhs(nhalf[2 * i + 1], tmp, k2)
        for j in range(dim):
            tmp[j] = z[j] + 0.5 * h * k2[j]
        _deviation_rhs(nhalf[2 * i + 1], tmp, k3)
        for j in range(dim):
            tmp[j] = z[j] + h * k3[j]
        _deviation_rhs(nhalf[2 * i + 2], tmp, k4)
        for j in range(dim):
            z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        out[i + 1, :] = z


@njit(cache=True)
def _coupled_rhs(kind, par, indicator, energy, eps_turn, t, s, out):
    st, v, gx, gy, hxx, hxy, hyy = potential(kind, par, s[0], s[1], t)
    if st != STATUS_OK:
        return st
    m = par[0]
    valid, a, b, c = stability_entries(indicator, m, energy, eps_turn, v, gx, gy, hxx, hxy, hyy)
    out[0] = s[2] / m
    out[1] = s[3] / m
    out[2] = -gx
    out[3] = -gy
    out[4] = s[6]
    out[5] = s[7]
    out[6] = a * s[4] + b * s[5]
    out[7] = b * s[4] + c * s[5]
    return STATUS_OK


@njit(cache=True)
def _record_sample(kind, par, indicator, e0, eps_turn, t, s, i, out, energy, lam, valid):
    st, v, gx, gy, hxx, hxy, hyy = potential(kind, par, s[0], s[1], t)
    if st != STATUS_OK:
        return st
    m = par[0]
    ok, a, b, c = stability_entries(indicator, m, e0, eps_turn, v, gx, gy, hxx, hxy, hyy)
    out[i, :] = s
    energy[i] = 0.5 * (s[2] * s[2] + s[3] * s[3]) / m + v
    valid[i] = ok
    if ok:
        lo, hi = sym_eigenvalues(a, b, c)
        lam[i, 0] = lo
        lam[i, 1] = hi
    else:
        lam[i, 0] = np.nan
        lam[i, 1] = np.nan
    return STATUS_OK


@njit(cache=True)
def coupled_rk4(kind, par, indicator, e0, eps_turn, t0, s0, h, n, out, energy, lam, valid):
    """RK4 on (x, y, px, py, xi1, xi2, eta1, eta2) with N evaluated at each stage.

    Returns (status, k) like :func:`phase_rk4`.
    """
    dim = 8
    s = s0.copy()
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    tmp = np.empty(dim)

    st = _record_sample(kind, par, indicator, e0, eps_turn, t0, s, 0, out, energy, lam, valid)
    if st != STATUS_OK:
        return st, -1
    for i in range(n):
        t = t0 + i * h
        st = _coupled_rhs(kind, par, indicator, e0, eps_turn, t, s, k1)
        if st != STATUS_OK:
            return st, i
        for j in range(dim):
            tmp[j] = s[j] + 0.5 * h * k1[j]
        st = _coupled_rhs(kind, par, indicator, e0, eps_turn, t + 0.5 * h, tmp, k2)
        if st != STATUS_OK:
            return st, i
        for j in range(dim):
            tmp[j] = s[j] + 0.5 * h * k2[j]
        st = _coupled_rhs(kind, par, indicator, e0, eps_turn, t + 0.5 * h, tmp, k3)
        if st != STATUS_OK:
            return st, i
        for j in range(dim):
            tmp[j] = s[j] + h * k3[j]
        st = _coupled_rhs(kind, par, indicator, e0, eps_turn, t + h, tmp, k4)
        if st != STATUS_OK:
            return st, i
        for j in range(dim):
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        st = _record_sample(
            kind, par, indicator, e0, eps_turn, t0 + (i + 1) * h, s, i + 1, out, energy, lam, valid
        )
        if st != STATUS_OK:
            return st, i
    return STATUS_OK, n
