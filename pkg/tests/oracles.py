"""Independent reference implementations used as test oracles.

None of these call into :mod:`slowlight`. They work in cyclic MHz units
(everything divided by 2 pi) and, where precision matters, in mpmath.
"""

from __future__ import annotations

import math

import mpmath as mp

mp.mp.dps = 50


def reflection_mhz(f, f10, anharm, Gamma10, gamma10, gamma20=0.0, rabi=0.0, fc=None):
    """Dressed-state reflection with every argument in cyclic MHz."""
    f, f10, anharm = mp.mpf(f), mp.mpf(f10), mp.mpf(anharm)
    f21 = f10 - anharm
    fc = f21 if fc is None else mp.mpf(fc)
    delta = f - f10
    den = 2 * (mp.mpf(gamma10) - 1j * delta)
    if rabi:
        den += mp.mpf(rabi) ** 2 / (2 * mp.mpf(gamma20) - 2j * (delta + fc - f21))
    return -mp.mpf(Gamma10) / den


def resonant_t_mhz(Gamma10, gamma10, gamma20, rabi):
    """Closed-form resonant transmission with resonant control (cyclic MHz)."""
    return 1 - (Gamma10 / (2 * gamma10)) / (1 + rabi**2 / (4 * gamma20 * gamma10))


def star(a, b):
    """Redheffer composition of two reciprocal two-ports ``(r_left, t, r_right)``."""
    ra_l, ta, ra_r = a
    rb_l, tb, rb_r = b
    loop = 1 - ra_r * rb_l
    return (ra_l + ta * ta * rb_l / loop, ta * tb / loop, rb_r + tb * tb * ra_r / loop)


def chain_s21_scattering(reflections, phi):
    """Chain transmission by multiple-scattering composition (no transfer matrices).

    ``reflections`` are per-qubit ``r``; neighbouring qubits are joined by a
    line of phase ``phi``.
    """
    seg = (mp.mpc(0), mp.exp(1j * mp.mpf(phi)), mp.mpc(0))
    total = None
    for r in reflections:
        r = mp.mpc(r)
        q = (r, 1 + r, r)
        total = q if total is None else star(star(total, seg), q)
    return total


def bloch_kd(r, phi):
    """``kd`` from ``cos kd = cos phi + i r/(1+r) sin phi`` with Im(kd) >= 0, in mpmath."""
    r = mp.mpc(r)
    phi = mp.mpf(phi)
    z = mp.cos(phi) + 1j * r / (1 + r) * mp.sin(phi)
    kd = mp.acos(z)
    if mp.im(kd) < 0:
        kd = -kd
    return kd


def airy_extrema(rho1, rho2):
    """Max and min of the two-mirror transmission magnitude."""
    tau = math.sqrt((1 - rho1**2) * (1 - rho2**2))
    return tau / (1 - rho1 * rho2), tau / (1 + rho1 * rho2)


def butterworth_gain_db(f, cutoff, order, fs):
    """Digital Butterworth (bilinear, prewarped) magnitude response in dB."""
    warp = math.tan(math.pi * f / fs) / math.tan(math.pi * cutoff / fs)
    return -10 * math.log10(1 + warp ** (2 * order))


def eit_delay_bare(N, spacing, v_ph, Gamma10, Omega_c):
    """Line traversal plus textbook EIT delay, angular rates in rad/s."""
    return (N - 1) * spacing * (1 / v_ph + 2 * Gamma10 / (spacing * Omega_c**2))
