"""Independent high-precision oracles used to freeze expected values.

Everything here is deliberately naive: brute-force series at high working
precision, direct formula evaluation, dense quadrature. No code is shared
with the library.
"""

from __future__ import annotations

import mpmath as mp


def psi_mp(b, z, dps: int = 200):
    """Reference psi_b via explicit termwise summation (no hyp0f1 shortcut)."""
    with mp.workdps(dps):
        b = mp.mpf(b)
        z = mp.mpmathify(z)
        total = mp.mpf(0) if z.imag == 0 else mp.mpc(0)
        tiny = mp.mpf(10) ** (-(dps - 10))
        j = 0
        term = 1 / mp.gamma(b)
        while True:
            total += term
            term = term * z / ((j + 1) * (j + b))
            j += 1
            if j > 20 and abs(term) < (abs(total) + 1) * tiny:
                break
            if j > 500000:
                raise RuntimeError("oracle series did not converge")
        return total


def psi_hyp0f1_mp(b, z, dps: int = 120):
    """Cross-check route: psi_b(z) = 0F1(; b; z) / Gamma(b)."""
    with mp.workdps(dps):
        return mp.hyp0f1(mp.mpf(b), mp.mpmathify(z)) / mp.gamma(mp.mpf(b))


def kernel_mp(b, t, x, y, dps: int = 80):
    """Direct transition-density formula y^{b-1} t^{-b} e^{-(x+y)/t} psi_b(xy/t^2)."""
    with mp.workdps(dps):
        b = mp.mpf(b)
        t = mp.mpmathify(t)
        x = mp.mpf(x)
        y = mp.mpf(y)
        z = x * y / t ** 2
        return (y ** (b - 1) / t ** b) * mp.e ** (-(x + y) / t) * psi_mp(b, z, dps)


def kernel_mass_mp(b, t, x, dps: int = 50, upper=None):
    """Quadrature of the transition density over (0, inf), plus atom for b=0."""
    with mp.workdps(dps):
        b = mp.mpf(b)
        t = mp.mpf(t)
        x = mp.mpf(x)
        if b == 0:
            atom = mp.e ** (-x / t)
            if x == 0:
                return atom
            dens = lambda y: (x / t ** 2) * mp.e ** (-(x + y) / t) * psi_mp(2, x * y / t ** 2, dps)
            return atom + mp.quad(dens, [0, x + 40 * t * (1 + mp.sqrt(x / t))])
        dens = lambda y: kernel_mp(b, t, x, y, dps)
        hi = x + 40 * t * (1 + mp.sqrt(x / t)) if upper is None else upper
        return mp.quad(dens, [0, t, hi])


def euclidean_kernel_mp(t, x, y, dps: int = 50):
    with mp.workdps(dps):
        t = mp.mpmathify(t)
        return mp.e ** (-(mp.mpf(x) - mp.mpf(y)) ** 2 / (4 * t)) / mp.sqrt(4 * mp.pi * t)


def transition_cdf_mixture(b, t, x, ys):
    """CDF of the transition law at time t from x, summed as a Poisson mixture.

    The density expands termwise into sum_j Pois_{x/t}(j) Gamma(j+b, scale t),
    which gives the distribution function without touching the library kernel.
    The j = 0 term with b = 0 is the unit mass at the origin.
    """
    import numpy as np
    from scipy import stats

    ys = np.asarray(ys, dtype=float)
    lam = x / t
    j_max = int(lam + 12.0 * lam ** 0.5 + 40)
    out = np.zeros_like(ys)
    for j in range(j_max + 1):
        p = stats.poisson.pmf(j, lam)
        if j + b == 0:
            out = out + p * (ys >= 0.0)
        else:
            out = out + p * stats.gamma.cdf(ys, a=j + b, scale=t)
    return out
