import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from kimura.errors import DomainError, SectorError
from kimura.specfun import (DEFAULT_REGIME, PsiRegime, log_gamma, psi_asymptotic_log,
                            psi_b, psi_b_prime, psi_log_array, psi_series_log)

from oracles import psi_mp

# Frozen from the 200-digit termwise series oracle (tests/oracles.py); the two
# oracle routes (explicit series, hyp0f1/Gamma) agree to >= 90 digits.
FROZEN = {
    (1.0, 1.0): 2.2795853023360673,
    (0.5, 1.0): 2.1225916201776372,       # equals cosh(2)/sqrt(pi)
    (0.1, 12.5): 527.34104780224260,
    (2.5, 777.0): 5.8047984822970897e+20,
    (1.3, -30.0): -0.13960868317381154,
}
FROZEN_LOGMAG = {
    (1.0, 1.0e4): 196.43252935422348,
    (1.0, 9.0e5): 1892.6736123651215,
}
FROZEN_COMPLEX = {(0.7, 100 + 80j): (19.609716783990013, 1.1397785509232974)}


def test_log_gamma_against_oracle():
    for x in [1e-8, 0.03, 0.5, 1.0, 2.0, 7.3, 171.6, 1e4]:
        want = float(mp.log(mp.gamma(mp.mpf(x))))
        got = log_gamma(x)
        assert got == pytest.approx(want, rel=1e-13, abs=1e-13)


def test_log_gamma_domain():
    for bad in [0.0, -1.5, float("nan"), float("inf")]:
        with pytest.raises(DomainError):
            log_gamma(bad)


def test_psi_at_zero_is_reciprocal_gamma():
    for b in [0.3, 0.5, 1.0, 2.5]:
        assert psi_b(b, 0.0).to_real() == pytest.approx(
            1.0 / math.gamma(b), rel=1e-14)


def test_psi_frozen_values():
    for (b, z), want in FROZEN.items():
        got = psi_b(b, z).to_real(phase_tol=1e-6)
        # the alternating z=-30 series loses ~2 sqrt(30) nats to cancellation
        rel = 1e-9 if z < 0 else 1e-13
        assert got == pytest.approx(want, rel=rel), (b, z)
    for (b, z), want in FROZEN_LOGMAG.items():
        assert psi_b(b, z).log_magnitude == pytest.approx(want, abs=5e-12 * want)
    for (b, z), (lm, ph) in FROZEN_COMPLEX.items():
        v = psi_b(b, z)
        assert v.log_magnitude == pytest.approx(lm, abs=1e-10)
        assert v.phase == pytest.approx(ph, abs=1e-10)


def test_branch_agreement_smoke():
    # dense version lives in the acceptance suite
    X = DEFAULT_REGIME.crossover_radius
    for b in (0.1, 1.0):
        for z in np.geomspace(X / 2, 2 * X, 7):
            lm_s, ph_s = psi_series_log(b, np.array([z]), 0.0)
            lm_a, ph_a = psi_asymptotic_log(b, np.array([z]), 0.0)
            rel = abs(math.expm1(lm_s[0] - lm_a[0]))
            assert rel < 1e-7, (b, z, rel)
            assert ph_s[0] == ph_a[0] == 0.0


def test_recurrence_identity():
    # psi_b(z) = z psi_{b+2}(z) + b psi_{b+1}(z), termwise-exact identity
    for b in (0.1, 0.5, 1.0, 2.5):
        for z in (0.3, 4.0, 150.0, 4e4, 2.0 + 3.0j, (120 + 90j)):
            lhs = psi_b(b, z).to_complex()
            rhs = (complex(z) * psi_b(b + 2, z).to_complex()
                   + b * psi_b(b + 1, z).to_complex())
            assert cmath.isclose(lhs, rhs, rel_tol=1e-11), (b, z)


def test_recurrence_identity_large_z_exponent_space():
    # at z ~ 1e7 both branches are asymptotic; compare in scaled space
    for b in (0.5, 1.0):
        z = 1.2e7
        p0, p1, p2 = psi_b(b, z), psi_b(b + 1, z), psi_b(b + 2, z)
        off = p0.log_magnitude
        lhs = p0.scaled(off)
        rhs = z * p2.scaled(off) + b * p1.scaled(off)
        assert abs(lhs - rhs) < 3e-7 * abs(lhs)


def test_prime_is_shift_and_matches_fd():
    for b in (0.4, 1.7):
        for z in (0.8, 30.0):
            h = 1e-6 * max(z, 1.0)
            fd = (psi_b(b, z + h).to_real() - psi_b(b, z - h).to_real()) / (2 * h)
            assert psi_b_prime(b, z).to_real() == pytest.approx(fd, rel=1e-8)


def test_conjugate_symmetry():
    for b in (0.3, 1.2):
        for z in (5 + 2j, 300 + 400j, 2e6 * cmath.exp(0.7j)):
            v = psi_b(b, z).to_complex()
            w = psi_b(b, z.conjugate()).to_complex()
            assert cmath.isclose(v.conjugate(), w, rel_tol=1e-12)


def test_positive_and_increasing_on_real_axis():
    for b in (0.05, 0.5, 2.0):
        zs = np.geomspace(1e-3, 5e5, 60)
        lm, ph = psi_log_array(b, zs, 0.0)
        assert np.all(ph == 0.0)
        assert np.all(np.diff(lm) > 0)


def test_complex_oracle_spread():
    # random complex points against the 200-digit oracle
    rng = np.random.default_rng(11)
    for _ in range(20):
        b = float(rng.uniform(0.05, 3.0))
        r = float(10 ** rng.uniform(-1, 4))
        th = float(rng.uniform(-2.6, 2.6))
        z = r * cmath.exp(1j * th)
        got = psi_b(b, z)
        want = psi_mp(b, mp.mpc(z.real, z.imag), dps=80)
        lm_want = float(mp.log(abs(want)))
        ph_want = float(mp.arg(want))
        loss = 2 * math.sqrt(r) * (1 - math.cos(th / 2))
        tol = max(1e-11, 1e-14 * math.exp(min(loss, 24.0)) * 100)
        if r >= DEFAULT_REGIME.crossover_radius or loss > DEFAULT_REGIME.loss_cap:
            tol = max(tol, 1e-4)  # asymptotic-branch truncation level
        assert got.log_magnitude == pytest.approx(lm_want, abs=tol)
        d = abs(cmath.exp(1j * got.phase) - cmath.exp(1j * ph_want))
        assert d < tol, (b, z)


def test_sector_guard():
    with pytest.raises(SectorError):
        psi_b(0.5, -1.0e8)  # asymptotic branch forced, phase = pi
    with pytest.raises(DomainError):
        psi_b(-0.5, 1.0)
    with pytest.raises(DomainError):
        psi_b(0.5, float("nan"))


def test_regime_validation_and_order1():
    with pytest.raises(DomainError):
        PsiRegime(crossover_radius=-1)
    with pytest.raises(DomainError):
        PsiRegime(asymptotic_order=3)
    z = 4.0e6
    full = psi_b(1.0, z).log_magnitude
    lead = psi_b(1.0, z, PsiRegime(asymptotic_order=1)).log_magnitude
    # order-1 drops the c1/sqrt(z) correction, a ~3e-5 relative effect here
    assert abs(full - lead) == pytest.approx(abs(math.log1p(_c1() / math.sqrt(z))),
                                             rel=1e-6)


def _c1(b=1.0):
    return -(2 * b - 1) * (2 * b - 3) / 16
