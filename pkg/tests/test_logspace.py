import cmath
import math

import numpy as np
import pytest

from kimura.logspace import LogComplex, wrap_phase


def test_wrap_phase_range():
    for p in [0.0, 3.0, -3.0, 7.5, -7.5, math.pi, -math.pi, 100.0]:
        w = wrap_phase(p)
        assert -math.pi < w <= math.pi
        assert abs(cmath.exp(1j * w) - cmath.exp(1j * p)) < 1e-12


def test_zero_and_roundtrip():
    z = LogComplex.zero()
    assert z.is_zero and z.to_complex() == 0 and z.magnitude == 0.0
    v = LogComplex.from_complex(3.5 - 1.2j)
    assert abs(v.to_complex() - (3.5 - 1.2j)) < 1e-14
    assert LogComplex.from_real(-2.0).to_real() == -2.0
    assert LogComplex.from_real(0.0).is_zero


def test_huge_exponent_survives():
    a = LogComplex(5000.0, 0.3)
    b = LogComplex(-4999.0, -0.1)
    prod = a * b
    assert abs(prod.log_magnitude - 1.0) < 1e-12
    assert abs(prod.phase - 0.2) < 1e-12
    assert prod.to_complex() == pytest.approx(cmath.exp(1.0 + 0.2j))


def test_arithmetic_matches_complex():
    rng = np.random.default_rng(7)
    for _ in range(300):
        x = complex(*rng.normal(size=2))
        y = complex(*rng.normal(size=2))
        if abs(x) < 1e-6 or abs(y) < 1e-6:
            continue
        X, Y = LogComplex.from_complex(x), LogComplex.from_complex(y)
        assert abs((X * Y).to_complex() - x * y) < 1e-12 * abs(x * y)
        assert abs((X / Y).to_complex() - x / y) < 1e-12 * abs(x / y)
        if abs(x + y) > 1e-8 * (abs(x) + abs(y)):
            assert abs((X + Y).to_complex() - (x + y)) < 1e-10 * abs(x + y)
        assert abs((X - Y).to_complex() - (x - y)) < 1e-10 * (abs(x) + abs(y))
        assert abs((-X).to_complex() + x) < 1e-14 * abs(x)


def test_add_exact_cancellation():
    x = LogComplex.from_real(1.0)
    assert (x + (-x)).is_zero


def test_powi():
    v = LogComplex.from_complex(2.0 + 1.0j)
    assert abs(v.powi(3).to_complex() - (2 + 1j) ** 3) < 1e-12 * abs((2 + 1j) ** 3)
    assert abs(v.powi(-0.5).to_complex() - (2 + 1j) ** -0.5) < 1e-12


def test_to_real_rejects_nonreal_phase():
    with pytest.raises(ValueError):
        LogComplex(0.0, 0.5).to_real()
