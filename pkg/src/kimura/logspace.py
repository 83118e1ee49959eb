"""Exponent-space representation of complex values.

Kernel values here routinely carry factors like e^{2 sqrt(z)} with z ~ 1e6,
far outside double range. A :class:`LogComplex` stores log-magnitude and
phase separately so products, quotients and (careful) sums stay finite until
the caller decides how to combine exponents.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

_TAU = 2.0 * math.pi


def wrap_phase(p: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    if not math.isfinite(p):
        raise ValueError(f"non-finite phase {p!r}")
    r = math.remainder(p, _TAU)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class LogComplex:
    """A complex number v = exp(log_magnitude) * exp(i*phase).

    ``log_magnitude = -inf`` (with phase 0) encodes exact zero. Phase is kept
    in (-pi, pi].
    """

    log_magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if math.isnan(self.log_magnitude):
            raise ValueError("log magnitude is NaN")
        if self.log_magnitude == -math.inf:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", wrap_phase(self.phase))

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(-math.inf, 0.0)

    @classmethod
    def from_complex(cls, v: complex) -> "LogComplex":
        v = complex(v)
        if v == 0:
            return cls.zero()
        return cls(math.log(abs(v)), cmath.phase(v))

    @classmethod
    def from_real(cls, v: float) -> "LogComplex":
        if v == 0:
            return cls.zero()
        return cls(math.log(abs(v)), 0.0 if v > 0 else math.pi)

    # -- queries -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    @property
    def magnitude(self) -> float:
        return math.exp(self.log_magnitude) if not self.is_zero else 0.0

    def to_complex(self) -> complex:
        """Collapse to a complex double; overflows to inf if the exponent does."""
        if self.is_zero:
            return 0j
        m = math.exp(min(self.log_magnitude, 709.0))
        if self.log_magnitude > 709.0:
            m = math.inf
        return complex(m * math.cos(self.phase), m * math.sin(self.phase))

    def to_real(self, phase_tol: float = 1e-9) -> float:
        """Collapse to a signed real; the phase must be ~0 or ~pi."""
        if self.is_zero:
            return 0.0
        if abs(self.phase) <= phase_tol:
            sign = 1.0
        elif abs(abs(self.phase) - math.pi) <= phase_tol:
            sign = -1.0
        else:
            raise ValueError(f"phase {self.phase} is not real (tol {phase_tol})")
        return sign * math.exp(self.log_magnitude)

    def scaled(self, log_offset: float) -> complex:
        """exp(log_magnitude - log_offset) * e^{i phase} as a complex double."""
        if self.is_zero:
            return 0j
        return cmath.exp(complex(self.log_magnitude - log_offset, self.phase))

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_magnitude + other.log_magnitude,
                          self.phase + other.phase)

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by LogComplex zero")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_magnitude - other.log_magnitude,
                          self.phase - other.phase)

    def __neg__(self) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.log_magnitude, self.phase + math.pi)

    def __add__(self, other: "LogComplex") -> "LogComplex":
        # sum via the ratio against the larger term; loses at most the usual
        # cancellation digits, never overflows
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        big, small = (self, other)
        if small.log_magnitude > big.log_magnitude:
            big, small = small, big
        dlog = small.log_magnitude - big.log_magnitude
        dph = wrap_phase(small.phase - big.phase)
        if dlog == 0.0 and abs(dph) == math.pi:
            return LogComplex.zero()
        ratio = cmath.exp(complex(dlog, dph))
        s = 1.0 + ratio
        if s == 0:
            return LogComplex.zero()
        return LogComplex(big.log_magnitude + math.log(abs(s)),
                          big.phase + cmath.phase(s))

    def __sub__(self, other: "LogComplex") -> "LogComplex":
        return self + (-other)

    def powi(self, k: float) -> "LogComplex":
        """Real power along the current phase (principal-branch style)."""
        if self.is_zero:
            if k <= 0:
                raise ZeroDivisionError("0 to a non-positive power")
            return self
        return LogComplex(k * self.log_magnitude, k * self.phase)
