r"""The entire function psi_b and its evaluation branches.

psi_b(z) = sum_{j>=0} z^j / (j! Gamma(j+b)),   b > 0,

is the density ingredient of every degenerate transition kernel in this
package (it is I_{b-1}(2 sqrt(z)) up to the power z^{(1-b)/2}, but is
evaluated directly; no Bessel routine is used). Values are returned in
exponent space (:class:`~kimura.logspace.LogComplex`) because psi_b grows
like e^{2 sqrt(z)}.

Two branches are implemented and cross-checked in the test suite:

* a scaled convergent series with a term-count bound that keeps the
  neglected tail below e^{-45} relative to the largest term, and
* the large-|z| expansion

  psi_b(z) = z^{1/4 - b/2} e^{2 sqrt(z)} / sqrt(4 pi)
             * (1 - ((2b-1)(2b-3))/(16 sqrt(z)) + O(1/z)),

  valid uniformly on sectors |arg z| <= pi - alpha, alpha > 0.

The series is exact but loses roughly 2 sqrt(|z|) (1 - cos(arg z / 2)) nats
to cancellation for complex z, so branch selection keys on both |z| and that
loss exponent. Identities used downstream: psi_b' = psi_{b+1} and
z psi_b'' + b psi_b' - psi_b = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, SectorError
from .logspace import LogComplex, wrap_phase

_LOG_SQRT_4PI = 0.5 * math.log(4.0 * math.pi)


def log_gamma(x: float) -> float:
    """log Gamma(x) for real x > 0 (relative error at double rounding level)."""
    if not (isinstance(x, (int, float)) and math.isfinite(x)):
        raise DomainError(f"log_gamma expects a finite real, got {x!r}")
    if x <= 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


@dataclass(frozen=True)
class PsiRegime:
    """Branch-selection policy for psi_b evaluation.

    crossover_radius
        |z| at and above which the asymptotic branch is used. The default is
        set so the order-2 expansion is accurate to ~2e-8 relative at
        |z| = crossover_radius / 2 for all b in [0, 3]. The dropped term
        grows like (2b)^4/(512 z), so for b much beyond 3 raise the radius
        accordingly (series cost grows only like sqrt(radius)).
    asymptotic_order
        Number of bracket terms kept: 1 keeps the pure leading term, 2 adds
        the (2b-1)(2b-3)/(16 sqrt(z)) correction. Nothing beyond 2 exists here.
    loss_cap
        Maximum tolerated series cancellation exponent (nats) for complex
        arguments; past it the asymptotic branch is used even below the
        crossover radius.
    """

    crossover_radius: float = 4.0e6
    asymptotic_order: int = 2
    loss_cap: float = 24.0

    def __post_init__(self):
        if not (self.crossover_radius > 0):
            raise DomainError("crossover_radius must be positive")
        if self.asymptotic_order not in (1, 2):
            raise DomainError("asymptotic_order must be 1 or 2")
        if not (self.loss_cap > 0):
            raise DomainError("loss_cap must be positive")


DEFAULT_REGIME = PsiRegime()

# series quits losing to roundoff once the asymptotic error is smaller; see
# PsiRegime.loss_cap.  |arg z| beyond this is refused for the asymptotic branch
_MIN_SECTOR_GAP = 1e-3


def _series_term_count(rmax: float) -> int:
    # neglected terms are below e^{-45} of the largest; the peak sits at
    # j ~ sqrt(r) and the log-term profile is 2 sqrt(r) (c (1 - ln c) - 1)
    s = math.sqrt(max(rmax, 0.0))
    return int(math.ceil(s + math.sqrt(45.0 * s) + 16.0)) + 8


def psi_series_log(b: float, r: np.ndarray, phase: float):
    """Scaled series evaluation of psi_b at z = r * e^{i phase}.

    Entries are bucketed by sqrt(|z|) (which sets the term count) so that a
    few large-|z| stragglers do not force their term count on the whole
    array; the (terms x entries) work matrix stays near-minimal.

    Parameters
    ----------
    b : float, > 0
    r : ndarray of |z| >= 0
    phase : float, common argument of every element

    Returns
    -------
    (logmag, ph) : pair of ndarrays, log-magnitude and phase of psi_b(z).
    """
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        return np.empty(0), np.empty(0)
    s = np.sqrt(r)
    smax = float(s.max())
    if r.size > 16 and smax > 64.0:
        sedges = []
        v = 32.0
        while v < smax:
            sedges.append(v)
            v *= math.sqrt(2.0)
        bucket = np.digitize(s, sedges)
        logmag = np.empty_like(r)
        ph = np.empty_like(r)
        for kb in np.unique(bucket):
            m = bucket == kb
            logmag[m], ph[m] = _psi_series_chunk(b, r[m], phase)
        return logmag, ph
    return _psi_series_chunk(b, r, phase)


_SERIES_BLOCK = 4_000_000  # cap on terms x entries per work matrix


def _psi_series_chunk(b: float, r: np.ndarray, phase: float):
    J = _series_term_count(float(r.max()))
    # terms below j0 sit > 45 nats under the peak j ~ sqrt(r) for every
    # entry of the chunk (buckets keep sqrt(r) within a factor sqrt(2))
    smin = math.sqrt(float(r.min()))
    j0 = max(0, int(smin - math.sqrt(45.0 * smin)) - 16)
    if (J - j0) * r.size > _SERIES_BLOCK:
        step = max(1, _SERIES_BLOCK // (J - j0))
        logmag = np.empty_like(r)
        ph = np.empty_like(r)
        for k in range(0, r.size, step):
            sl = slice(k, k + step)
            logmag[sl], ph[sl] = _psi_series_chunk(b, r[sl], phase)
        return logmag, ph
    j = np.arange(j0, J, dtype=float)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.where(r > 0, np.log(np.maximum(r, 1e-300)), -np.inf)
        lt = j * logr[None, :] - gammaln(j + 1.0) - gammaln(j + b)
    # r == 0 columns: only the j = 0 term survives
    zero = r == 0
    if np.any(zero):
        lt[:, zero] = -np.inf
        lt[0, zero] = -math.lgamma(1.0) - math.lgamma(b)
    M = lt.max(axis=0)
    if phase == 0.0:
        S = np.exp(lt - M[None, :]).sum(axis=0)
        return M + np.log(S), np.zeros_like(M)
    rot = np.exp(1j * phase * j)
    S = (np.exp(lt - M[None, :]) * rot).sum(axis=0)
    mag = np.abs(S)
    if np.any(mag == 0):
        raise SectorError(
            f"psi series cancelled to zero (b={b}, arg z={phase}); "
            "argument too close to the negative axis")
    return M + np.log(mag), np.angle(S)


def _c1(b: float) -> float:
    return -(2.0 * b - 1.0) * (2.0 * b - 3.0) / 16.0


def psi_asymptotic_log(b: float, r: np.ndarray, phase: float, order: int = 2):
    """Large-|z| branch of psi_b at z = r * e^{i phase}; see module docstring."""
    if abs(phase) > math.pi - _MIN_SECTOR_GAP:
        raise SectorError(
            f"asymptotic branch needs |arg z| <= pi - {_MIN_SECTOR_GAP}, got {phase}")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("asymptotic branch requires |z| > 0")
    logr = np.log(r)
    sq = np.sqrt(r)
    half = 0.5 * phase
    logmag = (0.25 - 0.5 * b) * logr + 2.0 * sq * math.cos(half) - _LOG_SQRT_4PI
    ph = (0.25 - 0.5 * b) * phase + 2.0 * sq * math.sin(half)
    if order >= 2:
        bracket = 1.0 + _c1(b) * np.exp(-0.5 * logr) * np.exp(-1j * half)
        logmag = logmag + np.log(np.abs(bracket))
        ph = ph + np.angle(bracket)
    return logmag, ph


def psi_log_array(b: float, r: np.ndarray, phase: float,
                  regime: PsiRegime | None = None):
    """Branch-selected psi_b for an array of moduli sharing one argument.

    Every kernel evaluation in the package funnels through here: for a fixed
    complex time t, the argument z = x*y/t^2 runs over a positive ray, so the
    phase is a single scalar per call.
    """
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"psi requires b > 0, got {b}")
    regime = regime or DEFAULT_REGIME
    phase = wrap_phase(float(phase))
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise DomainError("moduli must be finite and nonnegative")
    loss = 2.0 * np.sqrt(r) * (1.0 - math.cos(0.5 * phase))
    use_series = (r < regime.crossover_radius) & (loss <= regime.loss_cap)
    logmag = np.empty_like(r)
    ph = np.empty_like(r)
    if np.any(use_series):
        lm, p = psi_series_log(b, r[use_series], phase)
        logmag[use_series] = lm
        ph[use_series] = p
    rest = ~use_series
    if np.any(rest):
        lm, p = psi_asymptotic_log(b, r[rest], phase, regime.asymptotic_order)
        logmag[rest] = lm
        ph[rest] = p
    return logmag, ph


def _split(z) -> tuple[float, float]:
    if isinstance(z, complex):
        if z.imag == 0.0:
            z = z.real
        else:
            return abs(z), cmath.phase(z)
    zr = float(z)
    if zr >= 0:
        return zr, 0.0
    return -zr, math.pi


def psi_b(b: float, z, regime: PsiRegime | None = None) -> LogComplex:
    """Evaluate psi_b(z) = sum z^j/(j! Gamma(j+b)) in exponent space.

    Parameters
    ----------
    b : float, > 0
    z : real or complex argument. psi_b is entire; complex arguments are
        evaluated on the principal branch of the asymptotics when the
        asymptotic branch is selected.
    regime : PsiRegime, optional

    Returns
    -------
    LogComplex

    Examples
    --------
    >>> psi_b(1.0, 0.0).to_real()       # 1/Gamma(1)
    1.0
    >>> round(psi_b(1.0, 1.0).to_real(), 10)   # sum 1/(j!)^2
    2.2795853023
    """
    r, phase = _split(z)
    logmag, ph = psi_log_array(b, np.array([r]), phase, regime)
    return LogComplex(float(logmag[0]), float(ph[0]))


def psi_b_prime(b: float, z, regime: PsiRegime | None = None) -> LogComplex:
    """psi_b'(z), computed via the shift identity psi_b' = psi_{b+1}."""
    return psi_b(b + 1.0, z, regime)
