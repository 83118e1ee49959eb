r"""Transition kernels of the degenerate model operators.

The one-dimensional model operator on the half line is

    L_b = x d^2/dx^2 + b d/dx,   b >= 0,

whose transition kernel for t > 0 (and throughout the sector |arg t| < pi/2)
is

    k_t^b(x, y) = (y^{b-1} / t^b) e^{-(x+y)/t} psi_b(x y / t^2),   b > 0,

with psi_b from :mod:`kimura.specfun`. For b = 0 the transition measure
acquires an atom at the absorbing endpoint:

    k_t^0(x, dy) = e^{-x/t} delta_0(dy) + (x/t^2) e^{-(x+y)/t} psi_2(x y/t^2) dy.

The Euclidean factor exp(-(x-y)^2/4t)/sqrt(4 pi t) covers the tangential
directions, and products of the two build the model kernels on orthants.

All pointwise values are returned in exponent space; the quadrature rules
built here keep kernel-inclusive weights so downstream operators only ever
see O(1) numbers. Rules use the substitution u = sqrt(y/tau), under which
the kernel becomes a unit-width bump around u0 = sqrt(x/tau) regardless of
how small t is; the y^{b-1} endpoint singularity is handled by a
Gauss-Jacobi head panel.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DomainError, SectorError
from .logspace import LogComplex, wrap_phase
from .quadrature import bisect_edges, composite_nodes, geometric_edges, jacobi_rule
from .specfun import DEFAULT_REGIME, PsiRegime, psi_log_array

# neglected tail mass of a rule, in nats
_TAIL_NATS = 43.0
_LOG_4PI = math.log(4.0 * math.pi)


@dataclass(frozen=True)
class SectorTime:
    """A complex time tau * e^{i theta} strictly inside |arg t| < pi/2."""

    tau: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise DomainError(f"tau must be positive and finite, got {self.tau}")
        if not (abs(self.theta) < 0.5 * math.pi):
            raise SectorError(
                f"theta = {self.theta} outside the open sector |arg t| < pi/2")

    @classmethod
    def from_complex(cls, t) -> "SectorTime":
        t = complex(t)
        if t == 0:
            raise DomainError("t = 0 is not a valid time")
        return cls(abs(t), cmath.phase(t))

    @property
    def is_real(self) -> bool:
        return self.theta == 0.0

    @property
    def value(self) -> complex:
        return self.tau * cmath.exp(1j * self.theta)

    @property
    def sector_margin(self) -> float:
        return 0.5 * math.pi - abs(self.theta)


def as_time(t) -> SectorTime:
    if isinstance(t, SectorTime):
        return t
    if isinstance(t, complex) and t.imag != 0.0:
        return SectorTime.from_complex(t)
    t = float(t.real if isinstance(t, complex) else t)
    if t <= 0:
        raise DomainError(f"real time must be positive, got {t}")
    return SectorTime(t)


@dataclass(frozen=True)
class ModelSpec:
    """Model operator sum_i [x_i d^2/dx_i^2 + b_i d/dx_i] + sum_l d^2/dy_l^2."""

    b: tuple[float, ...]
    m: int = 0

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        object.__setattr__(self, "b", b)
        if any(v < 0 or not math.isfinite(v) for v in b):
            raise DomainError(f"all weights must be finite and >= 0, got {b}")
        if self.m < 0 or int(self.m) != self.m:
            raise DomainError(f"m must be a nonnegative integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        if len(b) + self.m == 0:
            raise DomainError("spec needs at least one coordinate")

    @property
    def n(self) -> int:
        return len(self.b)


# ---------------------------------------------------------------------------
# pointwise kernel values (vectorized log form)
# ---------------------------------------------------------------------------

def kernel_log_1d(b: float, t, x: float, y, regime: PsiRegime | None = None):
    """(log-magnitude, phase) of k_t^b(x, y) over an array of y > 0.

    For b = 0 this is the density part of the transition measure; the atom
    lives on :func:`transition_measure_1d`.
    """
    st = as_time(t)
    regime = regime or DEFAULT_REGIME
    if b < 0:
        raise DomainError(f"b must be >= 0, got {b}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("density argument y must be positive")
    tau, th = st.tau, st.theta
    zmod = x * y / tau ** 2
    if b == 0:
        if x == 0:
            lm = np.full_like(y, -np.inf)
            return lm, np.zeros_like(y)
        plm, pph = psi_log_array(2.0, zmod, -2.0 * th, regime)
        logmag = math.log(x) - 2.0 * math.log(tau) - (x + y) * math.cos(th) / tau + plm
        phase = -2.0 * th + (x + y) * math.sin(th) / tau + pph
        return logmag, phase
    plm, pph = psi_log_array(b, zmod, -2.0 * th, regime)
    logmag = ((b - 1.0) * np.log(y) - b * math.log(tau)
              - (x + y) * math.cos(th) / tau + plm)
    phase = -b * th + (x + y) * math.sin(th) / tau + pph
    return logmag, phase


def kernel_1d(b: float, t, x: float, y: float,
              regime: PsiRegime | None = None) -> LogComplex:
    """Transition density k_t^b(x, y) as a LogComplex. Requires b > 0.

    The b = 0 measure has an atom and lives on :func:`transition_measure_1d`.

    Examples
    --------
    >>> v = kernel_1d(2.0, 0.5, 0.0, 0.3)       # Gamma(2, 1/2) density at 0.3
    >>> abs(v.to_real() - 0.3/0.25*math.exp(-0.6)) < 1e-15
    True
    """
    if b <= 0:
        raise DomainError(
            f"kernel_1d needs b > 0 (got {b}); b = 0 has an atom, "
            "use transition_measure_1d")
    lm, ph = kernel_log_1d(b, t, x, np.array([float(y)]), regime)
    return LogComplex(float(lm[0]), float(ph[0]))


def kernel_euclidean_log(t, x: float, y):
    """(log-magnitude, phase) of the Euclidean kernel over an array of y."""
    st = as_time(t)
    y = np.asarray(y, dtype=float)
    tau, th = st.tau, st.theta
    q = (x - y) ** 2 / (4.0 * tau)
    logmag = -q * math.cos(th) - 0.5 * (_LOG_4PI + math.log(tau))
    phase = q * math.sin(th) - 0.5 * th
    return logmag, phase * np.ones_like(q)


def kernel_euclidean(t, x: float, y: float) -> LogComplex:
    """exp(-(x-y)^2/4t) / sqrt(4 pi t), the kernel of d^2/dy^2."""
    lm, ph = kernel_euclidean_log(t, x, np.array([float(y)]))
    return LogComplex(float(lm[0]), float(ph[0]))


def _bessel_tail(nu: float, w):
    """Truncated large-argument series of I_nu(w), sans the common prefactor."""
    s = np.ones_like(w)
    term = np.ones_like(w)
    for k in range(1, 5):
        term = term * -(4.0 * nu * nu - (2 * k - 1) ** 2) / (8.0 * k * w)
        s = s + term
    return s


def _psi_ratio(bnum: float, bden: float, zmod, phase, regime):
    """psi_bnum / psi_bden on a common ray, as complex values (bounded).

    Subtracting the two log forms loses ~sqrt(z)*eps absolute accuracy,
    which callers amplify catastrophically near the diagonal once
    z > ~1e16; past 1e10 the ratio is taken from the asymptotic series of
    the underlying Bessel quotient instead, which never forms large logs.
    """
    zmod = np.asarray(zmod, dtype=float)
    lm_n, ph_n = psi_log_array(bnum, zmod, phase, regime)
    lm_d, ph_d = psi_log_array(bden, zmod, phase, regime)
    out = np.exp(lm_n - lm_d) * np.exp(1j * (ph_n - ph_d))
    big = zmod > 1e10
    if np.any(big):
        w = 2.0 * np.sqrt(zmod[big]) * cmath.exp(0.5j * phase)
        quot = _bessel_tail(bnum - 1.0, w) / _bessel_tail(bden - 1.0, w)
        zpow = (zmod[big] * cmath.exp(1j * phase)) ** (0.5 * (bden - bnum))
        out[big] = zpow * quot
    return out


def kernel_dx_log(b: float, t, x: float, y, order: int = 1,
                  regime: PsiRegime | None = None):
    """(log-magnitude, phase) of d/dx k (order 1) or x d^2/dx^2 k (order 2).

    d/dx k = k * [-1/t + (y/t^2) psi_{b+1}/psi_b],
    d^2/dx^2 k = k * [1/t^2 - 2(y/t^3) psi_{b+1}/psi_b + (y^2/t^4) psi_{b+2}/psi_b].
    """
    if b <= 0:
        raise DomainError("x-derivatives require b > 0 here")
    st = as_time(t)
    regime = regime or DEFAULT_REGIME
    y = np.asarray(y, dtype=float)
    tau, th = st.tau, st.theta
    zmod = x * y / tau ** 2
    inv_t = cmath.exp(complex(0.0, -th)) / tau
    klm, kph = kernel_log_1d(b, st, x, y, regime)
    if order == 1:
        r1 = _psi_ratio(b + 1.0, b, zmod, -2.0 * th, regime)
        bracket = -inv_t + y * inv_t ** 2 * r1
    elif order == 2:
        r1 = _psi_ratio(b + 1.0, b, zmod, -2.0 * th, regime)
        r2 = _psi_ratio(b + 2.0, b, zmod, -2.0 * th, regime)
        bracket = x * (inv_t ** 2 - 2.0 * y * inv_t ** 3 * r1
                       + y ** 2 * inv_t ** 4 * r2)
    else:
        raise DomainError(f"order must be 1 or 2, got {order}")
    mag = np.abs(bracket)
    with np.errstate(divide="ignore"):
        logmag = klm + np.log(mag)
    phase = kph + np.angle(bracket)
    return logmag, phase


def kernel_dx(b: float, t, x: float, y: float, order: int = 1,
              regime: PsiRegime | None = None) -> LogComplex:
    """First x-derivative of the kernel, or x * second derivative (order=2)."""
    lm, ph = kernel_dx_log(b, t, x, np.array([float(y)]), order, regime)
    if lm[0] == -np.inf:
        return LogComplex.zero()
    return LogComplex(float(lm[0]), float(ph[0]))


def adjoint_flux_log(b: float, t, x: float, y,
                     regime: PsiRegime | None = None):
    """(log-magnitude, phase) of the adjoint flux (d/dy (y .) - b) k_t^b(x, .).

    Equals k * [z psi_{b+1}/psi_b - y/t] with z = x y / t^2; it vanishes at
    y = 0 like y^b and its y-derivative gives d/dt k.
    """
    if b <= 0:
        raise DomainError("adjoint flux requires b > 0")
    st = as_time(t)
    regime = regime or DEFAULT_REGIME
    y = np.asarray(y, dtype=float)
    tau, th = st.tau, st.theta
    zmod = x * y / tau ** 2
    inv_t = cmath.exp(complex(0.0, -th)) / tau
    z = zmod * cmath.exp(complex(0.0, -2.0 * th))
    r1 = _psi_ratio(b + 1.0, b, zmod, -2.0 * th, regime)
    bracket = z * r1 - y * inv_t
    klm, kph = kernel_log_1d(b, st, x, y, regime)
    with np.errstate(divide="ignore"):
        logmag = klm + np.log(np.abs(bracket))
    phase = kph + np.angle(bracket)
    return logmag, phase


def adjoint_flux(b: float, t, x: float, y: float,
                 regime: PsiRegime | None = None) -> LogComplex:
    lm, ph = adjoint_flux_log(b, t, x, np.array([float(y)]), regime)
    if not np.isfinite(lm[0]):
        return LogComplex.zero()
    return LogComplex(float(lm[0]), float(ph[0]))


# ---------------------------------------------------------------------------
# quadrature rules with kernel-inclusive weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Nodes y_i and kernel-inclusive weights; integrate f against k dy."""

    nodes: np.ndarray
    log_w: np.ndarray
    phase_w: np.ndarray | None = None  # None: real nonnegative weights

    @property
    def weights(self):
        w = np.exp(self.log_w)
        if self.phase_w is None:
            return w
        return w * np.exp(1j * self.phase_w)

    @property
    def mass(self):
        return self.weights.sum()

    def integrate(self, fvals):
        fvals = np.asarray(fvals)
        return np.tensordot(self.weights, fvals, axes=(0, 0))


def _u_integrand_log(b: float, st: SectorTime, lam: float, u: np.ndarray,
                     regime: PsiRegime):
    """Full u-space integrand of the transition measure (k dy after y = tau u^2).

    b > 0:  2 u^{2b-1} e^{-i b th} e^{-(lam+u^2) e^{-i th}} psi_b(lam u^2 e^{-2i th})
    b == 0: 2 lam u e^{-2 i th} e^{-(lam+u^2) e^{-i th}} psi_2(lam u^2 e^{-2i th})
    """
    th = st.theta
    zmod = lam * u ** 2
    if b == 0:
        plm, pph = psi_log_array(2.0, zmod, -2.0 * th, regime)
        with np.errstate(divide="ignore"):
            logmag = (math.log(2.0) + math.log(lam) + np.log(u)
                      - (lam + u ** 2) * math.cos(th) + plm)
        phase = -2.0 * th + (lam + u ** 2) * math.sin(th) + pph
        return logmag, phase
    plm, pph = psi_log_array(b, zmod, -2.0 * th, regime)
    with np.errstate(divide="ignore"):
        logmag = (math.log(2.0) + (2.0 * b - 1.0) * np.log(u)
                  - (lam + u ** 2) * math.cos(th) + plm)
    phase = -b * th + (lam + u ** 2) * math.sin(th) + pph
    return logmag, phase


# payload window: the u-substitution makes kernel panels ~0.7 w0 wide in u,
# which is y-width ~1.4 tau u w0. Once tau is large that skips right over any
# O(1)-scale structure of the integrand, so extra geometric y-panels (ratio
# 1.3 from 0.12) keep y <= _PAYLOAD_Y resolved; past u ~ 5 w0 the kernel
# spacing is the finer one again and the window stops.
_PAYLOAD_Y = 60.0


def _payload_u_edges(tau: float, costh: float, head: float, U: float):
    w0 = 1.0 / math.sqrt(costh)
    u_hi = min(U, 5.0 * w0, math.sqrt(_PAYLOAD_Y / tau))
    out = []
    y = max(0.12, tau * head * head)
    while True:
        y = y + max(0.12, 0.3 * y)
        u = math.sqrt(y / tau)
        if u >= u_hi:
            break
        if u > head:
            out.append(u)
    return out


def _head_width(tau: float, w0: float, U: float) -> float:
    # head panel must not swallow the first payload panel
    return min(w0, 0.5 * U, math.sqrt(0.12 / tau))


def _u_panel_edges(tau: float, lam: float, costh: float, b: float, level: int):
    """Panel edges in u covering the bump at u0 = sqrt(lam) plus head/tail."""
    w0 = 1.0 / math.sqrt(costh)
    u0 = math.sqrt(lam)
    D = math.sqrt(_TAIL_NATS) * w0
    for _ in range(2):
        D = math.sqrt((_TAIL_NATS + max(2.0 * b - 1.0, 0.0)
                       * math.log(2.0 + u0 + D)) / costh)
    U = u0 + D
    head = _head_width(tau, w0, U)
    pat = np.array([0.0, 0.35, 0.65, 1.0, 1.4, 2.0, 2.8, 4.0, 6.0])
    edges = {head, U}
    for s in pat:
        for sg in (1.0, -1.0):
            e = u0 + sg * s * w0
            if head < e < U:
                edges.add(e)
    lo = u0 - 6.0 * w0
    if lo > head:
        edges.update(geometric_edges(head, lo, w0))
    hi = u0 + 6.0 * w0
    if hi < U:
        edges.update(geometric_edges(hi, U, 2.0 * w0))
    edges.update(_payload_u_edges(tau, costh, head, U))
    edges = np.array(sorted(edges))
    if level > 0:
        edges = bisect_edges(edges, level)
    return head, edges, U


def transition_rule(b: float, t, x: float, *, level: int = 0, n: int = 24,
                    regime: PsiRegime | None = None) -> QuadratureRule:
    """Kernel-inclusive quadrature rule for integrating f against k_t^b(x, .) dy.

    The rule covers only the density part; the b = 0 atom is carried by
    :func:`transition_measure_1d`. ``level`` bisects every panel that many
    times (the deterministic refinement used by convergence checks).
    """
    st = as_time(t)
    regime = regime or DEFAULT_REGIME
    if b < 0:
        raise DomainError(f"b must be >= 0, got {b}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if b == 0 and x == 0:
        return QuadratureRule(np.empty(0), np.empty(0),
                              None if st.is_real else np.empty(0))
    tau, th = st.tau, st.theta
    lam = x / tau
    costh = math.cos(th)
    head, edges, _ = _u_panel_edges(tau, lam, costh, b, level)

    u_parts, logw_parts, phase_parts = [], [], []

    # head panel [0, head]: a Gauss-Jacobi rule absorbs u^{2b-1} whenever it
    # is not a plain monomial there (b = 0 gives an integrand ~ u, fine on
    # Legendre panels; integer 2b-1 likewise)
    beta = 2.0 * b - 1.0
    if b > 0.0 and not (beta >= 0.0 and float(beta).is_integer()):
        nh = n + 8 * (1 << level) if level else n + 8
        xj, wj = jacobi_rule(nh, 2.0 * b - 1.0)
        u = head * (xj + 1.0) / 2.0
        lm, ph = _u_integrand_log(b, st, lam, u, regime)
        # strip the u^{2b-1} factor folded into the Jacobi weights
        lm = lm - (2.0 * b - 1.0) * np.log(u)
        logw = np.log(wj) + 2.0 * b * math.log(head / 2.0) + lm
        u_parts.append(u)
        logw_parts.append(logw)
        phase_parts.append(ph)
        body_edges = edges[edges >= head]
    else:
        head_panel = np.array([0.0, head])
        if level > 0:
            head_panel = bisect_edges(head_panel, level)
        body_edges = np.concatenate([head_panel[:-1], edges[edges >= head]])

    un, uw = composite_nodes(np.unique(body_edges), n)
    lm, ph = _u_integrand_log(b, st, lam, un, regime)
    u_parts.append(un)
    logw_parts.append(np.log(uw) + lm)
    phase_parts.append(ph)

    u_all = np.concatenate(u_parts)
    logw = np.concatenate(logw_parts)
    phase = np.concatenate(phase_parts)
    nodes = tau * u_all ** 2
    if st.is_real:
        return QuadratureRule(nodes, logw, None)
    return QuadratureRule(nodes, logw, phase)


def euclidean_rule(t, x: float, *, level: int = 0, n: int = 24) -> QuadratureRule:
    """Kernel-inclusive rule for the Euclidean factor around x."""
    st = as_time(t)
    tau, th = st.tau, st.theta
    costh = math.cos(th)
    c = math.sqrt(4.0 * tau / costh)
    V = math.sqrt(_TAIL_NATS) + 0.7
    pat = np.array([0.0, 0.35, 0.65, 1.0, 1.4, 2.0, 2.8, 4.0, 6.0, V])
    edges = np.unique(np.concatenate([-pat[::-1], pat]))
    if level > 0:
        edges = bisect_edges(edges, level)
    vn, vw = composite_nodes(edges, n)
    y = x + c * vn
    lm, ph = kernel_euclidean_log(st, x, y)
    logw = np.log(vw * c) + lm
    if st.is_real:
        return QuadratureRule(y, logw, None)
    return QuadratureRule(y, logw, ph)


@dataclass(frozen=True)
class KernelMatrix:
    """Kernel-inclusive weight rows over one shared node set.

    weights[i, q] integrates against the transition density from x_i; the
    optional atom column carries the b = 0 mass at the absorbing endpoint.
    Row sums are ~1 for real t.
    """

    nodes: np.ndarray
    weights: np.ndarray
    atom: np.ndarray | None = None

    def apply(self, fvals, f_at_zero=None):
        out = self.weights @ np.asarray(fvals)
        if self.atom is not None:
            if f_at_zero is None:
                raise DomainError("this measure has an atom; pass f(0)")
            out = out + self.atom * f_at_zero
        return out

    @property
    def row_mass(self):
        m = self.weights.sum(axis=1)
        if self.atom is not None:
            m = m + self.atom
        return m


def _shared_u_edges(tau: float, lam_max: float, costh: float, b: float,
                    level: int):
    """Panels covering every bump u0 in [0, sqrt(lam_max)] plus head and tail."""
    w0 = 1.0 / math.sqrt(costh)
    u0 = math.sqrt(lam_max)
    D = math.sqrt(_TAIL_NATS) * w0
    for _ in range(2):
        D = math.sqrt((_TAIL_NATS + max(2.0 * b - 1.0, 0.0)
                       * math.log(2.0 + u0 + D)) / costh)
    U = u0 + D
    head = _head_width(tau, w0, U)
    step = 0.7 * w0
    n_body = max(2, int(math.ceil((U - head) / step)))
    edges = np.concatenate([[head], head + (U - head) / n_body
                            * np.arange(1, n_body + 1)])
    win = _payload_u_edges(tau, costh, head, U)
    if win:
        edges = np.unique(np.concatenate([edges, win]))
    if level > 0:
        edges = bisect_edges(edges, level)
    return head, edges, U


def transition_matrix(b: float, t, xs, *, level: int = 0, n: int = 24,
                      regime: PsiRegime | None = None) -> KernelMatrix:
    """Weight rows for integrating against k_t^b(x_i, .) dy, shared nodes.

    One node set serves every starting point (the substitution u = sqrt(y/t)
    makes the nodes x-independent), so applying the measure to f is a single
    matrix product. Carries the b = 0 atom column when it exists.
    """
    st = as_time(t)
    regime = regime or DEFAULT_REGIME
    if b < 0:
        raise DomainError(f"b must be >= 0, got {b}")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(xs < 0):
        raise DomainError("starting points must be >= 0")
    tau, th = st.tau, st.theta
    lam = xs / tau
    costh = math.cos(th)
    head, edges, _ = _shared_u_edges(tau, float(lam.max()), costh, b, level)

    blocks_u, blocks_w = [], []
    beta = 2.0 * b - 1.0
    jacobi_head = b > 0.0 and not (beta >= 0.0 and float(beta).is_integer())
    if jacobi_head:
        nh = n + 8 * (1 << level) if level else n + 8
        xj, wj = jacobi_rule(nh, beta)
        u = head * (xj + 1.0) / 2.0
        blocks_u.append(u)
        blocks_w.append((np.log(wj) + 2.0 * b * math.log(head / 2.0)
                         - beta * np.log(u), True))
    else:
        head_panel = np.array([0.0, head])
        if level > 0:
            head_panel = bisect_edges(head_panel, level)
        edges = np.concatenate([head_panel[:-1], edges])
    un, uw = composite_nodes(edges, n)
    blocks_u.append(un)
    blocks_w.append((np.log(uw), False))

    u_all = np.concatenate(blocks_u)
    logw_base = np.concatenate([w for w, _ in blocks_w])

    # integrand over the (x, u) grid in one vectorized pass
    zmod = lam[:, None] * u_all[None, :] ** 2
    if b == 0:
        plm, pph = psi_log_array(2.0, zmod.ravel(), -2.0 * th, regime)
        plm = plm.reshape(zmod.shape)
        pph = pph.reshape(zmod.shape)
        with np.errstate(divide="ignore"):
            lgl = np.where(lam[:, None] > 0, np.log(lam[:, None]), -np.inf)
            logmag = (math.log(2.0) + lgl + np.log(u_all)[None, :]
                      - (lam[:, None] + u_all[None, :] ** 2) * costh + plm)
        phase = -2.0 * th + (lam[:, None] + u_all ** 2) * math.sin(th) + pph
    else:
        plm, pph = psi_log_array(b, zmod.ravel(), -2.0 * th, regime)
        plm = plm.reshape(zmod.shape)
        pph = pph.reshape(zmod.shape)
        logmag = (math.log(2.0) + beta * np.log(u_all)[None, :]
                  - (lam[:, None] + u_all ** 2) * costh + plm)
        phase = -b * th + (lam[:, None] + u_all ** 2) * math.sin(th) + pph

    logw = logmag + logw_base[None, :]
    W = np.exp(logw)
    if not st.is_real:
        W = W * np.exp(1j * phase)
    nodes = tau * u_all ** 2
    atom = None
    if b == 0:
        aw = np.exp(-lam * cmath.exp(complex(0.0, -th)))
        atom = aw.real if st.is_real else aw
    return KernelMatrix(nodes, W, atom)


def euclidean_matrix(t, xs, *, level: int = 0, n: int = 24) -> KernelMatrix:
    """Euclidean analogue of transition_matrix, shared nodes across rows."""
    st = as_time(t)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    tau, th = st.tau, st.theta
    c = math.sqrt(4.0 * tau / math.cos(th))
    V = math.sqrt(_TAIL_NATS) + 0.7
    lo, hi = xs.min() - V * c, xs.max() + V * c
    n_panels = max(2, int(math.ceil((hi - lo) / (0.7 * c))))
    edges = np.linspace(lo, hi, n_panels + 1)
    if level > 0:
        edges = bisect_edges(edges, level)
    y, w = composite_nodes(edges, n)
    lm, ph = kernel_euclidean_log(st, 0.0, (y[None, :] - xs[:, None]))
    W = np.exp(lm + np.log(w)[None, :])
    if not st.is_real:
        W = W * np.exp(1j * ph)
    return KernelMatrix(y, W, None)


# ---------------------------------------------------------------------------
# transition measures and product strata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionMeasure1D:
    """Atom weight plus density rule for one degenerate coordinate (real t)."""

    b: float
    t: SectorTime
    x: float
    atom_weight: float
    rule: QuadratureRule

    @property
    def mass(self) -> float:
        return self.atom_weight + float(self.rule.mass)

    def density(self, y):
        """Density part of the measure, evaluated pointwise."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lm, _ = kernel_log_1d(self.b, self.t, self.x, y)
        return np.exp(lm)

    def expectation(self, f) -> float:
        """Atom-aware expectation of a callable f."""
        fat = f(0.0) * self.atom_weight if self.atom_weight != 0 else 0.0
        return fat + float(self.rule.integrate(f(self.rule.nodes)))


def transition_measure_1d(b: float, t, x: float, *, level: int = 0,
                          regime: PsiRegime | None = None) -> TransitionMeasure1D:
    """The full transition measure of L_b from x at real time t > 0.

    For b > 0 this is a probability density on (0, inf); for b = 0 it adds
    the absorption atom e^{-x/t} at y = 0. Complex times are refused (the
    measure-with-atom view only makes probabilistic sense on the real axis;
    sector evaluations go through transition_rule / kernel_1d directly).
    """
    st = as_time(t)
    if not st.is_real:
        raise DomainError("transition_measure_1d needs real t; "
                          "use transition_rule for sector times")
    rule = transition_rule(b, st, x, level=level, regime=regime)
    atom = math.exp(-x / st.tau) if b == 0 else 0.0
    return TransitionMeasure1D(float(b), st, float(x), atom, rule)


@dataclass(frozen=True)
class Stratum:
    """One piece of a product transition measure.

    ``absorbed`` lists (0-based) degenerate coordinates pinned at 0; the
    weight is the product of their atom factors. ``rules`` integrate the
    density over the remaining coordinates (free degenerate ones first, then
    the Euclidean ones, each in original order).
    """

    absorbed: tuple[int, ...]
    weight: complex | float
    free_degenerate: tuple[int, ...]
    rules: tuple[QuadratureRule, ...]

    @property
    def density_mass(self):
        out = 1.0 + 0.0j
        for r in self.rules:
            out = out * r.mass
        return out.real if abs(out.imag) < 1e-300 else out

    @property
    def mass(self):
        return self.weight * self.density_mass


@dataclass(frozen=True)
class StratumMeasure:
    """Product transition measure decomposed over absorbed-coordinate strata."""

    spec: ModelSpec
    t: SectorTime
    x: tuple[float, ...]
    y: tuple[float, ...]
    strata: tuple[Stratum, ...]

    @property
    def total_mass(self):
        return sum(s.mass for s in self.strata)


def kernel_product(spec: ModelSpec, t, x, y=(), *, level: int = 0,
                   regime: PsiRegime | None = None) -> StratumMeasure:
    """Product transition measure from the point (x_1..x_n; y_1..y_m).

    Coordinates with b_i = 0 contribute an atom factor e^{-x_i/t}; the
    measure decomposes over subsets S of those coordinates (the stratum
    where exactly the coordinates in S sit at the absorbing endpoint), with
    stratum weight prod_{i in S} e^{-x_i/t}. Strata whose density vanishes
    identically (some free b=0 coordinate starting at x_i = 0) are dropped.
    """
    st = as_time(t)
    xs = tuple(float(v) for v in x)
    ys = tuple(float(v) for v in y)
    if len(xs) != spec.n or len(ys) != spec.m:
        raise DomainError(
            f"point ({len(xs)}; {len(ys)}) does not match spec "
            f"({spec.n}; {spec.m})")
    if any(v < 0 for v in xs):
        raise DomainError("degenerate coordinates must be >= 0")

    zero_idx = [i for i, bi in enumerate(spec.b) if bi == 0.0]
    atoms = {}
    for i in zero_idx:
        aw = cmath.exp(-xs[i] * cmath.exp(complex(0.0, -st.theta)) / st.tau)
        atoms[i] = aw.real if st.is_real else aw

    strata = []
    for k in range(len(zero_idx) + 1):
        for S in combinations(zero_idx, k):
            free0 = [i for i in zero_idx if i not in S]
            if any(xs[i] == 0.0 for i in free0):
                continue  # the density part from x_i = 0 is identically zero
            weight = 1.0
            for i in S:
                weight = weight * atoms[i]
            free_deg = tuple(i for i in range(spec.n) if i not in S)
            rules = tuple(transition_rule(spec.b[i], st, xs[i], level=level,
                                          regime=regime)
                          for i in free_deg)
            rules = rules + tuple(euclidean_rule(st, yl, level=level)
                                  for yl in ys)
            strata.append(Stratum(tuple(S), weight, free_deg, rules))
    return StratumMeasure(spec, st, xs, ys, tuple(strata))
