r"""One-dimensional degenerate operators on [0,1] and their normal forms.

A KimuraOp1D is L = a(x) x(1-x) d^2/dx^2 + drift(x) d/dx with a > 0 and
inward-pointing drift (drift(0) >= 0 >= drift(1)). The degeneracy at each
endpoint is simple, so near 0 the operator is conjugate to the model
x~ d^2/dx~^2 + b~(x~) d/dx~ with a variable weight whose endpoint value
drift(0)/a(0) is the invariant ("Feller") weight of that boundary.

The conjugating coordinate comes from the singular distance integral

    zeta(x) = int_0^x ds / sqrt(a(s) s (1-s)),

in which the leading part of L is exactly d^2/dzeta^2 (no approximation;
the first-order term picks up the drift B = (drift - g'/2)/sqrt(g) with
g = a x(1-x)). The local boundary chart is x~ = (zeta/2)^2. Both facts are
one-dimensional changes of variable and hold for the full operator, not
just its frozen-coefficient model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .quadrature import gauss_rule

_FD_H = 1e-6  # step for coefficient derivatives (coefficients are smooth)


@dataclass(frozen=True)
class KimuraOp1D:
    """L = a(x) x(1-x) d2/dx2 + drift(x) d/dx on [0,1]; callables broadcast."""

    a: object
    drift: object
    a_const: float | None = None  # set when a is known constant (exact paths)

    def __post_init__(self):
        xs = np.linspace(0.0, 1.0, 201)
        av = np.asarray(self.a(xs), dtype=float)
        if av.shape != xs.shape:
            av = np.broadcast_to(av, xs.shape)
        if not np.all(np.isfinite(av)) or np.min(av) <= 0:
            raise DomainError("a must be positive and finite on [0,1]")
        d0 = float(self.drift(0.0))
        d1 = float(self.drift(1.0))
        if d0 < 0 or d1 > 0:
            raise DomainError(
                f"drift must point inward: drift(0)={d0}, drift(1)={d1}")

    def second_coeff(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.a(x), dtype=float) * x * (1.0 - x)

    @property
    def is_neutral(self) -> bool:
        xs = np.linspace(0.0, 1.0, 41)
        return bool(np.max(np.abs(np.asarray(self.drift(xs)))) == 0.0)


def wright_fisher_op(b0: float, b1: float, s: float = 0.0) -> KimuraOp1D:
    """x(1-x) d2/dx2 + [b0(1-x) - b1 x + s x(1-x)] d/dx."""
    if b0 < 0 or b1 < 0:
        raise DomainError("mutation weights must be nonnegative")

    def drift(x):
        x = np.asarray(x, dtype=float)
        return b0 * (1.0 - x) - b1 * x + s * x * (1.0 - x)

    return KimuraOp1D(a=lambda x: np.ones_like(np.asarray(x, dtype=float)),
                      drift=drift, a_const=1.0)


def neutral_wf_op() -> KimuraOp1D:
    return wright_fisher_op(0.0, 0.0)


# ---------------------------------------------------------------------------
# the desingularizing coordinate and boundary charts
# ---------------------------------------------------------------------------

class ZetaChart:
    """The coordinate zeta(x) on [0,1] and everything derived from it.

    zeta is computed through the substitution s = sin^2(phi), which removes
    both endpoint singularities: zeta(x) = int_0^{asin sqrt(x)}
    2/sqrt(a(sin^2 phi)) dphi. For constant a this is exact (2 asin(sqrt x)
    scaled); otherwise a fixed Gauss rule on the smooth integrand carries
    full double accuracy.
    """

    def __init__(self, op: KimuraOp1D, n_quad: int = 48):
        self.op = op
        self._gl = gauss_rule(n_quad)
        self.zeta_max = float(self.zeta(1.0))

    def zeta(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > 1)):
            raise DomainError("x must lie in [0,1]")
        phi1 = np.arcsin(np.sqrt(x))
        if self.op.a_const is not None:
            return 2.0 * phi1 / math.sqrt(self.op.a_const)
        gx, gw = self._gl
        # map [-1,1] -> [0, phi1] per evaluation point
        phi = 0.5 * phi1[..., None] * (gx + 1.0)
        vals = 2.0 / np.sqrt(np.asarray(self.op.a(np.sin(phi) ** 2)))
        return 0.5 * phi1 * np.sum(gw * vals, axis=-1)

    def x_of_zeta(self, z):
        z = np.asarray(z, dtype=float)
        if self.op.a_const is not None:
            return np.sin(0.5 * z * math.sqrt(self.op.a_const)) ** 2
        # monotone seed grid, then Newton polish with the exact derivative
        seed_x = np.sin(0.5 * np.pi * np.linspace(0.0, 1.0, 2049)) ** 2
        seed_z = self.zeta(seed_x)
        x = np.interp(z, seed_z, seed_x)
        for _ in range(3):
            err = self.zeta(x) - z
            g = self.op.second_coeff(x)
            step = err * np.sqrt(np.maximum(g, 0.0))
            x = np.clip(x - step, 0.0, 1.0)
        return x

    def zeta_drift(self, x):
        """Drift B of the zeta-process: in zeta, L = d2/dz2 + B d/dz."""
        x = np.asarray(x, dtype=float)
        g = self.op.second_coeff(x)
        if self.op.a_const is not None:
            gp = self.op.a_const * (1.0 - 2.0 * x)
        else:
            gp = (self.op.second_coeff(x + _FD_H)
                  - self.op.second_coeff(x - _FD_H)) / (2.0 * _FD_H)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.asarray(self.op.drift(x)) - 0.5 * gp) / np.sqrt(g)

    def local_weight(self, x, endpoint: int):
        """The variable model weight b~ seen from the given endpoint.

        In the chart x~ = (zeta_loc/2)^2 the operator is exactly
        x~ d2/dx~2 + b~ d/dx~ with b~ = 1/2 + zeta_loc * B_loc / 2; at the
        endpoint itself this limits to the Feller weight.
        """
        x = np.asarray(x, dtype=float)
        if endpoint == 0:
            zloc = self.zeta(x)
            Bloc = self.zeta_drift(x)
        elif endpoint == 1:
            zloc = self.zeta_max - self.zeta(x)
            Bloc = -self.zeta_drift(x)
        else:
            raise DomainError("endpoint must be 0 or 1")
        with np.errstate(invalid="ignore"):
            w = 0.5 + 0.5 * zloc * Bloc
        w = np.where(zloc == 0.0, self.feller_weight(endpoint), w)
        return w if w.ndim else float(w)

    def feller_weight(self, endpoint: int) -> float:
        op = self.op
        if endpoint == 0:
            return float(op.drift(0.0)) / float(op.a(0.0))
        if endpoint == 1:
            return -float(op.drift(1.0)) / float(op.a(1.0))
        raise DomainError("endpoint must be 0 or 1")


@dataclass(frozen=True)
class FellerChart:
    """Endpoint normal form: invariant weight plus the collar coordinate map."""

    endpoint: int
    weight: float
    to_local: object  # x -> x~, the model coordinate vanishing at the endpoint
    chart: ZetaChart


def feller_normal_form(op: KimuraOp1D, endpoint: int) -> FellerChart:
    """Normal form of op at an endpoint of [0,1].

    Returns the frozen boundary weight (drift/a at the endpoint, mirrored at
    1) together with the coordinate in which the leading part of L is the
    model x~ d2/dx~2. A negative computed weight violates the inward-drift
    invariant and raises.
    """
    chart = ZetaChart(op)
    w = chart.feller_weight(endpoint)
    if w < 0:
        raise DomainError(
            f"endpoint {endpoint} weight {w} is negative; drift points out")

    if endpoint == 0:
        def to_local(x):
            return (0.5 * chart.zeta(x)) ** 2
    else:
        def to_local(x):
            return (0.5 * (chart.zeta_max - chart.zeta(x))) ** 2

    return FellerChart(int(endpoint), w, to_local, chart)


# ---------------------------------------------------------------------------
# finite-difference application of generators (checks and residuals)
# ---------------------------------------------------------------------------

def _fd_derivatives_uniform(vals: np.ndarray, h: float):
    """4th-order first and second derivatives on a uniform grid interior.

    Returns (first, second), both of length len(vals) - 4, aligned with
    vals[2:-2].
    """
    v = np.asarray(vals)
    if v.shape[0] < 5:
        raise DomainError("need at least 5 grid values for the stencil")
    d1 = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12.0 * h)
    d2 = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (
        12.0 * h * h)
    return d1, d2


def model_apply_fd(b: float, zgrid: np.ndarray, vals: np.ndarray):
    """(x d2/dx2 + b d/dx) f computed in the square-root coordinate.

    zgrid must be uniform with x = (z/2)^2; in z the generator reads
    d2/dz2 + (2b-1)/z d/dz, which finite differences handle uniformly well
    down to the boundary (no 1/x blowup). Returns values on zgrid[2:-2].
    """
    z = np.asarray(zgrid, dtype=float)
    h = z[1] - z[0]
    if not np.allclose(np.diff(z), h, rtol=1e-12, atol=1e-12):
        raise DomainError("zgrid must be uniform")
    d1, d2 = _fd_derivatives_uniform(vals, h)
    zi = z[2:-2]
    if np.any(zi <= 0):
        raise DomainError("interior stencil points must have z > 0")
    return d2 + (2.0 * b - 1.0) / zi * d1


def op_apply_fd(chart: ZetaChart, zgrid: np.ndarray, vals: np.ndarray):
    """L f for the chart's operator, via 4th-order differences in zeta.

    In zeta the operator is d2/dz2 + B(z) d/dz exactly, so a uniform z grid
    gives clean interior values. Returns values on zgrid[2:-2].
    """
    z = np.asarray(zgrid, dtype=float)
    h = z[1] - z[0]
    if not np.allclose(np.diff(z), h, rtol=1e-12, atol=1e-12):
        raise DomainError("zgrid must be uniform")
    d1, d2 = _fd_derivatives_uniform(vals, h)
    x_i = chart.x_of_zeta(z[2:-2])
    return d2 + chart.zeta_drift(x_i) * d1
