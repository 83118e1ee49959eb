r"""Solution operators built on the model kernels.

Covers the homogeneous Cauchy problem (tensor quadrature against the
product transition measures), the Duhamel integral for sources, the
derivative-commutation identities (x-derivatives pass to the data with a
shifted weight b -> b+p), the resolvent as a ray-deformed Laplace transform,
and the semigroup reconstructed from the resolvent by a contour integral.

The variable-coefficient interval stepper lives in parametrix.py and is
re-exported here.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SectorError
from .grids import GridFunction, TensorGridFunction, as_smooth
from .kernels import (
    KernelMatrix,
    ModelSpec,
    SectorTime,
    as_time,
    euclidean_matrix,
    transition_matrix,
)
from .parametrix import solve_wf_parametrix  # noqa: F401  (public here)
from .quadrature import adaptive_vector_panels, composite_nodes, gauss_rule

__all__ = [
    "apply_cauchy", "apply_duhamel", "derivative_commute", "resolvent_apply",
    "Contour", "semigroup_via_contour", "ModelResolventProvider",
    "solve_wf_parametrix",
]


def _as_spec(spec) -> ModelSpec:
    if isinstance(spec, ModelSpec):
        return spec
    if isinstance(spec, (tuple, list)):
        return ModelSpec(tuple(spec))
    raise DomainError(f"cannot interpret {spec!r} as a model spec")


def _axis(arr, what: str) -> np.ndarray:
    a = np.atleast_1d(np.asarray(arr, dtype=float))
    if a.ndim != 1:
        raise DomainError(f"{what} must be one-dimensional")
    return a


# ---------------------------------------------------------------------------
# Cauchy problem
# ---------------------------------------------------------------------------

def _dim_matrices(spec: ModelSpec, st: SectorTime, x_axes, y_axes, level):
    degen = [transition_matrix(spec.b[j], st, x_axes[j], level=level)
             for j in range(spec.n)]
    eucl = [euclidean_matrix(st, y_axes[l], level=level)
            for l in range(spec.m)]
    return degen, eucl


# cap on mesh entries evaluated per block so product quadratures never
# materialize multi-GB tensors
_TENSOR_BLOCK = 4_000_000


def _tensor_apply(spec: ModelSpec, st: SectorTime, f, x_axes, y_axes, level):
    """Sum over absorbed-coordinate strata of tensor-contracted quadrature."""
    degen, eucl = _dim_matrices(spec, st, x_axes, y_axes, level)
    zero_idx = [j for j in range(spec.n) if spec.b[j] == 0.0]
    shape = tuple(a.size for a in x_axes) + tuple(a.size for a in y_axes)
    dtype = complex if not st.is_real else float
    out = np.zeros(shape, dtype=dtype)

    from itertools import combinations
    for k in range(len(zero_idx) + 1):
        for S in combinations(zero_idx, k):
            coords = []
            for j in range(spec.n):
                coords.append(np.zeros(1) if j in S else degen[j].nodes)
            coords.extend(E.nodes for E in eucl)
            sizes = [c.size for c in coords]
            total = int(np.prod(sizes))
            cax = int(np.argmax(sizes))
            step = max(1, sizes[cax] * _TENSOR_BLOCK // max(total, 1))
            for s0 in range(0, sizes[cax], step):
                sl = slice(s0, min(s0 + step, sizes[cax]))
                sub = list(coords)
                sub[cax] = coords[cax][sl]
                mesh = np.meshgrid(*sub, indexing="ij")
                F = np.asarray(f(*mesh), dtype=dtype)
                F = np.broadcast_to(F, tuple(c.size for c in sub)).copy()
                # contract each axis: matrix row-apply on free axes, atom
                # weight broadcast on absorbed ones; back-to-front keeps
                # axis ids stable
                for ax in reversed(range(spec.n + spec.m)):
                    if ax < spec.n and ax in S:
                        # absorbed axis: singleton scaled by the atom weights
                        w = degen[ax].atom
                        F = np.expand_dims(np.moveaxis(F, ax, -1)[..., 0], ax)
                        F = F * np.reshape(
                            w, (1,) * ax + (-1,) + (1,) * (F.ndim - ax - 1))
                    else:
                        M = degen[ax] if ax < spec.n else eucl[ax - spec.n]
                        W = M.weights[:, sl] if ax == cax else M.weights
                        F = np.moveaxis(
                            np.tensordot(W, F, axes=(1, ax)), 0, ax)
                out = out + F
    return out


def apply_cauchy(spec, t, f, *, x_out=None, y_out=None, level: int = 0):
    """Solve the homogeneous Cauchy problem: v(., t) with v(., 0) = f.

    f may be a GridFunction (clamped interpolant supplies the extension by
    boundary values) or any vectorized callable. In one dimension the output
    grid defaults to f's own nodes; products need explicit per-axis output
    grids and a callable f broadcasting over its coordinate arrays.
    """
    spec = _as_spec(spec)
    st = as_time(t)
    if spec.n + spec.m == 1:
        if x_out is None:
            if isinstance(f, GridFunction):
                x_out = f.nodes
            else:
                raise DomainError("pass x_out when f is not a GridFunction")
        x_out = _axis(x_out, "x_out")
        if spec.n == 1:
            M = transition_matrix(spec.b[0], st, x_out, level=level)
            f0 = f(0.0) if M.atom is not None else None
            vals = M.apply(np.asarray(f(M.nodes)), f_at_zero=f0)
        else:
            M = euclidean_matrix(st, x_out, level=level)
            vals = M.apply(np.asarray(f(M.nodes)))
        return GridFunction(x_out, vals)

    x_axes = tuple(_axis(a, "x_out axis") for a in (x_out or ()))
    y_axes = tuple(_axis(a, "y_out axis") for a in (y_out or ()))
    if len(x_axes) != spec.n or len(y_axes) != spec.m:
        raise DomainError("product solves need one output axis per coordinate")
    vals = _tensor_apply(spec, st, f, x_axes, y_axes, level)
    return TensorGridFunction(x_axes + y_axes, vals)


def apply_duhamel(spec, g, t: float, n_time_panels: int = 8, *,
                  x_out=None, y_out=None, level: int = 0):
    """u(., t) = int_0^t e^{(t-s)L} g(., s) ds for a bounded source g.

    g is called as g(x, s) in one dimension (g(*coords, s) for products) and
    must broadcast. Time integration is composite Gauss-Legendre, whose open
    nodes never touch s = t, so the kernel is applied only at positive times.
    """
    spec = _as_spec(spec)
    t = float(t)
    if t <= 0:
        raise DomainError("Duhamel needs t > 0")
    if n_time_panels < 1:
        raise DomainError("need at least one time panel")
    edges = np.linspace(0.0, t, n_time_panels + 1)
    s_nodes, s_w = composite_nodes(edges, 12)
    out = None
    for s, w in zip(s_nodes, s_w):
        def fs(*coords, _s=s):
            return g(*coords, _s)
        v = apply_cauchy(spec, t - s, fs, x_out=x_out, y_out=y_out, level=level)
        out = w * v.values if out is None else out + w * v.values
    axes = v.axes if isinstance(v, TensorGridFunction) else v.nodes
    if isinstance(v, TensorGridFunction):
        return TensorGridFunction(axes, out)
    return GridFunction(axes, out)


# ---------------------------------------------------------------------------
# derivative commutation
# ---------------------------------------------------------------------------

def _compose_generator(b: float, q: int):
    """Coefficients of (x d2 + b d)^q as {derivative order j: polynomial in x}."""
    P = np.polynomial.Polynomial
    X = P([0.0, 1.0])
    terms = {0: P([1.0])}
    for _ in range(q):
        new: dict = {}
        for j, c in terms.items():
            for jj, cc in ((j, X * c.deriv(2) + b * c.deriv(1)),
                           (j + 1, 2.0 * X * c.deriv(1) + b * c),
                           (j + 2, X * c)):
                new[jj] = new.get(jj, P([0.0])) + cc
        terms = new
    return terms


def derivative_commute(spec, t, f, p: int, q: int, *, x_out=None,
                       level: int = 0) -> GridFunction:
    """d_t^q d_x^p of the Cauchy solution, computed on the data side.

    Space derivatives commute through the kernel at the price of shifting
    the weight: d_x^p v is the (b+p)-flow applied to f^{(p)}; time
    derivatives then apply the (b+p)-generator to that data q times. The
    data must supply p + 2q derivatives.
    """
    spec = _as_spec(spec)
    if spec.n != 1 or spec.m != 0:
        raise DomainError("derivative commutation is a 1-D identity here")
    if p < 0 or q < 0:
        raise DomainError("p, q must be nonnegative")
    smooth = as_smooth(f, need=p + 2 * q)
    b_eff = spec.b[0] + p
    terms = _compose_generator(b_eff, q)

    if x_out is None:
        raise DomainError("pass x_out")
    x_out = _axis(x_out, "x_out")
    M = transition_matrix(b_eff, t, x_out, level=level)

    def h(y):
        y = np.asarray(y, dtype=float)
        acc = np.zeros_like(y)
        for j, c in terms.items():
            acc = acc + c(y) * np.asarray(smooth.deriv(p + j)(y))
        return acc

    f0 = h(np.array([0.0]))[0] if M.atom is not None else None
    vals = M.apply(h(M.nodes), f_at_zero=f0)
    return GridFunction(x_out, vals)


# ---------------------------------------------------------------------------
# resolvent by ray-deformed Laplace transform
# ---------------------------------------------------------------------------

_THETA_MARGIN = 0.1


def _default_ray_angle(mu: complex) -> float:
    th = -0.5 * cmath.phase(mu)
    cap = 0.5 * math.pi - _THETA_MARGIN
    return max(-cap, min(cap, th))


def resolvent_apply(spec, mu, f, *, x_out=None, theta: float | None = None,
                    tol: float = 1e-8, level: int = 0) -> GridFunction:
    """R(mu) f = int_0^inf e^{-mu tau e^{i theta}} v(., tau e^{i theta})
    e^{i theta} d tau, integrating the Cauchy flow along a complex ray.

    The ray is tilted so the exponential decays: requires
    Re(mu e^{i theta}) > 0, which the default theta = -arg(mu)/2 (clamped
    inside the time sector) provides for every mu off the branch cut
    (-inf, 0].

    On a tilted ray (theta != 0) the kernel series runs at its cancellation
    budget, leaving irreducible noise around 1e-6 relative; the requested
    tolerance is floored there so the panel refinement does not chase it.
    """
    spec = _as_spec(spec)
    mu = complex(mu)
    if mu == 0 or (mu.imag == 0.0 and mu.real <= 0.0):
        raise DomainError("mu must avoid the branch cut (-inf, 0]")
    if theta is None:
        theta = _default_ray_angle(mu)
    if abs(theta) >= 0.5 * math.pi:
        raise SectorError(f"ray angle {theta} leaves the time sector")
    gamma = (mu * cmath.exp(1j * theta)).real
    if gamma <= 0:
        raise SectorError(
            f"no decay along the ray: Re(mu e^(i theta)) = {gamma}")

    if x_out is None:
        if isinstance(f, GridFunction):
            x_out = f.nodes
        else:
            raise DomainError("pass x_out when f is not a GridFunction")
    x_out = _axis(x_out, "x_out")
    phase = cmath.exp(1j * theta)

    def evalf(taus):
        rows = np.empty((taus.size, x_out.size), dtype=complex)
        for i, tau in enumerate(taus):
            v = apply_cauchy(spec, SectorTime(float(tau), theta), f,
                             x_out=x_out, level=level)
            rows[i] = v.values * (cmath.exp(-mu * tau * phase) * phase)
        return rows

    tau_max = 45.0 / gamma
    h0 = min(0.05 / abs(mu), 0.125 * tau_max)
    edges = [0.0, h0]
    h = h0
    while edges[-1] < tau_max:
        h = min(1.6 * h, 0.35 * tau_max)
        edges.append(min(edges[-1] + h, tau_max))
    scale = float(np.max(np.abs(np.asarray(f(x_out))))) or 1.0
    tol_abs = tol * scale / max(abs(mu), 1.0)
    if theta != 0.0:
        tol_abs = max(tol_abs, 1.2e-6 * scale)
    integral, _err, _ = adaptive_vector_panels(
        evalf, np.array(edges), tol_abs, n=12)
    vals = integral
    if mu.imag == 0.0 and theta == 0.0:
        vals = vals.real
    return GridFunction(x_out, vals)


# ---------------------------------------------------------------------------
# contour semigroup
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Contour:
    """Boundary of {|arg mu| < pi - alpha, |mu| > R}: two rays plus an arc,
    traversed upward (in along arg = -(pi - alpha), counterclockwise around
    the arc through the positive axis, out along arg = +(pi - alpha))."""

    alpha: float = math.pi / 6.0
    R: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5 * math.pi):
            raise DomainError("alpha must lie in (0, pi/2)")
        if self.R <= 0:
            raise DomainError("R must be positive")


def semigroup_via_contour(provider, t: float, contour: Contour | None = None,
                          *, n_arc_panels: int = 6, n: int = 16):
    """e^{tL} f = (1/2 pi i) oint e^{mu t} R(mu) f d mu over the contour.

    `provider` maps mu to the resolvent values on a fixed output grid (see
    ModelResolventProvider). Ray truncation is where |e^{mu t}| reaches
    1e-17; panel widths stay below the e^{i Im(mu) t} oscillation budget of
    the Gauss rule.

    The arc multiplies resolvent errors by up to e^{R t}, so for large t use
    a contour with R ~ 1/t (and a provider built with R_min to match).
    """
    t = float(t)
    if t <= 0:
        raise DomainError("semigroup time must be positive")
    contour = contour or Contour()
    beta = math.pi - contour.alpha
    r_max = contour.R + 40.0 / (t * math.cos(contour.alpha))

    edges = [contour.R]
    h = min(0.5, 2.0 / t)
    while edges[-1] < r_max:
        edges.append(min(edges[-1] + h, r_max))
        h = min(1.4 * h, 10.0 / t)
    redges = np.array(edges)
    rn, rw = composite_nodes(redges, n)

    def ray(sign: float):
        e = cmath.exp(1j * sign * beta)
        acc = None
        for r, w in zip(rn, rw):
            mu = r * e
            term = (w * e * cmath.exp(mu * t)) * np.asarray(provider(mu))
            acc = term if acc is None else acc + term
        return acc

    phis, phiw = composite_nodes(
        np.linspace(-beta, beta, n_arc_panels + 1), n)
    arc = None
    for phi, w in zip(phis, phiw):
        mu = contour.R * cmath.exp(1j * phi)
        term = (w * 1j * mu * cmath.exp(mu * t)) * np.asarray(provider(mu))
        arc = term if arc is None else arc + term

    total = (ray(+1.0) - ray(-1.0) + arc) / (2j * math.pi)
    return total


class ModelResolventProvider:
    """Resolvent values R(mu) f on a fixed grid, cheap enough for contours.

    The ray representation is precomputed once: v(., tau e^{i theta})
    e^{i theta} is cached on a fixed composite tau rule for theta = -1.15
    (used when Im mu >= 0) and its mirror +1.15 (Im mu < 0). Along the
    standard contour (alpha <= pi/6) every mu then satisfies
    Re(mu e^{i theta}) >= 0.102 |mu|, so one cached rule serves all of it,
    and each provider call is a single weighted sum over the cache.
    """

    def __init__(self, spec, f, x_out, *, theta_mag: float = 1.15,
                 R_min: float = 1.0, level: int = 0):
        self.spec = _as_spec(spec)
        self.x_out = _axis(x_out, "x_out")
        self.theta_mag = float(theta_mag)
        self.R_min = float(R_min)
        self.margin = math.cos(math.pi - math.pi / 6.0 - self.theta_mag)
        if self.margin <= 0:
            raise SectorError("theta_mag too small for the default contour")
        tau_max = 43.0 / (self.margin * self.R_min)
        near = np.arange(0.0, 4.0 + 1e-12, 0.1)
        far = [near[-1]]
        h = 0.13
        # panel growth capped so e^{-mu tau} stays resolved for |mu| >= R_min
        while far[-1] < tau_max:
            far.append(min(far[-1] + h, tau_max))
            h = min(h * 1.3, 12.0 / self.R_min)
        self.tau_nodes, self.tau_w = composite_nodes(
            np.concatenate([near, far[1:]]), 12)

        theta = -self.theta_mag
        rows = np.empty((self.tau_nodes.size, self.x_out.size), dtype=complex)
        ph = cmath.exp(1j * theta)
        for k, tau in enumerate(self.tau_nodes):
            v = apply_cauchy(self.spec, SectorTime(float(tau), theta), f,
                             x_out=self.x_out, level=level)
            rows[k] = v.values * ph
        self._V_neg = rows
        fv = np.asarray(f(self.x_out))
        self._f_real = bool(np.isrealobj(fv))
        self._V_pos = np.conj(rows) if self._f_real else None
        self._f = f

    def _rows(self, theta: float):
        if theta < 0:
            return self._V_neg
        if self._V_pos is None:
            ph = cmath.exp(1j * theta)
            rows = np.empty_like(self._V_neg)
            for k, tau in enumerate(self.tau_nodes):
                v = apply_cauchy(self.spec, SectorTime(float(tau), theta),
                                 self._f, x_out=self.x_out)
                rows[k] = v.values * ph
            self._V_pos = rows
        return self._V_pos

    def __call__(self, mu):
        mu = complex(mu)
        theta = -self.theta_mag if mu.imag >= 0 else self.theta_mag
        gamma = (mu * cmath.exp(1j * theta)).real
        if gamma <= 0:
            raise SectorError(
                f"mu = {mu} sees no decay at ray angle {theta}")
        w = self.tau_w * np.exp(-mu * cmath.exp(1j * theta) * self.tau_nodes)
        return w @ self._rows(theta)
