"""Grid containers shared by the solver and verification layers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SmoothnessError


def _check_axis(nodes) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise DomainError("grid axis needs at least two nodes")
    if not np.all(np.diff(nodes) > 0):
        raise DomainError("grid axis must be strictly increasing")
    return nodes


@dataclass(frozen=True)
class GridFunction:
    """Values on a 1-D grid, callable as a clamped linear interpolant.

    Outside [nodes[0], nodes[-1]] the boundary value is used, which is the
    extension-by-boundary-values convention the solve operators assume.
    """

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = _check_axis(self.nodes)
        values = np.asarray(self.values)
        if values.shape != nodes.shape:
            raise DomainError(
                f"values shape {values.shape} != nodes shape {nodes.shape}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, f, nodes) -> "GridFunction":
        nodes = _check_axis(nodes)
        return cls(nodes, np.asarray(f(nodes)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.iscomplexobj(self.values):
            re = np.interp(x, self.nodes, self.values.real)
            im = np.interp(x, self.nodes, self.values.imag)
            return re + 1j * im
        return np.interp(x, self.nodes, self.values)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def map_values(self, fn) -> "GridFunction":
        return GridFunction(self.nodes, np.asarray(fn(self.values)))


@dataclass(frozen=True)
class TensorGridFunction:
    """Values on a tensor-product grid with clamped multilinear interpolation."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(_check_axis(a) for a in self.axes)
        values = np.asarray(self.values)
        if values.shape != tuple(a.size for a in axes):
            raise DomainError("tensor values shape does not match axes")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)

    def __call__(self, *coords):
        from scipy.interpolate import RegularGridInterpolator
        pts = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
        stacked = np.stack([np.clip(p, a[0], a[-1])
                            for p, a in zip(pts, self.axes)], axis=-1)
        interp = RegularGridInterpolator(self.axes, self.values)
        return interp(stacked)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Solution snapshots: axes x times, values[k] on the tensor grid at times[k]."""

    axes: tuple
    times: np.ndarray
    values: np.ndarray
    truncation_bound: float = np.inf

    def __post_init__(self):
        axes = tuple(_check_axis(a) for a in self.axes)
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or np.any(np.diff(times) <= 0):
            raise DomainError("times must be strictly increasing")
        values = np.asarray(self.values)
        want = (times.size,) + tuple(a.size for a in axes)
        if values.shape != want:
            raise DomainError(f"values shape {values.shape}, expected {want}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def snapshot(self, k: int):
        if len(self.axes) == 1:
            return GridFunction(self.axes[0], self.values[k])
        return TensorGridFunction(self.axes, self.values[k])


def required_truncation(t_max: float, b_max: float) -> float:
    """Domain truncation adequate for times up to t_max with weights up to b_max."""
    return 10.0 * float(t_max) * (1.0 + float(b_max))


def orthant_truncation(x_max: float, t: float, b_max: float) -> float:
    """Right endpoint for a solve on the half line: far enough that the mass
    the kernel can move past it is negligible."""
    return max(10.0, float(x_max) + 40.0 * float(t) * (1.0 + float(b_max)))


@dataclass(frozen=True)
class SmoothFunction:
    """A callable bundled with as many derivative callables as it can offer.

    deriv(0) is the function itself; deriv(k) raises if the k-th derivative
    was not supplied.
    """

    f: object
    derivatives: tuple = field(default=())

    def __call__(self, x):
        return self.f(x)

    @property
    def order(self) -> int:
        return len(self.derivatives)

    def deriv(self, k: int):
        if k == 0:
            return self.f
        if k > len(self.derivatives):
            raise SmoothnessError(
                f"derivative order {k} not available (have {self.order})")
        return self.derivatives[k - 1]


def as_smooth(f, need: int = 0) -> SmoothFunction:
    """Wrap f as a SmoothFunction with at least `need` derivatives.

    numpy Polynomials differentiate exactly; SmoothFunctions pass through
    (checked for depth); anything else is accepted only when need == 0.
    """
    if isinstance(f, SmoothFunction):
        if f.order < need:
            raise SmoothnessError(f"need {need} derivatives, have {f.order}")
        return f
    if isinstance(f, np.polynomial.Polynomial):
        derivs = []
        p = f
        for _ in range(max(need, 1)):
            p = p.deriv()
            derivs.append(p)
        return SmoothFunction(f, tuple(derivs))
    if need > 0:
        raise SmoothnessError(
            "this operation differentiates its data; pass a SmoothFunction "
            "with derivative callables or a numpy Polynomial")
    return SmoothFunction(f)
