"""Intrinsic geometry of the degenerate-diffusion state space.

Points carry n nonnegative "square-root" coordinates and m Euclidean ones.
The natural metric ds^2 = sum dx_j^2/x_j + sum dy_k^2 has distance comparable
to sum |sqrt(x_j) - sqrt(x_j')| + sum |y_k - y_k'|, and that comparable
expression is used here verbatim as the working distance. A space-time
variant appends sqrt(|t - t'|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "WfPoint",
    "as_wf_point",
    "wf_distance",
    "wf_distance_parabolic",
    "wf_ball_interval",
    "wf_midpoint",
]


@dataclass(frozen=True)
class WfPoint:
    """A point with degenerate coordinates x >= 0 and Euclidean ones y."""

    x: np.ndarray
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float)) if np.size(self.y) \
            else np.zeros(0)
        if x.ndim != 1 or y.ndim != 1:
            raise DomainError("coordinates must be one-dimensional")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise DomainError("coordinates must be finite")
        if np.any(x < 0):
            raise DomainError(f"degenerate coordinates must be >= 0, got {x}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def as_wf_point(p) -> WfPoint:
    """Coerce a WfPoint, an (x, y) pair, or bare x data into a WfPoint."""
    if isinstance(p, WfPoint):
        return p
    if isinstance(p, tuple) and len(p) == 2:
        return WfPoint(np.atleast_1d(p[0]), np.atleast_1d(p[1]))
    return WfPoint(np.atleast_1d(p))


def _check_pair(p, q):
    p, q = as_wf_point(p), as_wf_point(q)
    if p.x.size != q.x.size or p.y.size != q.y.size:
        raise DomainError(
            f"dimension mismatch: ({p.x.size},{p.y.size}) vs "
            f"({q.x.size},{q.y.size})")
    return p, q


def wf_distance(p, q) -> float:
    """sum_j |sqrt(x_j) - sqrt(x_j')| + sum_k |y_k - y_k'|."""
    p, q = _check_pair(p, q)
    ds = float(np.sum(np.abs(np.sqrt(p.x) - np.sqrt(q.x))))
    de = float(np.sum(np.abs(p.y - q.y)))
    return ds + de


def wf_distance_parabolic(p, t: float, q, t_prime: float) -> float:
    """Space-time distance: the spatial distance plus sqrt(|t - t'|)."""
    return wf_distance(p, q) + math.sqrt(abs(float(t) - float(t_prime)))


def wf_ball_interval(x1: float, x2: float) -> tuple[float, float]:
    """The comparison interval J = [alpha, beta] around [x1, x2].

    sqrt(alpha) = max((3 sqrt(x1) - sqrt(x2))/2, 0) and
    sqrt(beta) = (3 sqrt(x2) - sqrt(x1))/2, so J contains [x1, x2] with
    sqrt-scale margins on both sides; alpha > 0 exactly when x1/x2 > 1/9.
    """
    x1, x2 = float(x1), float(x2)
    if not 0 <= x1 < x2:
        raise DomainError(f"need 0 <= x1 < x2, got {x1}, {x2}")
    ra = max((3.0 * math.sqrt(x1) - math.sqrt(x2)) / 2.0, 0.0)
    rb = (3.0 * math.sqrt(x2) - math.sqrt(x1)) / 2.0
    return ra * ra, rb * rb


def wf_midpoint(x1: float, x2: float) -> float:
    """Metric midpoint of x1, x2 >= 0 on the half-line: ((sqrt x1 + sqrt x2)/2)^2."""
    x1, x2 = float(x1), float(x2)
    if x1 < 0 or x2 < 0:
        raise DomainError("midpoint needs nonnegative arguments")
    return ((math.sqrt(x1) + math.sqrt(x2)) / 2.0) ** 2
