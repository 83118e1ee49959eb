"""Anisotropic Hölder seminorms on one-dimensional grids.

The seminorm is sup |f(z) - f(z')| / d(z,z')^gamma over grid pairs at
distance at most 1, where d is the square-root (spatial) distance
|sqrt(x) - sqrt(x')|, optionally plus sqrt(|t - t'|) in parabolic mode.
Restricting to pairs at distance <= 1 changes the norm only up to a factor
of 2 sup|f| and makes it monotone in gamma; grid values are lower bounds
for the continuum seminorms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SmoothnessError
from .grids import GridFunction

__all__ = ["HolderReport", "holder_seminorm", "holder_norm_2plus"]

# pair blocks keep the O(n^2) scans inside a bounded working set
_PAIR_BLOCK = 2_000_000


@dataclass(frozen=True)
class HolderReport:
    """Grid-restricted Hölder data for one function (or one per component)."""

    gamma: float
    sup_norm: float
    seminorm: float
    components: dict = field(default_factory=dict)
    flagged: bool = False


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    return gamma


def _pair_sup(coords, values, gamma: float) -> float:
    """sup over pairs with 0 < d <= 1 of |dv| / d^gamma; coords pre-rooted."""
    n = coords.shape[0]
    if n < 2:
        raise DomainError("need at least two grid points to form pairs")
    best = 0.0
    found = False
    rows = max(1, _PAIR_BLOCK // n)
    for lo in range(0, n, rows):
        hi = min(lo + rows, n)
        d = np.abs(coords[lo:hi, None, :] - coords[None, :, :]).sum(axis=2)
        dv = np.abs(values[lo:hi, None] - values[None, :])
        mask = (d > 0.0) & (d <= 1.0)
        if np.any(mask):
            found = True
            best = max(best, float(np.max(dv[mask] / d[mask] ** gamma)))
    if not found:
        raise DomainError("no grid pairs at distance <= 1; refine the grid")
    return best


def _as_grid(f) -> GridFunction:
    if isinstance(f, GridFunction):
        return f
    if isinstance(f, tuple) and len(f) == 2:
        return GridFunction(np.asarray(f[0], dtype=float),
                            np.asarray(f[1], dtype=float))
    raise DomainError("expected a GridFunction or a (nodes, values) pair")


def holder_seminorm(f, gamma: float, mode: str = "spatial", *,
                    times=None) -> HolderReport:
    """Grid seminorm of f at exponent gamma, spatial or parabolic.

    Spatial mode takes one GridFunction. Parabolic mode takes a sequence of
    GridFunctions on a common grid, one per entry of `times`, and measures
    increments against |sqrt x - sqrt x'| + sqrt|t - t'|.
    """
    gamma = _check_gamma(gamma)
    if mode == "spatial":
        g = _as_grid(f)
        if np.any(g.nodes < 0):
            raise DomainError("spatial grid must be nonnegative")
        coords = np.sqrt(g.nodes)[:, None]
        vals = np.asarray(g.values, dtype=float)
        semi = _pair_sup(coords, vals, gamma)
        return HolderReport(gamma, float(np.max(np.abs(vals))), semi)
    if mode == "parabolic":
        if times is None:
            raise DomainError("parabolic mode needs the `times` array")
        times = np.asarray(times, dtype=float)
        snaps = [_as_grid(fi) for fi in f]
        if len(snaps) != times.size:
            raise DomainError("one grid function per time entry expected")
        nodes = snaps[0].nodes
        for s in snaps[1:]:
            if s.nodes.shape != nodes.shape or not np.array_equal(s.nodes, nodes):
                raise DomainError("parabolic snapshots must share one grid")
        if np.any(nodes < 0):
            raise DomainError("spatial grid must be nonnegative")
        rx = np.sqrt(nodes)
        # space-time points flattened; distance adds sqrt(time gap)
        X = np.repeat(rx, times.size)
        T = np.sqrt(np.abs(np.tile(times, nodes.size)))
        vals = np.stack([s.values for s in snaps], axis=1).reshape(-1)
        coords = np.stack([X, T], axis=1)
        semi = _pair_sup(coords, vals, gamma)
        return HolderReport(gamma, float(np.max(np.abs(vals))), semi)
    raise DomainError(f"unknown mode {mode!r}")


def _derivative_grids(g: GridFunction, df, d2f):
    x = g.nodes
    if x.size < 3 and (df is None or d2f is None):
        raise SmoothnessError(
            "need derivative data or at least 3 nodes for differences")

    def resolve(spec, order):
        if spec is None:
            if order == 1:
                return np.gradient(g.values, x, edge_order=2)
            return np.gradient(np.gradient(g.values, x, edge_order=2), x,
                               edge_order=2)
        if callable(spec):
            return np.asarray(spec(x), dtype=float)
        arr = np.asarray(spec, dtype=float)
        if arr.shape != x.shape:
            raise SmoothnessError(
                f"derivative grid shape {arr.shape} != nodes {x.shape}")
        return arr

    return resolve(df, 1), resolve(d2f, 2)


def holder_norm_2plus(f, gamma: float, *, df=None, d2f=None) -> HolderReport:
    """Second-order Hölder report: components f, df, and x d2f.

    Each component gets its own sup and gamma-seminorm; the report is
    flagged when x f''(x) fails to vanish at the left edge of the grid
    (the admissibility condition at the degenerate endpoint).
    """
    gamma = _check_gamma(gamma)
    g = _as_grid(f)
    if np.any(g.nodes < 0):
        raise DomainError("grid must be nonnegative")
    dfv, d2fv = _derivative_grids(g, df, d2f)
    if not np.all(np.isfinite(dfv)):
        raise SmoothnessError("first-derivative data is not finite on the grid")
    xd2 = g.nodes * d2fv
    if not np.all(np.isfinite(xd2)):
        raise SmoothnessError(
            "x * f'' is not finite on the grid; supply data on nodes where "
            "the scaled second derivative exists (start away from 0)")

    comps = {}
    worst_sup = 0.0
    worst_semi = 0.0
    for name, vals in (("f", np.asarray(g.values, dtype=float)),
                       ("df", dfv), ("xd2f", xd2)):
        rep = holder_seminorm(GridFunction(g.nodes, vals), gamma)
        comps[name] = {"sup_norm": rep.sup_norm, "seminorm": rep.seminorm}
        worst_sup = max(worst_sup, rep.sup_norm)
        worst_semi = max(worst_semi, rep.seminorm)

    scale = max(1.0, float(np.max(np.abs(xd2))))
    edge = float(np.abs(xd2[0 if g.nodes[0] > 0 else min(1, xd2.size - 1)]))
    flagged = edge > 0.05 * scale
    return HolderReport(gamma, worst_sup, worst_semi, comps, flagged)
