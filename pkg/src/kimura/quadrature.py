"""Panel Gauss rules shared by the kernel integrators."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import ConvergenceError


@lru_cache(maxsize=128)
def gauss_rule(n: int):
    """Gauss-Legendre nodes/weights on [-1, 1], cached."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    return x, w


@lru_cache(maxsize=128)
def jacobi_rule(n: int, beta: float):
    """Gauss-Jacobi nodes/weights on [-1, 1] for weight (1+x)^beta, cached."""
    x, w = roots_jacobi(int(n), 0.0, float(beta))
    return x, w


def composite_nodes(edges, n: int):
    """Gauss-Legendre nodes and weights over consecutive panels.

    Returns flat arrays (nodes, weights) of length n * (len(edges)-1).
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_rule(n)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def bisect_edges(edges, times: int = 1):
    edges = np.asarray(edges, dtype=float)
    for _ in range(times):
        mids = 0.5 * (edges[1:] + edges[:-1])
        edges = np.sort(np.concatenate([edges, mids]))
    return edges


def geometric_edges(a: float, b: float, first: float, growth: float = 1.7,
                    max_panels: int = 64):
    """Edges from a to b with panel widths first, first*growth, ... capped at b."""
    if b <= a:
        return np.array([a, b]) if b > a else np.array([a])
    pts = [a]
    width = first
    while pts[-1] < b and len(pts) < max_panels:
        pts.append(min(pts[-1] + width, b))
        width *= growth
    pts[-1] = b
    return np.array(pts)


def adaptive_vector_panels(evalf, edges, tol: float, n: int = 16,
                           max_rounds: int = 14, max_panels: int = 4096):
    """Adaptive panel integration of a vector-valued integrand.

    evalf(x) takes a flat node array and returns an array whose leading axis
    matches x; the integral is taken over that axis. Panels whose (n vs 2n)
    discrepancy exceeds its share of ``tol`` are bisected. Returns
    (integral, error_estimate, edges).
    """
    edges = np.asarray(sorted(set(np.asarray(edges, dtype=float))), dtype=float)
    if len(edges) < 2:
        raise ValueError("need at least one panel")

    def panel_pair(a, b):
        xs1, w1 = composite_nodes([a, b], n)
        xs2, w2 = composite_nodes([a, b], 2 * n)
        f1 = evalf(xs1)
        f2 = evalf(xs2)
        i1 = np.tensordot(w1, f1, axes=(0, 0))
        i2 = np.tensordot(w2, f2, axes=(0, 0))
        err = np.max(np.abs(np.atleast_1d(i1 - i2)))
        return i2, err

    vals = {}
    for a, b in zip(edges[:-1], edges[1:]):
        vals[(a, b)] = panel_pair(a, b)
    for _ in range(max_rounds):
        total_err = sum(v[1] for v in vals.values())
        if total_err <= tol:
            break
        worst = sorted(vals, key=lambda k: -vals[k][1])
        budget = tol / (2 * len(vals))
        to_split = [k for k in worst if vals[k][1] > budget][: max(1, len(vals) // 2)]
        if not to_split or len(vals) >= max_panels:
            break
        for a, b in to_split:
            del vals[(a, b)]
            m = 0.5 * (a + b)
            vals[(a, m)] = panel_pair(a, m)
            vals[(m, b)] = panel_pair(m, b)
    total_err = sum(v[1] for v in vals.values())
    total = sum(v[0] for v in vals.values())
    if total_err > tol:
        raise ConvergenceError(
            f"adaptive quadrature stalled at error {total_err:.3e} > tol {tol:.3e}",
            {"error": total_err, "tol": tol, "panels": len(vals)})
    final_edges = np.array(sorted({e for k in vals for e in k}))
    return total, total_err, final_edges
