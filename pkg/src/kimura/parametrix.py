r"""One-step parametrix marching for interval diffusions.

In the stretched coordinate zeta the generator a(x)x(1-x)d^2 + drift(x)d
becomes d^2/dzeta^2 + B(zeta) d/dzeta exactly, so a time step dt is a
unit-diffusivity heat step with a drift shift away from the endpoints. Inside
a collar of width ``delta`` at each endpoint the step is replaced by the
model transition measure in the local square-root chart x~ = (zeta_loc/2)^2,
with the weight frozen at the row's own grid point. The two step families
are blended by a smooth partition of unity and every row is normalized to
unit mass, making each step a Markov matrix: the discrete solution obeys
sup v <= sup f exactly, step by step.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse
from scipy.special import ndtr

from .errors import DomainError, StepSizeError
from .grids import GridFunction
from .kernels import transition_measure_1d
from .operators import KimuraOp1D, ZetaChart

__all__ = ["solve_wf_parametrix", "parametrix_step_matrix"]

_GAUSS_REACH = 7.0  # standard deviations kept in an interior row


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (10.0 + s * (6.0 * s - 15.0))


def _partition(x, delta: float):
    """chi0, chi_mid, chi1 at x: 1 on [0, delta/2], 0 beyond delta, quintic."""
    x = np.asarray(x, dtype=float)
    chi0 = 1.0 - _smoothstep((x - 0.5 * delta) / (0.5 * delta))
    chi1 = 1.0 - _smoothstep(((1.0 - x) - 0.5 * delta) / (0.5 * delta))
    return chi0, 1.0 - chi0 - chi1, chi1


def _interior_band(zgrid, idx, Bvals, dt: float):
    """Hat-basis weights of N(zeta_i + B_i dt, 2 dt) for the rows in idx."""
    h = zgrid[1] - zgrid[0]
    N = zgrid.size
    s = math.sqrt(2.0 * dt)
    c = zgrid[idx] + Bvals * dt
    K = int(math.ceil((_GAUSS_REACH * s + float(np.max(np.abs(Bvals))) * dt)
                      / h)) + 1
    offs = np.arange(-K, K + 1)
    cols = np.rint(c / h).astype(int)[:, None] + offs[None, :]
    ok = (cols >= 0) & (cols < N)
    zj = cols * h
    lo = (zj - h - c[:, None]) / s
    mid = (zj - c[:, None]) / s
    hi = (zj + h - c[:, None]) / s
    Plo, Pmid, Phi = ndtr(lo), ndtr(mid), ndtr(hi)
    pdf = lambda u: np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    dlo, dmid, dhi = pdf(lo), pdf(mid), pdf(hi)
    # int of zeta against the Gaussian over [l, r]: c*(Phi_r-Phi_l) - s*(pdf_r-pdf_l)
    i1_left = c[:, None] * (Pmid - Plo) - s * (dmid - dlo)
    i1_right = c[:, None] * (Phi - Pmid) - s * (dhi - dmid)
    w = ((i1_left - (zj - h) * (Pmid - Plo))
         + ((zj + h) * (Phi - Pmid) - i1_right)) / h
    w = np.where(ok, w, 0.0)
    w /= w.sum(axis=1, keepdims=True)
    rows = np.repeat(idx, offs.size)
    mask = ok.ravel()
    return rows[mask], np.clip(cols.ravel()[mask], 0, N - 1), w.ravel()[mask]


def _collar_row(chart: ZetaChart, zgrid, i: int, dt: float, endpoint: int,
                level: int):
    """Model-step row in the local chart of one endpoint, as hat weights."""
    h = zgrid[1] - zgrid[0]
    N = zgrid.size
    zmax = zgrid[-1]
    zeta_loc = zgrid[i] if endpoint == 0 else zmax - zgrid[i]
    xt = (0.5 * zeta_loc) ** 2
    x_true = float(np.asarray(chart.x_of_zeta(zgrid[i])).reshape(-1)[0])
    bw = chart.local_weight(x_true, endpoint)
    if bw < 0.0:
        if bw < -1e-10:
            raise DomainError(
                f"frozen weight {bw:.3e} < 0 at x = {x_true:.4g}; the collar "
                "chart needs an inward (or zero) drift at the endpoint")
        bw = 0.0
    meas = transition_measure_1d(bw, dt, xt, level=level)
    zq = 2.0 * np.sqrt(meas.rule.nodes)
    if endpoint == 1:
        zq = zmax - zq
    wq = meas.rule.weights
    pos = np.clip(zq / h, 0.0, N - 1.0)
    j = np.minimum(pos.astype(int), N - 2)
    frac = pos - j
    cols = np.concatenate([j, j + 1])
    vals = np.concatenate([wq * (1.0 - frac), wq * frac])
    if meas.atom_weight > 0.0:
        cols = np.append(cols, 0 if endpoint == 0 else N - 1)
        vals = np.append(vals, meas.atom_weight)
    vals /= vals.sum()
    return cols, vals


def parametrix_step_matrix(chart: ZetaChart, zgrid: np.ndarray, dt: float,
                           delta: float, *, level: int = 0):
    """One Markov step on the uniform zeta grid; rows sum to one exactly."""
    h = zgrid[1] - zgrid[0]
    N = zgrid.size
    x_nodes = np.asarray(chart.x_of_zeta(zgrid), dtype=float)
    chi0, chim, chi1 = _partition(x_nodes, delta)

    rows_l, cols_l, vals_l = [], [], []

    idx_mid = np.nonzero(chim > 0.0)[0]
    if idx_mid.size:
        B = np.asarray(chart.zeta_drift(x_nodes[idx_mid]), dtype=float)
        r, cvec, w = _interior_band(zgrid, idx_mid, B, dt)
        rows_l.append(r)
        cols_l.append(cvec)
        vals_l.append(w * chim[r])

    for endpoint, chi in ((0, chi0), (1, chi1)):
        for i in np.nonzero(chi > 0.0)[0]:
            cvec, w = _collar_row(chart, zgrid, int(i), dt, endpoint, level)
            rows_l.append(np.full(cvec.size, i))
            cols_l.append(cvec)
            vals_l.append(w * chi[i])

    A = sparse.coo_matrix(
        (np.concatenate(vals_l),
         (np.concatenate(rows_l), np.concatenate(cols_l))),
        shape=(N, N)).tocsr()
    return A


def _grid_for(chart: ZetaChart, dt: float):
    zmax = chart.zeta_max
    N = max(int(math.ceil(zmax / (0.25 * dt ** 0.75))), 32)
    return np.linspace(0.0, zmax, N + 1)


def solve_wf_parametrix(op: KimuraOp1D, f, t: float, dt: float, *,
                        delta: float = 0.1, level: int = 0) -> GridFunction:
    """March the interval Cauchy problem to time t in steps of dt.

    Returns the solution on the image of a uniform zeta grid (so the x nodes
    cluster quadratically at both endpoints). f is a callable or
    GridFunction evaluated at those nodes. Steps must resolve the collar:
    dt <= delta^2 and the interior Gaussian reach must stay short of the
    inner collar edge, otherwise StepSizeError.
    """
    t = float(t)
    dt = float(dt)
    if t <= 0 or dt <= 0:
        raise DomainError("t and dt must be positive")
    if not (0.0 < delta <= 0.25):
        raise DomainError("delta must lie in (0, 0.25]")
    if dt > delta * delta:
        raise StepSizeError(
            f"dt = {dt:.3g} exceeds delta^2 = {delta * delta:.3g}; shrink dt "
            "or widen the collar")
    chart = ZetaChart(op)
    reach = _GAUSS_REACH * math.sqrt(2.0 * dt)
    inner = float(chart.zeta(0.5 * delta))
    if reach >= inner:
        raise StepSizeError(
            f"interior step reach {reach:.3g} crosses the inner collar edge "
            f"{inner:.3g}; shrink dt or widen the collar")

    zgrid = _grid_for(chart, dt)
    x_nodes = np.asarray(chart.x_of_zeta(zgrid), dtype=float)
    v = np.asarray(f(x_nodes), dtype=float)

    nsteps = int(math.floor(t / dt + 1e-12))
    rem = t - nsteps * dt
    A = parametrix_step_matrix(chart, zgrid, dt, delta, level=level)
    for _ in range(nsteps):
        v = A @ v
    if rem > 1e-12 * max(t, 1.0):
        A_rem = parametrix_step_matrix(chart, zgrid, rem, delta, level=level)
        v = A_rem @ v
    return GridFunction(x_nodes, v)
