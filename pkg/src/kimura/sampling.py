r"""Exact transition sampling and Monte Carlo path estimators.

The transition measure of L_b = x d^2/dx^2 + b d/dx factors into a
Poisson-Gamma mixture. Expanding psi_b(x y/t^2) termwise inside

    k_t^b(x, y) dy = (y^{b-1}/t^b) e^{-(x+y)/t} psi_b(x y / t^2) dy

with psi_b(z) = sum_j z^j / (j! Gamma(j+b)) collects, term by term,

    k_t^b(x, dy) = sum_{j>=0} Pois_{x/t}(j) Gamma(j + b, scale t)(dy),

so one exact draw is J ~ Poisson(x/t) followed by Y ~ Gamma(J + b, scale t).
For b = 0 the j = 0 term is the unit mass at the origin with weight
e^{-x/t} (the absorbed atom), and the j >= 1 terms reindex to the density
(x/t^2) e^{-(x+y)/t} psi_2(x y/t^2): exactly the absorbing-boundary form of
the kernel. The identity is checked numerically in the test suite before
anything downstream trusts the sampler.

Paths of a full operator L = a(x) x(1-x) d^2/dx^2 + drift(x) d/dx on [0,1]
are simulated in the zeta coordinate: an exact Gaussian step in the
interior (where L = d^2/dzeta^2 + B d/dzeta with bounded B), and inside a
collar of width 0.1 next to each endpoint one exact step of the frozen
boundary model in the local chart x~ = (zeta_loc/2)^2, using the endpoint's
own (Feller) weight plus a first-order shift for the variable part. A step
may land on the frozen model's atom only when that weight is 0, and such a
step is recorded as absorption; no thresholding of small positive states is
ever applied.

Gamma draws with shape < 1 (b < 1 with J = 0) and all Poisson draws are
delegated to numpy's Generator, which boosts small shapes through
Gamma(shape+1) * U^{1/shape} and switches Poisson between inversion and
rejection by the size of the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StepSizeError
from .operators import KimuraOp1D, ZetaChart

_COLLAR = 0.1          # x-width of the boundary collars
_MAX_RESAMPLE = 100    # redraw budget for in-step rejection
_CHUNK = 5000          # paths advanced per derived stream


@dataclass(frozen=True)
class RngStream:
    """Reproducible random source: (seed, stream) fixes every draw."""

    seed: int
    stream: int = 0

    def generator(self, *extra: int) -> np.random.Generator:
        key = (self.stream,) + extra
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=key)))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError("rng must be an RngStream or numpy Generator")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with its standard error (sample std / sqrt(n))."""

    mean: float
    std_error: float
    n: int
    n_unabsorbed: int = 0
    flagged: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("an estimate needs n >= 2 samples")


def _mc_estimate(values: np.ndarray, n_unabsorbed: int = 0,
                 n_total: int | None = None) -> McEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    total = n if n_total is None else n_total
    return McEstimate(float(values.mean()),
                      float(values.std(ddof=1) / math.sqrt(n)),
                      n, n_unabsorbed, flagged=n_unabsorbed > 0.01 * total)


# ---------------------------------------------------------------------------
# exact model transitions
# ---------------------------------------------------------------------------

def sample_transition(b: float, t: float, x: float, rng, size=None):
    """Draw from the model transition measure at time t started from x.

    J ~ Poisson(x/t) then Y ~ Gamma(J+b, scale t); for b = 0 the event
    J = 0 is the atom and the draw is exactly 0. Returns a scalar when
    ``size`` is None, else an ndarray of that shape.
    """
    if not (t > 0):
        raise DomainError(f"t must be positive, got {t}")
    if b < 0 or x < 0:
        raise DomainError("b and x must be nonnegative")
    g = _as_generator(rng)
    J = g.poisson(x / t, size=size)
    # numpy's gamma(0) returns exactly 0, which is precisely the b=0 atom
    y = g.gamma(np.asarray(J, dtype=float) + b, scale=t)
    if size is None:
        return float(y)
    return y


def sample_path_model(b: float, times, x0: float, rng) -> np.ndarray:
    """Exact model path observed at the given strictly increasing times."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("times must be a nonempty 1-d sequence")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise DomainError("times must be strictly increasing and nonnegative")
    if x0 < 0:
        raise DomainError("x0 must be nonnegative")
    g = _as_generator(rng)
    out = np.empty(times.size)
    prev_t, prev_x = 0.0, float(x0)
    for i, tk in enumerate(times):
        dt = tk - prev_t
        if dt == 0.0:
            out[i] = prev_x
            continue
        if b == 0.0 and prev_x == 0.0:
            out[i] = 0.0  # absorbed: the atom is a fixed point
        else:
            out[i] = sample_transition(b, dt, prev_x, g)
        prev_t, prev_x = tk, out[i]
    return out


# ---------------------------------------------------------------------------
# Wright-Fisher-type paths on [0,1]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WfPath:
    """A discretized path with its absorption record."""

    times: np.ndarray
    states: np.ndarray
    absorbed: bool
    endpoint: int | None = None
    time_absorbed: float | None = None


def _collar_step(chart: ZetaChart, x, endpoint: int, dt: float, g):
    """One frozen-model step for every entry of x, all in one collar.

    Returns (new_x, absorbed_mask). Absorption can only happen when the
    endpoint weight is 0 and the Poisson count hits the atom.
    """
    zmax = chart.zeta_max
    b0 = chart.feller_weight(endpoint)
    zloc = chart.zeta(x) if endpoint == 0 else zmax - chart.zeta(x)
    xt = 0.25 * zloc * zloc
    bshift = (np.asarray(chart.local_weight(x, endpoint)) - b0) * dt

    J = g.poisson(xt / dt)
    atom = (J == 0) if b0 == 0.0 else np.zeros(np.shape(J), dtype=bool)
    y = g.gamma(np.asarray(J, dtype=float) + b0, scale=dt) + bshift
    # the drift shift may push a density draw below 0: resample that step
    # from the exact model law (the law itself lives on the halfline)
    bad = ~atom & (y < 0.0)
    tries = 0
    while np.any(bad):
        tries += 1
        if tries > _MAX_RESAMPLE:
            raise StepSizeError(
                "in-step resampling failed repeatedly; dt too large for "
                "the local drift shift")
        J = g.poisson(xt[bad] / dt)
        fresh_atom = (J == 0) if b0 == 0.0 else np.zeros(J.shape, dtype=bool)
        yb = g.gamma(np.asarray(J, dtype=float) + b0, scale=dt) + bshift[bad]
        sel = np.flatnonzero(bad)
        atom[sel] = fresh_atom
        y[sel] = yb
        bad = ~atom & (y < 0.0)
    y = np.where(atom, 0.0, y)

    zloc_new = 2.0 * np.sqrt(np.maximum(y, 0.0))
    if np.any(zloc_new > 0.5 * zmax):
        raise StepSizeError(
            "a collar step crossed the domain midpoint; reduce dt")
    znew = zloc_new if endpoint == 0 else zmax - zloc_new
    return chart.x_of_zeta(znew), atom


def _interior_step(chart: ZetaChart, x, dt: float, g):
    zmax = chart.zeta_max
    z = chart.zeta(x)
    B = chart.zeta_drift(x)
    sig = math.sqrt(2.0 * dt)
    znew = z + B * dt + sig * g.standard_normal(np.shape(x))
    bad = (znew <= 0.0) | (znew >= zmax)
    tries = 0
    while np.any(bad):
        tries += 1
        if tries > _MAX_RESAMPLE:
            raise StepSizeError("interior step cannot stay inside [0,1]; "
                                "reduce dt")
        znew[bad] = z[bad] + B[bad] * dt + sig * g.standard_normal(
            int(np.count_nonzero(bad)))
        bad = (znew <= 0.0) | (znew >= zmax)
    return chart.x_of_zeta(znew)


def _run_paths(op: KimuraOp1D, dt: float, horizon: float, x0: float, g,
               n_paths: int, record: bool = False):
    """Vectorized lockstep advance of n_paths; optionally record states.

    Returns (endpoint, t_abs, final_x, trace) where endpoint is -1 for
    never-absorbed paths and trace is None unless record=True.
    """
    if not (dt > 0):
        raise DomainError(f"dt must be positive, got {dt}")
    if not (0.0 <= x0 <= 1.0):
        raise DomainError(f"x0 must lie in [0,1], got {x0}")
    chart = ZetaChart(op)
    n_steps = int(math.ceil(horizon / dt))

    endpoint = np.full(n_paths, -1, dtype=int)
    t_abs = np.full(n_paths, np.nan)
    final_x = np.full(n_paths, float(x0))
    trace = [float(x0)] if record else None

    # a start exactly on an absorbing endpoint is absorbed at time 0
    w0 = chart.feller_weight(0)
    w1 = chart.feller_weight(1)
    if (x0 == 0.0 and w0 == 0.0) or (x0 == 1.0 and w1 == 0.0):
        e = 0 if x0 == 0.0 else 1
        endpoint[:] = e
        t_abs[:] = 0.0
        if record:
            return endpoint, t_abs, final_x, np.array([x0])
        return endpoint, t_abs, final_x, None

    idx = np.arange(n_paths)
    x = np.full(n_paths, float(x0))
    for k in range(n_steps):
        if idx.size == 0:
            break
        xa = x
        in0 = xa < _COLLAR
        in1 = xa > 1.0 - _COLLAR
        mid = ~(in0 | in1)
        xnew = np.empty_like(xa)
        dead = np.zeros(xa.size, dtype=bool)
        if np.any(mid):
            xnew[mid] = _interior_step(chart, xa[mid], dt, g)
        for e, m in ((0, in0), (1, in1)):
            if np.any(m):
                xm, atom = _collar_step(chart, xa[m], e, dt, g)
                xnew[m] = np.where(atom, float(e), xm)
                if np.any(atom):
                    sel = np.flatnonzero(m)[atom]
                    dead[sel] = True
                    endpoint[idx[sel]] = e
                    t_abs[idx[sel]] = (k + 1) * dt
                    final_x[idx[sel]] = float(e)
        if record:
            trace.append(float(xnew[0]))
        if np.any(dead):
            keep = ~dead
            idx = idx[keep]
            x = xnew[keep]
        else:
            x = xnew
        if record and endpoint[0] >= 0:
            break
    final_x[idx] = x
    return endpoint, t_abs, final_x, (np.asarray(trace) if record else None)


def sample_path_wf(op: KimuraOp1D, dt: float, horizon: float, x0: float,
                   rng) -> WfPath:
    """Simulate one path of the operator on [0,1] up to the horizon.

    Interior steps are Gaussian in the zeta coordinate; inside a collar of
    width 0.1 at each endpoint the step is one exact transition of that
    endpoint's frozen model in the local chart, shifted by the first-order
    variable part of the weight. The path stops at absorption.
    """
    g = _as_generator(rng)
    endpoint, t_abs, _, trace = _run_paths(op, dt, horizon, x0, g, 1,
                                           record=True)
    states = np.asarray(trace, dtype=float)
    times = dt * np.arange(states.size)
    absorbed = bool(endpoint[0] >= 0)
    return WfPath(times, states, absorbed,
                  int(endpoint[0]) if absorbed else None,
                  float(t_abs[0]) if absorbed else None)


def _require_neutral(op: KimuraOp1D):
    if not op.is_neutral:
        raise DomainError("estimator requires a driftless operator")


def _paths_in_chunks(op, dt, horizon, x0, rng, n):
    """Absorption records for n paths, advanced in fixed 5000-path chunks.

    An RngStream input derives one child generator per chunk, so results
    are reproducible and chunk-parallelizable; a raw Generator is consumed
    sequentially.
    """
    endpoints = []
    t_abs = []
    done = 0
    chunk_id = 0
    while done < n:
        m = min(_CHUNK, n - done)
        if isinstance(rng, RngStream):
            g = rng.generator(chunk_id)
        else:
            g = _as_generator(rng)
        e, ta, _, _ = _run_paths(op, dt, horizon, x0, g, m)
        endpoints.append(e)
        t_abs.append(ta)
        done += m
        chunk_id += 1
    return np.concatenate(endpoints), np.concatenate(t_abs)


def estimate_fixation(op: KimuraOp1D, x0: float, n: int, rng, *,
                      dt: float = 1e-3, horizon: float = 40.0) -> McEstimate:
    """MC frequency of absorption at 1 for a driftless operator.

    Unabsorbed-by-horizon paths count toward n but not toward the fixation
    indicator; their number is reported and the estimate is flagged when
    they exceed 1% of n.
    """
    _require_neutral(op)
    endpoint, _ = _paths_in_chunks(op, dt, horizon, x0, rng, int(n))
    unab = int(np.count_nonzero(endpoint < 0))
    fixed = (endpoint == 1).astype(float)
    return _mc_estimate(fixed, unab)


def estimate_absorption_time(op: KimuraOp1D, x0: float, n: int, rng, *,
                             dt: float = 5e-4,
                             horizon: float = 40.0) -> McEstimate:
    """MC mean time to absorption for the driftless operator with a = 1."""
    _require_neutral(op)
    xs = np.linspace(0.0, 1.0, 17)
    if np.max(np.abs(np.asarray(op.a(xs), dtype=float) - 1.0)) != 0.0:
        raise DomainError("absorption-time estimator requires a(x) = 1")
    endpoint, t_abs = _paths_in_chunks(op, dt, horizon, x0, rng, int(n))
    unab = int(np.count_nonzero(endpoint < 0))
    times = np.where(endpoint >= 0, t_abs, horizon)
    return _mc_estimate(times, unab)
