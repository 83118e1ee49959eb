"""Boundary tangency classification and long-time limits.

A face with affine defining function rho is "tangent" when L rho vanishes
identically on the face and "transverse" when L rho is uniformly positive
there; since rho is affine only the drift enters. A face that is neither is
refused (no guess). A boundary stratum is terminal when every face cutting
it out is tangent and every adjacent face is transverse; the count of
terminal strata predicts the null-space dimension of the operator, and for
an interval operator the terminal data determine the long-time limit of the
evolution explicitly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NotCleanError
from .operators import KimuraOp1D

__all__ = [
    "DomainSpec",
    "domain_from_json",
    "FaceClassification",
    "TerminalComponent",
    "BoundaryReport",
    "SimplexMutationOp",
    "ProductWfOp",
    "IntervalDriftOp",
    "ScaledOp",
    "operator_from_json",
    "classify_boundary",
    "long_time_limit",
]

_MAX_DIM = 6
_SAMPLES_PER_STRATUM = 240
_C_TRANS = 1e-6


@dataclass(frozen=True)
class _Face:
    """One boundary hypersurface: rho(p) = offset + grad . p, >= 0 inside."""

    name: str
    grad: np.ndarray
    offset: float


class DomainSpec:
    """A regular convex polyhedron of one of the three supported kinds."""

    def __init__(self, kind: str, dim: int):
        if kind not in ("interval", "orthant_cube", "simplex"):
            raise DomainError(f"unknown domain kind {kind!r}")
        dim = int(dim)
        if kind == "interval" and dim != 1:
            raise DomainError("interval domains are one-dimensional")
        if not 1 <= dim <= _MAX_DIM:
            raise DomainError(f"dimension must lie in [1, {_MAX_DIM}]")
        self.kind = kind
        self.dim = dim
        self.faces = self._build_faces()
        self._by_name = {f.name: f for f in self.faces}

    def _build_faces(self):
        n = self.dim
        faces = []
        if self.kind == "interval":
            faces.append(_Face("x0=0", np.array([1.0]), 0.0))
            faces.append(_Face("x0=1", np.array([-1.0]), 1.0))
            return faces
        if self.kind == "orthant_cube":
            for i in range(n):
                lo = np.zeros(n)
                lo[i] = 1.0
                faces.append(_Face(f"x{i}=0", lo, 0.0))
                faces.append(_Face(f"x{i}=1", -lo, 1.0))
            return faces
        for i in range(n):
            g = np.zeros(n)
            g[i] = 1.0
            faces.append(_Face(f"x{i}=0", g, 0.0))
        faces.append(_Face("sum=1", -np.ones(n), 1.0))
        return faces

    def face(self, name: str) -> _Face:
        try:
            return self._by_name[name]
        except KeyError:
            raise DomainError(f"no face named {name!r}") from None

    def face_names(self):
        return [f.name for f in self.faces]

    def valid_stratum(self, names) -> bool:
        """Whether the faces intersect in a nonempty stratum."""
        s = frozenset(names)
        if not s <= set(self._by_name):
            raise DomainError(f"unknown face in {sorted(s)}")
        if self.kind == "interval":
            return len(s) <= 1
        if self.kind == "orthant_cube":
            axes = [n.split("=")[0] for n in s]
            return len(axes) == len(set(axes))
        return len(s) <= self.dim

    def stratum_dim(self, names) -> int:
        return self.dim - len(frozenset(names))

    def sample_stratum(self, names, target: int = _SAMPLES_PER_STRATUM):
        """Deterministic point cloud covering the closed stratum."""
        s = frozenset(names)
        if not self.valid_stratum(s):
            raise DomainError(f"faces {sorted(s)} have empty intersection")
        if self.kind in ("interval", "orthant_cube"):
            values = []
            for i in range(self.dim):
                if f"x{i}=0" in s:
                    values.append(np.array([0.0]))
                elif f"x{i}=1" in s:
                    values.append(np.array([1.0]))
                else:
                    values.append(None)
            free = sum(v is None for v in values)
            m = max(2, int(round(target ** (1.0 / free)))) if free else 1
            grid = np.linspace(0.0, 1.0, m)
            axes = [grid if v is None else v for v in values]
            mesh = np.meshgrid(*axes, indexing="ij")
            return np.stack([a.reshape(-1) for a in mesh], axis=1)
        # simplex stratum = convex hull of the surviving vertices
        verts = self._simplex_vertices(s)
        k = len(verts)
        if k == 1:
            return verts[0][None, :]
        m = 1
        while math.comb(m + k, k - 1) <= target:
            m += 1
        pts = []
        for cuts in itertools.combinations(range(m + k - 1), k - 1):
            prev = -1
            lam = []
            for c in cuts:
                lam.append(c - prev - 1)
                prev = c
            lam.append(m + k - 2 - prev)
            w = np.asarray(lam, dtype=float) / m
            pts.append(w @ verts)
        return np.asarray(pts)

    def _simplex_vertices(self, s):
        # vertex v0 is the origin (killed by "sum=1"); vi+1 = e_i
        verts = [np.zeros(self.dim)] + [row for row in np.eye(self.dim)]
        out = []
        for j, v in enumerate(verts):
            killer = "sum=1" if j == 0 else f"x{j - 1}=0"
            if killer not in s:
                out.append(v)
        return np.asarray(out)

    def describe_stratum(self, names) -> str:
        s = frozenset(names)
        d = self.stratum_dim(s)
        if not s:
            return "P"
        if d == 0:
            p = self.sample_stratum(s)[0]
            coords = ", ".join(f"{v:g}" for v in p)
            return f"vertex ({coords})"
        return "stratum {" + ", ".join(sorted(s)) + "}"


def domain_from_json(doc) -> DomainSpec:
    if not isinstance(doc, dict):
        raise DomainError("domain document must be a JSON object")
    extra = set(doc) - {"kind", "dim"}
    if extra:
        raise DomainError(f"unknown domain keys {sorted(extra)}")
    if "kind" not in doc:
        raise DomainError("domain document needs a 'kind'")
    kind = doc["kind"]
    dim = doc.get("dim", 1 if kind == "interval" else None)
    if dim is None:
        raise DomainError(f"domain kind {kind!r} needs 'dim'")
    return DomainSpec(kind, dim)


class SimplexMutationOp:
    """Drift b_i = theta_i - x_i * Theta on the simplex.

    theta has dim+1 entries: one inflow rate per explicit coordinate plus a
    final entry for the implicit type 1 - sum x. On the face x_i = 0 the
    normal drift equals theta_i, and on sum = 1 it equals theta[-1], so each
    face is tangent exactly when its rate vanishes.
    """

    def __init__(self, mutation):
        theta = np.asarray(mutation, dtype=float)
        if theta.ndim != 1 or theta.size < 2:
            raise DomainError("mutation must be a vector of >= 2 rates")
        if np.any(theta < 0) or not np.all(np.isfinite(theta)):
            raise DomainError("mutation rates must be finite and >= 0")
        self.theta = theta
        self.dim = theta.size - 1

    def drift(self, P):
        P = np.asarray(P, dtype=float)
        return self.theta[None, : self.dim] - P * float(np.sum(self.theta))


class ProductWfOp:
    """Independent Wright-Fisher drift per axis of the cube."""

    def __init__(self, b0, b1, s=None):
        b0 = np.atleast_1d(np.asarray(b0, dtype=float))
        b1 = np.atleast_1d(np.asarray(b1, dtype=float))
        s = np.zeros_like(b0) if s is None else np.atleast_1d(
            np.asarray(s, dtype=float))
        if not b0.shape == b1.shape == s.shape:
            raise DomainError("b0, b1, s must have matching lengths")
        if np.any(b0 < 0) or np.any(b1 < 0):
            raise DomainError("boundary weights must be >= 0")
        self.b0, self.b1, self.s = b0, b1, s
        self.dim = b0.size

    def drift(self, P):
        P = np.asarray(P, dtype=float)
        return (self.b0 * (1.0 - P) - self.b1 * P
                + self.s * P * (1.0 - P))


class IntervalDriftOp:
    """Adapter exposing a 1-D operator's drift on (N, 1) point arrays."""

    def __init__(self, op: KimuraOp1D):
        self.op = op
        self.dim = 1

    def drift(self, P):
        P = np.asarray(P, dtype=float)
        x = P[:, 0]
        vals = np.broadcast_to(np.asarray(self.op.drift(x), dtype=float),
                               x.shape)
        return vals[:, None]


class ScaledOp:
    """The operator multiplied by a positive function; labels must not move."""

    def __init__(self, base, prefactor):
        self.base = base
        self.prefactor = prefactor
        self.dim = base.dim

    def drift(self, P):
        P = np.asarray(P, dtype=float)
        w = np.asarray(self.prefactor(P), dtype=float).reshape(-1)
        if np.any(w <= 0):
            raise DomainError("prefactor must be strictly positive")
        return w[:, None] * self.base.drift(P)


def operator_from_json(doc, domain: DomainSpec):
    if not isinstance(doc, dict):
        raise DomainError("operator document must be a JSON object")
    extra = set(doc) - {"name", "params"}
    if extra:
        raise DomainError(f"unknown operator keys {sorted(extra)}")
    name = doc.get("name")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise DomainError("operator params must be an object")
    if name == "wright_fisher":
        if domain.kind != "interval":
            raise DomainError("wright_fisher runs on interval domains")
        extra = set(params) - {"b0", "b1", "s"}
        if extra:
            raise DomainError(f"unknown wright_fisher params {sorted(extra)}")
        from .operators import wright_fisher_op
        return IntervalDriftOp(wright_fisher_op(
            float(params.get("b0", 0.0)), float(params.get("b1", 0.0)),
            float(params.get("s", 0.0))))
    if name == "product_wf":
        if domain.kind != "orthant_cube":
            raise DomainError("product_wf runs on orthant_cube domains")
        extra = set(params) - {"b0", "b1", "s"}
        if extra:
            raise DomainError(f"unknown product_wf params {sorted(extra)}")
        op = ProductWfOp(params.get("b0", [0.0] * domain.dim),
                         params.get("b1", [0.0] * domain.dim),
                         params.get("s"))
        if op.dim != domain.dim:
            raise DomainError("coefficient length != domain dimension")
        return op
    if name == "kimura_simplex":
        if domain.kind != "simplex":
            raise DomainError("kimura_simplex runs on simplex domains")
        extra = set(params) - {"mutation"}
        if extra:
            raise DomainError(f"unknown kimura_simplex params {sorted(extra)}")
        op = SimplexMutationOp(params.get("mutation",
                                          [0.0] * (domain.dim + 1)))
        if op.dim != domain.dim:
            raise DomainError("mutation length != domain dimension + 1")
        return op
    raise DomainError(f"unknown operator builtin {name!r}")


@dataclass(frozen=True)
class FaceClassification:
    face: str
    label: str  # "tangent" | "transverse"
    lrho_min: float
    lrho_max: float


@dataclass(frozen=True)
class TerminalComponent:
    faces: tuple
    dim: int
    description: str


@dataclass(frozen=True)
class BoundaryReport:
    faces: list
    terminal: list
    dim_null: int
    eps_tan: float
    c_trans: float

    def labels(self) -> dict:
        return {fc.face: fc.label for fc in self.faces}


def _lrho_range(domain, op, names, face: _Face):
    P = domain.sample_stratum(names)
    vals = np.asarray(op.drift(P), dtype=float) @ face.grad
    return float(np.min(vals)), float(np.max(vals))


def classify_boundary(domain: DomainSpec, operator, *,
                      c_trans: float = _C_TRANS,
                      eps_tan: float | None = None) -> BoundaryReport:
    """Label every face, enumerate terminal strata, predict dim Ker L.

    A stratum cut out by faces S is terminal when every face in S is tangent
    and every face meeting the stratum elsewhere is transverse; S = {} covers
    the everywhere-transverse case where the whole domain is terminal. Any
    face that is neither tangent (|L rho| <= eps_tan) nor transverse
    (L rho >= c_trans) raises NotCleanError.
    """
    if getattr(operator, "dim", domain.dim) != domain.dim:
        raise DomainError("operator dimension != domain dimension")
    cloud = domain.sample_stratum(frozenset())
    scale = max(1.0, float(np.max(np.abs(operator.drift(cloud)))))
    eps = 1e-10 * scale if eps_tan is None else float(eps_tan)

    classifications = []
    labels = {}
    for f in domain.faces:
        lo, hi = _lrho_range(domain, operator, frozenset({f.name}), f)
        if max(abs(lo), abs(hi)) <= eps:
            label = "tangent"
        elif lo >= c_trans:
            label = "transverse"
        else:
            raise NotCleanError(
                f"face {f.name}: L rho ranges over [{lo:.3e}, {hi:.3e}], "
                "neither tangent nor uniformly positive",
                face=f.name, lo=lo, hi=hi)
        labels[f.name] = label
        classifications.append(FaceClassification(f.name, label, lo, hi))

    names = domain.face_names()
    terminal = []
    for r in range(len(names) + 1):
        for combo in itertools.combinations(names, r):
            s = frozenset(combo)
            if not domain.valid_stratum(s):
                continue
            if any(labels[n] != "tangent" for n in s):
                continue
            adjacent = [n for n in names
                        if n not in s and domain.valid_stratum(s | {n})]
            if all(labels[n] == "transverse" for n in adjacent):
                terminal.append(TerminalComponent(
                    tuple(sorted(s)), domain.stratum_dim(s),
                    domain.describe_stratum(s)))
    return BoundaryReport(classifications, terminal, len(terminal),
                          eps, c_trans)


def _endpoint_labels(op: KimuraOp1D, c_trans: float):
    xs = np.linspace(0.0, 1.0, 201)
    dvals = np.broadcast_to(np.asarray(op.drift(xs), dtype=float), xs.shape)
    scale = max(1.0, float(np.max(np.abs(dvals))))
    eps = 1e-10 * scale
    out = []
    for val, name in ((float(op.drift(0.0)), "x0=0"),
                      (-float(op.drift(1.0)), "x0=1")):
        if abs(val) <= eps:
            out.append("tangent")
        elif val >= c_trans:
            out.append("transverse")
        else:
            raise NotCleanError(
                f"endpoint {name}: inward drift {val:.3e} is neither zero "
                "nor uniformly positive", face=name, lo=val, hi=val)
    return out


def _drift_over_g(op: KimuraOp1D):
    def r(u):
        u = np.asarray(u, dtype=float)
        g = np.asarray(op.a(u), dtype=float) * u * (1.0 - u)
        return np.broadcast_to(np.asarray(op.drift(u), dtype=float),
                               u.shape) / g
    return r


def _stationary_functional(op: KimuraOp1D, f) -> float:
    # m ~ x^(k0-1) (1-x)^(k1-1) exp(R)/a with k0, k1 > 0 the inward rates;
    # Gauss-Jacobi absorbs the endpoint powers so only smooth data remain
    k0 = float(op.drift(0.0)) / float(op.a(0.0))
    k1 = -float(op.drift(1.0)) / float(op.a(1.0))
    r = _drift_over_g(op)

    def r_reg(u):
        u = np.asarray(u, dtype=float)
        return r(u) - k0 / u + k1 / (1.0 - u)

    nodes, weights = special.roots_jacobi(80, k1 - 1.0, k0 - 1.0)
    xs = (nodes + 1.0) / 2.0
    R = np.array([integrate.quad(r_reg, 0.5, x, limit=200)[0] for x in xs])
    h = np.exp(R) / np.asarray(op.a(xs), dtype=float)
    fx = np.broadcast_to(np.asarray(f(xs), dtype=float), xs.shape)
    w = weights * h
    return float(np.sum(w * fx) / np.sum(w))


def _scale_function(op: KimuraOp1D):
    # S(x) = int_0^x exp(-H), H' = drift/g; H stays bounded when both
    # endpoints are tangent, so a clipped dense grid is accurate
    grid = np.linspace(0.0, 1.0, 4001)
    safe = np.clip(grid, 1e-6, 1.0 - 1e-6)
    H = integrate.cumulative_trapezoid(_drift_over_g(op)(safe), grid,
                                       initial=0.0)
    q = np.exp(-(H - H[len(H) // 2]))
    S = integrate.cumulative_trapezoid(q, grid, initial=0.0)
    S = S / S[-1]
    return grid, S


def long_time_limit(op: KimuraOp1D, f, *, c_trans: float = _C_TRANS):
    """The pointwise limit of the evolution of f, as a callable on [0,1].

    Transverse at both ends: the constant given by the unique stationary
    measure. Tangent at one end, transverse at the other: the constant value
    of f at the tangent end. Tangent at both ends: the two-point harmonic
    interpolation f(0) (1 - w(x)) + f(1) w(x) with w the normalized scale
    function (w(x) = x in the neutral case).
    """
    lab0, lab1 = _endpoint_labels(op, c_trans)
    if lab0 == "transverse" and lab1 == "transverse":
        c = _stationary_functional(op, f)
        return lambda x: np.full_like(np.asarray(x, dtype=float), c)
    if lab0 == "tangent" and lab1 == "transverse":
        c = float(f(0.0))
        return lambda x: np.full_like(np.asarray(x, dtype=float), c)
    if lab0 == "transverse" and lab1 == "tangent":
        c = float(f(1.0))
        return lambda x: np.full_like(np.asarray(x, dtype=float), c)
    grid, S = _scale_function(op)
    f0, f1 = float(f(0.0)), float(f(1.0))

    def limit(x):
        x = np.asarray(x, dtype=float)
        w = np.interp(x, grid, S)
        return f0 + (f1 - f0) * w

    return limit
