"""Model distances between vine copulas.

Every grid-based distance has the form

    sum over j of  weighted mean over conditioning points u of  kappa_j(u),

where ``kappa_j(u)`` is the univariate Kullback-Leibler distance between the
conditional densities ``c_{j|j+1:d}(. | u)`` of the two vines.  The methods
differ only in the conditioning points:

* ``akl``  - the full warped lattice,
* ``dkl``  - all warped (tail-transformed) diagonals,
* ``sdkl`` - one warped diagonal per summand, picked by a hill climb.

``mckl`` (Monte Carlo), ``gaussian_kl_analytic`` and ``cubature_kl`` give
reference values.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg, special

from . import bicop
from ._random import uniform_rows
from .bicop import Family
from .errors import ContractError, DomainError, LimitError, NumericError, ShapeError, StructureError
from .quadrature import integrate_batch
from .vine import VineSpec, relabel_canonical, rosenblatt_inverse, trim_structure, vine_log_density

DELTA = 1e-7
KL_TOL = 1e-8
DENSITY_FLOOR = 1e-300
SEARCH_N = 50
AKL_MAX_D = 6
DKL_MAX_D = 12
CUBATURE_MAX_D = 4
_CHUNK = 2048
_LOG_FLOOR = math.log(DENSITY_FLOOR)


def default_workers() -> int:
    """Worker count from ``VINEDIST_WORKERS`` (default 1)."""
    raw = os.environ.get("VINEDIST_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise DomainError(f"VINEDIST_WORKERS must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution ``n``, covered volume ``beta`` and tail shape ``a`` (0 = off)."""

    n: int = 10
    beta: float = 0.95
    a: float = 4.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.a >= 0.0:
            raise DomainError(f"tail shape a must be >= 0, got {self.a}")

    def eps(self, dim: int) -> float:
        return (1.0 - self.beta ** (1.0 / dim)) / 2.0

    def as_dict(self) -> dict:
        return {"n": int(self.n), "beta": float(self.beta), "a": float(self.a)}


@dataclass(frozen=True)
class Diagonal:
    """Cube diagonal through ``corner`` (with ``corner[0] == 0``)."""

    corner: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.corner)
        if not c or c[0] != 0 or any(x not in (0, 1) for x in c):
            raise DomainError(f"corner must be a 0/1 vector starting with 0, got {self.corner}")
        object.__setattr__(self, "corner", c)

    @property
    def dim(self) -> int:
        return len(self.corner)

    @property
    def direction(self) -> np.ndarray:
        return 1.0 - 2.0 * np.array(self.corner, dtype=float)

    @classmethod
    def from_signs(cls, v) -> "Diagonal":
        v = np.sign(np.asarray(v, dtype=float))
        v = v * v[0]
        return cls(tuple(int(x < 0) for x in v))

    def at(self, t) -> np.ndarray:
        """Points ``corner + t * direction`` for an array of ``t``."""
        t = np.asarray(t, dtype=float)[..., None]
        return np.array(self.corner, dtype=float) + t * self.direction

    def __str__(self) -> str:
        return "".join("+" if x == 0 else "-" for x in self.corner)


@dataclass
class EvaluationGrid:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.points.shape[0],):
            raise ShapeError("one weight per point required")
        if np.any(self.weights <= 0):
            raise DomainError("weights must be positive")

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass
class DistanceReport:
    method: str
    value: float
    params: dict = field(default_factory=dict)
    evaluations: int = 0
    wallclock: float = 0.0
    note: str = ""
    summands: list[float] = field(default_factory=list)
    stderr: float | None = None

    def as_dict(self) -> dict:
        out = {"method": self.method, "value": self.value, "params": self.params,
               "evaluations": self.evaluations, "wallclock": self.wallclock}
        if self.summands:
            out["summands"] = list(self.summands)
        if self.stderr is not None:
            out["stderr"] = self.stderr
        if self.note:
            out["note"] = self.note
        return out


# ---------------------------------------------------------------------------
# univariate KL


def _kl_integrand(logf, logg):
    lf = np.maximum(logf, _LOG_FLOOR)
    lg = np.maximum(logg, _LOG_FLOOR)
    return np.exp(lf) * (lf - lg)


def univariate_kl(f, g, tol: float = KL_TOL) -> float:
    """KL distance of two densities on (0, 1) by adaptive quadrature.

    ``f`` and ``g`` must accept numpy arrays.  The result is floored at 0.
    """
    def fun(x, rows):
        with np.errstate(divide="ignore"):
            lf = np.log(np.asarray(f(x), dtype=float))
            lg = np.log(np.asarray(g(x), dtype=float))
        return _kl_integrand(lf, lg)

    val, _ = integrate_batch(fun, 1, DELTA, 1.0 - DELTA, tol)
    return max(float(val[0]), 0.0)


class _Kappa:
    """Batched ``kappa_j`` for a pair of canonical vines."""

    def __init__(self, rf: VineSpec, rg: VineSpec, tol: float = KL_TOL, workers: int | None = None):
        self.ef, self.eg = rf._engine, rg._engine
        self.d = rf.d
        self.tol = tol
        self.workers = workers or default_workers()

    def _args(self, eng, jj, full):
        direct, indirect, _ = eng.tables(full, stop=jj + 1)
        return eng.column_args(jj, full, direct, indirect)

    def _chunk(self, jj, pts):
        full = np.full((pts.shape[0], self.d), 0.5)
        full[:, jj + 1:] = pts
        af = self._args(self.ef, jj, full)
        ag = self._args(self.eg, jj, full)

        def fun(x, rows):
            lf = self.ef.column_logpdf(jj, [a[rows, None] for a in af], x)
            lg = self.eg.column_logpdf(jj, [a[rows, None] for a in ag], x)
            return _kl_integrand(lf, lg)

        val, _ = integrate_batch(fun, pts.shape[0], DELTA, 1.0 - DELTA, self.tol)
        return np.maximum(val, 0.0)

    def __call__(self, j: int, points: np.ndarray) -> np.ndarray:
        """kappa_j (1-based ``j``) at u-scale conditioning points ``(m, d-j)``."""
        jj = j - 1
        chunks = [points[s:s + _CHUNK] for s in range(0, points.shape[0], _CHUNK)]
        if self.workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                parts = list(pool.map(lambda c: self._chunk(jj, c), chunks))
        else:
            parts = [self._chunk(jj, c) for c in chunks]
        return np.concatenate(parts)


def _canonical_pair(rf: VineSpec, rg: VineSpec):
    if rf.d != rg.d:
        raise ContractError(f"vines have different dimensions ({rf.d} and {rg.d})")
    if not np.array_equal(rf.diagonal, rg.diagonal):
        raise ContractError("structure matrices must share the same diagonal: "
                            f"{rf.diagonal.tolist()} vs {rg.diagonal.tolist()}")
    return relabel_canonical(rf)[0], relabel_canonical(rg)[0]


def _check_limit(d, limit, method, override):
    if d > limit and not override:
        raise LimitError(f"{method} refuses d={d} > {limit} (soft limit); pass override to force")


# ---------------------------------------------------------------------------
# grids


def structured_grid(dim: int, spec: GridSpec) -> EvaluationGrid:
    """The lattice ``{eps, eps + delta, ..., 1 - eps}^dim`` in lexicographic order."""
    if dim < 1:
        raise DomainError("grid dimension must be >= 1")
    eps = spec.eps(dim)
    axis = np.linspace(eps, 1.0 - eps, spec.n)
    pts = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    return EvaluationGrid(pts, np.ones(pts.shape[0]))


def warp_points(margin: VineSpec, grid: EvaluationGrid) -> EvaluationGrid:
    """Image of a w-scale grid under the margin's inverse Rosenblatt transform."""
    if grid.points.shape[1] != margin.d:
        raise ShapeError(f"grid has dimension {grid.points.shape[1]}, margin has {margin.d}")
    return EvaluationGrid(rosenblatt_inverse(margin, grid.points), grid.weights.copy())


def tail_transform(t, a: float):
    # evaluated on the nearer half and mirrored, so both tails keep full precision
    p = special.ndtr(-a)
    t = np.asarray(t, dtype=float)
    z = 2.0 * a * (np.minimum(t, 1.0 - t) - 0.5)
    low = (special.ndtr(z) - p) / (1.0 - 2.0 * p)
    return np.where(t <= 0.5, low, 1.0 - low)


def tail_transform_inv(y, a: float):
    p = special.ndtr(-a)
    y = np.asarray(y, dtype=float)
    off = special.ndtri(np.minimum(y, 1.0 - y) * (1.0 - 2.0 * p) + p) / (2.0 * a)
    return np.where(y <= 0.5, 0.5 + off, 0.5 - off)


def tail_transform_deriv(t, a: float):
    p = special.ndtr(-a)
    z = 2.0 * a * (np.asarray(t) - 0.5)
    return 2.0 * a * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi) / (1.0 - 2.0 * p)


def enumerate_diagonals(dim: int) -> list[Diagonal]:
    if dim < 1:
        raise DomainError("diagonal dimension must be >= 1")
    return [Diagonal((0,) + rest) for rest in itertools.product((0, 1), repeat=dim - 1)]


def discretize_diagonal(diag: Diagonal, spec: GridSpec) -> EvaluationGrid:
    """n points of a diagonal on the w-scale, tail-transformed when ``spec.a > 0``.

    A diagonal is a line, so its discretisation covers the fraction ``beta``
    of its length: the end margin is ``eps(1) = (1 - beta) / 2`` whatever the
    dimension of the cube.
    """
    eps = spec.eps(1)
    if spec.a == 0:
        t = np.linspace(eps, 1.0 - eps, spec.n)
        return EvaluationGrid(diag.at(t), np.ones(spec.n))
    s = np.linspace(tail_transform_inv(eps, spec.a), tail_transform_inv(1.0 - eps, spec.a), spec.n)
    return EvaluationGrid(diag.at(tail_transform(s, spec.a)), tail_transform_deriv(s, spec.a))


# ---------------------------------------------------------------------------
# aKL / dKL


def _margins(rf: VineSpec):
    """Margins on variables ``j+1..d``; the last one is a single uniform (None)."""
    out = {j: trim_structure(rf, j) for j in range(1, rf.d - 1)}
    out[rf.d - 1] = None
    return out


def _warp(margin: VineSpec | None, w: np.ndarray) -> np.ndarray:
    return w.copy() if margin is None else rosenblatt_inverse(margin, w)


def akl(rf: VineSpec, rg: VineSpec, spec: GridSpec = GridSpec(), *, tol: float = KL_TOL,
        workers: int | None = None, override: bool = False) -> DistanceReport:
    """Approximate KL: mean of kappa_j over the warped lattice, summed over j."""
    t0 = time.perf_counter()
    rf, rg = _canonical_pair(rf, rg)
    d = rf.d
    _check_limit(d, AKL_MAX_D, "aKL", override)
    kappa = _Kappa(rf, rg, tol, workers)
    margins = _margins(rf)
    summands, evals = [], 0
    for j in range(1, d):
        vals = kappa(j, _warp(margins[j], structured_grid(d - j, spec).points))
        summands.append(float(np.mean(vals)))
        evals += len(vals)
    return DistanceReport("aKL", float(sum(summands)), {"n": spec.n, "beta": spec.beta},
                          evals, time.perf_counter() - t0, summands=summands)


def dkl(rf: VineSpec, rg: VineSpec, spec: GridSpec = GridSpec(), *, tol: float = KL_TOL,
        workers: int | None = None, override: bool = False) -> DistanceReport:
    """Diagonal KL: weighted mean of kappa_j over all warped diagonals."""
    t0 = time.perf_counter()
    rf, rg = _canonical_pair(rf, rg)
    d = rf.d
    _check_limit(d, DKL_MAX_D, "dKL", override)
    kappa = _Kappa(rf, rg, tol, workers)
    margins = _margins(rf)
    summands, evals = [], 0
    for j in range(1, d):
        grids = [discretize_diagonal(diag, spec) for diag in enumerate_diagonals(d - j)]
        w_pts = np.concatenate([g.points for g in grids])
        weights = np.concatenate([g.weights for g in grids])
        u_pts = _warp(margins[j], w_pts)
        vals = kappa(j, u_pts)
        summands.append(float(np.sum(vals * weights) / len(vals)))
        evals += len(vals)
    return DistanceReport("dKL", float(sum(summands)), spec.as_dict(), evals,
                          time.perf_counter() - t0, summands=summands)


# ---------------------------------------------------------------------------
# diagonal weights and sdKL


def diagonal_weight(margin: VineSpec, diag: Diagonal, n: int = SEARCH_N) -> float:
    """Approximate line integral of the margin density along a u-scale diagonal."""
    if diag.dim != margin.d:
        raise ShapeError(f"diagonal has dimension {diag.dim}, margin has {margin.d}")
    if diag.dim == 1:
        return 1.0
    t = (np.arange(1, n + 1) - 0.5) / n
    dens = np.exp(vine_log_density(margin, diag.at(t)))
    return float(np.mean(dens) * math.sqrt(diag.dim))


def propagate_signs(dim: int, edges) -> np.ndarray:
    """Signs from a tree given as ``[(a, b, tau), ...]`` on labels ``1..dim``.

    Node 1 gets ``+1``; a neighbour keeps the sign across an edge with
    ``tau >= 0`` and flips it otherwise.
    """
    adj: dict[int, list[tuple[int, float]]] = {i: [] for i in range(1, dim + 1)}
    for a, b, tau in edges:
        adj[int(a)].append((int(b), float(tau)))
        adj[int(b)].append((int(a), float(tau)))
    sign = {1: 1}
    queue = deque([1])
    while queue:
        node = queue.popleft()
        for nb, tau in adj[node]:
            if nb not in sign:
                sign[nb] = sign[node] if tau >= 0 else -sign[node]
                queue.append(nb)
    if len(sign) != dim:
        missing = sorted(set(adj) - set(sign))
        raise StructureError(f"unconditional pairs do not connect all variables; unreached: {missing}")
    return np.array([sign[i] for i in range(1, dim + 1)], dtype=int)


def starting_direction(margin: VineSpec) -> np.ndarray:
    """Sign vector implied by the margin's unconditional pair copulas."""
    m = margin.structure
    d = margin.d
    if d == 1:
        return np.ones(1, dtype=int)
    # relabel so the smallest label maps to node 1
    order = np.sort(margin.diagonal)
    pos = {int(lab): i + 1 for i, lab in enumerate(order)}
    edges = [(pos[int(m[d - 1, j])], pos[int(m[j, j])], bicop.pair_tau(margin.pairs[d - 1, j]))
             for j in range(d - 1)]
    return propagate_signs(d, edges)


def hill_climb(margin: VineSpec, v0, n: int = SEARCH_N):
    """Single-flip hill climb on diagonal weights.

    Returns the final sign vector and the strictly increasing list of weights
    visited along the way.
    """
    v = np.asarray(v0, dtype=int).copy()
    if v.shape != (margin.d,) or not np.all(np.abs(v) == 1):
        raise DomainError(f"v0 must be a vector of +-1 of length {margin.d}")
    cache: dict[Diagonal, float] = {}

    def weight(signs):
        diag = Diagonal.from_signs(signs)
        if diag not in cache:
            cache[diag] = diagonal_weight(margin, diag, n)
        return cache[diag]

    path = [weight(v)]
    for _ in range(2 ** margin.d):
        cand = []
        for i in range(margin.d):
            w = v.copy()
            w[i] = -w[i]
            cand.append(weight(w))
        best = int(np.argmax(cand))
        if cand[best] <= path[-1]:
            break
        v[best] = -v[best]
        path.append(cand[best])
    return v, path


def best_diagonal(margin: VineSpec, v0, n: int = SEARCH_N) -> Diagonal:
    v, _ = hill_climb(margin, v0, n)
    return Diagonal.from_signs(v)


def sdkl(rf: VineSpec, rg: VineSpec, spec: GridSpec = GridSpec(), *, tol: float = KL_TOL,
         workers: int | None = None, search_n: int = SEARCH_N) -> DistanceReport:
    """Single-diagonal KL: per summand only the heaviest diagonal of c^f's margin."""
    t0 = time.perf_counter()
    rf, rg = _canonical_pair(rf, rg)
    d = rf.d
    kappa = _Kappa(rf, rg, tol, workers)
    margins = _margins(rf)
    summands, chosen, evals = [], [], 0
    for j in range(1, d):
        margin = margins[j]
        if margin is None:
            diag = Diagonal((0,))
        else:
            diag = best_diagonal(margin, starting_direction(margin), search_n)
        chosen.append(str(diag))
        grid = discretize_diagonal(diag, spec)
        vals = kappa(j, _warp(margin, grid.points))
        summands.append(float(np.sum(vals * grid.weights) / len(vals)))
        evals += len(vals)
    params = spec.as_dict() | {"diagonals": chosen}
    return DistanceReport("sdKL", float(sum(summands)), params, evals,
                          time.perf_counter() - t0, summands=summands)


# ---------------------------------------------------------------------------
# reference values


def mckl(rf: VineSpec, rg: VineSpec, n_mc: int = 1_000_000, seed: int = 0,
         batch: int = 100_000) -> DistanceReport:
    """Monte Carlo KL over a seeded sample of ``rf``; not clamped at zero."""
    t0 = time.perf_counter()
    if rf.d != rg.d:
        raise ContractError(f"vines have different dimensions ({rf.d} and {rg.d})")
    total, total_sq = 0.0, 0.0
    for s in range(0, n_mc, batch):
        w = uniform_rows(seed, min(n_mc, s + batch), rf.d, start=s)
        u = rosenblatt_inverse(rf, w)
        diff = np.atleast_1d(vine_log_density(rf, u) - vine_log_density(rg, u))
        total += float(np.sum(diff))
        total_sq += float(np.sum(diff * diff))
    mean = total / n_mc
    var = max(total_sq / n_mc - mean * mean, 0.0)
    se = math.sqrt(var / n_mc)
    note = "negative Monte Carlo estimate (sampling noise)" if mean < 0 else ""
    return DistanceReport("MCKL", mean, {"n_mc": int(n_mc), "seed": int(seed)}, int(n_mc),
                          time.perf_counter() - t0, note=note, stderr=se)


def _check_corr(s, name):
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ShapeError(f"{name} must be a square matrix")
    if not np.allclose(s, s.T, atol=1e-12) or not np.allclose(np.diag(s), 1.0, atol=1e-12):
        raise DomainError(f"{name} must be symmetric with unit diagonal")
    try:
        return linalg.cho_factor(s, lower=True)
    except linalg.LinAlgError:
        raise DomainError(f"{name} is not positive definite") from None


def gaussian_kl_analytic(sigma_f, sigma_g) -> float:
    """Closed-form KL distance between two Gaussian copulas."""
    cf = _check_corr(sigma_f, "sigma_f")
    cg = _check_corr(sigma_g, "sigma_g")
    sf = np.asarray(sigma_f, dtype=float)
    if sf.shape != np.shape(sigma_g):
        raise ShapeError("correlation matrices differ in size")
    if np.array_equal(sf, sigma_g):
        return 0.0
    logdet_f = 2.0 * np.sum(np.log(np.diag(cf[0])))
    logdet_g = 2.0 * np.sum(np.log(np.diag(cg[0])))
    trace = float(np.trace(linalg.cho_solve(cg, sf)))
    return max(0.5 * (logdet_g - logdet_f + trace - sf.shape[0]), 0.0)


def gaussian_vine_corr(r: VineSpec) -> np.ndarray:
    """Correlation matrix of an all-Gaussian vine (original variable labels).

    Pairs are added tree by tree; the correlation of the conditioned pair
    ``(a, b)`` given ``D`` is recovered from its partial correlation through the
    Schur complement of the already known block on ``{a, b} U D``.
    """
    for i, j in r.slots():
        if r.pairs[i, j].family is not Family.GAUSSIAN:
            raise DomainError(f"slot ({i + 1},{j + 1}) is {r.pairs[i, j].code}, not Gaussian")
    canon, perm = relabel_canonical(r)
    m = canon.structure
    d = r.d
    sig = np.eye(d)
    for k in range(d - 1, 0, -1):
        for j in range(k):
            a, b = int(m[k, j]) - 1, j
            cond = [int(x) - 1 for x in m[k + 1:, j]]
            rho = canon.pairs[k, j].p1
            if cond:
                s_dd = sig[np.ix_(cond, cond)]
                s_ad, s_bd = sig[a, cond], sig[b, cond]
                x_a, x_b = linalg.solve(s_dd, s_ad, assume_a="pos"), linalg.solve(s_dd, s_bd, assume_a="pos")
                val = s_ad @ x_b + rho * math.sqrt((1.0 - s_ad @ x_a) * (1.0 - s_bd @ x_b))
            else:
                val = rho
            sig[a, b] = sig[b, a] = val
    out = np.empty_like(sig)
    idx = perm - 1
    out[np.ix_(idx, idx)] = sig
    return out


def cubature_kl(rf: VineSpec, rg: VineSpec, beta: float = 0.95, tol: float = 1e-4,
                max_subdivisions: int = 20_000) -> DistanceReport:
    """KL over the centred sub-cube of volume ``beta`` by adaptive cubature.

    Integration runs in normal scores ``u = Phi(z)`` to resolve the corners.
    ``beta = 1`` means the whole cube with an interior guard of ``1e-7``.
    """
    t0 = time.perf_counter()
    if rf.d != rg.d:
        raise ContractError(f"vines have different dimensions ({rf.d} and {rg.d})")
    d = rf.d
    if d > CUBATURE_MAX_D:
        raise LimitError(f"cubature_kl is limited to d <= {CUBATURE_MAX_D} (got d={d})")
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    lo = DELTA if beta == 1.0 else (1.0 - beta ** (1.0 / d)) / 2.0
    zlo, zhi = float(special.ndtri(lo)), float(special.ndtri(1.0 - lo))
    count = [0]

    def fun(z):
        count[0] += z.shape[0]
        u = special.ndtr(z)
        lf = np.atleast_1d(vine_log_density(rf, u))
        lg = np.atleast_1d(vine_log_density(rg, u))
        jac = np.sum(-0.5 * z * z, axis=1) - 0.5 * d * math.log(2.0 * math.pi)
        return np.exp(lf + jac) * (lf - lg)

    res = integrate.cubature(fun, np.full(d, zlo), np.full(d, zhi), rule="genz-malik",
                             atol=tol, rtol=0.0, max_subdivisions=max_subdivisions)
    if res.status != "converged":
        raise NumericError(f"cubature did not converge (estimate {float(res.estimate):.6g}, "
                           f"error {float(res.error):.3g})", detail={"estimate": float(res.estimate)})
    return DistanceReport("cubatureKL", float(res.estimate), {"beta": beta, "tol": tol},
                          count[0], time.perf_counter() - t0, stderr=float(res.error))
