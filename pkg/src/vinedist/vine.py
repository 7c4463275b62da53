"""Simplified vine copulas stored as structure, family and parameter matrices.

Matrices are d x d, lower triangular, and indexed like the printed form:
row ``i`` and column ``j`` (1-based in messages, 0-based in numpy).  The pair
copula in slot ``(i, j)``, ``i > j``, couples variables ``m[i, j]`` and
``m[j, j]`` given the variables ``m[i+1:, j]`` below it.

All density and transform evaluations go through the h-function recursion of
:class:`_Engine`, which works on the canonically labelled vine (diagonal
``1..d``).  For column ``j`` it keeps

* ``direct[j][k]   = C(j | m[k:, j])``            (``direct[j][d] = u_j``)
* ``indirect[j][k] = C(m[k, j] | j, m[k+1:, j])``

and looks the first argument of every pair up in the columns to the right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bicop
from ._random import uniform_rows
from .bicop import PairCopula
from .errors import ContractError, DomainError, ShapeError, StructureError

_BATCH = 100_000


# ---------------------------------------------------------------------------
# structure matrices


@dataclass(frozen=True)
class Violation:
    """One failed condition of the structure-matrix definition (1-based)."""

    prop: str
    i: int
    j: int | None = None
    k: int | None = None
    message: str = ""

    def __str__(self) -> str:
        where = ", ".join(f"{n}={v}" for n, v in (("i", self.i), ("j", self.j), ("k", self.k))
                          if v is not None)
        return f"Property {self.prop} ({where}): {self.message}"


@dataclass
class ValidationResult:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        return "ok" if self.ok else "; ".join(map(str, self.violations))


def _as_structure(m) -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
        raise ShapeError(f"structure must be a square matrix of size >= 2, got shape {a.shape}")
    if not np.all(np.equal(np.mod(a, 1), 0)):
        raise ShapeError("structure entries must be integers")
    a = a.astype(np.int64)
    if np.any(np.triu(a, 1) != 0):
        raise ShapeError("structure must be lower triangular (zeros above the diagonal)")
    return a


def _find_source(m: np.ndarray, k: int, i: int):
    """Where C(m[k,i] | m[k+1:,i]) is produced (0-based).

    Returns ``("direct", j)`` when it is the diagonal variable of column ``j``
    conditioned on rows ``k+1:`` there, ``("indirect", j)`` when it is the
    off-diagonal output of pair ``(k+1, j)``, or None.
    """
    d = m.shape[0]
    target = int(m[k, i])
    cond = frozenset(m[k + 1:, i].tolist())
    for j in range(i + 1, min(k, d - 1) + 1):
        if m[j, j] == target and frozenset(m[k + 1:, j].tolist()) == cond:
            return ("direct", j)
        if k + 1 < d and m[k + 1, j] == target and \
                frozenset([int(m[j, j])] + m[k + 2:, j].tolist()) == cond:
            return ("indirect", j)
    return None


def validate_structure(m) -> ValidationResult:
    """Check the three defining properties of a vine structure matrix."""
    a = _as_structure(m)
    d = a.shape[0]
    res = ValidationResult()
    low = np.tril(a)
    bad = [(i, j) for i in range(d) for j in range(i + 1) if not 1 <= low[i, j] <= d]
    for i, j in bad:
        res.violations.append(Violation("0", i + 1, j + 1, None, f"entry {low[i, j]} outside 1..{d}"))
    if bad:
        return res
    for i in range(d):
        for j in range(i + 1, d):
            if not set(a[j:, j].tolist()) <= set(a[i:, i].tolist()):
                res.violations.append(Violation(
                    "1", i + 1, j + 1, None, f"entries of column {j + 1} missing from column {i + 1}"))
    for i in range(d - 1):
        if a[i, i] in a[i + 1:, i + 1]:
            res.violations.append(Violation(
                "2", i + 1, i + 2, None,
                f"diagonal entry {a[i, i]} of column {i + 1} reappears in column {i + 2}"))
    for i in range(d - 2):
        for k in range(i + 1, d):
            if _find_source(a, k, i) is None:
                res.violations.append(Violation(
                    "3", i + 1, None, k + 1, "no column to the right matches the conditioned/conditioning sets"))
    return res


def count_same_diagonal(d: int) -> int:
    """Number of vine decompositions whose structure matrix has a given diagonal."""
    if d < 3:
        raise DomainError("count_same_diagonal needs d >= 3")
    return 2 ** (math.comb(d - 2, 2) + d - 2)


# ---------------------------------------------------------------------------
# vine specification


def _code_matrix(d, families, survival):
    fam = np.full((d, d), "", dtype=object)
    surv = np.zeros((d, d), dtype=bool)
    for i in range(d):
        for j in range(i):
            code = str(families[i][j]).strip()
            s = code.startswith("s")
            fam[i, j] = code[1:] if s else code
            surv[i, j] = s or bool(survival is not None and survival[i][j])
    return fam, surv


@dataclass(frozen=True, eq=False)
class VineSpec:
    """The quadruple (structure, families, first and second parameters).

    ``families`` holds family codes (see :class:`bicop.Family`); ``survival``
    flags 180 degree rotations.  Entries on and above the diagonal are unused.
    Instances are immutable and validated on construction.
    """

    structure: np.ndarray
    families: np.ndarray
    par1: np.ndarray
    par2: np.ndarray
    survival: np.ndarray

    def __post_init__(self):
        m = _as_structure(self.structure)
        d = m.shape[0]
        check = validate_structure(m)
        if not check.ok:
            raise StructureError("invalid structure matrix: " + check.summary(), check.violations)
        fam, surv = _code_matrix(d, self.families, self.survival)
        p1 = np.array(self.par1, dtype=float)
        p2 = np.array(self.par2, dtype=float)
        for name, arr in (("par1", p1), ("par2", p2)):
            if arr.shape != (d, d):
                raise ShapeError(f"{name} must have shape {(d, d)}, got {arr.shape}")
        pairs = np.empty((d, d), dtype=object)
        for i in range(d):
            for j in range(i):
                try:
                    pairs[i, j] = PairCopula.from_code(
                        ("s" if surv[i, j] else "") + fam[i, j], p1[i, j], p2[i, j])
                except DomainError as exc:
                    raise DomainError(f"slot ({i + 1},{j + 1}): {exc}") from None
        for name, arr in (("structure", m), ("families", fam), ("par1", p1), ("par2", p2),
                          ("survival", surv), ("pairs", pairs)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_matrices(cls, structure, families, par1, par2=None, survival=None) -> "VineSpec":
        d = np.asarray(structure).shape[0]
        if par2 is None:
            par2 = np.zeros((d, d))
        return cls(np.asarray(structure), families, par1, par2, survival)

    @classmethod
    def from_pairs(cls, structure, pairs) -> "VineSpec":
        """Build from a mapping ``{(i, j): PairCopula}`` with 1-based slots."""
        d = np.asarray(structure).shape[0]
        fam = [["" for _ in range(d)] for _ in range(d)]
        p1, p2 = np.zeros((d, d)), np.zeros((d, d))
        for i in range(d):
            for j in range(i):
                pc = pairs[(i + 1, j + 1)] if isinstance(pairs, dict) else pairs[i][j]
                fam[i][j] = pc.code
                p1[i, j], p2[i, j] = pc.p1, pc.p2
        return cls(np.asarray(structure), fam, p1, p2, None)

    @property
    def d(self) -> int:
        return self.structure.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.structure).copy()

    @property
    def is_canonical(self) -> bool:
        return bool(np.array_equal(self.diagonal, np.arange(1, self.d + 1)))

    def pair(self, i: int, j: int) -> PairCopula:
        """Pair copula of the 1-based slot ``(i, j)``."""
        return self.pairs[i - 1, j - 1]

    def slots(self):
        for j in range(self.d - 1):
            for i in range(j + 1, self.d):
                yield i, j

    def kendall(self) -> np.ndarray:
        k = np.zeros((self.d, self.d))
        for i, j in self.slots():
            k[i, j] = bicop.pair_tau(self.pairs[i, j])
        return k

    def family_codes(self) -> list[list[str]]:
        return [[self.pairs[i, j].code if i > j else "0" for j in range(self.d)]
                for i in range(self.d)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, VineSpec):
            return NotImplemented
        return (np.array_equal(self.structure, other.structure)
                and self.family_codes() == other.family_codes()
                and all(np.array_equal(np.tril(getattr(self, n), -1), np.tril(getattr(other, n), -1))
                        for n in ("par1", "par2")))

    def __repr__(self) -> str:
        return f"VineSpec(d={self.d}, diagonal={self.diagonal.tolist()})"

    @property
    def _engine(self) -> "_Engine":
        eng = self.__dict__.get("_engine_cache")
        if eng is None:
            canon = self if self.is_canonical else relabel_canonical(self)[0]
            eng = _Engine(canon)
            object.__setattr__(self, "_engine_cache", eng)
        return eng


def relabel_canonical(r: VineSpec) -> tuple[VineSpec, np.ndarray]:
    """Relabel variables so that the structure diagonal reads ``1..d``.

    Returns the relabelled vine and ``perm`` with ``perm[i] =`` original label
    of canonical variable ``i + 1``; evaluate the new vine at ``u[:, perm - 1]``.
    """
    perm = r.diagonal
    if r.is_canonical:
        return r, perm
    new_label = np.zeros(r.d + 1, dtype=np.int64)
    new_label[perm] = np.arange(1, r.d + 1)
    m = new_label[r.structure]  # label 0 (upper triangle) stays 0
    return VineSpec(m, r.family_codes(), r.par1, r.par2, None), perm


def trim_structure(r: VineSpec, k: int) -> VineSpec:
    """Marginal vine of variables ``k+1..d`` (relabelled to ``1..d-k``)."""
    if not r.is_canonical:
        raise ContractError("trim_structure needs a canonical vine; use relabel_canonical")
    if not 1 <= k <= r.d - 2:
        raise DomainError(f"trim step {k} outside 1..{r.d - 2} (a vine needs at least two variables)")
    m = r.structure[k:, k:] - k
    m = np.tril(m)
    codes = [row[k:] for row in r.family_codes()[k:]]
    return VineSpec(m, codes, r.par1[k:, k:], r.par2[k:, k:], None)


def nearest_gaussian(r: VineSpec) -> VineSpec:
    """Same structure, Gaussian pairs with rho = sin(pi * tau / 2)."""
    tau = r.kendall()
    codes = [["N" if i > j else "0" for j in range(r.d)] for i in range(r.d)]
    rho = np.where(np.tril(np.ones((r.d, r.d)), -1) > 0, np.sin(np.pi * tau / 2.0), 0.0)
    return VineSpec(r.structure, codes, rho, np.zeros((r.d, r.d)), None)


# ---------------------------------------------------------------------------
# h-function recursion


class _Engine:
    def __init__(self, r: VineSpec):
        m = r.structure
        d = self.d = r.d
        self.pairs = r.pairs
        self.source: dict[tuple[int, int], tuple[str, int]] = {}
        self.need_indirect: set[tuple[int, int]] = set()
        for j in range(d - 1):
            for k in range(j + 1, d):
                if k == d - 1:
                    self.source[k, j] = ("u", int(m[k, j]) - 1)
                    continue
                src = _find_source(m, k, j)
                if src is None:  # excluded by validation
                    raise StructureError(f"no source for slot ({k + 1},{j + 1})")
                self.source[k, j] = src
                if src[0] == "indirect":
                    self.need_indirect.add((k + 1, src[1]))

    def _arg(self, k, j, u, direct, indirect):
        kind, idx = self.source[k, j]
        if kind == "u":
            return u[..., idx]
        if kind == "direct":
            return direct[idx][k + 1]
        return indirect[idx][k + 1]

    def column_args(self, j, u, direct, indirect):
        return [self._arg(k, j, u, direct, indirect) for k in range(j + 1, self.d)]

    def fill_column(self, j, u, direct, indirect):
        """Evaluate column ``j`` given ``u[..., j]``; returns its log-density."""
        d = self.d
        col_d = {d: u[..., j]}
        col_i = {}
        logc = 0.0
        z = u[..., j]
        for k in range(d - 1, j, -1):
            a = self._arg(k, j, u, direct, indirect)
            pc = self.pairs[k, j]
            if (k, j) in self.need_indirect:
                col_i[k] = bicop._hfunc(pc, a, z)
            lc, z = bicop._logpdf_h(pc, z, a)
            logc = logc + lc
            col_d[k] = z
        direct[j] = col_d
        indirect[j] = col_i
        return logc

    def tables(self, u, stop=0):
        """Fill columns ``d-1 .. stop``; returns (direct, indirect, column logs)."""
        direct, indirect, logs = {}, {}, {}
        direct[self.d - 1] = {self.d: u[..., self.d - 1]}
        indirect[self.d - 1] = {}
        for j in range(self.d - 2, stop - 1, -1):
            logs[j] = self.fill_column(j, u, direct, indirect)
        return direct, indirect, logs

    def log_density(self, u):
        _, _, logs = self.tables(u)
        out = np.zeros(u.shape[:-1])
        for j in sorted(logs):
            out = out + logs[j]
        return out

    def forward(self, u):
        direct, _, _ = self.tables(u)
        w = np.empty_like(u)
        w[..., self.d - 1] = u[..., self.d - 1]
        for j in range(self.d - 1):
            w[..., j] = direct[j][j + 1]
        return w

    def inverse(self, w, stop=0):
        """Inverse Rosenblatt transform for columns ``stop..d-1``."""
        d = self.d
        u = np.full(w.shape, np.nan)
        u[..., d - 1] = w[..., d - 1]
        direct = {d - 1: {d: u[..., d - 1]}}
        indirect = {d - 1: {}}
        for j in range(d - 2, stop - 1, -1):
            args = self.column_args(j, u, direct, indirect)
            z = w[..., j]
            for k in range(j + 1, d):
                z = bicop._hinv(self.pairs[k, j], z, args[k - j - 1])
            u[..., j] = z
            self.fill_column(j, u, direct, indirect)
        return u

    def column_logpdf(self, j, args, x):
        """log c_{j|j+1:d}(x | .) given the column's first arguments.

        ``args`` is a list (rows ``j+1..d-1``) of arrays broadcastable with ``x``.
        """
        logc = 0.0
        z = x
        for k in range(self.d - 1, j, -1):
            a = args[k - j - 1]
            pc = self.pairs[k, j]
            if k > j + 1:
                lc, z = bicop._logpdf_h(pc, z, a)
            else:
                lc = bicop._logpdf(pc, z, a)
            logc = logc + lc
        return logc


# ---------------------------------------------------------------------------
# public evaluation API


def _points(u, d, name="u"):
    a = np.asarray(u, dtype=float)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if a.ndim != 2 or a.shape[1] != d:
        raise ShapeError(f"{name} must have {d} columns, got shape {np.shape(u)}")
    if not np.all((a > 0.0) & (a < 1.0)):
        raise DomainError(f"{name} must lie strictly inside (0, 1)^{d}")
    return a, single


def _batched(fn, a):
    if a.shape[0] <= _BATCH:
        return fn(a)
    return np.concatenate([fn(a[s:s + _BATCH]) for s in range(0, a.shape[0], _BATCH)])


def vine_log_density(r: VineSpec, u):
    """log c(u) for one point (shape (d,)) or many (shape (N, d))."""
    a, single = _points(u, r.d)
    perm = r.diagonal - 1
    out = _batched(lambda b: r._engine.log_density(b[:, perm]), a)
    return float(out[0]) if single else out


def vine_density(r: VineSpec, u):
    return np.exp(vine_log_density(r, u))


def _require_canonical(r):
    if not r.is_canonical:
        raise ContractError("operation needs a canonical vine (diagonal 1..d); use relabel_canonical")


def cond_log_density(r: VineSpec, j: int, u_j, u_rest):
    """log c_{j | j+1..d}(u_j | u_rest), ``j`` 1-based."""
    _require_canonical(r)
    d = r.d
    if not 1 <= j <= d - 1:
        raise DomainError(f"j={j} outside 1..{d - 1}")
    rest, single = _points(u_rest, d - j, "u_rest")
    uj = np.asarray(u_j, dtype=float).reshape(-1)
    if not np.all((uj > 0) & (uj < 1)):
        raise DomainError("u_j must lie strictly inside (0, 1)")
    n = max(len(uj), rest.shape[0])
    full = np.full((n, d), 0.5)
    full[:, j - 1] = uj
    full[:, j:] = rest
    eng = r._engine
    _, _, logs = eng.tables(full, stop=j - 1)
    out = np.broadcast_to(logs[j - 1], (n,)).copy()
    return float(out[0]) if single and n == 1 else out


def cond_density(r: VineSpec, j: int, u_j, u_rest):
    return np.exp(cond_log_density(r, j, u_j, u_rest))


def rosenblatt_forward(r: VineSpec, u):
    """Map u-scale points to independent uniforms.

    Output column ``i`` is the conditional distribution of the variable on
    diagonal position ``i`` given those on positions ``i+1..d``.
    """
    a, single = _points(u, r.d)
    perm = r.diagonal - 1
    out = _batched(lambda b: r._engine.forward(b[:, perm]), a)
    return out[0] if single else out


def rosenblatt_inverse(r: VineSpec, w):
    """Map independent uniforms to the u-scale; inverse of :func:`rosenblatt_forward`."""
    a, single = _points(w, r.d, "w")
    perm = r.diagonal - 1

    def inv(b):
        out = np.empty_like(b)
        out[:, perm] = r._engine.inverse(b)
        return out

    out = _batched(inv, a)
    return out[0] if single else out


def sample_vine(r: VineSpec, n: int, seed: int) -> np.ndarray:
    """``n`` draws from the vine; identical seeds give identical output."""
    if n < 1:
        raise DomainError("sample size must be positive")
    chunks = []
    for s in range(0, n, _BATCH):
        w = uniform_rows(seed, min(n, s + _BATCH), r.d, start=s)
        chunks.append(rosenblatt_inverse(r, w))
    return np.concatenate(chunks)


def independence_vine(structure) -> VineSpec:
    d = np.asarray(structure).shape[0]
    codes = [["I" if i > j else "0" for j in range(d)] for i in range(d)]
    return VineSpec(np.asarray(structure), codes, np.zeros((d, d)), np.zeros((d, d)), None)
