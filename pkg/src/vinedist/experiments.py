"""Reference vines and reproducible distance studies."""

from __future__ import annotations

import enum
import io
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import distance as dist
from ._random import uniform_rows
from .bicop import Family, pair_from_tau
from .errors import DomainError, ShapeError
from .vine import VineSpec, nearest_gaussian


# ---------------------------------------------------------------------------
# generators


def dvine_structure(d: int) -> np.ndarray:
    """D-vine structure matrix with diagonal ``1..d``.

    Column ``j`` reads ``j, d, d-1, ..., j+1`` from the diagonal down.
    """
    if d < 2:
        raise DomainError("d must be >= 2")
    m = np.zeros((d, d), dtype=np.int64)
    for j in range(d):
        m[j, j] = j + 1
        for i in range(j + 1, d):
            m[i, j] = d - i + j + 1
    return m


def tau_matrix(d: int, tau: float) -> np.ndarray:
    """``k[i, j] = tau / 2^(d-i)`` below the diagonal (1-based ``i``)."""
    k = np.zeros((d, d))
    for i in range(1, d):
        k[i, :i] = tau * 0.5 ** (d - 1 - i)
    return k


def _from_taus(d, family, taus, nu_of_row=None, survival=False):
    pairs = {}
    for i in range(1, d):
        for j in range(i):
            nu = None if nu_of_row is None else nu_of_row(i + 1)
            pairs[(i + 1, j + 1)] = pair_from_tau(family, float(taus[i, j]), nu=nu, survival=survival)
    return VineSpec.from_pairs(dvine_structure(d), pairs)


def t_vine(d: int, tau: float, nu: float) -> VineSpec:
    """Student-t D-vine with Kendall matrix ``tau_matrix(d, tau)`` and ``nu + d - i`` degrees of freedom."""
    if not abs(tau) < 1:
        raise DomainError("|tau| must be < 1")
    if not nu > 2:
        raise DomainError("nu must be > 2")
    return _from_taus(d, Family.STUDENT_T, tau_matrix(d, tau), lambda i: nu + d - i)


def single_family_vine(d: int, family: Family | str, survival: bool, tau: float) -> VineSpec:
    """D-vine with one family everywhere and Kendall matrix ``tau_matrix(d, tau)``."""
    family = Family(family)
    if family is Family.STUDENT_T:
        raise DomainError("use t_vine for Student-t vines (degrees of freedom needed)")
    return _from_taus(d, family, tau_matrix(d, tau), survival=survival)


def gaussian_dvine(par1) -> VineSpec:
    par1 = np.asarray(par1, dtype=float)
    d = par1.shape[0]
    codes = [["N" if i > j else "0" for j in range(d)] for i in range(d)]
    return VineSpec.from_matrices(dvine_structure(d), codes, np.tril(par1, -1))


def random_gaussian_vine(d: int, seed: int) -> VineSpec:
    """Gaussian D-vine whose partial correlation in row ``i`` is ``2 Beta(i/2, i/2) - 1``.

    Uses one row of the seeded uniform stream; draws are taken row by row
    (``i = 2..d``) and left to right.
    """
    if d < 2:
        raise DomainError("d must be >= 2")
    w = uniform_rows(seed, 1, d * (d - 1) // 2)[0]
    par1 = np.zeros((d, d))
    pos = 0
    for i in range(2, d + 1):
        for j in range(1, i):
            par1[i - 1, j - 1] = 2.0 * special.betaincinv(i / 2.0, i / 2.0, w[pos]) - 1.0
            pos += 1
    return gaussian_dvine(par1)


def euro_stoxx4() -> VineSpec:
    """Four-index stock vine (AEX, FTSE MIB, DAX, IBEX 35) fitted to daily data."""
    m = [[1, 0, 0, 0], [4, 2, 0, 0], [2, 4, 3, 0], [3, 3, 4, 4]]
    fam = [["0", "0", "0", "0"], ["F", "0", "0", "0"], ["t", "t", "0", "0"], ["t", "t", "t", "0"]]
    p1 = [[0, 0, 0, 0], [1.01, 0, 0, 0], [0.36, 0.36, 0, 0], [0.91, 0.89, 0.88, 0]]
    p2 = [[0, 0, 0, 0], [0, 0, 0, 0], [6.34, 10.77, 0, 0], [6.23, 4.96, 6.80, 0]]
    return VineSpec.from_matrices(np.array(m), fam, np.array(p1), np.array(p2))


def spearman(x, y) -> float:
    """Spearman rank correlation (average ranks for ties)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError("spearman needs two 1-d sequences of equal length")
    if len(x) < 2:
        raise DomainError("spearman needs at least two observations")
    return float(stats.spearmanr(x, y).statistic)


# ---------------------------------------------------------------------------
# studies


class TableId(enum.Enum):
    T1_akl = "T1"
    T2_dkl = "T2"
    T3_plausibility = "T3"
    T4_sdkl_plausibility = "T4"
    T5_rankcorr = "T5"
    T6_timings = "T6"

    @classmethod
    def parse(cls, text: str | TableId) -> TableId:
        if isinstance(text, TableId):
            return text
        for tag in cls:
            if text in (tag.value, tag.name):
                return tag
        raise DomainError(f"unknown table {text!r}; choose one of {', '.join(t.value for t in cls)}")


SCALES = ("desk", "paper")
SKIPPED = "skipped: soft limit"

# seeds of the comparison vines of the rank-correlation study: vine r (1..m)
# in dimension d uses RANKCORR_SEED_BASE + 1000 * d + r
RANKCORR_SEED_BASE = 20_181_015
MCKL_SEED = 20_181_015

T3_NUS = (3, 5, 7, 10, 15, 20, 25, 30)
T3_TAUS = (-0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7)
T3_FAMILIES = (("N", "N", False), ("C", "C", False), ("sC", "C", True), ("J", "J", False))


def rankcorr_seed(d: int, r: int) -> int:
    return RANKCORR_SEED_BASE + 1000 * d + r


@dataclass
class StudyResult:
    """Rows of ``(label, {column: value})``; a value is a float or a marker string."""

    table: str
    scale: str
    columns: list[str]
    rows: list[tuple[str, dict]] = field(default_factory=list)
    rank_correlations: dict | None = None
    seeds: list[int] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def value(self, label: str, column: str):
        for lab, vals in self.rows:
            if lab == label:
                return vals.get(column)
        raise KeyError(label)

    def column(self, column: str) -> list:
        return [vals.get(column) for _, vals in self.rows]

    def as_dict(self) -> dict:
        out = {"table": self.table, "scale": self.scale, "columns": list(self.columns),
               "rows": [{"label": lab, "values": {c: vals[c] for c in self.columns if c in vals}}
                        for lab, vals in self.rows],
               "seeds": list(self.seeds), "params": self.params}
        if self.rank_correlations is not None:
            out["rank_correlations"] = self.rank_correlations
        return out

    def to_json(self) -> str:
        from .io import dumps
        return dumps(self.as_dict())

    def render(self) -> str:
        def cell(v):
            if v is None:
                return "--"
            if isinstance(v, str):
                return v
            return f"{v:.4g}" if abs(v) < 1000 else f"{v:.1f}"

        header = [""] + list(self.columns)
        body = [[lab] + [cell(vals.get(c)) for c in self.columns] for lab, vals in self.rows]
        widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
        buf = io.StringIO()
        buf.write(f"{self.table} ({self.scale})\n")
        for r in [header] + body:
            buf.write("  ".join(s.rjust(w) for s, w in zip(r, widths)).rstrip() + "\n")
        if self.rank_correlations:
            buf.write("rank correlation with analytic KL (percent)\n")
            for key, per_method in self.rank_correlations.items():
                items = ", ".join(f"{m} {cell(100 * v) if not isinstance(v, str) else v}"
                                  for m, v in per_method.items())
                buf.write(f"  {key}: {items}\n")
        return buf.getvalue()


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    rep = fn(*args, **kwargs)
    return rep.value, time.perf_counter() - t0


def _t1(scale):
    rf = euro_stoxx4()
    rg = nearest_gaussian(rf)
    paper = scale == "paper"
    ns = (10, 20, 50)
    betas = (0.95, 0.99) if paper else (0.95,)
    cols = [f"aKL n={n}" for n in ns] + ["numeric", "MCKL 1e5", "MCKL 1e6"]
    res = StudyResult("T1", scale, cols, seeds=[MCKL_SEED])
    for beta in betas:
        vals, times = {}, {}
        for n in ns:
            vals[f"aKL n={n}"], times[f"aKL n={n}"] = _timed(dist.akl, rf, rg, dist.GridSpec(n=n, beta=beta))
        vals["numeric"], times["numeric"] = _timed(dist.cubature_kl, rf, rg, beta=beta, tol=1e-4)
        res.rows.append((f"beta={beta:g} value", vals))
        res.rows.append((f"beta={beta:g} time [s]", times))
    vals, times = {}, {}
    for n_mc, col in ((100_000, "MCKL 1e5"), (1_000_000, "MCKL 1e6")):
        vals[col], times[col] = _timed(dist.mckl, rf, rg, n_mc=n_mc, seed=MCKL_SEED)
    res.rows.append(("full cube value", vals))
    res.rows.append(("full cube time [s]", times))
    return res


def _t2(scale):
    rf = euro_stoxx4()
    rg = nearest_gaussian(rf)
    ns = (10, 20, 50, 100, 1000) + ((10_000,) if scale == "paper" else ())
    cols = [f"n={n}" for n in ns]
    vals, times = {}, {}
    for n, col in zip(ns, cols):
        vals[col], times[col] = _timed(dist.dkl, rf, rg, dist.GridSpec(n=n))
    return StudyResult("T2", scale, cols, [("dKL", vals), ("time [s]", times)])


def _plausibility(tag, method, scale):
    n_mc = 1_000_000 if scale == "paper" else 100_000
    name = "dKL" if method is dist.dkl else "sdKL"
    cols = ["group", name, "MCKL", "ratio"]
    res = StudyResult(tag, scale, cols, seeds=[MCKL_SEED], params={"n": 10, "n_mc": n_mc})

    def add(group, label, rf, rg):
        v = method(rf, rg, dist.GridSpec(n=10)).value
        mc = dist.mckl(rf, rg, n_mc=n_mc, seed=MCKL_SEED).value
        res.rows.append((f"{group} {label}", {"group": group, name: v, "MCKL": mc,
                                              "ratio": v / mc if mc > 0 else float("nan")}))

    for nu in T3_NUS:
        rf = t_vine(5, 0.5, nu)
        add("nu", str(nu), rf, nearest_gaussian(rf))
    ref = t_vine(5, 0.0, 3)
    for tau in T3_TAUS:
        add("tau", f"{tau:g}", t_vine(5, tau, 3), ref)
    gumbel = single_family_vine(5, "G", False, 0.5)
    for label, fam, surv in T3_FAMILIES:
        add("family", label, gumbel, single_family_vine(5, fam, surv, 0.5))
    return res


def _rankcorr(scale, with_times=False):
    paper = scale == "paper"
    dims = (3, 4, 5, 7, 10, 15, 20, 30) if paper else (3, 5, 7, 10)
    m = 50
    n_mc = 1_000_000 if paper else 100_000
    akl_max = 5 if paper else 3
    methods = ("KL", "aKL", "dKL", "sdKL", "MCKL")
    res = StudyResult("T6" if with_times else "T5", scale, [f"d={d}" for d in dims],
                      params={"m": m, "n_akl": 20, "n": 10, "n_mc": n_mc, "seed_base": RANKCORR_SEED_BASE})
    corr = {}
    times = {meth: {} for meth in methods[1:]}
    for d in dims:
        ref = gaussian_dvine(_nearest_rho(tau_matrix(d, 0.5)))
        sig_ref = dist.gaussian_vine_corr(ref)
        values = {meth: [] for meth in methods}
        elapsed = {meth: 0.0 for meth in methods}
        run = {
            "aKL": d <= akl_max,
            "dKL": d <= 10,
            "sdKL": True,
            "MCKL": True,
        }
        for r in range(1, m + 1):
            seed = rankcorr_seed(d, r)
            res.seeds.append(seed)
            other = random_gaussian_vine(d, seed)
            values["KL"].append(dist.gaussian_kl_analytic(sig_ref, dist.gaussian_vine_corr(other)))
            jobs = {
                "aKL": lambda: dist.akl(ref, other, dist.GridSpec(n=20)),
                "dKL": lambda: dist.dkl(ref, other, dist.GridSpec(n=10)),
                "sdKL": lambda: dist.sdkl(ref, other, dist.GridSpec(n=10)),
                "MCKL": lambda: dist.mckl(ref, other, n_mc=n_mc, seed=MCKL_SEED),
            }
            for meth, job in jobs.items():
                if run[meth]:
                    t0 = time.perf_counter()
                    values[meth].append(job().value)
                    elapsed[meth] += time.perf_counter() - t0
        corr[f"d={d}"] = {}
        for meth in methods[1:]:
            if run[meth]:
                corr[f"d={d}"][meth] = spearman(values["KL"], values[meth])
                times[meth][f"d={d}"] = elapsed[meth] / m
            else:
                corr[f"d={d}"][meth] = SKIPPED
                times[meth][f"d={d}"] = SKIPPED
    if with_times:
        res.rows = [(meth, times[meth]) for meth in methods[1:]]
    else:
        res.rows = [(meth, {f"d={d}": (c[meth] if isinstance(c[meth], str) else 100 * c[meth])
                            for d, c in zip(dims, corr.values())}) for meth in methods[1:]]
    res.rank_correlations = corr
    return res


def dimension_ladder(dims=range(3, 11), tau: float = 0.5, nu: float = 3.0, n: int = 10) -> StudyResult:
    """dKL and sdKL of ``t_vine(d, tau, nu)`` against its nearest Gaussian vine for each ``d``.

    Stands in for the twelve-stock study, whose price data is not shipped;
    it exercises the same code path as dimension grows.
    """
    res = StudyResult("dimension ladder", "desk", ["dKL", "sdKL", "dKL time [s]", "sdKL time [s]"],
                      params={"tau": tau, "nu": nu, "n": n})
    for d in dims:
        rf = t_vine(d, tau, nu)
        rg = nearest_gaussian(rf)
        vals = {}
        vals["dKL"], vals["dKL time [s]"] = _timed(dist.dkl, rf, rg, dist.GridSpec(n=n))
        vals["sdKL"], vals["sdKL time [s]"] = _timed(dist.sdkl, rf, rg, dist.GridSpec(n=n))
        res.rows.append((f"d={d}", vals))
    return res


def _nearest_rho(k):
    return np.sin(0.5 * np.pi * np.asarray(k))


def reproduce_table(table: TableId | str, scale: str = "desk") -> StudyResult:
    """Run one of the six study scenarios.

    ``desk`` keeps every table within minutes to an hour on one core: aKL grids
    up to ``n = 50``, Monte Carlo references at ``1e5`` draws for the
    plausibility and rank-correlation tables, and rank correlations for
    ``d`` in 3, 5, 7, 10.  ``paper`` uses the full settings.  Cells beyond
    the soft limits are reported as ``"skipped: soft limit"``.
    """
    table = TableId.parse(table)
    if scale not in SCALES:
        raise DomainError(f"scale must be one of {', '.join(SCALES)}")
    if table is TableId.T1_akl:
        return _t1(scale)
    if table is TableId.T2_dkl:
        return _t2(scale)
    if table is TableId.T3_plausibility:
        return _plausibility("T3", dist.dkl, scale)
    if table is TableId.T4_sdkl_plausibility:
        return _plausibility("T4", dist.sdkl, scale)
    return _rankcorr(scale, with_times=table is TableId.T6_timings)
