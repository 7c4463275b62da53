"""Acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line with the measured values and the
pinned tolerance; the lines are repeated in the terminal summary.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy import integrate

from vinedist import distance as dist
from vinedist.bicop import PairCopula, pair_pdf
from vinedist.distance import GridSpec, akl, cubature_kl, dkl, mckl, sdkl
from vinedist.experiments import (
    euro_stoxx4,
    gaussian_dvine,
    random_gaussian_vine,
    reproduce_table,
    single_family_vine,
    t_vine,
)
from vinedist.vine import (
    VineSpec,
    cond_density,
    count_same_diagonal,
    nearest_gaussian,
    rosenblatt_forward,
    rosenblatt_inverse,
    sample_vine,
    trim_structure,
    vine_log_density,
)

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def euro_pair():
    rf = euro_stoxx4()
    return rf, nearest_gaussian(rf)


def test_criterion_1_dkl_table(verdict, euro_pair):
    t0 = time.perf_counter()
    ns = (10, 20, 50, 100, 1000)
    v = {n: dkl(*euro_pair, GridSpec(n=n, beta=0.95, a=4.0)).value for n in ns}
    elapsed = time.perf_counter() - t0
    tail = [v[n] for n in ns[1:]]
    ok_n10 = 0.103 <= v[10] <= 0.143
    ok_n1000 = abs(v[1000] - 0.113) <= 0.02
    ok_mono = all(b <= a + 0.003 for a, b in zip(tail, tail[1:]))
    verdict(ok_n10 and ok_n1000 and ok_mono and elapsed < 60,
            f"dKL n=10 {v[10]:.5f} in [0.103, 0.143]; n=1000 {v[1000]:.5f} within 0.02 of 0.113; "
            f"n=20..1000 {', '.join(f'{x:.5f}' for x in tail)} non-increasing (slack 0.003); "
            f"{elapsed:.1f} s < 60 s")


def test_criterion_2_akl_and_cubature(verdict, euro_pair):
    t0 = time.perf_counter()
    a = akl(*euro_pair, GridSpec(n=50, beta=0.95)).value
    c = cubature_kl(*euro_pair, beta=0.95, tol=1e-4).value
    elapsed = time.perf_counter() - t0
    ok = 0.066 <= a <= 0.086 and 0.072 <= c <= 0.082 and abs(a - c) <= 0.01 and elapsed < 1800
    verdict(ok, f"aKL n=50 {a:.5f} in [0.066, 0.086]; cubature {c:.5f} in [0.072, 0.082]; "
                f"|gap| {abs(a - c):.5f} <= 0.01; {elapsed:.0f} s < 1800 s")


LADDER = {3: 0.857, 5: 0.376, 7: 0.209, 10: 0.109, 15: 0.051, 20: 0.029, 25: 0.019, 30: 0.013}


def test_criterion_3_nu_ladder(verdict):
    t0 = time.perf_counter()
    got = {}
    for nu in LADDER:
        rf = t_vine(5, 0.5, nu)
        got[nu] = dkl(rf, nearest_gaussian(rf), GridSpec(n=10)).value
    elapsed = time.perf_counter() - t0
    rel = {nu: got[nu] / LADDER[nu] - 1 for nu in LADDER}
    vals = list(got.values())
    ok = all(abs(r) <= 0.15 for r in rel.values()) and all(a > b for a, b in zip(vals, vals[1:]))
    verdict(ok and elapsed < 120,
            "dKL " + ", ".join(f"nu={nu} {got[nu]:.4f} ({100 * rel[nu]:+.1f}%)" for nu in LADDER)
            + f"; within 15%, strictly decreasing; {elapsed:.1f} s < 120 s")


def test_criterion_4_family_ordering(verdict):
    t0 = time.perf_counter()
    gumbel = single_family_vine(5, "G", False, 0.5)
    others = {"C": ("C", False), "J": ("J", False), "N": ("N", False), "sC": ("C", True)}
    vals = {}
    for name, method in (("dKL", dkl), ("sdKL", sdkl)):
        vals[name] = {lab: method(gumbel, single_family_vine(5, fam, surv, 0.5), GridSpec(n=10)).value
                      for lab, (fam, surv) in others.items()}
    elapsed = time.perf_counter() - t0
    order = {name: v["C"] > v["J"] > v["N"] > v["sC"] for name, v in vals.items()}
    c_ok = abs(vals["sdKL"]["C"] / 3.557 - 1) <= 0.15
    detail = "; ".join(
        f"{name} C {v['C']:.4f} > J {v['J']:.4f} > N {v['N']:.4f} > sC {v['sC']:.4f} "
        f"{'holds' if order[name] else 'violated'}" for name, v in vals.items())
    verdict(all(order.values()) and c_ok and elapsed < 120,
            f"{detail}; sdKL C within 15% of 3.557 ({100 * (vals['sdKL']['C'] / 3.557 - 1):+.1f}%); "
            f"{elapsed:.1f} s < 120 s")


def test_criterion_5_sdkl_nu3(verdict):
    rf = t_vine(5, 0.5, 3)
    v = sdkl(rf, nearest_gaussian(rf), GridSpec(n=10)).value
    verdict(abs(v / 0.754 - 1) <= 0.15, f"sdKL {v:.4f} within 15% of 0.754 ({100 * (v / 0.754 - 1):+.1f}%)")


def test_criterion_6_mckl(verdict):
    rf = t_vine(5, 0.5, 3)
    t0 = time.perf_counter()
    rep = mckl(rf, nearest_gaussian(rf), n_mc=1_000_000, seed=20_181_015)
    elapsed = time.perf_counter() - t0
    verdict(0.354 <= rep.value <= 0.394 and elapsed < 300,
            f"MCKL N=1e6 {rep.value:.5f} (se {rep.stderr:.5f}) in [0.354, 0.394]; {elapsed:.0f} s < 300 s")


def test_criterion_7_rank_correlations(verdict):
    t0 = time.perf_counter()
    res = reproduce_table("T5", "desk")
    elapsed = time.perf_counter() - t0
    rc = res.rank_correlations
    d_ok = all(rc[f"d={d}"]["dKL"] >= 0.93 for d in (3, 5, 7))
    s_ok = all(rc[f"d={d}"]["sdKL"] >= 0.75 for d in (3, 5, 7, 10))
    detail = "; ".join(f"d={d} dKL {rc[f'd={d}']['dKL']:.3f} sdKL {rc[f'd={d}']['sdKL']:.3f}"
                       for d in (3, 5, 7, 10))
    verdict(d_ok and s_ok and elapsed < 1800,
            f"{detail}; dKL >= 0.93 for d=3,5,7, sdKL >= 0.75 for all; {elapsed:.0f} s < 1800 s")


GAUSS3_F = gaussian_dvine(np.array([[0, 0, 0], [0.5, 0, 0], [0.3, -0.4, 0]]))
GAUSS3_G = gaussian_dvine(np.array([[0, 0, 0], [0.1, 0, 0], [0.6, 0.2, 0]]))
MILD3_F = gaussian_dvine(np.array([[0, 0, 0], [0.2, 0, 0], [0.4, 0.3, 0]]))
MILD3_G = gaussian_dvine(np.array([[0, 0, 0], [0.0, 0, 0], [0.3, 0.5, 0]]))


def _bivariate(pc):
    return VineSpec.from_pairs(np.array([[1, 0], [2, 2]]), {(2, 1): pc})


def _property_checks():
    """Yield ``(name, ok, detail)`` for each property of the suite."""
    rng = np.random.default_rng(20181015)

    # conditional density equals the ratio of trimmed margins
    worst = 0.0
    for r in (t_vine(5, 0.5, 3), single_family_vine(5, "G", False, 0.5), euro_stoxx4()):
        u = rng.uniform(0.01, 0.99, size=(200, r.d))
        for j in range(1, r.d - 1):
            got = cond_density(r, j, u[:, j - 1], u[:, j:])
            top = vine_log_density(trim_structure(r, j - 1), u[:, j - 1:]) if j > 1 else vine_log_density(r, u)
            want = np.exp(top - vine_log_density(trim_structure(r, j), u[:, j:]))
            worst = max(worst, float(np.max(np.abs(got / want - 1))))
    yield "ratio oracle", worst <= 1e-10, f"max rel {worst:.1e} <= 1e-10"

    r = euro_stoxx4()
    w = rng.uniform(size=(2000, 4))
    err = float(np.max(np.abs(rosenblatt_forward(r, rosenblatt_inverse(r, w)) - w)))
    yield "Rosenblatt round-trip", err <= 1e-7, f"max {err:.1e} <= 1e-7"

    ref = cubature_kl(MILD3_F, MILD3_G, beta=0.95, tol=1e-6).value
    gaps = [abs(akl(MILD3_F, MILD3_G, GridSpec(n=n)).value - ref) for n in (10, 20, 50)]
    ok = gaps[0] > gaps[1] > gaps[2] and gaps[2] <= 0.01
    yield "aKL convergence ladder", ok, "gaps " + ", ".join(f"{g:.4f}" for g in gaps) + " decreasing, last <= 0.01"

    pf, pg = PairCopula("G", 1.5), PairCopula("N", 0.4)
    spec = GridSpec(n=2000, a=0.0)
    eps = spec.eps(1)

    def kappa(t):
        return integrate.quad(lambda x: pair_pdf(pf, x, t) * math.log(pair_pdf(pf, x, t) / pair_pdf(pg, x, t)),
                              1e-9, 1 - 1e-9, epsabs=1e-9, epsrel=1e-9, limit=400)[0]

    line = integrate.quad(kappa, eps, 1 - eps, epsabs=1e-8, limit=200)[0] / (1 - 2 * eps)
    got = dkl(_bivariate(pf), _bivariate(pg), spec).value
    yield "line integral limit", abs(got - line) <= 1e-3, f"|{got:.5f} - {line:.5f}| <= 1e-3"

    worst = 0.0
    for r in (t_vine(4, 0.5, 3), single_family_vine(4, "G", False, 0.5), GAUSS3_F):
        worst = max(worst, abs(akl(r, r, GridSpec(n=4)).value), abs(dkl(r, r).value), abs(sdkl(r, r).value))
    yield "identity zeros", worst <= 1e-6, f"max {worst:.1e} <= 1e-6"

    low = math.inf
    for rf, rg in ((t_vine(4, 0.5, 3), nearest_gaussian(t_vine(4, 0.5, 3))),
                   (single_family_vine(4, "G", False, 0.5), single_family_vine(4, "C", True, 0.3)),
                   (GAUSS3_F, GAUSS3_G)):
        for rep in (akl(rf, rg, GridSpec(n=5)), dkl(rf, rg), sdkl(rf, rg)):
            low = min(low, rep.value, *rep.summands)
    yield "non-negativity", low >= 0, f"min value or summand {low:.3g} >= 0"

    ok = True
    for seed in range(5):
        v, path = dist.hill_climb(random_gaussian_vine(5, seed), [1, -1, 1, -1, 1], 30)
        ok &= all(b > a for a, b in zip(path, path[1:])) and len(path) <= 2**5
    yield "hill climb", ok, "strictly increasing weights, terminates within 2^d steps"

    rf, rg = t_vine(4, 0.5, 3), single_family_vine(4, "J", False, 0.5)
    ok = (mckl(rf, rg, n_mc=20_000, seed=3).value == mckl(rf, rg, n_mc=20_000, seed=3).value
          and np.array_equal(sample_vine(rf, 100, 7), sample_vine(rf, 100, 7))
          and random_gaussian_vine(6, 11) == random_gaussian_vine(6, 11))
    yield "seed determinism", ok, "MCKL, sampling and random vines repeat bit for bit"

    want = dist.gaussian_kl_analytic(dist.gaussian_vine_corr(GAUSS3_F), dist.gaussian_vine_corr(GAUSS3_G))
    got = cubature_kl(GAUSS3_F, GAUSS3_G, beta=1.0, tol=1e-5).value
    yield "Gaussian KL vs cubature", abs(got - want) <= 1e-3, f"|{got:.5f} - {want:.5f}| <= 1e-3"

    counts = {d: count_same_diagonal(d) for d in (3, 4, 5)}
    yield "vine counts", counts == {3: 2, 4: 8, 5: 64}, f"{counts}"


def test_criterion_8_property_suite(verdict):
    t0 = time.perf_counter()
    results = list(_property_checks())
    elapsed = time.perf_counter() - t0
    failed = [name for name, ok, _ in results if not ok]
    detail = "; ".join(f"{name}: {'ok' if ok else 'FAILED'} ({d})" for name, ok, d in results)
    verdict(not failed and elapsed < 600, f"{detail}; {elapsed:.0f} s < 600 s")


def test_criterion_9_evaluation_counts(verdict):
    n = 3
    rows = []
    ok = True
    for d in (3, 4, 5):
        rf = t_vine(d, 0.4, 5)
        rg = nearest_gaussian(rf)
        got = (akl(rf, rg, GridSpec(n=n)).evaluations, dkl(rf, rg, GridSpec(n=n)).evaluations,
               sdkl(rf, rg, GridSpec(n=n)).evaluations)
        want = (sum(n ** (d - j) for j in range(1, d)), n * (2 ** (d - 1) - 1), n * (d - 1))
        ok &= got == want
        rows.append(f"d={d} {got} == {want}")
    verdict(ok, f"n={n} (aKL, dKL, sdKL) counts: " + "; ".join(rows))

