from __future__ import annotations

import json

import numpy as np
import pytest

from vinedist import distance as dist
from vinedist.bicop import pair_tau
from vinedist.errors import DomainError, ShapeError
from vinedist.experiments import (
    SKIPPED,
    StudyResult,
    TableId,
    dimension_ladder,
    dvine_structure,
    euro_stoxx4,
    random_gaussian_vine,
    rankcorr_seed,
    reproduce_table,
    single_family_vine,
    spearman,
    t_vine,
    tau_matrix,
)
from vinedist.vine import nearest_gaussian, validate_structure


# ---- generators -------------------------------------------------------------

def test_dvine_structure_d3_columns():
    m = dvine_structure(3)
    assert m[:, 0].tolist() == [1, 3, 2]
    assert m[1:, 1].tolist() == [2, 3]
    assert m[2, 2] == 3


def test_dvine_structure_d5_first_column():
    assert dvine_structure(5)[:, 0].tolist() == [1, 5, 4, 3, 2]


@pytest.mark.parametrize("d", range(2, 13))
def test_dvine_structure_valid(d):
    assert validate_structure(dvine_structure(d)).ok


def test_dvine_structure_rejects_d1():
    with pytest.raises(DomainError):
        dvine_structure(1)


def test_t_vine_taus_by_row():
    r = t_vine(5, 0.5, 3)
    k = r.kendall()
    np.testing.assert_allclose(k[4, :4], 0.5, atol=1e-9)
    np.testing.assert_allclose(k[3, :3], 0.25, atol=1e-9)
    np.testing.assert_allclose(k[1, :1], 0.5 / 8, atol=1e-9)


def test_t_vine_degrees_of_freedom_by_row():
    r = t_vine(5, 0.5, 3)
    for i in range(1, 5):
        # 1-based row i + 1 carries nu + d - (i + 1)
        np.testing.assert_array_equal(r.par2[i, :i], 3 + 5 - (i + 1))


@pytest.mark.parametrize("tau", [-0.7, -0.1, 0.3, 0.5])
def test_t_vine_kendall_matrix_matches(tau):
    np.testing.assert_allclose(t_vine(6, tau, 4).kendall(), tau_matrix(6, tau), atol=1e-9)


def test_t_vine_domain():
    with pytest.raises(DomainError):
        t_vine(4, 1.0, 3)
    with pytest.raises(DomainError):
        t_vine(4, 0.5, 2)


def test_t_vine_zero_tau_still_differs_from_gaussian():
    rf = t_vine(4, 0.0, 3)
    rep = dist.mckl(rf, nearest_gaussian(rf), n_mc=100_000, seed=3)
    assert rep.value > 5 * rep.stderr


@pytest.mark.parametrize("fam,surv", [("G", False), ("C", True), ("C", False), ("J", False), ("F", False), ("N", False)])
def test_single_family_vine_taus(fam, surv):
    r = single_family_vine(5, fam, surv, 0.5)
    assert validate_structure(r.structure).ok
    for i, j in r.slots():
        assert r.pairs[i, j].family.value == fam
        assert r.pairs[i, j].survival == surv
    np.testing.assert_allclose(r.kendall(), tau_matrix(5, 0.5), atol=1e-9)


def test_single_family_vine_unattainable():
    with pytest.raises(DomainError):
        single_family_vine(4, "C", False, -0.5)


def test_random_gaussian_vine_deterministic():
    a, b = random_gaussian_vine(6, 42), random_gaussian_vine(6, 42)
    assert a == b
    assert random_gaussian_vine(6, 43) != a


def test_random_gaussian_vine_correlation_pd():
    for seed in range(200):
        r = random_gaussian_vine(10, seed)
        assert validate_structure(r.structure).ok
        assert np.linalg.eigvalsh(dist.gaussian_vine_corr(r)).min() > 0


def test_random_gaussian_vine_partials_centred():
    d, m = 4, 10_000
    total = np.zeros((d, d))
    for seed in range(m):
        total += random_gaussian_vine(d, seed).par1
    mean = total / m
    for i in range(1, d):
        np.testing.assert_array_less(np.abs(mean[i, :i]), 0.02)


def test_random_gaussian_vine_row_spread():
    # 2 Beta(i/2, i/2) - 1 has variance 1 / (i + 1); row 2 is uniform on [-1, 1]
    d, m = 5, 4000
    draws = np.array([random_gaussian_vine(d, s).par1 for s in range(m)])
    for i in range(2, d + 1):
        var = draws[:, i - 1, : i - 1].var()
        assert var == pytest.approx(1 / (i + 1), rel=0.1)


def test_euro_stoxx4_fixture():
    r = euro_stoxx4()
    assert validate_structure(r.structure).ok
    assert r.structure.tolist() == [[1, 0, 0, 0], [4, 2, 0, 0], [2, 4, 3, 0], [3, 3, 4, 4]]
    f = r.pair(2, 1)
    assert (f.code, f.p1) == ("F", 1.01)
    assert [r.pair(3, 1).code, r.pair(3, 2).code] == ["t", "t"]
    assert (r.pair(3, 1).p1, r.pair(3, 1).p2) == (0.36, 6.34)
    assert (r.pair(3, 2).p1, r.pair(3, 2).p2) == (0.36, 10.77)
    assert [r.pair(4, j).p1 for j in (1, 2, 3)] == [0.91, 0.89, 0.88]
    assert [r.pair(4, j).p2 for j in (1, 2, 3)] == [6.23, 4.96, 6.80]


def test_euro_stoxx4_nearest_gaussian():
    r = euro_stoxx4()
    g = nearest_gaussian(r)
    for i, j in r.slots():
        assert g.pairs[i, j].code == "N"
        assert g.pairs[i, j].p1 == pytest.approx(np.sin(np.pi * pair_tau(r.pairs[i, j]) / 2), abs=1e-12)


# ---- spearman ------------------------------------------------------------------

def test_spearman_examples():
    x = [0.3, 1.2, 5.0, 2.2, 9.1]
    assert spearman(x, x) == pytest.approx(1.0)
    assert spearman(x, [-v for v in x]) == pytest.approx(-1.0)
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)


def test_spearman_ties_use_average_ranks():
    # ranks of y are (1.5, 1.5, 3, 4); Pearson correlation with (1, 2, 3, 4)
    rx = np.array([1, 2, 3, 4.0])
    ry = np.array([1.5, 1.5, 3, 4])
    want = np.corrcoef(rx, ry)[0, 1]
    assert spearman([1, 2, 3, 4], [7, 7, 8, 9]) == pytest.approx(want, abs=1e-12)


def test_spearman_errors():
    with pytest.raises(ShapeError):
        spearman([1, 2, 3], [1, 2])
    with pytest.raises(DomainError):
        spearman([1], [1])


# ---- studies --------------------------------------------------------------------

def test_table_id_parse():
    assert TableId.parse("T5") is TableId.T5_rankcorr
    assert TableId.parse("T1_akl") is TableId.T1_akl
    assert TableId.parse(TableId.T3_plausibility) is TableId.T3_plausibility
    with pytest.raises(DomainError):
        TableId.parse("T7")
    assert len({t.value for t in TableId}) == 6


def test_reproduce_table_rejects_scale():
    with pytest.raises(DomainError):
        reproduce_table("T2", "huge")


def test_rankcorr_seeds_distinct():
    seeds = {rankcorr_seed(d, r) for d in (3, 4, 5, 7, 10, 15, 20, 30) for r in range(1, 51)}
    assert len(seeds) == 8 * 50


def test_family_ordering_under_both_methods():
    gumbel = single_family_vine(5, "G", False, 0.5)
    spec = dist.GridSpec(n=10)
    for method in (dist.dkl, dist.sdkl):
        v = {lab: method(gumbel, single_family_vine(5, fam, surv, 0.5), spec).value
             for lab, fam, surv in (("C", "C", False), ("J", "J", False), ("sC", "C", True))}
        assert v["C"] > v["J"] > v["sC"]


@pytest.fixture(scope="module")
def t4_runs():
    return reproduce_table("T4", "desk"), reproduce_table("T4", "desk")


def test_t4_deterministic(t4_runs):
    a, b = t4_runs
    assert a.as_dict() == b.as_dict()
    assert a.to_json() == b.to_json()


def test_t4_shape_and_monotone_ladder(t4_runs):
    res, _ = t4_runs
    labels = [lab for lab, _ in res.rows]
    assert len(labels) == 8 + 8 + 4
    ladder = [res.value(f"nu {nu}", "sdKL") for nu in (3, 5, 7, 10, 15, 20, 25, 30)]
    assert all(a > b for a, b in zip(ladder, ladder[1:]))
    assert res.seeds and res.params["n"] == 10


def test_t4_serialization(t4_runs):
    res, _ = t4_runs
    doc = json.loads(res.to_json())
    assert doc["table"] == "T4"
    assert doc["rows"][0]["label"] == "nu 3"
    assert doc["rows"][0]["values"]["sdKL"] == res.value("nu 3", "sdKL")
    text = res.render()
    assert text.startswith("T4 (desk)")
    assert len(text.splitlines()) == 2 + len(res.rows)


def test_render_markers_and_rank_block():
    res = StudyResult("T5", "desk", ["d=3", "d=10"],
                      rows=[("aKL", {"d=3": 97.0, "d=10": SKIPPED})],
                      rank_correlations={"d=3": {"aKL": 0.97}, "d=10": {"aKL": SKIPPED}})
    text = res.render()
    assert SKIPPED in text
    assert "rank correlation with analytic KL (percent)" in text
    assert "d=3: aKL 97" in text
    with pytest.raises(KeyError):
        res.value("dKL", "d=3")


def test_dimension_ladder_small():
    res = dimension_ladder(dims=(3, 4))
    assert [lab for lab, _ in res.rows] == ["d=3", "d=4"]
    for _, vals in res.rows:
        assert vals["dKL"] > 0 and vals["sdKL"] > 0
