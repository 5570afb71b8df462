import math
from fractions import Fraction

import numpy as np
import pytest

from surprise_rr import (
    AssumptionSet,
    Candidate,
    Cluster,
    ClusterConfiguration,
    DisqualifierRule,
    HARD,
    Inscription,
    Slot,
    SlotSpec,
    cluster_rr,
    estimate_tail_area,
    extract_configuration,
    load_onomasticon,
    sample_cluster,
    tomb_correction,
    validate,
)

from oracle import exact_tail

MM = Candidate("mm", "mm", SlotSpec("mariam", "F", {"mariamenou-mara": 2, "mariame": 1}))
YOSEH = Candidate("yoseh", "yoseh", SlotSpec("yehosef", "M", {"yoseh": 1}))


def _cluster(*chains):
    return Cluster(
        "test",
        tuple(Inscription(tuple(Slot(r, g) for r, g in chain)) for chain in chains),
    )


def test_extract_configuration(talpiyot_cluster):
    config = extract_configuration(talpiyot_cluster)
    assert config.chains == (
        ("M", "M"), ("F",), ("M",), ("M",), ("F",), ("M", "M"),
    )
    single = _cluster([("marya", "F")])
    assert extract_configuration(single).chains == (("F",),)


def test_sample_cluster_distribution(onom_a):
    config = ClusterConfiguration((("F",),))
    rng = np.random.default_rng(5)
    n = 40_000
    hits = 0
    for _ in range(n):
        c = sample_cluster(config, onom_a, rng)
        slot = c.inscriptions[0].slots[0]
        assert slot.gender == "F"
        if slot.rendition_id == "mariamenou-mara":
            hits += 1
    p = 1 / 94
    assert abs(hits / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_sample_cluster_one_cell_stratum():
    onom = load_onomasticon([("a", "M", "a1", "A", 5)])
    config = ClusterConfiguration((("M",),))
    c = sample_cluster(config, onom, np.random.default_rng(0))
    assert c.inscriptions[0].slots[0].rendition_id == "a1"


def test_sample_cluster_pair_independence(onom_a):
    config = ClusterConfiguration((("M", "M"),))
    rng = np.random.default_rng(11)
    n = 40_000
    hit = 0
    for _ in range(n):
        c = sample_cluster(config, onom_a, rng)
        s0, s1 = c.inscriptions[0].slots
        if s0.generic_id == "yeshua" and s1.generic_id == "yehosef":
            hit += 1
    p = (40 / 305) * (90 / 305)
    assert abs(hit / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_oracle_single_slot(onom_b, onom_b_assumptions, onom_b_cluster):
    observed = cluster_rr(onom_b_cluster, onom_b_assumptions, onom_b).product_exact
    assert observed == Fraction(1, 10)
    tail = exact_tail([["M"]], onom_b_assumptions, onom_b, observed)
    assert tail == Fraction(1, 10)
    est = estimate_tail_area(
        onom_b_cluster, onom_b_assumptions, onom_b, n_sims=200_000, seed=7
    )
    assert abs(est.p_hat - float(tail)) <= 3 * est.mc_se


def test_oracle_two_slot_config(onom_b, onom_b_assumptions):
    cluster = _cluster([("a1", "M")], [("a2", "M")])
    observed = cluster_rr(cluster, onom_b_assumptions, onom_b).product_exact
    assert observed == Fraction(1, 10)
    tail = exact_tail([["M"], ["M"]], onom_b_assumptions, onom_b, observed)
    assert tail == Fraction(19, 100)
    est = estimate_tail_area(cluster, onom_b_assumptions, onom_b, n_sims=200_000, seed=13)
    assert abs(est.p_hat - float(tail)) <= 3 * est.mc_se


def test_all_other_cluster_p_one(onom_a):
    aset = AssumptionSet(candidates=(MM, YOSEH), mc_sims=1000)
    cluster = _cluster([("elazar", "M")], [("matya", "M")])
    est = estimate_tail_area(cluster, aset, onom_a, n_sims=5000, seed=1)
    assert est.observed == 1.0
    assert est.p_hat == 1.0
    assert est.n_hits == est.n_sims


def test_determinism_bit_identical(onom_b, onom_b_assumptions, onom_b_cluster):
    kw = dict(n_sims=20_000, seed=21)
    a = estimate_tail_area(onom_b_cluster, onom_b_assumptions, onom_b, **kw)
    b = estimate_tail_area(onom_b_cluster, onom_b_assumptions, onom_b, **kw)
    c = estimate_tail_area(onom_b_cluster, onom_b_assumptions, onom_b, threads=2, **kw)
    assert a == b == c


def test_monotone_coupling_shared_stream(onom_b, onom_b_assumptions):
    observed = [
        _cluster([("a1", "M")]),
        _cluster([("a2", "M")]),
        _cluster([("b1", "M")]),
    ]
    rrs, p_hats = [], []
    for cluster in observed:
        bd = cluster_rr(cluster, onom_b_assumptions, onom_b)
        est = estimate_tail_area(cluster, onom_b_assumptions, onom_b, n_sims=5000, seed=3)
        rrs.append(bd.product_exact)
        p_hats.append(est.p_hat)
    assert rrs == sorted(rrs)
    assert p_hats == sorted(p_hats)


def test_observed_disqualified_short_circuit(onom_a):
    rule = DisqualifierRule(("elazar", "M"), penalty=HARD)
    aset = AssumptionSet(candidates=(YOSEH,), disqualifiers=(rule,), mc_sims=1000)
    cluster = _cluster([("elazar", "M")])
    est = estimate_tail_area(cluster, aset, onom_a, n_sims=5000, seed=1)
    assert est.observed_disqualified
    assert est.p_hat == 1.0
    assert est.n_sims == 0
    assert est.observed == math.inf


def test_disqualifiers_apply_in_null(onom_b):
    # HARD rule on generic b: simulated b-draws are disqualified, never hits;
    # exact tail of the observed a1 stays P(a1) = 1/10 among the rest
    rule = DisqualifierRule(("b", "M"), penalty=HARD)
    x = Candidate("x", "x", SlotSpec("a", "M", {"a1": 1}))
    aset = AssumptionSet(candidates=(x,), disqualifiers=(rule,), mc_sims=1000)
    cluster = _cluster([("a1", "M")])
    est = estimate_tail_area(cluster, aset, onom_b, n_sims=50_000, seed=5)
    assert est.n_simulated_disqualified > 0
    assert abs(est.n_simulated_disqualified / est.n_sims - 0.6) < 0.02
    assert abs(est.p_hat - 0.1) <= 3 * est.mc_se


def test_finite_penalty_in_null(onom_b):
    # penalty 2 on generic b: simulated RR can exceed 1
    rule = DisqualifierRule(("b", "M"), penalty=Fraction(2))
    x = Candidate("x", "x", SlotSpec("a", "M", {"a1": 1}))
    aset = AssumptionSet(candidates=(x,), disqualifiers=(rule,), mc_sims=1000)
    cluster = _cluster([("a2", "M")])
    est = estimate_tail_area(cluster, aset, onom_b, n_sims=20_000, seed=5)
    tail = exact_tail([["M"]], aset, onom_b, Fraction(4, 10))
    assert tail == Fraction(4, 10)
    assert abs(est.p_hat - float(tail)) <= 3 * est.mc_se
    assert any(b >= 1 for b, _ in est.histogram)  # bins at log10(2) > 0


def test_lumped_tail(onom_b, onom_b_assumptions):
    cluster = _cluster([("a1", "M")])
    est = estimate_tail_area(
        cluster, onom_b_assumptions, onom_b, statistic="lumped", n_sims=50_000, seed=9
    )
    assert est.observed_exact == 1
    tail = exact_tail([["M"]], onom_b_assumptions, onom_b, 1, statistic="lumped")
    assert tail == Fraction(4, 10)
    assert abs(est.p_hat - float(tail)) <= 3 * est.mc_se


def test_gender_unconditioned_sampling(onom_a):
    aset = AssumptionSet(candidates=(MM,), condition_on_gender=False, mc_sims=1000)
    cluster = _cluster([("mariamenou-mara", "F")])
    est = estimate_tail_area(cluster, aset, onom_a, n_sims=100_000, seed=4)
    # personal slot now draws across both strata: P(hit) = 1/(94+305)
    p = 1 / 399
    assert abs(est.p_hat - p) <= 3 * est.mc_se + 1e-9


def test_seed_record_and_histogram_mass(onom_b, onom_b_assumptions, onom_b_cluster):
    est = estimate_tail_area(onom_b_cluster, onom_b_assumptions, onom_b, n_sims=9999, seed=123)
    assert est.seed == 123
    assert sum(c for _, c in est.histogram) + est.n_simulated_disqualified == est.n_sims
    assert est.p_hat == (est.n_hits + 1) / (est.n_sims + 1)
    assert est.mc_se == pytest.approx(
        math.sqrt(est.p_hat * (1 - est.p_hat) / est.n_sims)
    )


def test_tomb_correction():
    assert tomb_correction(0.2, 1) == (0.2, pytest.approx(0.2))
    bonf, exact = tomb_correction(0.001, 1000)
    assert bonf == 1.0
    assert exact == pytest.approx(1 - 0.999 ** 1000)
    assert tomb_correction(0.5, 3) == (1.0, pytest.approx(0.875))
    with pytest.raises(ValueError):
        tomb_correction(0.5, 0)


def test_empty_stratum_rejected():
    onom = load_onomasticon([("a", "M", "a1", "A", 1)])
    config = ClusterConfiguration((("F",),))
    with pytest.raises(Exception, match="empty F stratum"):
        sample_cluster(config, onom, np.random.default_rng(0))


def test_compiled_matches_reference_on_fixture(onom_a, talpiyot_assumptions, talpiyot_cluster):
    # the fast simulator and the reference engine agree exactly, draw by draw
    from surprise_rr.nulldist import _cluster_from_cells, _compile, _draw_cells, _eval_row_rr

    config = extract_configuration(talpiyot_cluster)
    tables = _compile(config, talpiyot_assumptions, onom_a)
    rng = np.random.default_rng(2024)
    cells = _draw_cells(tables, rng, 300)
    for row in cells.tolist():
        num, den, disq = _eval_row_rr(tables, row)
        cluster = _cluster_from_cells(tables, row, "sim")
        bd = cluster_rr(cluster, talpiyot_assumptions, onom_a)
        assert not disq and not bd.disqualified
        assert Fraction(num, den) == bd.product_exact
