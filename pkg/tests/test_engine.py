from fractions import Fraction

import pytest

from surprise_rr import (
    HARD,
    AmbiguousRenditionError,
    AssumptionSet,
    Candidate,
    Cluster,
    ClusterError,
    DisqualifierRule,
    Inscription,
    Slot,
    SlotSpec,
    UnknownRenditionError,
    cluster_rr,
    find_generational_chains,
    inscription_rr,
    load_onomasticon,
    lumped_statistic,
    slot_rr,
)

from oracle import oracle_cluster_rr, oracle_lumped


def _cluster(*chains, cluster_id="test"):
    inscriptions = []
    for chain in chains:
        slots = tuple(Slot(r, g) for r, g in chain)
        inscriptions.append(Inscription(slots))
    return Cluster(cluster_id, tuple(inscriptions))


def _aset(*cands, **kwargs):
    kwargs.setdefault("mc_sims", 1000)
    return AssumptionSet(candidates=tuple(cands), **kwargs)


MM = Candidate("mm", "mm", SlotSpec("mariam", "F", {"mariamenou-mara": 2, "mariame": 1}))
YOSEH = Candidate("yoseh", "yoseh", SlotSpec("yehosef", "M", {"yoseh": 1}))
PAIR = Candidate(
    "ybj", "pair", SlotSpec("yeshua", "M"), patronym=SlotSpec("yehosef", "M")
)


def test_inscription_invariants():
    with pytest.raises(ClusterError, match="chain length"):
        Inscription(())
    with pytest.raises(ClusterError, match="gender M"):
        Inscription((Slot("a", "M"), Slot("b", "F")))
    with pytest.raises(ClusterError, match="at least one"):
        Cluster("x", ())


def test_slot_rr_anchor(onom_a):
    assert slot_rr(MM.personal, ("mariamenou-mara", "F"), onom_a) == Fraction(1, 94)
    assert slot_rr(YOSEH.personal, ("yoseh", "M"), onom_a) == Fraction(10, 305)
    assert slot_rr(MM.personal, ("shalom", "F"), onom_a) is None


def test_slot_rr_unknown_rendition_errors(onom_a):
    with pytest.raises(UnknownRenditionError):
        slot_rr(MM.personal, ("nope", "F"), onom_a)


def test_slot_rr_ambiguous_rendition_errors():
    onom = load_onomasticon(
        [("a", "M", "shared", "S", 1), ("b", "M", "shared", "S", 2)]
    )
    spec = SlotSpec("a", "M")
    with pytest.raises(AmbiguousRenditionError):
        slot_rr(spec, ("shared", "M"), onom)


def test_inscription_rr_pair(onom_a):
    insc = Inscription((Slot("yeshua", "M"), Slot("yehosef", "M")))
    assert inscription_rr(PAIR, insc, onom_a) == Fraction(40, 305) * Fraction(90, 305)
    # missing required patronym slot
    assert inscription_rr(PAIR, Inscription((Slot("yeshua", "M"),)), onom_a) is None
    # single-slot candidate on a two-slot inscription: personal factor only
    single = Candidate("y", "y", SlotSpec("yeshua", "M"))
    assert inscription_rr(single, insc, onom_a) == Fraction(40, 305)


def test_find_generational_chains(onom_a):
    cluster = _cluster(
        [("yehuda", "M"), ("yeshua", "M")],
        [("yeshua", "M"), ("yehosef", "M")],
    )
    assert find_generational_chains(cluster, onom_a) == {0}
    assert find_generational_chains(cluster, onom_a, enabled=False) == frozenset()
    alone = _cluster([("yehuda", "M"), ("yeshua", "M")])
    assert find_generational_chains(alone, onom_a) == frozenset()


def test_chain_neutralization_matches_generic_not_rendition(onom_a):
    # patronym yoseh and witness personal yehosef share the generic yehosef
    cluster = _cluster(
        [("yehuda", "M"), ("yoseh", "M")],
        [("yehosef", "M"), ("yeshua", "M")],
    )
    assert find_generational_chains(cluster, onom_a) == {0}


def test_cluster_rr_all_other(onom_a):
    cluster = _cluster([("elazar", "M")], [("matya", "M")])
    bd = cluster_rr(cluster, _aset(MM, YOSEH, PAIR), onom_a)
    assert bd.factors == (Fraction(1), Fraction(1))
    assert bd.product_exact == 1
    assert bd.assignment == (None, None)
    assert not bd.disqualified


def test_cluster_rr_two_candidates(onom_a):
    cluster = _cluster([("mariamenou-mara", "F")], [("yoseh", "M")])
    bd = cluster_rr(cluster, _aset(MM, YOSEH), onom_a)
    assert bd.product_exact == Fraction(1, 94) * Fraction(10, 305)
    assert bd.assignment == ("mm", "yoseh")


def test_cluster_rr_injectivity(onom_a):
    cluster = _cluster([("yoseh", "M")], [("yoseh", "M")])
    bd = cluster_rr(cluster, _aset(YOSEH), onom_a)
    assert sorted(bd.factors) == [Fraction(10, 305), Fraction(1)]
    assert bd.product_exact == Fraction(10, 305)
    # without injectivity both inscriptions take the candidate's factor
    bd2 = cluster_rr(cluster, _aset(YOSEH, distinct_individuals=False), onom_a)
    assert bd2.product_exact == Fraction(10, 305) ** 2


def test_cluster_rr_neutralized_factor_exactly_one(onom_a, talpiyot_assumptions, talpiyot_cluster):
    bd = cluster_rr(talpiyot_cluster, talpiyot_assumptions, onom_a)
    assert bd.neutralized == {5}
    assert bd.factors[5] == Fraction(1)
    assert bd.factors[3] == Fraction(1)  # matya is Other
    assert bd.product_exact == (
        Fraction(40, 305) * Fraction(90, 305) * Fraction(1, 94)
        * Fraction(10, 305) * Fraction(30, 94)
    )


def test_hard_disqualifier(onom_a):
    rule = DisqualifierRule(("yehuda", "M"), patronym=("yeshua", "M"), penalty=HARD)
    cluster = _cluster([("yehuda", "M"), ("yeshua", "M")], [("yoseh", "M")])
    bd = cluster_rr(cluster, _aset(YOSEH, disqualifiers=(rule,)), onom_a)
    assert bd.disqualified
    assert bd.product == float("inf")


def test_finite_penalty_multiplies(onom_a):
    rule = DisqualifierRule(("elazar", "M"), penalty=Fraction(3, 2))
    cluster = _cluster([("elazar", "M")], [("yoseh", "M")])
    bd = cluster_rr(cluster, _aset(YOSEH, disqualifiers=(rule,)), onom_a)
    assert bd.factors[0] == Fraction(3, 2)
    assert bd.product_exact == Fraction(3, 2) * Fraction(10, 305)
    assert not bd.disqualified


def test_finite_penalty_skips_neutralized_hard_does_not(onom_a):
    cluster = _cluster(
        [("yehuda", "M"), ("yeshua", "M")],
        [("yeshua", "M"), ("yehosef", "M")],
    )
    soft = DisqualifierRule(("yehuda", "M"), patronym=("yeshua", "M"), penalty=Fraction(2))
    bd = cluster_rr(cluster, _aset(disqualifiers=(soft,)), onom_a)
    assert bd.neutralized == {0}
    assert bd.factors[0] == Fraction(1)
    hard = DisqualifierRule(("yehuda", "M"), patronym=("yeshua", "M"), penalty=HARD)
    bd = cluster_rr(cluster, _aset(disqualifiers=(hard,)), onom_a)
    assert bd.disqualified


def test_metadata_inert(onom_a):
    plain = _cluster([("yoseh", "M")])
    tagged = Cluster(
        "test",
        (
            Inscription(
                (Slot("yoseh", "M"),), script="greek", transcription="anything at all"
            ),
        ),
    )
    aset = _aset(MM, YOSEH, PAIR)
    a = cluster_rr(plain, aset, onom_a)
    b = cluster_rr(tagged, aset, onom_a)
    assert (a.factors, a.assignment, a.product_exact) == (b.factors, b.assignment, b.product_exact)
    assert lumped_statistic(plain, aset, onom_a) == lumped_statistic(tagged, aset, onom_a)


def test_lumped_statistic(onom_a):
    # any rendition of the generic matches
    assert lumped_statistic(_cluster([("marya", "F")]), _aset(MM), onom_a) == 1
    assert lumped_statistic(_cluster([("marya", "F")]), _aset(), onom_a) == 0
    # injectivity: two mariam-generic candidates, one inscription
    other = Candidate("mm2", "mm2", SlotSpec("mariam", "F"))
    assert lumped_statistic(_cluster([("marya", "F")]), _aset(MM, other), onom_a) == 1
    assert (
        lumped_statistic(
            _cluster([("marya", "F")], [("mariame", "F")]), _aset(MM, other), onom_a
        )
        == 2
    )


def test_lumped_ignores_ratings_and_renditions(onom_a, talpiyot_assumptions):
    a = _cluster([("marya", "F")], [("yeshua", "M"), ("yehosef", "M")])
    b = _cluster([("mariamenou-mara", "F")], [("yeshua", "M"), ("yoseh", "M")])
    assert lumped_statistic(a, talpiyot_assumptions, onom_a) == lumped_statistic(
        b, talpiyot_assumptions, onom_a
    )


def test_against_oracle_on_fixture(onom_a, talpiyot_assumptions, talpiyot_cluster):
    bd = cluster_rr(talpiyot_cluster, talpiyot_assumptions, onom_a)
    value, disq = oracle_cluster_rr(talpiyot_cluster, talpiyot_assumptions, onom_a)
    assert bd.product_exact == value
    assert bd.disqualified == disq
    assert lumped_statistic(talpiyot_cluster, talpiyot_assumptions, onom_a) == oracle_lumped(
        talpiyot_cluster, talpiyot_assumptions, onom_a
    )


def test_permutation_invariance_fixture(onom_a, talpiyot_assumptions, talpiyot_cluster):
    reordered = Cluster("x", tuple(reversed(talpiyot_cluster.inscriptions)))
    a = cluster_rr(talpiyot_cluster, talpiyot_assumptions, onom_a)
    b = cluster_rr(reordered, talpiyot_assumptions, onom_a)
    assert a.product_exact == b.product_exact
    assert a.disqualified == b.disqualified
    assert sorted(a.factors) == sorted(b.factors)
