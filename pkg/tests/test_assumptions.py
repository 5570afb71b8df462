from fractions import Fraction

import pytest

from surprise_rr import (
    HARD,
    AssumptionError,
    AssumptionSet,
    Candidate,
    DisqualifierRule,
    SlotSpec,
    lock_hash,
    rating_tail_table,
    tiers_to_ratings,
    validate,
)
from surprise_rr.assumptions import parse_assumptions


def _mk_assumptions(**kwargs):
    cand = Candidate(
        "mm", "rarest-tier mariam", SlotSpec("mariam", "F", {"mariamenou-mara": 2, "mariame": 1})
    )
    defaults = dict(candidates=(cand,), tombs_count=1000, mc_sims=100_000)
    defaults.update(kwargs)
    return AssumptionSet(**defaults)


def test_tiers_to_ratings():
    assert tiers_to_ratings([["mariamenou-mara"], ["mariame"]]) == {
        "mariamenou-mara": 2,
        "mariame": 1,
    }
    assert tiers_to_ratings([]) == {}
    assert tiers_to_ratings([["a"], ["b"], ["c"]]) == {"a": 3, "b": 2, "c": 1}


def test_tiers_must_be_disjoint():
    with pytest.raises(AssumptionError, match="more than one tier"):
        tiers_to_ratings([["a"], ["a", "b"]])


def test_candidate_requires_patronym_before_grandpatronym():
    with pytest.raises(AssumptionError, match="grandpatronym requires"):
        Candidate(
            "x", "x", SlotSpec("a", "M"), patronym=None, grandpatronym=SlotSpec("b", "M")
        )


def test_duplicate_candidate_ids_rejected():
    cand = Candidate("mm", "x", SlotSpec("mariam", "F"))
    with pytest.raises(AssumptionError, match="duplicate candidate ids"):
        AssumptionSet(candidates=(cand, cand))


def test_finite_penalty_must_exceed_one():
    with pytest.raises(AssumptionError, match="> 1"):
        DisqualifierRule(("a", "M"), penalty=Fraction(1))
    rule = DisqualifierRule(("a", "M"), penalty=Fraction(5, 2))
    assert not rule.hard
    assert DisqualifierRule(("a", "M"), penalty=HARD).hard


def test_validate_clean_fixture(talpiyot_assumptions, onom_a):
    report = validate(talpiyot_assumptions, onom_a)
    assert report.ok
    assert report.findings == ()
    assert report.onomasticon is onom_a


def test_validate_injects_unknown_rendition(onom_a):
    aset = _mk_assumptions(
        candidates=(
            Candidate("mm", "mm", SlotSpec("mariam", "F", {"mariamne-x": 3})),
        )
    )
    report = validate(aset, onom_a)
    assert report.ok
    assert [f.code for f in report.findings] == ["injected-rendition"]
    assert report.onomasticon.entry("mariam", "F").rendition("mariamne-x").count == 1
    assert report.onomasticon.stratum_total("F") == 95


def test_validate_missing_rendition_fatal_without_floor(onom_a):
    aset = _mk_assumptions(
        candidates=(Candidate("mm", "mm", SlotSpec("mariam", "F", {"mariamne-x": 3})),),
        unknown_floor=False,
    )
    report = validate(aset, onom_a)
    assert not report.ok
    assert report.fatal[0].code == "missing-rendition"


def test_validate_unknown_generic_fatal(onom_a):
    aset = _mk_assumptions(candidates=(Candidate("x", "x", SlotSpec("zzz", "M")),))
    report = validate(aset, onom_a)
    assert not report.ok
    assert report.fatal[0].code == "unknown-generic"


def test_validate_disqualifier_unknown_generic_fatal(onom_a):
    aset = _mk_assumptions(
        disqualifiers=(DisqualifierRule(("zzz", "M"), penalty=HARD),)
    )
    report = validate(aset, onom_a)
    assert not report.ok
    assert any(f.code == "disqualifier-unknown-generic" for f in report.fatal)


def test_validate_empty_stratum_fatal():
    from surprise_rr import load_onomasticon

    onom = load_onomasticon([("a", "M", "a1", "A", 1)])
    aset = _mk_assumptions()
    report = validate(aset, onom)
    assert not report.ok
    assert any(f.code == "empty-stratum" for f in report.fatal)


def test_rating_tail_table_anchor(onom_a):
    spec = SlotSpec("mariam", "F", {"mariamenou-mara": 2, "mariame": 1})
    table = rating_tail_table(spec, onom_a)
    assert table["mariamenou-mara"] == Fraction(1, 44)
    assert table["mariame"] == Fraction(11, 44)
    assert table["marya"] == 1
    assert table["maria"] == 1


def test_rating_tail_table_rescaling_invariant(onom_a):
    a = rating_tail_table(SlotSpec("mariam", "F", {"mariamenou-mara": 2, "mariame": 1}), onom_a)
    b = rating_tail_table(SlotSpec("mariam", "F", {"mariamenou-mara": 20, "mariame": 10}), onom_a)
    assert a == b


def test_rating_tail_table_weakly_decreasing(onom_a):
    spec = SlotSpec("mariam", "F", {"mariamenou-mara": 2, "mariame": 1})
    table = rating_tail_table(spec, onom_a)
    by_rating = sorted(table, key=lambda rid: spec.rating(rid))
    tails = [table[rid] for rid in by_rating]
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    assert tails[0] == 1


def test_lock_hash_field_order_invariant(talpiyot_assumptions):
    doc_a = {
        "candidates": [
            {"candidate_id": "x", "label": "x", "personal": {"generic_id": "a", "gender": "M"}}
        ],
        "tombs_count": 5,
        "mc_sims": 2000,
    }
    doc_b = {
        "mc_sims": 2000,
        "tombs_count": 5,
        "candidates": [
            {"personal": {"gender": "M", "generic_id": "a"}, "label": "x", "candidate_id": "x"}
        ],
    }
    assert lock_hash(parse_assumptions(doc_a)) == lock_hash(parse_assumptions(doc_b))


def test_lock_hash_sensitive_to_semantics():
    base = _mk_assumptions()
    assert lock_hash(base) != lock_hash(_mk_assumptions(tombs_count=1100))
    assert lock_hash(base) != lock_hash(_mk_assumptions(mc_sims=50_000))
    changed = _mk_assumptions(
        candidates=(
            Candidate(
                "mm", "rarest-tier mariam", SlotSpec("mariam", "F", {"mariamenou-mara": 3, "mariame": 1})
            ),
        )
    )
    assert lock_hash(base) != lock_hash(changed)
    assert lock_hash(base) != lock_hash(_mk_assumptions(distinct_individuals=False))


def test_lock_hash_candidate_order_invariant():
    c1 = Candidate("a", "a", SlotSpec("mariam", "F"))
    c2 = Candidate("b", "b", SlotSpec("shalom", "F"))
    assert lock_hash(_mk_assumptions(candidates=(c1, c2))) == lock_hash(
        _mk_assumptions(candidates=(c2, c1))
    )


def test_parse_assumptions_rejects_unknown_keys():
    with pytest.raises(AssumptionError, match="unknown top-level"):
        parse_assumptions({"candidates": [], "bogus": 1})
    with pytest.raises(AssumptionError, match="unknown flags"):
        parse_assumptions({"flags": {"bogus": True}})


def test_mc_sims_floor_enforced():
    with pytest.raises(AssumptionError, match="mc_sims"):
        _mk_assumptions(mc_sims=10)
    with pytest.raises(AssumptionError, match="tombs_count"):
        _mk_assumptions(tombs_count=0)
