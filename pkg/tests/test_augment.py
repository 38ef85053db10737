import math

import pytest

from plsum import (
    AugConfig,
    ConceptMatcher,
    InputMode,
    ReferenceSummary,
    ReplacementSlot,
    TaskExample,
    augment_example,
    enumerate_variants,
    load_lexicon,
    plan_slots,
    quality_report,
)
from plsum.augment import apply_replacements, invert_replacements
from plsum.errors import MissingVector, NoVariantsPossible
from plsum.matcher import MatchSpan


def _slot(start, surface, choices):
    span = MatchSpan(
        start=start,
        end=start + len(surface),
        surface=surface,
        cuis=frozenset({"C0000001"}),
        matched_term=surface,
        score=1.0,
    )
    return ReplacementSlot(span=span, cui="C0000001", choices=choices)


def _example(input_text, direct=("htn",), note_id="n1"):
    return TaskExample(
        note_id=note_id,
        input_text=input_text,
        input_mode=InputMode.ASSESSMENT_ONLY,
        reference=ReferenceSummary(direct=tuple(direct), indirect=()),
    )


def test_plan_slots_on_toy_lexicon(exact_matcher):
    slots = plan_slots("Pt with htn and heart attack.", exact_matcher)
    assert [s.span.surface for s in slots] == ["htn", "heart attack"]
    assert [s.cui for s in slots] == ["C0020538", "C0027051"]
    # original surface first, then remaining synonyms in sorted order
    assert slots[0].choices == ("htn", "high blood pressure", "hypertension")
    assert slots[1].choices == ("heart attack", "mi", "myocardial infarction")


def test_plan_slots_empty_text(exact_matcher):
    assert plan_slots("", exact_matcher) == []
    assert plan_slots("no concepts here", exact_matcher) == []


def test_replacement_slot_validation():
    with pytest.raises(ValueError):
        _slot(0, "htn", ("hypertension", "htn"))
    with pytest.raises(ValueError):
        _slot(0, "htn", ())


def test_enumerate_variants_3_by_4():
    slots = [_slot(0, "a", ("a", "b", "c")), _slot(5, "d", ("d", "e", "f", "g"))]
    tuples = enumerate_variants(slots, cap=1000, seed=0)
    assert len(tuples) == 11  # 3*4 minus the identity
    assert (0, 0) not in tuples
    assert tuples == sorted(tuples)  # lexicographic when exhaustive
    assert len(set(tuples)) == len(tuples)


def test_enumerate_variants_samples_at_cap():
    slots = [_slot(i * 4, "a", ("a", "b", "c", "d")) for i in range(5)]
    tuples = enumerate_variants(slots, cap=100, seed=3)
    assert len(tuples) == 100
    assert len(set(tuples)) == 100
    assert all(any(t) for t in tuples)
    assert tuples == enumerate_variants(slots, cap=100, seed=3)
    assert tuples != enumerate_variants(slots, cap=100, seed=4)


def test_enumerate_variants_boundary_between_modes():
    slots = [_slot(0, "a", ("a", "b")), _slot(3, "c", ("c", "d"))]
    assert len(enumerate_variants(slots, cap=3)) == 3  # exhaustive fits
    sampled = enumerate_variants(slots, cap=2, seed=1)
    assert len(sampled) == 2 and len(set(sampled)) == 2


def test_enumerate_variants_requires_an_alternative():
    with pytest.raises(NoVariantsPossible):
        enumerate_variants([_slot(0, "a", ("a",))])


def test_augment_example_full_enumeration(exact_matcher):
    pairs = augment_example(_example("pt with htn today"), exact_matcher)
    # one input slot and one summary slot, 3 choices each: 3*3 - 1 variants
    assert len(pairs) == 8
    assert [p.variant_index for p in pairs] == list(range(8))
    assert len({(p.input_text, p.summary_text) for p in pairs}) == 8
    assert ("pt with htn today", "htn") not in {
        (p.input_text, p.summary_text) for p in pairs
    }
    for p in pairs:
        assert p.origin_id == "n1"
        fields = {r.field for r in p.replacements}
        assert fields == {"input", "summary"}


def test_replacements_replay_and_invert(exact_matcher):
    ex = _example("htn and heart attack and copd", direct=("heart attack",))
    pairs = augment_example(ex, exact_matcher, AugConfig(cap=50))
    assert pairs
    for p in pairs:
        assert apply_replacements(ex.input_text, p.replacements, "input") == p.input_text
        assert apply_replacements(ex.reference.text, p.replacements, "summary") == p.summary_text
        assert invert_replacements(p.input_text, p.replacements, "input") == ex.input_text
        assert invert_replacements(p.summary_text, p.replacements, "summary") == ex.reference.text


def test_variants_preserve_concept_ids(exact_matcher):
    ex = _example("worsening chf with new arf")
    original = [min(s.cuis) for s in exact_matcher.extract(ex.input_text)]
    assert original == ["C0018801", "C0022660"]
    for p in augment_example(ex, exact_matcher):
        assert [min(s.cuis) for s in exact_matcher.extract(p.input_text)] == original


def test_augment_skips_examples_without_slots(exact_matcher, caplog):
    with caplog.at_level("INFO", logger="plsum.augment"):
        assert augment_example(_example("no concepts at all", direct=()), exact_matcher) == []
    assert "skipped" in caplog.text


def test_augment_drops_variants_that_merge_adjacent_concepts(caplog):
    # "acute coronary syndrome; coronary artery disease" re-extracts as ONE
    # span: the window ending at the duplicated "coronary" has the same token
    # set as the shorter term but a longer extent, so it wins resolution and
    # swallows its neighbour. Only the both-long-forms pick hits this.
    lexicon = load_lexicon(
        [
            "C0948089\tacs\tT047\t0",
            "C0948089\tacute coronary syndrome\tT047\t1",
            "C0010054\tcad\tT047\t0",
            "C0010054\tcoronary artery disease\tT047\t1",
        ]
    )
    matcher = ConceptMatcher.for_augmentation(lexicon)
    ex = _example("acs; cad", direct=())
    with caplog.at_level("INFO", logger="plsum.augment"):
        pairs = augment_example(ex, matcher)
    assert "dropped 1" in caplog.text
    assert [p.variant_index for p in pairs] == [0, 1]  # index 2 is the gap
    want = [("C0010054",), ("C0948089",)]
    for p in pairs:
        assert sorted(tuple(sorted(s.cuis)) for s in matcher.extract(p.input_text)) == want


def test_augment_is_deterministic(exact_matcher):
    ex = _example("htn, chf, copd, arf and dm today", direct=("chf",))
    cfg = AugConfig(cap=20, seed=5)
    assert augment_example(ex, exact_matcher, cfg) == augment_example(ex, exact_matcher, cfg)


def test_quality_report_statistics(exact_matcher):
    pairs = augment_example(_example("pt with htn today"), exact_matcher)
    report = quality_report(pairs, field="input")
    # input picks over the 8 variants: htn x2, "high blood pressure" x3, "hypertension" x3
    assert report.mean_jaccard_overlap == pytest.approx((2 * 1 + 3 * 3 / 7 + 3 * 3 / 5) / 8)
    assert report.length_diff_mean == pytest.approx(0.75)
    assert report.length_diff_std == pytest.approx(math.sqrt(0.9375))
    assert report.mean_embedding_cosine is None


def test_quality_report_with_vectors(exact_matcher):
    pairs = augment_example(_example("pt with htn today"), exact_matcher)
    vectors = {"n1": (1.0, 0.0)}
    vectors.update({f"n1#{p.variant_index}": (1.0, 1.0) for p in pairs})
    report = quality_report(pairs, vectors=vectors, field="input")
    assert report.mean_embedding_cosine == pytest.approx(1 / math.sqrt(2))

    del vectors["n1#3"]
    with pytest.raises(MissingVector):
        quality_report(pairs, vectors=vectors, field="input")


def test_quality_report_validation(exact_matcher):
    with pytest.raises(ValueError):
        quality_report([])
    pairs = augment_example(_example("pt with htn today"), exact_matcher)
    with pytest.raises(ValueError):
        quality_report(pairs, field="inputs")


def test_aug_config_validation():
    with pytest.raises(ValueError):
        AugConfig(cap=0)
    with pytest.raises(ValueError):
        AugConfig(threshold=0.0)
