import re
from dataclasses import replace
from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plsum import (
    MaskConfig,
    MaskPolicy,
    build_dapt_corpus,
    generate_synthetic_corpus,
    mask_concepts,
    mask_tokens,
    parse_progress_note,
    reconstruct,
)
from plsum.errors import OverlappingSpans, SentinelMismatch
from plsum.masking import MaskStats, dapt_text
from plsum.textnorm import tokenize_with_offsets

TOKEN_CFG = MaskConfig(policy=MaskPolicy.TOKEN, ratio=0.15)
CONCEPT_CFG = MaskConfig(policy=MaskPolicy.CONCEPT, ratio=0.2)


def _sentinel_indices(text):
    return [int(m.group(1)) for m in re.finditer(r"<extra_id_(\d+)>", text)]


def test_concept_mask_frozen_trace(extractor):
    text = "pt with sepsis and ards"
    ex = mask_concepts(text, extractor.extract(text), CONCEPT_CFG, seed=0)
    assert ex.input_text == "pt with <extra_id_0> and ards"
    assert ex.target_text == "<extra_id_0> sepsis <extra_id_1>"
    assert (ex.mask_count, ex.masked_token_count, ex.total_token_count) == (1, 1, 5)
    assert ex.policy == "concept"
    assert reconstruct(ex) == text


def test_token_mask_budget_and_span_count():
    text = " ".join(f"tok{i}" for i in range(100))
    ex = mask_tokens(text, TOKEN_CFG, seed=0)
    # floor(0.15 * 100) = 15 tokens in round(15 / 3) = 5 separated spans
    assert ex.masked_token_count == 15
    assert ex.mask_count == 5
    assert ex.total_token_count == 100
    assert reconstruct(ex) == text
    assert _sentinel_indices(ex.input_text) == list(range(5))
    assert _sentinel_indices(ex.target_text) == list(range(6))


def test_token_mask_budget_is_floor():
    text = "one two three four five six seven"  # 7 tokens -> floor(1.05) = 1
    ex = mask_tokens(text, TOKEN_CFG, seed=1)
    assert ex.masked_token_count == 1
    assert ex.mask_count == 1


def test_token_mask_below_one_token_is_unmasked():
    ex = mask_tokens("just a few words", TOKEN_CFG, seed=0)  # floor(0.6) = 0
    assert ex.input_text == "just a few words"
    assert ex.target_text == ""
    assert ex.mask_count == 0
    assert reconstruct(ex) == "just a few words"


def test_zero_ratio_masks_nothing():
    cfg = MaskConfig(policy=MaskPolicy.TOKEN, ratio=0.0)
    ex = mask_tokens("a b c d e f g h i j", cfg, seed=0)
    assert (ex.target_text, ex.mask_count) == ("", 0)


def test_token_mask_is_deterministic():
    text = " ".join(f"w{i}" for i in range(60))
    a = mask_tokens(text, TOKEN_CFG, seed=9)
    b = mask_tokens(text, TOKEN_CFG, seed=9)
    c = mask_tokens(text, TOKEN_CFG, seed=10)
    assert a == b
    assert a != c


def test_token_mask_spans_are_separated():
    """Between any two sentinels the input keeps at least one token."""
    text = " ".join(f"w{i}" for i in range(80))
    ex = mask_tokens(text, TOKEN_CFG, seed=4)
    pieces = re.split(r"<extra_id_\d+>", ex.input_text)
    for between in pieces[1:-1]:
        assert tokenize_with_offsets(between)


@settings(max_examples=80, deadline=None)
@given(
    n_tokens=st.integers(0, 120),
    ratio=st.sampled_from([0.0, 0.15, 0.3, 0.6]),
    mean_len=st.integers(1, 5),
    seed=st.integers(0, 2**32),
)
def test_token_mask_round_trip_property(n_tokens, ratio, mean_len, seed):
    text = " ".join(f"w{i}" for i in range(n_tokens))
    cfg = MaskConfig(policy=MaskPolicy.TOKEN, ratio=ratio, mean_span_len=mean_len)
    ex = mask_tokens(text, cfg, seed=seed)
    assert reconstruct(ex) == text
    if ex.mask_count:
        assert _sentinel_indices(ex.input_text) == list(range(ex.mask_count))
        assert _sentinel_indices(ex.target_text) == list(range(ex.mask_count + 1))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), ratio=st.sampled_from([0.1, 0.3, 0.9]))
def test_concept_mask_round_trip_property(seed, ratio, extractor):
    text = "worsening sepsis with new ards, chf and acute renal failure overnight"
    cfg = MaskConfig(policy=MaskPolicy.CONCEPT, ratio=ratio)
    ex = mask_concepts(text, extractor.extract(text), cfg, seed=seed)
    assert reconstruct(ex) == text


def test_concept_mask_masks_only_provided_spans(extractor):
    text = "worsening sepsis with new ards and chf today"
    spans = extractor.extract(text)
    surfaces = {text[s.start : s.end] for s in spans}
    cfg = MaskConfig(policy=MaskPolicy.CONCEPT, ratio=0.9)
    ex = mask_concepts(text, spans, cfg, seed=2)
    hidden = re.split(r"<extra_id_\d+>", ex.target_text)[1:-1]
    assert hidden
    for chunk in hidden:
        assert chunk.strip() in surfaces


def test_concept_mask_without_spans_is_unmasked():
    ex = mask_concepts("nothing to hide here", [], CONCEPT_CFG, seed=0)
    assert ex.mask_count == 0
    assert ex.input_text == "nothing to hide here"


def test_concept_mask_rejects_overlapping_spans():
    spans = [SimpleNamespace(start=0, end=5), SimpleNamespace(start=3, end=8)]
    with pytest.raises(OverlappingSpans):
        mask_concepts("abcdefghij", spans, CONCEPT_CFG, seed=0)


def test_touching_spans_merge_into_one_sentinel():
    spans = [SimpleNamespace(start=0, end=3), SimpleNamespace(start=3, end=7)]
    cfg = MaskConfig(policy=MaskPolicy.CONCEPT, ratio=0.9)
    ex = mask_concepts("one two three", spans, cfg, seed=0)
    assert ex.mask_count == 1
    assert ex.input_text == "<extra_id_0> three"
    assert reconstruct(ex) == "one two three"


def test_policy_mismatch_raises(extractor):
    with pytest.raises(ValueError):
        mask_tokens("a b c", CONCEPT_CFG, seed=0)
    with pytest.raises(ValueError):
        mask_concepts("a b c", [], TOKEN_CFG, seed=0)


def test_mask_config_validation():
    with pytest.raises(ValueError):
        MaskConfig(ratio=1.0)
    with pytest.raises(ValueError):
        MaskConfig(ratio=-0.1)
    with pytest.raises(ValueError):
        MaskConfig(mean_span_len=0)
    with pytest.raises(ValueError):
        MaskConfig(sentinel_prefix="")


def test_reconstruct_rejects_tampering():
    text = " ".join(f"w{i}" for i in range(40))
    ex = mask_tokens(text, TOKEN_CFG, seed=3)
    assert ex.mask_count >= 2

    with pytest.raises(SentinelMismatch):
        reconstruct(replace(ex, input_text=ex.input_text.replace("<extra_id_0>", "")))
    with pytest.raises(SentinelMismatch):
        reconstruct(replace(ex, target_text="w1 " + ex.target_text))
    with pytest.raises(SentinelMismatch):
        reconstruct(
            replace(ex, target_text=ex.target_text.replace("<extra_id_1>", "<extra_id_9>"))
        )


def _notes(n, seed=21, toy_lexicon=None):
    records = generate_synthetic_corpus(seed, n, toy_lexicon)
    return [parse_progress_note(r.text, note_id=r.note_id) for r in records]


def test_dapt_text_keeps_assessment_and_plan_only():
    raw = (
        "worsening chf overnight.\n"
        "Chief Complaint: dyspnea\n"
        "Objective: sats 91%\n"
        "#1 chf\n- lasix\n"
    )
    note = parse_progress_note(raw)
    text = dapt_text(note)
    assert "worsening chf overnight." in text
    assert "1 chf\n- lasix" in text
    assert "dyspnea" not in text
    assert "sats" not in text


def test_build_dapt_corpus_round_trips_and_counts(toy_lexicon, extractor):
    notes = _notes(120, toy_lexicon=toy_lexicon)
    for cfg in (
        MaskConfig(policy=MaskPolicy.TOKEN, ratio=0.15),
        MaskConfig(policy=MaskPolicy.CONCEPT, ratio=0.15),
    ):
        stats = MaskStats()
        examples = list(build_dapt_corpus(notes, extractor, cfg, stats))
        assert stats.emitted == len(examples) == len(notes)
        assert stats.masked_tokens == sum(e.masked_token_count for e in examples)
        assert stats.total_tokens == sum(e.total_token_count for e in examples)
        assert 0.12 <= stats.masked_tokens / stats.total_tokens <= 0.18
        for note, ex in zip(notes, examples):
            assert ex.source_id == note.note_id
            assert reconstruct(ex) == dapt_text(note)


def test_build_dapt_corpus_is_order_independent(toy_lexicon, extractor):
    notes = _notes(20, toy_lexicon=toy_lexicon)
    cfg = MaskConfig(policy=MaskPolicy.TOKEN, ratio=0.15, seed=2)
    forward = {e.source_id: e for e in build_dapt_corpus(notes, extractor, cfg)}
    backward = {e.source_id: e for e in build_dapt_corpus(reversed(notes), extractor, cfg)}
    assert forward == backward


def test_build_dapt_corpus_skips_and_survives_failures(toy_lexicon, extractor, monkeypatch):
    notes = _notes(6, toy_lexicon=toy_lexicon)
    empty = parse_progress_note("Objective: hr 80", assume_leading_assessment=False)
    # no assessment or plan content -> nothing to mask
    assert dapt_text(empty) == ""

    import plsum.masking as masking

    real = masking.mask_tokens

    def flaky(text, config, seed=None, *, source_id=""):
        if source_id == notes[2].note_id:
            raise RuntimeError("boom")
        return real(text, config, seed, source_id=source_id)

    monkeypatch.setattr(masking, "mask_tokens", flaky)
    stats = MaskStats()
    out = list(build_dapt_corpus([empty] + notes, extractor, TOKEN_CFG, stats))
    assert stats.skipped == 2  # one empty, one failed
    assert stats.emitted == len(out) == len(notes) - 1


def test_build_dapt_corpus_concept_requires_matcher():
    with pytest.raises(ValueError):
        list(build_dapt_corpus([], None, CONCEPT_CFG))
