"""Command-line pipeline: synth, parse, extract, augment, mask, baseline, evaluate.

Every run writes its artifacts plus a manifest JSON recording the resolved
configuration, input and output content digests, and row counts. Runs are
deterministic: identical seed, config, and inputs produce byte-identical
artifacts regardless of --workers.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .augment import AugConfig, augment_example, quality_report
from .baseline import summarize_note
from .corpus_io import (
    file_digest,
    read_examples,
    read_notes,
    read_predictions,
    read_vectors,
    write_examples,
    write_masked,
    write_notes,
    write_pairs,
    write_predictions,
    write_spans,
)
from .errors import MissingAssessment, NoSectionsFound, PlsumError
from .lexicon import load_lexicon, load_toy_lexicon
from .masking import MaskConfig, MaskPolicy, dapt_text, mask_concepts, mask_tokens
from .matcher import ConceptMatcher, MatcherConfig, Metric
from .metrics import SUBGROUPS, evaluate_corpus
from .notes import InputMode, build_reference_summary, build_task_example, parse_progress_note
from .seeding import derive_seed
from .synth import generate_synthetic_corpus

logger = logging.getLogger(__name__)


def _load_lexicon(path: str | None):
    return load_lexicon(path) if path else load_toy_lexicon()


def _ordered_map(fn, items, workers: int):
    """Map preserving input order; thread-parallel when workers > 1."""
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_manifest(args, out_path: str, inputs: list[str], outputs: list[str],
                    counts: dict) -> None:
    config = {
        k: v for k, v in vars(args).items() if k not in ("func", "verbose") and v is not None
    }
    manifest = {
        "command": args.command,
        "config": config,
        "inputs": {p: file_digest(p) for p in inputs},
        "outputs": {p: file_digest(p) for p in outputs},
        "counts": counts,
        "version": __version__,
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(
        json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def _parse_note_records(records, *, skip_errors: bool = True):
    """(parsed notes, skip count); parse failures are logged when skipped."""
    notes = []
    skipped = 0
    for rec in records:
        try:
            notes.append(parse_progress_note(rec.text, note_id=rec.note_id))
        except (NoSectionsFound, ValueError) as exc:
            if not skip_errors:
                raise
            logger.warning("skipping note %s: %s", rec.note_id, exc)
            skipped += 1
    return notes, skipped


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    records = generate_synthetic_corpus(
        args.seed,
        args.n_notes,
        lexicon,
        absent_indirect_fraction=args.absent_indirect_fraction,
    )
    n = write_notes(records, args.out)
    inputs = [args.lexicon] if args.lexicon else []
    _write_manifest(args, args.out, inputs, [args.out], {"notes": n})
    return 0


def cmd_parse(args) -> int:
    records = read_notes(args.input)
    examples = []
    skipped = 0
    for rec in records:
        try:
            note = parse_progress_note(rec.text, note_id=rec.note_id)
            reference = build_reference_summary(rec.to_annotations())
            examples.append(
                build_task_example(
                    note, reference, InputMode(args.mode), max_words=args.max_words
                )
            )
        except (NoSectionsFound, MissingAssessment, ValueError) as exc:
            logger.warning("skipping note %s: %s", rec.note_id, exc)
            skipped += 1
    n = write_examples(examples, args.out)
    _write_manifest(
        args, args.out, [args.input], [args.out], {"examples": n, "skipped": skipped}
    )
    return 0


def cmd_extract(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    config = MatcherConfig(
        metric=Metric(args.metric), threshold=args.threshold, max_window=args.max_window
    )
    matcher = ConceptMatcher(lexicon, config)
    records = read_notes(args.input)
    skipped = 0
    if args.section == "full":
        texts = [(rec.note_id, rec.text) for rec in records]
    else:
        notes, skipped = _parse_note_records(records)
        texts = [(note.note_id, dapt_text(note)) for note in notes]

    def extract_one(item):
        note_id, text = item
        return note_id, matcher.extract(text)

    rows = _ordered_map(extract_one, texts, args.workers)
    n = write_spans(rows, args.out)
    inputs = [args.input] + ([args.lexicon] if args.lexicon else [])
    _write_manifest(args, args.out, inputs, [args.out], {"notes": n, "skipped": skipped})
    return 0


def cmd_augment(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    matcher = ConceptMatcher.for_augmentation(lexicon, threshold=args.threshold)
    config = AugConfig(cap=args.cap, seed=args.seed, threshold=args.threshold)
    examples = read_examples(args.input)

    results = _ordered_map(
        lambda ex: augment_example(ex, matcher, config), examples, args.workers
    )
    pairs = [pair for batch in results for pair in batch]
    skipped = sum(1 for batch in results if not batch)
    n = write_pairs(pairs, args.out)

    outputs = [args.out]
    if args.report:
        vectors = read_vectors(args.vectors) if args.vectors else None
        report = {
            field: vars(quality_report(pairs, vectors, field=field))
            for field in ("input", "summary")
        }
        Path(args.report).write_text(
            json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        outputs.append(args.report)

    inputs = [args.input] + ([args.lexicon] if args.lexicon else [])
    if args.vectors:
        inputs.append(args.vectors)
    _write_manifest(
        args,
        args.out,
        inputs,
        outputs,
        {"examples": len(examples), "pairs": n, "skipped_examples": skipped},
    )
    return 0


def cmd_mask(args) -> int:
    policy = MaskPolicy(args.policy)
    config = MaskConfig(
        policy=policy, ratio=args.ratio, mean_span_len=args.span_len, seed=args.seed
    )
    matcher = None
    if policy is MaskPolicy.CONCEPT:
        matcher = ConceptMatcher.for_extraction(_load_lexicon(args.lexicon))
    records = read_notes(args.input)
    notes, skipped = _parse_note_records(records)
    maskable = []
    for note in notes:
        text = dapt_text(note)
        if text.strip():
            maskable.append((note.note_id, text))
        else:
            skipped += 1

    def mask_one(item):
        note_id, text = item
        seed = derive_seed(args.seed, note_id)
        if policy is MaskPolicy.CONCEPT:
            spans = matcher.extract(text)
            return mask_concepts(text, spans, config, seed, source_id=note_id)
        return mask_tokens(text, config, seed, source_id=note_id)

    masked = _ordered_map(mask_one, maskable, args.workers)
    n = write_masked(masked, args.out)
    total = sum(ex.total_token_count for ex in masked)
    covered = sum(ex.masked_token_count for ex in masked)
    inputs = [args.input] + ([args.lexicon] if args.lexicon else [])
    _write_manifest(
        args,
        args.out,
        inputs,
        [args.out],
        {
            "examples": n,
            "skipped": skipped,
            "masked_tokens": covered,
            "total_tokens": total,
        },
    )
    return 0


def cmd_baseline(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    config = MatcherConfig(threshold=args.threshold)
    matcher = ConceptMatcher(lexicon, config)
    semantic_types = (
        frozenset(t for t in args.semantic_types.split(",") if t)
        if args.semantic_types
        else None
    )
    records = read_notes(args.input)
    notes, skipped = _parse_note_records(records)

    def summarize(note):
        try:
            return note.note_id, summarize_note(
                note,
                matcher,
                use_preferred_terms=args.preferred_terms,
                semantic_types=semantic_types,
            )
        except MissingAssessment:
            return None

    results = _ordered_map(summarize, notes, args.workers)
    rows = [r for r in results if r is not None]
    skipped += sum(1 for r in results if r is None)
    n = write_predictions(rows, args.out)
    inputs = [args.input] + ([args.lexicon] if args.lexicon else [])
    _write_manifest(
        args, args.out, inputs, [args.out], {"predictions": n, "skipped": skipped}
    )
    return 0


def cmd_evaluate(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    matcher = ConceptMatcher(lexicon, MatcherConfig(threshold=args.threshold))
    examples = read_examples(args.examples)
    predictions = read_predictions(args.predictions)
    vectors = read_vectors(args.vectors) if args.vectors else None
    report = evaluate_corpus(examples, predictions, matcher, vectors)
    Path(args.out).write_text(
        json.dumps(report.to_json_dict(), sort_keys=True, ensure_ascii=False, indent=2)
        + "\n",
        encoding="utf-8",
    )
    outputs = [args.out]
    if args.csv:
        _write_report_csv(report, args.csv)
        outputs.append(args.csv)
    inputs = [args.examples, args.predictions] + (
        [args.lexicon] if args.lexicon else []
    )
    if args.vectors:
        inputs.append(args.vectors)
    _write_manifest(
        args, args.out, inputs, outputs, {"examples": len(examples)}
    )
    return 0


def _write_report_csv(report, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            [
                "subgroup",
                "n_examples",
                "rouge_l_p",
                "rouge_l_r",
                "rouge_l_f",
                "cui_p",
                "cui_r",
                "cui_f",
                "sent_cosine",
            ]
        )
        for name in SUBGROUPS:
            s = report.subgroups[name]
            writer.writerow(
                [
                    name,
                    s.n_examples,
                    f"{s.rouge_l.precision:.6f}",
                    f"{s.rouge_l.recall:.6f}",
                    f"{s.rouge_l.f1:.6f}",
                    f"{s.cui.precision:.6f}",
                    f"{s.cui.recall:.6f}",
                    f"{s.cui.f1:.6f}",
                    "" if s.sent_cosine is None else f"{s.sent_cosine:.6f}",
                ]
            )


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser: argparse.ArgumentParser, *, seed: bool = True) -> None:
    parser.add_argument("--lexicon", help="lexicon TSV path (default: bundled toy lexicon)")
    if seed:
        parser.add_argument("--seed", type=int, default=0, help="global random seed")
    parser.add_argument("--out", required=True, help="output path")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plsum",
        description="Problem-list summarization data and evaluation pipeline.",
    )
    parser.add_argument(
        "--config",
        help="JSON file of default argument values (command-line flags win)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic annotated note corpus")
    p.add_argument("--n-notes", type=int, required=True)
    p.add_argument("--absent-indirect-fraction", type=float, default=0.3)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("parse", help="notes JSONL -> task-example JSONL")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=[m.value for m in InputMode],
                   default=InputMode.ASSESSMENT_ONLY.value)
    p.add_argument("--max-words", type=int, default=512)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("extract", help="concept spans for each note")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--metric", choices=[m.value for m in Metric], default=Metric.JACCARD.value)
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--max-window", type=int, default=7)
    p.add_argument("--section", choices=["full", "assessment_plan"], default="full",
                   help="text to extract from")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("augment", help="synonym-replacement training pairs")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--cap", type=int, default=1000, help="max variants per example")
    p.add_argument("--threshold", type=float, default=1.0,
                   help="match threshold for slot discovery")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report", help="also write a quality-report JSON here")
    p.add_argument("--vectors", help="id<TAB>floats file for embedding cosine")
    _add_common(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("mask", help="span-corruption pretraining corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--policy", choices=[m.value for m in MaskPolicy], required=True)
    p.add_argument("--ratio", type=float, default=0.15)
    p.add_argument("--span-len", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("baseline", help="rule-based summaries from assessments")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--preferred-terms", action="store_true",
                   help="emit preferred terms instead of matched surfaces")
    p.add_argument("--semantic-types", help="comma-separated type codes to keep")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("evaluate", help="score predictions against references")
    p.add_argument("--examples", required=True, help="task-example JSONL")
    p.add_argument("--predictions", required=True, help="predictions JSONL")
    p.add_argument("--threshold", type=float, default=0.7,
                   help="matcher threshold used for cui scoring")
    p.add_argument("--vectors", help="id<TAB>floats file for sequence cosine")
    p.add_argument("--csv", help="also write the report as CSV here")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()

    # apply --config file values as defaults before the real parse
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if known.config:
        with open(known.config, "r", encoding="utf-8") as f:
            defaults = json.load(f)
        if not isinstance(defaults, dict):
            print("ERROR SchemaViolation: config file must hold a JSON object",
                  file=sys.stderr)
            return 2
        for sub_action in parser._subparsers._group_actions:
            for sub_parser in sub_action.choices.values():
                sub_parser.set_defaults(
                    **{k: v for k, v in defaults.items()
                       if any(a.dest == k for a in sub_parser._actions)}
                )

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except PlsumError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
