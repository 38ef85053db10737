#!/usr/bin/env python3
"""Time the pure-Python matching kernel against the compiled one.

Runs the same extraction workloads through every available backend, checks
that the outputs are identical span for span (including scores), and prints
a timing table. With only one backend built, it still times that one.

    python3 benchmarks/bench_matcher.py --notes 300 --terms 600 --repeats 3
"""

import argparse
import statistics
import time
from random import Random

from plsum import ConceptMatcher, MatcherConfig, Metric, load_lexicon, load_toy_lexicon
from plsum.matcher import available_backends
from plsum.synth import generate_synthetic_corpus

STEMS = (
    "acute chronic severe mild renal cardiac hepatic pulmonary febrile septic "
    "failure insufficiency syndrome disease disorder infection inflammation "
    "edema effusion ischemia stenosis embolism fibrosis hypertension anemia "
    "left right upper lower bilateral recurrent persistent refractory stable "
    "worsening respiratory vascular metabolic neuropathy gastritis"
).split()


def stress_lexicon(rng, n_terms):
    lines = []
    seen = set()
    while len(lines) < n_terms:
        term = " ".join(rng.choice(STEMS) for _ in range(rng.randint(1, 4)))
        if term in seen:
            continue
        seen.add(term)
        lines.append(f"C{1000000 + len(lines):07d}\t{term}\tT047\t0")
    return load_lexicon(lines)


def stress_texts(rng, n_texts, n_tokens):
    return [
        " ".join(rng.choice(STEMS) for _ in range(n_tokens)) for _ in range(n_texts)
    ]


def span_key(span):
    return (span.start, span.end, span.matched_term, span.score, tuple(sorted(span.cuis)))


def run_backend(backend, lexicon, config, texts, repeats):
    matcher = ConceptMatcher(lexicon, config, backend=backend)
    spans = [tuple(span_key(s) for s in matcher.extract(t)) for t in texts]
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        for text in texts:
            matcher.extract(text)
        times.append(time.perf_counter() - start)
    return spans, statistics.median(times)


def bench(name, lexicon, config, texts, backends, repeats):
    results = {}
    baseline = None
    for backend in backends:
        spans, seconds = run_backend(backend, lexicon, config, texts, repeats)
        if baseline is None:
            baseline = spans
        elif spans != baseline:
            raise SystemExit(f"{name}: backend {backend!r} disagrees with {backends[0]!r}")
        results[backend] = seconds
    n_spans = sum(len(s) for s in baseline)
    ref = results[backends[0]]
    for backend, seconds in results.items():
        print(
            f"{name:<10} {backend:<8} {seconds:8.3f}s "
            f"{ref / seconds:6.2f}x  ({len(texts)} texts, {n_spans} spans)"
        )
    return n_spans


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--notes", type=int, default=300, help="synthetic notes to extract from")
    ap.add_argument("--terms", type=int, default=600, help="stress lexicon size")
    ap.add_argument("--texts", type=int, default=120, help="stress texts")
    ap.add_argument("--tokens", type=int, default=180, help="tokens per stress text")
    ap.add_argument("--threshold", type=float, default=0.7)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = sorted(available_backends(), key=lambda b: b != "python")
    print(f"backends: {', '.join(backends)}  (speedup is relative to {backends[0]!r})")
    if len(backends) == 1:
        print("note: compiled extension not built, timing the fallback only")

    toy = load_toy_lexicon()
    notes = [r.text for r in generate_synthetic_corpus(args.seed, args.notes, toy)]
    config = MatcherConfig(threshold=args.threshold)
    bench("clinical", toy, config, notes, backends, args.repeats)

    rng = Random(args.seed)
    lexicon = stress_lexicon(rng, args.terms)
    texts = stress_texts(rng, args.texts, args.tokens)
    for metric in (Metric.JACCARD, Metric.COSINE):
        cfg = MatcherConfig(metric=metric, threshold=args.threshold)
        bench(metric.value, lexicon, cfg, texts, backends, args.repeats)
    print("parity: all backends returned identical spans")


if __name__ == "__main__":
    main()
