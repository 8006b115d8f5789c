#!/usr/bin/env python3
"""
Propagation throughput on synthetic corpora.

Defaults match a full-size run: 235000 DS sentences, 2050 labeled crowd
sentences and 300-dimensional vectors. Every thread count writes its own
output and the script checks they are byte-identical.

Usage:
    python scripts/benchmark_propagation.py
    python scripts/benchmark_propagation.py --ds 20000 --threads 1 4 8
    python scripts/benchmark_propagation.py --search exhaustive --ds 2000 --crowd 200
"""

import argparse
import hashlib
import os
import sys
import tempfile
import time

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from modules.embeddings import EmbeddingTable
from modules.interfaces import CorpusSentence
from modules.propagation import PropagationConfig, PropagationReport, propagate_corpus, write_results
from modules.relation_inventory import load_inventory


def synthetic_corpora(n_ds: int, n_crowd: int, dim: int, vocab: int, seed: int):
    rng = np.random.default_rng(seed)
    words = tuple(f"w{i}" for i in range(vocab))
    table = EmbeddingTable(dimension=dim, tokens=words, vectors=rng.normal(size=(vocab, dim)).astype(np.float32))

    def sentences(prefix, count, scored):
        out = []
        for i in range(count):
            length = int(rng.integers(6, 30))
            tokens = tuple(words[j] for j in rng.integers(0, vocab, size=length))
            ds = tuple(int(v) for v in rng.random(16) < 0.1)
            scores = tuple(float(v) for v in rng.random(16)) if scored else None
            e1 = int(rng.integers(0, length // 2))
            e2 = int(rng.integers(length // 2 + 1, length))
            out.append(CorpusSentence(f"{prefix}{i:07d}", tokens, (e1, e1), (e2, e2), ds, scores))
        return out

    return table, sentences("crowd", n_crowd, True), sentences("ds", n_ds, False)


def main():
    parser = argparse.ArgumentParser(description="Benchmark DS* propagation")
    parser.add_argument("--ds", type=int, default=235_000, help="DS sentences")
    parser.add_argument("--crowd", type=int, default=2_050, help="Labeled crowd sentences")
    parser.add_argument("--dim", type=int, default=300, help="Vector dimension")
    parser.add_argument("--vocab", type=int, default=50_000, help="Synthetic vocabulary size")
    parser.add_argument("--threads", type=int, nargs="+", default=[1, 8], help="Thread counts to time")
    parser.add_argument("--search", choices=("blocked", "exhaustive"), default="blocked")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"Building corpora: {args.ds} DS x {args.crowd} crowd, dim={args.dim}")
    start = time.perf_counter()
    table, crowd, ds = synthetic_corpora(args.ds, args.crowd, args.dim, args.vocab, args.seed)
    print(f"  built in {time.perf_counter() - start:.1f}s")

    inventory = load_inventory()
    digests = {}
    with tempfile.TemporaryDirectory() as tmp:
        for threads in args.threads:
            path = os.path.join(tmp, f"ds_star_{threads}.jsonl")
            settings = PropagationConfig(threads=threads, search=args.search)
            report = PropagationReport()
            start = time.perf_counter()
            write_results(propagate_corpus(ds, crowd, table, inventory, settings=settings, report=report),
                          path, inventory)
            elapsed = time.perf_counter() - start
            with open(path, "rb") as f:
                digests[threads] = hashlib.sha256(f.read()).hexdigest()
            print(
                f"threads={threads:>3}  {elapsed:8.2f}s  {report.total / elapsed:10.0f} sent/s  "
                f"propagated={report.propagated}  mean_sim={report.mean_similarity or 0.0:.4f}"
            )

    identical = len(set(digests.values())) == 1
    print("outputs identical across thread counts" if identical else "OUTPUTS DIFFER across thread counts")
    return 0 if identical else 1


if __name__ == "__main__":
    sys.exit(main())
