#!/usr/bin/env python3
"""
Regenerate the toy golden outputs under tests/fixtures/toy/.

The DS* file is produced with the exhaustive neighbor search so that it does
not depend on the blocked index it is used to check.

Usage:
    python scripts/generate_golden.py
    python scripts/generate_golden.py --check
"""

import argparse
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from modules.corpus import attach_scores, read_corpus
from modules.crowdtruth_metrics import load_quality_scores
from modules.embeddings import load_embeddings
from modules.propagation import PropagationConfig, propagate_corpus, write_results
from modules.relation_inventory import load_inventory
from modules.splits import combine_training_set

TOY_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "tests", "fixtures", "toy")


def build_outputs(toy_dir: str, out_dir: str) -> dict:
    inventory = load_inventory()
    table = load_embeddings(os.path.join(toy_dir, "vectors.txt"), format="text", show_progress=False)
    quality = load_quality_scores(os.path.join(toy_dir, "quality.json"), inventory)
    crowd = attach_scores(read_corpus(os.path.join(toy_dir, "crowd.jsonl"), inventory), quality.srs, inventory)
    ds = read_corpus(os.path.join(toy_dir, "ds.jsonl"), inventory)

    paths = {
        "expected_ds_star.jsonl": os.path.join(out_dir, "expected_ds_star.jsonl"),
        "expected_ds_plus_crowd.jsonl": os.path.join(out_dir, "expected_ds_plus_crowd.jsonl"),
    }
    settings = PropagationConfig(threads=1, search="exhaustive")
    write_results(propagate_corpus(ds, crowd, table, inventory, settings=settings),
                  paths["expected_ds_star.jsonl"], inventory)
    write_results(combine_training_set(ds, crowd), paths["expected_ds_plus_crowd.jsonl"], inventory)
    return paths


def main():
    parser = argparse.ArgumentParser(description="Regenerate toy golden outputs")
    parser.add_argument("--toy-dir", default=TOY_DIR)
    parser.add_argument("--check", action="store_true", help="Compare against the committed files, write nothing")
    args = parser.parse_args()

    if not args.check:
        for name, path in build_outputs(args.toy_dir, args.toy_dir).items():
            print(f"wrote {path}")
        return 0

    stale = []
    with tempfile.TemporaryDirectory() as tmp:
        for name, path in build_outputs(args.toy_dir, tmp).items():
            with open(path, "rb") as fresh, open(os.path.join(args.toy_dir, name), "rb") as committed:
                if fresh.read() != committed.read():
                    stale.append(name)
    for name in stale:
        print(f"stale: {name}")
    print("golden files up to date" if not stale else f"{len(stale)} golden file(s) differ")
    return 1 if stale else 0


if __name__ == "__main__":
    sys.exit(main())
