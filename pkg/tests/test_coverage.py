"""
Tests for embedding vocabulary coverage.
"""

from modules.corpus import corpus_vocabulary, read_corpus
from modules.coverage import embedding_coverage
from modules.embeddings import load_embeddings


def test_toy_coverage(inventory, toy_dir):
    table = load_embeddings(str(toy_dir / "vectors.txt"), format="text")
    corpora = {
        "ds": read_corpus(str(toy_dir / "ds.jsonl"), inventory),
        "crowd": read_corpus(str(toy_dir / "crowd.jsonl"), inventory),
    }
    report = embedding_coverage(table, corpora, top=3)

    ds = report.corpora["ds"]
    assert ds.sentences == 5
    assert ds.tokens == 18
    assert ds.exact_hits == 3
    assert ds.lowercase_hits == 1
    assert ds.oov == 14
    assert ds.empty_between_span == 2
    assert ds.empty_vector == 1

    crowd = report.corpora["crowd"]
    assert crowd.empty_vector == 1
    assert crowd.empty_between_span == 1

    totals = report.totals
    assert totals.tokens == ds.tokens + crowd.tokens
    assert report.top_oov[:3] == [("in", 3), ("was", 3), ("Acme", 2)]
    assert report.to_dict()["dimension"] == 3


def test_filtered_table_reports_file_vocabulary(inventory, toy_dir):
    corpora = {"ds": read_corpus(str(toy_dir / "ds.jsonl"), inventory)}
    table = load_embeddings(str(toy_dir / "vectors.txt"), format="text", vocabulary=corpus_vocabulary(corpora.values()))
    report = embedding_coverage(table, corpora)
    assert report.vocabulary == 4
    assert report.retained == 3
    assert report.corpora["ds"].exact_hits == 3
    assert report.corpora["ds"].lowercase_hits == 1
