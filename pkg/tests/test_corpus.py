"""
Tests for corpus JSONL I/O.
"""

import json

import pytest

from modules.corpus import attach_scores, corpus_vocabulary, parse_sentence, read_corpus, write_corpus
from modules.crowdtruth_metrics import load_quality_scores
from modules.errors import ValidationError


def _record(**overrides):
    record = {"id": "s1", "tokens": ["A", "x", "B"], "term1": [0, 0], "term2": [2, 2], "ds_labels": ["origin"]}
    record.update(overrides)
    return record


class TestParseSentence:

    def test_basic(self, inventory):
        sentence = parse_sentence(_record(), inventory)
        assert sentence.between_tokens() == ("x",)
        assert sentence.ds_labels[inventory.index("origin")] == 1
        assert sum(sentence.ds_labels) == 1
        assert sentence.scores is None

    def test_reversed_terms(self, inventory):
        sentence = parse_sentence(_record(term1=[2, 2], term2=[0, 0]), inventory)
        assert sentence.between_tokens() == ("x",)

    def test_whitespace_token_string(self, inventory):
        assert parse_sentence(_record(tokens="A x B"), inventory).tokens == ("A", "x", "B")

    def test_overlapping_spans(self, inventory):
        with pytest.raises(ValidationError, match="overlap"):
            parse_sentence(_record(term1=[0, 1], term2=[1, 2]), inventory)

    def test_span_out_of_range(self, inventory):
        with pytest.raises(ValidationError, match="outside"):
            parse_sentence(_record(term2=[2, 3]), inventory)

    def test_unknown_ds_relation(self, inventory):
        with pytest.raises(ValidationError, match="unknown DS relation"):
            parse_sentence(_record(ds_labels=["none"]), inventory)

    def test_scores_fill_missing_with_zero(self, inventory):
        sentence = parse_sentence(_record(scores={"origin": 0.5, "none": 0.2}), inventory)
        assert len(sentence.scores) == 16
        assert sentence.scores[inventory.index("origin")] == 0.5
        assert sum(sentence.scores) == 0.5

    def test_score_out_of_range(self, inventory):
        with pytest.raises(ValidationError, match="outside"):
            parse_sentence(_record(scores={"origin": 1.5}), inventory)

    def test_require_ds_positive(self, inventory):
        with pytest.raises(ValidationError, match="no positive"):
            parse_sentence(_record(ds_labels=[]), inventory, require_ds_positive=True)


class TestReadCorpus:

    def test_toy_ds(self, inventory, toy_dir):
        corpus = read_corpus(str(toy_dir / "ds.jsonl"), inventory)
        assert [s.sentence_id for s in corpus] == ["d1", "d2", "d3", "d4", "d5"]

    def test_duplicate_ids(self, tmp_path, inventory):
        path = tmp_path / "c.jsonl"
        path.write_text(json.dumps(_record()) + "\n" + json.dumps(_record()) + "\n", encoding="utf-8")
        with pytest.raises(ValidationError) as excinfo:
            read_corpus(str(path), inventory)
        assert excinfo.value.line == 2

    def test_invalid_json_names_line(self, tmp_path, inventory):
        path = tmp_path / "c.jsonl"
        path.write_text(json.dumps(_record()) + "\n{broken\n", encoding="utf-8")
        with pytest.raises(ValidationError) as excinfo:
            read_corpus(str(path), inventory)
        assert excinfo.value.line == 2

    def test_write_keeps_records(self, tmp_path, inventory, toy_dir):
        corpus = read_corpus(str(toy_dir / "crowd.jsonl"), inventory)
        out = tmp_path / "copy.jsonl"
        assert write_corpus(corpus, str(out), inventory) == 4
        assert read_corpus(str(out), inventory) == corpus


class TestAttachScores:

    def test_attaches_named_srs(self, inventory, toy_dir):
        crowd = read_corpus(str(toy_dir / "crowd.jsonl"), inventory)
        quality = load_quality_scores(str(toy_dir / "quality.json"), inventory)
        scored = attach_scores(crowd, quality.srs, inventory)
        c4 = scored[3]
        assert len(c4.scores) == 16
        assert c4.scores[inventory.index("origin")] == 0.25

    def test_missing_srs(self, inventory, toy_dir):
        crowd = read_corpus(str(toy_dir / "crowd.jsonl"), inventory)
        with pytest.raises(ValidationError, match="missing srs"):
            attach_scores(crowd, {}, inventory, source="quality.json")


def test_vocabulary_includes_lowercase(inventory, toy_dir):
    ds = read_corpus(str(toy_dir / "ds.jsonl"), inventory)
    vocab = corpus_vocabulary([ds])
    assert "Lives" in vocab and "lives" in vocab
    assert "lives" not in corpus_vocabulary([ds], lowercase=False)
