"""
Tests for DS* label propagation.
"""

import json

import numpy as np
import pytest

from modules.corpus import attach_scores, read_corpus
from modules.crowdtruth_metrics import load_quality_scores
from modules.embeddings import EmbeddingTable, load_embeddings
from modules.errors import ValidationError
from modules.interfaces import CorpusSentence
from modules.propagation import (
    LabelPropagator,
    PropagationConfig,
    PropagationReport,
    propagate_corpus,
    propagate_sentence,
    result_to_dict,
    write_results,
)
from tests.utils.fixture_loader import load_fixture, read_jsonl

BLEND_CASES = load_fixture("propagation_cases.json")["blend_cases"]


def _sentence(ds_labels, sentence_id="s"):
    return CorpusSentence(
        sentence_id=sentence_id,
        tokens=("a", "b", "c"),
        term1=(0, 0),
        term2=(2, 2),
        ds_labels=tuple(int(v) for v in ds_labels),
    )


@pytest.fixture(scope="module")
def toy(inventory, toy_dir):
    table = load_embeddings(str(toy_dir / "vectors.txt"), format="text")
    quality = load_quality_scores(str(toy_dir / "quality.json"), inventory)
    crowd = attach_scores(read_corpus(str(toy_dir / "crowd.jsonl"), inventory), quality.srs, inventory)
    ds = read_corpus(str(toy_dir / "ds.jsonl"), inventory)
    return table, crowd, ds


def _synthetic(n_ds, n_crowd, vocab=200, dim=20, seed=0):
    rng = np.random.default_rng(seed)
    words = tuple(f"w{i}" for i in range(vocab))
    table = EmbeddingTable(dimension=dim, tokens=words, vectors=rng.normal(size=(vocab, dim)))

    def sentences(prefix, count, scored):
        out = []
        for i in range(count):
            length = int(rng.integers(4, 9))
            tokens = tuple(words[j] for j in rng.integers(0, vocab, size=length))
            ds = tuple(int(v) for v in rng.random(16) < 0.1)
            scores = tuple(float(v) for v in rng.random(16)) if scored else None
            out.append(CorpusSentence(f"{prefix}{i:05d}", tokens, (0, 0), (length - 1, length - 1), ds, scores))
        return out

    return table, sentences("crowd", n_crowd, True), sentences("ds", n_ds, False)


@pytest.mark.parametrize("case", BLEND_CASES, ids=[c["name"] for c in BLEND_CASES])
def test_blend_cases(case):
    ds = [0] * 16
    ds[0] = case["ds"]
    srs = [0.0] * 16
    srs[0] = case["srs"]
    result = propagate_sentence(_sentence(ds), srs, case["similarity"])
    assert result.scores[0] == pytest.approx(case["expected"], abs=1e-12)


class TestBlendProperties:

    @pytest.mark.timeout(5)
    def test_convex_combination(self):
        rng = np.random.default_rng(42)
        for _ in range(100_000 // 16):
            ds = rng.integers(0, 2, size=16)
            srs = rng.random(16)
            c = float(rng.random())
            result = propagate_sentence(_sentence(ds), srs, c)
            scores = np.array(result.scores)
            w = c / (1.0 + c)
            assert np.allclose(scores, (1.0 - w) * ds + w * srs, rtol=0.0, atol=1e-12)
            assert np.all((scores >= 0.0) & (scores <= 1.0))
            assert np.all(scores >= np.minimum(ds, srs) - 1e-12)
            assert np.all(scores <= np.maximum(ds, srs) + 1e-12)

    def test_monotone_in_srs(self):
        ds = [1] + [0] * 15
        low = propagate_sentence(_sentence(ds), [0.2] * 16, 0.6)
        high = propagate_sentence(_sentence(ds), [0.3] * 16, 0.6)
        assert all(h > l for h, l in zip(high.scores, low.scores))

    def test_sparse_srs_map(self):
        result = propagate_sentence(_sentence([0] * 16), {3: 1.0}, 1.0)
        assert result.scores[3] == 0.5
        assert sum(result.scores) == 0.5

    def test_minus_one_without_clamp_keeps_ds(self):
        ds = [1] + [0] * 15
        result = propagate_sentence(_sentence(ds), [1.0] * 16, -1.0)
        assert not result.propagated
        assert result.scores == tuple(float(v) for v in ds)


class TestToyCorpus:

    def test_matches_golden(self, inventory, toy, toy_dir):
        table, crowd, ds = toy
        results = list(propagate_corpus(ds, crowd, table, inventory))
        expected = read_jsonl(toy_dir / "expected_ds_star.jsonl")
        assert [result_to_dict(r, inventory) for r in results] == expected

    def test_exhaustive_search_agrees(self, inventory, toy):
        table, crowd, ds = toy
        blocked = list(propagate_corpus(ds, crowd, table, inventory))
        exhaustive = list(
            propagate_corpus(ds, crowd, table, inventory, settings=PropagationConfig(search="exhaustive"))
        )
        assert blocked == exhaustive

    def test_report(self, inventory, toy):
        table, crowd, ds = toy
        report = PropagationReport()
        list(propagate_corpus(ds, crowd, table, inventory, report=report))
        assert report.total == 5
        assert report.propagated == 4
        assert report.unpropagatable == 1
        assert report.fallback_whole_sentence == 1
        assert report.labeled == 3
        assert report.excluded_crowd == ["c4"]
        assert report.mean_similarity == 1.0
        assert sum(report.histogram) == 4
        assert report.histogram[-1] == 4
        assert len(report.histogram_edges) == 21
        assert report.to_dict()["similarity_histogram"]["counts"] == report.histogram

    def test_oov_sentence_keeps_ds(self, inventory, toy):
        table, crowd, ds = toy
        results = {r.sentence_id: r for r in propagate_corpus(ds, crowd, table, inventory)}
        d3 = results["d3"]
        assert not d3.propagated
        assert d3.neighbor_id is None
        assert d3.scores[inventory.index("spouse")] == 1.0

    def test_empty_ds_corpus(self, inventory, toy):
        table, crowd, _ = toy
        report = PropagationReport()
        assert list(propagate_corpus([], crowd, table, inventory, report=report)) == []
        assert report.total == 0
        assert report.propagated == 0

    def test_missing_srs(self, inventory, toy, toy_dir):
        table, _, ds = toy
        crowd = read_corpus(str(toy_dir / "crowd.jsonl"), inventory)
        with pytest.raises(ValidationError, match="missing srs"):
            list(propagate_corpus(ds, crowd, table, inventory))

    def test_propagate_requires_fit(self, inventory, toy):
        table, _, ds = toy
        with pytest.raises(RuntimeError):
            list(LabelPropagator(inventory, table, verbose=False).propagate(ds))


class TestSimilarityClamp:

    def _setup(self):
        table = EmbeddingTable(dimension=2, tokens=("up", "down"), vectors=np.array([[1.0, 0.0], [-1.0, 0.0]]))
        crowd = [CorpusSentence("c1", ("A", "up", "B"), (0, 0), (2, 2), (0,) * 16, (1.0,) * 16)]
        ds = [CorpusSentence("d1", ("A", "down", "B"), (0, 0), (2, 2), (1,) + (0,) * 15)]
        return table, crowd, ds

    def test_negative_cosine_is_clamped(self, inventory):
        table, crowd, ds = self._setup()
        (result,) = propagate_corpus(ds, crowd, table, inventory)
        assert result.propagated
        assert result.similarity == -1.0
        assert result.clamped_similarity == 0.0
        assert result.scores == tuple(float(v) for v in ds[0].ds_labels)

    def test_minus_one_unclamped_is_unpropagated(self, inventory):
        table, crowd, ds = self._setup()
        settings = PropagationConfig(similarity_clamp=False)
        (result,) = propagate_corpus(ds, crowd, table, inventory, settings=settings)
        assert not result.propagated
        assert result.similarity == -1.0

    def test_negative_cosine_unclamped_is_counted_out_of_range(self, inventory):
        table = EmbeddingTable(dimension=2, tokens=("up", "diag"), vectors=np.array([[1.0, 0.0], [-1.0, 1.0]]))
        crowd = [CorpusSentence("c1", ("A", "up", "B"), (0, 0), (2, 2), (0,) * 16, (1.0,) * 16)]
        ds = [CorpusSentence("d1", ("A", "diag", "B"), (0, 0), (2, 2), (1,) + (0,) * 15)]

        report = PropagationReport()
        settings = PropagationConfig(similarity_clamp=False)
        (result,) = propagate_corpus(ds, crowd, table, inventory, settings=settings, report=report)
        assert result.propagated
        assert result.similarity == pytest.approx(-np.sqrt(0.5), abs=1e-12)
        assert min(result.scores) < 0.0
        assert report.out_of_range == 1
        assert report.to_dict()["out_of_range"] == 1

        report = PropagationReport()
        list(propagate_corpus(ds, crowd, table, inventory, report=report))
        assert report.out_of_range == 0


@pytest.mark.timeout(60)
def test_neighbors_match_exhaustive_on_synthetic(inventory):
    table, crowd, ds = _synthetic(n_ds=1000, n_crowd=50, seed=3)
    blocked = list(propagate_corpus(ds, crowd, table, inventory))
    exhaustive = list(propagate_corpus(ds, crowd, table, inventory, settings=PropagationConfig(search="exhaustive")))
    assert [r.neighbor_id for r in blocked] == [r.neighbor_id for r in exhaustive]
    for a, b in zip(blocked, exhaustive):
        assert a.similarity == pytest.approx(b.similarity, abs=1e-12)


@pytest.mark.timeout(120)
def test_output_bytes_independent_of_threads(tmp_path, inventory):
    table, crowd, ds = _synthetic(n_ds=10_000, n_crowd=300, seed=11)
    outputs = []
    for threads in (1, 2, 8):
        path = tmp_path / f"out_{threads}.jsonl"
        settings = PropagationConfig(threads=threads)
        write_results(propagate_corpus(ds, crowd, table, inventory, settings=settings), str(path), inventory)
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    assert outputs[0].count(b"\n") == 10_000
    first = json.loads(outputs[0].splitlines()[0])
    assert first["id"] == "ds00000"


def test_invalid_settings():
    with pytest.raises(ValidationError):
        PropagationConfig(threads=0)
