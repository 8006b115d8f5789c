"""
Tests for annotation CSV parsing and worker vectors.
"""

import pytest

from modules.annotations import (
    AnnotationMatrix,
    matrix_from_records,
    parse_annotations,
    worker_vector,
    write_annotations,
)
from modules.errors import ValidationError


def _write(tmp_path, text, name="annotations.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestWorkerVector:

    def test_single_choice(self, inventory):
        vector = worker_vector(["origin"], inventory)
        assert sum(vector.choices) == 1
        assert vector.picked(inventory.index("origin"))

    def test_multiple_choices_and_repeats(self, inventory):
        vector = worker_vector(["spouse", "parents", "spouse"], inventory)
        assert sum(vector.choices) == 2
        assert len(vector.choices) == 17

    def test_none_alone(self, inventory):
        vector = worker_vector(["none"], inventory)
        assert vector.choices[inventory.none_index] == 1

    def test_none_with_other_rejected(self, inventory):
        with pytest.raises(ValidationError, match="none"):
            worker_vector(["none", "origin"], inventory)

    def test_empty_rejected(self, inventory):
        with pytest.raises(ValidationError, match="empty"):
            worker_vector([], inventory)

    def test_unknown_relation_rejected(self, inventory):
        with pytest.raises(ValidationError, match="unknown relation"):
            worker_vector(["born_in"], inventory)


class TestParseAnnotations:

    def test_toy_file(self, inventory, toy_dir):
        matrix = parse_annotations(str(toy_dir / "annotations.csv"), inventory)
        assert len(matrix) == 12
        assert matrix.sentence_ids == ["c1", "c2", "c3", "c4"]
        assert matrix.worker_ids == ["w1", "w2", "w3"]
        w3 = [r for r in matrix.rows_for_sentence("c1") if r.worker_id == "w3"][0]
        assert sum(w3.choices) == 2

    def test_bad_header(self, tmp_path, inventory):
        path = _write(tmp_path, "worker,sentence,relations\nw1,s1,origin\n")
        with pytest.raises(ValidationError, match=":1:"):
            parse_annotations(path, inventory)

    def test_duplicate_pair_names_line(self, tmp_path, inventory):
        path = _write(tmp_path, "worker_id,sentence_id,choices\nw1,s1,origin\nw1,s1,spouse\n")
        with pytest.raises(ValidationError) as excinfo:
            parse_annotations(path, inventory)
        assert excinfo.value.line == 3
        assert "duplicate" in str(excinfo.value)

    def test_unknown_relation_names_line(self, tmp_path, inventory):
        path = _write(tmp_path, "worker_id,sentence_id,choices\nw1,s1,origin\nw2,s1,lives_in\n")
        with pytest.raises(ValidationError) as excinfo:
            parse_annotations(path, inventory)
        assert excinfo.value.line == 3

    def test_wrong_field_count(self, tmp_path, inventory):
        path = _write(tmp_path, "worker_id,sentence_id,choices\nw1,s1\n")
        with pytest.raises(ValidationError, match="malformed"):
            parse_annotations(path, inventory)

    def test_empty_choices_rejected(self, tmp_path, inventory):
        path = _write(tmp_path, "worker_id,sentence_id,choices\nw1,s1,\n")
        with pytest.raises(ValidationError, match="empty choice"):
            parse_annotations(path, inventory)

    def test_missing_file(self, tmp_path, inventory):
        with pytest.raises(FileNotFoundError):
            parse_annotations(str(tmp_path / "missing.csv"), inventory)


def test_write_then_parse_keeps_rows(tmp_path, inventory, toy_dir):
    matrix = parse_annotations(str(toy_dir / "annotations.csv"), inventory)
    out = tmp_path / "copy.csv"
    assert write_annotations(matrix, str(out)) == 12
    assert out.read_text(encoding="utf-8") == (toy_dir / "annotations.csv").read_text(encoding="utf-8")


def test_matrix_rejects_duplicate_records(inventory):
    with pytest.raises(ValidationError):
        matrix_from_records([("w1", "s1", ["origin"]), ("w1", "s1", ["spouse"])], inventory)


def test_matrix_rejects_wrong_vector_length(inventory):
    vector = worker_vector(["origin"], inventory)
    short = type(vector)(worker_id="w1", sentence_id="s1", choices=vector.choices[:5])
    with pytest.raises(ValidationError):
        AnnotationMatrix(rows=(short,), inventory=inventory)
