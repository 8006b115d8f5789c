from tests.utils.fixture_loader import FIXTURES_DIR, load_fixture, read_jsonl


def _require_keys(data: dict, keys: list) -> None:
    for key in keys:
        assert key in data, f"Missing key: {key}"


def _validate_crowdtruth_cases(data: dict) -> None:
    _require_keys(data, ["matrices"])
    for case in data["matrices"]:
        _require_keys(case, ["name", "annotations", "max_iterations", "expect"])
        for row in case["annotations"]:
            assert len(row) == 3 and isinstance(row[2], list)


def _validate_evaluation_cases(data: dict) -> None:
    _require_keys(data, ["pr_cases", "cosine_cases", "fp_ratio_cases"])
    for case in data["pr_cases"]:
        _require_keys(case, ["name", "predicted", "gold", "gold_threshold", "auc", "curve"])
        assert len(case["predicted"]) == len(case["gold"])
        assert len(case["auc"]) == 2
    for case in data["cosine_cases"]:
        _require_keys(case, ["name", "predicted", "gold", "cosine"])
    for case in data["fp_ratio_cases"]:
        _require_keys(case, ["name", "relation", "srs", "gold_threshold", "ratio"])


def _validate_propagation_cases(data: dict) -> None:
    _require_keys(data, ["blend_cases", "neighbor_cases"])
    for case in data["blend_cases"]:
        _require_keys(case, ["name", "ds", "similarity", "srs", "expected"])
    for case in data["neighbor_cases"]:
        _require_keys(case, ["name", "labeled", "query", "neighbor", "similarity"])


def test_crowdtruth_cases_schema():
    load_fixture(FIXTURES_DIR / "crowdtruth_cases.json", _validate_crowdtruth_cases)


def test_evaluation_cases_schema():
    load_fixture(FIXTURES_DIR / "evaluation_cases.json", _validate_evaluation_cases)


def test_propagation_cases_schema():
    load_fixture(FIXTURES_DIR / "propagation_cases.json", _validate_propagation_cases)


def test_toy_corpora_schema():
    for name in ("crowd.jsonl", "ds.jsonl", "expected_ds_star.jsonl", "expected_ds_plus_crowd.jsonl"):
        records = read_jsonl(FIXTURES_DIR / "toy" / name)
        assert records, name
        for record in records:
            assert "id" in record
            if name.startswith("expected"):
                _require_keys(record, ["neighbor", "sim", "sim_clamped", "scores", "propagated"])
                assert len(record["scores"]) == 16
            else:
                _require_keys(record, ["tokens", "term1", "term2", "ds_labels"])
