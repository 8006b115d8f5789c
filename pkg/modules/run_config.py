"""
Run configuration for the crowdprop subcommands.

Values resolve in three layers, later ones winning:
    config.py defaults < YAML file given with --config < command-line flags
"""

import os
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

import config
from modules.errors import ValidationError


@dataclass(frozen=True)
class RunConfig:
    # paths
    annotations: Optional[str] = None
    inventory: str = config.RELATION_INVENTORY_PATH
    embeddings: Optional[str] = None
    crowd: Optional[str] = None
    ds: Optional[str] = None
    quality: Optional[str] = None
    output: Optional[str] = None
    report: Optional[str] = None
    out_dir: Optional[str] = None
    gold: Optional[str] = None
    gold_filter: Optional[str] = None
    dev_output: Optional[str] = None
    test_output: Optional[str] = None
    predictions: Tuple[Tuple[str, str], ...] = ()

    # aggregation
    tolerance: float = config.FIXED_POINT_TOLERANCE
    max_iterations: int = config.FIXED_POINT_MAX_ITERATIONS
    srs_relation_weighting: str = config.SRS_RELATION_WEIGHTING
    unweighted_srs: bool = False

    # embeddings / propagation
    embedding_format: str = config.EMBEDDING_FORMAT
    lowercase_fallback: bool = config.EMBEDDING_LOWERCASE_FALLBACK
    span_policy: str = config.SPAN_POLICY
    span_fallback: bool = True
    similarity_clamp: bool = config.SIMILARITY_CLAMP
    threads: int = config.THREADS
    batch_size: int = config.PROPAGATION_BATCH_SIZE
    search: str = config.NEIGHBOR_SEARCH

    # evaluation
    gold_threshold: float = config.GOLD_THRESHOLD
    histogram_bins: int = config.COSINE_HISTOGRAM_BINS
    orphan_limit: int = config.EVAL_ORPHAN_LIMIT
    top_oov: int = 20

    # split
    dev_fraction: float = config.SPLIT_DEV_FRACTION

    show_progress: bool = config.SHOW_PROGRESS
    debug: bool = False

    def validate(self) -> "RunConfig":
        for name in ("gold_threshold", "dev_fraction"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValidationError(f"{name} must lie in (0, 1), got {value}")
        if self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.tolerance > 0:
            raise ValidationError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.histogram_bins < 1 or self.orphan_limit < 1:
            raise ValidationError("histogram_bins and orphan_limit must be >= 1")
        choices = {
            "srs_relation_weighting": config.SRS_RELATION_WEIGHTING_MODES,
            "embedding_format": config.EMBEDDING_FORMATS,
            "span_policy": config.SPAN_POLICIES,
            "search": config.NEIGHBOR_SEARCH_MODES,
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ValidationError(f"{name} must be one of {allowed}, got '{getattr(self, name)}'")
        return self

    def require(self, *names: str) -> None:
        """Raise when a path the subcommand needs is unset."""
        missing = [n for n in names if not getattr(self, n)]
        if missing:
            flags = ", ".join("--" + n.replace("_", "-") for n in missing)
            raise ValidationError(f"missing required option(s): {flags}")


FIELD_NAMES = frozenset(f.name for f in fields(RunConfig))


def _coerce(name: str, value: Any) -> Any:
    if name == "predictions":
        if isinstance(value, Mapping):
            return tuple((str(k), str(v)) for k, v in value.items())
        return tuple(parse_prediction_spec(v) if isinstance(v, str) else tuple(v) for v in value)
    if isinstance(value, str) and name in ("srs_relation_weighting", "embedding_format", "span_policy", "search"):
        return value.lower()
    return value


def parse_prediction_spec(spec: str) -> Tuple[str, str]:
    """NAME=PATH; a bare PATH is named after its file stem."""
    if "=" in spec:
        name, path = spec.split("=", 1)
        if not name:
            raise ValidationError(f"empty system name in '{spec}'")
        return name, path
    stem = os.path.basename(spec)
    for suffix in (".jsonl", ".json"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
            break
    return stem, spec


def load_yaml_overrides(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ValidationError(f"invalid YAML: {e}", path=path) from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a mapping", path=path)
    overrides = {str(k).replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(overrides) - FIELD_NAMES)
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}", path=path)
    return overrides


def resolve_run_config(flags: Mapping[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """
    Merge YAML overrides and flags over the config.py defaults.

    Flags whose value is None were not given and leave the lower layers alone.
    """
    values: Dict[str, Any] = {}
    if config_path:
        values.update(load_yaml_overrides(config_path))
    for name, value in flags.items():
        if name in FIELD_NAMES and value is not None:
            values[name] = value
    values = {name: _coerce(name, value) for name, value in values.items()}
    return replace(RunConfig(), **values).validate()
