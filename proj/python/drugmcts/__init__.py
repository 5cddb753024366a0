"""Python interface to the drugmcts search engine.

Records are plain dicts shaped like the JSONL files the command-line tool reads
and writes.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping, Optional, Sequence

from . import _core
from ._core import (
    BackendError,
    ConfigError,
    ConsistencyError,
    Corpus,
    DrugMctsError,
    IoError,
    MetricError,
    SchemaError,
    TemplateError,
    cosine,
    final_reward,
    run_cli,
    tally_selections,
    tanimoto,
    uct_score,
)

__all__ = [
    "BackendError",
    "ConfigError",
    "ConsistencyError",
    "Corpus",
    "DrugMctsError",
    "IoError",
    "MetricError",
    "SchemaError",
    "TemplateError",
    "build_instances",
    "cosine",
    "default_config",
    "evaluate",
    "final_reward",
    "load_corpus",
    "run_cli",
    "search",
    "tally_selections",
    "tanimoto",
    "uct_score",
    "validate_instance",
]


def load_corpus(molecules: str, proteins: str, interactions: str, strict: bool = True) -> Corpus:
    return Corpus.load(str(molecules), str(proteins), str(interactions), strict)


def validate_instance(corpus: Corpus, instance: Mapping[str, Any]) -> list[str]:
    """Rule violations for one problem instance; empty when it is consistent."""
    return corpus.validate_instance_json(json.dumps(instance))


def build_instances(corpus: Corpus, **rules: Any) -> tuple[list[dict], dict]:
    """Returns (instances, report). Keyword arguments override builder rules."""
    out = json.loads(_core.build_instances_json(corpus, json.dumps(rules)))
    return out["instances"], out["report"]


def default_config() -> dict:
    return json.loads(_core.default_config_json())


def search(
    corpus: Corpus,
    instance: Mapping[str, Any],
    config: Optional[Mapping[str, Any]] = None,
    backend: str = "mock",
    script: Optional[Any] = None,
    mode: str = "mcts",
    mock_variety: int = 0,
) -> dict:
    """Runs one search. Returns {"result", "tree", "trace"}."""
    return json.loads(
        _core.search_json(
            corpus,
            json.dumps(instance),
            json.dumps(dict(config or {})),
            backend,
            None if script is None else json.dumps(script),
            mode,
            mock_variety,
        )
    )


def evaluate(
    results: Iterable[Mapping[str, Any]],
    instances: Sequence[Mapping[str, Any]],
    topk: str = "gt",
) -> dict:
    return json.loads(
        _core.evaluate_json(
            [json.dumps(r) for r in results], [json.dumps(i) for i in instances], topk
        )
    )
