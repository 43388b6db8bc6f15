"""Engine configuration: one JSON file, strictly validated.

Defaults follow the reference parameter table (2048/512 chunk budgets, zero
overlap, similarity top-k 10, rerank top-k 5). Unknown keys are rejected so
typos fail loudly instead of silently falling back to defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .chunking import ChunkingConfig
from .errors import ConfigError
from .rerank import FALLBACK_ERROR, FALLBACK_PASSTHROUGH
from .retrievers import RetrieverConfig, Strategy

PROVIDER_LOCAL_EMBED = "hashed-bow"
PROVIDER_LOCAL_RERANK = "lexical-overlap"
PROVIDER_REMOTE = "remote"


@dataclass(frozen=True)
class EmbeddingConfig:
    provider: str = PROVIDER_LOCAL_EMBED
    dimension: int = 384
    base_url: str | None = None
    timeout: float = 10.0
    retries: int = 3
    batch_size: int = 64
    max_in_flight: int = 4
    api_key_env: str | None = None

    def validate(self) -> None:
        if self.provider not in (PROVIDER_LOCAL_EMBED, PROVIDER_REMOTE):
            raise ConfigError(f"unknown embedding provider {self.provider!r}")
        if self.provider == PROVIDER_REMOTE and not self.base_url:
            raise ConfigError("embedding.base_url is required for the remote provider")
        if self.dimension < 1:
            raise ConfigError("embedding.dimension must be >= 1")


@dataclass(frozen=True)
class RerankProviderConfig:
    provider: str = PROVIDER_LOCAL_RERANK
    base_url: str | None = None
    timeout: float = 10.0
    retries: int = 3
    fallback: str = FALLBACK_ERROR
    mix_lambda: float = 0.0
    api_key_env: str | None = None

    def validate(self) -> None:
        if self.provider not in (PROVIDER_LOCAL_RERANK, PROVIDER_REMOTE):
            raise ConfigError(f"unknown rerank provider {self.provider!r}")
        if self.provider == PROVIDER_REMOTE and not self.base_url:
            raise ConfigError("rerank.base_url is required for the remote provider")
        if self.fallback not in (FALLBACK_ERROR, FALLBACK_PASSTHROUGH):
            raise ConfigError(f"rerank.fallback must be error or passthrough")


@dataclass(frozen=True)
class PathsConfig:
    corpus_dir: str = "corpus"
    index_dir: str = "indexes"
    query_set: str = "queries.jsonl"


@dataclass(frozen=True)
class EngineConfig:
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    tokenizer: str = "word-punct"
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    rerank: RerankProviderConfig = field(default_factory=RerankProviderConfig)
    retriever: RetrieverConfig = field(default_factory=RetrieverConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)
    seed: int = 0

    def validate(self) -> None:
        self.chunking.validate()
        self.embedding.validate()
        self.rerank.validate()
        self.retriever.validate()


_SECTIONS = {
    "chunking": ChunkingConfig,
    "embedding": EmbeddingConfig,
    "rerank": RerankProviderConfig,
    "retriever": RetrieverConfig,
    "paths": PathsConfig,
}


def config_from_dict(data: dict) -> EngineConfig:
    """Build an ``EngineConfig`` from parsed JSON, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            kwargs[key] = _section_from_dict(_SECTIONS[key], value, key)
        elif key == "tokenizer":
            kwargs[key] = str(value)
        elif key == "seed":
            kwargs[key] = int(value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    config = EngineConfig(**kwargs)
    config.validate()
    return config


def _section_from_dict(section_type, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"config section {path!r} must be an object")
    known = {f.name: f for f in dataclasses.fields(section_type)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key '{path}.{key}'")
        if section_type is RetrieverConfig and key == "strategy":
            try:
                value = Strategy(value)
            except ValueError:
                raise ConfigError(
                    f"{path}.strategy must be one of {[s.value for s in Strategy]}"
                ) from None
        kwargs[key] = value
    try:
        return section_type(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad config section {path!r}: {exc}") from exc


def load_config(path: str | Path | None) -> EngineConfig:
    """Load the config file, or the full defaults when ``path`` is None."""
    if path is None:
        config = EngineConfig()
        config.validate()
        return config
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
