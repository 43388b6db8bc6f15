"""Ingest and artifact orchestration shared by the CLI and tests.

Ingest reads plain-text documents, chunks them, validates the hierarchy,
builds one index per level, and persists everything; loading reverses it.
All steps are pure functions of (config, inputs), so re-running ingest on
unchanged inputs rewrites byte-identical artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .chunking import build_corpus
from .config import (
    PROVIDER_LOCAL_EMBED,
    PROVIDER_LOCAL_RERANK,
    EngineConfig,
)
from .corpus import (
    Corpus,
    Level,
    load_corpus,
    save_corpus,
    validate_corpus,
)
from .embedding import EmbeddingProvider, HashedBowEmbedder, RemoteEmbedder
from .errors import InvalidCorpusError, MissingIndexError, NoDocumentsError
from .index import LevelIndex, build_index, load_index, save_index
from .rerank import LexicalOverlapReranker, RemoteReranker, RerankProvider
from .retrievers import RetrievalContext
from .tokens import get_tokenizer

_INDEX_SUFFIX = ".idx"


def make_embedder(config: EngineConfig) -> EmbeddingProvider:
    emb = config.embedding
    if emb.provider == PROVIDER_LOCAL_EMBED:
        return HashedBowEmbedder(dimension=emb.dimension)
    return RemoteEmbedder(
        emb.base_url or "",
        emb.dimension,
        timeout=emb.timeout,
        retries=emb.retries,
        batch_size=emb.batch_size,
        max_in_flight=emb.max_in_flight,
        api_key_env=emb.api_key_env,
    )


def make_reranker(config: EngineConfig) -> RerankProvider:
    rr = config.rerank
    if rr.provider == PROVIDER_LOCAL_RERANK:
        return LexicalOverlapReranker()
    return RemoteReranker(
        rr.base_url or "",
        timeout=rr.timeout,
        retries=rr.retries,
        api_key_env=rr.api_key_env,
    )


def read_documents(docs_dir: str | Path) -> dict[str, str]:
    """Read every ``*.txt`` file (sorted by name) as one document."""
    docs_dir = Path(docs_dir)
    paths = sorted(docs_dir.glob("*.txt"))
    if not paths:
        raise NoDocumentsError(f"no .txt documents in {docs_dir}")
    return {path.stem: path.read_text(encoding="utf-8") for path in paths}


@dataclass(frozen=True)
class IngestSummary:
    documents: int
    chunks_per_level: dict[str, int]
    dimension: int


def ingest(docs_dir: str | Path, config: EngineConfig) -> IngestSummary:
    """Chunk, validate, embed, index, and persist a document directory."""
    documents = read_documents(docs_dir)
    tokenizer = get_tokenizer(config.tokenizer)
    corpus = build_corpus(documents, config.chunking, tokenizer)

    violations = validate_corpus(corpus)
    if violations:
        details = "; ".join(str(v) for v in violations[:5])
        raise InvalidCorpusError(f"{len(violations)} corpus violations: {details}")

    embedder = make_embedder(config)
    corpus_dir = Path(config.paths.corpus_dir)
    save_corpus(corpus, corpus_dir)

    index_dir = Path(config.paths.index_dir)
    index_dir.mkdir(parents=True, exist_ok=True)
    levels = [Level.PARENT, Level.INTERMEDIATE, Level.SENTENCE]
    if config.chunking.sub_intermediate_size is not None:
        levels.append(Level.SUB_INTERMEDIATE)
    counts: dict[str, int] = {}
    for level in levels:
        index = build_index(corpus, level, embedder)
        save_index(index, index_dir / f"{level.value}{_INDEX_SUFFIX}")
        counts[level.value] = len(index)

    return IngestSummary(
        documents=len(documents),
        chunks_per_level=counts,
        dimension=embedder.dimension,
    )


def load_indices(config: EngineConfig) -> dict[Level, LevelIndex]:
    index_dir = Path(config.paths.index_dir)
    indices: dict[Level, LevelIndex] = {}
    for level in Level:
        path = index_dir / f"{level.value}{_INDEX_SUFFIX}"
        if path.exists():
            indices[level] = load_index(path)
    if not indices:
        raise MissingIndexError(f"no index snapshots under {index_dir}; run ingest first")
    return indices


def load_context(config: EngineConfig) -> RetrievalContext:
    """Load persisted artifacts into a ready-to-query retrieval context."""
    corpus = load_corpus(config.paths.corpus_dir)
    ctx = RetrievalContext(
        corpus=corpus,
        indices=load_indices(config),
        embedder=make_embedder(config),
        reranker=make_reranker(config),
        config=config.retriever,
        rerank_fallback=config.rerank.fallback,
        rerank_mix_lambda=config.rerank.mix_lambda,
    )
    return ctx


def context_for(
    corpus: Corpus,
    config: EngineConfig,
    *,
    embedder: EmbeddingProvider | None = None,
    reranker: RerankProvider | None = None,
) -> RetrievalContext:
    """Build a context directly from an in-memory corpus (no persistence)."""
    embedder = embedder if embedder is not None else make_embedder(config)
    levels = [Level.PARENT, Level.INTERMEDIATE, Level.SENTENCE]
    if corpus.sub_nodes:
        levels.append(Level.SUB_INTERMEDIATE)
    indices = {level: build_index(corpus, level, embedder) for level in levels}
    return RetrievalContext(
        corpus=corpus,
        indices=indices,
        embedder=embedder,
        reranker=reranker if reranker is not None else make_reranker(config),
        config=config.retriever,
        rerank_fallback=config.rerank.fallback,
        rerank_mix_lambda=config.rerank.mix_lambda,
    )


__all__ = [
    "IngestSummary",
    "context_for",
    "ingest",
    "load_context",
    "load_indices",
    "make_embedder",
    "make_reranker",
    "read_documents",
]
