"""Retrieval strategies: the hierarchical pipeline and three baselines.

All strategies share one interface: given a query and a retrieval context
(corpus, per-level indices, providers, config) they return an ordered list
of unique parent chunks plus a per-stage trace of every candidate list,
so any run can be audited stage by stage.

  * ``hrr``  searches sentences and intermediates, maps sentence hits to
    their intermediates, dedups, reranks the 512-token pool, takes the top
    k, and maps to unique parents.
  * ``base`` searches parents directly and reranks the 2048-token chunks.
  * ``c2p``  searches parents, intermediates, and the 256-token side tier,
    maps every hit to its 2048-token ancestor, and reranks parents.
  * ``s2p``  searches sentences only, maps to parents, and reranks parents.

Pre-rerank pools order candidates by their best originating similarity
(a mapped candidate inherits its hit's score), ties by chunk id; dedup
keeps the first occurrence under that order. Final parent dedup keeps the
highest-reranked representative's score.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .corpus import Corpus, Level, resolve_parent
from .embedding import EmbeddingProvider, embed_batch
from .errors import ConfigError, EmptyCorpusError, MissingIndexError
from .index import LevelIndex, SearchHit
from .rerank import (
    FALLBACK_ERROR,
    RerankProvider,
    RerankRequest,
    ScoredCandidate,
    rerank,
    top_k,
)


class Strategy(str, Enum):
    HRR = "hrr"
    BASE = "base"
    C2P = "c2p"
    S2P = "s2p"


@dataclass(frozen=True)
class RetrieverConfig:
    #: Hits requested from each searched level independently.
    similarity_top_k: int = 10
    rerank_top_k: int = 5
    strategy: Strategy = Strategy.HRR

    def validate(self) -> None:
        if self.similarity_top_k < 1 or self.rerank_top_k < 1:
            raise ConfigError("similarity_top_k and rerank_top_k must be >= 1")


@dataclass(frozen=True)
class StageTrace:
    stage: str
    candidates: tuple[ScoredCandidate, ...]


@dataclass(frozen=True)
class RetrievalResult:
    query: str
    strategy: Strategy
    parents: tuple[ScoredCandidate, ...]
    trace: tuple[StageTrace, ...]

    def parent_ids(self) -> list[str]:
        return [p.chunk_id for p in self.parents]

    def stage(self, name: str) -> tuple[ScoredCandidate, ...]:
        for entry in self.trace:
            if entry.stage == name:
                return entry.candidates
        raise KeyError(f"no trace stage {name!r}")

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "strategy": self.strategy.value,
            "parents": [{"chunk_id": p.chunk_id, "score": p.score} for p in self.parents],
            "trace": [
                {
                    "stage": t.stage,
                    "candidates": [
                        {"chunk_id": c.chunk_id, "score": c.score} for c in t.candidates
                    ],
                }
                for t in self.trace
            ],
        }


@dataclass
class RetrievalContext:
    """Everything a strategy needs, read-only during retrieval."""

    corpus: Corpus
    indices: Mapping[Level, LevelIndex]
    embedder: EmbeddingProvider
    reranker: RerankProvider
    config: RetrieverConfig = field(default_factory=RetrieverConfig)
    rerank_fallback: str = FALLBACK_ERROR
    rerank_mix_lambda: float = 0.0

    def index(self, level: Level) -> LevelIndex:
        try:
            return self.indices[level]
        except KeyError:
            raise MissingIndexError(
                f"no index for level {level.value!r}; build it first"
            ) from None


def retrieve(query: str, ctx: RetrievalContext) -> RetrievalResult:
    """Run the strategy selected by ``ctx.config.strategy``."""
    ctx.config.validate()
    if not ctx.corpus.nodes:
        raise EmptyCorpusError("corpus has no chunks")
    return _STRATEGIES[ctx.config.strategy](query, ctx)


def retrieve_hrr(query: str, ctx: RetrievalContext) -> RetrievalResult:
    """Sentence and intermediate retrieval, mid-tier rerank, parent mapping."""
    k = ctx.config.similarity_top_k
    query_vec = embed_batch(ctx.embedder, [query])[0]

    sentence_hits = ctx.index(Level.SENTENCE).search(query_vec, k)
    intermediate_hits = ctx.index(Level.INTERMEDIATE).search(query_vec, k)

    mapped = [
        ScoredCandidate(
            resolve_parent(ctx.corpus, hit.chunk_id, Level.INTERMEDIATE), hit.score
        )
        for hit in sentence_hits
    ]

    pool = _dedup_best(mapped + _as_candidates(intermediate_hits))
    reranked, reranked_top = _rerank_pool(query, pool, ctx, sentence_bonus=_best_scores(mapped))
    parents = _map_to_parents(reranked_top, ctx.corpus)

    trace = (
        StageTrace("sentence_hits", tuple(_as_candidates(sentence_hits))),
        StageTrace("intermediate_hits", tuple(_as_candidates(intermediate_hits))),
        StageTrace("sentence_to_intermediate", tuple(mapped)),
        StageTrace("rerank_pool", tuple(pool)),
        StageTrace("reranked", tuple(reranked)),
        StageTrace("rerank_top_k", tuple(reranked_top)),
        StageTrace("parents", tuple(parents)),
    )
    return RetrievalResult(query, Strategy.HRR, tuple(parents), trace)


def retrieve_base(query: str, ctx: RetrievalContext) -> RetrievalResult:
    """Single-granularity baseline: search and rerank 2048-token chunks."""
    query_vec = embed_batch(ctx.embedder, [query])[0]
    hits = ctx.index(Level.PARENT).search(query_vec, ctx.config.similarity_top_k)
    pool = _as_candidates(hits)
    reranked, reranked_top = _rerank_pool(query, pool, ctx)
    parents = _map_to_parents(reranked_top, ctx.corpus)
    trace = (
        StageTrace("parent_hits", tuple(pool)),
        StageTrace("rerank_pool", tuple(pool)),
        StageTrace("reranked", tuple(reranked)),
        StageTrace("rerank_top_k", tuple(reranked_top)),
        StageTrace("parents", tuple(parents)),
    )
    return RetrievalResult(query, Strategy.BASE, tuple(parents), trace)


def retrieve_c2p(query: str, ctx: RetrievalContext) -> RetrievalResult:
    """Child-to-parent baseline over the 2048/512/256 tiers.

    Needs the sub-intermediate index, which is only built when the chunking
    config enables the side tier.
    """
    k = ctx.config.similarity_top_k
    query_vec = embed_batch(ctx.embedder, [query])[0]

    parent_hits = ctx.index(Level.PARENT).search(query_vec, k)
    intermediate_hits = ctx.index(Level.INTERMEDIATE).search(query_vec, k)
    sub_hits = ctx.index(Level.SUB_INTERMEDIATE).search(query_vec, k)

    mapped = [
        ScoredCandidate(resolve_parent(ctx.corpus, hit.chunk_id, Level.PARENT), hit.score)
        for hit in (*parent_hits, *intermediate_hits, *sub_hits)
    ]
    pool = _dedup_best(mapped)
    reranked, reranked_top = _rerank_pool(query, pool, ctx)
    parents = _map_to_parents(reranked_top, ctx.corpus)

    trace = (
        StageTrace("parent_hits", tuple(_as_candidates(parent_hits))),
        StageTrace("intermediate_hits", tuple(_as_candidates(intermediate_hits))),
        StageTrace("sub_intermediate_hits", tuple(_as_candidates(sub_hits))),
        StageTrace("rerank_pool", tuple(pool)),
        StageTrace("reranked", tuple(reranked)),
        StageTrace("rerank_top_k", tuple(reranked_top)),
        StageTrace("parents", tuple(parents)),
    )
    return RetrievalResult(query, Strategy.C2P, tuple(parents), trace)


def retrieve_s2p(query: str, ctx: RetrievalContext) -> RetrievalResult:
    """Sentence-to-parent baseline: sentence retrieval, parent rerank."""
    query_vec = embed_batch(ctx.embedder, [query])[0]
    sentence_hits = ctx.index(Level.SENTENCE).search(query_vec, ctx.config.similarity_top_k)
    mapped = [
        ScoredCandidate(resolve_parent(ctx.corpus, hit.chunk_id, Level.PARENT), hit.score)
        for hit in sentence_hits
    ]
    pool = _dedup_best(mapped)
    reranked, reranked_top = _rerank_pool(query, pool, ctx)
    parents = _map_to_parents(reranked_top, ctx.corpus)
    trace = (
        StageTrace("sentence_hits", tuple(_as_candidates(sentence_hits))),
        StageTrace("rerank_pool", tuple(pool)),
        StageTrace("reranked", tuple(reranked)),
        StageTrace("rerank_top_k", tuple(reranked_top)),
        StageTrace("parents", tuple(parents)),
    )
    return RetrievalResult(query, Strategy.S2P, tuple(parents), trace)


_STRATEGIES = {
    Strategy.HRR: retrieve_hrr,
    Strategy.BASE: retrieve_base,
    Strategy.C2P: retrieve_c2p,
    Strategy.S2P: retrieve_s2p,
}


def _as_candidates(hits: list[SearchHit]) -> list[ScoredCandidate]:
    return [ScoredCandidate(h.chunk_id, h.score) for h in hits]


def _best_scores(candidates: list[ScoredCandidate]) -> dict[str, float]:
    best: dict[str, float] = {}
    for cand in candidates:
        if cand.score is not None and cand.score > best.get(cand.chunk_id, float("-inf")):
            best[cand.chunk_id] = cand.score
    return best


def _dedup_best(candidates: list[ScoredCandidate]) -> list[ScoredCandidate]:
    """One candidate per id carrying its best score, sorted (score desc, id)."""
    best = _best_scores(candidates)
    return [
        ScoredCandidate(cid, score)
        for cid, score in sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    ]


def _rerank_pool(
    query: str,
    pool: list[ScoredCandidate],
    ctx: RetrievalContext,
    *,
    sentence_bonus: Mapping[str, float] | None = None,
) -> tuple[list[ScoredCandidate], list[ScoredCandidate]]:
    request = RerankRequest(
        query,
        tuple((c.chunk_id, ctx.corpus.chunk_text(c.chunk_id)) for c in pool),
    )
    reranked = rerank(
        ctx.reranker,
        request,
        fallback=ctx.rerank_fallback,
        mix_lambda=ctx.rerank_mix_lambda,
        sentence_bonus=sentence_bonus,
    )
    return reranked, top_k(reranked, ctx.config.rerank_top_k)


def _map_to_parents(
    reranked_top: list[ScoredCandidate], corpus: Corpus
) -> list[ScoredCandidate]:
    """Map candidates to parent chunks, keeping the first (highest-ranked)
    representative of each parent."""
    out: list[ScoredCandidate] = []
    seen: set[str] = set()
    for cand in reranked_top:
        parent_id = resolve_parent(corpus, cand.chunk_id, Level.PARENT)
        if parent_id not in seen:
            seen.add(parent_id)
            out.append(ScoredCandidate(parent_id, cand.score))
    return out
