"""Second-stage reranking of retrieved candidates.

A rerank provider scores (query, chunk text) pairs; this module validates
requests, applies the provider, and imposes the stable total order (score
descending, chunk id ascending) that the rest of the pipeline depends on.
Ships with a deterministic lexical scorer for offline runs and a client
for a remote cross-encoder service.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence, runtime_checkable

import requests

from ._http import auth_headers, post_json
from .errors import InvalidInputError, InvalidRequestError, ProviderUnavailableError
from .tokens import WordPunctTokenizer

FALLBACK_ERROR = "error"
FALLBACK_PASSTHROUGH = "passthrough"


@dataclass(frozen=True)
class ScoredCandidate:
    """A chunk reference with a similarity or rerank score.

    ``score`` is None only in rerank passthrough fallback, where candidates
    keep their retrieval order and scores are unset.
    """

    chunk_id: str
    score: float | None


@dataclass(frozen=True)
class RerankRequest:
    query: str
    candidates: tuple[tuple[str, str], ...]  # (chunk_id, text)

    def validate(self) -> None:
        if not self.query.strip():
            raise InvalidRequestError("rerank query is empty")
        if not self.candidates:
            raise InvalidRequestError("rerank request has no candidates")
        ids = [cid for cid, _ in self.candidates]
        if len(set(ids)) != len(ids):
            raise InvalidRequestError("duplicate candidate ids in rerank request")


@runtime_checkable
class RerankProvider(Protocol):
    name: str

    def score_pairs(self, query: str, texts: Sequence[str]) -> list[float]: ...


class LexicalOverlapReranker:
    """Deterministic lexical relevance scorer.

    score(Q, T) = |tokens(Q) ∩ tokens(T)| / |tokens(Q)| over sets of
    lowercased word-punct tokens: the fraction of query terms the candidate
    covers, in [0, 1], zero when the query has no tokens. Normalizing by the
    query side only keeps the score length-neutral across candidates, so a
    tiny fragment sharing one common word cannot outrank a full passage
    covering the query's rare terms.
    """

    name = "lexical-overlap"

    def __init__(self) -> None:
        self._tokenizer = WordPunctTokenizer()

    def _token_set(self, text: str) -> frozenset[str]:
        lowered = text.lower()
        return frozenset(lowered[s:e] for s, e in self._tokenizer.token_spans(lowered))

    def score_pairs(self, query: str, texts: Sequence[str]) -> list[float]:
        q = self._token_set(query)
        scores = []
        for text in texts:
            if not q:
                scores.append(0.0)
                continue
            scores.append(len(q & self._token_set(text)) / len(q))
        return scores


class RemoteReranker:
    """Client for a remote cross-encoder service.

    Wire contract: ``POST {base_url}/rerank`` with ``{"query": str,
    "documents": [str, ...]}``; response ``{"scores": [float, ...]}``
    positionally aligned with the documents. Retries with exponential
    backoff, then raises ``ProviderUnavailableError``.
    """

    name = "remote"

    def __init__(
        self,
        base_url: str,
        *,
        timeout: float = 10.0,
        retries: int = 3,
        api_key_env: str | None = None,
        session: requests.Session | None = None,
    ) -> None:
        self._url = base_url.rstrip("/") + "/rerank"
        self._timeout = timeout
        self._retries = retries
        self._session = session if session is not None else requests.Session()
        self._headers = auth_headers(api_key_env)

    def score_pairs(self, query: str, texts: Sequence[str]) -> list[float]:
        payload = post_json(
            self._session, self._url, {"query": query, "documents": list(texts)},
            timeout=self._timeout, retries=self._retries, headers=self._headers,
        )
        try:
            scores = [float(s) for s in payload["scores"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderUnavailableError(f"malformed rerank response: {exc}") from exc
        if len(scores) != len(texts):
            raise ProviderUnavailableError(
                f"rerank response has {len(scores)} scores for {len(texts)} documents"
            )
        return scores


def rerank(
    provider: RerankProvider,
    request: RerankRequest,
    *,
    fallback: str = FALLBACK_ERROR,
    mix_lambda: float = 0.0,
    sentence_bonus: Mapping[str, float] | None = None,
) -> list[ScoredCandidate]:
    """Score all candidates as one batch and sort them.

    Returns a permutation of the request's candidates ordered by (score
    descending, chunk id ascending); nothing is dropped or invented. When
    ``mix_lambda`` is nonzero, each score is mixed with
    ``mix_lambda * sentence_bonus[chunk_id]`` (an aggregated similarity
    signal from contained sentence chunks; default off). On provider
    failure, ``fallback`` selects between propagating the error and passing
    candidates through in request order with scores unset.
    """
    request.validate()
    if fallback not in (FALLBACK_ERROR, FALLBACK_PASSTHROUGH):
        raise InvalidInputError(f"unknown rerank fallback {fallback!r}")
    try:
        scores = provider.score_pairs(request.query, [text for _, text in request.candidates])
    except ProviderUnavailableError:
        if fallback == FALLBACK_ERROR:
            raise
        return [ScoredCandidate(cid, None) for cid, _ in request.candidates]
    if len(scores) != len(request.candidates):
        raise ProviderUnavailableError(
            f"provider {provider.name!r} returned {len(scores)} scores "
            f"for {len(request.candidates)} candidates"
        )
    if mix_lambda != 0.0:
        bonus = sentence_bonus or {}
        scores = [
            s + mix_lambda * bonus.get(cid, 0.0)
            for s, (cid, _) in zip(scores, request.candidates)
        ]
    ranked = [
        ScoredCandidate(cid, float(score))
        for (cid, _), score in zip(request.candidates, scores)
    ]
    ranked.sort(key=lambda c: (-c.score, c.chunk_id))
    return ranked


def top_k(reranked: Sequence[ScoredCandidate], k: int) -> list[ScoredCandidate]:
    """First min(k, len) candidates, order preserved."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    return list(reranked[:k])
