"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import pytest

from hrr.chunking import ChunkingConfig, build_corpus
from hrr.config import EngineConfig
from hrr.embedding import HashedBowEmbedder
from hrr.engine import context_for
from hrr.rerank import LexicalOverlapReranker

#: Three small documents with a planted rare-keyword sentence in each.
#: Token budgets below are chosen so each document yields two parents with
#: a few intermediates each, small enough to verify stages by hand.
TOY_DOCS = {
    "alpha": (
        "The annual budget review covers schools and roads. Committee members "
        "met on Monday morning. The zorblat fenwick grant supports village "
        "libraries. Final decisions arrive next month. Public comments stay "
        "open all spring. Road repairs begin in summer."
    ),
    "beta": (
        "Grain depots expanded across the district last year. Storage fees "
        "remain unchanged for members. Inspectors visit depots every winter. "
        "The quimbly raxon permit unlocks cold storage. Training sessions "
        "run through autumn. Depot staff attend safety courses."
    ),
    "gamma": (
        "Irrigation canals need seasonal maintenance. Water tariffs follow "
        "the published schedule. District officers inspect the gates monthly. "
        "Farmers report issues through the office. The velmor dastin scheme "
        "funds canal lining. Crews finish before the rains."
    ),
}

TOY_CHUNKING = ChunkingConfig(
    parent_size=40, intermediate_size=16, sub_intermediate_size=8
)


@pytest.fixture(scope="session")
def toy_corpus():
    return build_corpus(TOY_DOCS, TOY_CHUNKING)


@pytest.fixture(scope="session")
def toy_context(toy_corpus):
    config = EngineConfig(chunking=TOY_CHUNKING)
    return context_for(
        toy_corpus,
        config,
        embedder=HashedBowEmbedder(dimension=64),
        reranker=LexicalOverlapReranker(),
    )
