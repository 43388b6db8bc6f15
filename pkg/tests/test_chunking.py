"""Chunker behavior: budgets, nesting, partitions, determinism."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrr.chunking import ChunkingConfig, build_corpus, chunk_document
from hrr.corpus import Corpus, Level, validate_corpus
from hrr.errors import ConfigError, EmptyDocumentError
from hrr.tokens import WordPunctTokenizer

TOK = WordPunctTokenizer()


def doc_of_sentences(n_sentences: int, words_per_sentence: int = 7) -> str:
    """Each sentence is words_per_sentence words plus a period."""
    sents = []
    word = 0
    for _ in range(n_sentences):
        body = " ".join(f"word{word + j}" for j in range(words_per_sentence))
        sents.append(body.capitalize() + ".")
        word += words_per_sentence
    return " ".join(sents)


def levels_of(fragment):
    out = {level: [] for level in Level}
    for node in fragment.nodes:
        out[node.level].append(node)
    out[Level.SUB_INTERMEDIATE] = list(fragment.sub_nodes)
    return out


class TestDerivedSizes:
    def test_5000_token_doc_splits_2048_2048_904(self):
        # 625 sentences x (7 words + period) = 5000 tokens; 2048 = 256 * 8
        text = doc_of_sentences(625)
        assert TOK.count_tokens(text) == 5000  # brute-force oracle for the premise
        fragment = chunk_document("d", text, ChunkingConfig())
        parents = levels_of(fragment)[Level.PARENT]
        assert [p.token_count for p in parents] == [2048, 2048, 904]
        assert sum(p.token_count for p in parents) == 5000

    def test_small_doc_single_parent_single_intermediate(self):
        text = doc_of_sentences(12)  # 96 tokens
        fragment = chunk_document("d", text, ChunkingConfig())
        by_level = levels_of(fragment)
        assert len(by_level[Level.PARENT]) == 1
        assert len(by_level[Level.INTERMEDIATE]) == 1
        assert len(by_level[Level.SENTENCE]) == 12

    def test_600_token_sentence_hard_splits(self):
        text = " ".join(f"w{i}" for i in range(600))  # one 600-token "sentence"
        fragment = chunk_document("d", text, ChunkingConfig())
        by_level = levels_of(fragment)
        assert len(by_level[Level.PARENT]) == 1
        inters = by_level[Level.INTERMEDIATE]
        # the 400-token splitter cap yields fragments of 400 + 200 tokens
        assert [i.token_count for i in inters] == [400, 200]
        assert all(i.token_count <= 512 for i in inters)
        assert all(i.hard_split for i in inters)
        # each intermediate holds exactly one sentence fragment
        sentences = by_level[Level.SENTENCE]
        assert len(sentences) == 2
        assert {s.parent_id for s in sentences} == {i.id for i in inters}


class TestErrors:
    def test_empty_document(self):
        with pytest.raises(EmptyDocumentError):
            chunk_document("d", "", ChunkingConfig())

    def test_whitespace_only(self):
        with pytest.raises(EmptyDocumentError):
            chunk_document("d", "  \n\n  ", ChunkingConfig())

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(parent_size=100, intermediate_size=100),
            dict(parent_overlap=-1),
            dict(intermediate_size=10, intermediate_overlap=10, parent_size=50),
            dict(sub_intermediate_size=512),
            dict(parent_size=0, intermediate_size=0),
        ],
    )
    def test_bad_config(self, kwargs):
        with pytest.raises(ConfigError):
            ChunkingConfig(**kwargs).validate()


class TestHardSplitFlagging:
    def test_pathological_token_becomes_own_chunk(self):
        # 60 single-char tokens with a tiny parent budget force mid-sentence cuts
        text = " ".join("x" * 1 for _ in range(60))
        cfg = ChunkingConfig(
            parent_size=10, intermediate_size=4, sub_intermediate_size=None,
            max_sentence_tokens=400,
        )
        fragment = chunk_document("d", text, cfg)
        by_level = levels_of(fragment)
        assert all(p.token_count <= 10 for p in by_level[Level.PARENT])
        assert all(i.token_count <= 4 for i in by_level[Level.INTERMEDIATE])
        assert any(n.hard_split for n in fragment.nodes)
        # nothing truncated: parents reassemble the source
        corpus = Corpus({"d": text}, fragment.nodes, config=cfg)
        assert validate_corpus(corpus) == []

    def test_giant_single_token_is_kept_and_flagged(self):
        text = "start. " + "y" * 5000 + " more words follow. The end."
        cfg = ChunkingConfig(parent_size=12, intermediate_size=6, sub_intermediate_size=None)
        fragment = chunk_document("d", text, cfg)
        giant = [n for n in fragment.nodes if "y" * 5000 in _text(fragment, n, text)]
        assert giant, "giant token must survive chunking"
        corpus = Corpus({"d": text}, fragment.nodes, fragment.sub_nodes, config=cfg)
        assert validate_corpus(corpus) == []


def _text(fragment, node, text):
    start, end = node.char_span
    return text.encode("utf-8")[start:end].decode("utf-8")


class TestOverlap:
    def test_overlap_extends_spans_but_keeps_ownership(self):
        text = doc_of_sentences(30)  # 240 tokens
        cfg = ChunkingConfig(
            parent_size=80, parent_overlap=16, intermediate_size=40,
            sub_intermediate_size=None,
        )
        fragment = chunk_document("d", text, cfg)
        parents = levels_of(fragment)[Level.PARENT]
        assert len(parents) >= 2
        # second parent's span reaches left of the first parent's end
        assert parents[1].char_span[0] < parents[0].char_span[1]
        assert all(p.token_count <= 80 for p in parents)
        # every sentence still has exactly one parent chain
        sentences = levels_of(fragment)[Level.SENTENCE]
        inter_ids = {i.id for i in levels_of(fragment)[Level.INTERMEDIATE]}
        assert all(s.parent_id in inter_ids for s in sentences)

    def test_zero_overlap_partitions(self):
        text = doc_of_sentences(30)
        fragment = chunk_document("d", text, ChunkingConfig(parent_size=80, intermediate_size=40, sub_intermediate_size=None))
        parents = levels_of(fragment)[Level.PARENT]
        for prev, nxt in zip(parents, parents[1:]):
            assert prev.char_span[1] == nxt.char_span[0]


def random_document(rng: random.Random, target_tokens: int) -> str:
    """Messy but realistic text: varied sentence lengths, unicode, digits."""
    vocab = [
        "alpha", "beta", "gamma", "delta", "Ωmega", "résumé", "data", "value",
        "system", "42", "piece", "топор", "grid", "flow", "note", "chart",
    ]
    out = []
    tokens = 0
    while tokens < target_tokens:
        n = rng.randint(1, 18)
        words = [rng.choice(vocab) for _ in range(n)]
        terminator = rng.choice([".", "!", "?", ".", "."])
        sentence = " ".join(words).capitalize() + terminator
        out.append(sentence)
        out.append("\n\n" if rng.random() < 0.1 else " ")
        tokens += n + 1
    return "".join(out).strip()


class TestInvariantsFuzzed:
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_partition_budget_roundtrip(self, seed):
        rng = random.Random(seed)
        text = random_document(rng, rng.randint(10, 2000))
        cfg = ChunkingConfig(
            parent_size=rng.choice([64, 128, 256]),
            intermediate_size=rng.choice([16, 32]),
            sub_intermediate_size=rng.choice([8, None]),
        )
        corpus = build_corpus({"doc": text}, cfg)
        assert validate_corpus(corpus) == []
        # validate_corpus covers partitions, budgets, and token sums; spot-check
        # the document-level reassembly here as an independent assertion
        parents = [n for n in corpus.nodes if n.level is Level.PARENT]
        joined = b"".join(
            corpus.document_bytes("doc")[n.char_span[0] : n.char_span[1]] for n in parents
        )
        assert joined == text.encode("utf-8")

    def test_determinism(self):
        rng = random.Random(7)
        text = random_document(rng, 500)
        a = chunk_document("d", text, ChunkingConfig(parent_size=64, intermediate_size=16, sub_intermediate_size=8))
        b = chunk_document("d", text, ChunkingConfig(parent_size=64, intermediate_size=16, sub_intermediate_size=8))
        assert a == b


class TestMonotoneNesting:
    def test_children_follow_text_order(self):
        text = doc_of_sentences(40)
        corpus = build_corpus({"d": text}, ChunkingConfig(parent_size=64, intermediate_size=24, sub_intermediate_size=None))
        for parent_id, child_ids in corpus.children.items():
            spans = [corpus.chunks[c].char_span for c in child_ids]
            assert spans == sorted(spans)
