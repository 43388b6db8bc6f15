"""Hierarchy model, ancestor resolution, validation, and serialization."""

import pytest

from hrr.chunking import ChunkingConfig, build_corpus
from hrr.corpus import (
    ChunkNode,
    Corpus,
    Level,
    load_corpus,
    resolve_parent,
    save_corpus,
    validate_corpus,
)
from hrr.errors import LevelViolationError, SnapshotFormatError, UnknownChunkError

CFG = ChunkingConfig(parent_size=24, intermediate_size=10, sub_intermediate_size=5)


@pytest.fixture(scope="module")
def corpus():
    docs = {
        "a": "One two three four. Five six seven eight. Nine ten eleven. Twelve thirteen fourteen.",
        "b": "Short doc here. Another line follows. And a third one.",
    }
    return build_corpus(docs, CFG)


def _node(corpus, level, idx=0):
    return corpus.nodes_at(level)[idx]


class TestResolveParent:
    def test_sentence_to_parent(self, corpus):
        sentence = _node(corpus, Level.SENTENCE)
        inter = resolve_parent(corpus, sentence.id, Level.INTERMEDIATE)
        parent = resolve_parent(corpus, sentence.id, Level.PARENT)
        assert corpus.get(inter).level is Level.INTERMEDIATE
        assert corpus.get(parent).level is Level.PARENT
        # two hops agree with one
        assert resolve_parent(corpus, inter, Level.PARENT) == parent

    def test_identity(self, corpus):
        parent = _node(corpus, Level.PARENT)
        assert resolve_parent(corpus, parent.id, Level.PARENT) == parent.id

    def test_downward_is_violation(self, corpus):
        inter = _node(corpus, Level.INTERMEDIATE)
        with pytest.raises(LevelViolationError):
            resolve_parent(corpus, inter.id, Level.SENTENCE)

    def test_unknown_chunk(self, corpus):
        with pytest.raises(UnknownChunkError):
            resolve_parent(corpus, "nope:p0", Level.PARENT)

    def test_sub_chunk_to_parent(self, corpus):
        sub = corpus.sub_nodes[0]
        parent = resolve_parent(corpus, sub.id, Level.PARENT)
        assert corpus.get(parent).level is Level.PARENT

    def test_sentence_cannot_reach_sub_tier(self, corpus):
        sentence = _node(corpus, Level.SENTENCE)
        with pytest.raises(LevelViolationError):
            resolve_parent(corpus, sentence.id, Level.SUB_INTERMEDIATE)

    def test_two_hop_equals_one_hop_for_all_sentences(self, corpus):
        for node in corpus.nodes_at(Level.SENTENCE):
            via = resolve_parent(
                corpus, resolve_parent(corpus, node.id, Level.INTERMEDIATE), Level.PARENT
            )
            assert via == resolve_parent(corpus, node.id, Level.PARENT)


class TestValidateCorpus:
    def test_chunker_output_is_clean(self, corpus):
        assert validate_corpus(corpus) == []

    def test_pure_function(self, corpus):
        assert validate_corpus(corpus) == validate_corpus(corpus)

    def test_hierarchy_skip(self):
        doc = {"d": "alpha beta"}
        nodes = [
            ChunkNode("d:p0", Level.PARENT, "d", None, (0, 10), 2),
            ChunkNode("d:p0.i0", Level.INTERMEDIATE, "d", "d:p0", (0, 10), 2),
            # sentence wired straight to the parent-level node
            ChunkNode("d:p0.i0.s0", Level.SENTENCE, "d", "d:p0", (0, 10), 2),
        ]
        bad = Corpus(doc, nodes, config=CFG)
        rules = [v.rule for v in validate_corpus(bad)]
        assert "HierarchySkip" in rules

    def test_duplicate_id(self):
        doc = {"d": "alpha beta"}
        nodes = [
            ChunkNode("d:p0", Level.PARENT, "d", None, (0, 10), 2),
            ChunkNode("d:p0", Level.PARENT, "d", None, (0, 10), 2),
        ]
        bad = Corpus(doc, nodes, config=CFG)
        assert "DuplicateId" in [v.rule for v in validate_corpus(bad)]

    def test_dangling_parent(self):
        doc = {"d": "alpha beta"}
        nodes = [
            ChunkNode("d:p0", Level.PARENT, "d", None, (0, 10), 2),
            ChunkNode("d:p0.i0", Level.INTERMEDIATE, "d", "d:p9", (0, 10), 2),
        ]
        bad = Corpus(doc, nodes, config=CFG)
        assert "DanglingParent" in [v.rule for v in validate_corpus(bad)]

    def test_budget_and_drift(self):
        doc = {"d": "one two three four five six seven eight nine ten eleven twelve"}
        nodes = [ChunkNode("d:p0", Level.PARENT, "d", None, (0, len(doc["d"])), 3)]
        bad = Corpus(doc, nodes, config=ChunkingConfig(parent_size=5, intermediate_size=2))
        rules = [v.rule for v in validate_corpus(bad)]
        assert "TokenCountDrift" in rules and "BudgetExceeded" in rules

    def test_coverage_gap(self):
        doc = {"d": "abcdef ghijkl"}
        nodes = [ChunkNode("d:p0", Level.PARENT, "d", None, (0, 6), 1)]
        bad = Corpus(doc, nodes, config=CFG)
        assert "CoverageGap" in [v.rule for v in validate_corpus(bad)]

    def test_span_out_of_bounds(self):
        doc = {"d": "tiny"}
        nodes = [ChunkNode("d:p0", Level.PARENT, "d", None, (0, 99), 1)]
        bad = Corpus(doc, nodes, config=CFG)
        assert [v.rule for v in validate_corpus(bad)] == ["SpanOutOfBounds", "CoverageGap"]


class TestRoundTrip:
    def test_parents_reassemble_document(self, corpus):
        for doc_id, text in corpus.documents.items():
            parents = [
                n for n in corpus.nodes if n.level is Level.PARENT and n.doc_id == doc_id
            ]
            joined = b"".join(
                corpus.document_bytes(doc_id)[n.char_span[0] : n.char_span[1]]
                for n in parents
            )
            assert joined == text.encode("utf-8")

    def test_multibyte_spans_decode(self):
        docs = {"u": "Überall läuft code. Çok güzel çalışıyor. Ça va très bien."}
        c = build_corpus(docs, CFG)
        assert validate_corpus(c) == []
        for node in c.nodes:
            assert c.chunk_text(node.id)  # every span decodes cleanly


class TestSerialization:
    def test_round_trip(self, corpus, tmp_path):
        save_corpus(corpus, tmp_path)
        loaded = load_corpus(tmp_path)
        assert loaded.documents == corpus.documents
        assert loaded.nodes == corpus.nodes
        assert loaded.sub_nodes == corpus.sub_nodes
        assert loaded.config == corpus.config
        assert validate_corpus(loaded) == []

    def test_rewrite_is_byte_identical(self, corpus, tmp_path):
        save_corpus(corpus, tmp_path / "one")
        save_corpus(corpus, tmp_path / "two")
        for name in ("documents.jsonl", "chunks.jsonl"):
            assert (tmp_path / "one" / name).read_bytes() == (
                tmp_path / "two" / name
            ).read_bytes()

    def test_optional_text_field(self, corpus, tmp_path):
        save_corpus(corpus, tmp_path, include_text=True)
        lines = (tmp_path / "chunks.jsonl").read_text().splitlines()
        import json

        rec = json.loads(lines[1])
        assert rec["text"] == corpus.chunk_text(rec["id"])

    def test_bad_header_rejected(self, corpus, tmp_path):
        save_corpus(corpus, tmp_path)
        chunks = tmp_path / "chunks.jsonl"
        lines = chunks.read_text().splitlines()
        lines[0] = '{"format":"other","version":9}'
        chunks.write_text("\n".join(lines) + "\n")
        with pytest.raises(SnapshotFormatError):
            load_corpus(tmp_path)
