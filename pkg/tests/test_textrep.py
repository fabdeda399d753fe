import numpy as np
import pytest
from hypothesis import given, strategies as st

from hafelm.errors import DataError, EmptyDocumentError, EmptyInputError, ParseError
from hafelm.textrep import (
    Document,
    WordVectorTable,
    corpus_to_dataset,
    doc_vector,
    load_corpus,
    load_word_vectors,
    oov_tokens,
    tokenize,
)


def write(tmp_path, text, name="vectors.txt"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def table(**vecs):
    dim = len(next(iter(vecs.values())))
    return WordVectorTable(dim=dim, entries={k: np.asarray(v, float) for k, v in vecs.items()})


class TestLoadWordVectors:
    def test_with_header(self, tmp_path):
        t = load_word_vectors(write(tmp_path, "2 3\na 1 0 0\nb 0 1 0\n"))
        assert t.dim == 3 and len(t) == 2
        np.testing.assert_array_equal(t.entries["a"], [1.0, 0.0, 0.0])

    def test_without_header(self, tmp_path):
        t = load_word_vectors(write(tmp_path, "a 1 0 0\nb 0 1 0\n"))
        assert t.dim == 3 and len(t) == 2

    def test_inconsistent_row_names_line(self, tmp_path):
        with pytest.raises(ParseError, match="line 4"):
            load_word_vectors(write(tmp_path, "2 3\na 1 0 0\nb 0 1 0\nc 1 2\n"))

    def test_duplicates_keep_first(self, tmp_path):
        t = load_word_vectors(write(tmp_path, "a 1 0\nb 0 1\na 9 9\n"))
        assert t.duplicates == 1
        np.testing.assert_array_equal(t.entries["a"], [1.0, 0.0])

    def test_non_numeric_component(self, tmp_path):
        with pytest.raises(ParseError, match="line 2"):
            load_word_vectors(write(tmp_path, "a 1 0\nb x 1\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyInputError):
            load_word_vectors(write(tmp_path, ""))


class TestTokenize:
    def test_punctuation_and_case(self):
        assert tokenize("The cat, the hat.").tokens == ("the", "cat", "the", "hat")

    def test_empty_text(self):
        assert tokenize("").tokens == ()

    def test_unicode_and_inner_punctuation(self):
        assert tokenize("état 3.14").tokens == ("état", "3.14")

    def test_pure_punctuation_dropped(self):
        assert tokenize("--- ... !?").tokens == ()

    @given(st.text(max_size=200))
    def test_tokens_never_empty_and_lowercase(self, text):
        doc = tokenize(text)
        for tok in doc.tokens:
            assert tok
            assert tok == tok.lower()

    @given(st.text(max_size=200))
    def test_deterministic(self, text):
        assert tokenize(text) == tokenize(text)


class TestDocVector:
    def test_single_token(self):
        t = table(a=(1.0, 0.0))
        np.testing.assert_array_equal(doc_vector(Document(("a",)), t), [1.0, 0.0])

    def test_mean_of_two(self):
        t = table(a=(1.0, 0.0), b=(0.0, 1.0))
        np.testing.assert_allclose(doc_vector(Document(("a", "b")), t), [0.5, 0.5])

    def test_oov_skipped_and_counted(self):
        t = table(a=(1.0, 0.0), b=(0.0, 1.0))
        doc = Document(("a", "zzz", "b"))
        np.testing.assert_allclose(doc_vector(doc, t), [0.5, 0.5])
        assert oov_tokens(doc, t) == ["zzz"]

    def test_all_oov_raises_with_token_list(self):
        t = table(a=(1.0, 0.0))
        with pytest.raises(EmptyDocumentError) as exc:
            doc_vector(Document(("x", "y")), t)
        assert exc.value.oov_tokens == ["x", "y"]

    def test_multiplicity(self):
        t = table(a=(1.0, 0.0), b=(0.0, 1.0))
        out = doc_vector(Document(("a", "a", "b")), t)
        np.testing.assert_allclose(out, [2.0 / 3.0, 1.0 / 3.0])

    def test_permutation_invariance(self):
        t = table(a=(1.0, 2.0), b=(-1.0, 0.5), c=(3.0, 3.0))
        v1 = doc_vector(Document(("a", "b", "c")), t)
        v2 = doc_vector(Document(("c", "a", "b")), t)
        np.testing.assert_allclose(v1, v2)

    @given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=12))
    def test_mean_containment(self, tokens):
        t = table(a=(1.0, -2.0, 0.0), b=(-1.0, 0.5, 2.0), c=(3.0, 3.0, -1.0))
        out = doc_vector(Document(tuple(tokens)), t)
        used = np.array([t.entries[tok] for tok in tokens])
        assert np.all(out >= used.min(axis=0) - 1e-12)
        assert np.all(out <= used.max(axis=0) + 1e-12)


class TestCorpusToDataset:
    def test_composition(self):
        t = table(a=(1.0, 0.0, 0.0), b=(0.0, 1.0, 0.0))
        docs = [Document(("a",), label="x"), Document(("b",), label="y")]
        ds = corpus_to_dataset(docs, t)
        assert (ds.n, ds.d, ds.m) == (2, 3, 2)
        assert ds.class_names == ("x", "y")

    def test_oov_document_error_names_index(self):
        t = table(a=(1.0, 0.0))
        docs = [Document(("a",), label="x"), Document(("qq",), label="y")]
        with pytest.raises(EmptyDocumentError, match="document 1"):
            corpus_to_dataset(docs, t)

    def test_label_dedup(self):
        t = table(a=(1.0,), b=(2.0,))
        docs = [Document(("a",), label="sport"), Document(("b",), label="sport"),
                Document(("a",), label="politics")]
        ds = corpus_to_dataset(docs, t)
        assert ds.m == 2 and ds.labels.tolist() == [0, 0, 1]

    def test_unlabeled_document_rejected(self):
        t = table(a=(1.0,))
        with pytest.raises(DataError, match="document 0"):
            corpus_to_dataset([Document(("a",))], t)


class TestLoadCorpus:
    def test_reads_label_tab_text(self, tmp_path):
        p = write(tmp_path, "sport\tThe game was won.\npolitics\tA vote passed!\n", "c.tsv")
        docs = load_corpus(p)
        assert [d.label for d in docs] == ["sport", "politics"]
        assert docs[0].tokens == ("the", "game", "was", "won")

    def test_missing_tab_names_line(self, tmp_path):
        with pytest.raises(ParseError, match="line 1"):
            load_corpus(write(tmp_path, "no tab here\n", "c.tsv"))
