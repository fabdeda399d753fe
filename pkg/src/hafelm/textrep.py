"""Tokenized documents to dense vectors by mean-pooling pretrained word vectors."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .errors import DataError, EmptyDocumentError, EmptyInputError, ParseError

_EDGE_PUNCT = string.punctuation


@dataclass(frozen=True)
class WordVectorTable:
    """Token to vector map; all vectors share one dimension.

    duplicates counts input rows dropped because their token appeared earlier.
    """

    dim: int
    entries: dict[str, np.ndarray]
    duplicates: int = 0

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Document:
    tokens: tuple[str, ...]
    label: Optional[str] = None


def load_word_vectors(path) -> WordVectorTable:
    """Parse the plain-text word-vector format.

    An optional first line of two integers (count, dim) is skipped. Every
    other line is a token followed by whitespace-separated reals; the first
    vector row fixes the dimension. Duplicate tokens keep the first row.
    """
    entries: dict[str, np.ndarray] = {}
    duplicates = 0
    dim: Optional[int] = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if lineno == 1 and len(fields) == 2 and _both_ints(fields):
                continue
            token, raw = fields[0], fields[1:]
            if dim is None:
                if not raw:
                    raise ParseError(f"token {token!r} has no vector components", line=lineno)
                dim = len(raw)
            if len(raw) != dim:
                raise ParseError(f"expected {dim} components, got {len(raw)}", line=lineno)
            try:
                vec = np.array([float(v) for v in raw], dtype=np.float64)
            except ValueError:
                raise ParseError("non-numeric vector component", line=lineno) from None
            if token in entries:
                duplicates += 1
                continue
            vec.flags.writeable = False
            entries[token] = vec
    if dim is None:
        raise EmptyInputError(f"{path}: no word vectors found")
    return WordVectorTable(dim=dim, entries=entries, duplicates=duplicates)


def _both_ints(fields: Sequence[str]) -> bool:
    try:
        int(fields[0]), int(fields[1])
    except ValueError:
        return False
    return True


def tokenize(text: str) -> Document:
    """Lowercase, split on whitespace, strip edge ASCII punctuation, drop empties."""
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_PUNCT)
        if tok:
            tokens.append(tok)
    return Document(tokens=tuple(tokens))


def oov_tokens(doc: Document, table: WordVectorTable) -> list[str]:
    """Tokens of the document missing from the vocabulary, in order."""
    return [t for t in doc.tokens if t not in table.entries]


def doc_vector(doc: Document, table: WordVectorTable) -> np.ndarray:
    """Arithmetic mean of the in-vocabulary token vectors.

    Out-of-vocabulary tokens are skipped; the divisor is the in-vocabulary
    token count. Repeated tokens contribute once per occurrence.
    """
    found = [table.entries[t] for t in doc.tokens if t in table.entries]
    if not found:
        oov = oov_tokens(doc, table)
        raise EmptyDocumentError(
            f"no token of the document is in the vocabulary ({len(oov)} unknown)",
            oov_tokens=oov)
    return np.mean(found, axis=0)


def corpus_to_dataset(docs: Sequence[Document], table: WordVectorTable) -> Dataset:
    """Vectorize labeled documents into a Dataset; d = table.dim, order preserved."""
    if not docs:
        raise EmptyInputError("empty corpus")
    features = np.empty((len(docs), table.dim), dtype=np.float64)
    name_to_index: dict[str, int] = {}
    labels = np.empty(len(docs), dtype=np.int64)
    for i, doc in enumerate(docs):
        if doc.label is None:
            raise DataError(f"document {i} has no label")
        try:
            features[i] = doc_vector(doc, table)
        except EmptyDocumentError as exc:
            raise EmptyDocumentError(f"document {i}: {exc}", oov_tokens=exc.oov_tokens) from None
        if doc.label not in name_to_index:
            name_to_index[doc.label] = len(name_to_index)
        labels[i] = name_to_index[doc.label]
    return Dataset(features, labels, m=len(name_to_index), class_names=tuple(name_to_index))


def load_corpus(path) -> list[Document]:
    """Read one document per line: label<TAB>text."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if "\t" not in line:
                raise ParseError("expected label<TAB>text", line=lineno)
            label, text = line.split("\t", 1)
            docs.append(Document(tokens=tokenize(text).tokens, label=label.strip()))
    if not docs:
        raise EmptyInputError(f"{path}: no documents")
    return docs
