"""Ingestion of pre-parsed corpora into a uniform document/sentence/token model.

Input is already segmented, tagged, and dependency parsed. Two formats are
supported:

* ``conllu``: one token per line with tab-separated columns
  ID, FORM, LEMMA, UPOS, HEAD, DEPREL; a blank line ends a sentence and a
  line ``# doc_id = X`` starts a new document.
* ``jsonl``: one document per line,
  ``{"doc_id": str, "sentences": [[{token fields}, ...], ...]}``.

Sentences that violate the parse invariants (missing root, dangling head,
non-contiguous ids) are dropped and counted in the corpus ``source_meta``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError, EmptyCorpusError

TOKEN_FIELDS = ("index", "surface", "lemma", "pos", "head", "deprel")


@dataclass(frozen=True)
class Token:
    index: int  # 1-based position in the sentence
    surface: str
    lemma: str
    pos: str
    head: int  # governor index, 0 = root
    deprel: str


@dataclass(frozen=True)
class ParsedSentence:
    tokens: tuple[Token, ...]
    doc_id: str
    sent_index: int

    def __len__(self) -> int:
        return len(self.tokens)

    def content_key(self) -> tuple:
        """Parse content without positional identity, for dedup and hashing."""
        return tuple(
            (t.index, t.surface, t.lemma, t.pos, t.head, t.deprel) for t in self.tokens
        )

    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[ParsedSentence, ...]


@dataclass(frozen=True)
class ParsedCorpus:
    documents: tuple[Document, ...]
    source_meta: dict = field(default_factory=dict)

    def iter_sentences(self) -> Iterator[ParsedSentence]:
        for doc in self.documents:
            yield from doc.sentences

    @property
    def n_sentences(self) -> int:
        return sum(len(d.sentences) for d in self.documents)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.iter_sentences())


def validate_sentence(tokens: Iterable[Token]) -> str | None:
    """Return None if the token list forms a valid parse, else a reason."""
    toks = list(tokens)
    if not toks:
        return "empty sentence"
    n = len(toks)
    roots = 0
    for i, t in enumerate(toks):
        if t.index != i + 1:
            return f"non-contiguous token index {t.index} at position {i + 1}"
        if not t.deprel:
            return f"empty deprel at token {t.index}"
        if t.head == t.index:
            return f"self-headed token {t.index}"
        if not 0 <= t.head <= n:
            return f"head {t.head} out of bounds at token {t.index}"
        if t.head == 0:
            roots += 1
    if roots != 1:
        return f"expected exactly one root, found {roots}"
    return None


def _sentence_from_rows(rows: list[tuple], doc_id: str, sent_index: int) -> ParsedSentence | None:
    try:
        tokens = tuple(
            Token(int(ix), str(form), str(lemma), str(pos), int(head), str(rel))
            for ix, form, lemma, pos, head, rel in rows
        )
    except (TypeError, ValueError):
        return None
    if validate_sentence(tokens) is not None:
        return None
    return ParsedSentence(tokens=tokens, doc_id=doc_id, sent_index=sent_index)


def _load_conllu(path: Path) -> tuple[list[Document], int, int]:
    documents: list[Document] = []
    seen_ids: set[str] = set()
    dropped_sentences = 0
    dropped_documents = 0

    doc_id: str | None = None  # None until the first "# doc_id" header
    sentences: list[ParsedSentence] = []
    rows: list[tuple] = []
    row_error = False

    def effective_doc_id() -> str:
        # content before any header gets an auto-assigned id
        return doc_id if doc_id is not None else f"doc{len(documents) + 1}"

    def end_sentence():
        nonlocal rows, row_error, dropped_sentences
        if rows or row_error:
            sent = None if row_error else _sentence_from_rows(
                rows, effective_doc_id(), len(sentences)
            )
            if sent is None:
                dropped_sentences += 1
            else:
                sentences.append(sent)
        rows = []
        row_error = False

    def end_document():
        nonlocal sentences, dropped_documents
        end_sentence()
        if sentences:
            did = effective_doc_id()
            if did in seen_ids:
                dropped_documents += 1
            else:
                seen_ids.add(did)
                documents.append(Document(doc_id=did, sentences=tuple(sentences)))
        sentences = []

    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# doc_id"):
                end_document()
                doc_id = line.split("=", 1)[1].strip() if "=" in line else ""
                continue
            if line.startswith("#"):
                continue
            if not line.strip():
                end_sentence()
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                row_error = True
                continue
            rows.append(tuple(parts))

    end_document()
    return documents, dropped_sentences, dropped_documents


def _load_jsonl(path: Path) -> tuple[list[Document], int, int]:
    documents: list[Document] = []
    seen_ids: set[str] = set()
    dropped_sentences = 0
    dropped_documents = 0

    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc_id = str(obj["doc_id"])
                raw_sents = obj["sentences"]
            except (json.JSONDecodeError, KeyError, TypeError):
                dropped_documents += 1
                continue
            if not isinstance(raw_sents, list):
                dropped_documents += 1
                continue
            if doc_id in seen_ids:
                dropped_documents += 1
                continue
            sentences = []
            for raw in raw_sents:
                rows = []
                try:
                    for tok in raw:
                        rows.append(tuple(tok[f] for f in TOKEN_FIELDS))
                except (KeyError, TypeError):
                    dropped_sentences += 1
                    continue
                sent = _sentence_from_rows(rows, doc_id, len(sentences))
                if sent is None:
                    dropped_sentences += 1
                else:
                    sentences.append(sent)
            if sentences:
                seen_ids.add(doc_id)
                documents.append(Document(doc_id=doc_id, sentences=tuple(sentences)))
    return documents, dropped_sentences, dropped_documents


def load_corpus(path: str | Path, format: str = "conllu") -> ParsedCorpus:
    """Load a parsed corpus file, dropping and counting malformed sentences.

    Raises DataError if the path is unreadable or the format is unknown, and
    EmptyCorpusError if no valid sentence survives.
    """
    path = Path(path)
    if format == "conllu":
        loader = _load_conllu
    elif format == "jsonl":
        loader = _load_jsonl
    else:
        raise DataError(f"unsupported corpus format {format!r}")
    try:
        documents, dropped_sentences, dropped_documents = loader(path)
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path}: {exc}") from exc

    if not any(doc.sentences for doc in documents):
        raise EmptyCorpusError(f"no valid sentences in {path}")

    meta = {
        "path": str(path),
        "format": format,
        "documents": len(documents),
        "sentences": sum(len(d.sentences) for d in documents),
        "dropped_sentences": dropped_sentences,
        "dropped_documents": dropped_documents,
    }
    return ParsedCorpus(documents=tuple(documents), source_meta=meta)


def save_corpus(corpus: ParsedCorpus, path: str | Path) -> None:
    """Serialize to the jsonl format. load(save(x)) is a fixed point of load."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            obj = {
                "doc_id": doc.doc_id,
                "sentences": [
                    [
                        {
                            "index": t.index,
                            "surface": t.surface,
                            "lemma": t.lemma,
                            "pos": t.pos,
                            "head": t.head,
                            "deprel": t.deprel,
                        }
                        for t in sent.tokens
                    ]
                    for sent in doc.sentences
                ],
            }
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def clean_document(
    raw_sentences: list[ParsedSentence],
    min_tokens: int = 2,
    max_tokens: int = 200,
) -> list[ParsedSentence]:
    """Drop consecutive duplicate sentences and out-of-bounds lengths.

    Order is preserved and surviving sentences are reindexed contiguously,
    which makes the operation idempotent.
    """
    kept: list[ParsedSentence] = []
    prev_key = None
    for sent in raw_sentences:
        key = sent.content_key()
        if key == prev_key:
            continue
        prev_key = key
        if not min_tokens <= len(sent) <= max_tokens:
            continue
        kept.append(sent)
    return [
        s if s.sent_index == i else ParsedSentence(s.tokens, s.doc_id, i)
        for i, s in enumerate(kept)
    ]


def document_hash(doc: Document) -> str:
    h = hashlib.sha256()
    for sent in doc.sentences:
        h.update(repr(sent.content_key()).encode("utf-8"))
    return h.hexdigest()


def clean_corpus(
    corpus: ParsedCorpus,
    min_tokens: int = 2,
    max_tokens: int = 200,
) -> ParsedCorpus:
    """Whole-document hash dedup plus per-document sentence cleaning."""
    seen_hashes: set[str] = set()
    documents: list[Document] = []
    dropped_docs = 0
    for doc in corpus.documents:
        h = document_hash(doc)
        if h in seen_hashes:
            dropped_docs += 1
            continue
        seen_hashes.add(h)
        cleaned = clean_document(list(doc.sentences), min_tokens, max_tokens)
        if not cleaned:
            dropped_docs += 1
            continue
        documents.append(Document(doc_id=doc.doc_id, sentences=tuple(cleaned)))
    meta = dict(corpus.source_meta)
    meta["cleaned"] = True
    meta["dropped_duplicate_or_empty_documents"] = dropped_docs
    return ParsedCorpus(documents=tuple(documents), source_meta=meta)
