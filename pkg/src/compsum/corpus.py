"""JSONL corpus ingestion and serialization.

One JSON object per line: {"id", "sentences": [{"tokens", "parse"}],
"reference": [[token, ...], ...]}. Token lists must agree with the parse
leaves (after bracket unescaping) or the record is rejected with a warning;
remaining records still load.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .treebank import BRACKET_ESCAPE, BRACKET_UNESCAPE, ParseError, SentenceTree, parse_ptb, to_ptb

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[SentenceTree, ...]
    reference: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self):
        if not self.sentences:
            raise ValueError(f"document {self.id!r} has no sentences")

    @property
    def reference_tokens(self) -> list[str]:
        return [tok for sent in self.reference for tok in sent]


def _unescape(tokens: Iterable[str]) -> tuple[str, ...]:
    return tuple(BRACKET_UNESCAPE.get(tok, tok) for tok in tokens)


def load_corpus(path) -> Iterator[Document]:
    """Stream documents from a JSONL file, skipping invalid records with a warning."""
    path = Path(path)
    count = 0
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                logger.warning("line %d: malformed JSON (%s); record skipped", lineno, exc)
                continue
            try:
                doc = document_from_record(record)
            except (KeyError, TypeError, ValueError) as exc:
                doc_id = record.get("id", "?") if isinstance(record, dict) else "?"
                logger.warning("line %d: document %s rejected: %s", lineno, doc_id, exc)
                continue
            count += 1
            yield doc
    if count == 0:
        logger.warning("no documents loaded from %s", path)


def document_from_record(record: dict) -> Document:
    doc_id = record["id"]
    sentences = []
    for i, sent in enumerate(record["sentences"]):
        try:
            tree = parse_ptb(sent["parse"])
        except ParseError as exc:
            raise ValueError(f"sentence {i}: {exc}") from exc
        tokens = _unescape(sent["tokens"])
        if tree.token_texts != tokens:
            raise ValueError(
                f"document {doc_id!r} sentence {i}: token list does not match parse leaves")
        sentences.append(tree)
    reference = tuple(_unescape(sent) for sent in record.get("reference", []))
    return Document(id=str(doc_id), sentences=tuple(sentences), reference=reference)


def document_to_record(doc: Document) -> dict:
    """Inverse of document_from_record; escapes bracket tokens on the way out."""
    return {
        "id": doc.id,
        "sentences": [
            {"tokens": [BRACKET_ESCAPE.get(t, t) for t in tree.token_texts],
             "parse": to_ptb(tree)}
            for tree in doc.sentences
        ],
        "reference": [[BRACKET_ESCAPE.get(t, t) for t in sent] for sent in doc.reference],
    }


def write_corpus(path, docs: Iterable[Document]) -> int:
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for doc in docs:
            handle.write(json.dumps(document_to_record(doc)) + "\n")
            count += 1
    return count
