"""Deterministic feature vectors for sentences, documents, decoder state, options.

These stand in for learned encoders: fixed-length real vectors computed
from surface statistics. Identical inputs always give identical vectors.
"""

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Document
from .rouge import DEFAULT_STOPWORDS
from .rules import CompressionOption, RuleId

SENTENCE_FEATURE_DIM = 6
DOC_FEATURE_DIM = 2 * SENTENCE_FEATURE_DIM + 1   # mean + max + log length
STATE_DIM = SENTENCE_FEATURE_DIM + 2             # step fraction + mean + coverage
DECODER_INPUT_DIM = STATE_DIM + DOC_FEATURE_DIM
OPTION_FEATURE_DIM = len(RuleId) + 5 + SENTENCE_FEATURE_DIM

_RULE_INDEX = {rule: i for i, rule in enumerate(RuleId)}


class DocumentContext:
    """Per-document cache of token statistics and feature matrices."""

    def __init__(self, doc: Document):
        self.doc = doc
        self.lowered = [tuple(t.text.lower() for t in tree.tokens)
                        for tree in doc.sentences]
        self.sentence_types = [set(toks) for toks in self.lowered]
        self.doc_types = set().union(*self.sentence_types)
        self.doc_counts = Counter(tok for sent in self.lowered for tok in sent)
        n = len(doc.sentences)
        feats = np.zeros((n, SENTENCE_FEATURE_DIM), dtype=np.float64)
        for i, tokens in enumerate(self.lowered):
            raw = doc.sentences[i].token_texts
            feats[i, 0] = i / n
            feats[i, 1] = math.log1p(len(tokens))
            feats[i, 2] = len(self.sentence_types[i]) / len(self.doc_types)
            feats[i, 3] = sum(tok in DEFAULT_STOPWORDS for tok in tokens) / len(tokens)
            feats[i, 4] = sum(1 for j, tok in enumerate(raw)
                              if j > 0 and tok[:1].isupper()) / len(tokens)
            feats[i, 5] = 1.0 if i < 3 else 0.0
        self.sentence_features = feats
        self.document_features = np.concatenate(
            [feats.mean(axis=0), feats.max(axis=0), [math.log1p(n)]])


def _context(doc) -> DocumentContext:
    return doc if isinstance(doc, DocumentContext) else DocumentContext(doc)


def featurize_sentence(doc, i: int) -> np.ndarray:
    """Features of sentence i: position, log length, vocabulary coverage,
    stopword fraction, capitalized-token fraction, lead-3 indicator."""
    ctx = _context(doc)
    return ctx.sentence_features[i].copy()


def featurize_document(doc) -> np.ndarray:
    """Mean and max of sentence features plus log sentence count."""
    return _context(doc).document_features.copy()


@dataclass(frozen=True, eq=False)
class DecoderState:
    """Summary-so-far state: selected prefix plus its feature vector."""

    selected: tuple[int, ...]
    k: int
    vector: np.ndarray


def initial_state(k: int) -> DecoderState:
    if k < 1:
        raise ValueError("k must be >= 1")
    return DecoderState(selected=(), k=k, vector=np.zeros(STATE_DIM, dtype=np.float64))


def advance_state(ctx: DocumentContext, state: DecoderState, picked: int) -> DecoderState:
    """Recompute the state after selecting another sentence."""
    selected = state.selected + (picked,)
    mean = ctx.sentence_features[list(selected)].mean(axis=0)
    covered = set().union(*(ctx.sentence_types[i] for i in selected))
    coverage = len(covered) / len(ctx.doc_types)
    vector = np.concatenate([[len(selected) / state.k], mean, [coverage]])
    return DecoderState(selected=selected, k=state.k, vector=vector)


def featurize_option(
    doc,
    sent_index: int,
    option: CompressionOption,
    state: DecoderState,
) -> np.ndarray:
    """Features of a compression option in the context of the summary so far."""
    ctx = _context(doc)
    tokens = ctx.lowered[sent_index]
    span = option.span
    span_tokens = tokens[span.start:span.end]
    span_counts = Counter(span_tokens)
    summary_types: set[str] = set()
    if state.selected:
        summary_types = set().union(*(ctx.sentence_types[i] for i in state.selected))

    feats = np.zeros(OPTION_FEATURE_DIM, dtype=np.float64)
    feats[_RULE_INDEX[option.rule]] = 1.0
    base = len(RuleId)
    feats[base + 0] = math.log1p(len(span_tokens))
    feats[base + 1] = span.start / len(tokens)
    feats[base + 2] = sum(ctx.doc_counts[t] > span_counts[t] for t in span_tokens) / len(span_tokens)
    feats[base + 3] = sum(t in summary_types for t in span_tokens) / len(span_tokens)
    feats[base + 4] = sum(t in DEFAULT_STOPWORDS for t in span_tokens) / len(span_tokens)
    feats[base + 5:] = ctx.sentence_features[sent_index]
    return feats
