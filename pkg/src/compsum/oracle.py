"""Extractive oracle construction and compression-label derivation.

A beam search over sentence subsets maximizes the approximate overlap score
of the selected sentences against the reference; the final beam supplies
the training oracles. Each compression option then gets a context-free
KEEP/DEL label by re-scoring the sentence with just that option deleted.
"""

import enum
import json
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Document
from .rouge import ORACLE_PREPROCESS, PreprocessConfig, approx_score_pretokenized, preprocess_tokens
from .rules import CompressionOption, extract_options, normalize_options
from .treebank import SentenceTree

logger = logging.getLogger(__name__)

_EXHAUSTIVE_GUARD = 10 ** 6


@dataclass(frozen=True)
class OracleConfig:
    k: int = 3
    beam_width: int = 8
    max_sents: int = 30
    m: int = 5

    def __post_init__(self):
        if not (1 <= self.k <= self.max_sents):
            raise ValueError(f"k={self.k} must satisfy 1 <= k <= max_sents={self.max_sents}")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.m > self.beam_width:
            raise ValueError(f"m={self.m} must not exceed beam_width={self.beam_width}")


@dataclass(frozen=True)
class OracleCandidate:
    """A scored sentence subset; indices sorted by individual salience, descending."""

    sentence_indices: tuple[int, ...]
    score: float


class CompressionLabel(enum.Enum):
    KEEP = "KEEP"
    DEL = "DEL"


@dataclass(frozen=True)
class LabeledOption:
    option: CompressionOption
    r_before: float
    r_after: float
    label: CompressionLabel

    @property
    def ratio(self) -> float:
        if self.r_before == 0.0:
            return math.inf if self.r_after > 0.0 else 1.0
        return self.r_after / self.r_before


class CompressabilityBucket(enum.Enum):
    BAD = "BAD"                        # ratio <= 1.00
    WEAK_POSITIVE = "WEAK_POSITIVE"    # 1.00 < ratio <= 1.05
    STRONG_POSITIVE = "STRONG_POSITIVE"  # ratio > 1.05


def bucket_of(labeled: LabeledOption) -> CompressabilityBucket:
    ratio = labeled.ratio
    if ratio <= 1.0:
        return CompressabilityBucket.BAD
    if ratio <= 1.05:
        return CompressabilityBucket.WEAK_POSITIVE
    return CompressabilityBucket.STRONG_POSITIVE


def _prepare(doc: Document, cfg_n: int, reference: Sequence[str],
             preprocess: PreprocessConfig):
    n = min(cfg_n, len(doc.sentences))
    sent_pre = [preprocess_tokens(tree.token_texts, preprocess)
                for tree in doc.sentences[:n]]
    ref_pre = preprocess_tokens(reference, preprocess)
    return n, sent_pre, ref_pre


def _subset_score(indices: Sequence[int], sent_pre, ref_pre) -> float:
    tokens: list[str] = []
    for i in indices:
        tokens.extend(sent_pre[i])
    return approx_score_pretokenized(tokens, ref_pre)


def _salience_order(indices: Iterable[int], individual: Sequence[float]) -> tuple[int, ...]:
    return tuple(sorted(indices, key=lambda i: (-individual[i], i)))


def beam_search_oracle(
    doc: Document,
    reference: Sequence[str],
    cfg: OracleConfig,
    preprocess: PreprocessConfig = ORACLE_PREPROCESS,
) -> list[OracleCandidate]:
    """Final beam of scored k-subsets, best first.

    Each of k rounds extends every beam state with every unused sentence
    among the first max_sents, scores the concatenation, and keeps the top
    beam_width states. Ties prefer the lexicographically smaller index set.
    """
    effective = PreprocessConfig(
        lowercase=preprocess.lowercase, remove_stopwords=True, stem=True,
        stopword_list=preprocess.stopword_list)
    n, sent_pre, ref_pre = _prepare(doc, cfg.max_sents, reference, effective)
    if n < cfg.k:
        raise ValueError(
            f"document {doc.id!r} has {n} scoreable sentences but k={cfg.k}")
    individual = [_subset_score((i,), sent_pre, ref_pre) for i in range(n)]
    beam: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
    for _ in range(cfg.k):
        seen: set[tuple[int, ...]] = set()
        scored: list[tuple[tuple[int, ...], float]] = []
        for indices, _score in beam:
            used = set(indices)
            for i in range(n):
                if i in used:
                    continue
                extended = tuple(sorted((*indices, i)))
                if extended in seen:
                    continue
                seen.add(extended)
                scored.append((extended, _subset_score(extended, sent_pre, ref_pre)))
        scored.sort(key=lambda item: (-item[1], item[0]))
        beam = scored[:cfg.beam_width]
    return [OracleCandidate(_salience_order(indices, individual), score)
            for indices, score in beam]


def exhaustive_oracle(
    doc: Document,
    reference: Sequence[str],
    k: int,
    max_sents: int = 30,
    preprocess: PreprocessConfig = ORACLE_PREPROCESS,
) -> OracleCandidate:
    """True argmax over all k-subsets; guards against combinatorial blowup."""
    effective = PreprocessConfig(
        lowercase=preprocess.lowercase, remove_stopwords=True, stem=True,
        stopword_list=preprocess.stopword_list)
    n, sent_pre, ref_pre = _prepare(doc, max_sents, reference, effective)
    if n < k:
        raise ValueError(f"document {doc.id!r} has {n} scoreable sentences but k={k}")
    total = math.comb(n, k)
    if total > _EXHAUSTIVE_GUARD:
        raise ValueError(
            f"C({n},{k}) = {total} subsets exceeds the exhaustive-search guard "
            f"of {_EXHAUSTIVE_GUARD}")
    individual = [_subset_score((i,), sent_pre, ref_pre) for i in range(n)]
    best: tuple[int, ...] | None = None
    best_score = -1.0
    for indices in combinations(range(n), k):
        score = _subset_score(indices, sent_pre, ref_pre)
        if score > best_score:
            best, best_score = indices, score
    assert best is not None
    return OracleCandidate(_salience_order(best, individual), best_score)


def label_compressions(
    sentence: SentenceTree,
    options: Sequence[CompressionOption],
    reference: Sequence[str],
    cfg: PreprocessConfig = ORACLE_PREPROCESS,
) -> list[LabeledOption]:
    """Context-free KEEP/DEL labels: DEL iff deleting the option alone helps.

    Every option is scored independently with all other options untouched.
    """
    effective = PreprocessConfig(
        lowercase=cfg.lowercase, remove_stopwords=True, stem=True,
        stopword_list=cfg.stopword_list)
    texts = sentence.token_texts
    ref_pre = preprocess_tokens(reference, effective)
    r_before = approx_score_pretokenized(preprocess_tokens(texts, effective), ref_pre)
    labeled = []
    for option in options:
        survivors = list(texts[:option.span.start]) + list(texts[option.span.end:])
        r_after = approx_score_pretokenized(preprocess_tokens(survivors, effective), ref_pre)
        label = CompressionLabel.DEL if r_after > r_before else CompressionLabel.KEEP
        labeled.append(LabeledOption(option, r_before, r_after, label))
    return labeled


def select_training_oracles(beam: Sequence[OracleCandidate], m: int) -> list[OracleCandidate]:
    """Top min(m, len(beam)) candidates by score, deterministically ordered."""
    if not beam:
        raise ValueError("empty beam")
    ordered = sorted(beam, key=lambda c: (-c.score, tuple(sorted(c.sentence_indices))))
    return ordered[:min(m, len(ordered))]


def compressability_report(
    labeled: Iterable[LabeledOption],
) -> dict[CompressabilityBucket, float]:
    """Percentage of options per bucket; percentages sum to 100."""
    counts = {bucket: 0 for bucket in CompressabilityBucket}
    total = 0
    for item in labeled:
        counts[bucket_of(item)] += 1
        total += 1
    if total == 0:
        raise ValueError("empty corpus: no labeled options")
    return {bucket: 100.0 * count / total for bucket, count in counts.items()}


@dataclass(frozen=True)
class DocumentOracles:
    """Cached oracle output for one document."""

    doc_id: str
    candidates: tuple[OracleCandidate, ...]
    labels: tuple[tuple[LabeledOption, ...], ...]  # per sentence

    def all_labeled(self) -> list[LabeledOption]:
        return [item for sent in self.labels for item in sent]


def build_document_oracles(
    doc: Document,
    cfg: OracleConfig,
    preprocess: PreprocessConfig = ORACLE_PREPROCESS,
) -> DocumentOracles:
    if not doc.reference:
        raise ValueError(f"document {doc.id!r} has no reference summary")
    reference = doc.reference_tokens
    beam = beam_search_oracle(doc, reference, cfg, preprocess)
    candidates = tuple(select_training_oracles(beam, cfg.m))
    labels = []
    for tree in doc.sentences:
        options = normalize_options(extract_options(tree), len(tree.tokens))
        labels.append(tuple(label_compressions(tree, options, reference, preprocess)))
    return DocumentOracles(doc_id=doc.id, candidates=candidates, labels=tuple(labels))


def oracle_record(oracles: DocumentOracles) -> dict:
    return {
        "doc_id": oracles.doc_id,
        "oracles": [
            {"indices": list(c.sentence_indices), "score": c.score}
            for c in oracles.candidates
        ],
        "labels": [
            [
                {"start": lab.option.span.start, "end": lab.option.span.end,
                 "rule": lab.option.rule.value, "r_before": lab.r_before,
                 "r_after": lab.r_after, "label": lab.label.value}
                for lab in sent
            ]
            for sent in oracles.labels
        ],
    }


def write_oracle_cache(path, entries: Iterable[DocumentOracles]) -> int:
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for entry in entries:
            handle.write(json.dumps(oracle_record(entry)) + "\n")
            count += 1
    return count


def read_oracle_cache(path, documents: Mapping[str, Document]) -> list[DocumentOracles]:
    """Load a cache file, re-deriving full option objects from the corpus.

    Options are re-extracted from the parse trees and joined to the cached
    labels by (span, rule); any mismatch means the cache does not belong to
    this corpus and is an error.
    """
    path = Path(path)
    entries = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            doc_id = record["doc_id"]
            if doc_id not in documents:
                raise ValueError(f"line {lineno}: document {doc_id!r} not in corpus")
            doc = documents[doc_id]
            if len(record["labels"]) != len(doc.sentences):
                raise ValueError(
                    f"document {doc_id!r}: cache has {len(record['labels'])} sentences, "
                    f"corpus has {len(doc.sentences)}")
            candidates = tuple(
                OracleCandidate(tuple(entry["indices"]), float(entry["score"]))
                for entry in record["oracles"])
            labels = []
            for sent_index, cached in enumerate(record["labels"]):
                tree = doc.sentences[sent_index]
                options = normalize_options(extract_options(tree), len(tree.tokens))
                by_key = {(opt.span.start, opt.span.end, opt.rule.value): opt
                          for opt in options}
                sent_labels = []
                for item in cached:
                    key = (item["start"], item["end"], item["rule"])
                    if key not in by_key:
                        raise ValueError(
                            f"document {doc_id!r} sentence {sent_index}: cached option "
                            f"{key} not produced by the rules; stale cache?")
                    sent_labels.append(LabeledOption(
                        option=by_key[key],
                        r_before=float(item["r_before"]),
                        r_after=float(item["r_after"]),
                        label=CompressionLabel(item["label"])))
                labels.append(tuple(sent_labels))
            entries.append(DocumentOracles(doc_id, candidates, tuple(labels)))
    return entries
