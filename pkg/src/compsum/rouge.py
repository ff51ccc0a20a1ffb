"""Token-level ROUGE-1/2/L and the fast approximate score used in search.

All metrics operate on pre-tokenized sequences. Preprocessing (lowercase,
stopword removal, stemming) is a separate, explicit step so the metric
functions themselves stay pure.
"""

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Sequence

from .stemming import stem

# Standard embedded English stopword list; configurable per call site.
DEFAULT_STOPWORDS = frozenset("""
i me my myself we our ours ourselves you you're you've you'll you'd your
yours yourself yourselves he him his himself she she's her hers herself it
it's its itself they them their theirs themselves what which who whom this
that that'll these those am is are was were be been being have has had
having do does did doing a an the and but if or because as until while of
at by for with about against between into through during before after
above below to from up down in out on off over under again further then
once here there when where why how all any both each few more most other
some such no nor not only own same so than too very s t can will just don
don't should should've now d ll m o re ve y ain aren aren't couldn
couldn't didn didn't doesn doesn't hadn hadn't hasn hasn't haven haven't
isn isn't ma mightn mightn't mustn mustn't needn needn't shan shan't
shouldn shouldn't wasn wasn't weren weren't won won't wouldn wouldn't
""".split())


def is_punctuation(token: str) -> bool:
    """True for tokens with no alphanumeric content."""
    return not any(ch.isalnum() for ch in token)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


_ZERO = RougeScore(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PreprocessConfig:
    lowercase: bool = True
    remove_stopwords: bool = False
    stem: bool = False
    stopword_list: frozenset = field(default=DEFAULT_STOPWORDS)

    def __post_init__(self):
        if self.remove_stopwords and not self.stopword_list:
            raise ValueError("remove_stopwords requires a non-empty stopword list")


# Configuration used for oracle construction and label derivation.
ORACLE_PREPROCESS = PreprocessConfig(lowercase=True, remove_stopwords=True, stem=True)


def preprocess_tokens(tokens: Sequence[str], cfg: PreprocessConfig) -> list[str]:
    """Lowercase, drop stopwords (and pure punctuation), then stem, in that order."""
    out = list(tokens)
    if cfg.lowercase:
        out = [tok.lower() for tok in out]
    if cfg.remove_stopwords:
        out = [tok for tok in out
               if tok not in cfg.stopword_list and not is_punctuation(tok)]
    if cfg.stem:
        out = [stem(tok) for tok in out]
    return out


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(candidate: Sequence[str], references: Sequence[Sequence[str]], n: int) -> RougeScore:
    """Clipped n-gram overlap against one or more references.

    Per n-gram the match count is min(candidate count, max reference count).
    Recall is computed over the total n-gram count summed across references.
    """
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    cand_counts = _ngram_counts(candidate, n)
    ref_counts = [_ngram_counts(ref, n) for ref in references]
    cand_total = sum(cand_counts.values())
    ref_total = sum(sum(rc.values()) for rc in ref_counts)
    if cand_total == 0 or ref_total == 0:
        return _ZERO
    matches = 0
    for gram, count in cand_counts.items():
        best = max((rc[gram] for rc in ref_counts), default=0)
        matches += min(count, best)
    precision = matches / cand_total
    recall = matches / ref_total
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    row = [0] * (len(b) + 1)
    for x in a:
        prev = 0
        for j, y in enumerate(b, start=1):
            cur = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = cur
    return row[len(b)]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Longest-common-subsequence F1 over flattened token sequences."""
    if not candidate or not reference:
        return _ZERO
    lcs = _lcs_length(candidate, reference)
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return RougeScore(precision, recall, _f1(precision, recall))


def approx_oracle_score(
    candidate: Sequence[str],
    reference: Sequence[str],
    cfg: PreprocessConfig = ORACLE_PREPROCESS,
) -> float:
    """Mean of unigram and bigram F1 after stopword removal and stemming.

    The stopword/stem flags are forced on (the list and lowercasing come
    from cfg); this is the cheap stand-in for full ROUGE during search.
    """
    effective = replace(cfg, remove_stopwords=True, stem=True)
    cand = preprocess_tokens(candidate, effective)
    ref = preprocess_tokens(reference, effective)
    return approx_score_pretokenized(cand, ref)


def approx_score_pretokenized(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """approx_oracle_score for inputs that are already preprocessed."""
    refs = [reference]
    return 0.5 * (rouge_n(candidate, refs, 1).f1 + rouge_n(candidate, refs, 2).f1)
