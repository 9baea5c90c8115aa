"""String similarity kernels and materialization of similarity facts."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence

from .relcore import Instance, SimilarityFactStore, active_domain

FUNCTIONS = ("jaro-winkler", "tfidf-cosine", "levenshtein", "equality")
DEFAULT_THRESHOLDS = {"jaro-winkler": 0.8, "tfidf-cosine": 0.6, "levenshtein": 0.75, "equality": 1.0}


def _jaro(s1: str, s2: str) -> float:
    if not s1 or not s2:
        return 0.0
    window = max(max(len(s1), len(s2)) // 2 - 1, 0)
    flags2 = [False] * len(s2)
    matched1 = []
    for i, ch in enumerate(s1):
        lo, hi = max(0, i - window), min(len(s2), i + window + 1)
        for j in range(lo, hi):
            if not flags2[j] and s2[j] == ch:
                flags2[j] = True
                matched1.append(ch)
                break
    m = len(matched1)
    if m == 0:
        return 0.0
    matched2 = [s2[j] for j in range(len(s2)) if flags2[j]]
    # transpositions are counted as whole pairs, rounding an odd count down
    t = sum(a != b for a, b in zip(matched1, matched2)) // 2
    return (m / len(s1) + m / len(s2) + (m - t) / m) / 3


def jaro(s1: str, s2: str) -> float:
    # greedy matching is not order-free on every input, so fix the order
    a, b = sorted((s1, s2))
    return _jaro(a, b)


def jaro_winkler(s1: str, s2: str, p: float = 0.1, max_prefix: int = 4) -> float:
    j = jaro(s1, s2)
    prefix = 0
    for a, b in zip(s1[:max_prefix], s2[:max_prefix]):
        if a != b:
            break
        prefix += 1
    return min(1.0, j + prefix * p * (1 - j))


def edit_distance(s1: str, s2: str) -> int:
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    prev = list(range(len(s2) + 1))
    for i, c1 in enumerate(s1, 1):
        cur = [i]
        for j, c2 in enumerate(s2, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (c1 != c2)))
        prev = cur
    return prev[-1]


def levenshtein_sim(s1: str, s2: str) -> float:
    longest = max(len(s1), len(s2))
    if longest == 0:
        return 1.0
    return 1.0 - edit_distance(s1, s2) / longest


_NON_WORD = re.compile(r"[^\w]+")


def tokenize(text: str) -> list:
    return _NON_WORD.sub(" ", text.lower()).split()


@dataclass
class CorpusStats:
    document_count: int = 0
    token_document_frequency: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_documents(cls, docs: Iterable[Sequence[str]]) -> "CorpusStats":
        n, df = 0, Counter()
        for d in docs:
            n += 1
            df.update(set(d))
        return cls(n, dict(df))

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "CorpusStats":
        return cls.from_documents(tokenize(t) for t in texts)

    def idf(self, token: str) -> float:
        f = self.token_document_frequency.get(token)
        if not f:
            return 0.0
        return math.log(self.document_count / f)


def _tfidf(doc: Sequence[str], stats: CorpusStats) -> Dict[str, float]:
    counts = Counter(doc)
    return {tok: (c / len(doc)) * stats.idf(tok) for tok, c in counts.items()}


def tfidf_cosine(doc1: Sequence[str], doc2: Sequence[str], stats: CorpusStats) -> float:
    if not doc1 or not doc2:
        return 0.0
    if Counter(doc1) == Counter(doc2):
        # same bag of tokens: the cosine is 1 even when every idf vanishes
        return 1.0
    v1, v2 = _tfidf(doc1, stats), _tfidf(doc2, stats)
    dot = sum(w * v2.get(t, 0.0) for t, w in v1.items())
    n1 = math.sqrt(sum(w * w for w in v1.values()))
    n2 = math.sqrt(sum(w * w for w in v2.values()))
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    return max(0.0, min(1.0, dot / (n1 * n2)))


def similarity(function: str, a, b, stats: Optional[CorpusStats] = None) -> float:
    """Score two values with a named function; Null scores 0."""
    if a is None or b is None:
        return 0.0
    a, b = str(a), str(b)
    if function == "jaro-winkler":
        return jaro_winkler(a, b)
    if function == "levenshtein":
        return levenshtein_sim(a, b)
    if function == "equality":
        return 1.0 if a == b else 0.0
    if function == "tfidf-cosine":
        if stats is None:
            stats = CorpusStats.from_texts([a, b])
        return tfidf_cosine(tokenize(a), tokenize(b), stats)
    raise ValueError(f"unknown similarity function {function!r}")


@dataclass(frozen=True)
class AttributeSimilarity:
    function: str
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.function not in FUNCTIONS:
            raise ValueError(f"unknown similarity function {self.function!r}")
        t = self.threshold
        if t is None:
            object.__setattr__(self, "threshold", DEFAULT_THRESHOLDS[self.function])
        elif self.function == "equality":
            object.__setattr__(self, "threshold", 1.0)
        elif not 0.0 <= t <= 1.01:
            raise ValueError(f"threshold {t} outside [0, 1]")


class SimilarityConfig(dict):
    """Mapping attribute-domain tag -> AttributeSimilarity."""

    @classmethod
    def of(cls, **spec):
        cfg = cls()
        for tag, val in spec.items():
            if isinstance(val, str):
                val = AttributeSimilarity(val)
            elif isinstance(val, tuple):
                val = AttributeSimilarity(*val)
            cfg[tag] = val
        return cfg


def corpus_for(inst: Instance, tag: str) -> CorpusStats:
    """Document statistics over every non-null cell of one domain."""
    docs = []
    for name, tuples in inst.relations.items():
        sch = inst.schemas[name]
        positions = [p for p in range(1, sch.arity) if sch.tag(p) == tag]
        for t in tuples:
            for p in positions:
                v = t.at(p)
                if v is not None:
                    docs.append(tokenize(str(v)))
    return CorpusStats.from_documents(docs)


def materialize_sim_facts(inst: Instance, cfg: Mapping[str, AttributeSimilarity],
                          base: Optional[SimilarityFactStore] = None) -> SimilarityFactStore:
    dom = active_domain(inst)
    facts = []
    for tag in sorted(cfg):
        spec = cfg[tag]
        if spec.function == "equality":
            continue
        values = sorted(str(v) for v in dom.get(tag, ()))
        stats = corpus_for(inst, tag) if spec.function == "tfidf-cosine" else None
        if stats is not None:
            toks = {v: tokenize(v) for v in values}
        for i, a in enumerate(values):
            for b in values[i + 1:]:
                if stats is not None:
                    s = tfidf_cosine(toks[a], toks[b], stats)
                else:
                    s = similarity(spec.function, a, b)
                if s >= spec.threshold:
                    facts.append((tag, a, b))
    if base is not None:
        return base.with_facts(facts)
    return SimilarityFactStore(facts)
