"""Matching functions and checks of their algebraic laws."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, Iterable, Mapping, Optional

from ..relcore import ObjectSet, SimilarityFactStore, Value

MF_KINDS = ("max-numeric", "union-objectset", "table-driven")
CLOSURE_BUDGET = 10_000


class ClosureBudgetExceeded(Exception):
    pass


class MissingTableEntry(KeyError):
    pass


def _as_number(v):
    try:
        return int(v)
    except (TypeError, ValueError):
        return float(v)


def lift(v: Value, key: str) -> ObjectSet:
    if v is None:
        return ObjectSet()
    if isinstance(v, ObjectSet):
        return v
    return ObjectSet({key: v})


def union_values(v1: Value, v2: Value, key: str = "value") -> Value:
    """Key-wise union; atomic values are lifted under `key`."""
    if v1 == v2:
        return v1
    if v1 is None:
        return v2
    if v2 is None:
        return v1
    return lift(v1, key).union(lift(v2, key))


@dataclass(frozen=True)
class MatchingFunctionDef:
    domain_tag: str
    kind: str
    table: Optional[Mapping] = field(default=None, hash=False, compare=False)
    key: Optional[str] = None

    def __post_init__(self):
        if self.kind not in MF_KINDS:
            raise ValueError(f"unknown matching function kind {self.kind!r}")
        if self.kind == "table-driven" and self.table is None:
            raise ValueError("a table-driven matching function needs a table")

    def merge(self, a: Value, b: Value) -> Value:
        if self.kind == "union-objectset":
            return union_values(a, b, self.key or self.domain_tag)
        if a == b:
            return a
        if a is None:
            return b
        if b is None:
            return a
        if self.kind == "max-numeric":
            return a if _as_number(a) >= _as_number(b) else b
        if (a, b) in self.table:
            return self.table[(a, b)]
        if (b, a) in self.table:
            return self.table[(b, a)]
        raise MissingTableEntry(f"{self.domain_tag}: no entry for ({a}, {b})")

    __call__ = merge

    def leq(self, a: Value, b: Value) -> bool:
        return a == b or a is None or (b is not None and self.merge(a, b) == b)


def table_mf(domain_tag: str, entries: Mapping) -> MatchingFunctionDef:
    return MatchingFunctionDef(domain_tag, "table-driven", dict(entries))


def subset_lattice_mf(domain_tag: str, prefix: str, atoms: Iterable[str]) -> MatchingFunctionDef:
    """Table MF over names prefix+digits where joining means uniting the
    digit sets, e.g. b12 with b3 gives b123."""
    atoms = sorted(atoms)
    names = []
    for mask in range(1, 1 << len(atoms)):
        names.append("".join(a for i, a in enumerate(atoms) if mask >> i & 1))
    table = {}
    for x, y in product(names, repeat=2):
        joined = "".join(sorted(set(x) | set(y), key=atoms.index))
        table[(prefix + x, prefix + y)] = prefix + joined
    return table_mf(domain_tag, table)


def closure(mf: MatchingFunctionDef, sample: Iterable[Value], budget: int = CLOSURE_BUDGET) -> list:
    vals = list(dict.fromkeys(sample))
    seen = set(vals)
    frontier = list(vals)
    while frontier:
        new = []
        for a in frontier:
            for b in list(vals):
                c = mf.merge(a, b)
                if c not in seen:
                    seen.add(c)
                    new.append(c)
                    if len(seen) > budget:
                        raise ClosureBudgetExceeded(f"{mf.domain_tag}: closure exceeds {budget} values")
        vals.extend(new)
        frontier = new
    return vals


def check_mf_laws(mf: MatchingFunctionDef, sample_domain: Iterable[Value], budget: int = CLOSURE_BUDGET) -> bool:
    """Idempotence, commutativity, associativity and a <= m(a, b) on the
    closure of the sample."""
    try:
        dom = closure(mf, sample_domain, budget)
    except MissingTableEntry:
        return False
    m = mf.merge
    try:
        for a in dom:
            if m(a, a) != a:
                return False
        for a, b in product(dom, repeat=2):
            ab = m(a, b)
            if ab != m(b, a):
                return False
            if m(a, ab) != ab:
                return False
        for a, b, c in product(dom, repeat=3):
            if m(m(a, b), c) != m(a, m(b, c)):
                return False
    except MissingTableEntry:
        return False
    return True


def is_similarity_preserving(mf: MatchingFunctionDef, sims: SimilarityFactStore, sample_domain: Iterable[Value],
                             budget: int = CLOSURE_BUDGET) -> bool:
    """a ~ a' implies a ~ m(a', a'') for every a'' in the closure.

    Similarity is reflexive, so a = a' is a premise too: merging must keep
    a value similar to what it merges into.
    """
    dom = closure(mf, sample_domain, budget)
    tag = mf.domain_tag
    for a, a2 in product(dom, repeat=2):
        if not sims.similar(tag, a, a2):
            continue
        for a3 in dom:
            if not sims.similar(tag, a, mf.merge(a2, a3)):
                return False
    return True


class MFRegistry(dict):
    """Mapping domain tag -> MatchingFunctionDef."""

    def add(self, mf: MatchingFunctionDef):
        self[mf.domain_tag] = mf
        return self

    @classmethod
    def of(cls, *mfs):
        reg = cls()
        for mf in mfs:
            reg.add(mf)
        return reg
