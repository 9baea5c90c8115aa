"""Merging classifier duplicates with MDs over fixed duplicate facts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Mapping, Optional, Sequence, Union

from .chase import ChaseResult, chase
from .mdlang.analysis import is_interaction_free
from .mdlang.mfs import MatchingFunctionDef, MFRegistry, union_values
from .mdlang.model import Atom, MatchDependency, SimAtom
from .relcore import Instance, RelationSchema, SimilarityFactStore, Value


@dataclass(frozen=True)
class DuplicatePairSet:
    relation: str
    pairs: frozenset

    def __contains__(self, pair):
        a, b = pair
        return (min(a, b), max(a, b)) in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self):
        return len(self.pairs)

    @classmethod
    def of(cls, relation: str, pairs: Iterable) -> "DuplicatePairSet":
        return cls(relation, frozenset((min(a, b), max(a, b)) for a, b in pairs if a != b))


def pairs_from_predictions(triples: Iterable, relation: str = "") -> DuplicatePairSet:
    keep = []
    for a, b, label in triples:
        if label not in (0, 1):
            raise ValueError(f"label {label!r} is not 0 or 1")
        if label == 1:
            keep.append((a, b))
    return DuplicatePairSet.of(relation, keep)


def union_mf(v1: Value, v2: Value, key: str = "value") -> Value:
    return union_values(v1, v2, key)


def _tail_positions(sch: RelationSchema) -> list:
    return [p for p in range(1, sch.arity) if sch.attributes[p].kind not in ("block-number", "reference-id")]


def rid_tag(relation: str) -> str:
    return f"{relation}.rid"


def merge_mds(sch: RelationSchema) -> List[MatchDependency]:
    """One rule per merged attribute: duplicates get identical values."""
    out = []
    for p in _tail_positions(sch):
        t1 = ["r1"] + [f"x{i}" for i in range(1, sch.arity)]
        t2 = ["r2"] + [f"y{i}" for i in range(1, sch.arity)]
        out.append(MatchDependency(
            f"merge_{sch.name}_{sch.attributes[p].name}",
            (Atom(sch.name, tuple(t1)), Atom(sch.name, tuple(t2))), (),
            (SimAtom(rid_tag(sch.name), "r1", "r2"),), (t1[p], t2[p])))
    return out


def union_mfs(schemas: Mapping[str, RelationSchema]) -> MFRegistry:
    reg = MFRegistry()
    for sch in schemas.values():
        for p in _tail_positions(sch):
            tag = sch.tag(p)
            if tag not in reg:
                reg.add(MatchingFunctionDef(tag, "union-objectset", key=sch.attributes[p].name))
    return reg


def is_merge_set_interaction_free(mds: Sequence[MatchDependency]) -> bool:
    return is_interaction_free(mds)


@dataclass
class MergeResult:
    resolved: Instance
    merged: Instance
    kept_rids: dict
    trace: list = field(default_factory=list)


def _tail(t, sch):
    return tuple(t.at(p) for p in _tail_positions(sch))


def merge(inst: Instance, dups: Union[DuplicatePairSet, Sequence[DuplicatePairSet]],
          mfs: Optional[Mapping] = None, budget: int = 100_000) -> MergeResult:
    """Chase the merge rules of every relation with duplicates, then keep the
    smallest rid among tuples with identical tails."""
    if isinstance(dups, DuplicatePairSet):
        dups = [dups]
    mfs = mfs if mfs is not None else union_mfs(inst.schemas)
    facts, mds = [], []
    for d in dups:
        sch = inst.schemas[d.relation]
        tids = set(inst.tids(d.relation))
        for a, b in d:
            if a not in tids or b not in tids:
                raise KeyError(f"duplicate pair ({a}, {b}) names a tid missing from {d.relation}")
            facts.append((rid_tag(d.relation), str(a), str(b)))
        if len(d):
            mds.extend(merge_mds(sch))
    res = chase(inst, mds, SimilarityFactStore(facts), mfs, budget=budget)
    merged = res.final
    keep = set()
    kept = {}
    for name, sch in merged.schemas.items():
        seen = {}
        for t in merged.tuples(name):
            seen.setdefault(_tail(t, sch), t.tid)
        kept[name] = sorted(seen.values())
        keep.update(seen.values())
    return MergeResult(merged.restrict(keep), merged, kept, res.trace)
