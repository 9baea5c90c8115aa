"""Blocking: block-number rules enforced by the chase, key-equality blocking
and candidate pair generation."""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .chase import ChaseResult, chase
from .mdlang.mfs import MatchingFunctionDef, MFRegistry
from .mdlang.model import EQ, Atom, MatchDependency, SimAtom
from .relcore import Instance, RelationSchema, SimilarityFactStore

MODES = ("SB", "MDSB", "MDCB")


class BlockingError(Exception):
    pass


class NonBlockRhs(BlockingError):
    pass


class SimilarityOnBlock(BlockingError):
    pass


def block_mf(i, j):
    """The larger block number wins."""
    return i if int(i) >= int(j) else j


def block_mfs(schemas: Mapping[str, RelationSchema]) -> MFRegistry:
    reg = MFRegistry()
    for sch in schemas.values():
        if sch.block_position is not None:
            reg.add(MatchingFunctionDef(sch.tag(sch.block_position), "max-numeric"))
    return reg


def validate_blocking_md(md: MatchDependency, schemas: Mapping[str, RelationSchema]):
    for k, (i, p) in enumerate(md.identity_positions()):
        sch = schemas.get(md.leading[i].relation)
        if sch is None or sch.attributes[p].kind != "block-number":
            raise NonBlockRhs(f"{md.name}: identity variable {md.identity[k]} is not a block number")
    block_vars = set()
    for a in md.atoms:
        sch = schemas.get(a.relation)
        if sch is not None and sch.block_position is not None:
            block_vars.add(a.terms[sch.block_position])
    for s in md.sims:
        if not s.is_equality and (s.left in block_vars or s.right in block_vars):
            raise SimilarityOnBlock(f"{md.name}: block numbers may only be compared by equality")


class BlockAssignment(dict):
    """relation -> {tid: block number}."""

    def blocks(self, relation: str) -> List[frozenset]:
        groups: Dict[int, set] = {}
        for tid, bl in self.get(relation, {}).items():
            groups.setdefault(bl, set()).add(tid)
        return sorted((frozenset(g) for g in groups.values()), key=lambda g: min(g))

    def report(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["relation", "tid", "block"])
        for rel in sorted(self):
            for tid, bl in sorted(self[rel].items(), key=lambda kv: (kv[1], kv[0])):
                w.writerow([rel, tid, bl])
        return buf.getvalue()


def read_assignment(inst: Instance) -> BlockAssignment:
    out = BlockAssignment()
    for name, sch in sorted(inst.schemas.items()):
        bp = sch.block_position
        if bp is None:
            continue
        out[name] = {t.tid: int(t.at(bp)) for t in inst.tuples(name)}
    return out


def apply_blocking(inst: Instance, mds: Sequence[MatchDependency], sims: SimilarityFactStore,
                   budget: int = 100_000, pick=None) -> tuple:
    """Chase the blocking rules; returns (final instance, assignment, chase result)."""
    for md in mds:
        validate_blocking_md(md, inst.schemas)
    res = chase(inst, mds, sims, block_mfs(inst.schemas), budget=budget, pick=pick)
    return res.final, read_assignment(res.final), res


@dataclass(frozen=True)
class CandidatePairSet:
    relation: str
    pairs: frozenset

    @property
    def count(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair):
        a, b = pair
        return (min(a, b), max(a, b)) in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self):
        return len(self.pairs)


def candidate_pairs(assignment: Mapping[int, int], relation: str = "") -> CandidatePairSet:
    groups: Dict[int, list] = {}
    for tid, bl in assignment.items():
        groups.setdefault(bl, []).append(tid)
    pairs = set()
    for tids in groups.values():
        pairs.update(combinations(sorted(tids), 2))
    return CandidatePairSet(relation, frozenset(pairs))


def reduction_ratio(s: int, n: int) -> float:
    if n < 1:
        raise ValueError("record count must be positive")
    return 1.0 - s / (n * n)


def sb_blocking(inst: Instance, relation: str, key_attrs: Sequence[str]) -> Dict[int, int]:
    """Group tuples whose key attributes are all equal and non-null; each
    group is represented by its smallest tid."""
    if not key_attrs:
        raise BlockingError("standard blocking needs at least one key attribute")
    sch = inst.schemas[relation]
    positions = [sch.position(a) for a in key_attrs]
    for a, p in zip(key_attrs, positions):
        if sch.attributes[p].kind in ("block-number", "reference-id"):
            raise BlockingError(f"{a} cannot be a blocking key")
    groups: Dict[tuple, list] = {}
    out = {}
    for t in inst.tuples(relation):
        key = tuple(t.at(p) for p in positions)
        if any(v is None for v in key):
            out[t.tid] = t.tid
            continue
        groups.setdefault(key, []).append(t.tid)
    for tids in groups.values():
        rep = min(tids)
        for tid in tids:
            out[tid] = rep
    return dict(sorted(out.items()))


def mdsb_from_keys(sch: RelationSchema, key_attrs: Sequence[str], similar: Mapping[str, str] = None,
                   name: Optional[str] = None) -> MatchDependency:
    """Single-relation blocking rule from a key list: equal keys, except the
    attributes in `similar` (attribute -> domain tag) which only need to be
    similar."""
    similar = dict(similar or {})
    if sch.block_position is None:
        raise BlockingError(f"{sch.name} has no block-number attribute")
    t1, t2 = ["t1"], ["t2"]
    sims = []
    for p, a in enumerate(sch.attributes[1:], start=1):
        if p == sch.block_position:
            t1.append("bl1")
            t2.append("bl2")
        elif a.name in key_attrs and a.name in similar:
            t1.append(f"{a.name.lower()}1")
            t2.append(f"{a.name.lower()}2")
            sims.append(SimAtom(similar[a.name], t1[-1], t2[-1]))
        elif a.name in key_attrs:
            t1.append(a.name.lower())
            t2.append(a.name.lower())
        else:
            t1.append("_a%d" % p)
            t2.append("_b%d" % p)
    return MatchDependency(name or f"{sch.name.lower()}_keys", (Atom(sch.name, tuple(t1)), Atom(sch.name, tuple(t2))),
                           (), tuple(sims), ("bl1", "bl2"))
