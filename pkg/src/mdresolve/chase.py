"""Chase-based MD enforcement and an exhaustive all-orders oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Sequence

from .mdlang.cq import ConjunctiveQuery, homomorphisms
from .mdlang.model import MatchDependency
from .relcore import Instance, SimilarityFactStore, value_text

STEP_BUDGET = 10_000
NODE_BUDGET = 100_000


class ChaseError(Exception):
    pass


class ChaseBudgetExceeded(ChaseError):
    pass


class OracleBudgetExceeded(ChaseError):
    pass


class MissingMatchingFunction(ChaseError):
    pass


class NotApplicable(ChaseError):
    pass


@dataclass(frozen=True)
class Assignment:
    """One way to enforce an MD: the tuples its atoms map to and the two
    cells its identity atom names."""
    md: str
    tids: tuple
    cells: tuple

    @property
    def pair(self) -> tuple:
        return self.tids[:2]


@dataclass(frozen=True)
class ChaseStep:
    md_name: str
    tids: tuple
    cells: tuple
    attribute: str
    old: tuple
    new: object

    def line(self) -> str:
        (t1, p1), (t2, p2) = self.cells
        olds = " + ".join(value_text(v) for v in self.old)
        return f"{self.md_name}\t{self.tids[0]},{self.tids[1]}\t{self.attribute}\t{olds} -> {value_text(self.new)}"


@dataclass
class ChaseResult:
    final: Instance
    trace: List[ChaseStep] = field(default_factory=list)
    instances: List[Instance] = field(default_factory=list)

    @property
    def steps_taken(self) -> int:
        return len(self.trace)

    def trace_text(self) -> str:
        return "".join(s.line() + "\n" for s in self.trace)


def _query(md: MatchDependency) -> ConjunctiveQuery:
    return ConjunctiveQuery(list(md.atoms), list(md.sims), [], md.name)


def _lhs_matches(inst: Instance, sims: SimilarityFactStore, md: MatchDependency) -> list:
    """(tids, cell1, cell2) for every match of md's left-hand side."""
    (i1, p1), (i2, p2) = md.identity_positions()
    out = []
    for tids, _ in homomorphisms(_query(md), inst, sims):
        c1, c2 = (tids[i1], p1), (tids[i2], p2)
        if c1 != c2:
            out.append((tids, c1, c2))
    return out


def _select(inst: Instance, md: MatchDependency, matches) -> List[Assignment]:
    best = {}
    for tids, c1, c2 in matches:
        if inst.value(*c1) == inst.value(*c2):
            continue
        key = frozenset((c1, c2))
        cur = best.get(key)
        if cur is None or tids < cur.tids:
            best[key] = Assignment(md.name, tids, (c1, c2))
    return sorted(best.values(), key=lambda a: a.tids)


def applicable(inst: Instance, sims: SimilarityFactStore, md: MatchDependency) -> List[Assignment]:
    """Matches of md's left-hand side whose identified cells still differ.

    Matches that would update the same two cells count once; the one with
    the smallest tids represents them.
    """
    return _select(inst, md, _lhs_matches(inst, sims, md))


class _MatchCache:
    """Left-hand-side matches per MD, dropped when a step writes a
    (relation, position) the MD compares. Matches only depend on compared
    positions, so the cached lists equal a fresh scan."""

    def __init__(self, mds, sims):
        self.sims = sims
        self.matches = {}
        self.reads = {md.name: {(md.atoms[i].relation, p) for i, p in md.read_positions()} for md in mds}

    def applicable(self, inst, md):
        m = self.matches.get(md.name)
        if m is None:
            m = self.matches[md.name] = _lhs_matches(inst, self.sims, md)
        return _select(inst, md, m)

    def written(self, inst, cells):
        touched = {(inst.lookup(t)[0], p) for t, p in cells}
        for name, reads in self.reads.items():
            if reads & touched:
                self.matches.pop(name, None)


def _mf_for(inst, md, a: Assignment, mfs):
    (t1, p1), _ = a.cells
    rel, _t = inst.lookup(t1)
    sch = inst.schemas[rel]
    tag = sch.tag(p1)
    mf = mfs.get(tag)
    if mf is None:
        raise MissingMatchingFunction(f"{md.name}: no matching function for domain {tag}")
    return mf, sch.label(p1)


def enforce_step(inst: Instance, md: MatchDependency, a: Assignment, mfs: Mapping) -> tuple:
    """Return (new instance, step record)."""
    c1, c2 = a.cells
    v1, v2 = inst.value(*c1), inst.value(*c2)
    if c1 == c2 or v1 == v2:
        raise NotApplicable(f"{md.name} on {a.tids}: values already equal")
    mf, label = _mf_for(inst, md, a, mfs)
    merged = mf.merge(v1, v2)
    new = inst.updated({c1: merged, c2: merged})
    return new, ChaseStep(md.name, a.tids, a.cells, label, (v1, v2), merged)


def all_candidates(inst, mds, sims) -> List[Assignment]:
    out = []
    for md in mds:
        out.extend(applicable(inst, sims, md))
    return out


# schedules: functions from the candidate list to the index to enforce

def first(cands):
    return 0


def last(cands):
    return len(cands) - 1


def seeded(seed: int):
    rng = random.Random(seed)

    def pick(cands):
        return rng.randrange(len(cands))
    return pick


def md_reversed(cands):
    top = cands[-1].md
    return next(i for i, c in enumerate(cands) if c.md == top)


def chase(inst: Instance, mds: Sequence[MatchDependency], sims: SimilarityFactStore, mfs: Mapping,
          budget: int = STEP_BUDGET, pick: Optional[Callable] = None, keep_instances: bool = False) -> ChaseResult:
    """Enforce MDs until none applies.

    By default the first candidate in MD declaration order, then ascending
    tids, is enforced at each step. `pick` selects among all candidates.
    """
    by_name = {m.name: m for m in mds}
    result = ChaseResult(inst, [], [inst] if keep_instances else [])
    cache = _MatchCache(mds, sims)
    cur = inst
    while True:
        if pick is None:
            chosen = None
            for md in mds:
                cands = cache.applicable(cur, md)
                if cands:
                    chosen = cands[0]
                    break
        else:
            cands = [a for md in mds for a in cache.applicable(cur, md)]
            chosen = cands[pick(cands)] if cands else None
        if chosen is None:
            break
        if len(result.trace) >= budget:
            raise ChaseBudgetExceeded(f"no fixpoint after {budget} steps")
        cur, step = enforce_step(cur, by_name[chosen.md], chosen, mfs)
        cache.written(cur, step.cells)
        result.trace.append(step)
        if keep_instances:
            result.instances.append(cur)
    result.final = cur
    return result


def replay(inst: Instance, mds: Sequence[MatchDependency], sims: SimilarityFactStore, mfs: Mapping,
           steps: Sequence[tuple]) -> ChaseResult:
    """Enforce an explicit sequence of (md name, (tid1, tid2)) steps.

    Each step must be applicable when reached; the pair names the tuples of
    the leading atoms in either order.
    """
    by_name = {m.name: m for m in mds}
    result = ChaseResult(inst, [], [inst])
    cur = inst
    for name, pair in steps:
        md = by_name[name]
        match = None
        for a in applicable(cur, sims, md):
            if set(a.pair) == set(pair):
                match = a
                break
        if match is None:
            raise NotApplicable(f"{name} is not applicable to {pair} at step {len(result.trace) + 1}")
        cur, step = enforce_step(cur, md, match, mfs)
        result.trace.append(step)
        result.instances.append(cur)
    result.final = cur
    return result


def is_stable(inst, mds, sims) -> bool:
    return not any(applicable(inst, sims, md) for md in mds)


@dataclass(frozen=True)
class OracleLimits:
    max_tuples: int = 6
    max_mds: int = 4
    node_budget: int = NODE_BUDGET


def chase_all_orders(inst: Instance, mds: Sequence[MatchDependency], sims: SimilarityFactStore, mfs: Mapping,
                     limits: OracleLimits = OracleLimits()) -> frozenset:
    """Every stable instance reachable by some enforcement order."""
    if inst.size() > limits.max_tuples or len(mds) > limits.max_mds:
        raise OracleBudgetExceeded(
            f"oracle limited to {limits.max_tuples} tuples and {limits.max_mds} MDs")
    by_name = {m.name: m for m in mds}
    seen = {inst}
    stack = [inst]
    finals = set()
    nodes = 0
    while stack:
        cur = stack.pop()
        nodes += 1
        if nodes > limits.node_budget:
            raise OracleBudgetExceeded(f"more than {limits.node_budget} states")
        cands = all_candidates(cur, mds, sims)
        if not cands:
            finals.add(cur)
            continue
        for a in cands:
            nxt, _ = enforce_step(cur, by_name[a.md], a, mfs)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(finals)
