"""Text rendering of MD sets as Datalog programs with stratified negation.

The output documents what the chase computes; nothing here executes it.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .model import MatchDependency


class ModeMismatch(Exception):
    pass


def _var(v: str) -> str:
    v = v.replace("'", "p").replace(".", "_")
    if v.startswith("_"):
        return "V" + v[1:]
    return v[0].upper() + v[1:]


def _tag(tag: str) -> str:
    return tag.replace(".", "_")


def _atom(schemas, relation, terms) -> str:
    sch = schemas.get(relation)
    terms = [_var(t) for t in terms]
    if sch is not None and sch.block_position is not None:
        return f"{relation}[{', '.join(terms[:-1])}] = {terms[-1]}"
    return f"{relation}({', '.join(terms)})"


def _sim(s, mode) -> str:
    if s.is_equality:
        return f"{_var(s.left)} = {_var(s.right)}"
    if mode == "merging" and s.tag.endswith(".rid"):
        return f"{s.tag[:-4]}-Duplicate({_var(s.left)}, {_var(s.right)})"
    return f"{_tag(s.tag)}-Sim({_var(s.left)}, {_var(s.right)})"


def _kind(schemas, md, k):
    (i, p) = md.identity_positions()[k]
    rel = md.leading[i].relation
    sch = schemas.get(rel)
    if sch is None:
        raise ModeMismatch(f"{md.name}: no schema for {rel}")
    return sch.attributes[p].kind


def _wrap(head, body) -> str:
    lines = [f"{head} <-"]
    line = "    "
    for k, item in enumerate(body):
        piece = item + ("," if k < len(body) - 1 else ".")
        if len(line) + len(piece) > 78 and line.strip():
            lines.append(line.rstrip())
            line = "    "
        line += piece + " "
    lines.append(line.rstrip())
    return "\n".join(lines)


def _blocking_rule(md, schemas) -> str:
    b1, b2 = (_var(v) for v in md.identity)
    lead = []
    for a in md.leading:
        lead.append((a.relation, a.terms))
    head = []
    for (rel, terms), y in zip(lead, md.identity):
        keys = [_var(t) for t in terms if t != y]
        head.append(f"{rel}[{', '.join(keys)}] = {b2}")
    body = [_atom(schemas, a.relation, a.terms) for a in md.atoms]
    body += [_sim(s, "blocking") for s in md.sims]
    body.append(f"{b1} < {b2}")
    return f"% {md.name}\n" + _wrap(", ".join(head), body)


def _version_rules_blocking(sch) -> str:
    keys = [_var(a.name) for a in sch.attributes[:-1]]
    k = ", ".join(keys)
    r = sch.name
    old = _wrap(f"{r}-OldVer({k}, Bl1)", [f"{r}[{k}] = Bl1", f"{r}[{k}] = Bl2", "Bl1 < Bl2"])
    latest = _wrap(f"{r}-Block[{k}] = Bl", [f"{r}[{k}] = Bl", f"not {r}-OldVer({k}, Bl)"])
    return old + "\n" + latest


def _merge_rule(md, schemas) -> str:
    (i1, p1), (i2, p2) = md.identity_positions()
    a1, a2 = md.leading
    sch = schemas[a1.relation]
    merged = "M" + _var(md.identity[0])
    t1 = [merged if k == p1 else t for k, t in enumerate(a1.terms)]
    t2 = [merged if k == p2 else t for k, t in enumerate(a2.terms)]
    head = f"{_plain(a1.relation, t1)}, {_plain(a2.relation, t2)}"
    body = [_sim(s, "merging") for s in md.sims]
    body += [_plain(a.relation, a.terms) for a in md.atoms]
    attr = sch.attributes[p1].name
    body.append(f"m_{attr}({_var(md.identity[0])}, {_var(md.identity[1])}) = {merged}")
    return f"% {md.name}\n" + _wrap(head, body)


def _plain(relation, terms) -> str:
    return f"{relation}({', '.join(_var(t) for t in terms)})"


def _version_rules_merging(sch) -> str:
    r = sch.name
    rid = _var(sch.attributes[0].name)
    tail = [a for a in sch.attributes[1:] if a.kind != "block-number"]
    x1 = [_var(a.name) + "1" for a in tail]
    x2 = [_var(a.name) + "2" for a in tail]
    blk = ["Bl"] if sch.block_position is not None else []
    b1 = ", ".join([rid] + x1 + blk)
    b2 = ", ".join([rid] + x2 + [b + "2" for b in blk])
    old = _wrap(f"{r}-OldVer({', '.join([rid] + x1)})",
                [f"{r}({b1})", f"{r}({b2})", f"({', '.join(x1)}) < ({', '.join(x2)})"])
    x = [_var(a.name) for a in tail]
    full = ", ".join([rid] + x + blk)
    er = _wrap(f"{r}-ER({full})", [f"{r}({full})", f"not {r}-OldVer({', '.join([rid] + x)})"])
    return old + "\n" + er


def emit_datalog(mds: Sequence[MatchDependency], mode: str, schemas: Mapping) -> str:
    if mode not in ("blocking", "merging"):
        raise ValueError(f"unknown mode {mode!r}")
    out = []
    if mode == "blocking":
        for md in mds:
            for k in (0, 1):
                if _kind(schemas, md, k) != "block-number":
                    raise ModeMismatch(f"{md.name}: identity is not on a block-number attribute")
        rels = [s for _, s in sorted(schemas.items()) if s.block_position is not None]
        out.append("% initial block numbers: each record starts in its own block")
        for sch in rels:
            cols = [_var(a.name) for a in sch.attributes]
            out.append(f"{sch.name}[{', '.join(cols[:-1])}] = {cols[0]} <- {sch.name}({', '.join(cols)}).")
        tags = sorted({s.tag for md in mds for s in md.sims if not s.is_equality})
        if tags:
            out.append("% similarity facts, supplied by the similarity stage")
            out.extend(f"% {_tag(t)}-Sim(a1, a2)." for t in tags)
        if mds:
            out.append("% blocking rules")
            out.extend(_blocking_rule(md, schemas) for md in mds)
        out.append("% older versions and final blocks")
        out.extend(_version_rules_blocking(sch) for sch in rels)
    else:
        rels = []
        for md in mds:
            for k in (0, 1):
                kind = _kind(schemas, md, k)
                if kind in ("block-number", "reference-id"):
                    raise ModeMismatch(f"{md.name}: a merge rule cannot identify a {kind} attribute")
            if md.leading[0].relation != md.leading[1].relation:
                raise ModeMismatch(f"{md.name}: a merge rule joins two records of one relation")
            if md.leading[0].relation not in rels:
                rels.append(md.leading[0].relation)
        out.append("% duplicate facts R-Duplicate(r1, r2) come from the classifier")
        if mds:
            out.append("% merge rules")
            out.extend(_merge_rule(md, schemas) for md in mds)
        out.append("% older versions and the resolved relation")
        out.extend(_version_rules_merging(schemas[r]) for r in sorted(rels))
    return "\n".join(out) + "\n"
