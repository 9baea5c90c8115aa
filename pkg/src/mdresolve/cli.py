"""Command line entry point: `mdresolve <subcommand> ...`."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

from . import pipeline as P
from .blocking import MODES, NonBlockRhs, SimilarityOnBlock, block_mfs, validate_blocking_md
from .classify import NoConvergence
from .config import ConfigError, load_config
from .mdlang.analysis import interactions, is_interaction_free, is_sfai
from .mdlang.datalog import ModeMismatch, emit_datalog
from .mdlang.mfs import check_mf_laws
from .mdlang.model import MdError, check_against, load_rules
from .merge import DuplicatePairSet, merge, merge_mds, union_mfs
from .relcore import RelcoreError, active_domain, write_csv
from .simlib import materialize_sim_facts

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_ANALYSIS = 0, 2, 3, 4
# union closures grow as 2^k, so that sample stays tiny
MF_SAMPLE = {"max-numeric": 12, "union-objectset": 3}

log = logging.getLogger("mdresolve")


class AnalysisFailure(Exception):
    pass


def _out(args, cfg):
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_ingest(args):
    cfg = load_config(args.config)
    inst = P._stage("ingest", P.ingest, cfg)
    for rel in sorted(inst.schemas):
        print(f"{rel}\t{len(inst.tids(rel))}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for rel in sorted(inst.schemas):
            write_csv(os.path.join(args.out, f"{rel}.csv"), inst, rel)


def cmd_simfacts(args):
    cfg = load_config(args.config)
    inst = P._stage("ingest", P.ingest, cfg)
    sims = P._stage("similarity", materialize_sim_facts, inst, cfg.similarity)
    text = P.sim_facts_csv(sims)
    path = os.path.join(_out(args, cfg), "simfacts.csv")
    _write(path, text)
    print(f"{len(text.splitlines()) - 1} facts -> {path}")


def cmd_block(args):
    cfg = load_config(args.config)
    inst = P._stage("ingest", P.ingest, cfg)
    sims = P._stage("similarity", materialize_sim_facts, inst, cfg.similarity)
    _, assignment, trace = P._stage("block", P.block, cfg, inst, sims, args.mode or cfg.mode)
    out = _out(args, cfg)
    _write(os.path.join(out, "blocks.csv"), assignment.report())
    _write(os.path.join(out, "block_trace.txt"), trace)
    for rel in sorted(assignment):
        print(f"{rel}\t{len(assignment.blocks(rel))} blocks")


def _train(args, cfg):
    inst = P._stage("ingest", P.ingest, cfg)
    stats = P._stage("features", P.feature_stats, inst, cfg)
    models = P._stage("train", P.train_models, cfg, inst, stats)
    return inst, stats, models


def cmd_train(args):
    cfg = load_config(args.config)
    _, _, models = _train(args, cfg)
    out = _out(args, cfg)
    lines = ["relation,n_train,n_test,test_accuracy,epochs,converged,loss"]
    for rel, tm in sorted(models.items()):
        tm.model.save(os.path.join(out, f"model_{rel}.txt"))
        m = tm.model
        lines.append(f"{rel},{tm.n_train},{tm.n_test},{tm.test_accuracy:.6f},{m.epochs},{int(m.converged)},"
                     f"{m.loss:.6f}")
    _write(os.path.join(out, "train_report.csv"), "\n".join(lines) + "\n")
    print("\n".join(lines))


def cmd_classify(args):
    cfg = load_config(args.config)
    res = P.run_mode(cfg, args.mode or cfg.mode, P.prepare(cfg), do_merge=False)
    out = _out(args, cfg)
    _write(os.path.join(out, "duplicates.csv"), P.predictions_csv(res.predictions))
    for rel, preds in sorted(res.predictions.items()):
        print(f"{rel}\t{len(preds)} candidates\t{sum(l for _, _, l in preds)} duplicates")


def cmd_merge(args):
    cfg = load_config(args.config)
    if args.duplicates:
        inst = P._stage("ingest", P.ingest, cfg)
        pairs = P._stage("merge", P.load_pairs, args.duplicates, True)
        dups = [DuplicatePairSet.of(rel, [(a, b) for a, b, lab in ps if lab == 1])
                for rel, ps in sorted(pairs.items()) if rel in cfg.merge_relations]
        res = P._stage("merge", merge, inst, dups)
    else:
        res = P.run_mode(cfg, args.mode or cfg.mode, P.prepare(cfg)).merged
    out = _out(args, cfg)
    for rel in sorted(res.resolved.schemas):
        write_csv(os.path.join(out, f"resolved_{rel}.csv"), res.resolved, rel)
    _write(os.path.join(out, "merge_trace.txt"), "".join(s.line() + "\n" for s in res.trace))
    for rel, kept in sorted(res.kept_rids.items()):
        print(f"{rel}\t{len(kept)} records kept")


def cmd_run(args):
    cfg = load_config(args.config)
    res = P.run_pipeline(cfg, args.mode, args.out)
    print(P.metrics_csv(res.metrics), end="")


def cmd_compare(args):
    cfg = load_config(args.config)
    reports = P.compare_modes(cfg, out_dir=args.out)
    print(P.metrics_csv(reports), end="")


def _rules_and_data(args):
    cfg = load_config(args.config) if args.config else None
    path = args.rules or (cfg.rules_for(args.mode or cfg.mode) if cfg else None)
    if not path:
        raise ConfigError("no rule file: pass --rules or a config with MD blocking rules")
    if not os.path.isfile(path):
        raise ConfigError(f"rule file {path} does not exist")
    mds = load_rules(path)
    return cfg, mds


def cmd_check(args):
    cfg, mds = _rules_and_data(args)
    schemas = cfg.schemas if cfg else None
    ok = True
    if schemas:
        for md in mds:
            check_against(md, schemas)
    inter = interactions(mds)
    free = is_interaction_free(mds)
    print(f"interaction-free\t{'yes' if free else 'no'}")
    for w, r, (rel, pos) in inter:
        label = schemas[rel].label(pos) if schemas and rel in schemas else f"{rel}[{pos}]"
        print(f"interaction\t{w.name} -> {r.name}\t{label}")
    if cfg is not None:
        inst = P._stage("ingest", P.ingest, cfg)
        sims = P._stage("similarity", materialize_sim_facts, inst, cfg.similarity)
        verdict = is_sfai(mds, inst, sims)
        print(f"sfai\t{'yes' if verdict.is_sfai else 'no'}")
        for w, r, s1, s2 in verdict.witnesses:
            print(f"witness\t{w} -> {r}\tS1={list(s1)}\tS2={list(s2)}")
        ok = free or verdict.is_sfai
        try:
            for md in mds:
                validate_blocking_md(md, schemas)
            print("blocking-shape\tyes")
        except (NonBlockRhs, SimilarityOnBlock) as e:
            print(f"blocking-shape\tno\t{e}")
        dom = active_domain(inst)
        for reg in (block_mfs(schemas), union_mfs(schemas)):
            for tag, mf in sorted(reg.items()):
                sample = sorted(dom.get(tag, ()), key=str)[:MF_SAMPLE.get(mf.kind, 6)]
                good = check_mf_laws(mf, sample)
                ok = ok and good
                print(f"mf-laws\t{tag}\t{mf.kind}\t{'ok' if good else 'violated'}")
    else:
        ok = free
    if args.strict and not ok:
        raise AnalysisFailure("rule set is neither interaction-free nor SFAI on this data")


def cmd_emit_datalog(args):
    cfg = load_config(args.config) if args.config else None
    if args.mode == "merging" and not args.rules:
        if cfg is None:
            raise ConfigError("merging mode needs --rules or a config")
        mds = [md for rel in cfg.merge_relations for md in merge_mds(cfg.schemas[rel])]
    else:
        cfg, mds = _rules_and_data(argparse.Namespace(config=args.config, rules=args.rules, mode=None))
    if cfg is None:
        raise ConfigError("a config is needed for the relation schemas")
    text = emit_datalog(mds, args.mode, cfg.schemas)
    if args.out:
        _write(args.out, text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_gen_synth(args):
    from .synth import SynthParams, generate, write_corpus
    corpus = generate(SynthParams(args.papers, args.authors, args.duplicate_rate, args.seed))
    write_corpus(corpus, args.out, args.seed)
    print(f"{corpus.record_count} records, {len(corpus.truth)} true pairs -> {args.out}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mdresolve", description="Entity resolution with matching dependencies.")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--strict", action="store_true", help="treat analysis warnings as failures (exit 4)")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, helptext, config=True, mode=False, out=True):
        p = sub.add_parser(name, help=helptext)
        if config:
            p.add_argument("--config", "-c", required=True)
        if mode:
            p.add_argument("--mode", choices=MODES)
        if out:
            p.add_argument("--out", "-o")
        p.add_argument("--strict", action="store_true", default=argparse.SUPPRESS)
        p.set_defaults(func=fn)
        return p

    add("ingest", cmd_ingest, "load and validate the input relations")
    add("simfacts", cmd_simfacts, "materialize similarity facts")
    add("block", cmd_block, "compute blocks", mode=True)
    add("train", cmd_train, "train the duplicate classifiers")
    add("classify", cmd_classify, "classify candidate pairs", mode=True)
    p = add("merge", cmd_merge, "merge duplicates", mode=True)
    p.add_argument("--duplicates", help="relation,tid1,tid2,label file to merge instead of classifying")
    add("run", cmd_run, "run the whole workflow", mode=True)
    add("compare", cmd_compare, "compare SB, MDSB and MDCB")
    p = add("check", cmd_check, "interaction, SFAI and matching-function checks", config=False, mode=True,
            out=False)
    p.add_argument("--config", "-c")
    p.add_argument("--rules", "-r")
    p = sub.add_parser("emit-datalog", help="render rules as a stratified program")
    p.add_argument("--config", "-c")
    p.add_argument("--rules", "-r")
    p.add_argument("--mode", choices=("blocking", "merging"), default="blocking")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_emit_datalog)
    p = add("gen-synth", cmd_gen_synth, "write a synthetic corpus with a ready config", config=False)
    p.set_defaults(out=None)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--papers", type=int, default=300)
    p.add_argument("--authors", type=int, default=180)
    p.add_argument("--duplicate-rate", type=float, default=0.3)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gen-synth" and not args.out:
        print("error: gen-synth needs --out", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NoConvergence)
            args.func(args)
        for w in caught:
            if issubclass(w.category, NoConvergence):
                print(f"warning: {w.message}", file=sys.stderr)
                if args.strict:
                    return EXIT_ANALYSIS
            else:
                warnings.showwarning(w.message, w.category, w.filename, w.lineno)
    except (ConfigError, MdError, ModeMismatch) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except P.StageError as e:
        code = EXIT_CONFIG if isinstance(e.cause, (ConfigError, MdError)) else EXIT_DATA
        print(f"{'config' if code == EXIT_CONFIG else 'data'} error: {e}", file=sys.stderr)
        return code
    except (RelcoreError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except AnalysisFailure as e:
        print(f"analysis failure: {e}", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
