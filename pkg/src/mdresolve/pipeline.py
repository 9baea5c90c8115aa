"""End-to-end workflow: ingest, similarity facts, blocking, training,
classification, merging and evaluation."""

from __future__ import annotations

import csv
import io
import logging
import os
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .blocking import (BlockAssignment, CandidatePairSet, apply_blocking, candidate_pairs, read_assignment,
                       reduction_ratio, sb_blocking)
from .classify import (ClassifyError, SvmModel, TrainingExample, build_training_matrix, split_70_30, svm_predict,
                       svm_train, weight_vector)
from .config import ConfigError, PipelineConfig
from .mdlang.model import MdError, check_against, load_rules
from .merge import DuplicatePairSet, MergeResult, merge, pairs_from_predictions
from .relcore import Instance, RelcoreError, Tuple, load_csv, value_text, write_csv
from .simlib import CorpusStats, corpus_for, materialize_sim_facts

log = logging.getLogger(__name__)


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


def precision_recall(predicted: Iterable, truth: Iterable) -> tuple:
    """Precision is 1.0 when nothing is predicted, recall 1.0 when the truth is empty."""
    p = {_pair(*x) for x in predicted}
    t = {_pair(*x) for x in truth}
    tp = len(p & t)
    precision = tp / len(p) if p else 1.0
    recall = tp / len(t) if t else 1.0
    return precision, recall


@dataclass
class MetricsReport:
    mode: str
    relation: str
    n: int
    S: int
    tp: int
    fp: int
    fn: int

    @property
    def N(self) -> int:
        return self.n * self.n

    @property
    def reduction_ratio(self) -> float:
        return reduction_ratio(self.S, self.n) if self.n else 1.0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    HEADER = ["mode", "relation", "n", "S", "N", "reduction_ratio", "tp", "fp", "fn", "precision", "recall"]

    def row(self) -> list:
        return [self.mode, self.relation, self.n, self.S, self.N, f"{self.reduction_ratio:.6f}", self.tp, self.fp,
                self.fn, f"{self.precision:.6f}", f"{self.recall:.6f}"]


def metrics_csv(reports: Sequence[MetricsReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MetricsReport.HEADER)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


# ------------------------------------------------------------------ stages

_SPACE = re.compile(r"\s+")


def normalize_instance(inst: Instance) -> Instance:
    """Trim, collapse blanks and lowercase every text cell."""
    rels = {}
    for name, tuples in inst.relations.items():
        sch = inst.schemas[name]
        out = []
        for t in tuples:
            vals = []
            for pos, v in enumerate(t.values, start=1):
                if isinstance(v, str) and sch.attributes[pos].kind not in ("block-number", "reference-id"):
                    v = _SPACE.sub(" ", v.strip()).lower() or None
                vals.append(v)
            out.append(Tuple(t.tid, tuple(vals)))
        rels[name] = out
    return Instance(inst.schemas, rels)


def ingest(cfg: PipelineConfig) -> Instance:
    rels = {}
    for name, sch in cfg.schemas.items():
        path = cfg.data.get(name)
        rels[name] = load_csv(path, sch) if path else []
    inst = Instance(cfg.schemas, rels)
    return normalize_instance(inst) if cfg.normalize else inst


def load_pairs(path, with_label: bool = False) -> Dict[str, list]:
    out: Dict[str, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        want = ["relation", "tid1", "tid2"] + (["label"] if with_label else [])
        if header is None or [h.strip() for h in header] != want:
            raise RelcoreError(f"{path}: header must be {','.join(want)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(want):
                raise RelcoreError(f"{path}:{lineno}: expected {len(want)} cells")
            try:
                rec = tuple(int(x) for x in row[1:])
            except ValueError:
                raise RelcoreError(f"{path}:{lineno}: ids must be integers")
            out.setdefault(row[0], []).append(rec)
    return out


def feature_stats(inst: Instance, cfg: PipelineConfig) -> Dict[str, Dict[str, CorpusStats]]:
    stats = {}
    for rel, spec in cfg.features.items():
        sch = cfg.schemas[rel]
        stats[rel] = {f.attribute: corpus_for(inst, sch.tag(sch.position(f.attribute)))
                      for f in spec.features if f.function == "tfidf-cosine"}
    return stats


def block(cfg: PipelineConfig, inst: Instance, sims, mode: str) -> tuple:
    """Returns (blocked instance, assignment, chase trace text)."""
    if mode == "SB":
        changes = {}
        for rel, keys in cfg.sb_keys.items():
            sch = inst.schemas[rel]
            if sch.block_position is None:
                continue
            for tid, rep in sb_blocking(inst, rel, keys).items():
                changes[(tid, sch.block_position)] = str(rep)
        blocked = inst.updated(changes) if changes else inst
        return blocked, read_assignment(blocked), ""
    path = cfg.rules_for(mode)
    mds = load_rules(path)
    for md in mds:
        check_against(md, inst.schemas)
    final, assignment, res = apply_blocking(inst, mds, sims)
    return final, assignment, res.trace_text()


def training_examples(cfg: PipelineConfig, inst: Instance, stats) -> Dict[str, list]:
    if not cfg.training:
        return {}
    pairs = load_pairs(cfg.training, with_label=True)
    out = {}
    for rel, spec in cfg.features.items():
        sch = cfg.schemas[rel]
        exs = []
        for a, b, label in pairs.get(rel, []):
            if a not in inst or b not in inst:
                raise RelcoreError(f"training pair ({a}, {b}) names an unknown record")
            ra, rb = inst.lookup(a), inst.lookup(b)
            if ra[0] != rel or rb[0] != rel:
                raise RelcoreError(f"training pair ({a}, {b}) does not name two {rel} records")
            exs.append(TrainingExample(weight_vector(ra[1], rb[1], spec, sch, stats[rel]), label))
        if exs:
            out[rel] = exs
    return out


@dataclass
class TrainedModel:
    model: SvmModel
    n_train: int = 0
    n_test: int = 0
    test_accuracy: float = float("nan")


def train_models(cfg: PipelineConfig, inst: Instance, stats) -> Dict[str, TrainedModel]:
    out = {}
    examples = training_examples(cfg, inst, stats)
    for rel, spec in cfg.features.items():
        if rel in cfg.models:
            out[rel] = TrainedModel(SvmModel.load(cfg.models[rel]))
            continue
        if rel not in examples:
            raise ConfigError(f"no model file and no training pairs for {rel}")
        train, test = split_70_30(examples[rel], cfg.split_seed)
        X, y = build_training_matrix(train)
        model = svm_train(X, y, cfg.svm, spec.names)
        acc = (sum(svm_predict(model, e.vector) == e.label for e in test) / len(test)) if test else float("nan")
        out[rel] = TrainedModel(model, len(train), len(test), acc)
    return out


def classify_candidates(inst: Instance, cands: CandidatePairSet, cfg: PipelineConfig, model: SvmModel,
                        stats) -> list:
    rel = cands.relation
    spec, sch = cfg.features[rel], cfg.schemas[rel]
    out = []
    for a, b in cands:
        v = weight_vector(inst.lookup(a)[1], inst.lookup(b)[1], spec, sch, stats[rel])
        out.append((a, b, svm_predict(model, v)))
    return out


@dataclass
class PipelineResult:
    mode: str
    instance: Instance
    blocked: Instance
    assignment: BlockAssignment
    block_trace: str
    candidates: Dict[str, CandidatePairSet]
    predictions: Dict[str, list]
    merged: Optional[MergeResult]
    metrics: List[MetricsReport]
    models: Dict[str, TrainedModel] = field(default_factory=dict)


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except (ConfigError, StageError):
        raise
    except (RelcoreError, MdError, ClassifyError, KeyError, ValueError, OSError) as e:
        raise StageError(name, e) from e


def evaluate(mode: str, inst: Instance, candidates, predictions, truth: Mapping[str, list]) -> List[MetricsReport]:
    reports = []
    for rel in sorted(predictions):
        n = len(inst.tids(rel))
        if n == 0:
            continue
        pred = {(a, b) for a, b, lab in predictions[rel] if lab == 1}
        true = {_pair(a, b) for a, b in truth.get(rel, [])}
        tp = len(pred & true)
        reports.append(MetricsReport(mode, rel, n, candidates[rel].count, tp, len(pred) - tp, len(true) - tp))
    return reports


def prepare(cfg: PipelineConfig) -> tuple:
    """Stages shared by every blocking mode: instance, similarity facts,
    feature statistics, models and ground truth."""
    inst = _stage("ingest", ingest, cfg)
    sims = _stage("similarity", materialize_sim_facts, inst, cfg.similarity)
    stats = _stage("features", feature_stats, inst, cfg)
    models = _stage("train", train_models, cfg, inst, stats) if inst.size() else {}
    truth = _stage("evaluation", load_pairs, cfg.truth) if cfg.truth else {}
    return inst, sims, stats, models, truth


def run_mode(cfg: PipelineConfig, mode: str, prepared: tuple, do_merge: bool = True) -> PipelineResult:
    inst, sims, stats, models, truth = prepared
    blocked, assignment, trace = _stage("block", block, cfg, inst, sims, mode)
    candidates, predictions = {}, {}
    for rel in sorted(cfg.features):
        if inst.schemas[rel].block_position is None or not inst.tids(rel):
            continue
        candidates[rel] = candidate_pairs(assignment.get(rel, {}), rel)
        predictions[rel] = _stage("classify", classify_candidates, inst, candidates[rel], cfg, models[rel].model,
                                  stats)
    merged = None
    if do_merge:
        dups = [pairs_from_predictions(predictions[rel], rel) for rel in cfg.merge_relations if rel in predictions]
        merged = _stage("merge", merge, blocked, dups)
    metrics = evaluate(mode, inst, candidates, predictions, truth)
    return PipelineResult(mode, inst, blocked, assignment, trace, candidates, predictions, merged, metrics, models)


def run_pipeline(cfg: PipelineConfig, mode: Optional[str] = None, out_dir: Optional[str] = None) -> PipelineResult:
    res = run_mode(cfg, mode or cfg.mode, prepare(cfg))
    write_artifacts(res, out_dir or cfg.output_dir)
    return res


def compare_modes(cfg: PipelineConfig, modes: Sequence[str] = ("SB", "MDSB", "MDCB"),
                  out_dir: Optional[str] = None) -> List[MetricsReport]:
    """Blocking and classification under each mode with shared facts, models and truth."""
    prepared = prepare(cfg)
    reports = []
    for mode in modes:
        reports.extend(run_mode(cfg, mode, prepared, do_merge=False).metrics)
    out = out_dir or cfg.output_dir
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "compare.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(metrics_csv(reports))
        from .plotting import compare_chart
        compare_chart(reports, os.path.join(out, "compare.png"))
    return reports


# ------------------------------------------------------------------ artifacts

def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def predictions_csv(predictions: Mapping[str, list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["relation", "tid1", "tid2", "label"])
    for rel in sorted(predictions):
        for a, b, lab in sorted(predictions[rel]):
            w.writerow([rel, a, b, lab])
    return buf.getvalue()


def sim_facts_csv(sims) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["domain", "value1", "value2"])
    for tag, a, b in sims.triples():
        w.writerow([tag, value_text(a), value_text(b)])
    return buf.getvalue()


def write_artifacts(res: PipelineResult, out: str):
    os.makedirs(out, exist_ok=True)
    _write(os.path.join(out, "blocks.csv"), res.assignment.report())
    _write(os.path.join(out, "block_trace.txt"), res.block_trace)
    _write(os.path.join(out, "duplicates.csv"), predictions_csv(res.predictions))
    _write(os.path.join(out, "metrics.csv"), metrics_csv(res.metrics))
    for rel, tm in sorted(res.models.items()):
        tm.model.save(os.path.join(out, f"model_{rel}.txt"))
    if res.merged is not None:
        for rel in sorted(res.merged.resolved.schemas):
            write_csv(os.path.join(out, f"resolved_{rel}.csv"), res.merged.resolved, rel)
        _write(os.path.join(out, "merge_trace.txt"), "".join(s.line() + "\n" for s in res.merged.trace))
