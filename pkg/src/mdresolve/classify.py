"""Pair features and a linear soft-margin SVM trained by subgradient descent."""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from .relcore import RelationSchema, Tuple
from .simlib import CorpusStats, similarity

MODEL_HEADER = "linear-svm 1"
WINDOW = 50


class ClassifyError(Exception):
    pass


class SingleClassTraining(ClassifyError):
    pass


class DimensionMismatch(ClassifyError):
    pass


class RaggedVectors(ClassifyError):
    pass


class NoConvergence(UserWarning):
    pass


@dataclass(frozen=True)
class Feature:
    attribute: str
    function: str
    weight: float = 1.0

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("feature weights must be positive")


@dataclass(frozen=True)
class FeatureSpec:
    relation: str
    features: tuple

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))

    @property
    def names(self):
        return [f.attribute for f in self.features]

    def validate(self, sch: RelationSchema):
        for f in self.features:
            p = sch.position(f.attribute)
            if sch.attributes[p].kind in ("reference-id", "block-number"):
                raise ValueError(f"{f.attribute} cannot be a feature")


@dataclass(frozen=True)
class WeightVector:
    vector_id: tuple
    entries: tuple

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class TrainingExample:
    vector: WeightVector
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError("labels are 0 or 1")


def weight_vector(r1: Tuple, r2: Tuple, spec: FeatureSpec, sch: RelationSchema,
                  stats: Optional[Mapping[str, CorpusStats]] = None) -> WeightVector:
    stats = stats or {}
    entries = []
    for f in spec.features:
        p = sch.position(f.attribute)
        a, b = r1.at(p), r2.at(p)
        s = similarity(f.function, a, b, stats.get(f.attribute))
        entries.append(f.weight * s)
    return WeightVector((r1.tid, r2.tid), tuple(entries))


def build_training_matrix(examples: Sequence[TrainingExample]) -> tuple:
    if not examples:
        return np.zeros((0, 0)), []
    d = len(examples[0].vector)
    for e in examples:
        if len(e.vector) != d:
            raise RaggedVectors(f"vector {e.vector.vector_id} has {len(e.vector)} entries, expected {d}")
    X = np.array([e.vector.entries for e in examples], dtype=float).reshape(len(examples), d)
    return X, [e.label for e in examples]


@dataclass
class SvmParams:
    C: float = 1.0
    max_epochs: int = 2000
    tol: float = 1e-4
    seed: int = 0


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    params: SvmParams = field(default_factory=SvmParams)
    feature_names: tuple = ()
    alphas: Optional[np.ndarray] = None
    support: Optional[np.ndarray] = None
    support_labels: Optional[np.ndarray] = None
    converged: bool = True
    epochs: int = 0
    loss: float = float("nan")

    def decision(self, v) -> float:
        v = _vec(v)
        if v.shape[0] != self.weights.shape[0]:
            raise DimensionMismatch(f"vector has {v.shape[0]} entries, model has {self.weights.shape[0]}")
        return float(self.weights @ v + self.bias)

    def dual_decision(self, v) -> float:
        """Decision value from the support-vector expansion."""
        v = _vec(v)
        if self.alphas is None:
            raise ClassifyError("model carries no support coefficients")
        return float(np.sum(self.alphas * self.support_labels * (self.support @ v)) + self.bias)

    def to_text(self) -> str:
        lines = [MODEL_HEADER,
                 "features " + ",".join(self.feature_names),
                 f"C {self.params.C!r}",
                 f"max_epochs {self.params.max_epochs}",
                 f"tol {self.params.tol!r}",
                 f"seed {self.params.seed}",
                 f"epochs {self.epochs}",
                 f"converged {int(self.converged)}",
                 f"loss {self.loss!r}",
                 "weights " + " ".join(repr(float(w)) for w in self.weights),
                 f"bias {self.bias!r}"]
        if self.alphas is not None:
            for a, y, x in zip(self.alphas, self.support_labels, self.support):
                lines.append("sv " + " ".join([repr(float(a)), str(int(y))] + [repr(float(c)) for c in x]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SvmModel":
        lines = text.strip().splitlines()
        if not lines or lines[0] != MODEL_HEADER:
            raise ClassifyError("not a model file")
        kv, svs = {}, []
        for ln in lines[1:]:
            key, _, rest = ln.partition(" ")
            if key == "sv":
                svs.append([float(x) for x in rest.split()])
            else:
                kv[key] = rest
        params = SvmParams(float(kv["C"]), int(kv["max_epochs"]), float(kv["tol"]), int(kv["seed"]))
        feats = tuple(x for x in kv.get("features", "").split(",") if x)
        model = cls(np.array([float(x) for x in kv["weights"].split()]), float(kv["bias"]), params, feats,
                    converged=bool(int(kv["converged"])), epochs=int(kv["epochs"]), loss=float(kv["loss"]))
        if svs:
            model.alphas = np.array([s[0] for s in svs])
            model.support_labels = np.array([s[1] for s in svs])
            model.support = np.array([s[2:] for s in svs])
        return model

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "SvmModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _vec(v):
    if isinstance(v, WeightVector):
        v = v.entries
    return np.asarray(v, dtype=float)


def objective(w, b, X, y, C) -> float:
    """1/2 |w|^2 + C * sum of hinge losses, with y in {-1, +1}."""
    margins = y * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def subgradient(w, b, X, y, C) -> tuple:
    margins = y * (X @ w + b)
    viol = margins < 1.0
    gw = w - C * (y[viol, None] * X[viol]).sum(axis=0)
    gb = -C * float(y[viol].sum())
    return gw, gb


def svm_train(X, labels: Sequence[int], params: SvmParams = SvmParams(), feature_names=()) -> SvmModel:
    """Primal subgradient descent, one example at a time in the given order.

    Update t uses the step 1/(lambda t) with lambda = 1/(C n) on the
    objective scaled by lambda. The bias is not regularized. After each pass
    the full objective is evaluated and the best iterate so far is kept, so
    the reported loss never increases. Training settles when the best loss
    improved by no more than tol (relative) over the last WINDOW passes.
    """
    X = np.asarray(X, dtype=float)
    labels = list(labels)
    if set(labels) - {0, 1}:
        raise ClassifyError("labels must be 0 or 1")
    if len(set(labels)) < 2:
        raise SingleClassTraining("training needs examples of both classes")
    n, d = X.shape
    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    C = float(params.C)
    lam = 1.0 / (C * n)
    w, b, alpha = np.zeros(d), 0.0, np.zeros(n)
    best = (objective(w, b, X, y, C), w.copy(), b, alpha.copy())
    history = [best[0]]
    converged = False
    epoch, t = 0, 0
    for epoch in range(1, params.max_epochs + 1):
        for i in range(n):
            t += 1
            eta = 1.0 / (lam * t)
            hit = y[i] * (X[i] @ w + b) < 1.0
            w *= 1.0 - eta * lam
            alpha *= 1.0 - eta * lam
            if hit:
                w += eta * y[i] * X[i]
                alpha[i] += eta
                b += eta * y[i]
        loss = objective(w, b, X, y, C)
        if loss < best[0]:
            best = (loss, w.copy(), b, alpha.copy())
        history.append(best[0])
        if epoch >= WINDOW and history[-WINDOW - 1] - best[0] <= params.tol * max(1.0, best[0]):
            converged = True
            break
    loss, w, b, alpha = best
    sv = alpha > 0
    model = SvmModel(w, float(b), params, tuple(feature_names), alpha[sv], X[sv], y[sv], converged, epoch, loss)
    model.history = history
    if not converged:
        warnings.warn(f"training stopped after {params.max_epochs} epochs without settling", NoConvergence)
    return model


def svm_predict(model: SvmModel, v) -> int:
    return 1 if model.decision(v) > 0 else 0


def split_70_30(examples: Sequence, seed: int, label=lambda e: e.label) -> tuple:
    """Seeded shuffle, then a cut at ceil(0.7 n). When a class has two or
    more members but is missing from one side, one member is swapped over."""
    items = list(examples)
    if not items:
        return [], []
    rng = random.Random(seed)
    rng.shuffle(items)
    k = math.ceil(0.7 * len(items))
    train, test = items[:k], items[k:]
    for cls in sorted({label(e) for e in items}):
        members = [e for e in items if label(e) == cls]
        if len(members) < 2 or not test:
            continue
        if not any(label(e) == cls for e in test):
            i = next(i for i, e in enumerate(train) if label(e) == cls)
            j = next((j for j, e in enumerate(test) if sum(label(x) == label(e) for x in test) > 1), len(test) - 1)
            train[i], test[j] = test[j], train[i]
        elif not any(label(e) == cls for e in train):
            i = next(i for i, e in enumerate(test) if label(e) == cls)
            j = next((j for j, e in enumerate(train) if sum(label(x) == label(e) for x in train) > 1), len(train) - 1)
            test[i], train[j] = train[j], test[i]
    return train, test
