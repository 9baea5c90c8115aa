"""Pipeline configuration: a sectioned INI file resolved relative to its own directory."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .blocking import MODES
from .classify import Feature, FeatureSpec, SvmParams
from .relcore import KINDS, AttributeSpec, RelationSchema, SchemaError
from .simlib import FUNCTIONS, AttributeSimilarity, SimilarityConfig


class ConfigError(Exception):
    pass


@dataclass
class PipelineConfig:
    base_dir: str
    schemas: Dict[str, RelationSchema]
    data: Dict[str, str]
    similarity: SimilarityConfig
    features: Dict[str, FeatureSpec]
    mode: str = "MDCB"
    sb_keys: Dict[str, List[str]] = field(default_factory=dict)
    mdsb_rules: Optional[str] = None
    mdcb_rules: Optional[str] = None
    training: Optional[str] = None
    models: Dict[str, str] = field(default_factory=dict)
    svm: SvmParams = field(default_factory=SvmParams)
    split_seed: int = 0
    merge_relations: List[str] = field(default_factory=list)
    truth: Optional[str] = None
    output_dir: str = "out"
    normalize: bool = False

    def rules_for(self, mode: str) -> Optional[str]:
        return {"MDSB": self.mdsb_rules, "MDCB": self.mdcb_rules}.get(mode)


def _split(text: str) -> List[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def parse_schema(name: str, text: str) -> RelationSchema:
    """`A:kind?, B, C?` where the kind defaults to short-string and `?` marks nullable."""
    attrs = []
    for item in _split(text):
        nullable = item.endswith("?")
        item = item.rstrip("?")
        nm, _, kind = item.partition(":")
        kind = kind.strip() or "short-string"
        if kind not in KINDS:
            raise ConfigError(f"schema {name}: unknown kind {kind!r}")
        attrs.append(AttributeSpec(nm.strip(), kind, nullable))
    try:
        return RelationSchema(name, tuple(attrs))
    except SchemaError as e:
        raise ConfigError(str(e)) from e


def _features(rel: str, text: str, sch: RelationSchema) -> FeatureSpec:
    feats = []
    for item in _split(text):
        parts = [p.strip() for p in item.split(":")]
        if len(parts) not in (2, 3):
            raise ConfigError(f"features {rel}: expected Attribute:function[:weight], got {item!r}")
        if parts[1] not in FUNCTIONS:
            raise ConfigError(f"features {rel}: unknown function {parts[1]!r}")
        try:
            weight = float(parts[2]) if len(parts) == 3 else 1.0
            feats.append(Feature(parts[0], parts[1], weight))
        except ValueError as e:
            raise ConfigError(f"features {rel}: {e}") from e
    spec = FeatureSpec(rel, tuple(feats))
    try:
        spec.validate(sch)
    except (SchemaError, ValueError) as e:
        raise ConfigError(f"features {rel}: {e}") from e
    return spec


def load_config(path) -> PipelineConfig:
    if not os.path.isfile(path):
        raise ConfigError(f"config file {path} not found")
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(str(e)) from e
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    def must_exist(p, what):
        full = resolve(p)
        if not os.path.exists(full):
            raise ConfigError(f"{what} {full} does not exist")
        return full

    if not cp.has_section("schemas"):
        raise ConfigError("missing [schemas] section")
    schemas = {name: parse_schema(name, text) for name, text in cp.items("schemas")}

    data = {}
    training = None
    normalize = False
    if cp.has_section("data"):
        for key, val in cp.items("data"):
            if key == "training":
                training = must_exist(val, "training file")
            elif key == "normalize":
                normalize = cp.getboolean("data", key)
            elif key in schemas:
                data[key] = must_exist(val, f"data file for {key}")
            else:
                raise ConfigError(f"[data] names unknown relation {key!r}")

    sim = SimilarityConfig()
    if cp.has_section("similarity"):
        for tag, val in cp.items("similarity"):
            parts = val.split()
            try:
                sim[tag] = AttributeSimilarity(parts[0], float(parts[1]) if len(parts) > 1 else None)
            except (ValueError, IndexError) as e:
                raise ConfigError(f"[similarity] {tag}: {e}") from e

    features = {}
    if cp.has_section("features"):
        for rel, val in cp.items("features"):
            if rel not in schemas:
                raise ConfigError(f"[features] names unknown relation {rel!r}")
            features[rel] = _features(rel, val, schemas[rel])

    b = cp["blocking"] if cp.has_section("blocking") else {}
    mode = b.get("mode", "MDCB").strip().upper()
    if mode not in MODES:
        raise ConfigError(f"blocking mode must be one of {MODES}")
    sb_keys = {}
    for key, val in (b.items() if b else ()):
        if key.startswith("keys."):
            rel = key[5:]
            if rel not in schemas:
                raise ConfigError(f"[blocking] {key}: unknown relation")
            sb_keys[rel] = _split(val)
            for a in sb_keys[rel]:
                try:
                    schemas[rel].position(a)
                except SchemaError as e:
                    raise ConfigError(str(e)) from e
    mdsb = must_exist(b["mdsb_rules"], "rule file") if b and "mdsb_rules" in b else None
    mdcb = must_exist(b["mdcb_rules"], "rule file") if b and "mdcb_rules" in b else None
    if mode == "SB" and not sb_keys:
        raise ConfigError("SB blocking needs keys.<Relation> entries")
    if mode == "MDSB" and mdsb is None:
        raise ConfigError("MDSB blocking needs mdsb_rules")
    if mode == "MDCB" and mdcb is None:
        raise ConfigError("MDCB blocking needs mdcb_rules")

    svm = SvmParams()
    models = {}
    if cp.has_section("svm"):
        s = cp["svm"]
        try:
            svm = SvmParams(s.getfloat("C", 1.0), s.getint("max_epochs", 2000), s.getfloat("tol", 1e-4),
                            s.getint("seed", 0))
        except ValueError as e:
            raise ConfigError(f"[svm]: {e}") from e
        if svm.C <= 0:
            raise ConfigError("[svm] C must be positive")
        for key, val in s.items():
            if key.startswith("model."):
                models[key[6:]] = must_exist(val, "model file")

    split_seed = cp.getint("training", "seed", fallback=svm.seed) if cp.has_section("training") else svm.seed
    merge_rel = _split(cp.get("merge", "relations", fallback="")) if cp.has_section("merge") else []
    for rel in merge_rel:
        if rel not in schemas:
            raise ConfigError(f"[merge] names unknown relation {rel!r}")
    truth = cp.get("evaluation", "truth", fallback=None) if cp.has_section("evaluation") else None
    truth = must_exist(truth, "truth file") if truth else None
    out = resolve(cp.get("output", "dir", fallback="out")) if cp.has_section("output") else resolve("out")

    return PipelineConfig(base, schemas, data, sim, features, mode, sb_keys, mdsb, mdcb, training, models, svm,
                          split_seed, merge_rel or list(features), truth, out, normalize)
