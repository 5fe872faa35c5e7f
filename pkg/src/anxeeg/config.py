"""Pipeline configuration: sectioned key-value text (INI) plus CLI overrides."""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from anxeeg.errors import ConfigError
from anxeeg.preprocess import SUB_TRIAL_SECONDS, FilterSpec

STAGE_ORDER = ("ingest", "preprocess", "extract", "label", "train", "evaluate", "report")
# Settings each stage reads directly, and the stages whose artifacts it consumes.
_STAGE_KEYS = {
    "ingest": ("inputs",),
    "preprocess": ("filter",),
    "extract": ("duration", "features"),
    "label": ("rule",),
    "train": ("levels", "classifier", "seed"),
    "evaluate": ("levels", "classifier", "seed", "folds", "split"),
    "report": (),
}
STAGE_DEPENDS = {
    "ingest": (),
    "preprocess": ("ingest",),
    "extract": ("preprocess",),
    "label": ("preprocess",),
    "train": ("extract", "label"),
    "evaluate": ("extract", "label"),
    "report": ("evaluate",),
}


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[str, ...] = ()
    ratings: str = ""
    filter: FilterSpec = FilterSpec()
    duration: float = 1.0
    features: tuple[str, ...] = ("all",)
    rule_path: str = ""
    levels: int = 4
    classifier: dict = field(default_factory=lambda: {"kind": "knn", "k": 5})
    folds: int = 5
    split: str = "stratified"
    seed: int | None = None
    out: str = "out"
    base_dir: str = "."

    def validate(self, stage: str) -> None:
        if stage not in STAGE_ORDER:
            raise ConfigError(f"unknown stage {stage!r}")
        if self.duration not in SUB_TRIAL_SECONDS:
            raise ConfigError(f"duration must be one of {SUB_TRIAL_SECONDS}, got {self.duration:g}")
        if self.levels not in (2, 4):
            raise ConfigError(f"levels must be 2 or 4, got {self.levels}")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if self.split not in ("stratified", "subject"):
            raise ConfigError(f"split must be stratified or subject, got {self.split!r}")
        if stage == "ingest":
            if not self.inputs:
                raise ConfigError("no input recordings configured")
            for p in self.inputs + ((self.ratings,) if self.ratings else ()):
                if not self.resolve(p).exists():
                    raise ConfigError(f"input path does not exist: {p}")
        if self.rule_path and not self.resolve(self.rule_path).exists():
            raise ConfigError(f"label rule file does not exist: {self.rule_path}")
        if stage in ("train", "evaluate", "report") and self.seed is None:
            raise ConfigError(f"stage {stage} needs a seed (--seed or [run] seed)")

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else Path(self.base_dir) / path

    def _section(self, key: str):
        if key == "inputs":
            return {"inputs": list(self.inputs), "ratings": self.ratings}
        if key == "filter":
            return asdict(self.filter)
        if key == "rule":
            if self.rule_path:
                return self.resolve(self.rule_path).read_text()
            return ""
        return getattr(self, key)

    def stage_fingerprint(self, stage: str) -> str:
        """Hash of the stage's own settings and its upstream fingerprints."""
        doc = {
            "stage": stage,
            "settings": {k: self._section(k) for k in _STAGE_KEYS[stage]},
            "upstream": {u: self.stage_fingerprint(u) for u in STAGE_DEPENDS[stage]},
        }
        blob = json.dumps(doc, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _number(value: str, kind, key: str):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from None


def _auto(value: str):
    for kind in (int, float):
        try:
            return kind(value)
        except ValueError:
            pass
    if value.lower() in ("none", ""):
        return None
    if "-" in value and all(p.strip().isdigit() for p in value.split("-")):
        return [int(p) for p in value.split("-")]
    return value


def _csv(value: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in value.replace("\n", ",").split(",") if p.strip())


def parse_config(text: str, base_dir: str = ".") -> PipelineConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}".splitlines()[0]) from None
    known = {"input", "filter", "trials", "features", "labels", "classifier", "cv", "run"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")
    kw: dict = {"base_dir": base_dir}
    if cp.has_section("input"):
        s = cp["input"]
        kw["inputs"] = _csv(s.get("recordings", ""))
        kw["ratings"] = s.get("ratings", "").strip()
    if cp.has_section("filter"):
        s = cp["filter"]
        kw["filter"] = FilterSpec(
            low_cut=_number(s.get("low_cut", "4"), float, "low_cut"),
            high_cut=_number(s.get("high_cut", "45"), float, "high_cut"),
            num_taps=_number(s.get("num_taps", "129"), int, "num_taps"),
            window=s.get("window", "hamming"),
        )
    if cp.has_section("trials"):
        kw["duration"] = _number(cp["trials"].get("duration", "1"), float, "duration")
    if cp.has_section("features"):
        kw["features"] = _csv(cp["features"].get("groups", "all"))
    if cp.has_section("labels"):
        s = cp["labels"]
        kw["rule_path"] = s.get("rule", "").strip()
        kw["levels"] = _number(s.get("levels", "4"), int, "levels")
    if cp.has_section("classifier"):
        params = {k: _auto(v.strip()) for k, v in cp["classifier"].items()}
        if "kind" not in params:
            raise ConfigError("[classifier] needs a kind")
        kw["classifier"] = params
    if cp.has_section("cv"):
        s = cp["cv"]
        kw["folds"] = _number(s.get("folds", "5"), int, "folds")
        kw["split"] = s.get("split", "stratified").strip()
    if cp.has_section("run"):
        s = cp["run"]
        if "seed" in s:
            kw["seed"] = parse_seed(s["seed"])
        if "out" in s:
            out = Path(s["out"].strip())
            kw["out"] = str(out if out.is_absolute() else Path(base_dir) / out)
    return PipelineConfig(**kw)


def parse_seed(value) -> int:
    seed = _number(str(value).strip(), int, "seed")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return seed


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), str(path.parent))
