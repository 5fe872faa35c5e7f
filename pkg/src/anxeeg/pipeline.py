"""Resumable pipeline stages writing versioned artifacts under one output directory.

Each stage writes ``<out>/<stage>/`` plus a ``stage.json`` sidecar holding its
configuration fingerprint. Downstream stages refuse missing or stale
upstream artifacts.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from anxeeg.classify.cv import ModelSpec, cross_validate, fit_model
from anxeeg.classify.dataset import Dataset, MinMaxScaler
from anxeeg.classify.serialize import arrays_to_npz, model_to_bytes
from anxeeg.config import STAGE_DEPENDS, PipelineConfig
from anxeeg.edf import read_columnar, read_edf, write_columnar
from anxeeg.errors import FeatureError, LabelingError, StageArtifactError, StaleArtifactError
from anxeeg.features.extract import extract_trial, manifest_table, resolve_families
from anxeeg.labeling import (DEFAULT_RULE, LabelRule, SamRating, class_counts,
                             group_by_situation, rating_stats, read_label_table, read_ratings,
                             write_label_table, write_ratings)
from anxeeg.preprocess import (Trial, fir_bandpass, read_trial_table, segment_trials,
                               subsegment, write_trial_table)
from anxeeg.recording import EEG_CHANNELS
from anxeeg.rng import stage_rng

ARTIFACT_FORMAT = 1


def _stage_dir(cfg: PipelineConfig, stage: str) -> Path:
    return Path(cfg.out) / stage


def _write_sidecar(cfg: PipelineConfig, stage: str, **info) -> None:
    doc = {"format": ARTIFACT_FORMAT, "stage": stage,
           "fingerprint": cfg.stage_fingerprint(stage),
           "upstream": {u: cfg.stage_fingerprint(u) for u in STAGE_DEPENDS[stage]}}
    doc.update(info)
    (_stage_dir(cfg, stage) / "stage.json").write_text(json.dumps(doc, indent=2, sort_keys=True)
                                                       + "\n")


def _require(cfg: PipelineConfig, stage: str) -> dict:
    path = _stage_dir(cfg, stage) / "stage.json"
    if not path.exists():
        raise StageArtifactError(f"missing stage artifact: {stage} (run --stage {stage} first)")
    doc = json.loads(path.read_text())
    if doc.get("fingerprint") != cfg.stage_fingerprint(stage):
        raise StaleArtifactError(f"{stage} artifacts were produced with a different "
                                 f"configuration; re-run --stage {stage}")
    return doc


def _fresh_dir(cfg: PipelineConfig, stage: str) -> Path:
    d = _stage_dir(cfg, stage)
    d.mkdir(parents=True, exist_ok=True)
    for old in d.iterdir():
        if old.is_file():
            old.unlink()
    return d


def _input_files(cfg: PipelineConfig) -> list[Path]:
    files: list[Path] = []
    for p in cfg.inputs:
        path = cfg.resolve(p)
        if path.is_dir():
            files.extend(sorted(path.glob("*.edf")) + sorted(path.glob("*.EDF")))
        else:
            files.append(path)
    if not files:
        raise StageArtifactError("no input recordings found")
    return files


# -- stages ---------------------------------------------------------------------


def run_ingest(cfg: PipelineConfig) -> None:
    out = _fresh_dir(cfg, "ingest")
    subjects = []
    for path in _input_files(cfg):
        if path.suffix.lower() == ".edf":
            rec = read_edf(path, subject_id=path.stem)
        else:
            rec = read_columnar(path.read_bytes())
            if not rec.subject_id:
                rec = type(rec)(rec.channels, rec.sample_rate, rec.data, path.stem)
        if rec.subject_id in subjects:
            raise StageArtifactError(f"duplicate subject {rec.subject_id!r}")
        subjects.append(rec.subject_id)
        (out / f"{rec.subject_id}.txt").write_bytes(write_columnar(rec))
    ratings = read_ratings(cfg.resolve(cfg.ratings).read_text()) if cfg.ratings else {}
    (out / "ratings.csv").write_text(write_ratings(ratings))
    _write_sidecar(cfg, "ingest", subjects=subjects)


def run_preprocess(cfg: PipelineConfig) -> None:
    doc = _require(cfg, "ingest")
    src = _stage_dir(cfg, "ingest")
    ratings = read_ratings((src / "ratings.csv").read_text())
    out = _fresh_dir(cfg, "preprocess")
    trials: list[Trial] = []
    for subject in doc["subjects"]:
        rec = read_columnar((src / f"{subject}.txt").read_bytes())
        missing = [c for c in EEG_CHANNELS if c not in rec.channels]
        if missing:
            raise FeatureError(f"{subject}: missing EEG channels {missing}")
        rec = fir_bandpass(rec.pick(EEG_CHANNELS), cfg.filter)
        per = {k: (r.valence, r.arousal) for (s, k), r in ratings.items() if s == subject}
        for t in segment_trials(rec, per):
            trials.append(t)
            body = type(rec)(t.channels, t.sample_rate, t.data, subject)
            extra = {"situation": str(t.situation), "head": str(t.transient_head),
                     "tail": str(t.transient_tail)}
            (out / f"{subject}_s{t.situation}.txt").write_bytes(write_columnar(body, extra))
    (out / "trials.tsv").write_text(write_trial_table(trials))
    _write_sidecar(cfg, "preprocess", trials=len(trials))


def load_trials(cfg: PipelineConfig) -> list[Trial]:
    _require(cfg, "preprocess")
    d = _stage_dir(cfg, "preprocess")
    trials = []
    for row in read_trial_table((d / "trials.tsv").read_text()):
        rec = read_columnar((d / f"{row['subject']}_s{row['situation']}.txt").read_bytes())
        trials.append(Trial(row["subject"], row["situation"], rec.channels, rec.sample_rate,
                            rec.data, row["duration"], row["valence"], row["arousal"],
                            transient_head=int(rec.meta.get("head", 0)),
                            transient_tail=int(rec.meta.get("tail", 0))))
    return trials


def run_extract(cfg: PipelineConfig) -> None:
    trials = load_trials(cfg)
    families = resolve_families(cfg.features)
    out = _fresh_dir(cfg, "extract")
    rows, keys = [], []
    layout = None
    for t in trials:
        for sub in subsegment(t, cfg.duration):
            vecs = extract_trial(sub, families)
            this = [(v.family, v.group, len(v)) for v in vecs]
            if layout is None:
                layout = this
                names = [n for v in vecs for n in v.names]
            elif this != layout:
                raise FeatureError(f"{sub.key()}: feature layout differs from the first trial")
            rows.append(np.concatenate([v.values for v in vecs]))
            keys.append((sub.subject_id, sub.situation, sub.index))
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(["subject", "situation", "index"] + names)
    for (s, k, i), values in zip(keys, rows):
        w.writerow([s, k, i] + [format(float(v), ".17g") for v in values])
    (out / "features.tsv").write_text(buf.getvalue())
    blocks, pos = [], 0
    for fam, group, n in layout:
        blocks.append([fam, group, pos, pos + n])
        pos += n
    (out / "manifest.tsv").write_text(manifest_table(cfg.duration))
    _write_sidecar(cfg, "extract", rows=len(rows), dimension=pos, blocks=blocks,
                   duration=cfg.duration)


def run_label(cfg: PipelineConfig) -> None:
    trials = load_trials(cfg)
    rule = (LabelRule.from_text(cfg.resolve(cfg.rule_path).read_text())
            if cfg.rule_path else DEFAULT_RULE)
    ratings = {}
    for t in trials:
        if t.valence is None or t.arousal is None:
            raise LabelingError(f"no rating for subject {t.subject_id} situation {t.situation}")
        ratings[(t.subject_id, t.situation)] = SamRating(t.valence, t.arousal)
    out = _fresh_dir(cfg, "label")
    (out / "labels.tsv").write_text(write_label_table(ratings, rule))
    (out / "rule.txt").write_text(rule.to_text())
    counts = class_counts(ratings.values(), rule)
    (out / "rating_stats.txt").write_text(rating_stats(group_by_situation(ratings)).to_text())
    _write_sidecar(cfg, "label", counts=counts)


def load_dataset(cfg: PipelineConfig) -> Dataset:
    ex = _require(cfg, "extract")
    _require(cfg, "label")
    labels = read_label_table((_stage_dir(cfg, "label") / "labels.tsv").read_text())
    rows = list(csv.reader(io.StringIO((_stage_dir(cfg, "extract") / "features.tsv").read_text()),
                           delimiter="\t"))
    header, body = rows[0], rows[1:]
    X = np.array([[float(v) for v in r[3:]] for r in body]).reshape(len(body), len(header) - 3)
    keys = [(r[0], int(r[1]), int(r[2])) for r in body]
    try:
        y = [labels[(s, k)].at(cfg.levels) for s, k, _ in keys]
    except KeyError as exc:
        raise StageArtifactError(f"no label for trial {exc.args[0]}") from None
    blocks = tuple(tuple(b) for b in ex["blocks"])
    return Dataset(X, np.array(y, dtype=object), tuple(header[3:]), blocks,
                   tuple(s for s, _, _ in keys), tuple(keys))


def _spec(cfg: PipelineConfig) -> ModelSpec:
    params = dict(cfg.classifier)
    return ModelSpec(params.pop("kind"), params)


def run_train(cfg: PipelineConfig) -> None:
    data = load_dataset(cfg)
    spec = _spec(cfg)
    scaler = MinMaxScaler.fit(data.X)
    model = fit_model(spec, scaler.transform(data.X), data.y, stage_rng(cfg.seed, "train", 0))
    out = _fresh_dir(cfg, "train")
    fp = {"stage": cfg.stage_fingerprint("train"), "model": spec.fingerprint(),
          "levels": cfg.levels, "n_features": data.n_features}
    (out / "model.npz").write_bytes(model_to_bytes(model, fp))
    (out / "scaler.npz").write_bytes(arrays_to_npz({"low": scaler.low, "span": scaler.span}))
    _write_sidecar(cfg, "train", model=spec.kind, n_features=data.n_features)


def run_evaluate(cfg: PipelineConfig) -> None:
    data = load_dataset(cfg)
    spec = _spec(cfg)
    report = cross_validate(
        data.X, data.y, spec, cfg.folds, cfg.seed, groups=data.subjects, split=cfg.split,
        extra={"stage": cfg.stage_fingerprint("evaluate"), "levels": cfg.levels,
               "duration": cfg.duration, "features": list(cfg.features),
               "dimensions": data.dimensions, "group_dimensions": data.group_dimensions})
    out = _fresh_dir(cfg, "evaluate")
    (out / "report.json").write_text(report.to_json())
    (out / "report.txt").write_text(report.to_text())
    _write_sidecar(cfg, "evaluate", mean_accuracy=report.mean_accuracy)


def run_report(cfg: PipelineConfig) -> None:
    _require(cfg, "evaluate")
    ex = _require(cfg, "extract")
    lab = _require(cfg, "label")
    out = _fresh_dir(cfg, "report")
    parts = ["# feature manifest", manifest_table(cfg.duration),
             f"# extracted dimension\t{ex['dimension']}",
             "# label counts\t" + "\t".join(f"{k}={v}" for k, v in lab["counts"].items()),
             "# rating statistics",
             (_stage_dir(cfg, "label") / "rating_stats.txt").read_text(),
             "# cross-validation",
             (_stage_dir(cfg, "evaluate") / "report.txt").read_text()]
    (out / "summary.txt").write_text("\n".join(parts))
    _write_sidecar(cfg, "report")


STAGES = {
    "ingest": run_ingest,
    "preprocess": run_preprocess,
    "extract": run_extract,
    "label": run_label,
    "train": run_train,
    "evaluate": run_evaluate,
    "report": run_report,
}
