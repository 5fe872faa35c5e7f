"""Versioned model files: a ``.npz`` archive with a JSON ``meta`` entry."""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from anxeeg.classify.knn import KnnModel
from anxeeg.classify.ssae import Head, Layer, SsaeConfig, SsaeModel
from anxeeg.classify.svm import BinarySvm, SvmModel
from anxeeg.errors import StageArtifactError, TrainingError

FORMAT_VERSION = 1


def _labels(values) -> list:
    return [v.item() if isinstance(v, np.generic) else v for v in values]


def model_to_bytes(model, fingerprint: dict) -> bytes:
    arrays: dict[str, np.ndarray] = {}
    meta: dict = {"format": FORMAT_VERSION, "fingerprint": fingerprint}
    if isinstance(model, KnnModel):
        meta.update(kind="knn", k=model.k, labels=_labels(model.y.tolist()))
        arrays["X"] = model.X
    elif isinstance(model, SvmModel):
        meta.update(kind="svm", classes=_labels(model.classes), pairs=[])
        for n, (a, b, m) in enumerate(model.pairs):
            meta["pairs"].append({"a": a, "b": b, "bias": m.bias, "gamma": m.gamma, "C": m.C,
                                  "objective": m.objective, "violation": m.violation})
            arrays[f"sv{n}"] = m.support_vectors
            arrays[f"coef{n}"] = m.coef
    elif isinstance(model, SsaeModel):
        cfg = asdict(model.config)
        meta.update(kind="ssae", classes=_labels(model.classes), config=cfg,
                    layers=len(model.layers))
        for n, layer in enumerate(model.layers):
            arrays[f"W{n}"], arrays[f"b{n}"], arrays[f"bd{n}"] = layer.W, layer.b, layer.b_dec
        arrays["V"], arrays["c"] = model.head.V, model.head.c
    else:
        raise TrainingError(f"cannot serialize {type(model).__name__}")
    arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    return arrays_to_npz(arrays)


def arrays_to_npz(arrays: dict[str, np.ndarray]) -> bytes:
    """``.npz`` bytes with fixed entry timestamps, so equal inputs give equal files."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            entry = io.BytesIO()
            np.save(entry, np.asarray(arrays[name]), allow_pickle=False)
            zf.writestr(zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0)),
                        entry.getvalue())
    return buf.getvalue()


def model_from_bytes(data: bytes):
    with np.load(io.BytesIO(data), allow_pickle=False) as z:
        arrays = {k: z[k] for k in z.files}
    meta = json.loads(arrays.pop("meta").tobytes().decode())
    if meta.get("format") != FORMAT_VERSION:
        raise StageArtifactError(f"unsupported model format {meta.get('format')!r}")
    kind = meta["kind"]
    if kind == "knn":
        model = KnnModel(arrays["X"], np.array(meta["labels"], dtype=object), meta["k"])
    elif kind == "svm":
        pairs = tuple(
            (p["a"], p["b"], BinarySvm(arrays[f"sv{n}"], arrays[f"coef{n}"], p["bias"],
                                       p["gamma"], p["C"], p["objective"], p["violation"]))
            for n, p in enumerate(meta["pairs"]))
        model = SvmModel(tuple(meta["classes"]), pairs)
    elif kind == "ssae":
        cfg = meta["config"]
        if cfg.get("sizes") is not None:
            cfg["sizes"] = tuple(cfg["sizes"])
        layers = tuple(Layer(arrays[f"W{n}"], arrays[f"b{n}"], arrays[f"bd{n}"])
                       for n in range(meta["layers"]))
        model = SsaeModel(layers, Head(arrays["V"], arrays["c"]), tuple(meta["classes"]),
                          SsaeConfig(**cfg))
    else:
        raise StageArtifactError(f"unknown model kind {kind!r}")
    return model, meta["fingerprint"]


def save_model(model, path: str | Path, fingerprint: dict) -> None:
    Path(path).write_bytes(model_to_bytes(model, fingerprint))


def load_model(path: str | Path):
    return model_from_bytes(Path(path).read_bytes())
