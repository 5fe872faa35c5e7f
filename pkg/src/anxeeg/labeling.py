"""SAM quadrants, anxiety-level rules and rating statistics."""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

from anxeeg.errors import LabelingError

SCALE = (1, 9)
QUADRANTS = ("LVLA", "HVLA", "LVHA", "HVHA")
FOUR_LEVELS = ("normal", "light", "moderate", "severe")
TWO_LEVELS = ("light", "severe")
LABEL_TABLE_COLUMNS = ("subject", "situation", "valence", "arousal", "label4", "label2")


@dataclass(frozen=True)
class SamRating:
    valence: int
    arousal: int

    def __post_init__(self) -> None:
        lo, hi = SCALE
        for name in ("valence", "arousal"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not lo <= v <= hi:
                raise LabelingError(f"{name} {v!r} outside the {lo}..{hi} scale")


@dataclass(frozen=True)
class AnxietyLabel:
    four_level: str

    def __post_init__(self) -> None:
        if self.four_level not in FOUR_LEVELS:
            raise LabelingError(f"unknown anxiety level {self.four_level!r}")

    @property
    def two_level(self) -> str:
        return "light" if self.four_level in ("normal", "light") else "severe"

    @property
    def severity(self) -> int:
        return FOUR_LEVELS.index(self.four_level)

    def at(self, levels: int) -> str:
        if levels == 4:
            return self.four_level
        if levels == 2:
            return self.two_level
        raise LabelingError(f"levels must be 2 or 4, got {levels}")


@dataclass(frozen=True)
class LabelRule:
    """Threshold table; a region ``v <= *_valence_max and a >= *_arousal_min``."""

    low_valence_max: int = 5
    high_arousal_min: int = 5
    moderate_valence_max: int = 4
    moderate_arousal_min: int = 5
    severe_valence_max: int = 2
    severe_arousal_min: int = 6

    def __post_init__(self) -> None:
        lo, hi = SCALE
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, np.integer)) or not lo - 1 <= v <= hi + 1:
                raise LabelingError(f"rule threshold {f.name}={v!r} outside {lo - 1}..{hi + 1}")

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str) -> "LabelRule":
        values: dict[str, int] = {}
        known = {f.name for f in fields(cls)}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise LabelingError(f"rule line {lineno}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            if key not in known:
                raise LabelingError(f"rule line {lineno}: unknown key {key!r}")
            try:
                values[key] = int(value)
            except ValueError:
                raise LabelingError(f"rule line {lineno}: {key} is not an integer") from None
        return cls(**values)


DEFAULT_RULE = LabelRule()


def quadrant(r: SamRating, rule: LabelRule = DEFAULT_RULE) -> str:
    """Valence at or below the midpoint is Low; arousal at or above it is High."""
    low_v = r.valence <= rule.low_valence_max
    high_a = r.arousal >= rule.high_arousal_min
    return ("L" if low_v else "H") + "V" + ("H" if high_a else "L") + "A"


def label_trial(r: SamRating, rule: LabelRule = DEFAULT_RULE) -> AnxietyLabel:
    if r.valence <= rule.severe_valence_max and r.arousal >= rule.severe_arousal_min:
        return AnxietyLabel("severe")
    if r.valence <= rule.moderate_valence_max and r.arousal >= rule.moderate_arousal_min:
        return AnxietyLabel("moderate")
    if quadrant(r, rule) == "LVHA":
        return AnxietyLabel("light")
    return AnxietyLabel("normal")


def label_grid(rule: LabelRule = DEFAULT_RULE) -> np.ndarray:
    """Severity index on the 9x9 grid, ``[valence - 1, arousal - 1]``."""
    lo, hi = SCALE
    n = hi - lo + 1
    out = np.zeros((n, n), dtype=int)
    for v, a in itertools.product(range(lo, hi + 1), repeat=2):
        out[v - lo, a - lo] = label_trial(SamRating(v, a), rule).severity
    return out


def class_counts(ratings: Iterable[SamRating], rule: LabelRule = DEFAULT_RULE) -> dict[str, int]:
    counts = dict.fromkeys(FOUR_LEVELS, 0)
    for r in ratings:
        counts[label_trial(r, rule).four_level] += 1
    return counts


def _rule_distance(a: LabelRule, b: LabelRule) -> int:
    return sum(abs(x - y) for x, y in zip(asdict(a).values(), asdict(b).values()))


def calibrate_rule(ratings: Sequence[SamRating], target: Mapping[str, int],
                   base: LabelRule = DEFAULT_RULE) -> tuple[LabelRule, dict[str, int], int]:
    """Grid-search severe/moderate thresholds to match target class counts.

    The quadrant midpoints of ``base`` are kept. Nested regions are enforced
    (severe within moderate within LVHA), which keeps every candidate
    monotone. Ties on total absolute count error go to the rule closest to
    ``base``. Returns ``(rule, counts, error)``.
    """
    if not ratings:
        raise LabelingError("no ratings to calibrate against")
    lo, hi = SCALE
    vmax, amin = base.low_valence_max, base.high_arousal_min
    pts = np.array([(r.valence, r.arousal) for r in ratings])
    best = None
    for mv in range(lo - 1, vmax + 1):
        for ma in range(amin, hi + 2):
            for sv in range(lo - 1, mv + 1):
                for sa in range(ma, hi + 2):
                    rule = LabelRule(vmax, amin, mv, ma, sv, sa)
                    counts = _fast_counts(pts, rule)
                    err = sum(abs(counts[k] - target.get(k, 0)) for k in FOUR_LEVELS)
                    key = (err, _rule_distance(rule, base), tuple(asdict(rule).values()))
                    if best is None or key < best[0]:
                        best = (key, rule, counts)
    (err, _, _), rule, counts = best
    return rule, counts, err


def _fast_counts(pts: np.ndarray, rule: LabelRule) -> dict[str, int]:
    v, a = pts[:, 0], pts[:, 1]
    severe = (v <= rule.severe_valence_max) & (a >= rule.severe_arousal_min)
    moderate = ~severe & (v <= rule.moderate_valence_max) & (a >= rule.moderate_arousal_min)
    light = ~severe & ~moderate & (v <= rule.low_valence_max) & (a >= rule.high_arousal_min)
    n_s, n_m, n_l = int(severe.sum()), int(moderate.sum()), int(light.sum())
    return {"normal": len(v) - n_s - n_m - n_l, "light": n_l, "moderate": n_m, "severe": n_s}


@dataclass(frozen=True)
class SituationStats:
    situation: int
    n: int
    valence_mean: float
    valence_sd: float
    arousal_mean: float
    arousal_sd: float

    @property
    def valence_cv(self) -> float:
        return self.valence_sd / self.valence_mean

    @property
    def arousal_cv(self) -> float:
        return self.arousal_sd / self.arousal_mean


@dataclass(frozen=True)
class RatingStats:
    situations: tuple[SituationStats, ...]
    sd: str

    @property
    def mean_cv(self) -> tuple[float, float]:
        """Mean over situations of (valence CV, arousal CV)."""
        return (float(np.mean([s.valence_cv for s in self.situations])),
                float(np.mean([s.arousal_cv for s in self.situations])))

    def to_text(self) -> str:
        lines = [f"situation\tn\tvalence\tarousal  (sd={self.sd})"]
        for s in self.situations:
            lines.append(f"{s.situation}\t{s.n}\t{s.valence_mean:.2f} +- {s.valence_sd:.2f}"
                         f"\t{s.arousal_mean:.2f} +- {s.arousal_sd:.2f}")
        cv_v, cv_a = self.mean_cv
        lines.append(f"mean CV\t\t{cv_v:.2f}\t{cv_a:.2f}")
        return "\n".join(lines) + "\n"


def mean_sd(values: Sequence[float], sd: str = "population") -> tuple[float, float]:
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise LabelingError("empty rating group")
    if sd not in ("population", "sample"):
        raise LabelingError(f"sd must be 'population' or 'sample', got {sd!r}")
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=0 if sd == "population" else 1))


def rating_stats(grouped: Mapping[int, Sequence[SamRating]], sd: str = "population") -> RatingStats:
    """Per-situation mean and SD of valence/arousal (population SD by default)."""
    if not grouped:
        raise LabelingError("no situations")
    out = []
    for situation in sorted(grouped):
        group = grouped[situation]
        if not group:
            raise LabelingError(f"situation {situation}: empty rating group")
        vm, vs = mean_sd([r.valence for r in group], sd)
        am, as_ = mean_sd([r.arousal for r in group], sd)
        out.append(SituationStats(situation, len(group), vm, vs, am, as_))
    return RatingStats(tuple(out), sd)


# -- tables ---------------------------------------------------------------------


def read_ratings(text: str) -> dict[tuple[str, int], SamRating]:
    """Parse ``subject,situation,valence,arousal`` rows (header required)."""
    reader = csv.DictReader(io.StringIO(text))
    need = {"subject", "situation", "valence", "arousal"}
    if reader.fieldnames is None or need - set(f.strip() for f in reader.fieldnames):
        raise LabelingError(f"ratings table needs columns {sorted(need)}")
    out = {}
    for lineno, row in enumerate(reader, 2):
        row = {k.strip(): (v or "").strip() for k, v in row.items()}
        try:
            key = (row["subject"], int(row["situation"]))
            rating = SamRating(int(row["valence"]), int(row["arousal"]))
        except ValueError as exc:
            raise LabelingError(f"ratings line {lineno}: {exc}") from None
        if key in out:
            raise LabelingError(f"ratings line {lineno}: duplicate {key}")
        out[key] = rating
    return out


def write_ratings(ratings: Mapping[tuple[str, int], SamRating]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject", "situation", "valence", "arousal"])
    for (subject, situation), r in sorted(ratings.items()):
        w.writerow([subject, situation, r.valence, r.arousal])
    return buf.getvalue()


def write_label_table(ratings: Mapping[tuple[str, int], SamRating],
                      rule: LabelRule = DEFAULT_RULE) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(LABEL_TABLE_COLUMNS)
    for (subject, situation), r in sorted(ratings.items()):
        lab = label_trial(r, rule)
        w.writerow([subject, situation, r.valence, r.arousal, lab.four_level, lab.two_level])
    return buf.getvalue()


def read_label_table(text: str) -> dict[tuple[str, int], AnxietyLabel]:
    rows = list(csv.DictReader(io.StringIO(text), delimiter="\t"))
    if rows and set(LABEL_TABLE_COLUMNS) - set(rows[0]):
        raise LabelingError("label table is missing columns")
    out = {}
    for r in rows:
        lab = AnxietyLabel(r["label4"])
        if lab.two_level != r["label2"]:
            raise LabelingError(f"inconsistent 2-level label for {r['subject']}/{r['situation']}")
        out[(r["subject"], int(r["situation"]))] = lab
    return out


def group_by_situation(ratings: Mapping[tuple[str, int], SamRating]) -> dict[int, list[SamRating]]:
    out: dict[int, list[SamRating]] = {}
    for (_, situation), r in sorted(ratings.items()):
        out.setdefault(situation, []).append(r)
    return out
