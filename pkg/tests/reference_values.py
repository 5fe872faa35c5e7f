"""Published reference values used as acceptance targets."""

# Per-situation (mean, SD) of valence and arousal ratings.
PUBLISHED_STATS = [
    ((2.13, 1.68), (6.13, 2.63)),
    ((3.43, 1.44), (5.13, 2.68)),
    ((1.86, 1.25), (6.04, 1.69)),
    ((3.86, 1.79), (4.30, 2.47)),
    ((3.30, 1.63), (5.95, 2.24)),
    ((2.26, 1.54), (6.30, 2.18)),
]
PUBLISHED_MEAN_CV = (0.58, 0.42)

# Four-level class counts over 15 s half-trials (each rating labels two halves).
PUBLISHED_COUNTS = {"normal": 156, "light": 20, "moderate": 10, "severe": 90}
HALVES_PER_RATING = 2

# Share of the majority class in the two-level problem.
MAJORITY_BASELINE = 0.64
