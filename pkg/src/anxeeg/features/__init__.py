"""Per-trial feature families."""

from anxeeg.features.extract import (FAMILIES, extract_trial, feature_names, manifest_dimension,
                                     manifest_table, resolve_families)
from anxeeg.features.vector import GROUPS, FeatureVector, concat

__all__ = ["FAMILIES", "GROUPS", "FeatureVector", "concat", "extract_trial", "feature_names",
           "manifest_dimension", "manifest_table", "resolve_families"]
