"""EEG anxiety-level detection: ingestion, features, labels and classifiers."""

__version__ = "0.1.0"
