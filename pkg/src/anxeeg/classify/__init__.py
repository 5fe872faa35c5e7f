"""Classifiers and the cross-validation harness."""

from anxeeg.classify.cv import CvReport, ModelSpec, cross_validate, stratified_folds
from anxeeg.classify.dataset import Dataset, MinMaxScaler, group_features
from anxeeg.classify.knn import KnnModel, knn_classify
from anxeeg.classify.ssae import SsaeConfig, SsaeModel, ssae_train
from anxeeg.classify.svm import SvmModel, svm_train

__all__ = ["CvReport", "Dataset", "KnnModel", "MinMaxScaler", "ModelSpec", "SsaeConfig",
           "SsaeModel", "SvmModel", "cross_validate", "group_features", "knn_classify",
           "ssae_train", "stratified_folds", "svm_train"]
