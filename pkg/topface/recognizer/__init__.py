"""Linked dynamic graph CNN face recognizer."""

from .knn import KnnGraph, knn, squared_distances
from .edge_conv import EdgeConvLayer, edge_conv
from .ldgcnn import (
    ForwardTrace,
    LinkedFeatures,
    RecognizerNet,
    extract_linked_features,
    classify,
    forward,
    predict,
    subsample_indices,
)
from .trainer import (
    CHECKPOINT_PREFIX,
    RecognizerEpoch,
    RecognizerTrainingResult,
    evaluate_recognizer,
    load_recognizer,
    save_recognizer,
    train_recognizer,
)

__all__ = [
    "KnnGraph",
    "knn",
    "squared_distances",
    "EdgeConvLayer",
    "edge_conv",
    "RecognizerNet",
    "ForwardTrace",
    "LinkedFeatures",
    "forward",
    "classify",
    "extract_linked_features",
    "predict",
    "subsample_indices",
    "train_recognizer",
    "evaluate_recognizer",
    "RecognizerEpoch",
    "RecognizerTrainingResult",
    "save_recognizer",
    "load_recognizer",
    "CHECKPOINT_PREFIX",
]
