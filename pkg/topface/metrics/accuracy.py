from __future__ import annotations

from typing import Sequence

import numpy as np

from common.errors import ArgumentError, DimensionError


def accuracy(predictions: Sequence[int], truth: Sequence[int]) -> float:
    """Fraction of exact label matches."""
    predictions, truth = np.asarray(predictions), np.asarray(truth)
    if predictions.shape != truth.shape:
        raise DimensionError(f"{predictions.size} predictions for {truth.size} labels")
    if truth.size == 0:
        raise ArgumentError("accuracy of an empty label set is undefined")
    return float(np.count_nonzero(predictions == truth)) / truth.size
