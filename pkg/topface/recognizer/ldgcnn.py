"""Linked dynamic graph CNN recognizer.

Layer 1 builds its KNN graph from the (scaled) coordinates. Every later
layer takes the concatenation of the coordinates and all earlier layer
outputs, rebuilds its graph in that feature space and applies an edge
convolution. The linked per-point matrix (coordinates plus every layer
output) goes through a shared linear map and a max over points to give the
global vector, which the classifier head turns into logits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from common.concurrency import map_ordered
from common.errors import ArgumentError
from topface.pointcloud import PointCloud
from topface.schemas import RecognizerTrainingConfig
from topface.tensor import Linear, Module, ModuleList, Tensor, concat, dropout, leaky_relu, no_grad

from .edge_conv import LEAKY_SLOPE, EdgeConvLayer
from .knn import KnnGraph, knn


@dataclass(frozen=True)
class LinkedFeatures:
    per_point: np.ndarray
    global_vector: np.ndarray

    @property
    def width(self) -> int:
        return int(self.per_point.shape[1])


@dataclass
class ForwardTrace:
    """Differentiable forward result plus the graphs each layer used."""

    logits: Tensor
    per_point: Tensor
    global_features: Tensor
    graphs: List[KnnGraph]

    def linked(self) -> LinkedFeatures:
        return LinkedFeatures(per_point=self.per_point.values.copy(), global_vector=self.global_features.values.copy())


class RecognizerNet(Module):
    def __init__(self, n_classes: int, config: Optional[RecognizerTrainingConfig] = None):
        super().__init__()
        config = config or RecognizerTrainingConfig()
        if n_classes < 2:
            raise ArgumentError(f"a recognizer needs at least 2 classes, got {n_classes}")
        rng = np.random.default_rng(config.seed)
        self.n_classes = n_classes
        self.k = config.k
        self.widths = tuple(config.widths)
        self.coordinate_scale = config.coordinate_scale
        self.dropout_p = config.dropout

        layers = []
        in_dim = 3
        for width in self.widths:
            layers.append(EdgeConvLayer(in_dim, width, rng))
            in_dim += width
        self.layers = ModuleList(layers)
        self.linked_width = in_dim
        self.global_width = config.global_width
        self.global_mlp = Linear(in_dim, config.global_width, rng)
        self.classifier = Linear(config.global_width, n_classes, rng)

    def global_pool(self, per_point: Tensor) -> Tensor:
        """Max over points of the shared per-point map; (F,) output."""
        return leaky_relu(self.global_mlp(per_point), LEAKY_SLOPE).max(axis=0)

    def trace(
        self,
        points: Union[Tensor, np.ndarray],
        rng: Optional[np.random.Generator] = None,
        training: Optional[bool] = None,
    ) -> ForwardTrace:
        """Forward pass over an (N, 3) coordinate tensor.

        Dropout is active when ``training`` (default: ``self.training``) is set.
        """
        training = self.training if training is None else training
        points = Tensor.lift(points)
        if points.ndim != 2 or points.shape[1] != 3:
            raise ArgumentError(f"points must be (N, 3), got {points.shape}")
        n = points.shape[0]
        if n <= self.k:
            raise ArgumentError(f"cloud has {n} points, needs more than k={self.k}")

        features = [points * (1.0 / self.coordinate_scale)]
        graphs: List[KnnGraph] = []
        for idx, layer in enumerate(self.layers):
            x = features[0] if len(features) == 1 else concat(features, axis=1)
            graph = knn(x.values, self.k, built_from="coordinates" if idx == 0 else f"layer-{idx}")
            graphs.append(graph)
            features.append(layer(x, graph))
        per_point = concat(features, axis=1)
        global_features = self.global_pool(per_point)
        hidden = dropout(global_features, self.dropout_p, rng, training)
        logits = self.classifier(hidden)
        return ForwardTrace(logits=logits, per_point=per_point, global_features=global_features, graphs=graphs)


def forward(net: RecognizerNet, pc: PointCloud) -> Tuple[np.ndarray, LinkedFeatures]:
    """Evaluation-mode logits and linked features of one cloud."""
    with no_grad():
        result = net.trace(pc.points, training=False)
    return result.logits.values.copy(), result.linked()


def extract_linked_features(net: RecognizerNet, pc: PointCloud) -> LinkedFeatures:
    return forward(net, pc)[1]


def subsample_indices(n_points: int, budget: int, seed: int) -> np.ndarray:
    """Sorted seeded subset of ``budget`` indices, or all indices when the cloud is small."""
    if n_points <= budget:
        return np.arange(n_points)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_points, size=budget, replace=False))


def classify(net: RecognizerNet, pc: PointCloud, point_budget: int, seed: int = 0) -> int:
    """Class index of one cloud evaluated on a seeded point subset."""
    idx = subsample_indices(pc.n_points, point_budget, seed)
    logits, _ = forward(net, pc.subset(idx))
    return int(np.argmax(logits))


def predict(
    net: RecognizerNet,
    clouds: Sequence[PointCloud],
    point_budget: int,
    seed: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """Class index per cloud; inference fans out over ``workers`` threads."""
    labels = map_ordered(lambda pc: classify(net, pc, point_budget, seed), clouds, workers)
    return np.asarray(labels, dtype=np.int64)
