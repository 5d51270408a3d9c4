"""Edge convolution with one shared linear map per layer.

For point i and neighbour j the edge feature (f_i, f_j − f_i) goes through
W = [W_a | W_b] and a leaky ReLU, then a max over the k neighbours. Because
W·(f_i, f_j − f_i) = (W_a − W_b)·f_i + W_b·f_j and the activation is
monotone, the layer is computed as

    leaky(b + (W_a − W_b)·f_i + max_j W_b·f_j)

without materializing the N×k×2D edge tensor.
"""

from __future__ import annotations

import numpy as np

from common.errors import DimensionError
from topface.tensor import Module, Parameter, Tensor, leaky_relu, linear
from topface.tensor.module import he_normal

from .knn import KnnGraph

LEAKY_SLOPE = 0.2


class EdgeConvLayer(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Parameter(he_normal(rng, (out_features, 2 * in_features), 2 * in_features))
        self.bias = Parameter(np.zeros(out_features))

    def __call__(self, features: Tensor, graph: KnnGraph) -> Tensor:
        return edge_conv(features, graph, self)


def edge_conv(features: Tensor, graph: KnnGraph, layer: EdgeConvLayer) -> Tensor:
    """(N, D) features over a KNN graph to (N, W) outputs."""
    if features.ndim != 2 or features.shape[1] != layer.in_features:
        raise DimensionError(
            f"edge_conv layer expects (N, {layer.in_features}) features, got {features.shape}"
        )
    if graph.n_points != features.shape[0]:
        raise DimensionError(
            f"graph has {graph.n_points} points but features have {features.shape[0]} rows"
        )
    d = layer.in_features
    w_center = layer.weight[:, :d]
    w_neighbor = layer.weight[:, d:]
    center = linear(features, w_center - w_neighbor, layer.bias)
    neighbor = linear(features, w_neighbor)
    pooled = neighbor.take_rows(graph.neighbors).max(axis=1)
    return leaky_relu(center + pooled, LEAKY_SLOPE)
