"""Cross-entropy training of the recognizer."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from common.errors import ArgumentError, DimensionError, StateError
from topface.pointcloud import PointCloud
from topface.schemas import RecognizerTrainingConfig
from topface.tensor import Adam, load_checkpoint, no_grad, save_modules, softmax_cross_entropy

from .ldgcnn import RecognizerNet, subsample_indices

logger = logging.getLogger(__name__)

CHECKPOINT_PREFIX = "ldgcnn/"


@dataclass(frozen=True)
class RecognizerEpoch:
    epoch: int
    loss: float
    accuracy: float


@dataclass
class RecognizerTrainingResult:
    net: RecognizerNet
    log: List[RecognizerEpoch] = field(default_factory=list)

    @property
    def final_accuracy(self) -> float:
        return self.log[-1].accuracy


def _labels(clouds: Sequence[PointCloud]) -> np.ndarray:
    if not clouds:
        raise ArgumentError("training set is empty")
    if any(pc.identity is None for pc in clouds):
        raise ArgumentError("every training cloud needs an identity label")
    return np.array([pc.identity for pc in clouds], dtype=np.int64)


def _usable(clouds: Sequence[PointCloud], k: int) -> List[PointCloud]:
    kept = [pc for pc in clouds if pc.n_points > k]
    if len(kept) < len(clouds):
        logger.warning("RECOGNIZER_SKIP_SMALL skipped=%d k=%d", len(clouds) - len(kept), k)
    return kept


def evaluate_recognizer(
    net: RecognizerNet,
    clouds: Sequence[PointCloud],
    labels: np.ndarray,
    point_budget: int,
    seed: int,
) -> Tuple[float, float]:
    """Mean cross-entropy and accuracy in evaluation mode."""
    losses, hits = [], 0
    with no_grad():
        for pc, label in zip(clouds, labels):
            idx = subsample_indices(pc.n_points, point_budget, seed)
            logits = net.trace(pc.points[idx], training=False).logits
            losses.append(softmax_cross_entropy(logits, int(label)).item())
            hits += int(np.argmax(logits.values) == label)
    return float(np.mean(losses)), hits / len(labels)


def train_recognizer(
    clouds: Sequence[PointCloud],
    config: RecognizerTrainingConfig,
    net: Optional[RecognizerNet] = None,
    n_classes: Optional[int] = None,
) -> RecognizerTrainingResult:
    """Minimize cross-entropy over labelled clouds; ``net`` continues from given weights.

    Clouds with no more than ``config.k`` points cannot form a neighbour graph
    and are skipped with a warning.
    """
    clouds = _usable(clouds, config.k)
    labels = _labels(clouds)
    if np.unique(labels).size < 2:
        raise ArgumentError("recognizer training needs at least 2 identities")
    n_classes = n_classes or int(labels.max()) + 1
    if net is None:
        net = RecognizerNet(n_classes, config)
    if net.n_classes <= int(labels.max()):
        raise DimensionError(f"label {int(labels.max())} outside the net's {net.n_classes} classes")

    optimizer = Adam(net.parameters(), lr=config.lr, beta1=config.beta1, beta2=config.beta2)
    rng = np.random.default_rng([config.seed, 1])
    loss, acc = evaluate_recognizer(net, clouds, labels, config.point_budget, config.seed)
    result = RecognizerTrainingResult(net=net, log=[RecognizerEpoch(0, loss, acc)])
    logger.info("RECOGNIZER_EPOCH epoch=0 loss=%.4f acc=%.3f", loss, acc)

    for epoch in range(1, config.epochs + 1):
        net.train()
        order = rng.permutation(len(clouds))
        losses = []
        for start in range(0, len(order), config.batch):
            batch = order[start : start + config.batch]
            optimizer.zero_grad()
            for i in batch:
                pc = clouds[i]
                idx = subsample_indices(pc.n_points, config.point_budget, int(rng.integers(2**31)))
                logits = net.trace(pc.points[idx], rng=rng, training=True).logits
                sample_loss = softmax_cross_entropy(logits, int(labels[i]))
                sample_loss.backward()
                losses.append(sample_loss.item())
            optimizer.step(scale=1.0 / len(batch))
            logger.debug("RECOGNIZER_BATCH epoch=%d start=%d size=%d", epoch, start, len(batch))
        net.eval()
        _, acc = evaluate_recognizer(net, clouds, labels, config.point_budget, config.seed)
        result.log.append(RecognizerEpoch(epoch, float(np.mean(losses)), acc))
        logger.info("RECOGNIZER_EPOCH epoch=%d loss=%.4f acc=%.3f", epoch, result.log[-1].loss, acc)

    net.eval()
    return result


def save_recognizer(net: RecognizerNet, path: Union[str, Path]) -> None:
    save_modules({CHECKPOINT_PREFIX: net}, path)


def load_recognizer(path: Union[str, Path], config: RecognizerTrainingConfig) -> RecognizerNet:
    """Rebuild a recognizer from its checkpoint; the class count comes from the classifier weight."""
    if not Path(path).is_file():
        raise StateError(f"recognizer checkpoint not found: {path}", stage="recognizer")
    arrays = load_checkpoint(path)
    key = CHECKPOINT_PREFIX + "classifier.weight"
    if key not in arrays:
        raise StateError(f"{path} holds no recognizer weights", stage="recognizer")
    net = RecognizerNet(int(arrays[key].shape[0]), config)
    net.load_state_dict(arrays, prefix=CHECKPOINT_PREFIX)
    net.eval()
    return net
