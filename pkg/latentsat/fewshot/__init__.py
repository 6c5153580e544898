"""
在冻结编码器之上的少样本训练: 一个只有 129 个参数的单层二分类模型。

快捷导入:

- `Classifier` -> {ref}`latentsat.fewshot.classifier.Classifier`
- `predict` / `bce_loss` / `grad_step` / `loss_and_gradient` -> {ref}`latentsat.fewshot.classifier`
- `save_classifier` / `load_classifier` -> {ref}`latentsat.fewshot.classifier`
- `LabeledLatentSet` / `load_labeled_set` / `save_labeled_set` -> {ref}`latentsat.fewshot.dataset`
- `EvalMetrics` / `evaluate` / `auprc` -> {ref}`latentsat.fewshot.metrics`
- `CloudCover` / `cloud_cover` / `should_downlink` -> {ref}`latentsat.fewshot.screening`
"""
from typing import List, NamedTuple, Tuple

from latentsat.exceptions import EmptyInputError
from latentsat.helpers import make_rng, timed
from latentsat.log import logger

from .classifier import (N_PARAMS, Classifier, bce_loss, grad_step, logits,
                         load_classifier, loss_and_gradient, predict,
                         predict_proba, save_classifier)
from .dataset import LabeledLatentSet, load_labeled_set, save_labeled_set
from .metrics import EvalMetrics, auprc, classification_metrics, evaluate
from .screening import CloudCover, cloud_cover, should_downlink


class EpochTiming(NamedTuple):
    """
    一个训练轮次的计时记录。计时覆盖整个轮次循环（包括打乱顺序），不包括数据集加载。
    """

    epoch_index: int
    duration_s: float
    batch_size: int
    batches: int
    mean_loss: float


def train(init: Classifier, data: LabeledLatentSet, epochs: int,
          batch_size: int, lr: float, seed: int
          ) -> Tuple[Classifier, List[EpochTiming]]:
    """
    小批量 SGD 训练。每个轮次用以 `seed` 初始化的 PCG64 生成器重新打乱样本顺序，因此相同的种子得到逐位相同的训练轨迹，且 `epochs=N` 的训练是 `epochs=N+k` 的前缀。

    参数:
        init: 初始分类器
        data: 训练集
        epochs: 轮数，`0` 时原样返回 `init`
        batch_size: 每批样本数
        lr: 学习率
        seed: 随机种子

    返回:
        Tuple[Classifier, List[EpochTiming]]: 训练后的分类器与每轮一条计时记录

    异常:
        ValueError: `epochs` 为负或 `batch_size` 小于 1
        EmptyInputError: 训练集为空

    用法:
        ```python
        clf, timings = train(Classifier.zeros(), data, epochs=50,
                             batch_size=256, lr=0.1, seed=42)
        ```
    """
    if epochs < 0:
        raise ValueError(f'epochs must be nonnegative, got {epochs}')
    if batch_size < 1:
        raise ValueError(f'batch_size must be at least 1, got {batch_size}')
    n = len(data)
    if n == 0:
        raise EmptyInputError('cannot train on an empty dataset')

    rng = make_rng(seed)
    clf = init
    timings: List[EpochTiming] = []
    for epoch in range(epochs):
        with timed() as sw:
            order = rng.permutation(n)
            total = 0.0
            batches = 0
            for start in range(0, n, batch_size):
                idx = order[start:start + batch_size]
                clf, loss = grad_step(clf, data.latents[idx], data.labels[idx], lr)
                total += loss * idx.size
                batches += 1
        timings.append(EpochTiming(epoch, sw.elapsed, batch_size, batches, total / n))
        logger.debug(f'Epoch {epoch}: loss {total / n:.6f} in {sw.elapsed:.6f}s')
    if timings:
        mean_s = sum(t.duration_s for t in timings) / len(timings)
        logger.info(f'Trained {epochs} epochs (batch {batch_size}), final loss '
                    f'{timings[-1].mean_loss:.6f}, {mean_s:.6f}s per epoch')
    return clf, timings


__all__ = [
    'N_PARAMS',
    'Classifier',
    'EpochTiming',
    'logits',
    'predict',
    'predict_proba',
    'bce_loss',
    'loss_and_gradient',
    'grad_step',
    'train',
    'save_classifier',
    'load_classifier',
    'LabeledLatentSet',
    'load_labeled_set',
    'save_labeled_set',
    'EvalMetrics',
    'auprc',
    'classification_metrics',
    'evaluate',
    'CloudCover',
    'cloud_cover',
    'should_downlink',
]
