"""
二分类评估指标。
"""
from typing import NamedTuple, Optional, Sequence

import numpy as np

from latentsat.exceptions import DimensionError, EmptyInputError
from latentsat.log import logger

from .classifier import Classifier, logits, predict_proba
from .dataset import LabeledLatentSet


class EvalMetrics(NamedTuple):
    """
    在某个阈值下的评估结果。

    `precision` 在没有任何预测为正的样本时定义为 1.0；`recall` 在没有正样本时定义为 1.0。
    """

    threshold: float
    precision: float
    recall: float
    f1: float
    auprc: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total


def auprc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    平均精度（阶梯求和的 PR 曲线下面积）:

    `AP = Σ_k (R_k − R_{k−1})·P_k`，`k` 遍历从高到低的每个不同的分数阈值，分数相同的样本作为一组同时计入。

    参数:
        scores: 分数，越大越倾向正类
        labels: 0/1 标签

    返回:
        float: `[0, 1]` 内的平均精度；对分数做任何严格单调变换结果不变

    异常:
        DimensionError: 两个序列长度不同
        EmptyInputError: 没有正样本

    用法:
        ```python
        auprc([0.9, 0.8, 0.1], [1, 1, 0])   # 1.0
        auprc([0.9, 0.8, 0.1], [0, 0, 1])   # 1/3
        ```
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if s.shape != y.shape or s.ndim != 1:
        raise DimensionError(f'{s.shape} scores for {y.shape} labels')
    n_pos = y.sum()
    if n_pos == 0:
        raise EmptyInputError('average precision is undefined without positive labels')
    order = np.argsort(-s, kind='stable')
    s, y = s[order], y[order]
    tp = np.cumsum(y)
    # last index of every group of equal scores
    last = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    precision = tp[last] / (last + 1)
    recall = tp[last] / n_pos
    delta = np.diff(recall, prepend=0.0)
    return float(np.sum(delta * precision))


def classification_metrics(probabilities: Sequence[float], labels: Sequence[int],
                           threshold: float = 0.5,
                           ranking: Optional[Sequence[float]] = None) -> EvalMetrics:
    """
    由概率与标签计算混淆矩阵及各项指标，概率不小于 `threshold` 的样本预测为正。

    参数:
        probabilities: 预测概率
        labels: 0/1 标签
        threshold: 置信度阈值
        ranking: 计算 AUPRC 用的排序分数，默认使用 `probabilities`

    返回:
        EvalMetrics: 评估结果
    """
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if p.shape != y.shape:
        raise DimensionError(f'{p.shape} probabilities for {y.shape} labels')
    if p.size == 0:
        raise EmptyInputError('cannot evaluate on an empty set')
    predicted = p >= threshold
    tp = int(np.sum(predicted & y))
    fp = int(np.sum(predicted & ~y))
    tn = int(np.sum(~predicted & ~y))
    fn = int(np.sum(~predicted & y))

    precision = tp / (tp + fp) if tp + fp else 1.0
    if tp + fn:
        recall = tp / (tp + fn)
        ap = auprc(p if ranking is None else ranking, y.astype(np.int8))
    else:
        logger.warning('Evaluation set has no positive labels, '
                       'recall is vacuous and AUPRC is reported as 0')
        recall, ap = 1.0, 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalMetrics(float(threshold), precision, recall, f1, ap, tp, fp, tn, fn)


def evaluate(c: Classifier, data: LabeledLatentSet,
             threshold: float = 0.5) -> EvalMetrics:
    """
    在数据集上评估分类器。

    参数:
        c: 分类器
        data: 非空数据集
        threshold: 置信度阈值，默认 0.5

    返回:
        EvalMetrics: 混淆矩阵、precision、recall、F1 与 AUPRC

    异常:
        EmptyInputError: 数据集为空
    """
    if len(data) == 0:
        raise EmptyInputError('cannot evaluate on an empty set')
    # rank by logit so saturated probabilities do not tie
    return classification_metrics(predict_proba(c, data.latents), data.labels,
                                  threshold, ranking=logits(c, data.latents))


__all__ = [
    'EvalMetrics',
    'auprc',
    'classification_metrics',
    'evaluate',
]
