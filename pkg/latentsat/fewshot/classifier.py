import math
from typing import Tuple

import numpy as np

from latentsat.exceptions import (BindShapeError, DimensionError,
                                  EmptyInputError, MissingEntryError)
from latentsat.model_io import WeightSet, load_weights, save_weights
from latentsat.tensor import sigmoid, sigmoid_array
from latentsat.typing import PathLike_T

N_PARAMS = 129


class Classifier:
    """
    单层二分类模型 `p = sigmoid(w·mu + b)`。

    参数:
        w: `float32[128]` 权重
        b: 偏置

    用法:
        ```python
        clf = Classifier.zeros()
        assert clf.n_params == 129
        ```
    """
    __slots__ = ('w', 'b')

    def __init__(self, w: np.ndarray, b: float):
        w = np.array(w, dtype=np.float32)
        if w.ndim != 1:
            raise DimensionError(f'classifier weights must be a vector, got {w.shape}')
        if not np.isfinite(w).all() or not math.isfinite(float(b)):
            raise ValueError('classifier parameters must be finite')
        w.setflags(write=False)
        self.w = w
        self.b = np.float32(b)

    @classmethod
    def zeros(cls, dim: int = 128) -> 'Classifier':
        return cls(np.zeros(dim, dtype=np.float32), 0.0)

    @property
    def n_params(self) -> int:
        """可训练参数的个数。"""
        return self.w.size + 1

    def __eq__(self, other: object) -> bool:
        """逐位比较。"""
        if not isinstance(other, Classifier):
            return NotImplemented
        return self.w.tobytes() == other.w.tobytes() \
            and self.b.tobytes() == other.b.tobytes()

    def __repr__(self) -> str:
        return f'Classifier(dim={self.w.size}, b={float(self.b):.6g})'


def logits(c: Classifier, latents: np.ndarray) -> np.ndarray:
    """
    批量计算 `w·mu + b`。

    参数:
        c: 分类器
        latents: `[N, 128]` 的 `mu` 矩阵

    返回:
        numpy.ndarray: `float64[N]`
    """
    x = np.asarray(latents, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != c.w.size:
        raise DimensionError(
            f'latents must be [N, {c.w.size}], got {list(x.shape)}')
    return x @ c.w.astype(np.float64) + float(c.b)


def predict(c: Classifier, mu: np.ndarray) -> float:
    """
    单个瓦片属于正类的概率 `sigmoid(w·mu + b)`。

    参数:
        c: 分类器
        mu: `float32[128]`

    返回:
        float: `[0, 1]` 内的概率；`|w·mu + b|` 很大时也不会溢出
    """
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != c.w.shape:
        raise DimensionError(f'mu must have shape {c.w.shape}, got {mu.shape}')
    return sigmoid(float(np.dot(c.w.astype(np.float64), mu)) + float(c.b))


def predict_proba(c: Classifier, latents: np.ndarray) -> np.ndarray:
    """`predict` 的批量版本，返回 `float64[N]`。"""
    return sigmoid_array(logits(c, latents))


def bce_loss(logit: float, y: int) -> float:
    """
    二元交叉熵，在 logit 空间计算: `max(z, 0) − z·y + ln(1 + e^(−|z|))`。

    参数:
        logit: `z = w·mu + b`
        y: 标签 0 或 1

    返回:
        float: 非负的损失；`z = 0` 时为 `ln 2`
    """
    z = float(logit)
    return max(z, 0.0) - z * y + math.log1p(math.exp(-abs(z)))


def loss_and_gradient(w: np.ndarray, b: float, latents: np.ndarray,
                      labels: np.ndarray) -> Tuple[float, np.ndarray, float]:
    """
    一批样本上的平均二元交叉熵及其解析梯度，全部以 `float64` 计算。

    参数:
        w: 权重 `[128]`
        b: 偏置
        latents: `[N, 128]`
        labels: `[N]`，取值 0 或 1

    返回:
        Tuple[float, numpy.ndarray, float]: `(loss, dL/dw, dL/db)`

    异常:
        EmptyInputError: 批次为空
    """
    x = np.asarray(latents, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.shape[0] == 0:
        raise EmptyInputError('cannot compute a loss over an empty batch')
    z = x @ np.asarray(w, dtype=np.float64) + float(b)
    loss = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    # dL/dz of the mean loss, per sample
    g = (sigmoid_array(z) - y) / x.shape[0]
    return float(loss.mean()), x.T @ g, float(g.sum())


def grad_step(c: Classifier, latents: np.ndarray, labels: np.ndarray,
              lr: float) -> Tuple[Classifier, float]:
    """
    一次小批量 SGD 更新 `w ← w − lr·dw`，`b ← b − lr·db`。

    参数:
        c: 当前分类器
        latents: 批次的 `mu` 矩阵 `[N, 128]`
        labels: 批次标签
        lr: 学习率，须为正

    返回:
        Tuple[Classifier, float]: 更新后的分类器，以及更新前该批次的平均损失

    异常:
        ValueError: 学习率不为正
        EmptyInputError: 批次为空
        FloatingPointError: 更新后参数不再有限（学习率过大）
    """
    if not lr > 0:
        raise ValueError(f'learning rate must be positive, got {lr}')
    loss, dw, db = loss_and_gradient(c.w, c.b, latents, labels)
    w = c.w.astype(np.float64) - lr * dw
    b = float(c.b) - lr * db
    if not np.isfinite(w).all() or not math.isfinite(b):
        raise FloatingPointError('classifier diverged, lower the learning rate')
    return Classifier(w.astype(np.float32), b), loss


def save_classifier(c: Classifier, path: PathLike_T) -> None:
    """
    以权重文件格式保存分类器，条目为 `clf.w [128]` 与 `clf.b [1]`。
    """
    save_weights(WeightSet([('clf.w', c.w), ('clf.b', np.array([c.b]))]), path)


def load_classifier(path: PathLike_T) -> Classifier:
    """
    读取 `save_classifier` 保存的分类器。

    异常:
        FormatError: 文件格式错误
        MissingEntryError: 缺少 `clf.w` 或 `clf.b`
        BindShapeError: 条目形状不对
    """
    ws = load_weights(path)
    for name in ('clf.w', 'clf.b'):
        if name not in ws:
            raise MissingEntryError(name)
    w, b = ws['clf.w'], ws['clf.b']
    if w.ndim != 1:
        raise BindShapeError('clf', (w.size,), w.shape)
    if b.shape != (1,):
        raise BindShapeError('clf', (1,), b.shape)
    return Classifier(w, b[0])


__all__ = [
    'N_PARAMS',
    'Classifier',
    'logits',
    'predict',
    'predict_proba',
    'bce_loss',
    'loss_and_gradient',
    'grad_step',
    'save_classifier',
    'load_classifier',
]
