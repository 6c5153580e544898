"""
编码器与分类器所需的最小稠密张量运算。

张量即 C 连续的 `float32` numpy 数组。所有运算:

- 不做广播，形状必须严格匹配，否则抛出 `DimensionError`
- 内部以 `float64` 累加，结果以 `float32` 存储
- 卷积采用互相关约定（不翻转卷积核），与主流深度学习框架一致，权重文件因此可以直接移植
- 是纯函数，不修改输入，可在多线程中同时调用
"""
import math
from typing import Any, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import DimensionError, NonFiniteError
from .typing import Shape_T, Tensor_T


def as_tensor(values: Any, shape: Optional[Shape_T] = None) -> Tensor_T:
    """
    将外部输入转换为张量。

    参数:
        values: 任何 `numpy.asarray` 能够接受的数据
        shape: 期望的形状，若提供则严格检查

    返回:
        latentsat.typing.Tensor_T: C 连续的 `float32` 数组

    异常:
        DimensionError: 形状不符
        NonFiniteError: 含有 NaN 或 Inf
    """
    t = np.ascontiguousarray(values, dtype=np.float32)
    if shape is not None and t.shape != tuple(shape):
        raise DimensionError(f'expected shape {tuple(shape)}, got {t.shape}')
    if t.ndim == 0 or 0 in t.shape:
        raise DimensionError(f'tensor dimensions must be positive, got {t.shape}')
    if not np.isfinite(t).all():
        offset = int(np.flatnonzero(~np.isfinite(t))[0])
        raise NonFiniteError(f'non-finite value at flat offset {offset}',
                             offset=offset)
    return t


def conv2d(x: Tensor_T, kernel: Tensor_T, bias: Tensor_T,
           stride: int = 1, padding: int = 0) -> Tensor_T:
    """
    二维卷积（互相关），零填充。

    参数:
        x: 输入 `[Cin, H, W]`
        kernel: 卷积核 `[Cout, Cin, kH, kW]`
        bias: 偏置 `[Cout]`
        stride: 步长，正整数
        padding: 四周填充的零的圈数

    返回:
        latentsat.typing.Tensor_T: 输出 `[Cout, H', W']`，其中 `H' = (H + 2·padding − kH) // stride + 1`

    异常:
        DimensionError: 输入通道数与卷积核不符，或填充后的输入小于卷积核

    用法:
        ```python
        y = conv2d(tile, w, b, stride=2, padding=1)  # [4, 32, 32] -> [32, 16, 16]
        ```
    """
    if x.ndim != 3 or kernel.ndim != 4:
        raise DimensionError(
            f'conv2d expects [Cin,H,W] and [Cout,Cin,kH,kW], got {x.shape} and {kernel.shape}')
    c_out, c_in, k_h, k_w = kernel.shape
    if x.shape[0] != c_in:
        raise DimensionError(
            f'input has {x.shape[0]} channels, kernel expects {c_in}')
    if bias.shape != (c_out,):
        raise DimensionError(f'bias shape {bias.shape} != ({c_out},)')
    if stride < 1 or padding < 0:
        raise DimensionError(f'invalid stride {stride} / padding {padding}')
    h, w = x.shape[1] + 2 * padding, x.shape[2] + 2 * padding
    if h < k_h or w < k_w:
        raise DimensionError(
            f'padded input {h}x{w} smaller than kernel {k_h}x{k_w}')

    padded = np.pad(x.astype(np.float64),
                    ((0, 0), (padding, padding), (padding, padding)))
    # [Cin, H', W', kH, kW] view, strided to the output grid
    windows = sliding_window_view(padded, (k_h, k_w), axis=(1, 2))
    windows = windows[:, ::stride, ::stride]
    out = np.tensordot(kernel.astype(np.float64), windows,
                       axes=([1, 2, 3], [0, 3, 4]))
    out += bias.astype(np.float64)[:, None, None]
    return np.ascontiguousarray(out, dtype=np.float32)


def linear(x: Tensor_T, weight: Tensor_T, bias: Tensor_T) -> Tensor_T:
    """
    仿射变换 `out[i] = Σ_j W[i, j]·x[j] + b[i]`。

    参数:
        x: 输入向量 `[n]`
        weight: 权重矩阵 `[m, n]`
        bias: 偏置 `[m]`

    返回:
        latentsat.typing.Tensor_T: 输出向量 `[m]`

    异常:
        DimensionError: 维度不匹配
    """
    if x.ndim != 1 or weight.ndim != 2 or weight.shape[1] != x.shape[0] \
            or bias.shape != (weight.shape[0],):
        raise DimensionError(
            f'linear: x {x.shape}, W {weight.shape}, b {bias.shape} do not agree')
    out = weight.astype(np.float64) @ x.astype(np.float64)
    out += bias.astype(np.float64)
    return out.astype(np.float32)


def leaky_relu(x: Tensor_T, alpha: float = 0.01) -> Tensor_T:
    """
    逐元素计算 `max(x, alpha·x)`。

    参数:
        x: 任意形状的张量
        alpha: 负半轴斜率，须非负
    """
    if alpha < 0:
        raise ValueError(f'alpha must be nonnegative, got {alpha}')
    x64 = x.astype(np.float64)
    return np.maximum(x64, alpha * x64).astype(np.float32)


def sigmoid(x: float) -> float:
    """
    数值稳定的 logistic 函数 `1 / (1 + e^(−x))`，在 `|x|` 很大时也不会溢出。
    """
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def sigmoid_array(z: np.ndarray) -> np.ndarray:
    """`sigmoid` 的向量化版本，返回 `float64` 数组。"""
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


__all__ = [
    'as_tensor',
    'conv2d',
    'linear',
    'leaky_relu',
    'sigmoid',
    'sigmoid_array',
]
