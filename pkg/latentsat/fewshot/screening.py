"""
逐瓦片的云量筛查: 用训练好的分类器估计一次采集中被云覆盖的瓦片比例，决定是否值得下传。
"""
from typing import NamedTuple

import numpy as np

from latentsat.encoder import LatentGrid
from latentsat.log import logger

from .classifier import Classifier, predict_proba


class CloudCover(NamedTuple):
    """
    一次采集的云量估计。

    属性:
        rows: 网格行数
        cols: 网格列数
        probabilities: 每个瓦片为云的概率，按行优先排列
        fraction: 概率不小于阈值的瓦片比例
    """

    rows: int
    cols: int
    probabilities: np.ndarray
    fraction: float


def cloud_cover(c: Classifier, grid: LatentGrid,
                threshold: float = 0.5) -> CloudCover:
    """
    估计一次采集的云量。

    参数:
        c: 云分类器
        grid: 当前采集的隐表示网格
        threshold: 判定为云的概率阈值

    返回:
        CloudCover: 逐瓦片概率与云量比例
    """
    probs = predict_proba(c, grid.mu_matrix())
    fraction = float(np.mean(probs >= threshold))
    logger.info(f'Acquisition {grid.acquisition_index}: '
                f'{fraction:.1%} of {len(grid)} tiles cloudy')
    return CloudCover(grid.rows, grid.cols, probs, fraction)


def should_downlink(cover: CloudCover, max_fraction: float = 0.7) -> bool:
    """云量比例不超过 `max_fraction` 时返回 `True`。"""
    return cover.fraction <= max_fraction


__all__ = [
    'CloudCover',
    'cloud_cover',
    'should_downlink',
]
