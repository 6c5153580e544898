"""
隐空间变化检测。

对当前采集的每个瓦片，将其 `mu` 与之前若干次采集同一位置的 `mu` 比较，取窗口内的最小距离作为变化分数。`logvar` 不参与打分。
"""
import csv
import enum
import json
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .encoder import Latent, LatentGrid
from .exceptions import DimensionError, EmptyInputError, FormatError
from .helpers import format_float
from .log import logger
from .typing import PathLike_T


class ChangeMetric(enum.Enum):
    """
    变化分数所用的距离。

    - `COSINE`: 余弦距离 `1 − cos(a, b)`，取值 `[0, 2]`，默认
    - `EUCLIDEAN`: 欧氏距离 `‖a − b‖`，取值 `[0, ∞)`
    """
    COSINE = 'cosine'
    EUCLIDEAN = 'euclidean'


class RankedTile(NamedTuple):
    row: int
    col: int
    score: float


class ChangeMap:
    """
    变化分数网格。

    属性:
        rows: 网格行数
        cols: 网格列数
        scores: `float32[rows·cols]`，按行优先排列
        metric: 所用距离
        history: 参与比较的历史采集序号
        current: 当前采集序号
    """
    __slots__ = ('rows', 'cols', 'scores', 'metric', 'history', 'current')

    def __init__(self, rows: int, cols: int, scores: np.ndarray,
                 metric: ChangeMetric = ChangeMetric.COSINE,
                 history: Sequence[int] = (), current: int = 0):
        scores = np.ascontiguousarray(scores, dtype=np.float32)
        if scores.shape != (rows * cols,):
            raise DimensionError(
                f'{rows}x{cols} change map needs {rows * cols} scores, got {scores.shape}')
        if not np.isfinite(scores).all() or (scores < 0).any():
            raise ValueError('change scores must be finite and nonnegative')
        if metric is ChangeMetric.COSINE and (scores > 2).any():
            raise ValueError('cosine change scores must lie in [0, 2]')
        self.rows = rows
        self.cols = cols
        self.scores = scores
        self.metric = metric
        self.history: Tuple[int, ...] = tuple(int(i) for i in history)
        self.current = int(current)

    def score_at(self, row: int, col: int) -> float:
        return float(self.scores[row * self.cols + col])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChangeMap):
            return NotImplemented
        return (self.rows, self.cols, self.metric, self.history, self.current) == \
            (other.rows, other.cols, other.metric, other.history, other.current) \
            and self.scores.tobytes() == other.scores.tobytes()

    def __repr__(self) -> str:
        return (f'ChangeMap({self.rows}x{self.cols}, metric={self.metric.value}, '
                f'history={list(self.history)}, current={self.current})')


def _scores(a: np.ndarray, b: np.ndarray, metric: ChangeMetric) -> np.ndarray:
    """
    逐行计算 `a[i]` 与 `b[i]` 的距离，`float64`。

    INTERNAL API
    """
    a = a.astype(np.float64)
    b = b.astype(np.float64)
    if metric is ChangeMetric.EUCLIDEAN:
        return np.sqrt(np.einsum('ij,ij->i', a - b, a - b))
    dot = np.einsum('ij,ij->i', a, b)
    na = np.sqrt(np.einsum('ij,ij->i', a, a))
    nb = np.sqrt(np.einsum('ij,ij->i', b, b))
    denom = na * nb
    with np.errstate(divide='ignore', invalid='ignore'):
        dist = 1.0 - dot / denom
    # zero-norm convention: both zero -> 0, exactly one zero -> 1
    dist = np.where(denom > 0, dist, np.where((na == 0) & (nb == 0), 0.0, 1.0))
    return np.clip(dist, 0.0, 2.0)


def change_score(a: Latent, b: Latent,
                 metric: ChangeMetric = ChangeMetric.COSINE) -> float:
    """
    两个隐表示之间的变化分数。

    参数:
        a: 隐表示
        b: 隐表示
        metric: 距离，默认余弦距离

    返回:
        float: 余弦距离 `1 − a·b / (‖a‖‖b‖)`，截断到 `[0, 2]`；两个 `mu` 都为零向量时为 0，只有一个为零向量时为 1

    异常:
        DimensionError: 两个 `mu` 维度不同

    用法:
        ```python
        change_score(lat, lat)                     # 0.0
        change_score(lat, Latent(-lat.mu, lat.logvar))  # 2.0
        ```
    """
    if a.mu.shape != b.mu.shape:
        raise DimensionError(f'latent dimensions differ: {a.mu.shape} vs {b.mu.shape}')
    return float(np.float32(_scores(a.mu[None], b.mu[None], metric)[0]))


def change_map(history: Sequence[LatentGrid], current: LatentGrid,
               metric: ChangeMetric = ChangeMetric.COSINE) -> ChangeMap:
    """
    计算当前采集相对于历史窗口的变化图。

    每个瓦片的分数是它与窗口内每次历史采集同一位置瓦片的分数的最小值，单次异常的历史过境因此不会造成虚假的变化。

    参数:
        history: 至少一个历史 `LatentGrid`
        current: 当前 `LatentGrid`
        metric: 距离

    返回:
        ChangeMap: 与输入网格同尺寸的变化图

    异常:
        EmptyInputError: `history` 为空
        DimensionError: 网格尺寸或隐向量维度不一致
    """
    if not history:
        raise EmptyInputError('change_map needs at least one history grid')
    for grid in history:
        if (grid.rows, grid.cols) != (current.rows, current.cols):
            raise DimensionError(
                f'history grid {grid.rows}x{grid.cols} (acquisition '
                f'{grid.acquisition_index}) does not match current '
                f'{current.rows}x{current.cols}')
    cur = current.mu_matrix()
    best = None
    for grid in history:
        prev = grid.mu_matrix()
        if prev.shape != cur.shape:
            raise DimensionError(
                f'latent dimension {prev.shape[1]} does not match {cur.shape[1]}')
        scores = _scores(prev, cur, metric)
        best = scores if best is None else np.minimum(best, scores)
    cm = ChangeMap(current.rows, current.cols, best.astype(np.float32), metric,
                   history=[g.acquisition_index for g in history],
                   current=current.acquisition_index)
    logger.debug(f'Computed {cm}, max score {float(cm.scores.max()):.6f}')
    return cm


def rank_tiles(cm: ChangeMap, k: int) -> List[RankedTile]:
    """
    按分数从高到低取前 `k` 个瓦片，分数相同时按行优先顺序。

    参数:
        cm: 变化图
        k: 取出的瓦片数，`1 ≤ k ≤ rows·cols`

    返回:
        List[RankedTile]: `(row, col, score)` 列表

    异常:
        ValueError: `k` 超出范围
    """
    n = cm.rows * cm.cols
    if not 1 <= k <= n:
        raise ValueError(f'k must be between 1 and {n}, got {k}')
    order = np.argsort(-cm.scores, kind='stable')[:k]
    return [RankedTile(int(i) // cm.cols, int(i) % cm.cols, float(cm.scores[i]))
            for i in order]


def export_change_map(cm: ChangeMap, path: PathLike_T, format: str = 'csv') -> None:
    """
    导出变化图。

    参数:
        cm: 变化图
        path: 目标路径
        format: `csv` 时每个瓦片一行 `row,col,score`；`json` 时写入完整的变化图，可由 `load_change_map` 读回
    """
    if format == 'csv':
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['row', 'col', 'score'])
            for i, score in enumerate(cm.scores):
                writer.writerow([i // cm.cols, i % cm.cols, format_float(score)])
    elif format == 'json':
        doc = {
            'rows': cm.rows,
            'cols': cm.cols,
            'metric': cm.metric.value,
            'history': list(cm.history),
            'current': cm.current,
            'scores': [float(s) for s in cm.scores],
        }
        with open(path, 'w') as f:
            json.dump(doc, f, indent=2)
    else:
        raise ValueError(f'unknown change map format {format!r}')


def load_change_map(path: PathLike_T) -> ChangeMap:
    """
    读取 `export_change_map(..., format='json')` 写出的变化图。

    异常:
        FormatError: 文件内容不是合法的变化图
    """
    with open(path) as f:
        try:
            doc = json.load(f)
            return ChangeMap(int(doc['rows']), int(doc['cols']),
                             np.asarray(doc['scores'], dtype=np.float32),
                             ChangeMetric(doc['metric']),
                             history=doc['history'], current=doc['current'])
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, FormatError):
                raise
            raise FormatError(f'{path}: not a change map ({e})') from e


__all__ = [
    'ChangeMetric',
    'ChangeMap',
    'RankedTile',
    'change_score',
    'change_map',
    'rank_tiles',
    'export_change_map',
    'load_change_map',
]

__autodoc__ = {
    "ChangeMap.score_at": False,
}
