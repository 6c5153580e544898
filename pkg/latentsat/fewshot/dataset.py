"""
带标签的隐向量数据集及其 CSV 文件。

CSV 首行为表头 `f0,f1,…,f127,label`，之后每行一个样本: 128 个 `mu` 分量与 0/1 标签。
"""
import csv
import math
from typing import List, Sequence

import numpy as np

from latentsat.exceptions import CsvFormatError, DimensionError
from latentsat.helpers import format_float
from latentsat.log import logger
from latentsat.typing import PathLike_T

SPLITS = ('train', 'eval')


class LabeledLatentSet:
    """
    带标签的隐向量集合。

    参数:
        latents: `[N, D]` 的 `mu` 矩阵
        labels: `[N]` 的 0/1 标签
        split: `train` 或 `eval`
    """
    __slots__ = ('latents', 'labels', 'split')

    def __init__(self, latents: np.ndarray, labels: Sequence[int],
                 split: str = 'train'):
        latents = np.ascontiguousarray(latents, dtype=np.float32)
        labels = np.asarray(labels)
        if latents.ndim != 2:
            raise DimensionError(f'latents must be [N, D], got {latents.shape}')
        if labels.shape != (latents.shape[0],):
            raise DimensionError(
                f'{latents.shape[0]} latents but labels of shape {labels.shape}')
        if not np.isin(labels, (0, 1)).all():
            raise ValueError('labels must be 0 or 1')
        if split not in SPLITS:
            raise ValueError(f'split must be one of {SPLITS}, got {split!r}')
        self.latents = latents
        self.labels = labels.astype(np.int8)
        self.split = split

    def __len__(self) -> int:
        return self.latents.shape[0]

    @property
    def dim(self) -> int:
        return self.latents.shape[1]

    @property
    def n_positive(self) -> int:
        return int(self.labels.sum())

    def is_disjoint(self, other: 'LabeledLatentSet') -> bool:
        """两个集合中没有完全相同的隐向量。"""
        mine = {row.tobytes() for row in self.latents}
        return not any(row.tobytes() in mine for row in other.latents)

    def __repr__(self) -> str:
        return (f'LabeledLatentSet({self.split}, n={len(self)}, '
                f'positive={self.n_positive})')


def save_labeled_set(data: LabeledLatentSet, path: PathLike_T) -> None:
    """
    将数据集写入 CSV，浮点数以可无损还原 `float32` 的格式输出。
    """
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow([f'f{i}' for i in range(data.dim)] + ['label'])
        for row, label in zip(data.latents, data.labels):
            writer.writerow([format_float(v) for v in row] + [int(label)])


def load_labeled_set(path: PathLike_T, split: str = 'train',
                     dim: int = 128) -> LabeledLatentSet:
    """
    读取带标签的隐向量 CSV。

    参数:
        path: 文件路径
        split: 数据集用途标签
        dim: 期望的特征列数

    返回:
        LabeledLatentSet: 数据集

    异常:
        CsvFormatError: 表头、列数、数值或标签不合法，异常信息包含行号
    """
    expected = [f'f{i}' for i in range(dim)] + ['label']
    rows: List[List[float]] = []
    labels: List[int] = []
    with open(path, newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise CsvFormatError('file is empty, expected a header', 1)
        if [h.strip() for h in header] != expected:
            raise CsvFormatError(
                f'header must be f0..f{dim - 1},label', 1)
        for line_no, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != dim + 1:
                raise CsvFormatError(
                    f'expected {dim + 1} columns, got {len(record)}', line_no)
            try:
                values = [float(v) for v in record[:dim]]
            except ValueError as e:
                raise CsvFormatError(f'bad feature value ({e})', line_no) from e
            if not all(math.isfinite(v) for v in values):
                raise CsvFormatError('non-finite feature value', line_no)
            label = record[dim].strip()
            if label not in ('0', '1'):
                raise CsvFormatError(f'label must be 0 or 1, got {label!r}', line_no)
            rows.append(values)
            labels.append(int(label))
    latents = np.asarray(rows, dtype=np.float32).reshape(len(rows), dim)
    data = LabeledLatentSet(latents, labels, split)
    logger.debug(f'Loaded {data} from {path}')
    return data


__all__ = [
    'LabeledLatentSet',
    'save_labeled_set',
    'load_labeled_set',
]
