"""
隐表示网格的文件格式。

- `csv`: 表头 `row,col,mu0,…,mu127`，每个瓦片一行，按行优先排列
- `rvwt`: 权重文件格式，条目 `mu [N, 128]`、`logvar [N, 128]`、`tile_index [N, 2]`，另有 `grid [3]` 记录 `rows, cols, acquisition_index`
"""
import csv

import numpy as np

from latentsat.exceptions import CsvFormatError, MissingEntryError
from latentsat.helpers import format_float
from latentsat.model_io import WeightSet, load_weights, save_weights
from latentsat.typing import PathLike_T

from . import Latent, LatentGrid

FORMATS = ('csv', 'rvwt')


def save_latent_grid(grid: LatentGrid, path: PathLike_T, format: str = 'csv') -> None:
    """
    保存隐表示网格。`csv` 只包含 `mu`，`rvwt` 同时包含 `logvar`。

    参数:
        grid: 隐表示网格
        path: 目标路径
        format: `csv` 或 `rvwt`
    """
    if format == 'csv':
        dim = grid.latents[0].mu.shape[0] if len(grid) else 0
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['row', 'col'] + [f'mu{i}' for i in range(dim)])
            for lat in grid:
                r, c = lat.tile_index
                writer.writerow([r, c] + [format_float(v) for v in lat.mu])
    elif format == 'rvwt':
        save_weights(WeightSet([
            ('grid', np.array([grid.rows, grid.cols, grid.acquisition_index])),
            ('mu', np.stack([lat.mu for lat in grid])),
            ('logvar', np.stack([lat.logvar for lat in grid])),
            ('tile_index', np.array([lat.tile_index for lat in grid])),
        ]), path)
    else:
        raise ValueError(f'unknown latent format {format!r}')


def load_latent_grid(path: PathLike_T, format: str = 'csv') -> LatentGrid:
    """
    读取 `save_latent_grid` 保存的网格。`csv` 格式没有 `logvar`，读回后为零向量；网格尺寸由最大的行列号推出。

    异常:
        CsvFormatError: CSV 格式错误，异常信息包含行号
        MissingEntryError: `rvwt` 文件缺少条目
    """
    if format == 'rvwt':
        ws = load_weights(path)
        for name in ('grid', 'mu', 'logvar', 'tile_index'):
            if name not in ws:
                raise MissingEntryError(name)
        rows, cols, acquisition = (int(v) for v in ws['grid'])
        latents = [Latent(mu.copy(), lv.copy(), (int(ti[0]), int(ti[1])))
                   for mu, lv, ti in zip(ws['mu'], ws['logvar'], ws['tile_index'])]
        return LatentGrid(rows, cols, latents, acquisition)
    if format != 'csv':
        raise ValueError(f'unknown latent format {format!r}')

    latents = []
    with open(path, newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[:2] != ['row', 'col']:
            raise CsvFormatError('header must start with row,col', 1)
        dim = len(header) - 2
        for line_no, record in enumerate(reader, start=2):
            if len(record) != dim + 2:
                raise CsvFormatError(
                    f'expected {dim + 2} columns, got {len(record)}', line_no)
            try:
                r, c = int(record[0]), int(record[1])
                mu = np.array([float(v) for v in record[2:]], dtype=np.float32)
            except ValueError as e:
                raise CsvFormatError(str(e), line_no) from e
            latents.append(Latent(mu, np.zeros_like(mu), (r, c)))
    if not latents:
        raise CsvFormatError('no latent rows', 2)
    rows = max(lat.tile_index[0] for lat in latents) + 1
    cols = max(lat.tile_index[1] for lat in latents) + 1
    return LatentGrid(rows, cols, latents)


__all__ = [
    'FORMATS',
    'save_latent_grid',
    'load_latent_grid',
]
