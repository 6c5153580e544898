"""
冻结的 VAE 编码器: 将归一化的 `4×32×32` 瓦片映射为 128 维隐向量 `(mu, logvar)`。

快捷导入:

- `EncoderBackend` -> {ref}`latentsat.encoder.backend.EncoderBackend`
- `BackendManager` -> {ref}`latentsat.encoder.backend.BackendManager`
- `register_backend` -> {ref}`latentsat.encoder.backend.register_backend`
- `check_backend_agreement` -> {ref}`latentsat.encoder.backend.check_backend_agreement`

下游任务（变化检测、分类）只使用 `mu`；`reparameterize` 用于采样。
"""
from concurrent.futures import ThreadPoolExecutor
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from latentsat.exceptions import DimensionError
from latentsat.helpers import timed
from latentsat.log import logger
from latentsat.model_io import BoundModel
from latentsat.tensor import as_tensor
from latentsat.typing import BatchHook_T, TileIndex_T, Tensor_T

from .backend import (BackendManager, EncoderBackend, check_backend_agreement,
                      register_backend)

LOGVAR_CLAMP = (-20.0, 20.0)


class Latent:
    """
    一个瓦片的隐表示。

    属性:
        mu: `float32[128]`
        logvar: `float32[128]`，已截断到 `[-20, 20]`
        tile_index: 瓦片在网格中的位置 `(row, col)`
    """
    __slots__ = ('mu', 'logvar', 'tile_index')

    def __init__(self, mu: np.ndarray, logvar: np.ndarray,
                 tile_index: TileIndex_T = (0, 0)):
        self.mu = mu
        self.logvar = logvar
        self.tile_index = tile_index

    def __eq__(self, other: object) -> bool:
        """逐位比较。"""
        if not isinstance(other, Latent):
            return NotImplemented
        return self.tile_index == other.tile_index \
            and self.mu.tobytes() == other.mu.tobytes() \
            and self.logvar.tobytes() == other.logvar.tobytes()

    def __repr__(self) -> str:
        return f'Latent(tile_index={self.tile_index}, |mu|={self.mu.shape[0]})'


class BatchTiming(NamedTuple):
    """一个编码批次的计时记录。"""

    batch_index: int
    tile_count: int
    duration_s: float


class LatentGrid:
    """
    一次采集的全部瓦片隐表示，按行优先排列。

    参数:
        rows: 网格行数
        cols: 网格列数
        latents: `rows·cols` 个 `Latent`
        acquisition_index: 采集序号
    """
    __slots__ = ('rows', 'cols', 'latents', 'acquisition_index')

    def __init__(self, rows: int, cols: int, latents: Sequence[Latent],
                 acquisition_index: int = 0):
        if len(latents) != rows * cols:
            raise DimensionError(
                f'{rows}x{cols} grid needs {rows * cols} latents, got {len(latents)}')
        self.rows = rows
        self.cols = cols
        self.latents: Tuple[Latent, ...] = tuple(latents)
        self.acquisition_index = acquisition_index

    def mu_matrix(self) -> np.ndarray:
        """所有瓦片的 `mu`，形状 `[rows·cols, latent_dim]`。"""
        return np.stack([lat.mu for lat in self.latents])

    def __len__(self) -> int:
        return len(self.latents)

    def __iter__(self):
        return iter(self.latents)


def _default_backend() -> EncoderBackend:
    return BackendManager.get_backend('reference')


def _stack_tiles(tiles: Union[Tensor_T, Sequence[Tensor_T]],
                 model: BoundModel) -> Tensor_T:
    if isinstance(tiles, np.ndarray):
        batch = tiles
    else:
        batch = np.stack([np.asarray(t, dtype=np.float32) for t in tiles])
    batch = np.ascontiguousarray(batch, dtype=np.float32)
    if batch.ndim != 4 or batch.shape[1:] != model.input_shape:
        raise DimensionError(
            f'tiles must have shape {list(model.input_shape)}, got {list(batch.shape[1:])}')
    return batch


def encode_tile(tile: Tensor_T, model: BoundModel,
                backend: Optional[EncoderBackend] = None,
                logvar_clamp: Tuple[float, float] = LOGVAR_CLAMP) -> Latent:
    """
    编码单个归一化瓦片。

    参数:
        tile: `[4, 32, 32]` 瓦片，数值在 `[0, 1]`
        model: 已绑定的编码器
        backend: 执行编码的后端，默认为参考后端
        logvar_clamp: `logvar` 截断区间

    返回:
        Latent: 128 维的 `mu` 与 `logvar`；同一瓦片多次编码结果逐位相同

    异常:
        DimensionError: 瓦片形状与模型输入不符
    """
    tile = as_tensor(tile, model.input_shape)
    backend = backend or _default_backend()
    mu, logvar = backend.encode(model, tile[None])
    lo, hi = logvar_clamp
    return Latent(mu[0], np.clip(logvar[0], lo, hi))


def encode_batch(tiles: Union[Tensor_T, Sequence[Tensor_T]],
                 model: BoundModel,
                 batch_size: int,
                 *,
                 backend: Optional[EncoderBackend] = None,
                 indices: Optional[Sequence[TileIndex_T]] = None,
                 workers: int = 1,
                 logvar_clamp: Tuple[float, float] = LOGVAR_CLAMP,
                 batch_hook: Optional[BatchHook_T] = None
                 ) -> Tuple[List[Latent], List[BatchTiming]]:
    """
    分批编码瓦片，并记录每个批次的墙钟时间。

    参数:
        tiles: 瓦片序列或 `[N, C, H, W]` 数组
        model: 已绑定的编码器
        batch_size: 每批瓦片数，至少为 1
        backend: 执行编码的后端，默认为参考后端
        indices: 每个瓦片的 `(row, col)`，默认为 `(i, 0)`
        workers: 批次内部并行的线程数，输出顺序不受影响
        logvar_clamp: `logvar` 截断区间
        batch_hook: INTERNAL API，在每个批次的计时区间内调用，用于测试中注入延迟

    返回:
        Tuple[List[Latent], List[BatchTiming]]: 与输入同序的隐表示，以及每个批次一条计时记录

    异常:
        ValueError: `batch_size` 小于 1
        DimensionError: 瓦片形状与模型输入不符

    用法:
        ```python
        latents, timings = encode_batch(grid.tiles, model, batch_size=64)
        ```

        225 个瓦片会产生 4 条计时记录（64 + 64 + 64 + 33）。
    """
    if batch_size < 1:
        raise ValueError(f'batch_size must be at least 1, got {batch_size}')
    if len(tiles) == 0:
        return [], []
    batch = _stack_tiles(tiles, model)
    if indices is None:
        indices = [(i, 0) for i in range(batch.shape[0])]
    elif len(indices) != batch.shape[0]:
        raise DimensionError(f'{len(indices)} indices for {batch.shape[0]} tiles')
    backend = backend or _default_backend()
    lo, hi = logvar_clamp

    latents: List[Latent] = []
    timings: List[BatchTiming] = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for batch_index, start in enumerate(range(0, batch.shape[0], batch_size)):
            chunk = batch[start:start + batch_size]
            with timed() as sw:
                if batch_hook is not None:
                    batch_hook(batch_index)
                mu, logvar = _run_chunk(backend, model, chunk, pool, workers)
            timings.append(BatchTiming(batch_index, chunk.shape[0], sw.elapsed))
            logger.debug(f'Encoded batch {batch_index} ({chunk.shape[0]} tiles) '
                         f'in {sw.elapsed:.6f}s')
            for j in range(chunk.shape[0]):
                latents.append(Latent(mu[j], np.clip(logvar[j], lo, hi),
                                      tuple(indices[start + j])))
    finally:
        if pool is not None:
            pool.shutdown()
    return latents, timings


def _run_chunk(backend: EncoderBackend, model: BoundModel, chunk: Tensor_T,
               pool: Optional[ThreadPoolExecutor],
               workers: int) -> Tuple[np.ndarray, np.ndarray]:
    if pool is None or chunk.shape[0] < 2:
        return backend.encode(model, chunk)
    # contiguous slices keep the concatenation in input order
    parts = np.array_split(chunk, min(workers, chunk.shape[0]))
    results = list(pool.map(lambda p: backend.encode(model, p), parts))
    return (np.concatenate([r[0] for r in results]),
            np.concatenate([r[1] for r in results]))


def encode_grid(grid, model: BoundModel, batch_size: int,
                **kwargs) -> Tuple[LatentGrid, List[BatchTiming]]:
    """
    编码整个瓦片网格。

    参数:
        grid (latentsat.ingest.TileGrid): 瓦片网格
        model: 已绑定的编码器
        batch_size: 每批瓦片数
        kwargs: 其它传入 `encode_batch` 的命名参数

    返回:
        Tuple[LatentGrid, List[BatchTiming]]: 隐表示网格与批次计时
    """
    indices = [(i // grid.cols, i % grid.cols) for i in range(len(grid))]
    latents, timings = encode_batch(grid.tiles, model, batch_size,
                                    indices=indices, **kwargs)
    return LatentGrid(grid.rows, grid.cols, latents,
                      grid.acquisition_index), timings


def reparameterize(latent: Latent, rng: np.random.Generator,
                   n: Optional[int] = None) -> np.ndarray:
    """
    重参数化采样 `z = mu + exp(logvar / 2)·eps`，`eps ~ N(0, 1)`。

    参数:
        latent: 隐表示
        rng: 随机数生成器，见 `latentsat.helpers.make_rng`
        n: 采样数；为 `None` 时返回单个样本

    返回:
        numpy.ndarray: `float32[128]`，或 `n` 不为 `None` 时为 `float32[n, 128]`
    """
    mu = latent.mu.astype(np.float64)
    std = np.exp(np.clip(latent.logvar.astype(np.float64), *LOGVAR_CLAMP) / 2.0)
    shape = mu.shape if n is None else (n,) + mu.shape
    eps = rng.standard_normal(shape)
    return (mu + std * eps).astype(np.float32)


__all__ = [
    'Latent',
    'LatentGrid',
    'BatchTiming',
    'encode_tile',
    'encode_batch',
    'encode_grid',
    'reparameterize',
    'EncoderBackend',
    'BackendManager',
    'register_backend',
    'check_backend_agreement',
]
