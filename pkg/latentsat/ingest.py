"""
场景文件读取、辐射归一化与瓦片切分。

`.rvsc` 场景文件（全部小端序）:

| 字段 | 类型 |
| --- | --- |
| 魔数 `RVSC` | 4 字节 |
| 版本 | u32，当前为 `1` |
| 波段数 C | u32 |
| 高 H | u32 |
| 宽 W | u32 |
| 地面采样距离 gsd_m | f32 |
| 采集序号 | u32 |

之后是 `C·H·W` 个 `float32`，按波段优先（planar）排列。

归一化把原始 DN 值除以 `NORMALIZATION_DIVISOR`（默认 10000）并截断到 `[0, 1]`；切分时不足一个瓦片的右侧列与下方行被丢弃。
"""
import struct
from typing import Optional

import numpy as np

from .exceptions import (BadHeaderError, DimensionError, NonFiniteError,
                         PayloadSizeError, ValueRangeError)
from .log import logger
from .typing import PathLike_T, Tensor_T

MAGIC = b'RVSC'
FORMAT_VERSION = 1
TILE_SIZE = 32
NORMALIZATION_DIVISOR = 10000.0
MAX_ABS_INPUT = 1e6

_HEADER = struct.Struct('<4sIIIIfI')


class Scene:
    """
    一次多光谱采集。

    参数:
        data: `float32[C, H, W]` 栅格
        gsd_m: 地面采样距离（米/像素）
        acquisition_index: 采集序号
        normalized: 数据是否已经归一化到 `[0, 1]`

    异常:
        DimensionError: 数据不是三维，或高、宽小于 32
        NonFiniteError: 数据中含有 NaN 或 Inf
        ValueRangeError: 数据中含有负值
    """
    __slots__ = ('data', 'gsd_m', 'acquisition_index', 'normalized')

    def __init__(self, data: np.ndarray, gsd_m: float = 10.0,
                 acquisition_index: int = 0, normalized: bool = False):
        data = np.ascontiguousarray(data, dtype=np.float32)
        if data.ndim != 3 or data.shape[0] < 1:
            raise DimensionError(f'scene data must be [C, H, W], got {data.shape}')
        if data.shape[1] < TILE_SIZE or data.shape[2] < TILE_SIZE:
            raise DimensionError(
                f'scene is {data.shape[1]}x{data.shape[2]}, at least '
                f'{TILE_SIZE}x{TILE_SIZE} is required')
        _check_values(data, max_abs=None)
        self.data = data
        self.gsd_m = float(gsd_m)
        self.acquisition_index = int(acquisition_index)
        self.normalized = normalized

    @property
    def bands(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def __repr__(self) -> str:
        return (f'Scene({self.bands}x{self.height}x{self.width}, '
                f'acquisition={self.acquisition_index})')


class TileGrid:
    """
    切分后的瓦片网格，瓦片按行优先排列。

    属性:
        rows: `floor(H / 32)`
        cols: `floor(W / 32)`
        tile_size: 瓦片边长
        tiles: `float32[rows·cols, C, 32, 32]`，数值在 `[0, 1]`
        acquisition_index: 来源场景的采集序号
    """
    __slots__ = ('rows', 'cols', 'tile_size', 'tiles', 'acquisition_index')

    def __init__(self, rows: int, cols: int, tile_size: int, tiles: Tensor_T,
                 acquisition_index: int = 0):
        if tiles.shape[0] != rows * cols:
            raise DimensionError(f'{rows}x{cols} grid with {tiles.shape[0]} tiles')
        self.rows = rows
        self.cols = cols
        self.tile_size = tile_size
        self.tiles = tiles
        self.acquisition_index = acquisition_index

    def __len__(self) -> int:
        return self.tiles.shape[0]


def _check_values(data: np.ndarray, max_abs: Optional[float]) -> None:
    bad = ~np.isfinite(data)
    if bad.any():
        band, offset = _locate(data, bad)
        raise NonFiniteError(
            f'non-finite value in band {band} at offset {offset}',
            band=band, offset=offset)
    negative = data < 0
    if negative.any():
        band, offset = _locate(data, negative)
        raise ValueRangeError(f'negative value in band {band} at offset {offset}')
    if max_abs is not None:
        large = data > max_abs
        if large.any():
            band, offset = _locate(data, large)
            raise ValueRangeError(
                f'value above {max_abs:g} in band {band} at offset {offset}')


def _locate(data: np.ndarray, mask: np.ndarray):
    flat = int(np.flatnonzero(mask)[0])
    plane = data.shape[1] * data.shape[2]
    return flat // plane, flat % plane


def save_scene(scene: Scene, path: PathLike_T) -> None:
    """
    将场景写入 `.rvsc` 文件。

    参数:
        scene: 场景
        path: 目标路径
    """
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, scene.bands, scene.height,
                          scene.width, scene.gsd_m, scene.acquisition_index)
    with open(path, 'wb') as f:
        f.write(header)
        f.write(scene.data.astype('<f4').tobytes())


def decode_scene(data: bytes, max_abs: float = MAX_ABS_INPUT) -> Scene:
    """
    解析 `.rvsc` 字节串。

    异常:
        BadHeaderError: 头部过短、魔数或版本错误、维度不合法
        PayloadSizeError: 头部声明的维度与数据长度不一致
        NonFiniteError: 数据中含有 NaN 或 Inf，异常信息包含波段与偏移
        ValueRangeError: 数据为负或超过 `max_abs`
    """
    if len(data) < _HEADER.size:
        raise BadHeaderError(f'scene header needs {_HEADER.size} bytes, got {len(data)}')
    magic, version, c, h, w, gsd_m, acquisition = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadHeaderError('not a scene file (bad magic)')
    if version != FORMAT_VERSION:
        raise BadHeaderError(f'unsupported scene file version {version}')
    if c < 1 or h < TILE_SIZE or w < TILE_SIZE:
        raise BadHeaderError(f'invalid scene dimensions {c}x{h}x{w}')
    if not np.isfinite(gsd_m) or gsd_m <= 0:
        raise BadHeaderError(f'invalid ground sample distance {gsd_m}')
    expected = 4 * c * h * w
    payload = len(data) - _HEADER.size
    if payload != expected:
        raise PayloadSizeError(
            f'header declares {c}x{h}x{w} ({expected} bytes), payload has {payload} bytes')
    raster = np.frombuffer(data, dtype='<f4', offset=_HEADER.size) \
        .astype(np.float32).reshape(c, h, w)
    _check_values(raster, max_abs=max_abs)
    return Scene(raster, gsd_m=gsd_m, acquisition_index=acquisition)


def load_scene(path: PathLike_T, max_abs: float = MAX_ABS_INPUT) -> Scene:
    """
    读取 `.rvsc` 场景文件。

    参数:
        path: 文件路径
        max_abs: 允许的最大原始值

    返回:
        Scene: 校验过的场景

    异常:
        OSError: 文件不存在或读取失败
        FormatError: 见 `decode_scene`

    用法:
        ```python
        scene = load_scene('pass_0001.rvsc')   # 480x480x4
        ```
    """
    with open(path, 'rb') as f:
        data = f.read()
    scene = decode_scene(data, max_abs=max_abs)
    logger.debug(f'Loaded scene {path}: {scene}')
    return scene


def normalize(scene: Scene, divisor: float = NORMALIZATION_DIVISOR) -> Scene:
    """
    辐射归一化 `v -> clamp(v / divisor, 0, 1)`。对已经归一化的场景原样返回。

    参数:
        scene: 场景
        divisor: 除数，默认 10000（Sentinel-2 L1C 约定）

    返回:
        Scene: 归一化后的场景
    """
    if scene.normalized:
        return scene
    if divisor <= 0:
        raise ValueError(f'divisor must be positive, got {divisor}')
    data = np.clip(scene.data / np.float32(divisor), 0.0, 1.0).astype(np.float32)
    return Scene(data, gsd_m=scene.gsd_m,
                 acquisition_index=scene.acquisition_index, normalized=True)


def tile_scene(scene: Scene, tile_size: int = TILE_SIZE) -> TileGrid:
    """
    将归一化的场景切分为互不重叠的瓦片，按行优先排列，多余的边缘像素被丢弃。

    参数:
        scene: 已归一化的场景
        tile_size: 瓦片边长

    返回:
        TileGrid: `floor(H / 32) × floor(W / 32)` 网格

    异常:
        ValueError: 场景未归一化
        DimensionError: 场景的高或宽小于瓦片边长

    用法:
        ```python
        grid = tile_scene(normalize(load_scene(path)))
        assert len(grid) == 225   # 480x480
        ```
    """
    if not scene.normalized:
        raise ValueError('scene must be normalized before tiling')
    c, h, w = scene.data.shape
    if h < tile_size or w < tile_size:
        raise DimensionError(f'scene {h}x{w} is smaller than one {tile_size}px tile')
    rows, cols = h // tile_size, w // tile_size
    covered = scene.data[:, :rows * tile_size, :cols * tile_size]
    tiles = covered.reshape(c, rows, tile_size, cols, tile_size) \
        .transpose(1, 3, 0, 2, 4) \
        .reshape(rows * cols, c, tile_size, tile_size)
    return TileGrid(rows, cols, tile_size, np.ascontiguousarray(tiles),
                    acquisition_index=scene.acquisition_index)


def untile(grid: TileGrid) -> np.ndarray:
    """
    将瓦片拼回 `[C, 32·rows, 32·cols]` 栅格，即场景左上角被覆盖的区域。
    """
    ts = grid.tile_size
    c = grid.tiles.shape[1]
    return grid.tiles.reshape(grid.rows, grid.cols, c, ts, ts) \
        .transpose(2, 0, 3, 1, 4) \
        .reshape(c, grid.rows * ts, grid.cols * ts)


__all__ = [
    'MAGIC',
    'FORMAT_VERSION',
    'Scene',
    'TileGrid',
    'save_scene',
    'decode_scene',
    'load_scene',
    'normalize',
    'tile_scene',
    'untile',
]
