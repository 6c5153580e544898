"""
确定性的测试数据生成器: 参考编码器权重、仿 Sentinel-2 场景、局部被替换的场景对以及合成的带标签隐向量数据集。

所有生成器都只依赖于参数与种子，随机数来自 `latentsat.helpers.make_rng`（PCG64 + ziggurat 正态采样），相同参数两次生成的文件逐字节相同。场景只用到加法与乘法，不依赖平台的超越函数实现。
"""
import math
import os
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import UsageError
from .fewshot import LabeledLatentSet, save_labeled_set
from .helpers import make_rng
from .ingest import Scene, save_scene
from .log import logger
from .model_io import (ArchSpec, LayerSpec, WeightSet, save_arch,
                       save_weights)
from .typing import PathLike_T, TileIndex_T

KINDS = ('weights', 'scene', 'scene_pair', 'latent_dataset')

WEIGHTS_FILE = 'encoder.rvwt'
ARCH_FILE = 'encoder.arch'

# typical top-of-atmosphere DN per band (B, G, R, NIR) for a few surface types
_SURFACES = np.array([
    [1300., 1100., 900., 2900.],    # vegetation
    [1700., 1600., 1700., 2300.],   # bare soil
    [1200., 900., 600., 300.],      # water
    [2000., 1900., 2000., 2200.],   # built-up
], dtype=np.float64)
_CLOUD_DN = 8500.0
_PATCH = 40


class FixtureSpec(NamedTuple):
    """
    一组测试数据的描述。

    属性:
        kind: `weights`、`scene`、`scene_pair` 或 `latent_dataset`
        seed: 随机种子
        height: 场景高度
        width: 场景宽度
        bands: 波段数
        count: `scene` 生成的场景个数，采集序号依次为 `0..count-1`
        cloud_fraction: 场景中被云覆盖的区块比例
        n_changed: `scene_pair` 中被替换的瓦片数
        n_samples: `latent_dataset` 训练集与评估集的样本数
        margin: `latent_dataset` 两类中心的距离
        positive_fraction: `latent_dataset` 正样本比例
    """

    kind: str
    seed: int = 42
    height: int = 480
    width: int = 480
    bands: int = 4
    count: int = 1
    cloud_fraction: float = 0.0
    n_changed: int = 5
    n_samples: int = 1305
    margin: float = 8.0
    positive_fraction: float = 0.5


class ScenePair(NamedTuple):
    before: Scene
    after: Scene
    changed: List[TileIndex_T]


def reference_arch() -> ArchSpec:
    """
    参考编码器结构: 4 个 `3×3`、步长 2 的卷积层（通道 4→32→64→128→256，每层后接 `leaky_relu(0.01)`），把 `4×32×32` 的瓦片缩小到 `256×2×2`，再由两个 `1024→128` 的线性输出头给出 `mu` 与 `logvar`。
    """
    layers: List[LayerSpec] = []
    channels = [4, 32, 64, 128, 256]
    for i in range(4):
        layers.append(LayerSpec('conv2d', f'conv{i + 1}', {
            'in': channels[i], 'out': channels[i + 1],
            'kernel': 3, 'stride': 2, 'padding': 1}))
        layers.append(LayerSpec('activation', f'act{i + 1}',
                                {'fn': 'leaky_relu', 'alpha': 0.01}))
    for head in ('mu', 'logvar'):
        layers.append(LayerSpec('linear', f'fc_{head}',
                                {'in': 1024, 'out': 128, 'head': head}))
    return ArchSpec(layers, (4, 32, 32), 128)


def gen_weights(seed: int, arch: Optional[ArchSpec] = None) -> WeightSet:
    """
    生成与结构清单匹配的权重。权重服从 `N(0, 2 / fan_in)`（He 初始化），偏置服从 `U(−1/√fan_in, 1/√fan_in)`。

    参数:
        seed: 随机种子
        arch: 结构清单，默认为 `reference_arch()`

    返回:
        WeightSet: 按前向顺序排列的权重集
    """
    arch = arch or reference_arch()
    rng = make_rng(seed)
    entries: List[Tuple[str, np.ndarray]] = []
    for layer in arch.layers:
        shapes = layer.param_shapes()
        if not shapes:
            continue
        (w_name, w_shape), (b_name, b_shape) = shapes
        fan_in = math.prod(w_shape[1:])
        w = rng.standard_normal(w_shape) * math.sqrt(2.0 / fan_in)
        bound = 1.0 / math.sqrt(fan_in)
        b = rng.uniform(-bound, bound, b_shape)
        entries.append((w_name, w.astype(np.float32)))
        entries.append((b_name, b.astype(np.float32)))
    return WeightSet(entries)


def write_reference_model(out_dir: PathLike_T, seed: int = 42) -> Tuple[str, str]:
    """
    写出参考编码器的 `encoder.rvwt` 与 `encoder.arch`。

    返回:
        Tuple[str, str]: 权重文件与结构清单的路径
    """
    os.makedirs(out_dir, exist_ok=True)
    arch = reference_arch()
    weights_path = os.path.join(out_dir, WEIGHTS_FILE)
    arch_path = os.path.join(out_dir, ARCH_FILE)
    save_weights(gen_weights(seed, arch), weights_path)
    save_arch(arch, arch_path)
    return weights_path, arch_path


def gen_scene(seed: int, height: int = 480, width: int = 480, bands: int = 4,
              acquisition_index: int = 0, cloud_fraction: float = 0.0) -> Scene:
    """
    生成一个仿 Sentinel-2 L1C 的原始 DN 场景: 以 40 像素的区块随机铺设几种地表类型，叠加逐像素噪声，可选地用高亮的云覆盖一部分区块。

    参数:
        seed: 随机种子
        height: 高度（像素）
        width: 宽度（像素）
        bands: 波段数，至多 4
        acquisition_index: 采集序号
        cloud_fraction: 被云覆盖的区块比例

    返回:
        Scene: 数值非负且有限的未归一化场景
    """
    if not 1 <= bands <= _SURFACES.shape[1]:
        raise ValueError(f'bands must be between 1 and {_SURFACES.shape[1]}, got {bands}')
    if not 0.0 <= cloud_fraction <= 1.0:
        raise ValueError(f'cloud_fraction must be in [0, 1], got {cloud_fraction}')
    rng = make_rng(seed)
    ph, pw = -(-height // _PATCH), -(-width // _PATCH)
    surface = rng.integers(0, _SURFACES.shape[0], size=(ph, pw))
    cloudy = rng.random((ph, pw)) < cloud_fraction
    patches = _SURFACES[surface][..., :bands]          # [ph, pw, bands]
    patches[cloudy] = _CLOUD_DN
    field = np.repeat(np.repeat(patches, _PATCH, axis=0), _PATCH, axis=1)
    field = field[:height, :width].transpose(2, 0, 1)
    noise = rng.standard_normal((bands, height, width)) * 60.0
    data = np.clip(field + noise, 0.0, 12000.0).astype(np.float32)
    return Scene(data, gsd_m=10.0, acquisition_index=acquisition_index)


def gen_scene_pair(seed: int, n_changed_tiles: int, height: int = 480,
                   width: int = 480, bands: int = 4,
                   tile_size: int = 32) -> ScenePair:
    """
    生成一对场景: 第二个场景与第一个完全相同，只有 `n_changed_tiles` 个瓦片被替换为独立的均匀噪声。

    参数:
        seed: 随机种子
        n_changed_tiles: 被替换的瓦片数
        height: 高度
        width: 宽度
        bands: 波段数
        tile_size: 瓦片边长

    返回:
        ScenePair: `(before, after, changed)`，`changed` 为按行优先排序的被替换瓦片位置

    异常:
        ValueError: `n_changed_tiles` 超过瓦片总数
    """
    rows, cols = height // tile_size, width // tile_size
    if not 0 <= n_changed_tiles <= rows * cols:
        raise ValueError(
            f'n_changed_tiles must be between 0 and {rows * cols}, got {n_changed_tiles}')
    before = gen_scene(seed, height, width, bands, acquisition_index=0)
    rng = make_rng(seed + 1)
    picked = np.sort(rng.choice(rows * cols, size=n_changed_tiles, replace=False))
    data = before.data.copy()
    changed: List[TileIndex_T] = []
    for flat in picked:
        r, c = divmod(int(flat), cols)
        ys, xs = r * tile_size, c * tile_size
        data[:, ys:ys + tile_size, xs:xs + tile_size] = rng.uniform(
            0.0, 10000.0, (bands, tile_size, tile_size)).astype(np.float32)
        changed.append((r, c))
    after = Scene(data, gsd_m=before.gsd_m, acquisition_index=1)
    return ScenePair(before, after, changed)


def gen_latent_dataset(seed: int, n: int = 1305, margin: float = 8.0,
                       dim: int = 128, positive_fraction: float = 0.5
                       ) -> Tuple[LabeledLatentSet, LabeledLatentSet]:
    """
    生成两类高斯簇的隐向量数据集: 每类协方差为单位阵，两类中心沿一个随机单位方向相距 `margin`。

    参数:
        seed: 随机种子
        n: 训练集与评估集各自的样本数
        margin: 类中心距离；为 0 时两类不可分
        dim: 隐向量维度
        positive_fraction: 正样本比例

    返回:
        Tuple[LabeledLatentSet, LabeledLatentSet]: 互不重叠的训练集与评估集

    用法:
        ```python
        train_set, eval_set = gen_latent_dataset(42)
        assert len(train_set) == 1305
        ```
    """
    if n < 2:
        raise ValueError(f'n must be at least 2, got {n}')
    if margin < 0:
        raise ValueError(f'margin must be nonnegative, got {margin}')
    if not 0.0 < positive_fraction < 1.0:
        raise ValueError(f'positive_fraction must be in (0, 1), got {positive_fraction}')
    rng = make_rng(seed)
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    n_pos = min(n - 1, max(1, int(math.floor(n * positive_fraction + 0.5))))

    def draw(split: str) -> LabeledLatentSet:
        labels = rng.permutation(np.arange(n) < n_pos).astype(np.int8)
        sign = np.where(labels == 1, 0.5, -0.5)[:, None]
        x = rng.standard_normal((n, dim)) + sign * margin * direction
        return LabeledLatentSet(x.astype(np.float32), labels, split)

    return draw('train'), draw('eval')


def generate(spec: FixtureSpec, out_dir: PathLike_T) -> List[str]:
    """
    按 `FixtureSpec` 把测试数据写入 `out_dir`。

    写出的文件:

    - `weights`: `encoder.rvwt`、`encoder.arch`
    - `scene`: `scene_000.rvsc`、`scene_001.rvsc`……
    - `scene_pair`: `pair_before.rvsc`、`pair_after.rvsc`、`pair_changed.csv`（`row,col`）
    - `latent_dataset`: `latents_train.csv`、`latents_eval.csv`

    返回:
        List[str]: 写出的文件路径

    异常:
        UsageError: 未知的 `kind`
    """
    if spec.kind not in KINDS:
        raise UsageError(f'unknown fixture kind {spec.kind!r}, expected one of {KINDS}')
    os.makedirs(out_dir, exist_ok=True)

    def path(name: str) -> str:
        return os.path.join(out_dir, name)

    written: List[str] = []
    if spec.kind == 'weights':
        written.extend(write_reference_model(out_dir, spec.seed))
    elif spec.kind == 'scene':
        for i in range(spec.count):
            scene = gen_scene(spec.seed + i, spec.height, spec.width, spec.bands,
                              acquisition_index=i,
                              cloud_fraction=spec.cloud_fraction)
            save_scene(scene, path(f'scene_{i:03d}.rvsc'))
            written.append(path(f'scene_{i:03d}.rvsc'))
    elif spec.kind == 'scene_pair':
        pair = gen_scene_pair(spec.seed, spec.n_changed, spec.height,
                              spec.width, spec.bands)
        save_scene(pair.before, path('pair_before.rvsc'))
        save_scene(pair.after, path('pair_after.rvsc'))
        with open(path('pair_changed.csv'), 'w', newline='') as f:
            f.write('row,col\n')
            f.writelines(f'{r},{c}\n' for r, c in pair.changed)
        written.extend([path('pair_before.rvsc'), path('pair_after.rvsc'),
                        path('pair_changed.csv')])
    else:
        train_set, eval_set = gen_latent_dataset(
            spec.seed, spec.n_samples, spec.margin,
            positive_fraction=spec.positive_fraction)
        save_labeled_set(train_set, path('latents_train.csv'))
        save_labeled_set(eval_set, path('latents_eval.csv'))
        written.extend([path('latents_train.csv'), path('latents_eval.csv')])
    logger.info(f'Generated {spec.kind} fixture: {", ".join(written)}')
    return written


__all__ = [
    'KINDS',
    'FixtureSpec',
    'ScenePair',
    'reference_arch',
    'gen_weights',
    'write_reference_model',
    'gen_scene',
    'gen_scene_pair',
    'gen_latent_dataset',
    'generate',
]
