"""
默认配置。

任何自定义配置都必须从此模块导入所有内容，然后设置自定义值来覆盖默认值。

例如:

```python
from latentsat.default_config import *

DEBUG = True
BATCH_SIZE = 32
HISTORY_WINDOW = 5
```
"""

from typing import Tuple

DEBUG: bool = False
"""
是否以调试模式运行，调试模式下会输出每个批次的计时以及加载的配置。

**默认值:** `False`
"""

TILE_SIZE: int = 32
"""
瓦片边长（像素）。参考编码器的结构固定为 32，修改此值需要同时更换网络结构文件。

**默认值:** `32`
"""

BANDS: int = 4
"""
场景期望的波段数（RGB+NIR）。

**默认值:** `4`
"""

LATENT_DIM: int = 128
"""
隐向量维度。

**默认值:** `128`
"""

NORMALIZATION_DIVISOR: float = 10000.0
"""
辐射归一化的除数，原始 DN 值除以它后截断到 `[0, 1]`。这是 Sentinel-2 L1C 反射率的常用约定，属于可校准参数。

**默认值:** `10000.0`

用法:
    ```python
    NORMALIZATION_DIVISOR = 12000.0
    ```

    对偏亮的传感器数据使用更大的除数。
"""

MAX_ABS_INPUT: float = 1e6
"""
读入外部数据时允许的最大绝对值，超出即拒绝。

**默认值:** `1e6`
"""

LOGVAR_CLAMP: Tuple[float, float] = (-20.0, 20.0)
"""
编码器 logvar 输出的截断区间。

**默认值:** `(-20.0, 20.0)`
"""

BATCH_SIZE: int = 64
"""
编码时每个批次的瓦片数。

**默认值:** `64`
"""

ENCODER_BACKEND: str = 'reference'
"""
执行编码器的后端名称，须已通过 `register_backend` 注册。

**默认值:** `'reference'`
"""

ENCODE_WORKERS: int = 1
"""
编码批次内部并行的线程数，`1` 表示不使用线程池。输出顺序与线程数无关。

**默认值:** `1`
"""

CHANGE_METRIC: str = 'cosine'
"""
变化检测使用的隐空间距离，可选 `'cosine'`、`'euclidean'`。

**默认值:** `'cosine'`
"""

HISTORY_WINDOW: int = 3
"""
变化检测时参与比较的历史采集次数，分数取窗口内的最小值。

**默认值:** `3`
"""

TOP_K: int = 10
"""
`change` 命令输出的变化最大的瓦片数。

**默认值:** `10`
"""

EPOCHS: int = 50
"""
分类器训练轮数。

**默认值:** `50`
"""

TRAIN_BATCH_SIZE: int = 256
"""
分类器训练的小批量大小。

**默认值:** `256`
"""

LEARNING_RATE: float = 0.1
"""
SGD 学习率。

**默认值:** `0.1`
"""

THRESHOLD: float = 0.5
"""
分类器的置信度阈值。

**默认值:** `0.5`
"""

SEED: int = 42
"""
所有随机性的唯一来源。

**默认值:** `42`
"""

MAX_CLOUD_FRACTION: float = 0.7
"""
云覆盖比例超过此值的采集不建议下传。

**默认值:** `0.7`
"""

TRAINING_BATCH_SIZES: Tuple[int, ...] = (32, 64, 128, 256)
"""
训练基准测试扫描的批次大小。

**默认值:** `(32, 64, 128, 256)`
"""

FIXTURE_MARGIN: float = 8.0
"""
合成隐向量数据集中两类中心之间的距离。

**默认值:** `8.0`
"""

FIXTURE_SAMPLES: int = 1305
"""
合成隐向量数据集的训练样本数。

**默认值:** `1305`
"""


__all__ = [
    'DEBUG',
    'TILE_SIZE',
    'BANDS',
    'LATENT_DIM',
    'NORMALIZATION_DIVISOR',
    'MAX_ABS_INPUT',
    'LOGVAR_CLAMP',
    'BATCH_SIZE',
    'ENCODER_BACKEND',
    'ENCODE_WORKERS',
    'CHANGE_METRIC',
    'HISTORY_WINDOW',
    'TOP_K',
    'EPOCHS',
    'TRAIN_BATCH_SIZE',
    'LEARNING_RATE',
    'THRESHOLD',
    'SEED',
    'MAX_CLOUD_FRACTION',
    'TRAINING_BATCH_SIZES',
    'FIXTURE_MARGIN',
    'FIXTURE_SAMPLES',
]
