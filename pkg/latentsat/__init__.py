"""
为方便使用，`latentsat` 模块从子模块导入了部分内容:

- `LatentSatError` -> {ref}`latentsat.exceptions.LatentSatError`
- `load_scene` / `normalize` / `tile_scene` -> {ref}`latentsat.ingest`
- `load_model` -> {ref}`latentsat.model_io.load_model`
- `encode_tile` / `encode_batch` / `encode_grid` -> {ref}`latentsat.encoder`
- `change_map` / `rank_tiles` -> {ref}`latentsat.change_detect`
- `Classifier` / `train` / `evaluate` -> {ref}`latentsat.fewshot`
- `bench_inference` / `bench_training` -> {ref}`latentsat.bench`
- `on_command` / `CommandSession` -> {ref}`latentsat.command`
"""
__version__ = (0, 1, 0)

from typing import Any, Optional

from .log import logger, set_debug


class Engine:
    """
    全局引擎对象，持有配置以及配置所选的编码器后端。

    参数:
        config_object: 配置对象，类型不限，只要能够通过 `__getattr__` 和 `__dict__` 分别访问到单个和所有配置项即可，若没有传入，则使用默认配置

    属性:
        config: 配置对象
        backend: `ENCODER_BACKEND` 指定的编码器后端

    异常:
        UsageError: `ENCODER_BACKEND` 没有注册
    """
    __slots__ = ('config', 'backend')

    def __init__(self, config_object: Optional[Any] = None):
        if config_object is None:
            from . import default_config as config_object

        config_dict = {
            k: v
            for k, v in config_object.__dict__.items()
            if k.isupper() and not k.startswith('_')
        }
        logger.debug(f'Loaded configurations: {config_dict}')
        self.config = config_object

        from .encoder import BackendManager
        from .exceptions import UsageError

        backend = BackendManager.get_backend(self.config.ENCODER_BACKEND)
        if backend is None:
            raise UsageError(
                f'encoder backend "{self.config.ENCODER_BACKEND}" is not registered, '
                f'available: {", ".join(BackendManager.get_loaded_backends())}')
        self.backend = backend


_engine: Optional[Engine] = None


def init(config_object: Optional[Any] = None) -> Engine:
    """
    初始化全局 Engine 对象。

    参数:
        config_object: 配置对象，若没有传入，则使用默认配置

    返回:
        Engine: 新的全局 Engine 对象

    用法:
        ```python
        import config
        latentsat.init(config)
        ```

        导入 `config` 模块并初始化全局 Engine 对象。
    """
    global _engine
    set_debug(getattr(config_object, 'DEBUG', False))
    _engine = Engine(config_object)
    return _engine


def get_engine() -> Engine:
    """
    获取全局 Engine 对象。

    返回:
        Engine: 全局 Engine 对象

    异常:
        ValueError: 全局 Engine 对象尚未初始化
    """
    if _engine is None:
        raise ValueError('Engine instance has not been initialized')
    return _engine


from .exceptions import LatentSatError
from .ingest import load_scene, normalize, tile_scene
from .model_io import load_model
from .encoder import encode_tile, encode_batch, encode_grid
from .change_detect import change_map, rank_tiles
from .fewshot import Classifier, train, evaluate
from .bench import bench_inference, bench_training
from .command import CommandSession, on_command

__all__ = [
    'Engine',
    'init',
    'get_engine',
    'LatentSatError',
    'load_scene',
    'normalize',
    'tile_scene',
    'load_model',
    'encode_tile',
    'encode_batch',
    'encode_grid',
    'change_map',
    'rank_tiles',
    'Classifier',
    'train',
    'evaluate',
    'bench_inference',
    'bench_training',
    'CommandSession',
    'on_command',
]

__autodoc__ = {
    "latentsat.plugins": False
}
