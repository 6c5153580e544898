"""
编码器后端。

后端负责在某种计算设备上执行已绑定的编码器，流水线的其余部分只通过 `EncoderBackend` 接口与之交互。目前只实现了基于 numpy 的参考后端 `reference`，其它设备的后端可以通过 `register_backend` 注册:

```python
@register_backend('my-device')
class MyDeviceBackend(EncoderBackend):
    def encode(self, model, tiles):
        ...
```

任何后端输出的 `mu` 与参考后端逐元素相差不得超过 `1e-4`，见 `check_backend_agreement`。
"""
import abc
import warnings
from typing import Callable, Dict, Optional, Tuple, Type, TypeVar

import numpy as np

from latentsat.exceptions import DimensionError
from latentsat.model_io import BoundModel
from latentsat.tensor import conv2d, leaky_relu, linear
from latentsat.typing import Tensor_T

_B = TypeVar('_B', bound='EncoderBackend')


class EncoderBackend(abc.ABC):
    """
    编码器后端的抽象基类。

    属性:
        name: 后端名称，由 `register_backend` 设置
    """
    name: str = ''

    @abc.abstractmethod
    def encode(self, model: BoundModel,
               tiles: Tensor_T) -> Tuple[np.ndarray, np.ndarray]:
        """
        编码一批瓦片。

        参数:
            model: 已绑定的编码器
            tiles: `[B, C, H, W]` 的 `float32` 数组

        返回:
            Tuple[numpy.ndarray, numpy.ndarray]: 未截断的 `mu` 与 `logvar`，形状均为 `[B, latent_dim]`
        """
        raise NotImplementedError

    def __repr__(self) -> str:
        return f'<{type(self).__name__} "{self.name}">'


class BackendManager:
    """
    全局后端管理器。
    """
    _backends: Dict[str, EncoderBackend] = {}

    @classmethod
    def add_backend(cls, backend: EncoderBackend) -> None:
        """
        注册一个后端实例。

        参数:
            backend: 后端对象，其 `name` 属性必须非空
        """
        if backend.name in cls._backends:
            warnings.warn(f"Backend {backend.name} already exists")
            return
        cls._backends[backend.name] = backend

    @classmethod
    def remove_backend(cls, name: str) -> bool:
        """移除一个后端，返回是否移除成功。"""
        return cls._backends.pop(name, None) is not None

    @classmethod
    def get_backend(cls, name: str) -> Optional[EncoderBackend]:
        """获取已注册的后端，不存在时返回 `None`。"""
        return cls._backends.get(name)

    @classmethod
    def get_loaded_backends(cls) -> Dict[str, EncoderBackend]:
        """获取所有已注册的后端。"""
        return dict(cls._backends)


def register_backend(name: str) -> Callable[[Type[_B]], Type[_B]]:
    """
    将类装饰为编码器后端，实例化后以 `name` 注册到 `BackendManager`。

    参数:
        name: 后端名称

    返回:
        Callable[[Type[EncoderBackend]], Type[EncoderBackend]]: 装饰器闭包
    """
    def deco(cls: Type[_B]) -> Type[_B]:
        backend = cls()
        backend.name = name
        BackendManager.add_backend(backend)
        return cls

    return deco


def forward_tile(model: BoundModel, tile: Tensor_T) -> Tuple[Tensor_T, Tensor_T]:
    """
    对单个瓦片做一次前向计算，返回未截断的 `(mu, logvar)`。

    INTERNAL API
    """
    x = tile
    for layer in model.trunk:
        spec = layer.spec
        if spec.kind == 'conv2d':
            x = conv2d(x, layer.weight, layer.bias,
                       stride=int(spec.params['stride']),
                       padding=int(spec.params['padding']))
        elif spec.kind == 'linear':
            x = linear(x.reshape(-1), layer.weight, layer.bias)
        else:
            x = leaky_relu(x, float(spec.params['alpha']))
    flat = x.reshape(-1)
    mu_head, logvar_head = model.heads['mu'], model.heads['logvar']
    return (linear(flat, mu_head.weight, mu_head.bias),
            linear(flat, logvar_head.weight, logvar_head.bias))


@register_backend('reference')
class ReferenceBackend(EncoderBackend):
    """
    参考后端: 用 `latentsat.tensor` 的运算逐个瓦片执行前向计算。

    每个瓦片走完全相同的计算路径，因此结果与批次大小无关，逐位确定。
    """

    def encode(self, model: BoundModel,
               tiles: Tensor_T) -> Tuple[np.ndarray, np.ndarray]:
        if tiles.ndim != 4 or tiles.shape[1:] != model.input_shape:
            raise DimensionError(
                f'expected tiles of shape [B, {", ".join(map(str, model.input_shape))}], '
                f'got {list(tiles.shape)}')
        dim = model.latent_dim
        mu = np.empty((tiles.shape[0], dim), dtype=np.float32)
        logvar = np.empty((tiles.shape[0], dim), dtype=np.float32)
        for i, tile in enumerate(tiles):
            mu[i], logvar[i] = forward_tile(model, tile)
        return mu, logvar


def check_backend_agreement(backend: EncoderBackend, model: BoundModel,
                            tiles: Tensor_T) -> float:
    """
    比较某个后端与参考后端在同一批瓦片上的 `mu` 输出。

    参数:
        backend: 被检查的后端
        model: 已绑定的编码器
        tiles: `[B, C, H, W]` 瓦片

    返回:
        float: 逐元素绝对误差的最大值，合格的后端应不超过 `1e-4`
    """
    reference = BackendManager.get_backend('reference')
    ref_mu, _ = reference.encode(model, tiles)
    mu, _ = backend.encode(model, tiles)
    if mu.shape != ref_mu.shape:
        raise DimensionError(
            f'backend "{backend.name}" returned mu of shape {mu.shape}, expected {ref_mu.shape}')
    return float(np.max(np.abs(mu.astype(np.float64) - ref_mu.astype(np.float64)),
                        initial=0.0))


__all__ = [
    'EncoderBackend',
    'BackendManager',
    'register_backend',
    'ReferenceBackend',
    'check_backend_agreement',
]

__autodoc__ = {
    "forward_tile": False,
}
