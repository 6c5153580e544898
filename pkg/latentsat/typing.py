import os
from typing import TYPE_CHECKING, Any, Callable, Tuple, Union

import numpy as np

if TYPE_CHECKING:
    from latentsat.command import CommandSession
    from latentsat.argparse import ArgumentParser

Shape_T = Tuple[int, ...]
"""张量形状的类型"""
Tensor_T = np.ndarray
"""
稠密张量的类型，始终为 C 连续的 `float32` 数组
"""
TileIndex_T = Tuple[int, int]
"""瓦片在网格中的位置 `(row, col)`"""
PathLike_T = Union[str, 'os.PathLike[str]']
"""文件路径的类型"""
BatchHook_T = Callable[[int], Any]
"""
批次钩子，在每个编码批次的计时区间内以批次序号为参数被调用，仅用于测试中注入延迟
"""
CommandHandler_T = Callable[["CommandSession"], Any]
"""命令处理函数"""
ArgsParser_T = Callable[["ArgumentParser"], Any]
"""向子命令解析器声明参数的函数"""
Filter_T = Callable[[Any], Any]
"""
过滤器的类型
用法:
    ```python
    def validate(value):
        if value < 1:
            raise ValidateError('batch size must be positive')
        return value
    ```
"""


__all__ = [
    'Shape_T',
    'Tensor_T',
    'TileIndex_T',
    'PathLike_T',
    'BatchHook_T',
    'CommandHandler_T',
    'ArgsParser_T',
    'Filter_T',
]
