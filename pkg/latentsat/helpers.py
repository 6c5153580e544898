import hashlib
import os
import time
from typing import Iterator, Optional
from contextlib import contextmanager

import numpy as np

from .typing import PathLike_T


def make_rng(seed: int) -> np.random.Generator:
    """
    创建可复现的随机数生成器。

    生成器固定为 PCG64，正态分布采样使用 numpy 的 `standard_normal`（ziggurat 方法），同一种子在任何平台上产生相同的序列。

    参数:
        seed: 随机种子

    返回:
        numpy.random.Generator: 随机数生成器

    用法:
        ```python
        rng = make_rng(42)
        eps = rng.standard_normal(128)
        ```
    """
    return np.random.Generator(np.random.PCG64(seed))


def file_id(path: PathLike_T) -> str:
    """
    获取文件在计时报告中使用的 ID，即不含目录的文件名。

    参数:
        path: 文件路径

    返回:
        str: 文件 ID
    """
    return os.path.basename(os.fspath(path))


def file_digest(path: PathLike_T) -> str:
    """
    计算文件内容的 SHA-256 摘要，用于检查生成文件在多次运行间是否一致。

    参数:
        path: 文件路径

    返回:
        str: 十六进制摘要
    """
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            h.update(chunk)
    return h.hexdigest()


def format_float(value: float) -> str:
    """
    以能够无损还原 `float32` 的最短固定格式输出浮点数，保证文本文件逐字节可复现。
    """
    return format(float(value), '.9g')


class Stopwatch:
    """
    基于单调时钟（纳秒精度）的计时器，结果以秒为单位。系统时间被调整时不受影响。

    用法:
        ```python
        with timed() as sw:
            encode(...)
        logger.debug(f'encode took {sw.elapsed}s')
        ```
    """
    __slots__ = ('_start', '_stop')

    def __init__(self):
        self._start: int = time.perf_counter_ns()
        self._stop: Optional[int] = None

    def stop(self) -> float:
        self._stop = time.perf_counter_ns()
        return self.elapsed

    @property
    def elapsed(self) -> float:
        """已经过的秒数；计时器停止后保持不变。"""
        end = self._stop if self._stop is not None else time.perf_counter_ns()
        return (end - self._start) / 1e9


@contextmanager
def timed() -> Iterator[Stopwatch]:
    """
    为 `with` 语句块计时的上下文管理器，退出语句块时停止计时。
    """
    sw = Stopwatch()
    try:
        yield sw
    finally:
        sw.stop()


__all__ = [
    'make_rng',
    'file_id',
    'file_digest',
    'format_float',
    'Stopwatch',
    'timed',
]
