"""
latentsat 的异常类型。

所有由本包主动抛出的异常都继承自 `LatentSatError`，命令行据此将异常映射为退出码:

- `UsageError` -> `2`
- `OSError` -> `3`
- 其它 `LatentSatError` -> `4`
"""
from typing import Optional, Sequence


class LatentSatError(Exception):
    """所有 latentsat 异常的基类。"""


class DimensionError(LatentSatError, ValueError):
    """张量形状或维度不匹配。"""


class EmptyInputError(LatentSatError, ValueError):
    """输入为空（空数据集、空计时记录等）。"""


class UsageError(LatentSatError):
    """命令参数在解析之后才能发现的使用错误，例如 `k` 大于瓦片数量。"""


class FormatError(LatentSatError, ValueError):
    """文件格式错误的基类。"""


class BadMagicError(FormatError):
    """文件开头的魔数不正确。"""


class UnsupportedVersionError(FormatError):
    """文件格式版本不受支持。"""


class TruncatedError(FormatError):
    """文件在某个字段或张量数据中途结束。"""


class ShapeMismatchError(FormatError):
    """文件内声明的形状与数据长度不一致，或条目本身不合法。"""


class BadHeaderError(FormatError):
    """场景文件头部不合法。"""


class PayloadSizeError(FormatError):
    """场景文件头部声明的维度与实际数据长度不一致。"""


class ValueRangeError(FormatError):
    """输入数值超出允许范围。"""


class NonFiniteError(FormatError):
    """
    数据中存在 NaN 或 Inf。

    参数:
        band: 所在波段，未知时为 `None`
        offset: 在该波段内的元素偏移
    """

    def __init__(self, message: str, band: Optional[int] = None,
                 offset: Optional[int] = None):
        super().__init__(message)
        self.band = band
        self.offset = offset


class CsvFormatError(FormatError):
    """
    CSV 文件格式错误。

    参数:
        line: 出错的行号（从 1 开始）
    """

    def __init__(self, message: str, line: int):
        super().__init__(f'line {line}: {message}')
        self.line = line


class BindError(LatentSatError):
    """权重与网络结构绑定失败的基类。"""


class MissingEntryError(BindError):
    """权重集中缺少网络结构需要的条目。"""

    def __init__(self, name: str):
        super().__init__(f'weight set has no entry "{name}"')
        self.name = name


class BindShapeError(BindError):
    """权重条目的形状与网络结构期望的形状不一致。"""

    def __init__(self, layer: str, expected: Sequence[int],
                 actual: Sequence[int]):
        super().__init__(f'layer "{layer}" expects shape {list(expected)}, '
                         f'got {list(actual)}')
        self.layer = layer
        self.expected = tuple(expected)
        self.actual = tuple(actual)


__all__ = [
    'LatentSatError',
    'DimensionError',
    'EmptyInputError',
    'UsageError',
    'FormatError',
    'BadMagicError',
    'UnsupportedVersionError',
    'TruncatedError',
    'ShapeMismatchError',
    'BadHeaderError',
    'PayloadSizeError',
    'ValueRangeError',
    'NonFiniteError',
    'CsvFormatError',
    'BindError',
    'MissingEntryError',
    'BindShapeError',
]
