"""
提供几种常用的转换器。
"""
from typing import List

from latentsat.command.argfilter import ValidateError


def split_comma_ints(text: str) -> List[int]:
    """
    将逗号分隔的整数列表转换成 `List[int]`，忽略空白与空项。

    例如:
        32,64,128,256 -> [32, 64, 128, 256]
        8, 16 -> [8, 16]
    """
    try:
        return [int(part) for part in map(str.strip, text.split(',')) if part]
    except ValueError as e:
        raise ValidateError(f'expected comma-separated integers, got {text!r}') from e


__all__ = [
    'split_comma_ints',
]
