"""
提供几种常用的验证器。

这些验证器的工厂函数全都接受可选参数 `message: str | None`，用于在验证失败时输出错误提示。使用这些验证器时，必须先调用验证器的工厂函数，其返回结果才是真正的验证器，例如:

```python
parser.add_argument('--epochs', type=chain(int, nonnegative('epochs must be >= 0')))
```
"""
from typing import Any

from latentsat.typing import Filter_T
from latentsat.command.argfilter import ValidateError


def _raise_failure(message):
    raise ValidateError(message)


def not_empty(message=None) -> Filter_T:
    """
    验证输入不为空。

    返回:
        latentsat.typing.Filter_T:
    """

    def validate(value):
        if value is None:
            _raise_failure(message)
        if hasattr(value, '__len__') and value.__len__() == 0:
            _raise_failure(message)
        return value

    return validate


def positive(message=None) -> Filter_T:
    """
    验证输入为正数。

    返回:
        latentsat.typing.Filter_T:
    """

    def validate(value):
        if not value > 0:
            _raise_failure(message or f'must be positive, got {value}')
        return value

    return validate


def nonnegative(message=None) -> Filter_T:
    """
    验证输入不为负数。

    返回:
        latentsat.typing.Filter_T:
    """

    def validate(value):
        if value < 0:
            _raise_failure(message or f'must be nonnegative, got {value}')
        return value

    return validate


def between_inclusive(start: Any = None, end: Any = None,
                      message=None) -> Filter_T:
    """
    验证输入是否在 `start` 到 `end` 之间（包括两者）。

    参数:
        start: 范围开始，`None` 表示无下界
        end: 范围结束，`None` 表示无上界
        message: 验证失败时的提示

    返回:
        latentsat.typing.Filter_T:
    """

    def validate(value):
        if (start is not None and value < start) or \
                (end is not None and value > end):
            _raise_failure(message or f'must be between {start} and {end}, got {value}')
        return value

    return validate


def each(validator: Filter_T) -> Filter_T:
    """
    对序列中的每个元素应用验证器。

    返回:
        latentsat.typing.Filter_T:
    """

    def validate(value):
        return type(value)(validator(v) for v in value)

    return validate


__all__ = [
    'not_empty',
    'positive',
    'nonnegative',
    'between_inclusive',
    'each',
]