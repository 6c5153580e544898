"""
本模块主要用于命令参数过滤相关的功能。

命令参数过滤器主要有下面几种:

- 验证器，验证参数的取值范围、文件是否存在等是否符合要求，`validators` 子模块中提供了一些常用验证器
- 转换器，将参数进行类型或格式上的转换，例如 `int` 可以将字符串转换成整数，`converters` 子模块中提供了一些常用转换器

过滤器按顺序组合后可以直接作为 `add_argument` 的 `type` 参数使用，见 `latentsat.command.argfilter.chain`。
"""
from argparse import ArgumentTypeError
from typing import Any, Optional

from latentsat.typing import Filter_T


class ValidateError(ValueError):
    """
    用于表示验证失败的异常类。

    参数:
        message: 验证失败时的错误提示
    """

    def __init__(self, message: Optional[str] = None):
        super().__init__(message)
        self.message = message
        """{anno}`Optional[str]` 验证失败时要输出的错误提示消息。"""


def chain(*filters: Filter_T, name: Optional[str] = None) -> Filter_T:
    """
    依次应用多个过滤器。

    参数:
        filters: 过滤器
        name: 参数类型名称，出现在 argparse 的错误信息中

    返回:
        latentsat.typing.Filter_T: 组合后的过滤器

    用法:
        ```python
        parser.add_argument('--batch-size', type=chain(int, positive()))
        ```
    """

    def apply(value: Any) -> Any:
        try:
            for f in filters:
                value = f(value)
        except ValidateError as e:
            if e.message is None:
                raise
            # argparse reports ArgumentTypeError messages verbatim
            raise ArgumentTypeError(e.message) from e
        return value

    apply.__name__ = name or (getattr(filters[0], '__name__', 'value') if filters else 'value')
    return apply


__all__ = [
    'ValidateError',
    'chain',
]
