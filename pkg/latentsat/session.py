import sys
from typing import Any, Optional, TextIO

from . import Engine


class BaseSession:
    """
    基础 session 类，`CommandSession` 继承自此类。

    参数:
        engine: 全局 Engine 对象
        out: 输出摘要的流，默认为标准输出
        err: 输出错误信息的流，默认为标准错误
    """
    __slots__ = ('engine', 'out', 'err')

    def __init__(self, engine: Optional[Engine],
                 out: Optional[TextIO] = None, err: Optional[TextIO] = None):
        self.engine = engine
        """Session 对应的 Engine 对象。"""
        self.out = out if out is not None else sys.stdout
        self.err = err if err is not None else sys.stderr

    @property
    def config(self) -> Any:
        """当前 Engine 的配置对象，等价于 `session.engine.config`。"""
        return self.engine.config

    def send(self, message: str, *, err: bool = False) -> None:
        """
        输出一条供人阅读的消息。机器可读的数据只写入文件，不通过此方法输出。

        参数:
            message: 消息内容
            err: 是否输出到错误流

        用法:
            ```python
            session.send(f'encoded {n} tiles')
            ```
        """
        stream = self.err if err else self.out
        print(message, file=stream)


__all__ = [
    'BaseSession',
]
