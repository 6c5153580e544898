import sys
from argparse import ArgumentParser

from .session import BaseSession


class ParserExit(RuntimeError):
    """INTERNAL API"""

    def __init__(self, status=0, message=None):
        self.status = status
        self.message = message


class ArgumentParser(ArgumentParser):
    """
    继承自 `argparse.ArgumentParser` 类，修改部分函数实现使其适用于可嵌入的命令行。

    基本用法和 Python 内置的 `argparse.ArgumentParser` 类一致，下面主要列出与 Python 原生含义和行为不同的属性和方法。

    参数:
        session: 当前需要解析参数的会话，帮助信息通过它输出
        kwargs: 和 Python `argparse.ArgumentParser` 类一致

    用法:
        ```python
        parser = ArgumentParser(session=session, prog='latentsat')
        parser.add_argument('--seed', type=int, default=42)
        try:
            args = parser.parse_args(argv)
        except ParserExit as e:
            return e.status
        ```
    """

    def __init__(self, *args, **kwargs):
        self.session = kwargs.pop('session', None)
        super().__init__(*args, **kwargs)

    def _print_message(self, message, file=None):
        if not message:
            return
        if self.session and isinstance(self.session, BaseSession):
            self.session.send(message.rstrip('\n'), err=file is sys.stderr)
        else:
            super()._print_message(message, file)

    def exit(self, status=0, message=None):
        raise ParserExit(status=status, message=message)

    def parse_args(self, args=None, namespace=None):
        """
        解析参数。

        Python 原生的「退出程序」行为变为抛出 `ParserExit`，`status` 为 0 表示已经输出了帮助信息，为 2 表示参数错误，错误信息在 `message` 中。
        """
        return super().parse_args(args=args, namespace=namespace)


__all__ = [
    'ArgumentParser',
]

__autodoc__ = {
    "ParserExit": False,
    "ArgumentParser.exit": False
}
