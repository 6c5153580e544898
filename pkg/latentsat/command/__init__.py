"""
命令行入口与子命令注册。

子命令通过 `on_command` 注册，内置的子命令位于 `latentsat.plugins` 包中，由 `load_builtin_commands` 加载。

退出码:

| 退出码 | 含义 |
| --- | --- |
| 0 | 成功 |
| 2 | 用法错误（参数解析失败、参数验证失败、`UsageError`、其它参数取值错误） |
| 3 | 读写文件失败（`OSError`） |
| 4 | 数据验证失败（除 `UsageError` 外的 `LatentSatError`） |
"""
import argparse
import importlib
import os
import pkgutil
import sys
import warnings
from typing import Callable, Dict, List, Optional, Sequence, TextIO

from latentsat import Engine, init
from latentsat.argparse import ArgumentParser, ParserExit
from latentsat.exceptions import LatentSatError, UsageError
from latentsat.log import logger
from latentsat.session import BaseSession
from latentsat.typing import ArgsParser_T, CommandHandler_T

from .argfilter import ValidateError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4


class Command:
    """
    INTERNAL API
    """
    __slots__ = ('name', 'func', 'help', 'args_parser_func')

    def __init__(self, *, name: str, func: CommandHandler_T, help: str):
        self.name = name
        self.func = func
        self.help = help
        self.args_parser_func: Optional[ArgsParser_T] = None

    def run(self, session: 'CommandSession') -> None:
        """
        Run the command in a given session.

        :param session: CommandSession object with parsed args
        """
        self.func(session)

    def args_parser(self, parser_func: ArgsParser_T) -> ArgsParser_T:
        """
        Decorator to register a function as the arguments parser of
        the corresponding command.
        """
        self.args_parser_func = parser_func
        return parser_func

    def __repr__(self):
        return f'<Command, name={self.name.__repr__()}>'

    def __str__(self):
        return self.__repr__()


class CommandManager:
    """全局命令管理器。"""
    _commands = {}  # type: Dict[str, Command]

    @classmethod
    def add_command(cls, cmd_name: str, cmd: Command) -> None:
        """注册一个 `Command` 对象。

        参数:
            cmd_name: 命令名称
            cmd: 命令对象
        """
        if cmd_name in cls._commands:
            warnings.warn(f"Command {cmd_name} already exists")
            return
        cls._commands[cmd_name] = cmd

    @classmethod
    def remove_command(cls, cmd_name: str) -> bool:
        """移除一个已注册的命令，返回是否移除成功。"""
        return cls._commands.pop(cmd_name, None) is not None

    @classmethod
    def get_command(cls, cmd_name: str) -> Optional[Command]:
        return cls._commands.get(cmd_name)

    @classmethod
    def get_commands(cls) -> Dict[str, Command]:
        """获取所有已注册的命令，按注册顺序排列。"""
        return dict(cls._commands)


def on_command(name: str, *, help: str = '') -> Callable[[CommandHandler_T], CommandHandler_T]:
    """
    将函数装饰为子命令处理器 `CommandHandler_T`。

    被装饰的函数将会获得一个 `args_parser` 属性，是一个装饰器，用于声明该子命令的参数。

    参数:
        name: 子命令名
        help: 一行帮助，出现在 `latentsat --help` 中

    返回:
        Callable[[latentsat.typing.CommandHandler_T], latentsat.typing.CommandHandler_T]: 装饰器闭包

    用法:
        ```python
        @on_command('encode', help='encode scenes into latents')
        def encode(session: CommandSession):
            session.send(f'{len(session.args.scenes)} scenes')

        @encode.args_parser
        def _(parser: ArgumentParser):
            parser.add_argument('scenes', nargs='+', help='scene files')
        ```

        被装饰函数接收一个 `CommandSession`，`session.args` 为解析后的参数。
    """

    def deco(func: CommandHandler_T) -> CommandHandler_T:
        cmd = Command(name=name, func=func, help=help)
        CommandManager.add_command(name, cmd)
        func.args_parser = cmd.args_parser
        return func

    return deco


class CommandSession(BaseSession):
    """
    继承自 `BaseSession` 类，表示一次子命令的运行。

    属性:
        cmd: 当前运行的命令
        args: `argparse.Namespace`，解析后的命令参数
    """
    __slots__ = ('cmd', 'args')

    def __init__(self, engine: Optional[Engine] = None, cmd: Optional[Command] = None,
                 args: Optional[argparse.Namespace] = None,
                 out: Optional[TextIO] = None, err: Optional[TextIO] = None):
        super().__init__(engine, out, err)
        self.cmd = cmd
        self.args = args if args is not None else argparse.Namespace()


def load_builtin_commands() -> List[str]:
    """
    导入 `latentsat.plugins` 包中的全部非隐藏模块（隐藏模块名字以 `_` 开头），模块导入时即通过 `on_command` 注册子命令。

    返回:
        List[str]: 导入的模块名
    """
    plugin_dir = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'plugins')
    loaded = []
    for info in pkgutil.iter_modules([plugin_dir]):
        if info.name.startswith('_'):
            continue
        module_name = f'latentsat.plugins.{info.name}'
        importlib.import_module(module_name)
        loaded.append(module_name)
    return loaded


def build_parser(session: CommandSession) -> ArgumentParser:
    """
    构造带有全部已注册子命令的参数解析器，子命令参数的默认值取自 `session.config`。

    INTERNAL API
    """
    parser = ArgumentParser(
        prog='latentsat', session=session,
        description='Onboard latent-space change detection and few-shot '
                    'classification for multispectral tiles.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--config', default=None,
                        help='dotted path of a config module to import')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND',
                                       required=True)
    for name, cmd in CommandManager.get_commands().items():
        sub = subparsers.add_parser(
            name, help=cmd.help, description=cmd.help, session=session,
            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        if cmd.args_parser_func is not None:
            cmd.args_parser_func(sub)
    return parser


def _load_config(argv: Sequence[str]):
    pre = ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument('--config', default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return None
    return importlib.import_module(known.config)


def main(argv: Optional[Sequence[str]] = None, *,
         out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """
    命令行入口。

    参数:
        argv: 命令行参数，默认为 `sys.argv[1:]`
        out: 摘要输出流
        err: 错误输出流

    返回:
        int: 退出码

    用法:
        ```python
        code = main(['encode', 'scene.rvsc', '--model', 'encoder.rvwt',
                     '--arch', 'encoder.arch'])
        ```
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    session = CommandSession(out=out, err=err)
    try:
        session.engine = init(_load_config(argv))
        load_builtin_commands()
        parser = build_parser(session)
        session.args = parser.parse_args(argv)
        session.cmd = CommandManager.get_command(session.args.command)
        session.cmd.run(session)
    except ParserExit as e:
        if e.message:
            session.send(e.message.rstrip('\n'), err=True)
        return e.status
    except (UsageError, ValidateError, ImportError) as e:
        session.send(f'latentsat: error: {e}', err=True)
        return EXIT_USAGE
    except OSError as e:
        session.send(f'latentsat: I/O error: {e}', err=True)
        return EXIT_IO
    except LatentSatError as e:
        session.send(f'latentsat: invalid input: {e}', err=True)
        return EXIT_VALIDATION
    except ValueError as e:
        # parameter values the parser could not rule out up front
        session.send(f'latentsat: error: {e}', err=True)
        return EXIT_USAGE
    logger.debug(f'Command {session.cmd.name} finished')
    return EXIT_OK


__all__ = [
    'EXIT_OK',
    'EXIT_USAGE',
    'EXIT_IO',
    'EXIT_VALIDATION',
    'Command',
    'CommandManager',
    'on_command',
    'CommandSession',
    'load_builtin_commands',
    'main',
]

__autodoc__ = {
    "Command": False,
    "build_parser": False,
}
