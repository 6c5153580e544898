"""
提供 logger 对象。

其他任何 "latentsat" 模块都应使用此模块的 "logger" 来打印日志。日志只写入标准错误，标准输出留给子命令的摘要。
"""

import logging
import sys

logger: logging.Logger = logging.getLogger('latentsat')
"""
latentsat 全局的 logger。

用法:
    ```python
    logger.info(f'{fid}: {len(grid)} tiles encoded')
    ```
"""
default_handler = logging.StreamHandler(sys.stderr)
default_handler.setFormatter(
    logging.Formatter('[%(asctime)s %(name)s] %(levelname)s: %(message)s'))
logger.addHandler(default_handler)


def set_debug(enabled: bool) -> None:
    """
    切换 DEBUG 级别日志（每个批次的耗时、加载的配置）。关闭时为 INFO 级别。

    参数:
        enabled: 是否输出 DEBUG 日志，通常取配置项 `DEBUG`
    """
    logger.setLevel(logging.DEBUG if enabled else logging.INFO)


__all__ = [
    'logger',
    'set_debug',
]
