from typing import Dict, List, Tuple

from latentsat.argparse import ArgumentParser
from latentsat.command import CommandSession
from latentsat.command.argfilter import chain
from latentsat.command.argfilter.validators import positive
from latentsat.encoder import BatchTiming, LatentGrid, encode_grid
from latentsat.exceptions import DimensionError
from latentsat.helpers import timed
from latentsat.ingest import load_scene, normalize, tile_scene
from latentsat.model_io import BoundModel, load_model


def positive_int(message=None):
    return chain(int, positive(message), name='int')


def positive_float(message=None):
    return chain(float, positive(message), name='float')


def add_model_arguments(parser: ArgumentParser, required: bool = True) -> None:
    """声明编码器相关的参数，默认值取自配置。"""
    config = parser.session.config
    parser.add_argument('--model', required=required,
                        help='encoder weights file (.rvwt)')
    parser.add_argument('--arch', required=required,
                        help='encoder architecture manifest (.arch)')
    parser.add_argument('--batch-size', type=positive_int(),
                        default=config.BATCH_SIZE, help='tiles per encode batch')
    parser.add_argument('--workers', type=positive_int(),
                        default=config.ENCODE_WORKERS,
                        help='threads sharing each encode batch')


def load_encoder(session: CommandSession) -> BoundModel:
    """载入编码器，并检查其输入形状与隐向量维度是否与配置一致。"""
    config = session.config
    model = load_model(session.args.model, session.args.arch)
    expected = (config.BANDS, config.TILE_SIZE, config.TILE_SIZE)
    if tuple(model.input_shape) != expected:
        raise DimensionError(f'encoder input {tuple(model.input_shape)}, '
                             f'configured tiles are {expected}')
    if model.latent_dim != config.LATENT_DIM:
        raise DimensionError(f'encoder latent dim {model.latent_dim}, '
                             f'configured LATENT_DIM is {config.LATENT_DIM}')
    return model


def encode_scene(session: CommandSession, model: BoundModel,
                 path: str) -> Tuple[LatentGrid, List[BatchTiming], Dict[str, float]]:
    """读取、归一化、切分并编码一个场景，返回隐表示网格、批次计时与各阶段耗时。"""
    config, args = session.config, session.args
    phases: Dict[str, float] = {}
    with timed() as sw:
        scene = load_scene(path, max_abs=config.MAX_ABS_INPUT)
    phases['load'] = sw.elapsed
    with timed() as sw:
        grid = tile_scene(normalize(scene, config.NORMALIZATION_DIVISOR),
                          config.TILE_SIZE)
    phases['tile'] = sw.elapsed
    with timed() as sw:
        latents, timings = encode_grid(grid, model, args.batch_size,
                                       backend=session.engine.backend,
                                       workers=args.workers,
                                       logvar_clamp=tuple(config.LOGVAR_CLAMP))
    phases['encode'] = sw.elapsed
    return latents, timings, phases
