import os

from latentsat.bench import summarize
from latentsat.command import CommandSession, on_command
from latentsat.encoder.export import FORMATS, save_latent_grid
from latentsat.helpers import file_id

from ._shared import add_model_arguments, encode_scene, load_encoder


@on_command('encode', help='encode scenes into per-tile latent files')
def encode(session: CommandSession):
    args = session.args
    model = load_encoder(session)
    os.makedirs(args.out, exist_ok=True)
    for path in args.scenes:
        grid, timings, phases = encode_scene(session, model, path)
        stem = os.path.splitext(file_id(path))[0]
        target = os.path.join(args.out, f'{stem}.latents.{args.format}')
        save_latent_grid(grid, target, args.format)
        stats = summarize(timings)
        session.send(f'{file_id(path)}: {len(grid)} tiles -> {target} '
                     f'(load {phases["load"]:.4f}s, encode {phases["encode"]:.4f}s, '
                     f'{stats.count} batches, p95 batch {stats.p95:.4f}s)')


@encode.args_parser
def _(parser):
    parser.add_argument('scenes', nargs='+', help='scene files (.rvsc)')
    add_model_arguments(parser)
    parser.add_argument('--out', default='latents',
                        help='directory for the <scene>.latents.<format> files')
    parser.add_argument('--format', choices=FORMATS, default='csv',
                        help='csv holds row,col and mu; rvwt also keeps logvar')
