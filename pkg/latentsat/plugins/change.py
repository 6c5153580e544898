from latentsat.change_detect import (ChangeMetric, change_map,
                                     export_change_map, rank_tiles)
from latentsat.command import CommandSession, on_command
from latentsat.exceptions import UsageError

from ._shared import add_model_arguments, encode_scene, load_encoder, positive_int


@on_command('change', help='rank tiles of the latest scene by latent change')
def change(session: CommandSession):
    args = session.args
    if len(args.scenes) < 2:
        raise UsageError('change detection needs at least two scenes in temporal order')
    model = load_encoder(session)
    grids = [encode_scene(session, model, path)[0] for path in args.scenes]
    current = grids[-1]
    history = grids[:-1][-args.window:]
    n_tiles = current.rows * current.cols
    if args.k > n_tiles:
        raise UsageError(f'k={args.k} exceeds the {n_tiles} tiles of the scene')

    cm = change_map(history, current, ChangeMetric(args.metric))
    export_change_map(cm, args.out, 'csv')
    if args.json:
        export_change_map(cm, args.json, 'json')
    session.send(f'change map {cm.rows}x{cm.cols} against {len(history)} '
                 f'previous scene(s) written to {args.out}')
    session.send('rank\trow\tcol\tscore')
    for rank, tile in enumerate(rank_tiles(cm, args.k), start=1):
        session.send(f'{rank}\t{tile.row}\t{tile.col}\t{tile.score:.6f}')


@change.args_parser
def _(parser):
    config = parser.session.config
    parser.add_argument('scenes', nargs='+',
                        help='scene files in temporal order, the last one is compared')
    add_model_arguments(parser)
    parser.add_argument('-k', '--top-k', dest='k', type=positive_int(),
                        default=config.TOP_K, help='number of ranked tiles to print')
    parser.add_argument('--window', type=positive_int(), default=config.HISTORY_WINDOW,
                        help='previous scenes compared against the last one')
    parser.add_argument('--metric', choices=[m.value for m in ChangeMetric],
                        default=config.CHANGE_METRIC, help='latent distance')
    parser.add_argument('--out', default='change_map.csv',
                        help='change map CSV (row,col,score)')
    parser.add_argument('--json', default=None,
                        help='also write the change map as JSON to this path')
