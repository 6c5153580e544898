import csv

from latentsat.command import CommandSession, on_command
from latentsat.command.argfilter import chain
from latentsat.command.argfilter.validators import between_inclusive
from latentsat.fewshot import cloud_cover, load_classifier, should_downlink
from latentsat.helpers import file_id, format_float

from ._shared import add_model_arguments, encode_scene, load_encoder


@on_command('classify', help='screen scenes for cloud cover with a trained classifier')
def classify(session: CommandSession):
    args = session.args
    model = load_encoder(session)
    clf = load_classifier(args.classifier)
    rows = []
    for path in args.scenes:
        grid = encode_scene(session, model, path)[0]
        cover = cloud_cover(clf, grid, args.threshold)
        keep = should_downlink(cover, args.max_cloud_fraction)
        session.send(f'{file_id(path)}: {cover.fraction:.1%} cloudy, '
                     f'{"downlink" if keep else "skip"}')
        for i, p in enumerate(cover.probabilities):
            r, c = divmod(i, cover.cols)
            rows.append([file_id(path), r, c, format_float(p)])
    if args.out:
        with open(args.out, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['file_id', 'row', 'col', 'probability'])
            writer.writerows(rows)


@classify.args_parser
def _(parser):
    config = parser.session.config
    unit = chain(float, between_inclusive(0.0, 1.0), name='float')
    parser.add_argument('scenes', nargs='+', help='scene files (.rvsc)')
    add_model_arguments(parser)
    parser.add_argument('--classifier', required=True, help='trained classifier (.rvwt)')
    parser.add_argument('--threshold', type=unit, default=config.THRESHOLD,
                        help='cloud probability above which a tile counts as cloudy')
    parser.add_argument('--max-cloud-fraction', type=unit,
                        default=config.MAX_CLOUD_FRACTION,
                        help='cloud fraction above which a scene is not downlinked')
    parser.add_argument('--out', default=None,
                        help='per-tile probabilities CSV (file_id,row,col,probability)')
