from latentsat.bench import (export_report, export_training_sweep,
                             bench_inference, bench_training)
from latentsat.change_detect import ChangeMetric
from latentsat.command import CommandSession, on_command
from latentsat.command.argfilter import chain
from latentsat.command.argfilter.converters import split_comma_ints
from latentsat.command.argfilter.validators import (between_inclusive, each,
                                                    not_empty, positive)
from latentsat.exceptions import UsageError
from latentsat.fewshot import load_labeled_set
from latentsat.fixtures import gen_latent_dataset
from latentsat.log import logger

from ._shared import (add_model_arguments, load_encoder, positive_float,
                      positive_int)


def _run_inference(session: CommandSession) -> None:
    args = session.args
    if not args.inputs:
        raise UsageError('inference benchmark needs at least one scene file')
    if not (args.model and args.arch):
        raise UsageError('inference benchmark needs --model and --arch')
    config = session.config
    report = bench_inference(args.inputs, load_encoder(session), args.batch_size,
                             backend=session.engine.backend,
                             metric=ChangeMetric(args.metric),
                             history_window=args.window, workers=args.workers,
                             divisor=config.NORMALIZATION_DIVISOR,
                             max_abs=config.MAX_ABS_INPUT, tile_size=config.TILE_SIZE,
                             logvar_clamp=tuple(config.LOGVAR_CLAMP))
    written = export_report(report, 'csv', f'{args.out}_inference.csv')
    written += export_report(report, 'json', f'{args.out}_inference.json')

    session.send(f'backend {report.backend_name}, batch size {report.batch_size}, '
                 f'{len(report.file_ids)} files')
    session.send('phase\tcount\tmean_s\tmedian_s\tp95_s\tmax_s')
    for phase, stats in report.phase_summary().items():
        session.send(_stats_line(phase, stats))
    session.send(_stats_line('batch', report.batch_summary()))
    for path in written:
        session.send(path)


def _run_training(session: CommandSession) -> None:
    args = session.args
    config = session.config
    if args.inputs:
        if len(args.inputs) > 1:
            raise UsageError('training benchmark takes a single labeled latent CSV')
        data = load_labeled_set(args.inputs[0], 'train')
        eval_data = load_labeled_set(args.eval, 'eval') if args.eval else None
    else:
        logger.info('No dataset given, using the synthetic latent dataset')
        data, eval_data = gen_latent_dataset(args.seed, config.FIXTURE_SAMPLES,
                                             config.FIXTURE_MARGIN)
        if args.eval:
            eval_data = load_labeled_set(args.eval, 'eval')
    rows = bench_training(data, args.batch_sizes, args.epochs, args.seed,
                          lr=args.lr, eval_data=eval_data, threshold=args.threshold)
    export_training_sweep(rows, 'csv', f'{args.out}_training.csv')
    export_training_sweep(rows, 'json', f'{args.out}_training.json')

    session.send('batch_size\tmean_epoch_s\tstd_epoch_s\tf1\tauprc')
    for row in rows:
        session.send(f'{row.batch_size}\t{row.mean_epoch_s:.6f}\t{row.std_epoch_s:.6f}\t'
                     f'{row.metrics.f1:.4f}\t{row.metrics.auprc:.4f}')
    session.send(f'{args.out}_training.csv')
    session.send(f'{args.out}_training.json')


def _stats_line(name, stats) -> str:
    return (f'{name}\t{stats.count}\t{stats.mean:.6f}\t{stats.median:.6f}\t'
            f'{stats.p95:.6f}\t{stats.max:.6f}')


@on_command('bench', help='time the inference pipeline or the training sweep')
def bench(session: CommandSession):
    if session.args.mode == 'inference':
        _run_inference(session)
    else:
        _run_training(session)


@bench.args_parser
def _(parser):
    config = parser.session.config
    parser.add_argument('mode', choices=('inference', 'training'), help='what to time')
    parser.add_argument('inputs', nargs='*',
                        help='scene files for inference, a labeled latent CSV for training')
    add_model_arguments(parser, required=False)
    parser.add_argument('--batch-sizes',
                        type=chain(split_comma_ints, not_empty('no batch sizes given'),
                                   each(positive()), name='list'),
                        default=list(config.TRAINING_BATCH_SIZES),
                        help='comma-separated training batch sizes')
    parser.add_argument('--epochs', type=positive_int(), default=config.EPOCHS,
                        help='training epochs per batch size')
    parser.add_argument('--lr', type=positive_float(), default=config.LEARNING_RATE,
                        help='SGD learning rate')
    parser.add_argument('--seed', type=int, default=config.SEED,
                        help='seed for shuffling and the synthetic dataset')
    parser.add_argument('--eval', default=None, help='held-out labeled latent CSV')
    parser.add_argument('--threshold', type=chain(float, between_inclusive(0.0, 1.0),
                                                  name='float'),
                        default=config.THRESHOLD, help='decision threshold for the metrics')
    parser.add_argument('--window', type=positive_int(), default=config.HISTORY_WINDOW,
                        help='previous scenes each scene is compared against')
    parser.add_argument('--metric', choices=[m.value for m in ChangeMetric],
                        default=config.CHANGE_METRIC, help='latent distance')
    parser.add_argument('--out', default='bench', help='report file prefix')
