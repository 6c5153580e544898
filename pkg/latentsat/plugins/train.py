from latentsat.command import CommandSession, on_command
from latentsat.command.argfilter import chain
from latentsat.command.argfilter.validators import between_inclusive, nonnegative
from latentsat.fewshot import (Classifier, evaluate, load_classifier,
                               load_labeled_set, save_classifier, train)
from latentsat.log import logger

from ._shared import positive_float, positive_int


@on_command('train', help='train the few-shot classifier on labeled latents')
def train_classifier(session: CommandSession):
    args = session.args
    data = load_labeled_set(args.data, 'train')
    init = load_classifier(args.init) if args.init else Classifier.zeros(data.dim)
    clf, timings = train(init, data, args.epochs, args.batch_size, args.lr, args.seed)
    save_classifier(clf, args.out)
    if timings:
        mean_epoch = sum(t.duration_s for t in timings) / len(timings)
        session.send(f'{len(timings)} epochs over {len(data)} samples, '
                     f'final loss {timings[-1].mean_loss:.6f}, mean epoch {mean_epoch:.4f}s')
    session.send(f'classifier ({clf.n_params} parameters) written to {args.out}')

    if args.eval:
        eval_set = load_labeled_set(args.eval, 'eval')
    else:
        logger.warning('No evaluation set given, metrics are computed on the training set')
        eval_set = data
    m = evaluate(clf, eval_set, args.threshold)
    session.send(f'precision {m.precision:.4f}  recall {m.recall:.4f}  '
                 f'f1 {m.f1:.4f}  auprc {m.auprc:.4f}  accuracy {m.accuracy:.4f}')
    session.send(f'tp {m.tp}  fp {m.fp}  tn {m.tn}  fn {m.fn}')


@train_classifier.args_parser
def _(parser):
    config = parser.session.config
    parser.add_argument('data', help='labeled latent CSV (f0..f127,label)')
    parser.add_argument('--eval', default=None, help='held-out labeled latent CSV')
    parser.add_argument('--epochs', type=chain(int, nonnegative(), name='int'),
                        default=config.EPOCHS, help='passes over the training set')
    parser.add_argument('--batch-size', type=positive_int(),
                        default=config.TRAIN_BATCH_SIZE, help='samples per SGD step')
    parser.add_argument('--lr', type=positive_float(), default=config.LEARNING_RATE,
                        help='SGD learning rate')
    parser.add_argument('--seed', type=int, default=config.SEED,
                        help='seed for the per-epoch shuffle')
    parser.add_argument('--threshold', type=chain(float, between_inclusive(0.0, 1.0),
                                                  name='float'),
                        default=config.THRESHOLD, help='decision threshold for the metrics')
    parser.add_argument('--init', default=None,
                        help='start from a saved classifier instead of zeros')
    parser.add_argument('--out', default='classifier.rvwt',
                        help='where to save the trained classifier')
