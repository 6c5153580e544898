from latentsat.command import CommandSession, on_command
from latentsat.command.argfilter import chain
from latentsat.command.argfilter.validators import (between_inclusive,
                                                    nonnegative)
from latentsat.fixtures import KINDS, FixtureSpec, generate

from ._shared import positive_int


@on_command('fixtures', help='generate deterministic synthetic test data')
def fixtures(session: CommandSession):
    args = session.args
    spec = FixtureSpec(args.kind, seed=args.seed, height=args.height,
                       width=args.width, bands=args.bands, count=args.count,
                       cloud_fraction=args.cloud_fraction, n_changed=args.n_changed,
                       n_samples=args.samples, margin=args.margin,
                       positive_fraction=args.positive_fraction)
    for path in generate(spec, args.out):
        session.send(path)


@fixtures.args_parser
def _(parser):
    config = parser.session.config
    unit = chain(float, between_inclusive(0.0, 1.0), name='float')
    parser.add_argument('kind', choices=KINDS, help='which fixture to write')
    parser.add_argument('--out', default='fixtures', help='output directory')
    parser.add_argument('--seed', type=int, default=config.SEED, help='fixture seed')
    parser.add_argument('--height', type=positive_int(), default=480, help='scene height in pixels')
    parser.add_argument('--width', type=positive_int(), default=480, help='scene width in pixels')
    parser.add_argument('--bands', type=positive_int(), default=config.BANDS,
                        help='spectral bands per scene')
    parser.add_argument('--count', type=positive_int(), default=1,
                        help='number of scenes for kind=scene')
    parser.add_argument('--cloud-fraction', type=unit, default=0.0,
                        help='share of each scene covered by cloud')
    parser.add_argument('--n-changed', type=chain(int, nonnegative(), name='int'),
                        default=5, help='changed tiles for kind=scene_pair')
    parser.add_argument('--samples', type=positive_int(), default=config.FIXTURE_SAMPLES,
                        help='samples per split for kind=latent_dataset')
    parser.add_argument('--margin', type=chain(float, nonnegative(), name='float'),
                        default=config.FIXTURE_MARGIN,
                        help='distance between the class centres, 0 for inseparable classes')
    parser.add_argument('--positive-fraction', type=unit, default=0.5,
                        help='share of positive labels')
