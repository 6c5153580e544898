import pytest

from testing.external.common.client import run_all, run_cli_as_subprocess


@pytest.fixture(scope='module')
def ws(tmp_path_factory):
    d = tmp_path_factory.mktemp('external')
    run_all([
        ['fixtures', 'weights', '--out', d],
        ['fixtures', 'scene_pair', '--height', 64, '--width', 96, '--n-changed', 1,
         '--out', d],
        ['fixtures', 'latent_dataset', '--out', d],
    ])
    return d


class TestEntryPoint:
    def test_help(self):
        res = run_cli_as_subprocess('--help', config=False)
        assert res.code == 0
        assert 'encode' in res.stdout and 'bench' in res.stdout

    def test_usage_error(self):
        res = run_cli_as_subprocess('fixtures', 'nothing')
        assert res.code == 2
        assert 'invalid choice' in res.stderr

    def test_missing_file(self, tmp_path):
        res = run_cli_as_subprocess('train', tmp_path / 'missing.csv',
                                    '--out', tmp_path / 'clf.rvwt')
        assert res.code == 3


class TestPipeline:
    def test_encode_change_train(self, ws):
        model = ['--model', ws / 'encoder.rvwt', '--arch', ws / 'encoder.arch']
        pair = [ws / 'pair_before.rvsc', ws / 'pair_after.rvsc']

        res = run_cli_as_subprocess('encode', *pair, *model, '--out', ws / 'latents')
        assert res.code == 0, res.stderr
        assert (ws / 'latents' / 'pair_after.latents.csv').is_file()

        res = run_cli_as_subprocess('change', *pair, *model, '-k', 1,
                                    '--out', ws / 'cm.csv')
        assert res.code == 0, res.stderr
        changed = (ws / 'pair_changed.csv').read_text().split()[1]
        top = [line.split('\t') for line in res.stdout.splitlines()
               if line[:1].isdigit()][0]
        assert f'{top[1]},{top[2]}' == changed

        res = run_cli_as_subprocess('train', ws / 'latents_train.csv',
                                    '--eval', ws / 'latents_eval.csv',
                                    '--out', ws / 'clf.rvwt')
        assert res.code == 0, res.stderr
        assert '5 epochs over 200 samples' in res.stdout
