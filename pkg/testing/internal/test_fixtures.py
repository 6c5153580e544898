import os

import numpy as np
import pytest

from latentsat.exceptions import UsageError
from latentsat.fewshot import Classifier, evaluate, load_labeled_set, train
from latentsat.fixtures import (KINDS, FixtureSpec, gen_latent_dataset,
                                gen_scene, gen_scene_pair, gen_weights,
                                generate, reference_arch, write_reference_model)
from latentsat.helpers import file_digest
from latentsat.ingest import load_scene
from latentsat.model_io import load_arch, load_weights


class Test_weights:
    def test_match_reference_arch(self):
        ws = gen_weights(42)
        assert [(n, a.shape) for n, a in ws] == reference_arch().param_shapes()

    def test_seeded(self):
        assert gen_weights(42) == gen_weights(42)
        assert gen_weights(42) != gen_weights(43)

    def test_he_scale(self):
        w = gen_weights(0)['conv4.weight']
        assert np.std(w) == pytest.approx(np.sqrt(2 / (128 * 9)), rel=0.05)

    def test_files_stable_across_runs(self, tmp_path):
        a = write_reference_model(tmp_path / 'a', seed=42)
        b = write_reference_model(tmp_path / 'b', seed=42)
        assert [file_digest(p) for p in a] == [file_digest(p) for p in b]
        assert load_weights(a[0]) == gen_weights(42)
        assert load_arch(a[1]) == reference_arch()


class Test_gen_scene:
    def test_shape_and_range(self):
        scene = gen_scene(42)
        assert scene.data.shape == (4, 480, 480)
        assert scene.data.dtype == np.float32
        assert scene.data.min() >= 0 and scene.data.max() <= 12000
        assert scene.gsd_m == 10.0

    def test_seeded(self):
        a, b = gen_scene(5, 64, 96), gen_scene(5, 64, 96)
        assert a.data.tobytes() == b.data.tobytes()
        assert a.data.tobytes() != gen_scene(6, 64, 96).data.tobytes()

    def test_full_cloud_is_bright(self):
        scene = gen_scene(1, 80, 80, cloud_fraction=1.0)
        assert scene.data.mean() == pytest.approx(8500, rel=0.01)

    def test_fewer_bands(self):
        assert gen_scene(1, 64, 64, bands=3).bands == 3

    @pytest.mark.parametrize('kwargs', [{'bands': 5}, {'bands': 0},
                                        {'cloud_fraction': 1.5}])
    def test_bad_arguments(self, kwargs):
        with pytest.raises(ValueError):
            gen_scene(1, 64, 64, **kwargs)


class Test_gen_scene_pair:
    def test_only_changed_tiles_differ(self):
        pair = gen_scene_pair(42, 5, height=160, width=192)
        assert len(pair.changed) == 5
        assert pair.changed == sorted(pair.changed)
        assert pair.after.acquisition_index == 1
        diff = np.any(pair.before.data != pair.after.data, axis=0)
        for r in range(5):
            for c in range(6):
                block = diff[32 * r:32 * r + 32, 32 * c:32 * c + 32]
                assert block.any() == ((r, c) in pair.changed)

    def test_too_many_changes(self):
        with pytest.raises(ValueError):
            gen_scene_pair(1, 5, height=64, width=64)


class Test_gen_latent_dataset:
    def test_positive_fraction(self):
        train, _ = gen_latent_dataset(3, n=100, positive_fraction=0.2)
        assert train.n_positive == 20

    def test_margin_separates_classes(self):
        train, _ = gen_latent_dataset(3, n=400, margin=8.0)
        pos = train.latents[train.labels == 1].mean(axis=0)
        neg = train.latents[train.labels == 0].mean(axis=0)
        assert np.linalg.norm(pos - neg) == pytest.approx(8.0, rel=0.2)

    @pytest.mark.parametrize('margin,low,high', [(0.0, 0.45, 0.55), (8.0, 0.99, 1.0)])
    def test_margin_controls_separability(self, margin, low, high):
        train_set, eval_set = gen_latent_dataset(42, margin=margin)
        clf, _ = train(Classifier.zeros(), train_set, epochs=50, batch_size=256,
                       lr=0.1, seed=42)
        assert low <= evaluate(clf, eval_set, 0.5).auprc <= high

    @pytest.mark.parametrize('kwargs', [{'n': 1}, {'margin': -1.0},
                                        {'positive_fraction': 0.0}])
    def test_bad_arguments(self, kwargs):
        with pytest.raises(ValueError):
            gen_latent_dataset(0, **kwargs)


class Test_generate:
    @pytest.mark.parametrize('kind,names', [
        ('weights', ['encoder.rvwt', 'encoder.arch']),
        ('scene', ['scene_000.rvsc', 'scene_001.rvsc']),
        ('scene_pair', ['pair_before.rvsc', 'pair_after.rvsc', 'pair_changed.csv']),
        ('latent_dataset', ['latents_train.csv', 'latents_eval.csv']),
    ])
    def test_writes_files(self, tmp_path, kind, names):
        spec = FixtureSpec(kind, height=64, width=96, count=2, n_changed=2, n_samples=50)
        written = generate(spec, tmp_path / 'out')
        assert [os.path.basename(p) for p in written] == names
        assert all(os.path.isfile(p) for p in written)

    def test_byte_identical_runs(self, tmp_path):
        for kind in KINDS:
            spec = FixtureSpec(kind, height=64, width=64, n_changed=1, n_samples=40)
            a = generate(spec, tmp_path / 'a')
            b = generate(spec, tmp_path / 'b')
            assert [file_digest(p) for p in a] == [file_digest(p) for p in b]

    def test_outputs_load(self, tmp_path):
        generate(FixtureSpec('scene', count=2, height=64, width=64), tmp_path)
        assert load_scene(tmp_path / 'scene_001.rvsc').acquisition_index == 1
        generate(FixtureSpec('latent_dataset', n_samples=30), tmp_path)
        assert len(load_labeled_set(tmp_path / 'latents_eval.csv')) == 30
        generate(FixtureSpec('scene_pair', height=64, width=64, n_changed=2), tmp_path)
        lines = (tmp_path / 'pair_changed.csv').read_text().splitlines()
        assert lines[0] == 'row,col' and len(lines) == 3

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(UsageError):
            generate(FixtureSpec('clouds'), tmp_path)
