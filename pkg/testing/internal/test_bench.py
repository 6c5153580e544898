import csv
import json
import logging
import math
import statistics
import time

import numpy as np
import pytest

import latentsat.bench
from latentsat.bench import (BATCH_FIELDS, PHASE_FIELDS, PHASES, SWEEP_FIELDS,
                             BatchRecord, PhaseTiming, Stats, TimingReport,
                             batches_path, bench_inference, bench_training,
                             export_report, export_training_sweep,
                             report_from_json, summarize)
from latentsat.encoder import encode_grid
from latentsat.exceptions import EmptyInputError, ValueRangeError
from latentsat.fixtures import FixtureSpec, gen_latent_dataset, generate
from latentsat.helpers import file_id
from latentsat.ingest import Scene, load_scene, normalize, save_scene, tile_scene


def recompute(values):
    values = sorted(values)
    return Stats(len(values), statistics.fmean(values), statistics.median(values),
                 values[math.ceil(0.95 * len(values)) - 1], values[-1])


@pytest.fixture(scope='module')
def scenes(tmp_path_factory):
    out = tmp_path_factory.mktemp('scenes')
    return generate(FixtureSpec('scene', seed=3, count=3), out)


@pytest.fixture(scope='module')
def report(scenes, model):
    return bench_inference(scenes, model, 64)


class Test_summarize:
    def test_one_to_hundred(self):
        s = summarize(range(1, 101))
        assert s == Stats(100, 50.5, 50.5, 95.0, 100.0)

    def test_single_value(self):
        assert summarize([0.25]) == Stats(1, 0.25, 0.25, 0.25, 0.25)

    def test_accepts_records(self):
        records = [BatchRecord('a', i, 64, d) for i, d in enumerate([0.3, 0.1, 0.2])]
        assert summarize(records) == summarize([0.3, 0.1, 0.2])

    def test_ordering(self, rng):
        values = list(rng.exponential(0.1, 37))
        s = summarize(values)
        assert s == recompute(values)
        assert s.median <= s.p95 <= s.max

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            summarize([])


class Test_bench_inference:
    def test_record_counts(self, report, scenes):
        assert len(report.batches) == 12
        assert len(report.phases) == 12
        assert report.file_ids == ['scene_000.rvsc', 'scene_001.rvsc', 'scene_002.rvsc']
        for fid in report.file_ids:
            assert [p.phase for p in report.phases if p.file_id == fid] == list(PHASES)
            counts = [b.tile_count for b in report.batches if b.file_id == fid]
            assert counts == [64, 64, 64, 33]
        assert report.backend_name == 'reference'
        assert report.batch_size == 64

    def test_summaries_match_recomputation(self, report):
        for phase, stats in report.phase_summary().items():
            assert stats == recompute([p.duration_s for p in report.phases
                                       if p.phase == phase])
        assert report.batch_summary() == recompute([b.duration_s for b in report.batches])

    def test_batch_hook_delay_shows_up(self, scenes, model):
        def hook(batch_index):
            if batch_index == 2:
                time.sleep(0.05)

        report = bench_inference(scenes[:1], model, 64, batch_hook=hook)
        durations = [b.duration_s for b in report.batches]
        assert durations[2] >= 0.05
        assert report.batch_summary().max == max(durations)

    def test_grids_passed_to_callback(self, scenes, model):
        seen = []
        bench_inference(scenes[:2], model, 128, on_grid=lambda fid, g: seen.append((fid, len(g))))
        assert seen == [('scene_000.rvsc', 225), ('scene_001.rvsc', 225)]

    def test_missing_file_aborts(self, scenes, model, tmp_path, caplog):
        with caplog.at_level(logging.ERROR, logger='latentsat'):
            with pytest.raises(OSError):
                bench_inference([scenes[0], tmp_path / 'gone.rvsc'], model, 64)
        assert 'gone.rvsc' in caplog.text

    def test_no_scenes(self, model):
        with pytest.raises(EmptyInputError):
            bench_inference([], model, 64)

    def test_latents_match_plain_encoding(self, scenes, model):
        seen = {}
        bench_inference(scenes[:2], model, 64, on_grid=seen.__setitem__)
        for path in scenes[:2]:
            grid = tile_scene(normalize(load_scene(path)))
            plain, _ = encode_grid(grid, model, 64)
            benched = seen[file_id(path)]
            assert benched.mu_matrix().tobytes() == plain.mu_matrix().tobytes()

    def test_scene_limits(self, model, tmp_path):
        data = np.full((4, 32, 32), 100.0, dtype=np.float32)
        data[2, 5, 7] = 8000.0
        save_scene(Scene(data), tmp_path / 'bright.rvsc')
        assert len(bench_inference([tmp_path / 'bright.rvsc'], model, 8).batches) == 1
        with pytest.raises(ValueRangeError):
            bench_inference([tmp_path / 'bright.rvsc'], model, 8, max_abs=5000.0)

    def test_logvar_clamp(self, scenes, model):
        seen = {}
        bench_inference(scenes[:1], model, 64, logvar_clamp=(-0.5, 0.5),
                        on_grid=seen.__setitem__)
        grid = tile_scene(normalize(load_scene(scenes[0])))
        plain, _ = encode_grid(grid, model, 64, logvar_clamp=(-0.5, 0.5))
        logvar = np.stack([lat.logvar for lat in seen['scene_000.rvsc']])
        assert logvar.min() >= -0.5 and logvar.max() <= 0.5
        assert logvar.tobytes() == np.stack([lat.logvar for lat in plain]).tobytes()

    def test_history_window(self, scenes, model, monkeypatch):
        compared = []

        def spy(history, current, metric):
            compared.append(len(history))

        monkeypatch.setattr(latentsat.bench, 'change_map', spy)
        bench_inference(scenes, model, 128, history_window=1)
        assert compared == [1, 1]
        compared.clear()
        bench_inference(scenes, model, 128, history_window=5)
        assert compared == [1, 2]


class Test_report_files:
    def test_csv(self, report, tmp_path):
        written = export_report(report, 'csv', tmp_path / 'r.csv')
        assert written == [str(tmp_path / 'r.csv'), str(tmp_path / 'r.batches.csv')]
        with open(written[0], newline='') as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == PHASE_FIELDS
        assert len(rows) == 1 + 12
        assert float(rows[1][2]) == report.phases[0].duration_s
        with open(written[1], newline='') as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == BATCH_FIELDS
        assert [int(r[2]) for r in rows[1:5]] == [64, 64, 64, 33]

    def test_json_round_trip(self, report, tmp_path):
        export_report(report, 'json', tmp_path / 'r.json')
        assert report_from_json(tmp_path / 'r.json') == report
        doc = json.loads((tmp_path / 'r.json').read_text())
        assert set(doc['summary']) == set(PHASES)
        assert doc['batch_summary']['count'] == 12

    def test_batches_path(self):
        assert batches_path('out/bench_inference.csv') == 'out/bench_inference.batches.csv'

    def test_unknown_format(self, report, tmp_path):
        with pytest.raises(ValueError):
            export_report(report, 'xml', tmp_path / 'r.xml')

    def test_equality(self):
        a = TimingReport('reference', 8, [PhaseTiming('a', 'load', 0.1)])
        b = TimingReport('reference', 8, [PhaseTiming('a', 'load', 0.1)])
        assert a == b
        assert a != TimingReport('reference', 16, a.phases)


class Test_bench_training:
    @pytest.fixture(scope='class')
    def rows(self):
        train_set, eval_set = gen_latent_dataset(42, n=300)
        return bench_training(train_set, [32, 128], epochs=3, seed=42, eval_data=eval_set)

    def test_one_row_per_batch_size(self, rows):
        assert [r.batch_size for r in rows] == [32, 128]
        for r in rows:
            assert r.epochs == 3
            assert len(r.epoch_durations) == 3
            assert r.mean_epoch_s == pytest.approx(statistics.fmean(r.epoch_durations))
            assert r.std_epoch_s == pytest.approx(statistics.pstdev(r.epoch_durations))
            assert 0.0 <= r.metrics.f1 <= 1.0

    def test_export(self, rows, tmp_path):
        export_training_sweep(rows, 'csv', tmp_path / 't.csv')
        with open(tmp_path / 't.csv', newline='') as f:
            table = list(csv.reader(f))
        assert tuple(table[0]) == SWEEP_FIELDS
        assert [int(r[0]) for r in table[1:]] == [32, 128]
        export_training_sweep(rows, 'json', tmp_path / 't.json')
        doc = json.loads((tmp_path / 't.json').read_text())
        assert [d['batch_size'] for d in doc] == [32, 128]
        assert len(doc[0]['epoch_durations']) == 3

    def test_default_sweep_separates_fixture(self):
        train_set, eval_set = gen_latent_dataset(42)
        rows = bench_training(train_set, [32, 64, 128, 256], epochs=50, seed=42,
                              eval_data=eval_set)
        assert [r.batch_size for r in rows] == [32, 64, 128, 256]
        for r in rows:
            # 8 sigma class margin: at most a couple of eval points on the wrong side
            assert r.metrics.accuracy >= 0.998
            assert r.metrics.auprc >= 0.99

    def test_bad_arguments(self):
        train_set, _ = gen_latent_dataset(1, n=20)
        with pytest.raises(EmptyInputError):
            bench_training(train_set, [], 1, 0)
        with pytest.raises(ValueError):
            bench_training(train_set, [8], 0, 0)
