"""
计时基准。

推理基准对每个场景文件依次计时四个阶段:

- `load`: 读取并校验 `.rvsc` 文件
- `tile`: 辐射归一化与瓦片切分
- `encode`: 分批编码全部瓦片，每个批次另有一条计时记录
- `compare`: 与之前最多 `HISTORY_WINDOW` 次采集计算变化图；第一个文件没有历史采集，该阶段不做任何计算但仍然记录

训练基准对一组批次大小分别训练分类器，报告每轮平均耗时与评估指标。

报告文件格式见 `docs/formats.md`。
"""
import csv
import json
import math
import os
import statistics
from typing import (Any, Callable, Dict, Iterable, List, NamedTuple, Optional,
                    Sequence, Tuple, Union)

from .change_detect import ChangeMetric, change_map
from .encoder import (LOGVAR_CLAMP, BackendManager, EncoderBackend, LatentGrid,
                      encode_grid)
from .exceptions import EmptyInputError
from .fewshot import (Classifier, EvalMetrics, LabeledLatentSet, evaluate,
                      train)
from .helpers import file_id, timed
from .ingest import (MAX_ABS_INPUT, NORMALIZATION_DIVISOR, TILE_SIZE, load_scene,
                     normalize, tile_scene)
from .log import logger
from .model_io import BoundModel
from .typing import BatchHook_T, PathLike_T

PHASES = ('load', 'tile', 'encode', 'compare')

PHASE_FIELDS = ('file_id', 'phase', 'duration_s')
BATCH_FIELDS = ('file_id', 'batch_index', 'tile_count', 'duration_s')
SWEEP_FIELDS = ('batch_size', 'epochs', 'mean_epoch_s', 'std_epoch_s',
                'precision', 'recall', 'f1', 'auprc', 'accuracy')


class PhaseTiming(NamedTuple):
    file_id: str
    phase: str
    duration_s: float


class BatchRecord(NamedTuple):
    file_id: str
    batch_index: int
    tile_count: int
    duration_s: float


class Stats(NamedTuple):
    """
    一组耗时的统计量。`p95` 采用最近秩法，即升序排列后的第 `ceil(0.95·n)` 个值。
    """

    count: int
    mean: float
    median: float
    p95: float
    max: float


def summarize(raw: Iterable[Union[float, PhaseTiming, BatchRecord]]) -> Stats:
    """
    计算耗时的均值、中位数、p95 与最大值。

    参数:
        raw: 耗时（秒），或带有 `duration_s` 字段的计时记录

    返回:
        Stats: 统计量，满足 `median ≤ p95 ≤ max`

    异常:
        EmptyInputError: 输入为空

    用法:
        ```python
        summarize(range(1, 101))   # median 50.5, p95 95
        ```
    """
    values = sorted(float(getattr(r, 'duration_s', r)) for r in raw)
    if not values:
        raise EmptyInputError('cannot summarize an empty set of timings')
    rank = math.ceil(0.95 * len(values))
    return Stats(count=len(values),
                 mean=statistics.fmean(values),
                 median=statistics.median(values),
                 p95=values[rank - 1],
                 max=values[-1])


class TimingReport:
    """
    推理基准报告。汇总统计量总是由原始记录计算得到。

    属性:
        backend_name: 编码器后端名称
        batch_size: 编码批次大小
        phases: 每个文件每个阶段一条 `PhaseTiming`
        batches: 每个编码批次一条 `BatchRecord`
    """
    __slots__ = ('backend_name', 'batch_size', 'phases', 'batches')

    def __init__(self, backend_name: str, batch_size: int,
                 phases: Sequence[PhaseTiming] = (),
                 batches: Sequence[BatchRecord] = ()):
        self.backend_name = backend_name
        self.batch_size = batch_size
        self.phases: List[PhaseTiming] = list(phases)
        self.batches: List[BatchRecord] = list(batches)

    @property
    def file_ids(self) -> List[str]:
        seen: Dict[str, None] = {}
        for p in self.phases:
            seen.setdefault(p.file_id)
        return list(seen)

    def phase_summary(self) -> Dict[str, Stats]:
        """每个阶段的统计量。"""
        return {phase: summarize(p for p in self.phases if p.phase == phase)
                for phase in PHASES
                if any(p.phase == phase for p in self.phases)}

    def batch_summary(self) -> Stats:
        """编码批次耗时的统计量，用于发现个别变慢的批次。"""
        return summarize(self.batches)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'backend': self.backend_name,
            'batch_size': self.batch_size,
            'phases': [p._asdict() for p in self.phases],
            'batches': [b._asdict() for b in self.batches],
            'summary': {k: s._asdict() for k, s in self.phase_summary().items()},
            'batch_summary': self.batch_summary()._asdict() if self.batches else None,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimingReport):
            return NotImplemented
        return (self.backend_name, self.batch_size, self.phases, self.batches) == \
            (other.backend_name, other.batch_size, other.phases, other.batches)

    def __repr__(self) -> str:
        return (f'TimingReport(backend={self.backend_name}, batch_size={self.batch_size}, '
                f'files={len(self.file_ids)}, batches={len(self.batches)})')


class TrainingSweepRow(NamedTuple):
    batch_size: int
    epochs: int
    mean_epoch_s: float
    std_epoch_s: float
    metrics: EvalMetrics
    epoch_durations: tuple = ()


def bench_inference(scenes: Sequence[PathLike_T], model: BoundModel,
                    batch_size: int = 64,
                    *,
                    backend: Optional[EncoderBackend] = None,
                    metric: ChangeMetric = ChangeMetric.COSINE,
                    history_window: int = 3,
                    workers: int = 1,
                    divisor: float = NORMALIZATION_DIVISOR,
                    max_abs: float = MAX_ABS_INPUT,
                    tile_size: int = TILE_SIZE,
                    logvar_clamp: Tuple[float, float] = LOGVAR_CLAMP,
                    batch_hook: Optional[BatchHook_T] = None,
                    on_grid: Optional[Callable[[str, LatentGrid], Any]] = None
                    ) -> TimingReport:
    """
    对一组场景文件运行完整流水线（读取 → 归一化 → 切分 → 编码 → 与之前的采集比较）并计时。

    参数:
        scenes: 按时间顺序排列的场景文件，至少一个
        model: 已绑定的编码器
        batch_size: 编码批次大小
        backend: 编码器后端，默认为参考后端
        metric: 变化检测距离
        history_window: 比较时使用的历史采集数
        workers: 编码线程数
        divisor: 归一化除数
        max_abs: 场景中允许的最大绝对值
        tile_size: 瓦片边长
        logvar_clamp: `logvar` 的截断区间
        batch_hook: INTERNAL API，见 `encode_batch`
        on_grid: 每个文件编码完成后以 `(file_id, LatentGrid)` 调用

    返回:
        TimingReport: 每个文件 4 条阶段记录，以及 `Σ ceil(tiles / batch_size)` 条批次记录

    异常:
        EmptyInputError: 没有场景文件
        OSError, LatentSatError: 流水线中的任何错误都会中止基准，出错的文件会被记录在日志中

    用法:
        ```python
        report = bench_inference(['a.rvsc', 'b.rvsc', 'c.rvsc'], model, 64)
        assert len(report.batches) == 12
        ```
    """
    if not scenes:
        raise EmptyInputError('inference benchmark needs at least one scene')
    if history_window < 1:
        raise ValueError(f'history_window must be at least 1, got {history_window}')
    if backend is None:
        backend = BackendManager.get_backend('reference')

    report = TimingReport(backend.name, batch_size)
    history: List[LatentGrid] = []
    for path in scenes:
        fid = file_id(path)
        try:
            with timed() as sw:
                scene = load_scene(path, max_abs=max_abs)
            report.phases.append(PhaseTiming(fid, 'load', sw.elapsed))

            with timed() as sw:
                grid = tile_scene(normalize(scene, divisor), tile_size)
            report.phases.append(PhaseTiming(fid, 'tile', sw.elapsed))

            with timed() as sw:
                latents, timings = encode_grid(grid, model, batch_size,
                                               backend=backend, workers=workers,
                                               logvar_clamp=logvar_clamp,
                                               batch_hook=batch_hook)
            report.phases.append(PhaseTiming(fid, 'encode', sw.elapsed))
            report.batches.extend(BatchRecord(fid, t.batch_index, t.tile_count,
                                              t.duration_s) for t in timings)

            with timed() as sw:
                if history:
                    change_map(history, latents, metric)
            report.phases.append(PhaseTiming(fid, 'compare', sw.elapsed))
        except Exception:
            logger.error(f'Benchmark aborted at file {fid}')
            raise
        history.append(latents)
        del history[:-history_window]
        if on_grid is not None:
            on_grid(fid, latents)
        logger.info(f'{fid}: {len(grid)} tiles, ' + ', '.join(
            f'{p.phase} {p.duration_s:.4f}s' for p in report.phases[-4:]))
    return report


def bench_training(data: LabeledLatentSet, batch_sizes: Sequence[int],
                   epochs: int, seed: int,
                   *,
                   lr: float = 0.1,
                   eval_data: Optional[LabeledLatentSet] = None,
                   threshold: float = 0.5) -> List[TrainingSweepRow]:
    """
    对每个批次大小从零初始化训练分类器并计时，所有批次大小使用同一个种子。

    参数:
        data: 训练集
        batch_sizes: 批次大小列表
        epochs: 每个批次大小训练的轮数，至少为 1
        seed: 随机种子
        lr: 学习率
        eval_data: 评估集，默认在训练集上评估
        threshold: 评估阈值

    返回:
        List[TrainingSweepRow]: 每个批次大小一行

    异常:
        EmptyInputError: 训练集或批次大小列表为空
    """
    if not batch_sizes:
        raise EmptyInputError('training benchmark needs at least one batch size')
    if len(data) == 0:
        raise EmptyInputError('cannot benchmark training on an empty dataset')
    if epochs < 1:
        raise ValueError(f'training benchmark needs at least one epoch, got {epochs}')
    target = eval_data if eval_data is not None else data
    rows: List[TrainingSweepRow] = []
    for bs in batch_sizes:
        clf, timings = train(Classifier.zeros(data.dim), data, epochs, bs, lr, seed)
        durations = tuple(t.duration_s for t in timings)
        row = TrainingSweepRow(bs, epochs, statistics.fmean(durations),
                               statistics.pstdev(durations),
                               evaluate(clf, target, threshold), durations)
        logger.info(f'Batch size {bs}: {row.mean_epoch_s:.6f}s per epoch, '
                    f'F1 {row.metrics.f1:.3f}, AUPRC {row.metrics.auprc:.3f}')
        rows.append(row)
    return rows


def _write_csv(path: PathLike_T, header: Sequence[str],
               rows: Iterable[Sequence[Any]]) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def batches_path(path: PathLike_T) -> str:
    """CSV 报告的批次记录文件路径: `report.csv` -> `report.batches.csv`。"""
    stem, _ = os.path.splitext(os.fspath(path))
    return stem + '.batches.csv'


def export_report(report: TimingReport, format: str,
                  path: PathLike_T) -> List[str]:
    """
    导出推理基准报告。

    参数:
        report: 报告
        format: `csv` 或 `json`
        path: 目标路径

    返回:
        List[str]: 写入的文件。`csv` 格式写入两个文件: `path`（表头 `file_id,phase,duration_s`）与 `batches_path(path)`（表头 `file_id,batch_index,tile_count,duration_s`）

    异常:
        ValueError: 未知格式
        OSError: 写入失败
    """
    path = os.fspath(path)
    if format == 'csv':
        _write_csv(path, PHASE_FIELDS,
                   ((p.file_id, p.phase, repr(p.duration_s)) for p in report.phases))
        bpath = batches_path(path)
        _write_csv(bpath, BATCH_FIELDS,
                   ((b.file_id, b.batch_index, b.tile_count, repr(b.duration_s))
                    for b in report.batches))
        written = [path, bpath]
    elif format == 'json':
        with open(path, 'w') as f:
            json.dump(report.to_dict(), f, indent=2)
        written = [path]
    else:
        raise ValueError(f'unknown report format {format!r}')
    logger.info(f'Wrote report to {", ".join(written)}')
    return written


def report_from_json(path: PathLike_T) -> TimingReport:
    """
    读取 `export_report(..., 'json', ...)` 写出的报告，结果与导出前的报告相等。
    """
    with open(path) as f:
        doc = json.load(f)
    return TimingReport(doc['backend'], int(doc['batch_size']),
                        [PhaseTiming(**p) for p in doc['phases']],
                        [BatchRecord(**b) for b in doc['batches']])


def export_training_sweep(rows: Sequence[TrainingSweepRow], format: str,
                          path: PathLike_T) -> None:
    """
    导出训练基准表，每个批次大小一行，列为 `batch_size,epochs,mean_epoch_s,std_epoch_s,precision,recall,f1,auprc,accuracy`。
    """
    def flat(row: TrainingSweepRow) -> Dict[str, Any]:
        m = row.metrics
        return {'batch_size': row.batch_size, 'epochs': row.epochs,
                'mean_epoch_s': row.mean_epoch_s, 'std_epoch_s': row.std_epoch_s,
                'precision': m.precision, 'recall': m.recall, 'f1': m.f1,
                'auprc': m.auprc, 'accuracy': m.accuracy}

    if format == 'csv':
        _write_csv(path, SWEEP_FIELDS,
                   ([repr(v) if isinstance(v, float) else v
                     for v in flat(r).values()] for r in rows))
    elif format == 'json':
        doc = [dict(flat(r), epoch_durations=list(r.epoch_durations),
                    confusion={'tp': r.metrics.tp, 'fp': r.metrics.fp,
                               'tn': r.metrics.tn, 'fn': r.metrics.fn})
               for r in rows]
        with open(path, 'w') as f:
            json.dump(doc, f, indent=2)
    else:
        raise ValueError(f'unknown report format {format!r}')
    logger.info(f'Wrote training sweep to {os.fspath(path)}')


__all__ = [
    'PHASES',
    'PhaseTiming',
    'BatchRecord',
    'Stats',
    'summarize',
    'TimingReport',
    'TrainingSweepRow',
    'bench_inference',
    'bench_training',
    'batches_path',
    'export_report',
    'report_from_json',
    'export_training_sweep',
]
