import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from app.core.augment import compose, sample_and_apply
from app.core.errors import BenchError, DataError
from app.core.presets import AugmentConfig, AugmentKind
from app.core.raster import read_png, write_png
from app.core.textdata import FitMode, LineRecord, Manifest, preprocess_line
from utils.rng import RngStream

logger = logging.getLogger(__name__)

ConfigSpec = Union[AugmentConfig, List[AugmentConfig]]


@dataclass(frozen=True)
class RecordTask:
    record_id: str
    source: str
    target: str
    preset: str
    configs: tuple
    composite: bool
    seed: int
    prob: float
    epoch: int
    fit: FitMode
    luma: bool
    invert: bool


@dataclass
class RecordOutcome:
    record_id: str
    applied: bool = False
    coin: Optional[float] = None
    params: List[Dict[str, Any]] = field(default_factory=list)
    error: Optional[str] = None

    def trace_line(self, preset: str, seed: int, epoch: int) -> str:
        return json.dumps({
            "record_id": self.record_id,
            "preset": preset,
            "seed": seed,
            "epoch": epoch,
            "coin": self.coin,
            "applied": self.applied,
            "params": self.params,
        }, sort_keys=True, ensure_ascii=False)


def augment_record(task: RecordTask) -> RecordOutcome:
    """Augment (with probability prob), preprocess and write one line image"""
    outcome = RecordOutcome(task.record_id)
    try:
        rng = RngStream(task.seed).child("augment", task.record_id, task.epoch)
        img = read_png(task.source, luma=task.luma, invert_intensity=task.invert)
        if task.composite:
            # each member flips its own coin with probability prob
            img, trace = compose(task.configs, task.prob, img, rng)
            outcome.params = [p.to_dict() for p in trace]
            outcome.applied = bool(trace)
        elif task.configs[0].kind is not AugmentKind.NONE:
            outcome.coin = rng.random()
            if outcome.coin < task.prob:
                img, params = sample_and_apply(task.configs[0], img, rng)
                outcome.params = [params.to_dict()]
                outcome.applied = True
        line = preprocess_line(img, task.fit)
        write_png(line, task.target, text={
            "seed": str(task.seed),
            "preset": task.preset,
            "record_id": task.record_id,
            "epoch": str(task.epoch),
        })
    except BenchError as e:
        outcome.error = f"{type(e).__name__}: {e}"
    return outcome


class DataHandler:
    def __init__(self, workers: int = 1):
        """Initialize data handler"""
        if workers < 1:
            raise DataError(f"Worker count must be >= 1, got {workers}")
        self.workers = workers

    def build_tasks(self, manifest: Manifest, preset: str, configs: ConfigSpec, out_dir: Path,
                    seed: int, prob: float, epoch: int, fit: FitMode = FitMode.ERROR,
                    luma: bool = False, invert: bool = False) -> List[RecordTask]:
        seen = set()
        tasks = []
        composite = isinstance(configs, list)
        members = tuple(configs) if composite else (configs,)
        for record in manifest.records:
            if record.record_id in seen:
                raise DataError(f"Duplicate record id {record.record_id}; output images would collide")
            seen.add(record.record_id)
            tasks.append(RecordTask(
                record_id=record.record_id,
                source=str(manifest.resolve(record)),
                target=str(out_dir / "images" / f"{record.record_id}.png"),
                preset=preset, configs=members, composite=composite,
                seed=seed, prob=prob, epoch=epoch, fit=fit, luma=luma, invert=invert,
            ))
        return tasks

    def process_records(self, tasks: Sequence[RecordTask]) -> Dict[str, Any]:
        """Run the tasks and merge their outcomes in record id order"""
        try:
            if self.workers == 1 or len(tasks) < 2:
                outcomes = [augment_record(t) for t in tasks]
            else:
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    outcomes = list(pool.map(augment_record, tasks, chunksize=8))

            outcomes.sort(key=lambda o: o.record_id)
            results = {"processed": 0, "augmented": 0, "errors": 0, "outcomes": outcomes}
            for outcome in outcomes:
                if outcome.error:
                    logger.error(f"Error processing record {outcome.record_id}: {outcome.error}")
                    results["errors"] += 1
                    continue
                results["processed"] += 1
                results["augmented"] += int(outcome.applied)

            logger.info(f"Successfully processed {results['processed']} records "
                        f"({results['augmented']} augmented, {results['errors']} errors)")
            return results

        except Exception as e:
            logger.error(f"Error in process_records: {e}", exc_info=True)
            raise


def augmented_manifest(manifest: Manifest, outcomes: Sequence[RecordOutcome]) -> Manifest:
    """Manifest whose records point to the written images (failed records are left out)"""
    written = {o.record_id for o in outcomes if not o.error}
    records = [
        LineRecord(f"images/{r.record_id}.png", r.transliteration, r.fold, r.split)
        for r in sorted(manifest.records, key=lambda r: r.record_id)
        if r.record_id in written
    ]
    return Manifest(records=records, alphabet=manifest.alphabet)
