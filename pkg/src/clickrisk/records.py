"""Instance data model, line-delimited record IO, and calibration/test splits.

One record per line, JSON-encoded::

    {"id": str, "image": {"w": int, "h": int}, "instruction": str?,
     "gt_box": [x_min, y_min, x_max, y_max], "samples": [[x, y], ...],
     "mlg": [x, y]?, "expert": [x, y]?, "pc": float?, "uq": {...}?}

Coordinates are pixels, origin at the top-left corner, x rightward and
y downward. `uq` is absent in raw files and appended by the scoring stage.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Iterator

import numpy as np

Point = tuple[float, float]
Box = tuple[float, float, float, float]

UQ_KEYS = ("ta", "ie", "cd", "com")


class RecordError(ValueError):
    """A record failed parsing or invariant validation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SplitError(ValueError):
    """The dataset cannot be partitioned as requested."""


def _as_point(value, name: str) -> Point:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
    ):
        raise RecordError(f"{name}: expected a [x, y] pair of numbers, got {value!r}")
    x, y = float(value[0]), float(value[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise RecordError(f"{name}: coordinates must be finite, got {value!r}")
    return (x, y)


@dataclass(frozen=True)
class GroundingRecord:
    """One grounding instance: ground truth, sampled outputs, optional extras.

    `samples` holds the stochastic coordinate samples in generation order.
    `mlg` is the prediction the system acts on; when absent it is drawn
    from `samples` (see `select_mlg`). `expert` is the stronger model's
    recorded prediction and `pc` a precomputed confidence-baseline score.
    """

    id: str
    image_width: int
    image_height: int
    gt_box: Box
    samples: tuple[Point, ...]
    instruction: str | None = None
    mlg: Point | None = None
    expert: Point | None = None
    pc: float | None = None
    uq: dict[str, float] | None = field(default=None)

    def validate(self) -> None:
        if not self.id:
            raise RecordError("id: must be a non-empty string")
        if self.image_width <= 0 or self.image_height <= 0:
            raise RecordError(f"image: dimensions must be positive, got {self.image_width}x{self.image_height}")
        x_min, y_min, x_max, y_max = self.gt_box
        if not all(math.isfinite(v) for v in self.gt_box):
            raise RecordError(f"gt_box: coordinates must be finite, got {self.gt_box}")
        if not (x_min < x_max and y_min < y_max):
            raise RecordError(f"gt_box: requires x_min < x_max and y_min < y_max, got {self.gt_box}")
        if x_min < 0 or y_min < 0 or x_max > self.image_width or y_max > self.image_height:
            raise RecordError(
                f"gt_box: {self.gt_box} exceeds image bounds {self.image_width}x{self.image_height}"
            )
        if len(self.samples) == 0:
            raise RecordError("samples: must contain at least one coordinate pair")
        for i, (x, y) in enumerate(self.samples):
            if not (math.isfinite(x) and math.isfinite(y)):
                raise RecordError(f"samples[{i}]: coordinates must be finite")
        if self.pc is not None and not 0.0 <= self.pc <= 1.0:
            raise RecordError(f"pc: must lie in [0, 1], got {self.pc}")


def record_from_obj(obj: dict) -> GroundingRecord:
    """Build and validate a record from one decoded JSON object."""
    if not isinstance(obj, dict):
        raise RecordError(f"expected a JSON object, got {type(obj).__name__}")
    try:
        rec_id = obj["id"]
        image = obj["image"]
        gt_box = obj["gt_box"]
        samples = obj["samples"]
    except KeyError as exc:
        raise RecordError(f"missing required field {exc.args[0]!r}") from None
    if not isinstance(rec_id, str):
        raise RecordError(f"id: expected a string, got {rec_id!r}")
    if (
        not isinstance(image, dict)
        or not {"w", "h"} <= set(image)
        or not all(isinstance(image[k], int) and not isinstance(image[k], bool) for k in ("w", "h"))
    ):
        raise RecordError('image: expected an object with integer fields "w" and "h"')
    instruction = obj.get("instruction")
    if instruction is not None and not isinstance(instruction, str):
        raise RecordError(f"instruction: expected a string, got {instruction!r}")
    if (
        not isinstance(gt_box, (list, tuple))
        or len(gt_box) != 4
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in gt_box)
    ):
        raise RecordError(f"gt_box: expected [x_min, y_min, x_max, y_max], got {gt_box!r}")
    if not isinstance(samples, list) or len(samples) == 0:
        raise RecordError("samples: must be a non-empty list of [x, y] pairs")
    pc = obj.get("pc")
    if pc is not None and (not isinstance(pc, (int, float)) or isinstance(pc, bool)):
        raise RecordError(f"pc: expected a real in [0, 1], got {pc!r}")
    uq = obj.get("uq")
    if uq is not None:
        if not isinstance(uq, dict) or not set(UQ_KEYS) <= set(uq):
            raise RecordError(f"uq: expected an object with fields {UQ_KEYS}")
        uq = {k: float(uq[k]) for k in UQ_KEYS}
    record = GroundingRecord(
        id=rec_id,
        image_width=int(image["w"]),
        image_height=int(image["h"]),
        gt_box=tuple(float(v) for v in gt_box),
        samples=tuple(_as_point(s, f"samples[{i}]") for i, s in enumerate(samples)),
        instruction=instruction,
        mlg=_as_point(obj["mlg"], "mlg") if obj.get("mlg") is not None else None,
        expert=_as_point(obj["expert"], "expert") if obj.get("expert") is not None else None,
        pc=float(pc) if pc is not None else None,
        uq=uq,
    )
    record.validate()
    return record


def record_to_obj(record: GroundingRecord) -> dict:
    obj: dict = {
        "id": record.id,
        "image": {"w": record.image_width, "h": record.image_height},
    }
    if record.instruction is not None:
        obj["instruction"] = record.instruction
    obj["gt_box"] = list(record.gt_box)
    obj["samples"] = [list(s) for s in record.samples]
    if record.mlg is not None:
        obj["mlg"] = list(record.mlg)
    if record.expert is not None:
        obj["expert"] = list(record.expert)
    if record.pc is not None:
        obj["pc"] = record.pc
    if record.uq is not None:
        obj["uq"] = {k: record.uq[k] for k in UQ_KEYS}
    return obj


def parse_records(stream: IO | Iterable[str | bytes]) -> list[GroundingRecord]:
    """Parse line-delimited records, preserving input order.

    Raises `RecordError` with the offending line number on malformed JSON,
    duplicate ids, or invariant violations. Blank lines are ignored.
    """
    records: list[GroundingRecord] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(f"invalid JSON: {exc.msg}", line=lineno) from None
        try:
            record = record_from_obj(obj)
        except RecordError as exc:
            raise RecordError(str(exc), line=lineno) from None
        if record.id in seen:
            raise RecordError(f"duplicate id {record.id!r}", line=lineno)
        seen.add(record.id)
        records.append(record)
    return records


def serialize_records(records: Iterable[GroundingRecord]) -> Iterator[str]:
    """Yield one JSON line per record (no trailing newline)."""
    for record in records:
        yield json.dumps(record_to_obj(record), separators=(",", ":"))


def load_records(path) -> list[GroundingRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_records(fh)


def save_records(path, records: Iterable[GroundingRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in serialize_records(records):
            fh.write(line)
            fh.write("\n")


def select_mlg(record: GroundingRecord, seed: int = 0) -> Point:
    """The prediction the system acts on.

    Returns the explicit `mlg` field when present; otherwise picks one of
    the samples uniformly with a generator derived from (seed, record.id),
    so the choice is reproducible without being stored.
    """
    if record.mlg is not None:
        return record.mlg
    digest = hashlib.sha256(f"{seed}:{record.id}".encode("utf-8")).digest()
    index = int.from_bytes(digest[:8], "big") % len(record.samples)
    return record.samples[index]


def with_mlg(record: GroundingRecord, seed: int = 0) -> GroundingRecord:
    """Copy of `record` with the acted-on prediction materialized."""
    if record.mlg is not None:
        return record
    return replace(record, mlg=select_mlg(record, seed))


@dataclass(frozen=True)
class SplitPlan:
    """Reproducible calibration/test partitioning scheme."""

    calibration_ratio: float
    seed: int = 0
    repetitions: int = 1

    def validate(self) -> None:
        if not 0.0 < self.calibration_ratio < 1.0:
            raise SplitError(f"calibration_ratio must lie in (0, 1), got {self.calibration_ratio}")
        if self.repetitions < 1:
            raise SplitError(f"repetitions must be positive, got {self.repetitions}")


def split(
    records: list[GroundingRecord], plan: SplitPlan, repetition_index: int = 0
) -> tuple[list[GroundingRecord], list[GroundingRecord]]:
    """Disjoint (calibration, test) partition covering all records.

    The calibration size is round(ratio * N) (half up), clamped so both
    sides are non-empty. Deterministic in (plan.seed, repetition_index);
    each side keeps the records' original file order.
    """
    plan.validate()
    if not 0 <= repetition_index < plan.repetitions:
        raise SplitError(
            f"repetition_index {repetition_index} outside [0, {plan.repetitions})"
        )
    n = len(records)
    if n < 2:
        raise SplitError(f"need at least 2 records to split, got {n}")
    n_cal = int(math.floor(plan.calibration_ratio * n + 0.5))
    n_cal = min(max(n_cal, 1), n - 1)
    rng = np.random.default_rng([plan.seed % (2**63), repetition_index])
    perm = rng.permutation(n)
    cal_idx = sorted(int(i) for i in perm[:n_cal])
    test_idx = sorted(int(i) for i in perm[n_cal:])
    return [records[i] for i in cal_idx], [records[i] for i in test_idx]
