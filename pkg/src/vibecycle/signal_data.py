"""Loading, validation, segmentation, and reassembly of vibration records.

A record is a full-length acceleration time series tied to one structural
joint, one domain (undamaged or damaged), and one provenance (real or
generated). Records are cut into contiguous 1024-sample segments, which are
the unit of training, and reassembled bit-exactly after translation.

File layout: raw samples live in a flat ``.f64`` file (64-bit little-endian
reals) or a ``.txt`` file (one value per line); a ``.meta`` JSON sidecar
carries joint id, domain, provenance, sample rate, and sample count. Samples
are never rescaled or normalized on the way in or out.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DataError

SEGMENT_LENGTH = 1024
CANONICAL_SAMPLE_RATE_HZ = 1024.0


class DomainLabel(IntEnum):
    """Structural condition of a record; serialized as 0/1."""

    UNDAMAGED = 0
    DAMAGED = 1


class Provenance(Enum):
    """Whether a record was measured (real) or produced by a generator (fake)."""

    REAL = "real"
    FAKE = "fake"


@dataclass(frozen=True)
class RecordKey:
    """Identity shared by a record and all segments cut from it."""

    joint_id: int
    domain: DomainLabel
    provenance: Provenance


def _as_readonly_f64(samples) -> np.ndarray:
    arr = np.array(samples, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class VibrationRecord:
    """A full-length acceleration series with its identity and sample rate.

    Immutable after construction; ``samples`` is a read-only float64 array.
    """

    joint_id: int
    domain: DomainLabel
    provenance: Provenance
    sample_rate_hz: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        if int(self.joint_id) <= 0:
            raise DataError(f"joint_id must be positive, got {self.joint_id}")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise DataError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", _as_readonly_f64(self.samples))
        n = self.samples.size
        if n == 0:
            raise DataError("empty record")
        if not np.all(np.isfinite(self.samples)):
            raise DataError("record contains non-finite samples")
        block = int(round(self.sample_rate_hz))
        if block <= 0 or n % block != 0:
            raise DataError(
                f"record length {n} is not a positive multiple of segment size {block}"
            )

    @property
    def key(self) -> RecordKey:
        return RecordKey(self.joint_id, self.domain, self.provenance)

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def __eq__(self, other) -> bool:
        if not isinstance(other, VibrationRecord):
            return NotImplemented
        return (
            self.key == other.key
            and self.sample_rate_hz == other.sample_rate_hz
            and self.samples.dtype == other.samples.dtype
            and np.array_equal(self.samples, other.samples)
        )


@dataclass(frozen=True, eq=False)
class Segment:
    """One contiguous 1024-sample slice of a record, 1-based index within it."""

    parent: RecordKey
    index_n: int
    samples: np.ndarray
    sample_rate_hz: float = CANONICAL_SAMPLE_RATE_HZ

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _as_readonly_f64(self.samples))
        if self.samples.size != SEGMENT_LENGTH:
            raise DataError(
                f"segment must hold exactly {SEGMENT_LENGTH} samples, got {self.samples.size}"
            )
        if self.index_n < 1:
            raise DataError(f"segment index must be >= 1, got {self.index_n}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Segment):
            return NotImplemented
        return (
            self.parent == other.parent
            and self.index_n == other.index_n
            and self.sample_rate_hz == other.sample_rate_hz
            and np.array_equal(self.samples, other.samples)
        )


class SummaryStats(NamedTuple):
    mean: float
    variance: float
    std: float


def load_record(
    path: str | Path,
    joint_id: int,
    domain: DomainLabel,
    provenance: Provenance,
    sample_rate_hz: float = CANONICAL_SAMPLE_RATE_HZ,
) -> VibrationRecord:
    """Read a flat sequence of 64-bit reals into a validated record.

    ``.f64`` files are parsed as little-endian binary; anything else is
    treated as one-value-per-line text. Values are taken verbatim, with no
    scaling applied.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset not found: {path}")
    if path.suffix == ".f64":
        raw = np.fromfile(path, dtype="<f8")
    else:
        text = path.read_text()
        try:
            raw = np.array(
                [float(line) for line in text.split() if line.strip()], dtype=np.float64
            )
        except ValueError as exc:
            raise DataError(f"unparseable value in {path}: {exc}") from exc
    if raw.size == 0:
        raise DataError(f"empty record: {path}")
    if not np.all(np.isfinite(raw)):
        raise DataError(f"non-finite values in {path}")
    block = int(round(sample_rate_hz))
    if block <= 0 or raw.size % block != 0:
        raise DataError(
            f"{path}: length {raw.size} not multiple of segment size {block}"
        )
    return VibrationRecord(joint_id, domain, provenance, sample_rate_hz, raw)


def meta_path_for(path: str | Path) -> Path:
    return Path(path).with_suffix(".meta")


def write_record(record: VibrationRecord, path: str | Path, extras: dict | None = None) -> Path:
    """Write samples (binary ``.f64`` or ``.txt`` by extension) plus the ``.meta`` sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".txt":
        path.write_text("".join(f"{float(v)!r}\n" for v in record.samples))
    else:
        record.samples.astype("<f8").tofile(path)
    meta = {
        "joint_id": record.joint_id,
        "domain": int(record.domain),
        "provenance": record.provenance.value,
        "sample_rate_hz": record.sample_rate_hz,
        "n_samples": record.n_samples,
    }
    if extras:
        meta["extras"] = extras
    meta_path_for(path).write_text(json.dumps(meta, indent=2) + "\n")
    return path


def read_meta(path: str | Path) -> dict:
    meta_path = meta_path_for(path)
    if not meta_path.is_file():
        raise DataError(f"metadata sidecar not found: {meta_path}")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid metadata sidecar {meta_path}: {exc}") from exc
    for key in ("joint_id", "domain", "provenance", "sample_rate_hz", "n_samples"):
        if key not in meta:
            raise DataError(f"metadata sidecar {meta_path} missing field {key!r}")
    return meta


def load_record_with_meta(path: str | Path) -> VibrationRecord:
    """Load a record whose identity comes from its ``.meta`` sidecar."""
    meta = read_meta(path)
    record = load_record(
        path,
        joint_id=int(meta["joint_id"]),
        domain=DomainLabel(int(meta["domain"])),
        provenance=Provenance(meta["provenance"]),
        sample_rate_hz=float(meta["sample_rate_hz"]),
    )
    if record.n_samples != int(meta["n_samples"]):
        raise DataError(
            f"{path}: file holds {record.n_samples} samples, sidecar says {meta['n_samples']}"
        )
    return record


def segment(record: VibrationRecord) -> list[Segment]:
    """Cut a record into contiguous, non-overlapping 1024-sample segments.

    Segments keep the original order and are indexed 1..N; their
    concatenation reproduces the record exactly.
    """
    n = record.n_samples
    if n % SEGMENT_LENGTH != 0:
        raise DataError(
            f"record length {n} not multiple of segment size {SEGMENT_LENGTH}"
        )
    key = record.key
    return [
        Segment(
            parent=key,
            index_n=i + 1,
            samples=record.samples[i * SEGMENT_LENGTH : (i + 1) * SEGMENT_LENGTH],
            sample_rate_hz=record.sample_rate_hz,
        )
        for i in range(n // SEGMENT_LENGTH)
    ]


def segment_matrix(record: VibrationRecord) -> np.ndarray:
    """Record samples as an (n_segments, 1024) float64 view for batch math."""
    n = record.n_samples
    if n % SEGMENT_LENGTH != 0:
        raise DataError(
            f"record length {n} not multiple of segment size {SEGMENT_LENGTH}"
        )
    return record.samples.reshape(-1, SEGMENT_LENGTH)


def reassemble(segments: list[Segment]) -> VibrationRecord:
    """Concatenate a complete, gapless 1..N segment sequence back into a record.

    Inverse of :func:`segment`: ``reassemble(segment(r)) == r`` bit-exactly.
    """
    if not segments:
        raise DataError("cannot reassemble an empty segment list")
    key = segments[0].parent
    rate = segments[0].sample_rate_hz
    for seg in segments:
        if seg.parent != key:
            raise DataError(
                f"mismatched parent identities: {seg.parent} vs {key}"
            )
        if seg.sample_rate_hz != rate:
            raise DataError("mismatched sample rates across segments")
    by_index = {}
    for seg in segments:
        if seg.index_n in by_index:
            raise DataError(f"duplicate index {seg.index_n}")
        by_index[seg.index_n] = seg
    n = len(segments)
    for i in range(1, n + 1):
        if i not in by_index:
            raise DataError(f"missing index {i}")
    samples = np.concatenate([by_index[i].samples for i in range(1, n + 1)])
    return VibrationRecord(key.joint_id, key.domain, key.provenance, rate, samples)


def summary_stats(record: VibrationRecord) -> SummaryStats:
    """Population mean, variance, and standard deviation over all samples."""
    mean = float(np.mean(record.samples))
    variance = float(np.var(record.samples))
    return SummaryStats(mean=mean, variance=variance, std=math.sqrt(variance))
