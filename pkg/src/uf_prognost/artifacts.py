"""On-disk formats for cycles, exemplar libraries and evaluation reports.

Cycles artifact
    UTF-8 JSON, keys sorted, ``{"format": "uf-prognost/cycles", "version": 1,
    "config": {...}, "config_digest": "...", "source_id": ..., "counts": {...},
    "runs": [...]}``. Each run carries its reasons, labels and one object per
    cycle holding the raw features and the normalised values.

Library file (little-endian throughout)
    ======  ==========================  =====================================
    offset  size                        content
    ======  ==========================  =====================================
    0       8                           magic ``b"UFPLIB01"``
    8       4                           uint32 header length ``H``
    12      H                           UTF-8 JSON header (sorted keys)
    12+H    8 * m * w                   float64 exemplar matrix, row-major
    ...     8 * m                       int64 RUL per exemplar
    ...     8 * m                       int64 source run id per exemplar
    ...     8 * m                       int64 cycle index within that run
    ======  ==========================  =====================================

    The header holds ``n_exemplars`` (m), ``width`` (w = 6 * window_length),
    ``window_length``, both partitions and ``metadata`` (config, config digest,
    source runs, build time). The text export writes one exemplar per line:
    ``run_id<TAB>cycle_index<TAB>rul<TAB>v0 ... v{w-1}``.
"""

from __future__ import annotations

import json
import os
import struct
import time
from pathlib import Path
from typing import Any

import numpy as np

from .config import DataError, PipelineConfig, canonical_json
from .evaluation import EvalReport
from .features import CycleFeatures, NormalizedCycle
from .fuzzy import FuzzyPartition
from .prognosis import ExemplarLibrary
from .segmentation import Run

CYCLES_FORMAT = "uf-prognost/cycles"
LIBRARY_MAGIC = b"UFPLIB01"
LIBRARY_VERSION = 1


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def run_to_dict(run: Run) -> dict:
    cycles = []
    for f, c in zip(run.features, run.cycles):
        d = {k: getattr(f, k) for k in CycleFeatures.__dataclass_fields__}
        d.update({k: getattr(c, k) for k in NormalizedCycle.__dataclass_fields__ if k != "cycle_index"})
        cycles.append(d)
    return {
        "run_id": run.run_id,
        "start_reason": run.start_reason,
        "end_reason": run.end_reason,
        "reached_failure": run.reached_failure,
        "rul_labels": None if run.rul_labels is None else list(run.rul_labels),
        "truncated": run.truncated,
        "cycles": cycles,
    }


def run_from_dict(d: dict) -> Run:
    feats, norm = [], []
    for c in d["cycles"]:
        feats.append(CycleFeatures(**{k: c[k] for k in CycleFeatures.__dataclass_fields__}))
        norm.append(NormalizedCycle(**{k: c[k] for k in NormalizedCycle.__dataclass_fields__}))
    labels = d.get("rul_labels")
    return Run(
        run_id=d["run_id"],
        cycles=tuple(norm),
        features=tuple(feats),
        start_reason=d["start_reason"],
        end_reason=d["end_reason"],
        reached_failure=d["reached_failure"],
        rul_labels=None if labels is None else tuple(labels),
        truncated=d.get("truncated", 0),
    )


def write_cycles(path, runs, config: PipelineConfig, source_id: str = "", counts: dict | None = None) -> None:
    doc = {
        "format": CYCLES_FORMAT,
        "version": 1,
        "config": config.to_dict(),
        "config_digest": config.digest(),
        "source_id": source_id,
        "counts": {k: int(v) for k, v in sorted((counts or {}).items())},
        "runs": [run_to_dict(r) for r in runs],
    }
    Path(path).write_text(_dump(doc), encoding="utf-8")


def read_cycles(path) -> tuple[list[Run], PipelineConfig, dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: cannot read cycles artifact: {exc}") from None
    if doc.get("format") != CYCLES_FORMAT:
        raise DataError(f"{path}: not a cycles artifact")
    config = PipelineConfig.from_dict(doc["config"])
    if config.digest() != doc["config_digest"]:
        raise DataError(f"{path}: embedded config does not match its digest")
    return [run_from_dict(r) for r in doc["runs"]], config, doc


def save_library(path, library: ExemplarLibrary) -> None:
    m, w = library.values.shape
    meta = dict(library.metadata)
    if "build_time" not in meta:
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        meta["build_time"] = int(epoch) if epoch else int(time.time())
    header = canonical_json({
        "format_version": LIBRARY_VERSION,
        "n_exemplars": m,
        "width": w,
        "window_length": library.window_length,
        "hi_partition": library.hi_partition.to_dict(),
        "dhi_partition": library.dhi_partition.to_dict(),
        "metadata": meta,
    }).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(LIBRARY_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(np.ascontiguousarray(library.values, dtype="<f8").tobytes())
        for arr in (library.rul, library.run_ids, library.cycle_indices):
            fh.write(np.ascontiguousarray(arr, dtype="<i8").tobytes())


def load_library(path) -> ExemplarLibrary:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read library {path}: {exc}") from None
    if data[:8] != LIBRARY_MAGIC:
        raise DataError(f"{path}: not an exemplar library (bad magic)")
    (hlen,) = struct.unpack_from("<I", data, 8)
    header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    if header["format_version"] != LIBRARY_VERSION:
        raise DataError(f"{path}: unsupported library version {header['format_version']}")
    m, w = header["n_exemplars"], header["width"]
    off = 12 + hlen
    expected = off + 8 * m * w + 3 * 8 * m
    if len(data) != expected:
        raise DataError(f"{path}: truncated or oversized library ({len(data)} bytes, expected {expected})")
    values = np.frombuffer(data, dtype="<f8", count=m * w, offset=off).reshape(m, w).astype(float)
    off += 8 * m * w
    ints = []
    for _ in range(3):
        ints.append(np.frombuffer(data, dtype="<i8", count=m, offset=off).astype(np.int64))
        off += 8 * m
    return ExemplarLibrary(
        values=values,
        rul=ints[0],
        run_ids=ints[1],
        cycle_indices=ints[2],
        hi_partition=FuzzyPartition.from_dict(header["hi_partition"]),
        dhi_partition=FuzzyPartition.from_dict(header["dhi_partition"]),
        window_length=header["window_length"],
        metadata=header["metadata"],
    )


def export_library_text(path, library: ExemplarLibrary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(len(library)):
            vals = "\t".join(repr(float(v)) for v in library.values[i])
            fh.write(f"{library.run_ids[i]}\t{library.cycle_indices[i]}\t{library.rul[i]}\t{vals}\n")


def write_report(out_dir, report: EvalReport) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / "report.json", "table": out / "report.txt", "records": out / "records.csv"}
    paths["json"].write_text(_dump(report.to_dict()), encoding="utf-8")
    paths["table"].write_text(report.table(), encoding="utf-8")
    paths["records"].write_text(report.records_csv(), encoding="utf-8")
    return paths
