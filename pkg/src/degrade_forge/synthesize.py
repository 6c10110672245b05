"""Reproducible LR-HR dataset synthesis with a line-delimited JSON manifest.

Every (image, level, repeat) record gets a seed derived from the base seed
and its global index, so re-running an invocation reproduces byte-identical
LR images and manifest, and records could be synthesized in parallel.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import image_io
from .errors import DegradeForgeError
from .pipeline import run_pipeline
from .space import DEFAULT_SCHEMA, DegradationSchema, Level, encode, sample_params

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}
MANIFEST_NAME = "manifest.jsonl"


@dataclass
class ManifestRecord:
    hr_path: str
    lr_path: str
    level: str
    seed: int
    v: list[float]

    def to_json(self) -> str:
        return json.dumps({"hr_path": self.hr_path, "lr_path": self.lr_path,
                           "level": self.level, "seed": self.seed, "v": self.v})


@dataclass
class SynthesisResult:
    records: list[ManifestRecord]
    skipped: list[str]
    manifest_path: str

    @property
    def per_level_counts(self) -> dict[str, int]:
        counts = {lv.value: 0 for lv in Level}
        for r in self.records:
            counts[r.level] += 1
        return counts


def list_hr_images(hr_dir) -> list[Path]:
    root = Path(hr_dir)
    if not root.is_dir():
        raise DegradeForgeError(f"HR directory not found: {root}")
    images = sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not images:
        raise DegradeForgeError(f"no images in {root}")
    return images


def synthesize_dataset(
    hr_dir,
    out_dir,
    per_level_count: int = 1,
    base_seed: int = 0,
    schema: DegradationSchema = DEFAULT_SCHEMA,
) -> SynthesisResult:
    """Degrade every HR image ``per_level_count`` times per level.

    Unreadable or too-small images are skipped with a warning; the caller
    surfaces a nonzero exit when anything was skipped.
    """
    images = list_hr_images(hr_dir)
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)

    records: list[ManifestRecord] = []
    skipped: list[str] = []
    index = 0
    for img_path in images:
        try:
            hr = image_io.read_png(img_path)
        except Exception as exc:  # noqa: BLE001 - any decode failure is a skip
            log.warning("skipping unreadable image %s: %s", img_path, exc)
            skipped.append(str(img_path))
            index += per_level_count * len(Level)
            continue
        for level in Level:
            for k in range(per_level_count):
                seed = base_seed + index
                index += 1
                rng = np.random.default_rng(seed)
                params = sample_params(level, rng, schema)
                try:
                    lr, _ = run_pipeline(hr, params)
                except DegradeForgeError as exc:
                    log.warning("skipping %s at %s: %s", img_path, level.value, exc)
                    skipped.append(f"{img_path}[{level.value}#{k}]")
                    continue
                lr_name = f"{img_path.stem}_{level.value}_{k}.png"
                image_io.write_png(out_root / lr_name, lr)
                records.append(ManifestRecord(
                    hr_path=str(img_path),
                    lr_path=lr_name,
                    level=level.value,
                    seed=seed,
                    v=[float(x) for x in encode(params, schema)],
                ))

    manifest_path = out_root / MANIFEST_NAME
    with open(manifest_path, "w") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")
    return SynthesisResult(records=records, skipped=skipped, manifest_path=str(manifest_path))


def load_manifest(path) -> list[ManifestRecord]:
    records = []
    with open(path) as fh:
        for line in fh:
            doc = json.loads(line)
            records.append(ManifestRecord(**doc))
    return records
