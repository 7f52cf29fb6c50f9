"""Parameter files: a JSON manifest of (name, shape, offset) plus a raw float64 payload.

``<stem>.manifest.json`` carries the entries and a free-form header;
``<stem>.bin`` holds every array back to back, little-endian.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..errors import ShapeMismatch

DTYPE = '<f8'


def manifest_path(stem: Path) -> Path:
    return stem.parent / f'{stem.name}.manifest.json'


def payload_path(stem: Path) -> Path:
    return stem.parent / f'{stem.name}.bin'


def save_arrays(stem: str | Path, arrays: Mapping[str, np.ndarray], header: dict[str, Any] | None = None) -> Path:
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    entries, offset, chunks = [], 0, []
    for name, array in arrays.items():
        flat = np.ascontiguousarray(array, dtype=DTYPE).reshape(-1)
        entries.append({'name': name, 'shape': list(np.shape(array)), 'offset': offset})
        offset += flat.size
        chunks.append(flat)
    payload = np.concatenate(chunks) if chunks else np.zeros(0, dtype=DTYPE)
    payload_path(stem).write_bytes(payload.astype(DTYPE).tobytes())
    manifest = {'header': header or {}, 'entries': entries, 'length': offset}
    manifest_path(stem).write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding='utf-8')
    return manifest_path(stem)


def load_arrays(stem: str | Path) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    stem = Path(stem)
    manifest = json.loads(manifest_path(stem).read_text(encoding='utf-8'))
    payload = np.frombuffer(payload_path(stem).read_bytes(), dtype=DTYPE)
    if payload.size != manifest['length']:
        raise ShapeMismatch(f'{stem}: payload holds {payload.size} values, manifest says {manifest["length"]}')
    arrays = {}
    for entry in manifest['entries']:
        size = int(np.prod(entry['shape'], dtype=np.int64))
        chunk = payload[entry['offset']:entry['offset'] + size]
        arrays[entry['name']] = chunk.reshape(entry['shape']).astype(np.float64)
    return arrays, manifest['header']
