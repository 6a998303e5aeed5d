from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from application.bifidelity.offline import BifidStore
from constants import FORMAT_VERSION
from store.data import read_json, write_json
from utils.exceptions import ConfigurationError, StoreMismatchError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
ARRAY_NAMES = ("points", "low_snapshots", "high_snapshots", "gram", "gram_cholesky")


def save_store(directory: str | Path, store: BifidStore) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in ARRAY_NAMES:
        np.save(directory / f"{name}.npy", np.asarray(getattr(store, name)), allow_pickle=False)
    write_json(directory / MANIFEST_NAME, store.manifest)
    logger.info(f"[save_store] store with {store.size} snapshot pairs written to {directory}")
    return directory


def load_store(directory: str | Path, mmap: bool = False) -> BifidStore:
    directory = Path(directory)
    if not (directory / MANIFEST_NAME).exists():
        raise ConfigurationError(f"No bi-fidelity store in {directory}")
    manifest = read_json(directory / MANIFEST_NAME)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise StoreMismatchError(
            f"Store {directory} has format version {manifest.get('format_version')}, expected {FORMAT_VERSION}"
        )
    arrays = {
        name: np.load(directory / f"{name}.npy", allow_pickle=False, mmap_mode="r" if mmap else None)
        for name in ARRAY_NAMES
    }
    return BifidStore(manifest=manifest, rejected=list(manifest.get("rejected", [])), **arrays)


def manifest_diff(expected: dict, actual: dict, prefix: str = "") -> list[str]:
    """Differences between two manifests as 'key: expected != actual' lines."""
    lines = []
    for key in sorted(set(expected) | set(actual)):
        name = f"{prefix}{key}"
        if key not in actual:
            lines.append(f"{name}: {expected[key]!r} missing in store")
        elif key not in expected:
            continue
        elif isinstance(expected[key], dict) and isinstance(actual[key], dict):
            lines.extend(manifest_diff(expected[key], actual[key], prefix=f"{name}/"))
        elif expected[key] != actual[key]:
            lines.append(f"{name}: run {expected[key]!r} != store {actual[key]!r}")
    return lines


def check_store_matches(store: BifidStore, expected: dict) -> None:
    differences = manifest_diff(expected, store.manifest)
    if differences:
        raise StoreMismatchError("Store does not match the run configuration:\n  " + "\n  ".join(differences))
