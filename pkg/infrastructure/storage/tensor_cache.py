from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np

from constants import FORMAT_VERSION
from domain.gpc.galerkin import GalerkinTensor, default_quadrature_nodes, galerkin_tensor
from domain.gpc.multiindex import build_index_set
from domain.gpc.orthopoly import DistributionFamily, PolynomialBasis, parse_families
from store.data import read_json, write_json
from utils.exceptions import StoreMismatchError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
VALUES_NAME = "values.npy"


def tensor_manifest(tensor: GalerkinTensor) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "L": tensor.dimensions,
        "K": tensor.vol_degree,
        "N": tensor.solution_degree,
        "families": ",".join(family.label for family in tensor.families),
        "quadrature_nodes": tensor.quadrature_nodes,
        "shape": list(tensor.values.shape),
    }


def save_tensor(directory: str | Path, tensor: GalerkinTensor) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.save(directory / VALUES_NAME, tensor.values, allow_pickle=False)
    write_json(directory / MANIFEST_NAME, tensor_manifest(tensor))
    logger.info(f"[save_tensor] tensor {tensor.values.shape} cached in {directory}")
    return directory


def load_tensor(directory: str | Path) -> GalerkinTensor:
    directory = Path(directory)
    manifest = read_json(directory / MANIFEST_NAME)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise StoreMismatchError(
            f"Tensor cache {directory} has format version {manifest.get('format_version')}, "
            f"expected {FORMAT_VERSION}"
        )
    families = parse_families(manifest["families"])
    values = np.load(directory / VALUES_NAME, allow_pickle=False)
    if list(values.shape) != list(manifest["shape"]):
        raise StoreMismatchError(
            f"Tensor cache {directory}: values shape {values.shape} != manifest {manifest['shape']}"
        )
    return GalerkinTensor(
        families=families,
        vol_index_set=build_index_set(manifest["L"], manifest["K"]),
        index_set=build_index_set(manifest["L"], manifest["N"]),
        values=values,
        quadrature_nodes=int(manifest["quadrature_nodes"]),
    )


def _matches(
    manifest: dict, families: tuple[DistributionFamily, ...], K: int, N: int, quadrature_nodes: int
) -> bool:
    return (
        manifest.get("format_version") == FORMAT_VERSION
        and manifest.get("families") == ",".join(family.label for family in families)
        and manifest.get("K") == K
        and manifest.get("N") == N
        and manifest.get("quadrature_nodes") == (quadrature_nodes or default_quadrature_nodes(K, N))
    )


def obtain_tensor(
    families: Sequence[DistributionFamily],
    K: int,
    N: int,
    quadrature_nodes: int = 0,
    cache_dir: str | Path | None = None,
) -> GalerkinTensor:
    """Cached tensor when the cache matches, otherwise a fresh one (cached if a directory is given)."""
    families = tuple(families)
    if cache_dir:
        directory = Path(cache_dir)
        if (directory / MANIFEST_NAME).exists():
            manifest = read_json(directory / MANIFEST_NAME)
            if _matches(manifest, families, int(K), int(N), int(quadrature_nodes)):
                logger.info(f"[obtain_tensor] using cached tensor from {directory}")
                return load_tensor(directory)
            logger.info(f"[obtain_tensor] cache in {directory} is for another basis, rebuilding")
    basis = PolynomialBasis(families, build_index_set(len(families), N))
    tensor = galerkin_tensor(basis, K, N, quadrature_nodes)
    if cache_dir:
        save_tensor(cache_dir, tensor)
    return tensor
