"""Binary spectrum cache.

File layout: magic b"ETHS", format version (u32 LE), parameter digest
(32 raw bytes, SHA-256), sector descriptor (u32 length + JSON bytes), dims
(u64 LE); payload: little-endian float64 eigenvalues, then eigenvector real
parts column-major, then imaginary parts — dims * (1 + 2 * dims) * 8 bytes.
A digest or integrity mismatch is reported as a miss so callers recompute.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import warnings
from pathlib import Path

import numpy as np

from .basis import SectorSpec, SymBasis
from .hamiltonian import ModelParams
from .spectra import Spectrum, diagonalize

MAGIC = b"ETHS"
VERSION = 1

ENV_CACHE_DIR = "ETH_LAB_CACHE_DIR"


def params_digest(params: ModelParams, spec: SectorSpec) -> str:
    blob = json.dumps({"params": params.as_dict(), "spec": spec.as_dict()},
                      sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def cache_path(cache_dir: str | Path, digest: str) -> Path:
    return Path(cache_dir) / f"{digest}.eths"


def save_spectrum(path: str | Path, spectrum: Spectrum, digest: str) -> None:
    if spectrum.eigenvectors is None:
        raise ValueError("cache entries require eigenvectors")
    dims = spectrum.dim
    spec_json = json.dumps(spectrum.spec.as_dict(), sort_keys=True).encode()
    v = np.asarray(spectrum.eigenvectors, dtype=complex)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(bytes.fromhex(digest))
        fh.write(struct.pack("<I", len(spec_json)))
        fh.write(spec_json)
        fh.write(struct.pack("<Q", dims))
        fh.write(np.asarray(spectrum.eigenvalues, dtype="<f8").tobytes())
        fh.write(np.asarray(v.real, dtype="<f8").tobytes(order="F"))
        fh.write(np.asarray(v.imag, dtype="<f8").tobytes(order="F"))
    os.replace(tmp, path)


def load_spectrum(path: str | Path, digest: str,
                  spec: SectorSpec) -> Spectrum | None:
    path = Path(path)
    if not path.exists():
        return None
    try:
        with open(path, "rb") as fh:
            if fh.read(4) != MAGIC:
                raise ValueError("bad magic")
            (version,) = struct.unpack("<I", fh.read(4))
            if version != VERSION:
                raise ValueError(f"unsupported format version {version}")
            stored_digest = fh.read(32).hex()
            (n_spec,) = struct.unpack("<I", fh.read(4))
            spec_json = json.loads(fh.read(n_spec))
            (dims,) = struct.unpack("<Q", fh.read(8))
            if stored_digest != digest:
                return None
            if spec_json != spec.as_dict():
                return None
            payload = fh.read()
        expect = dims * (1 + 2 * dims) * 8
        if len(payload) != expect:
            raise ValueError(f"payload length {len(payload)} != {expect}")
        buf = np.frombuffer(payload, dtype="<f8")
        w = buf[:dims].copy()
        re = buf[dims:dims + dims * dims].reshape((dims, dims), order="F")
        im = buf[dims + dims * dims:].reshape((dims, dims), order="F")
        v = re + 1j * im
        return Spectrum(spec=spec, eigenvalues=w, eigenvectors=v,
                        params_hash=digest)
    except (ValueError, json.JSONDecodeError, struct.error) as exc:
        warnings.warn(f"corrupted cache file {path}: {exc}; recomputing")
        return None


def get_or_compute(cache_dir: str | Path | None, params: ModelParams,
                   basis: SymBasis, vectors: bool = True,
                   n_check_cols: int = 32):
    """(Spectrum, hit) with transparent caching when cache_dir is set.

    A loaded entry is accepted only if it passes an eigendecomposition
    residual check H v = E v on a digest-seeded sample of columns, applied
    through the sparse operator so validation stays O(dim^2) rather than
    O(dim^3); failures recompute.
    """
    from .hamiltonian import (build_hamiltonian, hamiltonian_terms,
                              operator_in_momentum_basis)

    digest = params_digest(params, basis.spec)
    if cache_dir is not None:
        path = cache_path(cache_dir, digest)
        cached = load_spectrum(path, digest, basis.spec)
        if cached is not None and cached.dim == basis.dim:
            scale = max(np.abs(cached.eigenvalues).max(initial=0.0), 1e-30)
            rng = np.random.default_rng(int(digest[:16], 16))
            k = min(cached.dim, n_check_cols)
            cols = rng.choice(cached.dim, size=k, replace=False)
            mat = operator_in_momentum_basis(
                hamiltonian_terms(params, basis.spec.L), basis)
            v = cached.eigenvectors[:, cols]
            if basis.isometry is not None:
                hv = basis.isometry.conj().T @ (mat @ (basis.isometry @ v))
            else:
                hv = mat @ v
            resid = np.abs(hv - v * cached.eigenvalues[cols][None, :]).max()
            if resid / scale <= 1e-9:
                return cached, True
            warnings.warn(f"cache entry {path} failed residual check; recomputing")
    block = build_hamiltonian(params, basis)
    spectrum = diagonalize(block, vectors=vectors, params_hash=digest)
    if cache_dir is not None and vectors:
        save_spectrum(cache_path(cache_dir, digest), spectrum, digest)
    return spectrum, False
