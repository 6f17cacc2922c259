"""Token-matrix ingestion, generation, and unit-variance normalization.

A token matrix is an m x d float64 ndarray whose rows are feature vectors.
Two on-disk formats are supported:

* ``csv``  -- no header, one row per line, d comma-separated decimal values.
* ``otp1`` -- binary: magic bytes ``OTP1``, then m and d as unsigned 64-bit
  little-endian integers, then m*d IEEE-754 float32 little-endian values in
  row-major order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"OTP1"

#: Default guard for degenerate (near-zero) columns during normalization.
DEFAULT_EPSILON = 1e-12


class MatrixFormatError(ValueError):
    """A matrix file violates its declared format (position included when known)."""


def validate_matrix(V: np.ndarray) -> np.ndarray:
    """Check token-matrix invariants: 2-D, m >= 1, d >= 1, all entries finite.

    Returns the matrix as a float64 ndarray.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise MatrixFormatError(f"token matrix must be 2-D, got shape {V.shape}")
    m, d = V.shape
    if m < 1 or d < 1:
        raise MatrixFormatError(f"token matrix must have m >= 1 and d >= 1, got {m}x{d}")
    if not np.isfinite(V).all():
        i, j = np.argwhere(~np.isfinite(V))[0]
        raise MatrixFormatError(f"non-finite value at row {i}, column {j}")
    return V


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-column scale factors applied by :func:`normalize_unit_variance`.

    ``scales[j]`` is the divisor used for column j, always > 0; columns whose
    root-mean-square falls below ``epsilon`` keep ``epsilon`` as the divisor,
    which forwards all-zero columns unchanged.
    """

    scales: np.ndarray
    epsilon: float

    def __post_init__(self):
        scales = np.asarray(self.scales, dtype=np.float64)
        if scales.ndim != 1 or not (scales > 0).all():
            raise ValueError("scale factors must be a 1-D array of positive reals")
        object.__setattr__(self, "scales", scales)

    def apply(self, V: np.ndarray) -> np.ndarray:
        V = validate_matrix(V)
        return V / self.scales


def normalize_unit_variance(
    V: np.ndarray, epsilon: float = DEFAULT_EPSILON, center: bool = False
) -> tuple[np.ndarray, NormalizationSpec]:
    """Scale each column to unit root-mean-square (zero-mean convention).

    Column j is divided by max(rms_j, epsilon) with
    rms_j = sqrt(mean_i V[i,j]^2); no mean-centering is performed unless
    ``center=True`` is requested explicitly.  Afterwards diag(V'V/m) = 1 for
    every column whose rms exceeds epsilon; degenerate columns pass through
    unchanged.
    """
    V = validate_matrix(V)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if center:
        V = V - V.mean(axis=0)
    rms = np.sqrt(np.mean(V * V, axis=0))
    scales = np.maximum(rms, epsilon)
    return V / scales, NormalizationSpec(scales=scales, epsilon=float(epsilon))


def synth_gaussian(m: int, d: int, seed: int) -> np.ndarray:
    """i.i.d. standard-normal m x d matrix from a seeded PCG64 generator.

    Identical (m, d, seed) yields bit-identical output; PCG64 (numpy's
    ``default_rng``) is fixed here so golden matrices stay stable across
    platforms.
    """
    if m < 1 or d < 1:
        raise ValueError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, d))


def infer_format(path: str) -> str:
    """Map a file suffix to a format name: .otp1 -> otp1, anything else -> csv."""
    return "otp1" if str(path).lower().endswith(".otp1") else "csv"


def load_matrix(path: str, format: str | None = None) -> np.ndarray:
    """Load a token matrix from ``path`` in the given format (inferred when None)."""
    fmt = format or infer_format(path)
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "otp1":
        return _load_otp1(path)
    raise ValueError(f"unknown matrix format {fmt!r} (expected 'csv' or 'otp1')")


def save_matrix(V: np.ndarray, path: str, format: str | None = None) -> None:
    """Write a token matrix to ``path``.

    CSV keeps full float64 precision (%.17g); the otp1 payload is float32, so
    saving float64 data to otp1 rounds it.
    """
    V = validate_matrix(V)
    fmt = format or infer_format(path)
    if fmt == "csv":
        np.savetxt(path, V, fmt="%.17g", delimiter=",")
    elif fmt == "otp1":
        m, d = V.shape
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", m, d))
            fh.write(V.astype("<f4").tobytes(order="C"))
    else:
        raise ValueError(f"unknown matrix format {fmt!r} (expected 'csv' or 'otp1')")


def _load_csv(path: str) -> np.ndarray:
    rows = []
    d = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if d is None:
                d = len(cells)
            elif len(cells) != d:
                raise MatrixFormatError(
                    f"{path}: ragged row at line {lineno}: expected {d} values, got {len(cells)}"
                )
            row = np.empty(d)
            for j, cell in enumerate(cells):
                try:
                    row[j] = float(cell)
                except ValueError:
                    raise MatrixFormatError(
                        f"{path}: unparseable value {cell.strip()!r} at line {lineno}, column {j}"
                    ) from None
                if not np.isfinite(row[j]):
                    raise MatrixFormatError(
                        f"{path}: non-finite value {cell.strip()!r} at line {lineno}, column {j}"
                    )
            rows.append(row)
    if not rows:
        raise MatrixFormatError(f"{path}: empty matrix")
    return np.asarray(rows, dtype=np.float64)


def _load_otp1(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 20 or blob[:4] != MAGIC:
        raise MatrixFormatError(f"{path}: missing OTP1 magic header")
    m, d = struct.unpack_from("<QQ", blob, 4)
    if m < 1 or d < 1:
        raise MatrixFormatError(f"{path}: empty matrix (header m={m}, d={d})")
    expected = 20 + 4 * m * d
    if len(blob) != expected:
        raise MatrixFormatError(
            f"{path}: payload holds {len(blob) - 20} bytes, header m={m}, d={d} needs {4 * m * d}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=20).reshape(m, d)
    if not np.isfinite(data).all():
        i, j = np.argwhere(~np.isfinite(data))[0]
        raise MatrixFormatError(f"{path}: non-finite value at row {i}, column {j}")
    return data.astype(np.float64)
