"""Signal containers, orthonormal sparsifying bases, and trace loading.

A length-N signal x is modeled as x = B s where B is an orthonormal basis
matrix (columns are atoms) and s the coefficient vector.  Three bases are
supported: the canonical basis (identity), the orthonormal DCT-II, and a real
orthonormal Fourier basis built from stacked cosine/sine harmonics.
"""

import csv
import functools
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import scipy.fft

from .errors import SignalDataError


class BasisKind(Enum):
    CANONICAL = "canonical"
    DCT = "dct"
    FOURIER = "fourier"


@dataclass(frozen=True)
class Signal:
    """Real-valued sample vector.

    Parameters
    ----------
    samples : ndarray
        One-dimensional float array; frozen after construction.
    """

    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("signal must be a non-empty 1-D vector")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def length(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class SparseCoefficients:
    """Coefficient vector in some basis, optionally tagged with its sparsity.

    If ``sparsity_hint`` is present the vector carries at most that many
    nonzeros; violating the hint is a construction error.
    """

    values: np.ndarray
    sparsity_hint: Optional[int] = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D vector")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.sparsity_hint is not None:
            nnz = int(np.count_nonzero(arr))
            if nnz > self.sparsity_hint:
                raise ValueError(
                    f"sparsity_hint={self.sparsity_hint} but vector has {nnz} nonzeros"
                )

    @property
    def length(self) -> int:
        return self.values.size

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)


@functools.lru_cache(maxsize=16)
def _basis_matrix(kind: BasisKind, n: int) -> np.ndarray:
    """Dense synthesis matrix (columns are atoms), cached per (kind, n)."""
    if kind is BasisKind.CANONICAL:
        mat = np.eye(n)
    elif kind is BasisKind.DCT:
        # synthesis = transpose of the orthonormal DCT-II analysis matrix
        mat = scipy.fft.idct(np.eye(n), type=2, norm="ortho", axis=0)
    elif kind is BasisKind.FOURIER:
        mat = _real_fourier_analysis(n).T
    else:  # pragma: no cover
        raise ValueError(f"unknown basis kind {kind!r}")
    mat = np.ascontiguousarray(mat)
    mat.setflags(write=False)
    return mat


def _real_fourier_analysis(n: int) -> np.ndarray:
    """Real orthonormal Fourier analysis matrix, rows in frequency order.

    Row layout: DC, then (cos, sin) pairs for harmonics 1..ceil(n/2)-1, then
    the Nyquist alternating row when n is even.  Adjacent rows carry adjacent
    frequencies, so dropping a contiguous row block removes a frequency band.
    """
    t = np.arange(n)
    rows = [np.full(n, 1.0 / np.sqrt(n))]
    for k in range(1, (n + 1) // 2):
        w = 2.0 * np.pi * k * t / n
        rows.append(np.sqrt(2.0 / n) * np.cos(w))
        rows.append(np.sqrt(2.0 / n) * np.sin(w))
    if n % 2 == 0 and n > 1:
        rows.append(np.where(t % 2 == 0, 1.0, -1.0) / np.sqrt(n))
    return np.vstack(rows)


@dataclass(frozen=True)
class SparsifyingBasis:
    """Orthonormal basis of dimension n; transpose is the exact inverse."""

    kind: BasisKind
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("basis dimension must be >= 1")

    def matrix(self) -> np.ndarray:
        """Synthesis matrix B (n x n, columns are atoms). Read-only."""
        return _basis_matrix(self.kind, self.dimension)

    def analysis_matrix(self) -> np.ndarray:
        """Transform matrix B^T whose rows are atoms."""
        return self.matrix().T


def analyze(basis: SparsifyingBasis, signal: Signal) -> SparseCoefficients:
    """Project a signal onto the basis: s = B^T x.

    Uses the fast transform where one exists; identical (to 1e-12) to the
    dense matrix product.
    """
    x = signal.samples
    if x.size != basis.dimension:
        raise ValueError(
            f"signal length {x.size} != basis dimension {basis.dimension}"
        )
    if basis.kind is BasisKind.CANONICAL:
        s = x.copy()
    elif basis.kind is BasisKind.DCT:
        s = scipy.fft.dct(x, type=2, norm="ortho")
    else:
        s = basis.analysis_matrix() @ x
    return SparseCoefficients(values=s)


def synthesize(basis: SparsifyingBasis, coeffs: SparseCoefficients) -> Signal:
    """Reconstruct a signal from coefficients: x = B s."""
    s = coeffs.values
    if s.size != basis.dimension:
        raise ValueError(
            f"coefficient length {s.size} != basis dimension {basis.dimension}"
        )
    if basis.kind is BasisKind.CANONICAL:
        x = s.copy()
    elif basis.kind is BasisKind.DCT:
        x = scipy.fft.idct(s, type=2, norm="ortho")
    else:
        x = basis.matrix() @ s
    return Signal(samples=x)


def synthesize_sparse_signal(
    n: int,
    k: int,
    basis: SparsifyingBasis,
    value_range: Tuple[float, float] = (-1.0, 1.0),
    seed: int = 0,
) -> Tuple[Signal, SparseCoefficients]:
    """Draw an exactly-K-sparse coefficient vector and its synthesized signal.

    Support positions are uniform without replacement; values are uniform on
    ``value_range`` (redrawn in the measure-zero event a value is exactly 0,
    so the support size is exactly k).

    Parameters
    ----------
    n : int
        Signal length; must equal ``basis.dimension``.
    k : int
        Number of nonzeros, 1 <= k <= n.
    basis : SparsifyingBasis
        Basis the sparsity lives in.
    value_range : (float, float)
        Closed interval for the nonzero values, lo < hi.
    seed : int
        Stream seed; same seed reproduces the draw exactly.
    """
    if basis.dimension != n:
        raise ValueError(f"basis dimension {basis.dimension} != n {n}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    lo, hi = value_range
    if not lo < hi:
        raise ValueError(f"value range must satisfy lo < hi, got ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(n, size=k, replace=False))
    vals = rng.uniform(lo, hi, size=k)
    while np.any(vals == 0.0):
        vals[vals == 0.0] = rng.uniform(lo, hi, size=int(np.sum(vals == 0.0)))
    s = np.zeros(n)
    s[support] = vals
    coeffs = SparseCoefficients(values=s, sparsity_hint=k)
    return synthesize(basis, coeffs), coeffs


def load_signal_csv(
    path,
    column: int = 0,
    offset: int = 0,
    length: Optional[int] = None,
    skip_rows: int = 0,
) -> Signal:
    """Load one numeric column of a delimited text file as a Signal.

    Parameters
    ----------
    path : str or Path
        File to read.  A missing file raises FileNotFoundError.
    column : int
        Zero-based column index.
    offset : int
        Data rows to skip after ``skip_rows`` header rows.
    length : int, optional
        Number of samples to take; None means "to end of file".  Zero is
        rejected (empty signal).
    skip_rows : int
        Header rows discarded before data starts.

    Raises
    ------
    SignalDataError
        Short file, missing column, or a non-numeric cell (named by
        row/column in the message).
    """
    if length is not None and length < 1:
        raise SignalDataError("length=0: empty signal rejected")
    if column < 0 or offset < 0 or skip_rows < 0:
        raise SignalDataError("column, offset and skip_rows must be non-negative")
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row_idx, row in enumerate(reader):
            if row_idx < skip_rows:
                continue
            data_idx = row_idx - skip_rows
            if data_idx < offset:
                continue
            if length is not None and len(values) >= length:
                break
            if not row:
                continue
            if column >= len(row):
                raise SignalDataError(
                    f"row {row_idx + 1} has {len(row)} columns, need column {column}"
                )
            cell = row[column].strip()
            try:
                value = float(cell)
            except ValueError:
                raise SignalDataError(
                    f"non-numeric cell {cell!r} at row {row_idx + 1}, column {column}"
                ) from None
            if not np.isfinite(value):
                raise SignalDataError(
                    f"non-finite cell {cell!r} at row {row_idx + 1}, column {column}"
                )
            values.append(value)
    if length is not None and len(values) < length:
        raise SignalDataError(
            f"file ends after {len(values)} usable rows, need {length}"
        )
    if not values:
        raise SignalDataError("no usable rows in file")
    return Signal(samples=np.asarray(values))


def temperature_trace(n: int, seed: int = 0) -> Signal:
    """Deterministic temperature-like trace: drift + diurnal harmonics + AR(1).

    Produces a smooth, DCT-compressible series resembling an outdoor sensor
    log; used by the bundled demos and the acceptance experiments.
    """
    import scipy.signal

    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=np.float64)
    x = 18.0 + 0.0015 * t
    x += 4.0 * np.sin(2.0 * np.pi * t / 288.0 + 0.6)
    x += 1.6 * np.sin(2.0 * np.pi * t / 96.0 + 1.9)
    x += 0.7 * np.sin(2.0 * np.pi * t / 48.0 + 4.0)
    eps = rng.normal(0.0, 0.12, size=n)
    x += scipy.signal.lfilter([1.0], [1.0, -0.97], eps)
    return Signal(samples=x)
