"""Projection matrices, lossy-selection matrices, and their composition.

The collection pipeline is

    sent = P x            (projection, rows x cols, dimension-preserving here)
    kept = S sent         (selection: rows that survived the lossy link)
    A    = S P B          (sensing matrix seen by the recovery solver)

where B is the sparsifying basis.  The headline construction is the sparse
Gaussian projection: round(density * rows * cols) nonzero cells, placed
uniformly at random (or on a cyclic-shifted structured support), filled with
i.i.d. zero-mean Gaussians.  Dense Gaussian, Bernoulli, Toeplitz, and
partial-basis baselines share the same container.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse

from .errors import ConstructionError, DimensionMismatchError
from .signals import BasisKind, Signal, SparsifyingBasis

_PLACEMENT_ATTEMPTS = 100


class ProjectionKind(Enum):
    SPARSE_GAUSSIAN = "sparse_gaussian"
    DENSE_GAUSSIAN = "dense_gaussian"
    BERNOULLI = "bernoulli"
    TOEPLITZ = "toeplitz"
    PARTIAL_BASIS = "partial_basis"


class SparseLayout(Enum):
    RANDOM = "random"
    STRUCTURED = "structured"


def analysis_variance(density: float, rows: int) -> float:
    """Value variance giving unit expected column norms: 1 / (density * rows)."""
    if not 0.0 < density <= 1.0 or rows < 1:
        raise ValueError("need 0 < density <= 1 and rows >= 1")
    return 1.0 / (density * rows)


class ProjectionMatrix:
    """Projection matrix with either dense or coordinate-list storage.

    Sparse storage keeps (row, col, value) triples sorted row-major with
    int32 index arrays; all arrays are frozen after construction.
    """

    def __init__(
        self,
        rows: int,
        cols: int,
        kind: ProjectionKind,
        density: float,
        seed: int,
        layout: Optional[SparseLayout] = None,
        variance: Optional[float] = None,
        dense: Optional[np.ndarray] = None,
        coo: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None,
    ):
        if (dense is None) == (coo is None):
            raise ValueError("exactly one of dense/coo storage required")
        self.rows = int(rows)
        self.cols = int(cols)
        self.kind = kind
        self.density = float(density)
        self.seed = int(seed)
        self.layout = layout
        self.variance = variance
        self._csr = None
        if dense is not None:
            if dense.shape != (rows, cols):
                raise ValueError(f"dense storage shape {dense.shape} != ({rows}, {cols})")
            dense = np.ascontiguousarray(dense, dtype=np.float64)
            dense.setflags(write=False)
            self._dense = dense
            self._coo = None
        else:
            ri, ci, vals = coo
            ri = np.ascontiguousarray(ri, dtype=np.int32)
            ci = np.ascontiguousarray(ci, dtype=np.int32)
            vals = np.ascontiguousarray(vals, dtype=np.float64)
            if not (ri.size == ci.size == vals.size):
                raise ValueError("coordinate arrays must have equal length")
            for a in (ri, ci, vals):
                a.setflags(write=False)
            self._dense = None
            self._coo = (ri, ci, vals)

    @property
    def is_sparse_storage(self) -> bool:
        return self._coo is not None

    @property
    def nnz(self) -> int:
        """Stored entry count (explicit zeros in dense storage count as entries)."""
        if self._coo is not None:
            return self._coo[2].size
        return self._dense.size

    def storage_bytes(self) -> int:
        if self._coo is not None:
            return sum(a.nbytes for a in self._coo)
        return self._dense.nbytes

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._coo is None:
            raise ValueError("dense storage has no coordinate list")
        return self._coo

    def toarray(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        ri, ci, vals = self._coo
        out = np.zeros((self.rows, self.cols))
        out[ri, ci] = vals
        return out

    def csr(self) -> scipy.sparse.csr_matrix:
        """CSR view for fast products; only meaningful for sparse storage."""
        if self._csr is None:
            if self._coo is not None:
                ri, ci, vals = self._coo
                self._csr = scipy.sparse.csr_matrix(
                    (vals, (ri, ci)), shape=(self.rows, self.cols)
                )
            else:
                self._csr = scipy.sparse.csr_matrix(self._dense)
        return self._csr

    def row_product(self, row_indices: np.ndarray, rhs: Optional[np.ndarray]) -> np.ndarray:
        """Rows ``row_indices`` of self (0-based) times ``rhs`` (None = identity)."""
        if self._coo is not None:
            sub = self.csr()[row_indices]
            return np.asarray(sub.toarray() if rhs is None else sub @ rhs)
        sub = self._dense[row_indices]
        return np.array(sub) if rhs is None else sub @ rhs


def project(matrix: ProjectionMatrix, x) -> np.ndarray:
    """Apply the projection: sent = P x.

    Accepts a Signal or a plain vector; the sparse and dense storage paths
    agree to 1e-12.
    """
    vec = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=np.float64)
    if vec.ndim != 1 or vec.size != matrix.cols:
        raise DimensionMismatchError(
            f"projection expects length {matrix.cols}, got {vec.size}"
        )
    if matrix.is_sparse_storage:
        return np.asarray(matrix.csr() @ vec)
    return matrix.toarray() @ vec


def build_sparse_gaussian(
    rows: int,
    cols: int,
    density: float,
    variance: float = 1.0,
    layout: SparseLayout = SparseLayout.RANDOM,
    seed: int = 0,
) -> ProjectionMatrix:
    """Construct the sparse Gaussian projection matrix.

    Exactly round(density * rows * cols) cells carry i.i.d. N(0, variance)
    values.  RANDOM layout places cells uniformly at random without
    replacement, redrawing (bounded attempts) until every row holds at least
    one entry.  STRUCTURED layout places a shared offset set cyclically
    shifted by one column per row, so per-row budgets match RANDOM.

    Parameters
    ----------
    rows, cols : int
        Matrix shape; rows is the sent-sample count, cols the signal length.
    density : float
        Fraction of cells carrying values, in (0, 1].  density == 1 stores
        densely (kind stays SPARSE_GAUSSIAN).
    variance : float
        Value variance.  Experiments default to 1; isometry analysis uses
        ``analysis_variance(density, rows)``.
    layout : SparseLayout
        Support pattern family.
    seed : int
        Same seed, same matrix.
    """
    if rows < 1 or cols < 1:
        raise ConstructionError("rows and cols must be >= 1")
    if not 0.0 < density <= 1.0:
        raise ConstructionError(f"density must be in (0, 1], got {density}")
    if variance <= 0.0:
        raise ConstructionError("variance must be positive")
    z = int(round(density * rows * cols))
    if z < rows:
        raise ConstructionError(
            f"round(density*rows*cols) = {z} < rows = {rows}: "
            "cannot guarantee a nonzero entry in every row"
        )
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(variance)

    if z == rows * cols:
        dense = rng.normal(0.0, sigma, size=(rows, cols))
        return ProjectionMatrix(
            rows, cols, ProjectionKind.SPARSE_GAUSSIAN, density, seed,
            layout=layout, variance=variance, dense=dense,
        )

    if layout is SparseLayout.RANDOM:
        for _ in range(_PLACEMENT_ATTEMPTS):
            flat = np.sort(rng.choice(rows * cols, size=z, replace=False))
            ri = (flat // cols).astype(np.int32)
            if np.unique(ri).size == rows:
                ci = (flat % cols).astype(np.int32)
                break
        else:
            raise ConstructionError(
                f"no placement with all rows occupied in {_PLACEMENT_ATTEMPTS} attempts"
            )
    else:
        base = z // rows
        extra = z - base * rows
        n_offsets = base + (1 if extra else 0)
        offsets = np.sort(rng.choice(cols, size=n_offsets, replace=False))
        ri_parts = []
        ci_parts = []
        for r in range(rows):
            take = base + (1 if r < extra else 0)
            shifted = np.sort((offsets[:take] + r) % cols)
            ri_parts.append(np.full(take, r, dtype=np.int32))
            ci_parts.append(shifted.astype(np.int32))
        ri = np.concatenate(ri_parts)
        ci = np.concatenate(ci_parts)

    vals = rng.normal(0.0, sigma, size=z)
    return ProjectionMatrix(
        rows, cols, ProjectionKind.SPARSE_GAUSSIAN, density, seed,
        layout=layout, variance=variance, coo=(ri, ci, vals),
    )


def build_baseline_matrix(
    kind: ProjectionKind,
    rows: int,
    cols: int,
    seed: int = 0,
    basis: Optional[SparsifyingBasis] = None,
) -> ProjectionMatrix:
    """Construct one of the dense baseline projections.

    DENSE_GAUSSIAN: i.i.d. N(0, 1/rows).  BERNOULLI: equiprobable
    +-1/sqrt(rows).  TOEPLITZ: constant diagonals from rows+cols-1 i.i.d.
    N(0, 1/rows) draws.  PARTIAL_BASIS: ``rows`` distinct rows of the basis
    transform, chosen uniformly, kept in ascending (natural frequency) order;
    requires ``basis`` with dimension == cols and rows <= cols.
    """
    if rows < 1 or cols < 1:
        raise ConstructionError("rows and cols must be >= 1")
    rng = np.random.default_rng(seed)
    variance: Optional[float] = 1.0 / rows
    if kind is ProjectionKind.DENSE_GAUSSIAN:
        dense = rng.normal(0.0, 1.0 / np.sqrt(rows), size=(rows, cols))
    elif kind is ProjectionKind.BERNOULLI:
        dense = (2.0 * rng.integers(0, 2, size=(rows, cols)) - 1.0) / np.sqrt(rows)
    elif kind is ProjectionKind.TOEPLITZ:
        diags = rng.normal(0.0, 1.0 / np.sqrt(rows), size=rows + cols - 1)
        idx = (np.arange(cols)[None, :] - np.arange(rows)[:, None]) + rows - 1
        dense = diags[idx]
    elif kind is ProjectionKind.PARTIAL_BASIS:
        if basis is None:
            raise ConstructionError("PARTIAL_BASIS requires a basis")
        if basis.dimension != cols:
            raise DimensionMismatchError(
                f"partial-basis cols {cols} != basis dimension {basis.dimension}"
            )
        if rows > cols:
            raise ConstructionError(f"partial basis needs rows <= cols, got {rows} > {cols}")
        chosen = np.sort(rng.choice(cols, size=rows, replace=False))
        dense = np.array(basis.analysis_matrix()[chosen])
        variance = None
    elif kind is ProjectionKind.SPARSE_GAUSSIAN:
        raise ConstructionError("use build_sparse_gaussian for SPARSE_GAUSSIAN")
    else:  # pragma: no cover
        raise ConstructionError(f"unknown kind {kind!r}")
    return ProjectionMatrix(
        rows, cols, kind, 1.0, seed, layout=None, variance=variance, dense=dense
    )


@dataclass(frozen=True)
class SelectionMatrix:
    """Row-selection matrix of a lossy, order-preserving link.

    ``received_map`` holds the 1-based sequence numbers of the samples that
    arrived, strictly increasing.  Row i of the dense form carries a single 1
    at column received_map[i] - 1; no column holds more than one 1.
    """

    received_map: np.ndarray
    sent_count: int

    def __post_init__(self):
        arr = np.array(self.received_map, dtype=np.int64, copy=True)
        if arr.ndim != 1:
            raise ValueError("received_map must be 1-D")
        if arr.size:
            if arr[0] < 1 or arr[-1] > self.sent_count:
                raise ValueError(
                    f"sequence numbers must lie in [1, {self.sent_count}]"
                )
            if np.any(np.diff(arr) <= 0):
                raise ValueError("received_map must be strictly increasing")
        arr.setflags(write=False)
        object.__setattr__(self, "received_map", arr)

    @property
    def received_count(self) -> int:
        return self.received_map.size

    def to_matrix(self) -> np.ndarray:
        out = np.zeros((self.received_count, self.sent_count))
        out[np.arange(self.received_count), self.received_map - 1] = 1.0
        return out

    def apply(self, sent: np.ndarray) -> np.ndarray:
        sent = np.asarray(sent)
        if sent.size != self.sent_count:
            raise DimensionMismatchError(
                f"selection expects {self.sent_count} sent samples, got {sent.size}"
            )
        return sent[self.received_map - 1]


def build_selection_matrix(received_seq: Sequence[int], sent_count: int) -> SelectionMatrix:
    """Selection matrix from the surviving 1-based sequence numbers."""
    return SelectionMatrix(received_map=np.asarray(received_seq, dtype=np.int64),
                           sent_count=sent_count)


@dataclass(frozen=True)
class SensingMatrix:
    """Composed sensing matrix A = S P B with provenance references."""

    entries: np.ndarray
    selection: SelectionMatrix
    projection: ProjectionMatrix
    basis: SparsifyingBasis

    def __post_init__(self):
        arr = np.ascontiguousarray(self.entries, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def compose_sensing_matrix(
    selection: SelectionMatrix,
    projection: ProjectionMatrix,
    basis: SparsifyingBasis,
) -> SensingMatrix:
    """A = (selected rows of P) B; mismatches name the failing link."""
    if selection.sent_count != projection.rows:
        raise DimensionMismatchError(
            "selection->projection link: selection expects "
            f"{selection.sent_count} sent samples but projection has {projection.rows} rows"
        )
    if projection.cols != basis.dimension:
        raise DimensionMismatchError(
            "projection->basis link: projection has "
            f"{projection.cols} cols but basis dimension is {basis.dimension}"
        )
    rows0 = selection.received_map - 1
    rhs = None if basis.kind is BasisKind.CANONICAL else basis.matrix()
    entries = projection.row_product(rows0, rhs)
    return SensingMatrix(entries=entries, selection=selection,
                         projection=projection, basis=basis)


def save_matrix_text(matrix: ProjectionMatrix, path) -> None:
    """Write the text format: header ``rows cols kind density seed`` then one
    ``i j value`` line per stored nonzero (0-based indices, repr floats).

    Values round-trip bit-exactly through load_matrix_text.  Layout/variance
    metadata are not part of the wire format.
    """
    with open(path, "w") as fh:
        fh.write(
            f"{matrix.rows} {matrix.cols} {matrix.kind.value} "
            f"{matrix.density!r} {matrix.seed}\n"
        )
        if matrix.is_sparse_storage:
            ri, ci, vals = matrix.coordinates()
            for i, j, v in zip(ri, ci, vals):
                fh.write(f"{i} {j} {float(v)!r}\n")
        else:
            dense = matrix.toarray()
            for i in range(matrix.rows):
                row = dense[i]
                for j in np.flatnonzero(row):
                    fh.write(f"{i} {j} {float(row[j])!r}\n")


def load_matrix_text(path) -> ProjectionMatrix:
    """Inverse of save_matrix_text; storage mode is implied by kind/density."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5:
            raise ValueError(f"malformed header: expected 5 fields, got {len(header)}")
        rows, cols = int(header[0]), int(header[1])
        kind = ProjectionKind(header[2])
        density = float(header[3])
        seed = int(header[4])
        ri, ci, vals = [], [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"malformed entry at line {lineno}")
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"entry ({i}, {j}) out of range at line {lineno}")
            ri.append(i)
            ci.append(j)
            vals.append(v)
    sparse_storage = kind is ProjectionKind.SPARSE_GAUSSIAN and density < 1.0
    if sparse_storage:
        return ProjectionMatrix(
            rows, cols, kind, density, seed,
            layout=None,
            coo=(np.asarray(ri, dtype=np.int32), np.asarray(ci, dtype=np.int32),
                 np.asarray(vals)),
        )
    dense = np.zeros((rows, cols))
    dense[ri, ci] = vals
    return ProjectionMatrix(rows, cols, kind, density, seed, dense=dense)
