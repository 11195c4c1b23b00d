"""Random dot product graphs, stochastic block models, and sparse adjacency.

Every vertex carries a latent vector; two vertices are adjacent independently
with probability equal to the dot product of their vectors.  The probability
matrix P = X X^T is kept in factored form, so row sums, the nonzero spectrum,
and samples are all available in O(n d) or O(n d^2) work without ever
materializing the n x n matrix.  A stochastic block model is the special case
where the latent vectors take one value per block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateDelta,
    DimensionMismatch,
    NotPositiveSemidefinite,
    TooLarge,
)

# eigenvalues of a block matrix in [-PSD_CLAMP, 0) are treated as exact zeros
PSD_CLAMP = 1e-10
# slack when validating that pairwise dot products stay inside [0, 1]
_DOT_RANGE_TOL = 1e-9
# eigenvalues at or below this fraction of the leading one count as rank zero
RANK_REL_TOL = 1e-8
# largest n for which dense materialization and dense eigensolves are allowed
DENSE_LIMIT = 5000
_VALIDATE_BLOCK = 512


@dataclass(frozen=True)
class LatentPositions:
    """n latent vectors in R^d with all pairwise dot products inside [0, 1].

    The range constraint (checked on construction, including the diagonal)
    is exactly what makes X X^T a valid edge probability matrix.
    """

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise DimensionMismatch("latent positions must form a nonempty 2-d array")
        if rows.shape[1] > rows.shape[0]:
            raise DimensionMismatch(
                f"latent dimension {rows.shape[1]} exceeds vertex count {rows.shape[0]}"
            )
        for start in range(0, rows.shape[0], _VALIDATE_BLOCK):
            block = rows[start : start + _VALIDATE_BLOCK] @ rows.T
            if block.min() < -_DOT_RANGE_TOL or block.max() > 1.0 + _DOT_RANGE_TOL:
                raise DimensionMismatch(
                    "pairwise dot products must lie in [0, 1] to be probabilities"
                )
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class SbmSpec:
    """A stochastic block model: symmetric block probabilities plus block sizes."""

    block_probabilities: np.ndarray
    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        B = np.array(self.block_probabilities, dtype=float)
        sizes = tuple(int(s) for s in self.sizes)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise DimensionMismatch("block probability matrix must be square")
        if B.shape[0] != len(sizes):
            raise DimensionMismatch("one size per block is required")
        if not np.allclose(B, B.T, atol=1e-12, rtol=0.0):
            raise DimensionMismatch("block probability matrix must be symmetric")
        if B.min() < 0.0 or B.max() > 1.0:
            raise DimensionMismatch("block probabilities must lie in [0, 1]")
        if any(s < 1 for s in sizes):
            raise DimensionMismatch("every block needs at least one vertex")
        B.flags.writeable = False
        object.__setattr__(self, "block_probabilities", B)
        object.__setattr__(self, "sizes", sizes)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def block_assignment(self) -> np.ndarray:
        """Block index of every vertex, blocks laid out consecutively."""
        return np.repeat(np.arange(self.k), self.sizes)


@dataclass(frozen=True)
class FactoredProbabilityMatrix:
    """P = X X^T held through its factor, never materialized for large n."""

    latent: LatentPositions

    @property
    def n(self) -> int:
        return self.latent.n

    @property
    def d(self) -> int:
        return self.latent.d

    def eigendecomposition(self) -> tuple[np.ndarray, np.ndarray]:
        """Nonzero spectrum of P via a thin SVD of the factor.

        Returns (values, vectors): the d leading eigenvalues of P in
        decreasing order (squared singular values of X, hence nonnegative)
        and the matching orthonormal eigenvectors as columns.
        """
        V, s, _ = np.linalg.svd(self.latent.rows, full_matrices=False)
        return s**2, V

    def row_sums(self) -> np.ndarray:
        """All row sums of P, diagonal included, in O(n d)."""
        X = self.latent.rows
        return X @ X.sum(axis=0)

    def dense(self) -> np.ndarray:
        if self.n > DENSE_LIMIT:
            raise TooLarge(f"refusing to materialize P with n={self.n}")
        return self.latent.rows @ self.latent.rows.T


@dataclass(frozen=True)
class SparseGraph:
    """Hollow symmetric adjacency with sorted per-vertex neighbor lists.

    Storage is compressed rows: the neighbors of vertex i sit in
    ``indices[indptr[i]:indptr[i+1]]``, strictly increasing.  Symmetry, absence
    of self loops, sortedness, and uniqueness are asserted on construction.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self) -> None:
        indptr = np.array(self.indptr, dtype=np.int64)
        indices = np.array(self.indices, dtype=np.int64)
        n = int(self.n)
        if n < 1:
            raise DimensionMismatch("a graph needs at least one vertex")
        if indptr.shape != (n + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise DimensionMismatch("malformed row pointer array")
        if np.any(np.diff(indptr) < 0):
            raise DimensionMismatch("row pointers must be nondecreasing")
        if indices.size % 2 != 0:
            raise DimensionMismatch("a symmetric hollow graph has an even entry count")
        if indices.size:
            if indices.min() < 0 or indices.max() >= n:
                raise DimensionMismatch("neighbor index out of range")
            src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
            if np.any(src == indices):
                raise DimensionMismatch("self loops are not allowed")
            # sorted and duplicate-free within each row: consecutive entries of
            # the same row must strictly increase
            same_row = src[1:] == src[:-1]
            if np.any(same_row & (np.diff(indices) <= 0)):
                raise DimensionMismatch("neighbor lists must be sorted and unique")
            # symmetry: the entry multiset must be invariant under transposition
            forward = np.lexsort((indices, src))
            backward = np.lexsort((src, indices))
            if not (
                np.array_equal(src[forward], indices[backward])
                and np.array_equal(indices[forward], src[backward])
            ):
                raise DimensionMismatch("adjacency structure is not symmetric")
        indptr.flags.writeable = False
        indices.flags.writeable = False
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_edges(cls, n: int, endpoints: np.ndarray) -> "SparseGraph":
        """Build from an (m, 2) array of distinct undirected edges u != v."""
        endpoints = np.asarray(endpoints, dtype=np.int64).reshape(-1, 2)
        u, v = endpoints[:, 0], endpoints[:, 1]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        counts = np.bincount(src, minlength=n) if src.size else np.zeros(n, np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, indptr, dst)

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return self.indices.size // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @cached_property
    def _entry_rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """A v in O(m) without materializing A."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise DimensionMismatch(f"vector of length {self.n} required")
        if not self.indices.size:
            return np.zeros(self.n)
        return np.bincount(self._entry_rows, weights=v[self.indices], minlength=self.n)

    def to_dense(self) -> np.ndarray:
        if self.n > DENSE_LIMIT:
            raise TooLarge(f"refusing to materialize adjacency with n={self.n}")
        A = np.zeros((self.n, self.n))
        if self.indices.size:
            A[self._entry_rows, self.indices] = 1.0
        return A


def sbm_to_latent(spec: SbmSpec) -> LatentPositions:
    """Latent vectors whose dot products reproduce the block probabilities.

    The block matrix is eigenfactored; eigenvalues inside [-1e-10, 0) are
    clamped to zero, anything lower raises.  The returned positions have one
    distinct row per block, so X X^T equals Z B Z^T exactly (up to clamping).
    """
    B = spec.block_probabilities
    w, Q = np.linalg.eigh(B)
    if w.min() < -PSD_CLAMP:
        raise NotPositiveSemidefinite(
            f"block matrix has eigenvalue {w.min():.3e} below the clamp window"
        )
    w = np.clip(w, 0.0, None)
    order = np.argsort(w)[::-1]
    factor = Q[:, order] * np.sqrt(w[order])
    return LatentPositions(np.repeat(factor, spec.sizes, axis=0))


def sample_adjacency(P: FactoredProbabilityMatrix, seed) -> SparseGraph:
    """Draw one graph: each pair i < j is an edge with probability X_i . X_j.

    The diagonal is never sampled (the graph is hollow).  Uniform variates are
    consumed row by row over the upper triangle, so the draw is a pure
    function of the seed regardless of internal blocking.
    """
    X = P.latent.rows
    n = P.n
    rng = np.random.default_rng(seed)
    heads: list[np.ndarray] = []
    tails: list[np.ndarray] = []
    for i in range(n - 1):
        p = np.clip(X[i + 1 :] @ X[i], 0.0, 1.0)
        u = rng.random(n - 1 - i)
        hit = np.nonzero(u < p)[0]
        if hit.size:
            heads.append(np.full(hit.size, i, dtype=np.int64))
            tails.append(hit.astype(np.int64) + i + 1)
    if heads:
        endpoints = np.column_stack([np.concatenate(heads), np.concatenate(tails)])
    else:
        endpoints = np.empty((0, 2), dtype=np.int64)
    return SparseGraph.from_edges(n, endpoints)


def max_row_sum(M) -> float:
    """delta(M): the largest row sum, diagonal included.

    For an adjacency structure this is the maximum degree; for a factored
    probability matrix it is computed in O(n d).
    """
    if isinstance(M, SparseGraph):
        return float(M.degrees.max()) if M.n else 0.0
    if isinstance(M, FactoredProbabilityMatrix):
        return float(M.row_sums().max())
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionMismatch("max_row_sum expects a matrix")
    return float(M.sum(axis=1).max())


def _leading_eigenvalues(M, count: int) -> np.ndarray:
    """The ``count`` leading eigenvalues of M by decreasing magnitude.

    Values beyond the available factored rank are exact zeros of P.
    """
    if isinstance(M, FactoredProbabilityMatrix):
        if count > M.n:
            raise DimensionMismatch("more eigenvalues requested than exist")
        values, _ = M.eigendecomposition()
        out = np.zeros(count)
        take = min(count, values.size)
        out[:take] = values[:take]
        return out
    if isinstance(M, SparseGraph):
        from .spectral_core import dense_eig_oracle, truncated_eigs

        if count > M.n:
            raise DimensionMismatch("more eigenvalues requested than exist")
        if M.n <= 2000:
            values, _ = dense_eig_oracle(M.to_dense())
            return values[:count]
        dec = truncated_eigs(M, count, 1e-8)
        return np.asarray(dec.values)
    from .spectral_core import dense_eig_oracle

    values, _ = dense_eig_oracle(M)
    if count > values.size:
        raise DimensionMismatch("more eigenvalues requested than exist")
    return values[:count]


def eigengap_ratio(M, d: int) -> float:
    """gamma(M) = (lambda_d - lambda_{d+1}) / delta(M).

    Eigenvalues are taken in decreasing magnitude order, so for a factored
    probability matrix of rank d the gap is lambda_d itself.
    """
    delta = max_row_sum(M)
    if delta == 0.0:
        raise DegenerateDelta("zero maximum row sum")
    if d < 1:
        raise DimensionMismatch("d must be at least 1")
    lam = _leading_eigenvalues(M, d + 1)
    return float((lam[d - 1] - lam[d]) / delta)


@dataclass(frozen=True)
class AssumptionReport:
    """Raw values and verdicts for the spectral model assumptions."""

    n: int
    d: int
    rank: int
    rank_matches: bool
    gamma: float
    gamma_check: bool
    delta: float
    delta_threshold: float
    delta_check: bool
    c0: float
    a: float


def check_assumptions(
    P: FactoredProbabilityMatrix, d: int, c0: float, a: float
) -> AssumptionReport:
    """Report-only checks that P is suitable for a rank-d spectral embedding.

    Checks the numerical rank of P against d, the gap ratio gamma(P) against
    c0, and the density delta(P) against (log n)^(4+a).  Nothing is raised on
    failure; degenerate inputs (P = 0) simply fail the checks.
    """
    values, _ = P.eigendecomposition()
    lam1 = float(values[0]) if values.size else 0.0
    rank = int(np.count_nonzero(values > RANK_REL_TOL * lam1)) if lam1 > 0 else 0
    delta = max_row_sum(P)
    lam_d = float(values[d - 1]) if d - 1 < values.size else 0.0
    lam_next = float(values[d]) if d < values.size else 0.0
    gamma = (lam_d - lam_next) / delta if delta > 0 else float("nan")
    threshold = math.log(P.n) ** (4.0 + a) if P.n > 1 else float("inf")
    return AssumptionReport(
        n=P.n,
        d=d,
        rank=rank,
        rank_matches=rank == d,
        gamma=gamma,
        gamma_check=delta > 0 and gamma > c0,
        delta=delta,
        delta_threshold=threshold,
        delta_check=delta > threshold,
        c0=c0,
        a=a,
    )
