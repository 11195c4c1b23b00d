"""Stopping tolerances calibrated to the sampling noise of random graphs.

The guiding fact: the eigenvector fluctuation of a sampled graph around the
spectral truth of its probability matrix has a floor set by sampling noise,
so driving the solver's residual far below that floor buys nothing.  The
heuristics here place the tolerance just under the noise floor using only
cheap graph statistics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyGraph, RankDeficient, ZeroRho
from .graph_model import FactoredProbabilityMatrix, SparseGraph, max_row_sum
from .spectral_core import estimate_spectral_norm

# smallest vertex count for which log(log(n)) is safely above zero
MIN_HEURISTIC_N = 16
_RANK_REL_TOL = 1e-10


def heuristic_tolerance(n: int, spectral_norm: float) -> float:
    """1 / (log(log(n)) * sqrt(spectral_norm)), natural logarithms.

    Pass the top eigenvalue estimate of the adjacency matrix for the
    spectral variant, or n itself for the sqrt-n variant.
    """
    if n < MIN_HEURISTIC_N:
        raise DomainError(f"heuristic defined for n >= {MIN_HEURISTIC_N}, got {n}")
    if not spectral_norm > 0.0:
        raise DomainError("spectral norm must be positive")
    return 1.0 / (math.log(math.log(n)) * math.sqrt(spectral_norm))


def conservative_tolerance(A: SparseGraph) -> float:
    """1 / sqrt(max degree): safe before any eigenvalue has been computed."""
    if A.m == 0:
        raise EmptyGraph("conservative tolerance needs at least one edge")
    return 1.0 / math.sqrt(float(A.degrees.max()))


@dataclass(frozen=True)
class ToleranceReport:
    """All tolerance recommendations for one graph."""

    n: int
    spectral_norm_estimate: float
    delta_A: float
    heuristic_spectral: float
    heuristic_sqrt_n: float
    conservative: float


def tolerance_report(A: SparseGraph, *, seed=0) -> ToleranceReport:
    """Bootstrap procedure: estimate the top eigenvalue at the conservative
    tolerance, then report both heuristic variants alongside it."""
    if A.n < MIN_HEURISTIC_N:
        raise DomainError(f"report defined for n >= {MIN_HEURISTIC_N}, got {A.n}")
    conservative = conservative_tolerance(A)
    lam1 = estimate_spectral_norm(A, tol=conservative, seed=seed)
    return ToleranceReport(
        n=A.n,
        spectral_norm_estimate=lam1,
        delta_A=float(A.degrees.max()),
        heuristic_spectral=heuristic_tolerance(A.n, lam1),
        heuristic_sqrt_n=heuristic_tolerance(A.n, float(A.n)),
        conservative=conservative,
    )


def expected_squared_deviation_diagonal(P: FactoredProbabilityMatrix) -> np.ndarray:
    """Diagonal of E[(A - P)^2] for one sampled graph, in closed form.

    Off-diagonal expectations vanish by edge independence; entry i equals
    sum over k != i of p_ik (1 - p_ik), plus p_ii^2 contributed by the
    never-sampled diagonal.  Computed in O(n d^2) from the factor.
    """
    X = P.latent.rows
    col_sum = X.sum(axis=0)
    G = X.T @ X
    row_p = X @ col_sum
    row_p2 = np.einsum("ij,jk,ik->i", X, G, X)
    p_ii = np.einsum("ij,ij->i", X, X)
    return row_p - row_p2 - p_ii + 2.0 * p_ii**2


def sampling_error_constant(P: FactoredProbabilityMatrix, d: int) -> float:
    """C(P): the scale of eigenvector fluctuation caused by edge sampling.

    C(P) = sqrt(tr(S^-1 V^T E[(A - P)^2] V S^-1)) over the d leading
    eigenpairs (S, V) of P.  Raises RankDeficient when the d-th eigenvalue
    is numerically zero relative to the first.
    """
    values, vectors = P.eigendecomposition()
    if d < 1 or d > values.size:
        raise RankDeficient(
            f"rank-{d} constant requested from a factor with {values.size} columns"
        )
    lam1 = float(values[0])
    if lam1 <= 0.0 or values[d - 1] <= _RANK_REL_TOL * lam1:
        raise RankDeficient(f"eigenvalue {d} is numerically zero")
    diag = expected_squared_deviation_diagonal(P)
    Vd = vectors[:, :d]
    weighted = (Vd**2 * diag[:, None]).sum(axis=0)
    return float(np.sqrt((weighted / values[:d] ** 2).sum()))


@dataclass(frozen=True)
class BoundEnvelope:
    """The two sides of the error bound for one run.

    ``lower_term`` is the sampling floor C(P) / ||A||; ``algorithmic_term``
    is the solver's contribution tol / rho.  Their ratio diagnoses which
    source dominates: below 1 the tolerance is already inside the noise.
    """

    sampling_constant: float
    rho: float
    tolerance: float
    spectral_norm: float
    lower_term: float
    algorithmic_term: float
    ratio: float


def bound_envelope(
    sampling_constant: float, rho: float, tolerance: float, spectral_norm: float
) -> BoundEnvelope:
    """Assemble the bound envelope; rho must be strictly positive."""
    if not rho > 0.0:
        raise ZeroRho("rho must be strictly positive")
    if sampling_constant < 0.0 or tolerance < 0.0 or not spectral_norm > 0.0:
        raise DomainError("envelope terms must be nonnegative with a positive norm")
    lower = sampling_constant / spectral_norm
    algo = tolerance / rho
    ratio = algo / lower if lower > 0 else float("inf")
    return BoundEnvelope(
        sampling_constant=sampling_constant,
        rho=rho,
        tolerance=tolerance,
        spectral_norm=spectral_norm,
        lower_term=lower,
        algorithmic_term=algo,
        ratio=ratio,
    )
