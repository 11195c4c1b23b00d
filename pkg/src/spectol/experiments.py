"""Experiment harness: tolerance sweeps, clustering stability, ingestion.

Runs are driven by dataclass configs, resolve all randomness from a base
seed plus the replicate index, and emit fixed-schema CSV tables whose bytes
re-emerge identically on every rerun (timing capture is off by default for
exactly that reason) plus JSON summaries.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, EmptyGraph, ParseError
from .graph_model import (
    FactoredProbabilityMatrix,
    SbmSpec,
    SparseGraph,
    sample_adjacency,
    sbm_to_latent,
)
from .metrics import (
    adjusted_rand_index,
    choose_k_by_silhouette,
    kmeans,
    procrustes_distance,
    silhouette_width,
    zhu_ghodsi_dimension,
)
from .spectral_core import DEFAULT_MAX_RESTARTS, dense_eig_oracle, truncated_eigs
from .spectral_core import ritz_gap_rho
from .tolerance import tolerance_report

log = logging.getLogger(__name__)

DEFAULT_TOLERANCES = tuple(2.0**-k for k in range(1, 21))
SWEEP_COLUMNS = (
    "tol_exponent",
    "replicate",
    "iterations",
    "matvecs",
    "procrustes_error",
    "residual",
    "rho",
    "elapsed_ms",
)
STABILITY_COLUMNS = (
    "tol_exponent",
    "repetition",
    "k_chosen",
    "ari_vs_reference",
    "ari_vs_coarser",
    "mean_silhouette",
)
_INT_COLUMNS = {"replicate", "repetition", "iterations", "matvecs", "k_chosen"}
DIMENSION_SELECTION_METHOD = "profile_likelihood_equal_variance"


@dataclass(frozen=True)
class SweepConfig:
    """Everything one paired tolerance sweep needs.

    ``model`` is either a block model (graphs are resampled per replicate,
    spectral truth available) or a path to an edge-list file (one fixed
    graph, replicates vary the solver's starting vector only).  ``d`` is an
    embedding dimension or the string "auto" for profile-likelihood
    selection on a pilot decomposition.
    """

    model: SbmSpec | str
    d: int | str = "auto"
    tolerances: tuple[float, ...] = DEFAULT_TOLERANCES
    replicates: int = 20
    seed: int = 0
    heuristic_variant: str = "spectral"
    output: str | None = None
    scaled: bool = False
    record_timing: bool = False
    workers: int = 1
    rho_oracle_limit: int = 1500
    max_restarts: int = DEFAULT_MAX_RESTARTS

    def __post_init__(self) -> None:
        tols = tuple(float(t) for t in self.tolerances)
        if not tols or any(t <= 0 for t in tols):
            raise DomainError("tolerances must be positive")
        if any(b >= a for a, b in zip(tols, tols[1:])):
            raise DomainError("tolerances must be strictly decreasing")
        if self.replicates < 1:
            raise DomainError("at least one replicate is required")
        if self.heuristic_variant not in ("spectral", "sqrt_n"):
            raise DomainError("heuristic_variant must be 'spectral' or 'sqrt_n'")
        if self.d != "auto" and (not isinstance(self.d, int) or self.d < 1):
            raise DomainError("d must be a positive integer or 'auto'")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")
        object.__setattr__(self, "tolerances", tols)


@dataclass(frozen=True)
class SweepRecord:
    """One (tolerance, replicate) cell of a sweep table."""

    tol_exponent: float
    replicate: int
    iterations: int
    matvecs: int
    procrustes_error: float
    residual: float
    rho: float
    elapsed_ms: float
    procrustes_error_scaled: float | None = None


@dataclass(frozen=True)
class StabilityRecord:
    """One (tolerance, repetition) cell of a clustering stability table."""

    tol_exponent: float
    repetition: int
    k_chosen: int
    ari_vs_reference: float
    ari_vs_coarser: float
    mean_silhouette: float


def _pilot_dimension(graph: SparseGraph, seed) -> int:
    """Profile-likelihood elbow of a pilot decomposition's magnitude scree."""
    rank = min(20, graph.n - 2)
    if rank < 2:
        return 1
    dec = truncated_eigs(graph, rank, 1e-4, seed=seed)
    scree = np.sort(np.abs(dec.values))[::-1]
    return zhu_ghodsi_dimension(scree)


def _mean_se(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    arr = arr[~np.isnan(arr)]
    if arr.size == 0:
        return float("nan"), float("nan")
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, se


def run_tolerance_sweep(config: SweepConfig) -> tuple[list[SweepRecord], dict]:
    """Paired sweep: one graph per replicate, every tolerance on that graph.

    Within a replicate the sampled graph and the solver's starting seed are
    held fixed across tolerances, so differences down a column are purely
    the stopping rule.  Returns the records (replicate-major order) and a
    summary dict; writes CSV and summary JSON when the config names an
    output path.
    """
    if isinstance(config.model, SbmSpec):
        P = FactoredProbabilityMatrix(sbm_to_latent(config.model))
        sigma, V = P.eigendecomposition()
        fixed_graph = None
    else:
        P = None
        sigma = V = None
        fixed_graph = ingest_edge_list(config.model).graph

    if config.d == "auto":
        pilot_ss = np.random.SeedSequence(config.seed).spawn(1)[0]
        pilot_graph = (
            fixed_graph if fixed_graph is not None else sample_adjacency(P, pilot_ss)
        )
        d = _pilot_dimension(pilot_graph, pilot_ss)
        selection = DIMENSION_SELECTION_METHOD
    else:
        d = int(config.d)
        selection = "fixed"

    def one_replicate(r: int):
        ss = np.random.SeedSequence(config.seed + r)
        graph_ss, solver_ss, report_ss = ss.spawn(3)
        A = fixed_graph if fixed_graph is not None else sample_adjacency(P, graph_ss)
        dense_values = (
            dense_eig_oracle(A.to_dense())[0]
            if A.n <= config.rho_oracle_limit
            else None
        )
        report = tolerance_report(A, seed=report_ss)
        records = []
        for tol in config.tolerances:
            t0 = time.perf_counter()
            dec = truncated_eigs(
                A, d, tol, max_restarts=config.max_restarts, seed=solver_ss
            )
            elapsed_ms = (time.perf_counter() - t0) * 1e3
            if V is not None:
                err = procrustes_distance(dec.vectors, V[:, :d])[0]
            else:
                err = float("nan")
            scaled_err: float | None = None
            if config.scaled:
                if V is not None:
                    left = dec.vectors * np.sqrt(np.abs(dec.values))
                    right = V[:, :d] * np.sqrt(sigma[:d])
                    scaled_err = procrustes_distance(left, right)[0]
                else:
                    scaled_err = float("nan")
            rho = (
                ritz_gap_rho(dec.values, dense_values)
                if dense_values is not None
                else float("nan")
            )
            records.append(
                SweepRecord(
                    tol_exponent=-math.log2(tol),
                    replicate=r,
                    iterations=dec.iterations,
                    matvecs=dec.matvecs,
                    procrustes_error=err,
                    residual=dec.residual,
                    rho=rho,
                    elapsed_ms=elapsed_ms if config.record_timing else 0.0,
                    procrustes_error_scaled=scaled_err,
                )
            )
        return records, report

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            per_replicate = list(pool.map(one_replicate, range(config.replicates)))
    else:
        per_replicate = [one_replicate(r) for r in range(config.replicates)]

    records = [rec for recs, _ in per_replicate for rec in recs]
    reports = [rep for _, rep in per_replicate]

    per_tolerance = []
    for i, tol in enumerate(config.tolerances):
        cell = [recs[i] for recs, _ in per_replicate]
        mean_err, se_err = _mean_se([c.procrustes_error for c in cell])
        per_tolerance.append(
            {
                "tol_exponent": -math.log2(tol),
                "tolerance": tol,
                "mean_procrustes": mean_err,
                "se_procrustes": se_err,
                "mean_iterations": _mean_se([c.iterations for c in cell])[0],
                "mean_matvecs": _mean_se([c.matvecs for c in cell])[0],
                "mean_residual": _mean_se([c.residual for c in cell])[0],
            }
        )
    mean_spectral = _mean_se([rep.heuristic_spectral for rep in reports])[0]
    mean_sqrt_n = _mean_se([rep.heuristic_sqrt_n for rep in reports])[0]
    summary = {
        "dimension": d,
        "dimension_selection": selection,
        "replicates": config.replicates,
        "heuristic": {
            "variant": config.heuristic_variant,
            "mean_heuristic_spectral": mean_spectral,
            "mean_heuristic_sqrt_n": mean_sqrt_n,
            "mean_conservative": _mean_se([rep.conservative for rep in reports])[0],
            "recommended": mean_spectral
            if config.heuristic_variant == "spectral"
            else mean_sqrt_n,
        },
        "per_tolerance": per_tolerance,
    }
    if config.output:
        write_records_csv(config.output, records, scaled=config.scaled)
        summary_path = Path(config.output).with_suffix(".summary.json")
        summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    return records, summary


def run_clustering_stability(
    graph: SparseGraph,
    d: int,
    tolerances: tuple[float, ...] = DEFAULT_TOLERANCES,
    reference_tol: float = 1e-6,
    seed: int = 0,
    *,
    repetitions: int = 10,
    k_range=(2, 3, 4, 5, 6),
    max_restarts: int = DEFAULT_MAX_RESTARTS,
    workers: int = 1,
) -> tuple[list[StabilityRecord], dict]:
    """How stable is the embed-then-cluster pipeline under the tolerance?

    Every repetition embeds the same graph at a reference tolerance and picks
    a cluster count by silhouette there, once; each swept tolerance is then
    re-embedded with the same starting seed and re-clustered at that count,
    so the adjusted Rand index against the reference (and between consecutive
    tolerances) isolates the embedding's movement.  Re-selecting the count
    per tolerance would instead measure silhouette flips between near-tied
    counts, which persist even for fully converged embeddings.
    """
    tols = tuple(float(t) for t in tolerances)
    if not tols or any(b >= a for a, b in zip(tols, tols[1:])):
        raise DomainError("tolerances must be strictly decreasing")
    if repetitions < 1:
        raise DomainError("at least one repetition is required")

    def one_repetition(rep: int):
        ss = np.random.SeedSequence(seed + rep)
        solver_ss, cluster_ss = ss.spawn(2)
        ref_dec = truncated_eigs(
            graph, d, reference_tol, max_restarts=max_restarts, seed=solver_ss
        )
        ref_k, ref_clustering = choose_k_by_silhouette(
            ref_dec.vectors, k_range, cluster_ss
        )
        records = []
        prev_labels = None
        for tol in tols:
            dec = truncated_eigs(
                graph, d, tol, max_restarts=max_restarts, seed=solver_ss
            )
            clustering = kmeans(dec.vectors, ref_k, seed=cluster_ss)
            sil = silhouette_width(dec.vectors, clustering).mean
            ari_ref = adjusted_rand_index(clustering.labels, ref_clustering.labels)
            ari_prev = (
                adjusted_rand_index(clustering.labels, prev_labels)
                if prev_labels is not None
                else float("nan")
            )
            prev_labels = clustering.labels
            records.append(
                StabilityRecord(
                    tol_exponent=-math.log2(tol),
                    repetition=rep,
                    k_chosen=ref_k,
                    ari_vs_reference=ari_ref,
                    ari_vs_coarser=ari_prev,
                    mean_silhouette=sil,
                )
            )
        return records, ref_k

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(one_repetition, range(repetitions)))
    else:
        per_rep = [one_repetition(rep) for rep in range(repetitions)]

    records = [rec for recs, _ in per_rep for rec in recs]
    per_tolerance = []
    for i, tol in enumerate(tols):
        cell = [recs[i] for recs, _ in per_rep]
        mean_ref, se_ref = _mean_se([c.ari_vs_reference for c in cell])
        mean_prev, _ = _mean_se([c.ari_vs_coarser for c in cell])
        per_tolerance.append(
            {
                "tol_exponent": -math.log2(tol),
                "tolerance": tol,
                "mean_ari_vs_reference": mean_ref,
                "se_ari_vs_reference": se_ref,
                "mean_ari_vs_coarser": mean_prev,
                "mean_k_chosen": _mean_se([c.k_chosen for c in cell])[0],
            }
        )
    summary = {
        "dimension": d,
        "reference_tolerance": reference_tol,
        "repetitions": repetitions,
        "reference_k_per_repetition": [int(k) for _, k in per_rep],
        "per_tolerance": per_tolerance,
    }
    return records, summary


@dataclass(frozen=True)
class IngestResult:
    """A cleaned graph plus the bookkeeping of what cleaning removed."""

    graph: SparseGraph
    vertex_ids: np.ndarray
    self_loops_dropped: int
    duplicates_merged: int


def ingest_edge_list(
    path, *, comment_prefix: str = "#", indexing: str = "auto"
) -> IngestResult:
    """Read a whitespace-separated edge list into a SparseGraph.

    Lines starting with the comment prefix and blank lines are skipped;
    every other line must hold exactly two integer tokens.  Self loops are
    dropped (counted and logged), duplicate edges merged.  With "auto"
    indexing the observed ids are compacted to 0..n-1 and the original ids
    returned as the map; "zero" and "one" preserve the full id range,
    keeping isolated vertices.
    """
    if indexing not in ("auto", "zero", "one"):
        raise DomainError("indexing must be 'auto', 'zero', or 'one'")
    heads: list[int] = []
    tails: list[int] = []
    self_loops = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith(comment_prefix):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ParseError(lineno, f"expected two tokens, got {len(parts)}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(lineno, f"non-integer token in {parts!r}") from None
            if u < 0 or v < 0:
                raise ParseError(lineno, "negative vertex id")
            if indexing == "one" and 0 in (u, v):
                raise ParseError(lineno, "one-based ids start at 1")
            if u == v:
                self_loops += 1
                continue
            heads.append(u)
            tails.append(v)
    if not heads:
        raise EmptyGraph(f"no edges in {path}")
    u = np.asarray(heads, dtype=np.int64)
    v = np.asarray(tails, dtype=np.int64)
    if indexing == "auto":
        vertex_ids = np.unique(np.concatenate([u, v]))
        u = np.searchsorted(vertex_ids, u)
        v = np.searchsorted(vertex_ids, v)
        n = vertex_ids.size
    elif indexing == "zero":
        n = int(max(u.max(), v.max())) + 1
        vertex_ids = np.arange(n, dtype=np.int64)
    else:
        u = u - 1
        v = v - 1
        n = int(max(u.max(), v.max())) + 1
        vertex_ids = np.arange(1, n + 1, dtype=np.int64)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    codes = np.unique(lo * np.int64(n) + hi)
    duplicates = lo.size - codes.size
    endpoints = np.column_stack([codes // n, codes % n])
    if self_loops:
        log.warning("dropped %d self loop(s) while reading %s", self_loops, path)
    if duplicates:
        log.warning("merged %d duplicate edge(s) while reading %s", duplicates, path)
    return IngestResult(
        graph=SparseGraph.from_edges(n, endpoints),
        vertex_ids=vertex_ids,
        self_loops_dropped=self_loops,
        duplicates_merged=duplicates,
    )


def write_edge_list(path, graph: SparseGraph, *, header: dict | None = None) -> None:
    """Write one "u v" line per edge (u < v), with an optional comment header."""
    src = np.repeat(np.arange(graph.n, dtype=np.int64), graph.degrees)
    mask = graph.indices > src
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write("# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n")
        for a, b in zip(src[mask], graph.indices[mask]):
            fh.write(f"{a} {b}\n")


def _format_value(column: str, value) -> str:
    if column in _INT_COLUMNS:
        return str(int(value))
    return format(float(value), ".17g")


def write_records_csv(path, records, *, scaled: bool = False) -> None:
    """Fixed-schema CSV with floats at 17 significant digits."""
    if records and isinstance(records[0], StabilityRecord):
        columns = STABILITY_COLUMNS
    else:
        columns = SWEEP_COLUMNS + (("procrustes_error_scaled",) if scaled else ())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow(
                [_format_value(col, getattr(rec, col)) for col in columns]
            )


def read_sweep_csv(path) -> list[SweepRecord]:
    """Parse a sweep CSV back into records; floats round-trip bit-exactly."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        scaled = "procrustes_error_scaled" in header
        out = []
        for row in reader:
            data = dict(zip(header, row))
            out.append(
                SweepRecord(
                    tol_exponent=float(data["tol_exponent"]),
                    replicate=int(data["replicate"]),
                    iterations=int(data["iterations"]),
                    matvecs=int(data["matvecs"]),
                    procrustes_error=float(data["procrustes_error"]),
                    residual=float(data["residual"]),
                    rho=float(data["rho"]),
                    elapsed_ms=float(data["elapsed_ms"]),
                    procrustes_error_scaled=(
                        float(data["procrustes_error_scaled"]) if scaled else None
                    ),
                )
            )
    return out


def _parse_tolerance_token(token: str) -> float:
    token = token.strip()
    match = re.fullmatch(r"2\^(-?\d+)", token)
    if match:
        return 2.0 ** int(match.group(1))
    try:
        return float(token)
    except ValueError:
        raise DomainError(f"cannot parse tolerance {token!r}") from None


def parse_tolerances(text: str) -> tuple[float, ...]:
    """Parse "2^-1..2^-20", or a comma list of floats and 2^-k tokens."""
    text = text.strip()
    span = re.fullmatch(r"2\^-(\d+)\.\.2\^-(\d+)", text)
    if span:
        lo, hi = int(span.group(1)), int(span.group(2))
        if hi < lo:
            raise DomainError("tolerance range must move toward tighter values")
        return tuple(2.0**-k for k in range(lo, hi + 1))
    return tuple(_parse_tolerance_token(tok) for tok in text.split(","))


def _parse_block_matrix(text: str) -> np.ndarray:
    rows = [
        [float(x) for x in row.split(",") if x.strip()]
        for row in text.split(";")
        if row.strip()
    ]
    return np.asarray(rows, dtype=float)


def sweep_config_from_dict(data: dict) -> SweepConfig:
    """Build a SweepConfig from flat keys (strings allowed for every value)."""
    data = dict(data)

    def as_int(x):
        return int(x)

    def as_bool(x):
        if isinstance(x, bool):
            return x
        text = str(x).strip().lower()
        if text in ("true", "1", "yes"):
            return True
        if text in ("false", "0", "no"):
            return False
        raise DomainError(f"cannot parse boolean {x!r}")

    if "edge_list" in data:
        model: SbmSpec | str = str(data.pop("edge_list"))
        for key in ("sizes", "b", "b_diag", "b_off"):
            data.pop(key, None)
    else:
        if "sizes" not in data:
            raise DomainError("config needs either edge_list or sizes")
        sizes_raw = data.pop("sizes")
        if isinstance(sizes_raw, str):
            sizes = tuple(int(s) for s in sizes_raw.split(",") if s.strip())
        else:
            sizes = tuple(int(s) for s in sizes_raw)
        if "b" in data:
            b_raw = data.pop("b")
            B = _parse_block_matrix(b_raw) if isinstance(b_raw, str) else np.asarray(b_raw, float)
            data.pop("b_diag", None)
            data.pop("b_off", None)
        else:
            diag = float(data.pop("b_diag"))
            off = float(data.pop("b_off", 0.0))
            k = len(sizes)
            B = np.full((k, k), off) + np.eye(k) * (diag - off)
        model = SbmSpec(block_probabilities=B, sizes=sizes)

    kwargs: dict = {"model": model}
    if "d" in data or "dim" in data:
        d_raw = data.pop("d", None)
        if d_raw is None:
            d_raw = data.pop("dim")
        data.pop("dim", None)
        kwargs["d"] = "auto" if str(d_raw).strip() == "auto" else int(d_raw)
    if "tolerances" in data:
        raw = data.pop("tolerances")
        kwargs["tolerances"] = (
            parse_tolerances(raw) if isinstance(raw, str) else tuple(float(t) for t in raw)
        )
    for key, convert in (
        ("replicates", as_int),
        ("seed", as_int),
        ("workers", as_int),
        ("max_restarts", as_int),
        ("rho_oracle_limit", as_int),
        ("scaled", as_bool),
        ("record_timing", as_bool),
    ):
        if key in data:
            kwargs[key] = convert(data.pop(key))
    if "heuristic_variant" in data:
        kwargs["heuristic_variant"] = str(data.pop("heuristic_variant"))
    if "output" in data:
        kwargs["output"] = str(data.pop("output"))
    if data:
        raise DomainError(f"unknown config keys: {sorted(data)}")
    return SweepConfig(**kwargs)


def load_sweep_config(path) -> SweepConfig:
    """Load a sweep config from JSON or flat key=value text."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return sweep_config_from_dict(json.loads(text))
    data: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(lineno, "expected key=value")
        key, _, value = stripped.partition("=")
        data[key.strip()] = value.strip()
    return sweep_config_from_dict(data)
