"""
Random graphs and matrices with reproducible seeding, plus the symmetric
eigendecomposition used by every other module.

Seeding
-------
Every random draw comes from :func:`stream`, which maps a 64-bit user seed,
a *purpose* tag and a trial index to an independent Philox stream via
:class:`numpy.random.SeedSequence`. Philox is counter based, so the bits
produced for a given ``(seed, purpose, trial)`` are the same on every
platform and do not depend on how trials are scheduled.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Helpers that
build symmetric matrices from floating-point products call
:func:`symmetrize`, which makes ``A[i, j]`` and ``A[j, i]`` bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidInputError,
    InvalidParameterError,
    NumericalFailureError,
)

__all__ = [
    "PURPOSES",
    "stream",
    "symmetrize",
    "GraphSample",
    "SpectralDecomposition",
    "sample_gnp_half",
    "plant_clique",
    "graph_from_adjacency",
    "sample_goe",
    "eigh",
    "spectral_split",
    "default_cut",
]

_SEED_LIMIT = 2**64

#: Purpose tags for :func:`stream`. New purposes must be appended so that
#: existing streams keep their identity.
PURPOSES = {
    "graph": 0,
    "clique": 1,
    "goe": 2,
    "resample": 3,
    "iid": 4,
}


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream(seed: int, purpose: str, trial: int = 0) -> np.random.Generator:
    """Independent generator for one ``(seed, purpose, trial)`` triple."""
    if purpose not in PURPOSES:
        raise InvalidParameterError(f"unknown stream purpose {purpose!r}")
    if trial < 0:
        raise InvalidParameterError("trial index must be non-negative")
    ss = np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=(PURPOSES[purpose], int(trial)))
    return np.random.Generator(np.random.Philox(ss))


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return ``(a + a.T) / 2``; the result is exactly symmetric."""
    return (a + a.T) * 0.5


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GraphSample:
    """A graph stored as its +-1 adjacency matrix with zero diagonal.

    ``model`` is ``"gnp_half"``, ``"planted(k)"`` or ``"given"`` for graphs
    built by :func:`graph_from_adjacency`.
    """

    adjacency: np.ndarray
    seed: Optional[int]
    model: str = "gnp_half"
    planted_set: Optional[Tuple[int, ...]] = None

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_mask(self) -> np.ndarray:
        """Boolean mask of ordered pairs ``(i, j)`` with ``i != j`` that are edges."""
        return self.adjacency > 0

    @property
    def free_mask(self) -> np.ndarray:
        """Boolean mask of ordered non-edge pairs, the entries a certificate may choose."""
        return self.adjacency < 0

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(self.edge_mask)) // 2


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {n}")
    return int(n)


def sample_gnp_half(n: int, seed: int) -> GraphSample:
    """Sample G(n, 1/2) as a +-1 adjacency matrix.

    Each unordered pair is an edge (+1) or a non-edge (-1) with probability
    one half, independently. The draw order is the row-major order of the
    strict upper triangle.
    """
    n = _check_n(n)
    rng = stream(seed, "graph")
    iu = np.triu_indices(n, 1)
    bits = rng.integers(0, 2, size=iu[0].size, dtype=np.int8)
    a = np.zeros((n, n))
    a[iu] = 2.0 * bits - 1.0
    a = a + a.T
    return GraphSample(_freeze(a), seed=_check_seed(seed), model="gnp_half")


def graph_from_adjacency(adjacency, seed: Optional[int] = None) -> GraphSample:
    """Wrap an explicit +-1 adjacency matrix, validating its structure."""
    a = np.array(adjacency, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidDimensionError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise InvalidInputError("adjacency must be symmetric")
    if np.any(np.diag(a) != 0):
        raise InvalidInputError("adjacency must have a zero diagonal")
    off = ~np.eye(a.shape[0], dtype=bool)
    if not np.all(np.abs(a[off]) == 1):
        raise InvalidInputError("off-diagonal adjacency entries must be +1 or -1")
    return GraphSample(_freeze(a), seed=seed, model="given")


def plant_clique(g: GraphSample, k: int, seed: int) -> GraphSample:
    """Turn a uniformly random ``k``-subset of vertices into a clique."""
    n = g.n
    if int(k) != k or not 1 <= k <= n:
        raise InvalidParameterError(f"clique size must satisfy 1 <= k <= n = {n}, got {k}")
    rng = stream(seed, "clique")
    members = np.sort(rng.choice(n, size=int(k), replace=False))
    a = np.array(g.adjacency)
    block = np.ix_(members, members)
    a[block] = 1.0
    a[members, members] = 0.0
    return GraphSample(
        _freeze(a),
        seed=g.seed,
        model=f"planted({int(k)})",
        planted_set=tuple(int(i) for i in members),
    )


def sample_goe(n: int, seed: int) -> np.ndarray:
    """GOE sample: N(0, 1) off the diagonal, N(0, 2) on it."""
    n = _check_n(n)
    rng = stream(seed, "goe")
    iu = np.triu_indices(n, 1)
    off = rng.standard_normal(iu[0].size)
    diag = rng.standard_normal(n) * np.sqrt(2.0)
    x = np.zeros((n, n))
    x[iu] = off
    x = x + x.T
    x[np.diag_indices(n)] = diag
    return x


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order and matching orthonormal eigenvectors.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``. The first
    coordinate of each eigenvector whose magnitude exceeds ``1e-12`` is
    positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_frobenius: float
    source_trace: float = field(default=0.0)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self, lo: int = 0, hi: Optional[int] = None) -> np.ndarray:
        """Materialize ``sum_{lo <= i < hi} lambda_i u_i u_i^T``."""
        hi = self.n if hi is None else hi
        v = self.eigenvectors[:, lo:hi]
        return symmetrize((v * self.eigenvalues[lo:hi]) @ v.T)

    def with_eigenvalues(self, values) -> np.ndarray:
        """Materialize ``sum_i values[i] u_i u_i^T`` in this eigenbasis."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.eigenvalues.shape:
            raise InvalidInputError("need one value per eigenvector")
        v = self.eigenvectors
        return symmetrize((v * values) @ v.T)


def _condition_estimate(a: np.ndarray) -> float:
    try:
        return float(np.linalg.cond(a, 1))
    except np.linalg.LinAlgError:
        return float("inf")


def eigh(a) -> SpectralDecomposition:
    """Full symmetric eigendecomposition (LAPACK via :func:`numpy.linalg.eigh`).

    Raises :class:`InvalidInputError` for non-finite or non-square input and
    :class:`NumericalFailureError` if LAPACK does not converge.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidInputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(
            f"eigendecomposition failed for n={a.shape[0]}: {exc}",
            dimension=a.shape[0],
            condition=_condition_estimate(a),
        ) from exc
    w = np.ascontiguousarray(w[::-1])
    v = np.ascontiguousarray(v[:, ::-1])
    big = np.abs(v) > 1e-12
    first = np.argmax(big, axis=0)
    signs = np.sign(v[first, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    v *= signs
    return SpectralDecomposition(
        eigenvalues=_freeze(w),
        eigenvectors=_freeze(v),
        source_frobenius=float(np.linalg.norm(a)),
        source_trace=float(np.trace(a)),
    )


def default_cut(n: int) -> int:
    """Split index used throughout: ``floor(n / 2)``."""
    return n // 2


def spectral_split(d: SpectralDecomposition, cut: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Split a matrix into the parts spanned by its top ``cut`` and remaining eigenpairs."""
    cut = default_cut(d.n) if cut is None else cut
    if int(cut) != cut or not 0 <= cut <= d.n:
        raise InvalidParameterError(f"cut must lie in [0, {d.n}], got {cut}")
    return d.reconstruct(0, cut), d.reconstruct(cut, d.n)
