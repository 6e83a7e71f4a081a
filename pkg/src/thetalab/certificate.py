"""
Spectral certificates for the theta function and the spectral-radius parameter.

A certificate is a symmetric matrix ``M`` with zero diagonal, ``M_ij = 1`` on
every edge and arbitrary ("free") values on non-edges. Its top eigenvalue
plus one bounds the theta function of the complement from above, and its
spectral radius bounds the radius parameter.

The certificates here are built from a *corrector* ``Z`` that shares the
eigenbasis of the +-1 adjacency matrix ``A``:

* theta variant: eigenvalue ``-lambda_i`` for the top ``cut`` eigenpairs and
  ``+lambda_i`` for the rest, so ``Z = X^- - X^+``;
* radius variant: ``eta - lambda_i`` on top and ``-eta - lambda_i`` below.

``M`` is assembled by masking: edges get the literal value 1, the diagonal
the literal value 0, and non-edge ``(i, j)`` gets ``-1 + tau * Z_ij``. For
``tau = 1`` this equals ``A + Z/2 - D_Z/2 - (Z o A)/2`` where ``D_Z`` is the
diagonal of ``Z`` and ``o`` the entrywise product.

Sign convention: the theta corrector has negative trace, about
``-(8 / 3 pi) n^{3/2}``, and its diagonal concentrates at ``-(8 / 3 pi) sqrt(n)``.
Subtracting ``D_Z / 2`` therefore shifts the spectrum *up* by about
``(4 / 3 pi) sqrt(n)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .errors import ConstraintViolationError, InvalidInputError, InvalidParameterError
from .rmt_core import (
    GraphSample,
    SpectralDecomposition,
    default_cut,
    eigh,
    sample_gnp_half,
    spectral_split,
    stream,
    symmetrize,
)

__all__ = [
    "CertificateSpec",
    "CorrectorZ",
    "Diagnostics",
    "CertificateResult",
    "LowerBoundReport",
    "build_z_theta",
    "build_z_radius",
    "assemble_m",
    "checkpoint_matrix",
    "certify",
    "run_diagnostics",
    "resample_w",
    "eigvec_cross_corr",
    "iid_baseline",
    "lower_bound_check",
    "extreme_eigenvalues",
]

VARIANTS = ("theta", "radius")
MAX_RECURSION = 2


@dataclass(frozen=True)
class CertificateSpec:
    """Which certificate to build.

    ``tau = 0`` is accepted and reproduces ``M = A``. ``eta`` defaults to
    ``(3 pi / 8) sqrt(n)`` for the radius variant and ``cut`` to ``n // 2``.
    """

    variant: str = "theta"
    tau: float = 1.0
    eta: Optional[float] = None
    recursion_depth: int = 0
    cut: Optional[int] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not np.isfinite(self.tau) or self.tau < 0:
            raise InvalidParameterError(f"tau must be a non-negative real, got {self.tau}")
        if int(self.recursion_depth) != self.recursion_depth or not 0 <= self.recursion_depth <= MAX_RECURSION:
            raise InvalidParameterError(f"recursion_depth must be in [0, {MAX_RECURSION}], got {self.recursion_depth}")
        if self.eta is not None and not (np.isfinite(self.eta) and self.eta > 0):
            raise InvalidParameterError(f"eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class CorrectorZ:
    """Eigenvalues ``alphas`` of ``Z`` in the eigenbasis of ``A``, and ``Z`` itself."""

    alphas: np.ndarray
    dense: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.dense)


@dataclass
class Diagnostics:
    """Identity and concentration statistics of one graph and its corrector.

    Averages run over ordered off-diagonal pairs. ``free`` means non-edge.
    An average over an empty index set is ``None`` and its name is listed
    in ``undefined``.

    ``f(k)`` and ``g(k)`` sum ``u_ki u_kj`` over edges and non-edges; each
    diagonal term ``u_ki^2`` is split evenly between them, which makes both
    ``f - g = lambda_k`` and ``f + g = <1, u_k>^2`` exact.
    """

    avg_free_Xplus: Optional[float]
    avg_nonfree_Xplus: Optional[float]
    avg_free_Xminus: Optional[float]
    avg_nonfree_Xminus: Optional[float]
    avg_free_Z: Optional[float]
    avg_nonfree_Z: Optional[float]
    diag_Z_mean: float
    diag_Z_std: float
    diag_Z_max_dev: float
    fg_identity_max_err: float
    fg_plus_g_max: float
    fg_sum_identity_max_err: float
    row_norm_min: float
    row_norm_max: float
    max_abs_entry_Z: float
    trace_Z: float
    trace_Xplus: float
    undefined: Tuple[str, ...] = ()


@dataclass
class CertificateResult:
    M: np.ndarray
    lambda1: float
    lambdan: float
    spec: CertificateSpec
    n: int
    seed: Optional[int]
    diagnostics: Optional[Diagnostics] = None
    checkpoint_lambda1: Optional[float] = None
    runtime_seconds: float = 0.0

    @property
    def sigma1(self) -> float:
        return max(self.lambda1, -self.lambdan)

    @property
    def lambda1_norm(self) -> float:
        return self.lambda1 / np.sqrt(self.n)

    @property
    def sigma1_norm(self) -> float:
        return self.sigma1 / np.sqrt(self.n)

    @property
    def theta_upper(self) -> float:
        """Bound on the theta function in the diagonal-one convention."""
        return self.lambda1 + 1.0

    @property
    def checkpoint_norm(self) -> Optional[float]:
        if self.checkpoint_lambda1 is None:
            return None
        return self.checkpoint_lambda1 / np.sqrt(self.n)


def extreme_eigenvalues(m: np.ndarray) -> Tuple[float, float]:
    """``(lambda_1, lambda_n)`` of a symmetric matrix."""
    w = np.linalg.eigvalsh(m)
    return float(w[-1]), float(w[0])


def _cut(d: SpectralDecomposition, cut: Optional[int]) -> int:
    cut = default_cut(d.n) if cut is None else cut
    if int(cut) != cut or not 0 <= cut <= d.n:
        raise InvalidParameterError(f"cut must lie in [0, {d.n}], got {cut}")
    return int(cut)


def build_z_theta(d: SpectralDecomposition, cut: Optional[int] = None) -> CorrectorZ:
    """Theta corrector: ``alpha_i = -lambda_i`` for ``i < cut``, ``+lambda_i`` otherwise."""
    cut = _cut(d, cut)
    alphas = d.eigenvalues.copy()
    alphas[:cut] *= -1.0
    return CorrectorZ(alphas=alphas, dense=d.with_eigenvalues(alphas))


def build_z_radius(d: SpectralDecomposition, eta: Optional[float] = None, cut: Optional[int] = None) -> CorrectorZ:
    """Radius corrector: ``alpha_i = eta - lambda_i`` on top, ``-eta - lambda_i`` below."""
    cut = _cut(d, cut)
    if eta is None:
        eta = 3.0 * np.pi / 8.0 * np.sqrt(d.n)
    if not (np.isfinite(eta) and eta > 0):
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    shift = np.where(np.arange(d.n) < cut, eta, -eta)
    alphas = shift - d.eigenvalues
    return CorrectorZ(alphas=alphas, dense=d.with_eigenvalues(alphas))


def _dense(z: Union[CorrectorZ, np.ndarray]) -> np.ndarray:
    return z.dense if isinstance(z, CorrectorZ) else np.asarray(z, dtype=float)


def assemble_m(g: GraphSample, z: Union[CorrectorZ, np.ndarray], tau: float = 1.0) -> np.ndarray:
    """Certificate matrix: 1 on edges, 0 on the diagonal, ``-1 + tau Z_ij`` elsewhere."""
    zd = _dense(z)
    if zd.shape != g.adjacency.shape:
        raise InvalidInputError(f"corrector shape {zd.shape} does not match graph of order {g.n}")
    m = np.where(g.edge_mask, 1.0, -1.0 + tau * zd)
    np.fill_diagonal(m, 0.0)
    return m


def checkpoint_matrix(g: GraphSample, z: Union[CorrectorZ, np.ndarray]) -> np.ndarray:
    """``A + Z/2 - D_Z/2``: the certificate before the ``Z o A`` correction."""
    zd = _dense(z)
    out = g.adjacency + 0.5 * zd
    out[np.diag_indices_from(out)] -= 0.5 * np.diag(zd)
    return out


def _masked_mean(x: np.ndarray, mask: np.ndarray) -> Optional[float]:
    count = np.count_nonzero(mask)
    if count == 0:
        return None
    return float(x[mask].sum() / count)


def run_diagnostics(g: GraphSample, d: SpectralDecomposition, z: CorrectorZ, cut: Optional[int] = None) -> Diagnostics:
    n = g.n
    cut = _cut(d, cut)
    xplus, xminus = spectral_split(d, cut)
    edge = g.edge_mask
    free = g.free_mask
    avgs = {
        "avg_free_Xplus": _masked_mean(xplus, free),
        "avg_nonfree_Xplus": _masked_mean(xplus, edge),
        "avg_free_Xminus": _masked_mean(xminus, free),
        "avg_nonfree_Xminus": _masked_mean(xminus, edge),
        "avg_free_Z": _masked_mean(z.dense, free),
        "avg_nonfree_Z": _masked_mean(z.dense, edge),
    }
    undefined = tuple(k for k, v in avgs.items() if v is None)

    v = d.eigenvectors
    half_diag = 0.5 * np.einsum("ik,ik->k", v, v)
    f = np.einsum("ik,ik->k", v, edge.astype(float) @ v) + half_diag
    gk = np.einsum("ik,ik->k", v, free.astype(float) @ v) + half_diag
    ones_proj = v.sum(axis=0) ** 2

    zd = z.dense
    diag = np.diag(zd)
    off = zd - np.diag(diag)
    row_norms = np.linalg.norm(off, axis=1)
    return Diagnostics(
        **avgs,
        diag_Z_mean=float(diag.mean()),
        diag_Z_std=float(diag.std()),
        diag_Z_max_dev=float(np.max(np.abs(diag - diag.mean()))),
        fg_identity_max_err=float(np.max(np.abs(f - gk - d.eigenvalues))),
        fg_plus_g_max=float(np.max(f + gk)),
        fg_sum_identity_max_err=float(np.max(np.abs(f + gk - ones_proj))),
        row_norm_min=float(row_norms.min()),
        row_norm_max=float(row_norms.max()),
        max_abs_entry_Z=float(np.max(np.abs(off))) if n > 1 else 0.0,
        trace_Z=float(np.trace(zd)),
        trace_Xplus=float(np.trace(xplus)),
        undefined=undefined,
    )


def _build_z(d: SpectralDecomposition, spec: CertificateSpec) -> CorrectorZ:
    if spec.variant == "theta":
        return build_z_theta(d, spec.cut)
    return build_z_radius(d, spec.eta, spec.cut)


def certify(
    g: GraphSample,
    spec: CertificateSpec = CertificateSpec(),
    decomposition: Optional[SpectralDecomposition] = None,
    diagnostics: bool = True,
) -> CertificateResult:
    """Build, assemble and evaluate one certificate.

    With ``recursion_depth = r > 0`` the assembled matrix is re-split ``r``
    times: from the current certificate ``M`` with bottom spectral part
    ``M^-`` (the ``n - cut`` smallest eigenpairs) the next corrector is
    ``2 M^- - A``, which is the same rule that produced the first corrector
    from ``A`` (``Z = 2 X^- - A``), and it is reassembled against the
    original graph. The free entries of the new certificate are then
    ``2 M^-_ij`` when ``tau = 1``.

    ``decomposition`` may pass a precomputed ``eigh(g.adjacency)``.
    """
    start = time.perf_counter()
    d = decomposition if decomposition is not None else eigh(g.adjacency)
    z = _build_z(d, spec)
    m = assemble_m(g, z, spec.tau)
    cut = _cut(d, spec.cut)
    for _ in range(spec.recursion_depth):
        dm = eigh(m)
        z_next = symmetrize(2.0 * dm.reconstruct(cut, dm.n) - g.adjacency)
        m = assemble_m(g, z_next, spec.tau)
    lam1, lamn = extreme_eigenvalues(m)
    diag = run_diagnostics(g, d, z, cut) if diagnostics else None
    checkpoint = extreme_eigenvalues(checkpoint_matrix(g, z))[0] if spec.variant == "theta" else None
    return CertificateResult(
        M=m,
        lambda1=lam1,
        lambdan=lamn,
        spec=spec,
        n=g.n,
        seed=g.seed,
        diagnostics=diag,
        checkpoint_lambda1=checkpoint,
        runtime_seconds=time.perf_counter() - start,
    )


def resample_w(d: SpectralDecomposition, z: Union[CorrectorZ, np.ndarray], seed: int, trial: int = 0) -> np.ndarray:
    """Flip the sign of each off-diagonal pair of ``Z`` by an independent fair coin; zero diagonal."""
    zd = _dense(z)
    n = zd.shape[0]
    if n != d.n:
        raise InvalidInputError("decomposition and corrector have different dimensions")
    rng = stream(seed, "resample", trial)
    iu = np.triu_indices(n, 1)
    signs = 2.0 * rng.integers(0, 2, size=iu[0].size, dtype=np.int8) - 1.0
    w = np.zeros((n, n))
    w[iu] = signs * zd[iu]
    return w + w.T


def eigvec_cross_corr(d1: SpectralDecomposition, d2: SpectralDecomposition) -> float:
    """Largest ``|<u_i, w_j>|`` between the two eigenbases."""
    if d1.n != d2.n:
        raise InvalidInputError(f"dimension mismatch: {d1.n} vs {d2.n}")
    return float(np.max(np.abs(d1.eigenvectors.T @ d2.eigenvectors)))


DISTRIBUTIONS = ("constant", "gaussian", "uniform")


def iid_baseline(n: int, phi: float, psi: float, dist: str, seed: int, trial: int = 0) -> float:
    """``lambda_1`` of a certificate whose free entries are iid with mean ``phi`` and std ``psi``.

    The graph is ``sample_gnp_half(n, seed)``, so ``phi = -1, psi = 0``
    returns ``lambda_1`` of the adjacency matrix itself.
    """
    if dist not in DISTRIBUTIONS:
        raise InvalidParameterError(f"dist must be one of {DISTRIBUTIONS}, got {dist!r}")
    if not (np.isfinite(phi) and np.isfinite(psi)) or psi < 0:
        raise InvalidParameterError(f"need finite phi and psi >= 0, got phi={phi}, psi={psi}")
    if dist == "constant" and psi != 0:
        raise InvalidParameterError("a constant law has psi = 0")
    g = sample_gnp_half(n, seed)
    iu = np.triu_indices(n, 1)
    if dist == "constant":
        vals = np.full(iu[0].size, float(phi))
    else:
        rng = stream(seed, "iid", trial)
        if dist == "gaussian":
            vals = phi + psi * rng.standard_normal(iu[0].size)
        else:
            half = np.sqrt(3.0) * psi
            vals = rng.uniform(phi - half, phi + half, size=iu[0].size)
    upper = np.zeros((n, n))
    upper[iu] = vals
    free_vals = upper + upper.T
    m = np.where(g.edge_mask, 1.0, free_vals)
    np.fill_diagonal(m, 0.0)
    return extreme_eigenvalues(m)[0]


@dataclass
class LowerBoundReport:
    """Numbers behind the Frobenius-norm lower bound on the spectral radius.

    ``lhs = sigma_1(M) * sum_k |lambda_k(A)|`` and ``rhs = n^2 - n - C n^{3/2}``.
    ``hw_slack`` is ``sum lambda_i(M - A)^2 - sum (lambda_i(M) - lambda_i(A))^2``,
    non-negative by the Hoffman-Wielandt inequality.
    """

    lhs: float
    rhs: float
    bound_ok: bool
    hw_slack: float
    hw_ok: bool
    edge_sum_ok: bool
    sigma_ok: bool
    half_sums_ok: bool
    sigma1_M: float
    details: dict = field(default_factory=dict)

    @property
    def typical_ok(self) -> bool:
        return self.edge_sum_ok and self.sigma_ok and self.half_sums_ok


def lower_bound_check(
    g: GraphSample,
    m: np.ndarray,
    C: float = 10.0,
    sigma_factor: float = 2.1,
    half_sum_rel_tol: float = 0.05,
    decomposition: Optional[SpectralDecomposition] = None,
) -> LowerBoundReport:
    """Check the Hoffman-Wielandt based bound and the typicality conditions for ``(g, M)``.

    Raises :class:`ConstraintViolationError` unless ``M`` has a zero diagonal
    and the literal value 1 on every edge.
    """
    m = np.asarray(m, dtype=float)
    n = g.n
    if m.shape != (n, n):
        raise InvalidInputError(f"M has shape {m.shape}, graph has order {n}")
    if np.any(np.diag(m) != 0) or np.any(m[g.edge_mask] != 1.0):
        raise ConstraintViolationError("M must have zero diagonal and 1 on every edge")
    d = decomposition if decomposition is not None else eigh(g.adjacency)
    lam_a = d.eigenvalues
    lam_m = np.linalg.eigvalsh(m)[::-1]
    lam_diff = np.linalg.eigvalsh(m - g.adjacency)
    sigma1 = float(max(lam_m[0], -lam_m[-1]))
    hw_slack = float(np.sum(lam_diff**2) - np.sum((lam_m - lam_a) ** 2))
    lhs = sigma1 * float(np.sum(np.abs(lam_a)))
    rhs = n * n - n - C * n**1.5
    cut = default_cut(n)
    target = 4.0 / (3.0 * np.pi) * n**1.5
    top_sum = float(lam_a[:cut].sum())
    bottom_sum = float(lam_a[cut:].sum())
    edge_sum = float(g.adjacency.sum())
    sigma_a = float(max(lam_a[0], -lam_a[-1]))
    return LowerBoundReport(
        lhs=lhs,
        rhs=rhs,
        bound_ok=lhs >= rhs,
        hw_slack=hw_slack,
        hw_ok=hw_slack >= -1e-6 * n * n,
        edge_sum_ok=abs(edge_sum) <= n**1.5,
        sigma_ok=sigma_a <= sigma_factor * np.sqrt(n),
        half_sums_ok=abs(top_sum - target) <= half_sum_rel_tol * target and abs(bottom_sum + target) <= half_sum_rel_tol * target,
        sigma1_M=sigma1,
        details={"edge_sum": edge_sum, "sigma1_A": sigma_a, "top_half_sum": top_sum, "bottom_half_sum": bottom_sum},
    )
