"""Projected subgradient descent over the free entries of a certificate.

Ground truth for small graphs: minimizes ``lambda_1(M)`` (or the spectral
radius) over symmetric ``M`` with zero diagonal and ``M_ij = 1`` on edges.
Every iterate is feasible because only free entries are ever updated, so
the best value seen is always a valid upper bound.

Steps are measured in eigenvalue units. With subgradient ``G`` (the
averaged top eigenprojector restricted to free entries) the update is
``M <- M - t_k G / ||G||_F^2``, whose first-order effect on ``lambda_1`` is
a decrease of exactly ``t_k``. ``t_k = c / k`` (``inverse_k``) or ``t_k = c``
(``fixed``), with ``c = sqrt(n) / 10`` unless given.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InvalidParameterError, NumericalFailureError
from .rmt_core import GraphSample, symmetrize

__all__ = ["OptConfig", "OptResult", "minimize", "MAX_N"]

MAX_N = 1000
STEP_RULES = ("inverse_k", "fixed")
INITIALS = ("adjacency", "zeros_on_free")
OBJECTIVES = ("lambda1", "spectral_radius")


@dataclass(frozen=True)
class OptConfig:
    """Solver settings.

    ``cluster_tol`` decides which eigenvalues count as tied with the extreme
    one; the subgradient averages the outer products of all of them.
    Stopping happens after ``max_iters`` or once the best value improved by
    less than ``tol_stall`` over the last ``stall_window`` iterations.
    """

    max_iters: int = 5000
    step_rule: str = "inverse_k"
    step_size: Optional[float] = None
    initial: str = "adjacency"
    tol_stall: float = 1e-5
    stall_window: int = 200
    objective: str = "lambda1"
    cluster_tol: float = 1e-8

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidParameterError("max_iters must be a positive integer")
        if self.step_rule not in STEP_RULES:
            raise InvalidParameterError(f"step_rule must be one of {STEP_RULES}")
        if self.initial not in INITIALS:
            raise InvalidParameterError(f"initial must be one of {INITIALS}")
        if self.objective not in OBJECTIVES:
            raise InvalidParameterError(f"objective must be one of {OBJECTIVES}")
        if self.step_size is not None and not self.step_size > 0:
            raise InvalidParameterError("step_size must be positive")
        if self.cluster_tol < 0 or self.tol_stall < 0 or self.stall_window < 1:
            raise InvalidParameterError("tolerances must be non-negative and the stall window positive")


@dataclass
class OptResult:
    """``value`` is the best objective seen, reported as ``lambda_1(M) + 1``
    in ``lambda1`` mode and as ``rho(M)`` of the zero-diagonal matrix in
    ``spectral_radius`` mode. ``history[k]`` is the best value after ``k + 1``
    evaluations, so it never increases.
    """

    value: float
    M: np.ndarray
    history: List[float]
    initial_value: float
    iterations: int
    stalled: bool = False

    def __iter__(self):
        return iter((self.value, self.M, self.history))


def _objective(w: np.ndarray, objective: str) -> float:
    if objective == "lambda1":
        return float(w[-1]) + 1.0
    return float(max(w[-1], -w[0]))


def _subgradient(w, v, free, objective, tol):
    def proj(cols):
        u = v[:, cols]
        return (u @ u.T) / u.shape[1]

    top = np.nonzero(w >= w[-1] - tol)[0]
    if objective == "lambda1":
        g = proj(top)
    else:
        bottom = np.nonzero(w <= w[0] + tol)[0]
        hi, lo = w[-1], -w[0]
        if abs(hi - lo) <= tol:
            g = 0.5 * (proj(top) - proj(bottom))
        elif hi > lo:
            g = proj(top)
        else:
            g = -proj(bottom)
    return np.where(free, symmetrize(g), 0.0)


def minimize(g: GraphSample, cfg: OptConfig = OptConfig()) -> OptResult:
    n = g.n
    if n > MAX_N:
        raise InvalidParameterError(f"the optimizer is meant for n <= {MAX_N}, got {n}")
    free = g.free_mask
    m = np.array(g.adjacency, dtype=float)
    if cfg.initial == "zeros_on_free":
        m[free] = 0.0
    if not free.any():
        # The feasible set is the single matrix J - I, whose eigenvalues are n - 1 and -1.
        value = float(n) if cfg.objective == "lambda1" else float(n - 1)
        return OptResult(value=value, M=m, history=[value], initial_value=value, iterations=0)

    c = cfg.step_size if cfg.step_size is not None else np.sqrt(n) / 10.0
    best = np.inf
    best_m = m.copy()
    history: List[float] = []
    initial_value = None
    stalled = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        try:
            w, v = np.linalg.eigh(m)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError(f"eigendecomposition failed at iteration {k}", dimension=n) from exc
        val = _objective(w, cfg.objective)
        if initial_value is None:
            initial_value = val
        if val < best:
            best = val
            best_m = m.copy()
        history.append(best)
        if k > cfg.stall_window and history[-cfg.stall_window - 1] - best < cfg.tol_stall:
            stalled = True
            break
        if k == cfg.max_iters:
            break
        grad = _subgradient(w, v, free, cfg.objective, cfg.cluster_tol)
        norm2 = float(np.sum(grad * grad))
        if norm2 == 0.0:
            break
        step = c / k if cfg.step_rule == "inverse_k" else c
        m = m - (step / norm2) * grad
    return OptResult(value=best, M=best_m, history=history, initial_value=initial_value, iterations=k, stalled=stalled)
