"""Reset Markov chain over the reset window B_tau.

The chain tracks the price offset from the last reset center. Any move that
exits B_tau triggers a reallocation centered on the new price, which the
chain models as a transition back to the center state: M(i, j) = f(i, j) for
j != 0 and M(i, 0) = f(i, 0) + g(i), where f(i, j) = h(j - i) and
g(i) = 1 - sum_{j in B_tau} f(i, j).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .distribution import NextPriceDistribution
from .errors import InputError, NumericalError, RangeError

__all__ = [
    "ResetChain",
    "OutcomeMatrix",
    "transition_prob",
    "reset_prob",
    "build_reset_chain",
    "stationary_distribution",
    "outcome_matrix",
    "landing_distribution",
    "landing_over",
]

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10


@dataclass(frozen=True)
class ResetChain:
    """Transition matrix over B_tau plus its stationary distribution p_tau."""

    n_tau: int
    M: np.ndarray
    stationary: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "n_tau": int(self.n_tau),
            "matrix": self.M.tolist(),
            "stationary": self.stationary.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class OutcomeMatrix:
    """O(i, j) = f(i, j) over i in B_tau, j in B_alpha. Row sums may be < 1."""

    n_tau: int
    n_alpha: int
    O: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "n_tau": int(self.n_tau),
            "n_alpha": int(self.n_alpha),
            "matrix": self.O.tolist(),
        }


def transition_prob(dist: NextPriceDistribution, i: int, j: int) -> float:
    """f(i, j) = h(j - i); zero when the move exceeds the support."""
    return dist.prob(j - i)


def reset_prob(dist: NextPriceDistribution, n_tau: int, i: int) -> float:
    """g(i) = 1 - sum_{j in B_tau} f(i, j), the per-step reset probability."""
    if abs(i) > n_tau:
        raise RangeError(f"offset {i} outside B_tau (n_tau={n_tau})")
    inside = sum(dist.prob(j - i) for j in range(-n_tau, n_tau + 1))
    return min(max(1.0 - inside, 0.0), 1.0)


def _f_block(dist: NextPriceDistribution, n_rows: int, n_cols: int) -> np.ndarray:
    """Matrix of f(i, j) for i in [-n_rows, n_rows], j in [-n_cols, n_cols]."""
    i = np.arange(-n_rows, n_rows + 1)[:, None]
    j = np.arange(-n_cols, n_cols + 1)[None, :]
    return dist.prob_array(j - i)


def build_reset_chain(dist: NextPriceDistribution, n_tau: int) -> ResetChain:
    if n_tau < 0:
        raise InputError(f"n_tau must be >= 0, got {n_tau}")
    M = _f_block(dist, n_tau, n_tau)
    g = 1.0 - M.sum(axis=1)
    M[:, n_tau] += np.maximum(g, 0.0)
    p = stationary_distribution(M)
    return ResetChain(n_tau=n_tau, M=M, stationary=p)


def stationary_distribution(M: np.ndarray, max_iters: int = 100_000) -> np.ndarray:
    """Left fixed point p M = p, normalized to sum 1.

    Direct linear solve of (M^T - I) p = 0 with the normalization row
    appended; falls back to power iteration if the solve is singular or
    leaves a residual above tolerance.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise InputError(f"matrix must be square, got {M.shape}")
    if np.any(np.abs(M.sum(axis=1) - 1.0) > ROW_SUM_TOL):
        raise InputError("matrix rows must sum to 1")

    A = M.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        p = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        p = np.full(n, np.nan)

    if not _is_valid_stationary(p, M):
        p = np.full(n, 1.0 / n)
        for _ in range(max_iters):
            nxt = p @ M
            if np.max(np.abs(nxt - p)) < STATIONARY_TOL / 10:
                p = nxt
                break
            p = nxt
        p = np.maximum(p, 0.0)
        p /= p.sum()
        if not _is_valid_stationary(p, M):
            resid = float(np.max(np.abs(p @ M - p)))
            raise NumericalError(
                f"stationary distribution did not converge (residual {resid:.3e})"
            )
    return p


def _is_valid_stationary(p: np.ndarray, M: np.ndarray) -> bool:
    if not np.all(np.isfinite(p)):
        return False
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        return False
    p = np.maximum(p, 0.0)
    return float(np.max(np.abs(p @ M - p))) < STATIONARY_TOL


def outcome_matrix(
    dist: NextPriceDistribution, n_tau: int, n_alpha: int
) -> OutcomeMatrix:
    if n_tau < 0 or n_alpha < 0:
        raise InputError("n_tau and n_alpha must be >= 0")
    return OutcomeMatrix(n_tau=n_tau, n_alpha=n_alpha, O=_f_block(dist, n_tau, n_alpha))


def landing_distribution(chain: ResetChain, O: OutcomeMatrix) -> np.ndarray:
    """q(j) = sum_i p_tau(i) f(i, j); sum q <= 1, deficit = mass beyond B_alpha."""
    if chain.n_tau != O.n_tau:
        raise InputError(
            f"chain n_tau {chain.n_tau} != outcome matrix n_tau {O.n_tau}"
        )
    return chain.stationary @ O.O


def landing_over(
    dist: NextPriceDistribution, chain: ResetChain, js: np.ndarray
) -> np.ndarray:
    """q(j) over arbitrary relative offsets js."""
    i = np.arange(-chain.n_tau, chain.n_tau + 1)[:, None]
    F = dist.prob_array(np.asarray(js)[None, :] - i)
    return chain.stationary @ F
