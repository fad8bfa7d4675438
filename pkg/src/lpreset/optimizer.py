"""Exact simplex-constrained maximization of CARA expected utility.

The objective sum_j q_j * u(kappa*ell*A_j - fee_j + shift) splits by risk
attitude:

* a > 0 (strictly concave): the KKT equalization condition inverts in closed
  form, giving a water-filling allocation with the multiplier found by
  bisection in log space.
* a = 0 (linear): the optimum is the vertex with the largest landing
  probability.
* a < 0 (convex): the maximum lies at a vertex of the simplex; all vertices
  are enumerated.

A projected-gradient ascent is provided as an independent verifier for
a >= 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .utility import Allocation, UtilityParams, exp_utility_vec

__all__ = [
    "OptimizationProblem",
    "Solution",
    "solve",
    "kkt_residual",
    "projected_gradient_verify",
    "project_simplex",
]

BISECT_ITERS = 200
BISECT_TOL = 1e-14
ACTIVE_TOL = 1e-12


@dataclass(frozen=True)
class OptimizationProblem:
    """Landing probabilities q over B_alpha plus reward/utility parameters.

    ``tau_membership[j]`` marks bins inside B_tau (no reset fee).
    """

    q: np.ndarray
    tau_membership: np.ndarray
    params: UtilityParams

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float)
        tau = np.asarray(self.tau_membership, dtype=bool)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "tau_membership", tau)
        if q.ndim != 1 or q.shape != tau.shape:
            raise InputError("q and tau_membership must be 1-d and share a length")
        if q.shape[0] % 2 != 1:
            raise InputError("bin count must be odd (2*n_alpha + 1)")
        if np.any(q < 0):
            raise InputError("landing probabilities must be non-negative")
        if not np.any(q > 0):
            raise InputError("q must not be identically zero")

    @property
    def n_alpha(self) -> int:
        return (self.q.shape[0] - 1) // 2

    def _consumption(self, weights: np.ndarray) -> np.ndarray:
        """Utility argument per bin: reward plus the a != 0 shift."""
        p = self.params
        c = p.kappa * p.ell * weights + p.shift
        c[~self.tau_membership] -= 1.0
        return c

    def objective(self, weights: np.ndarray) -> float:
        """Expected utility of the weights under this problem's landing law."""
        return float(self.q @ exp_utility_vec(self._consumption(weights), self.params))

    def gradient(self, weights: np.ndarray) -> np.ndarray:
        """dE_u/dA_j = q_j * kappa * ell * u'(c_j)."""
        p = self.params
        scale = p.kappa * p.ell
        if p.a == 0.0:
            return self.q * scale
        return self.q * scale * np.exp(-p.a * self._consumption(weights))


@dataclass(frozen=True)
class Solution:
    allocation: Allocation
    objective: float
    kkt_residual: float
    iterations: int
    method: str
    converged: bool = True

    def to_json_dict(self) -> dict:
        return {
            "weights": [float(w) for w in self.allocation.weights],
            "n_alpha": int(self.allocation.n_alpha),
            "objective": float(self.objective),
            "kkt_residual": float(self.kkt_residual),
            "iterations": int(self.iterations),
            "method": self.method,
            "converged": bool(self.converged),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _one_hot(problem: OptimizationProblem, hot: int) -> np.ndarray:
    w = np.zeros_like(problem.q)
    w[hot] = 1.0
    return w


def _argmax_center_first(values: np.ndarray, n_alpha: int) -> int:
    """Index of the maximum; ties go to the lowest |j|, negative before positive."""
    best = float(np.max(values))
    candidates = np.flatnonzero(values >= best)
    offsets = candidates - n_alpha
    order = np.lexsort((offsets > 0, np.abs(offsets)))
    return int(candidates[order[0]])


def _water_filling(problem: OptimizationProblem, tol: float) -> tuple[np.ndarray, int]:
    p = problem.params
    a, scale = p.a, p.kappa * p.ell
    # stationarity: q_j*scale*exp(-a*(scale*A_j + s_j)) = lambda on active bins
    s = np.where(problem.tau_membership, p.shift, p.shift - 1.0)
    with np.errstate(divide="ignore"):
        top = np.log(problem.q * scale) - a * s  # A_j > 0 iff top > ln(lambda)
    top[problem.q == 0.0] = -np.inf

    def weights_at(log_lam: float) -> np.ndarray:
        return np.maximum(0.0, (top - log_lam) / (a * scale))

    hi = float(np.max(top))
    lo = hi - a * scale * (1.0 + 1.0 / (a * scale))  # single bin already fills budget
    if weights_at(lo).sum() < 1.0:
        raise NumericalError(
            f"water-filling bracket failure: S(lo)={weights_at(lo).sum()!r} < 1 "
            f"(log bracket [{lo}, {hi}])"
        )
    iters = 0
    for iters in range(1, BISECT_ITERS + 1):
        mid = 0.5 * (lo + hi)
        total = weights_at(mid).sum()
        if abs(total - 1.0) < BISECT_TOL:
            hi = lo = mid
            break
        if total > 1.0:
            lo = mid
        else:
            hi = mid
    w = weights_at(0.5 * (lo + hi))
    w /= w.sum()  # exact simplex normalization
    return w, iters


def solve(problem: OptimizationProblem, tol: float = 1e-10) -> Solution:
    """Exact maximizer of the CARA objective on the probability simplex."""
    a = problem.params.a
    n = problem.q.shape[0]
    if a > 0:
        w, iters = _water_filling(problem, tol)
        method = "water-filling"
    elif a == 0.0:
        w = _one_hot(problem, _argmax_center_first(problem.q, problem.n_alpha))
        iters, method = n, "vertex-enumeration"
    else:
        values = np.array(
            [problem.objective(_one_hot(problem, i)) for i in range(n)]
        )
        w = _one_hot(problem, _argmax_center_first(values, problem.n_alpha))
        iters, method = n, "vertex-enumeration"
    resid = kkt_residual(problem, w)
    if a > 0 and resid > tol:
        raise NumericalError(f"water-filling KKT residual {resid:.3e} exceeds {tol:.1e}")
    return Solution(
        allocation=Allocation(n_alpha=problem.n_alpha, weights=w),
        objective=problem.objective(w),
        kkt_residual=resid,
        iterations=iters,
        method=method,
    )


def kkt_residual(problem: OptimizationProblem, weights: np.ndarray) -> float:
    """Violation of the Lagrange equalization / complementary-slackness system.

    Spread of marginal utilities q_j u'(c_j) over active bins, plus the worst
    excess of an inactive bin's marginal utility over the active level.
    """
    weights = np.asarray(weights, dtype=float)
    grads = problem.gradient(weights)
    active = weights > ACTIVE_TOL
    if not np.any(active):
        return float(np.max(grads))
    lam = float(np.max(grads[active]))
    spread = lam - float(np.min(grads[active]))
    inactive = ~active
    violation = 0.0
    if np.any(inactive):
        violation = max(0.0, float(np.max(grads[inactive])) - lam)
    return spread + violation


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def projected_gradient_verify(
    problem: OptimizationProblem,
    tol: float = 1e-12,
    max_iters: int = 200_000,
) -> Solution:
    """Independent check of solve() by projected gradient ascent (a >= 0 only).

    Backtracking step size; stops when the per-step objective gain drops
    below ``tol``.
    """
    if problem.params.a < 0:
        raise InputError("projected gradient verification requires a >= 0")
    n = problem.q.shape[0]
    w = np.full(n, 1.0 / n)
    obj = problem.objective(w)
    step = 1.0 / max(1.0, problem.params.kappa * problem.params.ell)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        grad = problem.gradient(w)
        trial_step = step
        improved = False
        for _ in range(60):
            cand = project_simplex(w + trial_step * grad)
            cand_obj = problem.objective(cand)
            if cand_obj > obj:
                improved = True
                break
            trial_step *= 0.5
        if not improved:
            converged = True
            break
        gain = cand_obj - obj
        w, obj = cand, cand_obj
        step = min(trial_step * 2.0, 1e6)
        if gain < tol:
            converged = True
            break
    return Solution(
        allocation=Allocation(n_alpha=problem.n_alpha, weights=w),
        objective=obj,
        kkt_residual=kkt_residual(problem, w),
        iterations=it,
        method="projected-gradient",
        converged=converged,
    )
