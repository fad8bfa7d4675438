"""CARA (exponential) utility and exact expected utility of an allocation.

Reward of landing in relative bin j: kappa * ell * A(j), minus the fixed
reset fee of 1 whenever j is outside B_tau. Utilities are evaluated on
rewards shifted by +1 when a != 0 (the exponential form needs positive
inputs); at a = 0 the utility is the raw reward, which reproduces the
worked 5/18 example exactly.

Two evaluation modes:

* ``strict-paper`` sums over B_alpha only, silently dropping probability
  mass that lands beyond it.
* ``full-coverage`` sums over every bin reachable from B_tau, treating bins
  outside B_alpha as having zero allocation (and paying the reset fee when
  also outside B_tau), so all probability mass is accounted for.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .distribution import NextPriceDistribution
from .errors import InputError, NumericalError, RangeError
from .markov import build_reset_chain, landing_over

__all__ = [
    "MODE_STRICT",
    "MODE_FULL",
    "UtilityParams",
    "Allocation",
    "exp_utility",
    "exp_utility_vec",
    "reward",
    "expected_utility",
]

MODE_STRICT = "strict-paper"
MODE_FULL = "full-coverage"
_MODES = (MODE_STRICT, MODE_FULL)

_EXP_ARG_LIMIT = 700.0  # exp overflow guard


@dataclass(frozen=True)
class UtilityParams:
    """Risk aversion a, fee yield kappa per unit liquidity per step, total liquidity ell.

    ell is measured in multiples of the fixed reallocation cost.
    """

    a: float = 0.0
    kappa: float = 1.0
    ell: float = 100.0

    def __post_init__(self) -> None:
        if self.kappa <= 0:
            raise InputError(f"kappa must be > 0, got {self.kappa}")
        if self.ell <= 0:
            raise InputError(f"ell must be > 0, got {self.ell}")

    @property
    def shift(self) -> float:
        """Reward shift making the exponential well defined; 0 at risk neutrality."""
        return 0.0 if self.a == 0.0 else 1.0

    def to_json_dict(self) -> dict:
        return {"a": float(self.a), "kappa": float(self.kappa), "ell": float(self.ell)}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "UtilityParams":
        return cls(
            a=float(doc.get("a", 0.0)),
            kappa=float(doc.get("kappa", 1.0)),
            ell=float(doc.get("ell", 100.0)),
        )


@dataclass(frozen=True)
class Allocation:
    """Liquidity fractions A(j) over j in [-n_alpha, n_alpha]; sum <= 1, A >= 0."""

    n_alpha: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if self.n_alpha < 0:
            raise InputError(f"n_alpha must be >= 0, got {self.n_alpha}")
        if w.shape != (2 * self.n_alpha + 1,):
            raise InputError(
                f"weights must have length {2 * self.n_alpha + 1}, got {w.shape}"
            )
        if np.any(w < 0):
            raise InputError("allocation weights must be non-negative")
        if w.sum() > 1.0 + 1e-9:
            raise InputError(f"allocation weights sum to {w.sum()!r} > 1")

    def weight(self, j: int) -> float:
        """A(j); zero outside B_alpha."""
        if abs(j) > self.n_alpha:
            return 0.0
        return float(self.weights[j + self.n_alpha])

    def weight_array(self, js: np.ndarray) -> np.ndarray:
        js = np.asarray(js)
        out = np.zeros(js.shape, dtype=float)
        inside = np.abs(js) <= self.n_alpha
        out[inside] = self.weights[js[inside] + self.n_alpha]
        return out

    def to_json_dict(self) -> dict:
        return {"n_alpha": int(self.n_alpha), "weights": [float(w) for w in self.weights]}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Allocation":
        try:
            return cls(
                n_alpha=int(doc["n_alpha"]),
                weights=np.asarray(doc["weights"], dtype=float),
            )
        except KeyError as exc:
            raise InputError(f"allocation document missing field {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def exp_utility(c: float, params: UtilityParams) -> float:
    """u(c) = (1 - exp(-a c)) / a for a != 0, and c at a = 0."""
    a = params.a
    if a == 0.0:
        return float(c)
    arg = -a * c
    if arg > _EXP_ARG_LIMIT:
        raise NumericalError(f"exp_utility overflow: a={a}, c={c} (exp arg {arg:.1f})")
    return (1.0 - math.exp(arg)) / a


def exp_utility_vec(c: np.ndarray, params: UtilityParams) -> np.ndarray:
    a = params.a
    c = np.asarray(c, dtype=float)
    if a == 0.0:
        return c.copy()
    arg = -a * c
    if np.any(arg > _EXP_ARG_LIMIT):
        bad = float(c.flat[np.argmax(arg)])
        raise NumericalError(f"exp_utility overflow: a={a}, c={bad}")
    return (1.0 - np.exp(arg)) / a


def reward(alloc: Allocation, j: int, n_tau: int, params: UtilityParams) -> float:
    """Per-step reward of landing in bin j: fee income minus the reset cost."""
    if abs(j) > alloc.n_alpha:
        raise RangeError(f"offset {j} outside B_alpha (n_alpha={alloc.n_alpha})")
    r = params.kappa * params.ell * alloc.weight(j)
    if abs(j) > n_tau:
        r -= 1.0
    return r


def _landing_and_rewards(
    dist: NextPriceDistribution,
    n_tau: int,
    alloc: Allocation,
    params: UtilityParams,
    mode: str,
) -> tuple[np.ndarray, np.ndarray]:
    """Landing probabilities q(j) and rewards R(j) over the mode's bin set."""
    if mode not in _MODES:
        raise InputError(f"unknown mode {mode!r}; expected one of {_MODES}")
    chain = build_reset_chain(dist, n_tau)
    if mode == MODE_STRICT:
        js = np.arange(-alloc.n_alpha, alloc.n_alpha + 1)
    else:
        reach = n_tau + dist.k_max
        js = np.arange(-reach, reach + 1)
    q = landing_over(dist, chain, js)
    rewards = params.kappa * params.ell * alloc.weight_array(js)
    rewards[np.abs(js) > n_tau] -= 1.0
    return q, rewards


def expected_utility(
    dist: NextPriceDistribution,
    n_tau: int,
    alloc: Allocation,
    params: UtilityParams,
    mode: str = MODE_STRICT,
) -> float:
    """Exact expected per-step utility E_u = sum_j q(j) u(R(j) + shift)."""
    q, rewards = _landing_and_rewards(dist, n_tau, alloc, params, mode)
    return float(q @ exp_utility_vec(rewards + params.shift, params))
