"""Closed-form bound calculators for the random-subspace construction.

Formulas are evaluated as printed even where they are vacuous at small
dimensions (the universal constant ``c = 1/(72 pi^3)`` makes the
guaranteed subspace empty for any desk-sized system). Callers get the raw
numbers plus flags; nothing is clamped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .linalg import BipartiteDims

UNIVERSAL_C = 1.0 / (72.0 * math.pi**3)
DEFAULT_GAMMA = 3.0


@dataclass(frozen=True)
class BoundsParams:
    alpha: float = 0.5
    delta: float = 0.5
    gamma: float = DEFAULT_GAMMA
    c: float = UNIVERSAL_C
    beta: float | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.beta is not None and self.beta < 0:
            raise ValueError("beta must be non-negative")


@dataclass(frozen=True)
class SubspaceBound:
    dim_s: int
    dim_s_real: float
    failure_prob_bound: float
    log_failure_prob_bound: float
    entropy_floor: float
    beta: float

    @property
    def vacuous(self) -> bool:
        return self.dim_s < 1 or self.failure_prob_bound >= 1.0


def _inv_p(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def _require_p_above_one(p: float):
    if not p > 1:
        raise ValueError(f"order must exceed 1, got {p!r}")


def subspace_dimension_bound(p: float, dims: BipartiteDims, bp: BoundsParams = BoundsParams()) -> SubspaceBound:
    """Guaranteed subspace size, its failure probability and entropy floor."""
    _require_p_above_one(p)
    a, b = dims.dim_a, dims.dim_b
    if not 2 <= a <= b:
        raise ValueError(f"need 2 <= dim_a <= dim_b, got {a}, {b}")
    shrink = (1.0 - _inv_p(p)) ** 2 * bp.alpha**2
    scale = a ** _inv_p(p) * b
    dim_s_real = bp.c / 4.0 * shrink / math.log(5.0 / bp.delta) * scale
    dim_s = math.floor(dim_s_real)
    log_prob = math.log(2.0) + 2 * dim_s * math.log(5.0 / bp.delta) - bp.c * shrink * scale
    prob = math.exp(log_prob) if log_prob < 700 else math.inf
    beta = bp.gamma * math.sqrt(a / b) if bp.beta is None else bp.beta
    floor = math.log(a) - bp.alpha - beta + math.log(1.0 - bp.delta)
    return SubspaceBound(dim_s, dim_s_real, prob, log_prob, floor, beta)


def lipschitz_bound(p: float, dim_a: int) -> float:
    """Upper bound (2p/(p-1)) |A|^(1/2 - 1/(2p)) on the Lipschitz constant of H_p."""
    _require_p_above_one(p)
    if math.isinf(p):
        return 2.0 * math.sqrt(dim_a)
    return 2.0 * p / (p - 1.0) * dim_a ** (0.5 - 0.5 / p)


def expected_entropy_floor(dims: BipartiteDims, gamma: float = DEFAULT_GAMMA) -> float:
    """ln|A| - gamma sqrt(|A|/|B|), the lower bound on E H_p of a random state."""
    return math.log(dims.dim_a) - gamma * math.sqrt(dims.dim_a / dims.dim_b)


def product_output_entropy_bound(p: float, dims: BipartiteDims, dim_s: int) -> float:
    """(p/(p-1)) ln(|A||B|/|S|): ceiling on H_p((N (x) conj N)(Phi))."""
    _require_p_above_one(p)
    if not 1 <= dim_s <= dims.total:
        raise ValueError(f"dim_s={dim_s} must lie in [1, {dims.total}]")
    ratio = math.log(dims.total / dim_s)
    if math.isinf(p):
        return ratio
    return p / (p - 1.0) * ratio


def randomizing_norm_bound(epsilon: float, d: int, p: float) -> float:
    """((1+eps)/d)^(1-1/p): maximal p-norm of an eps-randomizing channel."""
    _require_p_above_one(p)
    return ((1.0 + epsilon) / d) ** (1.0 - _inv_p(p))
