"""Renyi entropies, maximal p-norms and minimum-output-entropy search.

All logarithms are natural. Orders are plain floats with ``math.inf``
standing for the min-entropy; ``p == 1`` is a separate branch (von
Neumann), not a limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import SeededRng, random_pure_states
from .linalg import Spectrum, clamp_eigenvalues

_LOG_FLOOR = 1e-300
_KERNEL_TOL = 1e-13


def parse_order(value) -> float:
    """Accept floats or the strings 'inf' / 'infinity'."""
    if isinstance(value, str):
        value = value.strip().lower()
        p = math.inf if value in ("inf", "infinity", "∞") else float(value)
    else:
        p = float(value)
    if not p > 0:
        raise ValueError(f"Renyi order must be positive, got {value!r}")
    return p


def format_order(p: float):
    """JSON-friendly order: 'inf' for infinity, otherwise the float."""
    return "inf" if math.isinf(p) else p


def _values(spec) -> np.ndarray:
    if isinstance(spec, Spectrum):
        return spec.clamped()
    return clamp_eigenvalues(spec)


def renyi_entropy(spec, p: float) -> float:
    """H_p of a spectrum (a :class:`Spectrum` or an array of eigenvalues)."""
    if not p > 0:
        raise ValueError(f"Renyi order must be positive, got {p!r}")
    lam = _values(spec)
    total = lam.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"spectrum sums to {total!r}, not 1")
    return float(_renyi_rows(lam[None, :], p)[0])


def _renyi_rows(lam: np.ndarray, p: float) -> np.ndarray:
    """Row-wise H_p for a 2-D array of clamped, normalized spectra."""
    if p == 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(lam > 0, lam * np.log(np.where(lam > 0, lam, 1.0)), 0.0)
        return -terms.sum(axis=-1)
    if math.isinf(p):
        return -np.log(lam.max(axis=-1))
    top = lam.max(axis=-1, keepdims=True)
    # ln sum lam^p = p ln top + ln sum (lam/top)^p, stable for large p
    log_sum = p * np.log(top[..., 0]) + np.log(np.sum((lam / top) ** p, axis=-1))
    return log_sum / (1.0 - p)


def renyi_entropy_of_state(rho, p: float) -> float:
    return renyi_entropy(np.linalg.eigvalsh(0.5 * (rho + np.conj(rho).T)), p)


def max_p_norm_from_entropy(hmin: float, p: float) -> float:
    """nu_p = exp(hmin (1-p)/p); at p = inf this is exp(-hmin)."""
    if p == 1:
        raise ValueError("the maximal p-norm is undefined at p = 1")
    if not p > 0:
        raise ValueError(f"Renyi order must be positive, got {p!r}")
    if math.isinf(p):
        return math.exp(-hmin)
    return math.exp(hmin * (1.0 - p) / p)


def entropy_from_max_p_norm(nu: float, p: float) -> float:
    if p == 1:
        raise ValueError("the maximal p-norm is undefined at p = 1")
    if math.isinf(p):
        return -math.log(nu)
    return p / (1.0 - p) * math.log(nu)


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


@dataclass(frozen=True)
class GroupingDecomposition:
    lambda1: float
    h_binary: float
    tail_entropy: float
    total: float
    tail: np.ndarray = field(repr=False)


def grouping_decomposition(spec) -> GroupingDecomposition:
    """Split H_1 into the largest eigenvalue and the renormalized tail.

    H_1(lam) = h(lam_1) + (1 - lam_1) H_1(lam_tail) with
    lam_tail = lam[1:] / (1 - lam_1).
    """
    lam = np.sort(_values(spec))[::-1]
    l1 = float(lam[0])
    rest = lam[1:]
    mass = float(rest.sum())
    if mass <= 0.0 or l1 >= 1.0:
        return GroupingDecomposition(l1, 0.0, 0.0, 0.0, np.zeros(0))
    tail = rest / mass
    h = binary_entropy(l1)
    h_tail = float(_renyi_rows(tail[None, :], 1.0)[0])
    # 1 - lam_1 and the tail mass agree to roundoff; the tail mass keeps the identity exact
    return GroupingDecomposition(l1, h, h_tail, h + mass * h_tail, tail)


@dataclass(frozen=True)
class EstimatorConfig:
    samples: int = 1000
    restarts: int = 8
    max_iters: int = 200
    step_tol: float = 1e-10
    rng: SeededRng = SeededRng(0, 0)

    def __post_init__(self):
        for name in ("samples", "restarts", "max_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.step_tol > 0:
            raise ValueError("step_tol must be positive")


@dataclass
class MinEntropyEstimate:
    """Upper-bound estimate of the minimum output entropy.

    ``sampling_hat`` and ``optimizer_hat`` are the two stages; ``hmin_hat``
    is their minimum.
    """

    hmin_hat: float
    argmin: np.ndarray
    sampling_hat: float
    optimizer_hat: float
    trace: list = field(default_factory=list)


def _gram(w: np.ndarray) -> np.ndarray:
    # the nonzero spectrum of W W^dagger equals that of W^dagger W; use the smaller one
    if w.shape[-2] <= w.shape[-1]:
        return w @ np.conj(np.swapaxes(w, -1, -2))
    return np.conj(np.swapaxes(w, -1, -2)) @ w


def output_entropies(ch, psis, p: float) -> np.ndarray:
    """H_p(N(psi)) for each row of ``psis``."""
    w = ch.output_factors(psis)
    lam = np.clip(np.linalg.eigvalsh(_gram(w)), 0.0, None)
    lam /= lam.sum(axis=-1, keepdims=True)
    return _renyi_rows(lam, p)


def output_entropy(ch, psi, p: float) -> float:
    return float(output_entropies(ch, np.asarray(psi)[None, :], p)[0])


def output_entropy_and_gradient(ch, psi, p: float):
    """H_p(N(psi)) and its Wirtinger gradient d/d conj(psi).

    The directional derivative along ``delta`` is
    ``2 * Re(vdot(grad, delta))``.
    """
    w = ch.output_factor(psi)
    rho = w @ w.conj().T
    lam, q = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    lam = np.clip(lam, 0.0, None)
    trace = lam.sum()
    lam = lam / trace
    value = float(_renyi_rows(lam[None, :], p)[0])
    if p == 1:
        deriv = -(np.log(np.maximum(lam, _LOG_FLOOR)) + 1.0)
    elif math.isinf(p):
        deriv = np.zeros_like(lam)
        deriv[-1] = -1.0 / lam[-1]
    else:
        powers = np.maximum(lam, _LOG_FLOOR) ** (p - 1.0)
        deriv = p * powers / ((1.0 - p) * np.sum(lam**p))
    # eigenvalues at roundoff level belong to the structural kernel of N(psi)
    deriv = np.where(lam > _KERNEL_TOL, deriv, 0.0)
    dw = (q * deriv) @ (q.conj().T @ w)
    return value, ch.factor_adjoint(dw)


def _descend(ch, psi, p, cfg, restart, trace):
    value, grad = output_entropy_and_gradient(ch, psi, p)
    step = 1.0
    for it in range(cfg.max_iters):
        g = grad - np.vdot(psi, grad).real * psi
        gnorm2 = float(np.vdot(g, g).real)
        if gnorm2 < 1e-24:
            break
        step = min(step * 2.0, 1e3)
        while True:
            cand = psi - step * g
            cand /= np.linalg.norm(cand)
            cand_value, cand_grad = output_entropy_and_gradient(ch, cand, p)
            if cand_value <= value - 1e-4 * step * 2.0 * gnorm2 or step < 1e-12:
                break
            step *= 0.5
        improvement = value - cand_value
        if improvement <= 0:
            break
        psi, value, grad = cand, cand_value, cand_grad
        trace.append({"restart": restart, "iter": it, "value": value, "step": step})
        if improvement < cfg.step_tol:
            break
    return value, psi


def min_output_entropy_estimate(ch, p: float, cfg: EstimatorConfig) -> MinEntropyEstimate:
    """Two-stage upper bound on min over pure inputs of H_p(N(psi)).

    Stage one evaluates ``cfg.samples`` uniformly random inputs. Stage two
    runs ``cfg.restarts`` projected-gradient descents on the unit sphere
    with backtracking. Even restarts start from the best samples, odd ones
    from a fresh random input on sub-stream ``(1, r)`` of ``cfg.rng``, so
    results do not depend on evaluation order.
    """
    dim = ch.input_dim
    batch = max(1, 2**22 // max(1, dim * ch.output_dim))
    best_vals, best_psis = [], []
    keep = cfg.restarts
    for b, start in enumerate(range(0, cfg.samples, batch)):
        count = min(batch, cfg.samples - start)
        psis = random_pure_states(cfg.rng.generator(0, b), dim, count)
        vals = output_entropies(ch, psis, p)
        idx = np.argsort(vals, kind="stable")[:keep]
        best_vals.extend(vals[idx])
        best_psis.extend(psis[idx])
    order = np.argsort(best_vals, kind="stable")[:keep]
    seeds = [best_psis[i] for i in order]
    sampling_hat = float(best_vals[order[0]])
    sampling_arg = seeds[0]

    trace = [{"restart": -1, "iter": 0, "value": sampling_hat, "step": 0.0}]
    optimizer_hat, optimizer_arg = math.inf, None
    for r in range(cfg.restarts):
        if r < len(seeds) and r % 2 == 0:
            start_psi = seeds[r // 2] if r // 2 < len(seeds) else seeds[0]
        else:
            start_psi = random_pure_states(cfg.rng.generator(1, r), dim, 1)[0]
        value, psi = _descend(ch, start_psi, p, cfg, r, trace)
        if value < optimizer_hat:
            optimizer_hat, optimizer_arg = value, psi

    if optimizer_hat < sampling_hat:
        return MinEntropyEstimate(optimizer_hat, optimizer_arg, sampling_hat, optimizer_hat, trace)
    return MinEntropyEstimate(sampling_hat, sampling_arg, sampling_hat, optimizer_hat, trace)
