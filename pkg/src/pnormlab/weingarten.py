"""Unitary Weingarten calculus for low moments and the exact average purity.

Permutations are tuples of images on ``{0, ..., n-1}``; composition is
``compose(s, t)[i] = s[t[i]]``.

The average purity of ``(N (x) conj N)(Phi)`` over Haar isometries is an
eighth-order moment (four U, four conj U). With rows of U indexed by the
input label s and columns by the output pair (a, b), the moment formula
turns the index sum into

    (1/|S|^2) sum_{sigma, tau in S_4} |S|^{#(sigma)} |A|^{#(tau colA)}
                                      |B|^{#(tau colB)} Wg(sigma tau^-1, |A||B|)

where ``#`` counts cycles. The wirings record which conj-U slot shares a
summed index with which U slot. Reading the factor order
conj U: (a2 b2, a1' b1, a2' b2', a1 b1') and U: (a1 b1, a2' b2, a1' b1', a2 b2'):
the s labels appear in the same order in both lists (identity); the A
labels pair slots 1<->4 and 2<->3; the B labels pair 1<->2 and 3<->4.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import StinespringChannel, product_output_on_phi
from .ensembles import SeededRng, as_generator
from .linalg import BipartiteDims, DimensionError, MemoryGuardError

ROW_WIRING = (0, 1, 2, 3)
COL_A_WIRING = (3, 2, 1, 0)  # (1 4)(2 3)
COL_B_WIRING = (1, 0, 3, 2)  # (1 2)(3 4)


def compose(s, t) -> tuple:
    return tuple(s[i] for i in t)


def inverse(s) -> tuple:
    inv = [0] * len(s)
    for i, j in enumerate(s):
        inv[j] = i
    return tuple(inv)


def cycle_type(s) -> tuple:
    """Cycle lengths in decreasing order, e.g. (2, 1, 1) for a transposition."""
    seen = [False] * len(s)
    lengths = []
    for start in range(len(s)):
        if seen[start]:
            continue
        length, i = 0, start
        while not seen[i]:
            seen[i] = True
            i = s[i]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def cycle_count(s) -> int:
    return len(cycle_type(s))


def length(s) -> int:
    """Minimal number of transpositions whose product is ``s``."""
    return len(s) - cycle_count(s)


@lru_cache(maxsize=None)
def permutations(n: int) -> tuple:
    return tuple(itertools.permutations(range(n)))


@dataclass(frozen=True)
class WeingartenTable:
    n: int
    D: int
    by_perm: dict
    by_class: dict
    residual: float

    def __call__(self, s) -> float:
        return self.by_perm[tuple(s)]


def gram_matrix(n: int, D: float) -> np.ndarray:
    perms = permutations(n)
    return np.array([[float(D) ** cycle_count(compose(s, inverse(t))) for t in perms] for s in perms])


@lru_cache(maxsize=256)
def weingarten_table(D: int, n: int = 4) -> WeingartenTable:
    """Solve sum_t D^{#(s t^-1)} Wg(t) = [s = e] on S_n.

    Requires D >= n, otherwise the Gram matrix is singular.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if D < n:
        raise DimensionError(f"Gram matrix on S_{n} is singular for D={D} < {n}")
    perms = permutations(n)
    # divide by D^n so entries stay O(1) for large D
    g = gram_matrix(n, D) / float(D) ** n
    rhs = np.zeros(len(perms))
    rhs[0] = 1.0
    x = np.linalg.solve(g, rhs)
    for _ in range(3):
        x += np.linalg.solve(g, rhs - g @ x)
    residual = float(np.max(np.abs(g @ x - rhs)))
    wg = x / float(D) ** n
    by_perm = dict(zip(perms, wg))
    by_class = {}
    for s, value in by_perm.items():
        by_class.setdefault(cycle_type(s), value)
    return WeingartenTable(n, D, by_perm, by_class, residual)


def exact_avg_purity(dims: BipartiteDims, dim_s: int) -> float:
    """Haar average of Tr[((N (x) conj N)(Phi))^2] for a random isometry S -> AB."""
    D = dims.total
    if not 1 <= dim_s <= D:
        raise DimensionError(f"dim_s={dim_s} must lie in [1, {D}]")
    if D < 4:
        raise DimensionError("the fourth-moment Gram matrix needs |A||B| >= 4")
    table = weingarten_table(D, 4)
    total = 0.0
    for s in permutations(4):
        fs = dim_s ** cycle_count(compose(s, ROW_WIRING))
        for t in permutations(4):
            fa = dims.dim_a ** cycle_count(compose(t, COL_A_WIRING))
            fb = dims.dim_b ** cycle_count(compose(t, COL_B_WIRING))
            total += fs * fa * fb * table(compose(s, inverse(t)))
    return total / dim_s**2


def stack_diagram_term(dims: BipartiteDims, dim_s: int) -> float:
    """The sigma = tau = e contribution, |S|^2 / (|A|^2 |B|^2) * Wg(e) D^4."""
    D = dims.total
    return dim_s**2 / D**2 * weingarten_table(D, 4)(ROW_WIRING) * D**4


@dataclass(frozen=True)
class MonteCarloPurity:
    mean: float
    stderr: float
    samples: int


def purity_samples(dims: BipartiteDims, dim_s: int, samples: int, rng) -> np.ndarray:
    """Purity of (N (x) conj N)(Phi) for ``samples`` independent Haar isometries."""
    D = dims.total
    a, b = dims.dim_a, dims.dim_b
    if D * D > 2**22:
        raise MemoryGuardError("batched Monte Carlo is limited to |A||B| <= 2048")
    batch = max(1, 2**21 // (D * D))
    seeded = isinstance(rng, SeededRng)
    gen = None if seeded else as_generator(rng)
    out = np.empty(samples)
    for k, start in enumerate(range(0, samples, batch)):
        m = min(batch, samples - start)
        g = rng.generator(k) if seeded else gen
        z = g.standard_normal((m, D, dim_s)) + 1j * g.standard_normal((m, D, dim_s))
        q, r = np.linalg.qr(z)
        diag = np.diagonal(r, axis1=-2, axis2=-1)
        v = q * (diag / np.abs(diag))[:, None, :]
        # (V (x) conj V)|Phi> reshaped to rows (a1 b1), columns (a2 b2) is V V^dagger / sqrt|S|
        x = (v @ np.swapaxes(v.conj(), 1, 2)) / math.sqrt(dim_s)
        x = x.reshape(m, a, b, a, b).transpose(0, 1, 3, 2, 4).reshape(m, a * a, b * b)
        omega = x @ np.conj(np.swapaxes(x, 1, 2))
        out[start:start + m] = np.sum(np.abs(omega) ** 2, axis=(1, 2))
    return out


def mc_avg_purity(dims: BipartiteDims, dim_s: int, samples: int, rng) -> MonteCarloPurity:
    if samples < 2:
        raise ValueError("need at least two samples for a standard error")
    vals = purity_samples(dims, dim_s, samples, rng)
    return MonteCarloPurity(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)), samples)


def purity_of_channel(ch: StinespringChannel) -> float:
    omega = product_output_on_phi(ch)
    return float(np.sum(np.abs(omega) ** 2))
