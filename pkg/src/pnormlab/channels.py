"""The two channel families: random unitary mixtures and Stinespring isometries.

Both families expose the same pure-input hook used by the entropy
estimators: ``output_factor(psi)`` returns a matrix ``W`` with
``N(|psi><psi|) = W W^dagger`` and ``factor_adjoint(G)`` pulls a
gradient with respect to ``conj(W)`` back to the input space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .ensembles import SeededRng, as_generator, haar_unitary, random_isometry, random_pure_states
from .linalg import (
    BipartiteDims,
    DimensionError,
    MemoryGuardError,
    MAX_DIM,
    eigen_spectrum,
    max_entangled,
    partial_trace,
)

UNITARY_TOL = 1e-10

# largest d^2 x (n^2) block built at once when applying a product of
# random-unitary channels; keeps peak memory near 64 MB
_CHUNK_ELEMENTS = 2**22


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RandomUnitaryChannel:
    """rho -> (1/n) sum_i V_i rho V_i^dagger."""

    unitaries: np.ndarray

    def __post_init__(self):
        vs = _frozen(self.unitaries)
        if vs.ndim != 3 or vs.shape[1] != vs.shape[2] or vs.shape[0] < 1:
            raise DimensionError(f"expected an (n, d, d) stack, got shape {vs.shape}")
        eye = np.eye(vs.shape[1])
        defect = np.max(np.abs(np.conj(np.swapaxes(vs, 1, 2)) @ vs - eye))
        if defect > UNITARY_TOL:
            raise ValueError(f"member is not unitary (defect {defect:.2e})")
        object.__setattr__(self, "unitaries", vs)

    @property
    def n(self) -> int:
        return self.unitaries.shape[0]

    @property
    def d(self) -> int:
        return self.unitaries.shape[1]

    @property
    def input_dim(self) -> int:
        return self.d

    @property
    def output_dim(self) -> int:
        return self.d

    @classmethod
    def sample(cls, rng, d: int, n: int) -> "RandomUnitaryChannel":
        return cls(haar_unitary(rng, d, size=n))

    def apply(self, rho) -> np.ndarray:
        return apply_random_unitary(self, rho)

    def adjoint(self, x) -> np.ndarray:
        """Heisenberg-picture map X -> (1/n) sum_i V_i^dagger X V_i."""
        vs = self.unitaries
        return (np.conj(np.swapaxes(vs, 1, 2)) @ np.asarray(x) @ vs).sum(axis=0) / self.n

    @cached_property
    def _rows(self) -> np.ndarray:
        # rows indexed by (k, i): one GEMV gives every V_k psi
        return self.unitaries.reshape(self.n * self.d, self.d)

    @cached_property
    def _cols(self) -> np.ndarray:
        # columns indexed by (k, i), rows by j: one GEMV gives every V_k^T y
        return np.ascontiguousarray(self.unitaries.transpose(1, 0, 2)).reshape(self.d, -1)

    def adjoint_rank_one(self, y) -> np.ndarray:
        """Adjoint image of |y><y| as (1/n) sum_i (V_i^dagger y)(V_i^dagger y)^dagger."""
        u = (np.conj(y) @ self._cols).conj().reshape(self.n, self.d)
        return u.T @ u.conj() / self.n

    def output_factor(self, psi) -> np.ndarray:
        # column i is V_i psi / sqrt(n); the environment is the label i
        return (self._rows @ psi).reshape(self.n, self.d).T / np.sqrt(self.n)

    def factor_adjoint(self, g) -> np.ndarray:
        vs = self.unitaries
        return np.einsum("kji,jk->i", vs.conj(), g) / np.sqrt(self.n)

    def output_factors(self, psis) -> np.ndarray:
        """Batched :meth:`output_factor` for inputs stacked as rows."""
        w = (np.asarray(psis) @ self._rows.T).reshape(-1, self.n, self.d)
        return np.swapaxes(w, 1, 2) / np.sqrt(self.n)


@dataclass(frozen=True)
class StinespringChannel:
    """rho -> Tr_B V rho V^dagger for an isometry V: S -> A (x) B."""

    isometry: np.ndarray
    dims: BipartiteDims

    def __post_init__(self):
        v = _frozen(self.isometry)
        if v.ndim != 2 or v.shape[0] != self.dims.total:
            raise DimensionError(f"isometry of shape {v.shape} does not map into {self.dims}")
        if not 1 <= v.shape[1] <= v.shape[0]:
            raise DimensionError("dim_s must lie in [1, dim_a * dim_b]")
        defect = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])))
        if defect > UNITARY_TOL:
            raise ValueError(f"matrix is not an isometry (defect {defect:.2e})")
        object.__setattr__(self, "isometry", v)

    @property
    def dim_s(self) -> int:
        return self.isometry.shape[1]

    @property
    def input_dim(self) -> int:
        return self.dim_s

    @property
    def output_dim(self) -> int:
        return self.dims.dim_a

    @classmethod
    def sample(cls, rng, dims: BipartiteDims, dim_s: int) -> "StinespringChannel":
        return cls(random_isometry(rng, dim_s, dims), dims)

    def apply(self, rho) -> np.ndarray:
        return apply_stinespring(self, rho)

    def output_factor(self, psi) -> np.ndarray:
        return (self.isometry @ psi).reshape(self.dims.dim_a, self.dims.dim_b)

    def factor_adjoint(self, g) -> np.ndarray:
        return self.isometry.conj().T @ np.asarray(g).reshape(-1)

    def output_factors(self, psis) -> np.ndarray:
        w = psis @ self.isometry.T
        return w.reshape(-1, self.dims.dim_a, self.dims.dim_b)


def _check_square(rho, dim: int) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (dim, dim):
        raise DimensionError(f"input of shape {rho.shape} does not match input dimension {dim}")
    return rho


def apply_random_unitary(ch: RandomUnitaryChannel, rho) -> np.ndarray:
    rho = _check_square(rho, ch.d)
    vs = ch.unitaries
    return (vs @ rho @ np.conj(np.swapaxes(vs, 1, 2))).sum(axis=0) / ch.n


def apply_stinespring(ch: StinespringChannel, rho) -> np.ndarray:
    rho = _check_square(rho, ch.dim_s)
    v = ch.isometry
    return partial_trace(v @ rho @ v.conj().T, ch.dims, keep="A")


def apply_channel(ch, rho) -> np.ndarray:
    return ch.apply(rho)


def conjugate_channel(ch):
    """Entrywise complex conjugate of the defining matrices."""
    if isinstance(ch, RandomUnitaryChannel):
        return RandomUnitaryChannel(ch.unitaries.conj())
    if isinstance(ch, StinespringChannel):
        return StinespringChannel(ch.isometry.conj(), ch.dims)
    raise TypeError(f"unsupported channel type {type(ch).__name__}")


def apply_product_to_state(ch1, ch2, psi) -> np.ndarray:
    """(N1 (x) N2)(|psi><psi|) for a pure input on S1 (x) S2.

    The output is ordered (A1, A2). No superoperator is ever formed.
    """
    s1, s2 = ch1.input_dim, ch2.input_dim
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != s1 * s2:
        raise DimensionError(f"input of length {psi.size} does not live on {s1} x {s2}")
    out_dim = ch1.output_dim * ch2.output_dim
    if out_dim * out_dim > MAX_DIM * 64:
        raise MemoryGuardError(f"output operator of dimension {out_dim} is too large")
    if isinstance(ch1, StinespringChannel) and isinstance(ch2, StinespringChannel):
        return _stinespring_product(ch1, ch2, psi.reshape(s1, s2))
    if isinstance(ch1, RandomUnitaryChannel) and isinstance(ch2, RandomUnitaryChannel):
        return _random_unitary_product(ch1, ch2, psi.reshape(s1, s2))
    raise TypeError("both channels must belong to the same family")


def _stinespring_product(ch1, ch2, mat) -> np.ndarray:
    # (V1 (x) V2) vec(M) = vec(V1 M V2^T) in row-major order
    a1, b1 = ch1.dims.dim_a, ch1.dims.dim_b
    a2, b2 = ch2.dims.dim_a, ch2.dims.dim_b
    if a1 * b1 * a2 * b2 > MAX_DIM * 16:
        raise MemoryGuardError("joint output vector exceeds the memory guard")
    w = ch1.isometry @ mat @ ch2.isometry.T
    w = w.reshape(a1, b1, a2, b2).transpose(0, 2, 1, 3).reshape(a1 * a2, b1 * b2)
    return w @ w.conj().T


def _random_unitary_product(ch1, ch2, mat) -> np.ndarray:
    d1, d2 = ch1.d, ch2.d
    out = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    left = ch1.unitaries @ mat  # (n1, d1, d2): V_i M
    right_t = np.swapaxes(ch2.unitaries, 1, 2)  # W_j^T
    per_i = d1 * d2 * ch2.n
    step = max(1, _CHUNK_ELEMENTS // per_i)
    for start in range(0, ch1.n, step):
        block = np.einsum("iab,jbc->ijac", left[start:start + step], right_t)
        cols = block.reshape(-1, d1 * d2)
        out += cols.T @ cols.conj()
    return out / (ch1.n * ch2.n)


def phi_overlap(ch: RandomUnitaryChannel) -> float:
    """<Phi| (N (x) conj N)(Phi) |Phi> from the trace overlaps alone.

    Equals (1/n^2) sum_{i,j} |Tr(V_j^dagger V_i)|^2 / d^2; never builds a
    d^2 x d^2 operator.
    """
    flat = ch.unitaries.reshape(ch.n, -1)
    # sum_ij |<f_j, f_i>|^2 = ||F F^dagger||_F^2 = ||F^dagger F||_F^2; use the smaller Gram matrix
    gram = flat.conj() @ flat.T if ch.n <= flat.shape[1] else flat.T @ flat.conj()
    return float(np.sum(np.abs(gram) ** 2)) / (ch.n**2 * ch.d**2)


def phi_overlap_direct(ch: RandomUnitaryChannel) -> float:
    """Same quantity as :func:`phi_overlap` through the full output operator."""
    phi = max_entangled(ch.d)
    out = apply_product_to_state(ch, conjugate_channel(ch), phi)
    return float(np.real(phi.conj() @ out @ phi))


def product_output_on_phi(ch) -> np.ndarray:
    """(N (x) conj N)(Phi) with Phi maximally entangled across the two inputs."""
    return apply_product_to_state(ch, conjugate_channel(ch), max_entangled(ch.input_dim))


@dataclass
class DeviationEstimate:
    epsilon_hat: float
    witness: np.ndarray
    upper_side: float
    lower_side: float
    history: list = field(default_factory=list)


def randomizing_deviation(ch: RandomUnitaryChannel, cfg) -> DeviationEstimate:
    """Lower bound on the smallest eps with ||N(rho) - 1/d||_inf <= eps/d.

    Pure inputs suffice because the objective is convex in rho. Each
    restart alternates two eigenvector problems: the top (or bottom)
    eigenvector y of N(psi), then the top (or bottom) eigenvector psi of
    the adjoint image of |y><y|. Both sides of the spectrum are searched.
    """
    d = ch.d
    rng = cfg.rng
    gen = rng.generator() if isinstance(rng, SeededRng) else as_generator(rng)
    starts = random_pure_states(gen, d, max(cfg.samples, 1))

    batch = max(1, _CHUNK_ELEMENTS // (d * ch.n))
    lam = np.concatenate([
        np.linalg.eigvalsh(_outer_batch(ch.output_factors(starts[i:i + batch])))
        for i in range(0, len(starts), batch)
    ])
    top, bottom = lam[:, -1], lam[:, 0]

    best = {"upper": (d * top.max() - 1.0, starts[np.argmax(top)]),
            "lower": (1.0 - d * bottom.min(), starts[np.argmin(bottom)])}
    history = []
    for side, order in (("upper", np.argsort(-top)), ("lower", np.argsort(bottom))):
        for r in range(min(cfg.restarts, len(order))):
            value, psi = _alternate(ch, starts[order[r]], side, cfg.max_iters, cfg.step_tol)
            history.append((side, r, value))
            if value > best[side][0]:
                best[side] = (value, psi)
    upper, lower = best["upper"][0], best["lower"][0]
    witness = best["upper"][1] if upper >= lower else best["lower"][1]
    return DeviationEstimate(max(upper, lower, 0.0), witness, upper, lower, history)


def _outer_batch(w) -> np.ndarray:
    return w @ np.conj(np.swapaxes(w, 1, 2))


def _alternate(ch, psi, side, max_iters, tol):
    d = ch.d
    pick = -1 if side == "upper" else 0
    value = -np.inf
    for _ in range(max_iters):
        w = ch.output_factor(psi)
        spec, vecs = eigen_spectrum(w @ w.conj().T, vectors=True)
        lam = spec.eigenvalues[0] if side == "upper" else spec.eigenvalues[-1]
        new = d * lam - 1.0 if side == "upper" else 1.0 - d * lam
        y = vecs[:, 0] if side == "upper" else vecs[:, -1]
        if new - value <= tol and np.isfinite(value):
            value = max(value, new)
            break
        value = new
        adj = ch.adjoint_rank_one(y)
        _, evecs = np.linalg.eigh(0.5 * (adj + adj.conj().T))
        psi = evecs[:, pick]
    return value, psi
