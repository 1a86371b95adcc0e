"""Dense complex linear algebra on bipartite spaces.

Composite indices are row-major throughout: the basis vector |a>|b> of
A (x) B sits at position ``a * dim_b + b``. Partial traces, channel
conjugation and the maximally entangled state all rely on this single
convention.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DIM = 2**20
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEGATIVE_TOL = 1e-9


class DimensionError(ValueError):
    """Operand shapes are inconsistent with the requested operation."""


class MemoryGuardError(RuntimeError):
    """A requested object would exceed the configured dimension ceiling."""


@dataclass(frozen=True)
class BipartiteDims:
    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionError(f"factor dimensions must be positive, got {self}")

    @property
    def total(self) -> int:
        return self.dim_a * self.dim_b


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a density operator, sorted descending."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        vals = np.sort(np.asarray(self.eigenvalues, dtype=float))[::-1].copy()
        if vals.ndim != 1 or vals.size == 0:
            raise DimensionError("spectrum must be a non-empty vector")
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    def clamped(self) -> np.ndarray:
        """Eigenvalues with roundoff negatives set to zero.

        Raises ValueError if any value is below ``-NEGATIVE_TOL``; that is a
        bug upstream, not roundoff.
        """
        return clamp_eigenvalues(self.eigenvalues)

    def ascending(self) -> np.ndarray:
        return self.eigenvalues[::-1].copy()


def clamp_eigenvalues(vals) -> np.ndarray:
    vals = np.asarray(vals, dtype=float)
    if vals.size and vals.min() < -NEGATIVE_TOL:
        raise ValueError(f"eigenvalue {vals.min():.3e} is below -{NEGATIVE_TOL:g}")
    return np.clip(vals, 0.0, None)


def _check_dim(total: int):
    if total > MAX_DIM:
        raise MemoryGuardError(f"dimension {total} exceeds the ceiling {MAX_DIM}")


def pure_state(amplitudes, normalize: bool = False) -> np.ndarray:
    """Validate (or normalize) a state vector and return it as complex128."""
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if normalize:
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return psi / norm
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state has norm {norm!r}, expected 1")
    return psi


def density_operator(matrix) -> np.ndarray:
    """Check the density-operator invariants and return a Hermitian copy."""
    rho = np.asarray(matrix, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise ValueError(f"trace {np.trace(rho).real!r} differs from 1")
    rho = 0.5 * (rho + rho.conj().T)
    if np.linalg.eigvalsh(rho).min() < -NEGATIVE_TOL:
        raise ValueError("matrix is not positive semidefinite")
    return rho


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def tensor_product(x, y) -> np.ndarray:
    """Kronecker product of two vectors or two square operators."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != y.ndim or x.ndim not in (1, 2):
        raise DimensionError("operands must both be vectors or both be matrices")
    if x.ndim == 2 and (x.shape[0] != x.shape[1] or y.shape[0] != y.shape[1]):
        raise DimensionError("operator operands must be square")
    _check_dim(x.shape[0] * y.shape[0])
    return np.kron(x, y)


def partial_trace(rho, dims: BipartiteDims, keep: str = "A") -> np.ndarray:
    """Reduced operator on the kept factor of ``A (x) B``."""
    rho = np.asarray(rho)
    if rho.shape != (dims.total, dims.total):
        raise DimensionError(f"operator of shape {rho.shape} does not act on {dims}")
    t = rho.reshape(dims.dim_a, dims.dim_b, dims.dim_a, dims.dim_b)
    if keep == "A":
        return np.einsum("ibjb->ij", t)
    if keep == "B":
        return np.einsum("aiaj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def reduced_from_vector(psi, dims: BipartiteDims) -> np.ndarray:
    """Tr_B |psi><psi| without forming the full projector."""
    psi = np.asarray(psi)
    if psi.size != dims.total:
        raise DimensionError(f"vector of length {psi.size} does not live on {dims}")
    w = psi.reshape(dims.dim_a, dims.dim_b)
    return w @ w.conj().T


def eigen_spectrum(rho, vectors: bool = False):
    """Descending real spectrum of a Hermitian operator.

    With ``vectors=True`` returns ``(Spectrum, Q)`` where the columns of
    ``Q`` are eigenvectors in the same (descending) order.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {rho.shape}")
    scale = max(1.0, float(np.max(np.abs(rho), initial=0.0)))
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise ValueError("matrix is not Hermitian")
    herm = 0.5 * (rho + rho.conj().T)
    if not vectors:
        return Spectrum(np.linalg.eigvalsh(herm))
    vals, vecs = np.linalg.eigh(herm)
    return Spectrum(vals), vecs[:, ::-1]


def schatten_norm(op, p: float) -> float:
    """Schatten p-norm ``(Tr |op|^p)^(1/p)``; ``p = inf`` is the operator norm.

    Hermitian inputs go through the eigenvalues, anything else through the
    singular values. For ``0 < p < 1`` this is the usual quasi-norm.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p!r}")
    op = np.asarray(op)
    if op.ndim == 1:
        s = np.abs(op.astype(float))
    elif np.allclose(op, op.conj().T, atol=HERMITIAN_TOL, rtol=0):
        s = np.abs(np.linalg.eigvalsh(0.5 * (op + op.conj().T)))
    else:
        s = np.linalg.svd(op, compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    top = s.max(initial=0.0)
    if top == 0:
        return 0.0
    # factor out the largest value so s**p cannot underflow or overflow
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def max_entangled(d: int) -> np.ndarray:
    """|Phi> = d^{-1/2} sum_i |i>|i> on d (x) d in the computational basis."""
    if d < 1:
        raise DimensionError("d must be positive")
    _check_dim(d * d)
    return np.eye(d, dtype=complex).ravel() / np.sqrt(d)
