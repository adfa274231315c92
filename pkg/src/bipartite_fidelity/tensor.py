"""Dense linear algebra shared by every other module.

Matrices are plain complex ``numpy`` arrays. Vectorization is row-major
throughout: ``|A>> = sum_ij A_ij |ij>``, so ``vec_d(A)[i*D + j] == A[i, j]``.
With this convention

    <<A|B>> = Tr[A^dag B]          and       |A rho B>> = (A (x) B^T)|rho>>.

The same rule applied to a ``D^2 x D^2`` operator gives the four-index
vectorization ``|Gamma)`` used for bipartite channels.
"""
from __future__ import annotations

import math

import numpy as np

ATOL_CONSTRUCT = 1e-12
ATOL_IDENTITY = 1e-10


class DimensionError(ValueError):
    """Raised when an operand has the wrong shape."""


def as_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def isqrt_exact(n: int) -> int:
    """Integer square root of ``n``; raises if ``n`` is not a perfect square."""
    r = math.isqrt(n)
    if r * r != n:
        raise DimensionError(f"dimension {n} is not a perfect square")
    return r


def is_hermitian(a, atol: float = ATOL_IDENTITY) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=atol, rtol=0)


def is_unitary(a, atol: float = ATOL_IDENTITY) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return np.allclose(a.conj().T @ a, np.eye(a.shape[0]), atol=atol, rtol=0)


def projector(psi) -> np.ndarray:
    """``|psi><psi|`` for a state vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def hs_inner(a, b) -> complex:
    """``Tr[A^dag B]``."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def hs_norm_sq(a) -> float:
    """``Tr[A A^dag]`` (the squared Hilbert-Schmidt norm)."""
    a = np.asarray(a)
    return float(np.vdot(a, a).real)


def vec_d(a) -> np.ndarray:
    """Row-major vectorization ``|A>>`` of a ``D x D`` matrix."""
    return as_square(a, "A").reshape(-1).copy()


def unvec_d(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    d = isqrt_exact(v.size)
    return v.reshape(d, d).copy()


def vec_d2(g) -> np.ndarray:
    """Vectorization ``|Gamma)`` of a ``D^2 x D^2`` operator.

    The component at composite index ``(ij;kl)`` is ``Gamma_{ij;kl}``, which in
    row-major order is again just the flattened matrix.
    """
    g = as_square(g, "Gamma")
    isqrt_exact(g.shape[0])
    return g.reshape(-1).copy()


def beta(d: int) -> np.ndarray:
    """Permutation of ``H_D^{(x)4}`` that exchanges tensor factors 2 and 3.

    ``beta = sum_ijkl |ijkl><ikjl|``. It maps ``|Psi (x) Phi)`` onto
    ``|Psi>> (x) |Phi>>`` and is real, symmetric and an involution.
    """
    if d < 2:
        raise DimensionError("beta requires D >= 2")
    idx = np.arange(d**4).reshape(d, d, d, d)
    src = idx.transpose(0, 2, 1, 3).reshape(-1)
    out = np.zeros((d**4, d**4))
    out[np.arange(d**4), src] = 1.0
    return out


def swap_operator(d: int) -> np.ndarray:
    """Factor exchange on ``H_d (x) H_d``."""
    idx = np.arange(d * d).reshape(d, d)
    out = np.zeros((d * d, d * d))
    out[idx.T.reshape(-1), idx.reshape(-1)] = 1.0
    return out


def partial_transpose_second(rho, d: int) -> np.ndarray:
    r = np.asarray(rho).reshape(d, d, d, d)
    return r.transpose(0, 3, 2, 1).reshape(d * d, d * d)


def werner_sep(dim: int) -> np.ndarray:
    """Separable Werner state ``(I (x) I + |I>><<I|) / (dim (dim + 1))``.

    ``dim = D`` gives the single-system operator; ``dim = D^2`` gives the
    generalization acting on ``H_D^{(x)4}``.
    """
    if dim < 2:
        raise DimensionError("werner_sep requires dim >= 2")
    v = np.eye(dim, dtype=complex).reshape(-1)
    return (np.eye(dim * dim, dtype=complex) + np.outer(v, v)) / (dim * (dim + 1))


def ket_identity(dim: int) -> np.ndarray:
    """``|I_dim>>``."""
    return np.eye(dim, dtype=complex).reshape(-1)


def haar_state(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random pure state(s): normalized standard complex Gaussian vectors.

    With ``size`` given, returns an array of shape ``(size, d)``.
    """
    if d < 2:
        raise DimensionError("haar_state requires D >= 2")
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def haar_unitary(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with the phases of
    ``diag(R)`` folded back into ``Q``.
    """
    if d < 1:
        raise DimensionError("haar_unitary requires D >= 1")
    shape = (d, d) if size is None else (size, d, d)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix (Ginibre ensemble)."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def random_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
