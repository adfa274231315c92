"""Process-matrix elements from survive-probability protocols.

The basis is restricted to Pauli strings (subsystem dimension ``2^k``) because
the reconstruction needs every basis operator to be Hermitian and unitary.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, compose_pre, lambda_superop, pauli_string
from .estimators import ProtocolSpec, combine_entanglement, estimate_triple
from .tensor import ATOL_IDENTITY, DimensionError, isqrt_exact


@dataclass(frozen=True)
class OperatorBasis:
    """``n^2`` Hermitian unitaries on dimension ``n`` with ``Tr[G_mu G_nu] = n delta``."""

    dim: int
    ops: np.ndarray
    labels: tuple

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=complex)
        n = self.dim
        if ops.shape != (n * n, n, n):
            raise DimensionError(f"basis must have shape {(n * n, n, n)}, got {ops.shape}")
        gram = np.einsum("aij,bij->ab", ops.conj(), ops)
        if not np.allclose(gram, n * np.eye(n * n), atol=ATOL_IDENTITY, rtol=0):
            raise ValueError("basis operators are not orthogonal with norm n")
        herm = np.allclose(ops, ops.conj().transpose(0, 2, 1), atol=ATOL_IDENTITY, rtol=0)
        sq = np.allclose(ops @ ops, np.eye(n)[None], atol=ATOL_IDENTITY, rtol=0)
        if not (herm and sq):
            raise ValueError("basis operators must be Hermitian and unitary")
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return self.ops.shape[0]

    def index(self, key) -> int:
        if isinstance(key, str):
            try:
                return self.labels.index(key.upper())
            except ValueError:
                raise KeyError(f"no basis element labelled {key!r}") from None
        key = int(key)
        if not 0 <= key < len(self):
            raise IndexError(f"basis index {key} out of range")
        return key


def pauli_basis(n_qubits_per_side: int = 1) -> OperatorBasis:
    """All Pauli strings on ``2 * n_qubits_per_side`` qubits, labels in I<X<Y<Z order."""
    k = 2 * n_qubits_per_side
    labels = ["".join(p) for p in itertools.product("IXYZ", repeat=k)]
    ops = np.array([pauli_string(lab) for lab in labels])
    return OperatorBasis(2**k, ops, tuple(labels))


@dataclass(frozen=True)
class ChiMatrix:
    basis: OperatorBasis
    entries: np.ndarray

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries))

    def to_dict(self) -> dict:
        return {
            "labels": list(self.basis.labels),
            "entries_re": np.real(self.entries).tolist(),
            "entries_im": np.imag(self.entries).tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def diagonal_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "chi"])
        for lab, val in zip(self.basis.labels, self.diagonal()):
            w.writerow([lab, repr(float(val))])
        return buf.getvalue()

    def apply(self, rho) -> np.ndarray:
        """``sum_{mu,nu} chi_{mu;nu} G_mu rho G_nu^dag``."""
        g = self.basis.ops
        return np.einsum("mn,mij,jk,nlk->il", self.entries, g, np.asarray(rho), g.conj())


def _check_dims(channel: KrausChannel, basis: OperatorBasis):
    if channel.dim != basis.dim:
        raise DimensionError(f"channel dim {channel.dim} does not match basis dim {basis.dim}")


def chi_direct(channel: KrausChannel, basis: OperatorBasis) -> ChiMatrix:
    """``chi_{mu;nu} = (1/n^2) sum_n Tr[G_mu^dag E_n] (Tr[G_nu^dag E_n])^*``."""
    _check_dims(channel, basis)
    t = np.einsum("aji,mji->am", basis.ops.conj(), channel.kraus)
    return ChiMatrix(basis, t @ t.conj().T / channel.dim**2)


def chi_from_superop(channel: KrausChannel, basis: OperatorBasis) -> np.ndarray:
    """Second route: ``(1/n^2) Tr[lambda (G_mu (x) G_nu^*)]`` for every pair."""
    _check_dims(channel, basis)
    n = channel.dim
    lam = lambda_superop(channel).reshape(n, n, n, n)
    # Tr[lam (A (x) B*)] = sum lam[a c, b d] A[b a] B*[d c]
    return np.einsum("acbd,mba,ndc->mn", lam, basis.ops, basis.ops.conj()) / n**2


def _omega(channel: KrausChannel, g: np.ndarray, spec: ProtocolSpec, d: int) -> float:
    """Entanglement fidelity of the map ``Lambda o G`` for ``G`` a sum of two
    orthogonal Hermitian unitaries; here ``(I|lambda|I) = Tr[G^dag G] = 2 D^2``.
    """
    t = estimate_triple(channel, spec, pre=g)
    return (2 + (d + 1) ** 2 * t.f_ab - (d + 1) * (t.f_a + t.f_b)) / d**2


def _spec_or_default(spec: ProtocolSpec | None) -> ProtocolSpec:
    return spec if spec is not None else ProtocolSpec()


def chi_diagonal_protocol(channel: KrausChannel, basis: OperatorBasis, mu, spec: ProtocolSpec | None = None) -> float:
    """``chi_{mu;mu}`` as the entanglement fidelity of ``Lambda o G_mu``."""
    _check_dims(channel, basis)
    spec = _spec_or_default(spec)
    d = isqrt_exact(basis.dim)
    g = basis.ops[basis.index(mu)]
    triple = estimate_triple(compose_pre(channel, g), spec)
    return combine_entanglement(triple, d)


def chi_offdiagonal_pair(channel: KrausChannel, basis: OperatorBasis, mu, nu, spec: ProtocolSpec | None = None):
    """Return ``(chi_{mu;nu}, chi_{nu;mu})`` from the four prepared-input maps
    ``G_mu + G_nu``, ``G_mu - G_nu``, ``G_mu + i G_nu``, ``G_mu - i G_nu``.
    """
    _check_dims(channel, basis)
    spec = _spec_or_default(spec)
    i, j = basis.index(mu), basis.index(nu)
    if i == j:
        raise ValueError("mu == nu: use chi_diagonal_protocol")
    d = isqrt_exact(basis.dim)
    gm, gn = basis.ops[i], basis.ops[j]
    w_p = _omega(channel, gm + gn, spec, d)
    w_m = _omega(channel, gm - gn, spec, d)
    wt_p = _omega(channel, gm + 1j * gn, spec, d)
    wt_m = _omega(channel, gm - 1j * gn, spec, d)
    real = (w_p - w_m) / 4
    imag = (wt_p - wt_m) / 4
    return complex(real, imag), complex(real, -imag)


def chi_offdiagonal_protocol(channel: KrausChannel, basis: OperatorBasis, mu, nu, spec: ProtocolSpec | None = None) -> complex:
    return chi_offdiagonal_pair(channel, basis, mu, nu, spec)[0]


def chi_full_protocol(channel: KrausChannel, basis: OperatorBasis, spec: ProtocolSpec | None = None) -> ChiMatrix:
    """All ``n^4`` entries: diagonal elements, then each unordered off-diagonal pair."""
    _check_dims(channel, basis)
    spec = _spec_or_default(spec)
    size = len(basis)
    out = np.zeros((size, size), dtype=complex)
    for a in range(size):
        out[a, a] = chi_diagonal_protocol(channel, basis, a, spec)
    for a in range(size):
        for b in range(a + 1, size):
            out[a, b], out[b, a] = chi_offdiagonal_pair(channel, basis, a, b, spec)
    return ChiMatrix(basis, out)


def plus_constant(channel: KrausChannel, g: np.ndarray) -> float:
    """``(I|lambda_G|I)`` for the modified map; equals ``Tr[G^dag G]`` when the channel is TP."""
    lam = lambda_superop(compose_pre(channel, g))
    v = np.eye(channel.dim).reshape(-1)
    return float(np.real(v @ lam @ v))
