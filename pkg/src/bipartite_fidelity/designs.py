"""State 2-designs (SIC sets, complete MUBs) and the single-qubit Clifford group."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .tensor import ATOL_IDENTITY, DimensionError, random_hermitian, werner_sep


class UnsupportedDimension(ValueError):
    """No construction is available for the requested dimension."""


class DesignKind(str, Enum):
    SIC = "SIC"
    MUB = "MUB"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class StateDesign:
    """A finite set of pure states claimed to form a 2-design.

    ``states`` has shape ``(N, dim)``; row ``x`` is ``|psi_x>``.
    """

    dim: int
    states: np.ndarray
    kind: DesignKind = DesignKind.CUSTOM

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        if states.ndim != 2 or states.shape[1] != self.dim or states.shape[0] == 0:
            raise DimensionError(f"states must have shape (N, {self.dim}), got {states.shape}")
        norms = np.linalg.norm(states, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-12, rtol=0):
            raise ValueError("design states must be normalized")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "kind", DesignKind(self.kind))

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def projectors(self) -> np.ndarray:
        return np.einsum("xi,xj->xij", self.states, self.states.conj())

    def subset(self, indices) -> "StateDesign":
        return StateDesign(self.dim, self.states[list(indices)], DesignKind.CUSTOM)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "kind": self.kind.value,
            "states": [[[float(z.real), float(z.imag)] for z in s] for s in self.states],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StateDesign":
        states = np.array([[complex(re, im) for re, im in s] for s in data["states"]])
        return cls(int(data["dim"]), states, DesignKind(data.get("kind", "Custom")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "StateDesign":
        return cls.from_dict(json.loads(text))


def weyl_operators(d: int) -> list[np.ndarray]:
    """Displacement operators ``X^a Z^b`` for ``a, b`` in ``0..d-1`` (a-major)."""
    omega = np.exp(2j * np.pi / d)
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(omega ** np.arange(d))
    ops = []
    for a in range(d):
        xa = np.linalg.matrix_power(x, a)
        for b in range(d):
            ops.append(xa @ np.linalg.matrix_power(z, b))
    return ops


def make_sic(d: int) -> StateDesign:
    """SIC set of ``d^2`` states with pairwise squared overlap ``1/(d+1)``.

    d=2 is the Bloch tetrahedron; d=3 is the Weyl-Heisenberg orbit of the
    fiducial ``(0, 1, -1)/sqrt(2)``.
    """
    if d == 2:
        a, b = 1 / np.sqrt(3), np.sqrt(2 / 3)
        states = [np.array([1, 0], dtype=complex)]
        states += [np.array([a, b * np.exp(2j * np.pi * k / 3)]) for k in range(3)]
        return StateDesign(2, np.array(states), DesignKind.SIC)
    if d == 3:
        fid = np.array([0, 1, -1], dtype=complex) / np.sqrt(2)
        states = np.array([w @ fid for w in weyl_operators(3)])
        return StateDesign(3, states, DesignKind.SIC)
    raise UnsupportedDimension(f"no SIC fiducial available for D={d} (supported: 2, 3)")


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, int(n**0.5) + 1))


def make_mub(d: int) -> StateDesign:
    """Complete set of ``d + 1`` mutually unbiased bases for prime ``d``.

    States are grouped basis by basis; the computational basis comes first.
    """
    if not _is_prime(d):
        raise UnsupportedDimension(f"MUB construction requires prime D, got {d}")
    if d == 2:
        s = 1 / np.sqrt(2)
        states = [[1, 0], [0, 1], [s, s], [s, -s], [s, 1j * s], [s, -1j * s]]
        return StateDesign(2, np.array(states, dtype=complex), DesignKind.MUB)
    omega = np.exp(2j * np.pi / d)
    k = np.arange(d)
    states = list(np.eye(d, dtype=complex))
    for a in range(d):
        for b in range(d):
            states.append(omega ** ((a * k * k + b * k) % d) / np.sqrt(d))
    return StateDesign(d, np.array(states), DesignKind.MUB)


def frame_operator(design: StateDesign) -> np.ndarray:
    """``(1/N) sum_x Psi_x (x) Psi_x^*``."""
    p = design.projectors
    return np.einsum("xab,xcd->acbd", p, p.conj()).reshape(design.dim**2, design.dim**2) / len(design)


def verify_2design(design: StateDesign, n_checks: int = 20, seed: int = 0, atol: float = ATOL_IDENTITY) -> dict:
    """Check the 2-design property two ways.

    The frame operator is compared with ``werner_sep`` in Frobenius norm, and the
    trace identity ``(1/N) sum Tr[Psi A Psi B] = (Tr A Tr B + Tr AB)/(D(D+1))``
    is spot-checked on random Hermitian pairs.
    """
    d = design.dim
    deviation = float(np.linalg.norm(frame_operator(design) - werner_sep(d)))
    rng = np.random.default_rng(seed)
    p = design.projectors
    trace_dev = 0.0
    for _ in range(n_checks):
        a, b = random_hermitian(d, rng), random_hermitian(d, rng)
        lhs = np.einsum("xij,jk,xkl,li->", p, a, p, b) / len(design)
        rhs = (np.trace(a) * np.trace(b) + np.trace(a @ b)) / (d * (d + 1))
        trace_dev = max(trace_dev, abs(lhs - rhs))
    return {
        "max_deviation": max(deviation, float(trace_dev)),
        "frame_deviation": deviation,
        "trace_identity_deviation": float(trace_dev),
        "pass": bool(deviation <= atol and trace_dev <= atol),
    }


def _canonical_phase(u: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    flat = u.reshape(-1)
    first = flat[np.argmax(np.abs(flat) > atol)]
    return u * (abs(first) / first)


def _key(u: np.ndarray) -> tuple:
    return tuple(np.round(u.reshape(-1), 8).view(float) + 0.0)


@dataclass(frozen=True)
class CliffordGroup:
    dim: int
    elements: tuple

    def __len__(self) -> int:
        return len(self.elements)

    def as_array(self) -> np.ndarray:
        return np.array(self.elements)


def clifford_group(d: int = 2) -> CliffordGroup:
    """Single-qubit Clifford group, closed from H and S, modulo global phase."""
    if d != 2:
        raise UnsupportedDimension(f"Clifford group only supported for D=2, got {d}")
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j])
    gens = [h, s]
    ident = np.eye(2, dtype=complex)
    found = {_key(ident): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                w = _canonical_phase(g @ u)
                k = _key(w)
                if k not in found:
                    found[k] = w
                    nxt.append(w)
        frontier = nxt
    return CliffordGroup(2, tuple(found.values()))
