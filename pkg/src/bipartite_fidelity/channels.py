"""Kraus-form channels, their superoperators and exact fidelities."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from .designs import weyl_operators
from .tensor import (
    ATOL_IDENTITY,
    DimensionError,
    as_square,
    haar_unitary,
    is_unitary,
    isqrt_exact,
    swap_operator,
    werner_sep,
)


class NonPhysicalMapError(ValueError):
    """A trace-preserving-only computation was handed a non-TP map."""


@dataclass(frozen=True)
class KrausChannel:
    """``rho -> sum_m E_m rho E_m^dag`` on an ``n``-dimensional space.

    ``kraus`` is stored as an array of shape ``(m, n, n)``. When
    ``trace_preserving`` is true the completeness relation is enforced at
    construction; modified maps built from non-unitary operators switch it off.
    """

    kraus: np.ndarray
    trace_preserving: bool = True
    name: str = "custom"

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[1] != k.shape[2] or k.shape[0] == 0:
            raise DimensionError(f"Kraus operators must have shape (m, n, n), got {k.shape}")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)
        if self.trace_preserving:
            dev = completeness_deviation(k)
            if dev > ATOL_IDENTITY:
                raise NonPhysicalMapError(f"sum E^dag E deviates from identity by {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    @property
    def subsystem_dim(self) -> int:
        return isqrt_exact(self.dim)

    def __len__(self) -> int:
        return self.kraus.shape[0]

    def require_tp(self):
        if not self.trace_preserving:
            raise NonPhysicalMapError(f"channel {self.name!r} is not trace preserving")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in e] for e in self.kraus],
            "trace_preserving": bool(self.trace_preserving),
        }

    @classmethod
    def from_dict(cls, data: dict, name: str = "custom") -> "KrausChannel":
        kraus = np.array([[[complex(re_, im) for re_, im in row] for row in e] for e in data["kraus"]])
        ch = cls(kraus, bool(data.get("trace_preserving", True)), name)
        if "dim" in data and int(data["dim"]) != ch.dim:
            raise DimensionError(f"declared dim {data['dim']} does not match Kraus shape {ch.dim}")
        return ch

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str, name: str = "custom") -> "KrausChannel":
        return cls.from_dict(json.loads(text), name)


def completeness_deviation(kraus) -> float:
    k = np.asarray(kraus)
    s = np.einsum("mji,mjk->ik", k.conj(), k)
    return float(np.max(np.abs(s - np.eye(k.shape[1]))))


def apply(channel: KrausChannel, rho) -> np.ndarray:
    rho = as_square(rho, "rho")
    if rho.shape[0] != channel.dim:
        raise DimensionError(f"rho has dim {rho.shape[0]}, channel has dim {channel.dim}")
    k = channel.kraus
    return np.einsum("mij,jk,mlk->il", k, rho, k.conj())


def lambda_superop(channel: KrausChannel) -> np.ndarray:
    """``lambda = sum_m E_m (x) E_m^*``, so that ``|Lambda(rho)) = lambda |rho)``."""
    k = channel.kraus
    n = channel.dim
    return np.einsum("mab,mcd->acbd", k, k.conj()).reshape(n * n, n * n)


def entanglement_fidelity(channel: KrausChannel, bipartite: bool = True) -> float:
    """``(1/n^2) sum_m |Tr E_m|^2`` with ``n`` the channel dimension.

    For a bipartite channel ``n = D^2`` and the prefactor is ``1/D^4``. Pass
    ``bipartite=False`` to use it on a single system.
    """
    channel.require_tp()
    if bipartite:
        isqrt_exact(channel.dim)
    tr = np.trace(channel.kraus, axis1=1, axis2=2)
    return float(np.sum(np.abs(tr) ** 2) / channel.dim**2)


def average_fidelity_exact(channel: KrausChannel, bipartite: bool = True) -> float:
    """``(n f_ent + 1)/(n + 1)`` for a trace-preserving channel on dimension ``n``."""
    n = channel.dim
    return (n * entanglement_fidelity(channel, bipartite) + 1) / (n + 1)


def average_fidelity_werner(channel: KrausChannel) -> float:
    """``Tr[rho_W^sep lambda]`` evaluated on the channel dimension."""
    channel.require_tp()
    val = np.trace(werner_sep(channel.dim) @ lambda_superop(channel))
    return float(val.real)


def compose_pre(channel: KrausChannel, g) -> KrausChannel:
    """Modified map ``rho -> sum_n E_n (G rho G^dag) E_n^dag``.

    The result is flagged trace preserving only when ``G`` is unitary.
    """
    g = as_square(g, "G")
    if g.shape[0] != channel.dim:
        raise DimensionError(f"G has dim {g.shape[0]}, channel has dim {channel.dim}")
    tp = channel.trace_preserving and is_unitary(g)
    return KrausChannel(channel.kraus @ g, tp, f"{channel.name}o G")


# --- channel zoo ---------------------------------------------------------

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string(label: str) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for ch in label.upper():
        if ch not in PAULI:
            raise ValueError(f"bad Pauli label {label!r}")
        out = np.kron(out, PAULI[ch])
    return out


def _check_prob(p: float, name: str) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name}={p} must lie in [0, 1]")
    return p


def depolarizing_kraus(n: int, p: float) -> np.ndarray:
    """``rho -> (1-p) rho + p Tr[rho] I/n`` as Weyl-operator Kraus terms."""
    p = _check_prob(p, "p")
    ops = weyl_operators(n)
    weights = np.full(len(ops), p / n**2)
    weights[0] += 1 - p
    keep = weights > 0
    return np.array([np.sqrt(w) * w_op for w, w_op, k in zip(weights, ops, keep) if k])


def _kron_kraus(ka: np.ndarray, kb: np.ndarray) -> np.ndarray:
    return np.array([np.kron(a, b) for a in ka for b in kb])


def random_kraus_ops(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Kraus operators from the first ``n`` columns of a Haar unitary on ``n*rank``."""
    v = haar_unitary(n * rank, rng)[:, :n]
    return v.reshape(rank, n, n)


ZOO_NAMES = (
    "identity",
    "global_depolarizing",
    "local_depolarizing",
    "product_unitary",
    "random_unitary_mixture",
    "random_kraus",
    "pauli",
    "swap",
)


def channel_zoo(name: str, d: int, rng: np.random.Generator | None = None, **params) -> KrausChannel:
    """Named trace-preserving test channels on ``H_D (x) H_D``.

    ``name`` accepts dashes or underscores. Parameters: ``p`` for
    global_depolarizing, ``p_a``/``p_b`` for local_depolarizing, ``k`` for
    random_unitary_mixture, ``r`` for random_kraus, ``label`` for pauli
    (D=2 only, e.g. ``"XX"``).
    """
    key = name.replace("-", "_").lower()
    n = d * d
    rng = rng if rng is not None else np.random.default_rng(0)
    tag = _format_name(key, params)
    if key == "identity":
        kraus = np.eye(n, dtype=complex)[None]
    elif key == "global_depolarizing":
        kraus = depolarizing_kraus(n, params.get("p", 1.0))
    elif key == "local_depolarizing":
        pa = params.get("p_a", params.get("pa", 0.0))
        pb = params.get("p_b", params.get("pb", 0.0))
        kraus = _kron_kraus(depolarizing_kraus(d, pa), depolarizing_kraus(d, pb))
    elif key == "product_unitary":
        kraus = np.kron(haar_unitary(d, rng), haar_unitary(d, rng))[None]
    elif key == "random_unitary_mixture":
        k = int(params.get("k", 3))
        if k < 1:
            raise ValueError("k must be >= 1")
        probs = rng.dirichlet(np.ones(k))
        kraus = np.array([np.sqrt(p) * haar_unitary(n, rng) for p in probs])
    elif key == "random_kraus":
        r = int(params.get("r", 3))
        if r < 1:
            raise ValueError("r must be >= 1")
        kraus = random_kraus_ops(n, r, rng)
    elif key == "pauli":
        label = str(params.get("label", "XX"))
        if d != 2 or len(label) != 2:
            raise DimensionError("pauli channel needs D=2 and a two-letter label")
        kraus = pauli_string(label)[None]
    elif key == "swap":
        kraus = swap_operator(d).astype(complex)[None]
    else:
        raise ValueError(f"unknown channel {name!r}; choose from {', '.join(ZOO_NAMES)}")
    return KrausChannel(kraus, True, tag)


def _format_name(key: str, params: dict) -> str:
    if not params:
        return key
    return key + ":" + ",".join(f"{k}={params[k]}" for k in sorted(params))


_PARAM_RE = re.compile(r"^\s*([A-Za-z_]+)\s*=\s*(.+?)\s*$")


def parse_channel_spec(spec: str) -> tuple[str, dict]:
    """Parse ``"name:key=val,key=val"`` (or ``"pauli:XX"``) into name and params."""
    name, _, rest = spec.partition(":")
    name = name.strip().replace("-", "_").lower()
    params: dict = {}
    if rest:
        for item in rest.split(","):
            m = _PARAM_RE.match(item)
            if m:
                k, v = m.group(1).lower(), m.group(2)
                try:
                    params[k] = int(v)
                except ValueError:
                    try:
                        params[k] = float(v)
                    except ValueError:
                        params[k] = v
            elif name == "pauli":
                params["label"] = item.strip()
            else:
                raise ValueError(f"cannot parse channel parameter {item!r}")
    if name not in ZOO_NAMES:
        raise ValueError(f"unknown channel {name!r}; choose from {', '.join(ZOO_NAMES)}")
    return name, params
