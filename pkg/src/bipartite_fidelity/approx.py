"""Approximate survive probabilities from a subset of ``M`` SIC states per side.

Norms in this module are squared Hilbert-Schmidt norms, ``||X|| = Tr[X X^dag]``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, average_fidelity_exact, lambda_superop
from .designs import StateDesign, make_sic
from .estimators import SurvivalTriple, _survival_batch
from .tensor import beta, hs_norm_sq, ket_identity, werner_sep


@dataclass(frozen=True)
class ApproxPlan:
    """``M`` distinct states drawn from the SIC set of dimension ``D``."""

    D: int
    M: int
    state_indices: tuple
    seed: int = 0

    def __post_init__(self):
        idx = tuple(int(i) for i in self.state_indices)
        object.__setattr__(self, "state_indices", idx)
        if not 1 < self.M <= self.D**2:
            raise ValueError(f"M must satisfy 1 < M <= D^2 = {self.D**2}, got {self.M}")
        if len(idx) != self.M or len(set(idx)) != self.M:
            raise ValueError("state_indices must hold M distinct indices")
        if not all(0 <= i < self.D**2 for i in idx):
            raise ValueError("state index out of range")

    @classmethod
    def prefix(cls, d: int, m: int) -> "ApproxPlan":
        return cls(d, m, tuple(range(m)))

    @classmethod
    def random(cls, d: int, m: int, seed: int) -> "ApproxPlan":
        rng = np.random.default_rng(seed)
        return cls(d, m, tuple(sorted(rng.choice(d * d, size=m, replace=False))), seed)

    def states(self) -> StateDesign:
        return make_sic(self.D).subset(self.state_indices)


@dataclass(frozen=True)
class ApproxReport:
    D: int
    M: int
    hs_norm_delta_appr: float
    hs_error: float
    hs_error_direct: float
    bound: float
    exact_f_avg: float | None = None
    approx_f_avg: float | None = None

    @property
    def margin(self) -> float:
        return self.bound - self.hs_error


def f_appr_triple(channel: KrausChannel, plan: ApproxPlan) -> SurvivalTriple:
    """``(1/M^2)`` double sums of the three survive probabilities over the subset."""
    if channel.subsystem_dim != plan.D:
        raise ValueError("channel subsystem dimension does not match the plan")
    s = plan.states().states
    ia, ib = np.meshgrid(np.arange(plan.M), np.arange(plan.M), indexing="ij")
    probs, _ = _survival_batch(channel.kraus, s[ia.reshape(-1)], s[ib.reshape(-1)])
    m = probs.mean(axis=0)
    return SurvivalTriple(float(m[0]), float(m[1]), float(m[2]), n_settings=plan.M**2)


def _projector_kets(plan: ApproxPlan) -> np.ndarray:
    s = plan.states().states
    return np.einsum("xi,xj->xij", s, s.conj()).reshape(plan.M, -1)


def delta_appr(plan: ApproxPlan) -> np.ndarray:
    """``(1/M^2) sum_ij |Psi_i (x) Psi_j)(R_i (x) R_j - I|`` with ``R = (D+1) Psi - I``."""
    d = plan.D
    s = plan.states().states
    proj = np.einsum("xi,xj->xij", s, s.conj())
    r = (d + 1) * proj - np.eye(d)
    out = np.zeros((d**4, d**4), dtype=complex)
    ident = np.eye(d * d).reshape(-1)
    for i in range(plan.M):
        for j in range(plan.M):
            ket = np.kron(proj[i], proj[j]).reshape(-1)
            bra = np.kron(r[i], r[j]).reshape(-1) - ident
            out += np.outer(ket, bra.conj())
    return out / plan.M**2


def appr_superops(plan: ApproxPlan) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(F_AB, F_A, F_B)`` of the subset, assembled through ``beta``."""
    d = plan.D
    b = beta(d)
    k = _projector_kets(plan)
    ident = ket_identity(d)
    p_sum = np.einsum("xi,xj->ij", k, k.conj()) / plan.M
    k_mean = k.mean(axis=0)
    to_i = np.outer(k_mean, ident)
    f_ab = b @ np.kron(p_sum, p_sum) @ b
    f_a = b @ np.kron(p_sum, to_i) @ b
    f_b = b @ np.kron(to_i, p_sum) @ b
    return f_ab, f_a, f_b


def delta_appr_superops(plan: ApproxPlan) -> np.ndarray:
    """``(D+1)^2 F_AB - (D+1)(F_A + F_B)`` for the subset (second route)."""
    d = plan.D
    f_ab, f_a, f_b = appr_superops(plan)
    return (d + 1) ** 2 * f_ab - (d + 1) * (f_a + f_b)


def delta_full(d: int) -> np.ndarray:
    """``(1/D^2)(I - |I)(I|)`` on ``H_D^{(x)4}``."""
    v = np.eye(d * d).reshape(-1)
    return (np.eye(d**4) - np.outer(v, v)) / d**2


def rho_appr(plan: ApproxPlan, delta: np.ndarray | None = None) -> np.ndarray:
    d = plan.D
    v = np.eye(d * d).reshape(-1)
    delta = delta_appr(plan) if delta is None else delta
    return 2 * np.outer(v, v) / (d * d * (d * d + 1)) + delta / (d * d + 1)


def closed_form_norm(d: int, m: int) -> float:
    """Closed-form ``||Delta_appr||`` for ``M`` distinct SIC states."""
    if not 1 < m <= d * d:
        raise ValueError(f"M must satisfy 1 < M <= {d * d}")
    return (
        (d**4 * (d + 2) ** 2 + (d * d - 2) * d * d) / (m * m * (1 + d) ** 2)
        - 4 * d / (m * (1 + d))
        + (d - 1) / (d + 1)
    )


def error_bound(d: int, m: int) -> float:
    return 0.0 if m == d * d else (1 + d) ** 2 / (m * m * d * d)


def hs_error(plan: ApproxPlan, channel: KrausChannel | None = None) -> ApproxReport:
    """Distance between the Werner state on ``H_D^{(x)4}`` and its subset approximation.

    Computed directly from the two operators and through
    ``(||Delta_appr|| - 2(D^2-1)/D^2) / (D^2+1)^2``; the report carries both.
    """
    d = plan.D
    delta = delta_appr(plan)
    norm = hs_norm_sq(delta)
    approx = rho_appr(plan, delta)
    direct = hs_norm_sq(werner_sep(d * d) - approx)
    via_norm = (norm - 2 * (d * d - 1) / d**2) / (d * d + 1) ** 2
    exact_f = approx_f = None
    if channel is not None:
        exact_f = average_fidelity_exact(channel)
        approx_f = approx_avg_fidelity(channel, plan, approx)
    return ApproxReport(d, plan.M, norm, via_norm, direct, error_bound(d, plan.M), exact_f, approx_f)


def approx_avg_fidelity(channel: KrausChannel, plan: ApproxPlan, rho: np.ndarray | None = None) -> float:
    """``Tr[rho_appr lambda]``."""
    rho = rho_appr(plan) if rho is None else rho
    return float(np.real(np.sum(rho * lambda_superop(channel).T)))


SWEEP_FIELDS = ("D", "M", "hs_norm", "closed_form", "hs_error", "bound", "margin")


def sweep(d: int, m_values, random_seed: int | None = None) -> list[dict]:
    rows = []
    for m in m_values:
        plan = ApproxPlan.prefix(d, m) if random_seed is None else ApproxPlan.random(d, m, random_seed)
        rep = hs_error(plan)
        rows.append(
            {
                "D": d,
                "M": m,
                "hs_norm": rep.hs_norm_delta_appr,
                "closed_form": closed_form_norm(d, m),
                "hs_error": rep.hs_error,
                "bound": rep.bound,
                "margin": rep.margin,
            }
        )
    return rows


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
