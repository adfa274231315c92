"""Average survive probabilities and the fidelities built from them.

Three quantities are estimated for a channel on ``H_D (x) H_D`` fed product
inputs ``Psi (x) Phi``: the joint survive probability ``f_AB``, and the
subsystem ones ``f_A`` (measure ``Psi (x) I``) and ``f_B`` (measure
``I (x) Phi``). Their averages determine the entanglement fidelity and the
average fidelity of the channel.

Settings are processed in fixed-size chunks. Each chunk draws from its own
child of ``SeedSequence(seed)``, so results do not depend on how many worker
threads are used.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import KrausChannel, lambda_superop
from .designs import StateDesign, UnsupportedDimension, clifford_group, make_sic, verify_2design
from .tensor import DimensionError, beta, haar_state, haar_unitary, ket_identity, werner_sep

CHUNK = 1024
MODES = ("exact", "shots")
SOURCES = ("haar_product", "design_product", "twirl_haar", "twirl_clifford")


@dataclass(frozen=True)
class SurvivalTriple:
    f_ab: float
    f_a: float
    f_b: float
    se_ab: float = 0.0
    se_a: float = 0.0
    se_b: float = 0.0
    n_settings: int = 0
    shots_per_setting: int = 0
    clip_count: int = 0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.f_ab, self.f_a, self.f_b)

    def to_dict(self) -> dict:
        return {
            "f_ab": self.f_ab,
            "f_a": self.f_a,
            "f_b": self.f_b,
            "se_ab": self.se_ab,
            "se_a": self.se_a,
            "se_b": self.se_b,
            "n_settings": self.n_settings,
            "shots_per_setting": self.shots_per_setting,
            "clip_count": self.clip_count,
        }


@dataclass(frozen=True)
class ProtocolSpec:
    """How the three survive probabilities are collected.

    ``input_source`` selects the product-input protocol: Haar-random product
    states, a product of two state 2-designs, or a fixed input
    ``|0> (x) |0>`` conjugated by random ``U (x) V`` (Haar) or ``C_i (x) C_j``
    (single-qubit Cliffords). ``n_settings`` is ignored where the settings are
    enumerated (designs, and Clifford pairs in exact mode).
    """

    mode: str = "exact"
    input_source: str = "design_product"
    n_settings: int = 10_000
    shots: int = 1000
    seed: int = 0
    design_a: StateDesign | None = None
    design_b: StateDesign | None = None
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.input_source not in SOURCES:
            raise ValueError(f"input_source must be one of {SOURCES}, got {self.input_source!r}")
        if self.mode == "shots" and self.shots < 1:
            raise ValueError("shots must be >= 1 in shots mode")
        if self.n_settings < 1:
            raise ValueError("n_settings must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for design in (self.design_a, self.design_b):
            if design is not None and design.kind.value == "Custom" and not verify_2design(design)["pass"]:
                raise ValueError("custom design does not pass the 2-design check")


# --- pointwise evaluation ------------------------------------------------

def _product_vectors(psi: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return np.einsum("sa,sb->sab", psi, phi).reshape(psi.shape[0], -1)


def _survival_batch(kraus: np.ndarray, psi: np.ndarray, phi: np.ndarray, pre: np.ndarray | None = None):
    """Exact ``(f_AB, f_A, f_B)`` per setting plus the input norm ``Tr[rho_in]``.

    ``pre`` is an optional (possibly non-unitary) operator applied to the
    product input before the channel; the resulting input is left
    unnormalized.
    """
    d = psi.shape[1]
    v = _product_vectors(psi, phi)
    if pre is not None:
        v = v @ pre.T
    norms = np.sum(np.abs(v) ** 2, axis=1)
    w = np.einsum("mij,sj->smi", kraus, v).reshape(v.shape[0], kraus.shape[0], d, d)
    amp_a = np.einsum("sa,smab->smb", psi.conj(), w)
    amp_b = np.einsum("sb,smab->sma", phi.conj(), w)
    amp_ab = np.einsum("smb,sb->sm", amp_a, phi.conj())
    f_ab = np.sum(np.abs(amp_ab) ** 2, axis=1)
    f_a = np.sum(np.abs(amp_a) ** 2, axis=(1, 2))
    f_b = np.sum(np.abs(amp_b) ** 2, axis=(1, 2))
    return np.stack([f_ab, f_a, f_b], axis=1), norms


def _twirl_batch(kraus: np.ndarray, u: np.ndarray, v: np.ndarray):
    """Survive probabilities of ``|0>|0>`` through ``W^dag Lambda(W . W^dag) W``, ``W = U (x) V``."""
    s, d = u.shape[0], u.shape[1]
    w_op = np.einsum("sac,sbd->sabcd", u, v).reshape(s, d * d, d * d)
    inp = w_op[:, :, 0]
    out = np.einsum("mij,sj->smi", kraus, inp)
    back = np.einsum("sji,smj->smi", w_op.conj(), out).reshape(s, kraus.shape[0], d, d)
    f_ab = np.sum(np.abs(back[:, :, 0, 0]) ** 2, axis=1)
    f_a = np.sum(np.abs(back[:, :, 0, :]) ** 2, axis=(1, 2))
    f_b = np.sum(np.abs(back[:, :, :, 0]) ** 2, axis=(1, 2))
    return np.stack([f_ab, f_a, f_b], axis=1), np.ones(s)


def survival_probs_pointwise(channel: KrausChannel, psi, phi) -> tuple[float, float, float]:
    """``(f_AB, f_A, f_B)`` for a single product input ``psi (x) phi``."""
    psi = np.asarray(psi, dtype=complex).reshape(1, -1)
    phi = np.asarray(phi, dtype=complex).reshape(1, -1)
    d = channel.subsystem_dim
    if psi.shape[1] != d or phi.shape[1] != d:
        raise DimensionError(f"states must have dim {d}")
    probs, _ = _survival_batch(channel.kraus, psi, phi)
    return tuple(float(x) for x in probs[0])


# --- protocol estimation ---------------------------------------------------

def _default_design(d: int) -> StateDesign:
    return make_sic(d)


def _enumerate_pairs(n_a: int, n_b: int) -> tuple[np.ndarray, np.ndarray]:
    ia, ib = np.meshgrid(np.arange(n_a), np.arange(n_b), indexing="ij")
    return ia.reshape(-1), ib.reshape(-1)


def _chunk_job(job):
    kind, payload, kraus, pre, mode, shots, seed_seq = job
    rng = np.random.default_rng(seed_seq)
    if kind == "haar_product":
        count, d = payload
        psi = haar_state(d, rng, size=count)
        phi = haar_state(d, rng, size=count)
        probs, norms = _survival_batch(kraus, psi, phi, pre)
    elif kind == "states":
        psi, phi = payload
        probs, norms = _survival_batch(kraus, psi, phi, pre)
    elif kind == "twirl_haar":
        count, d = payload
        u = haar_unitary(d, rng, size=count)
        v = haar_unitary(d, rng, size=count)
        probs, norms = _twirl_batch(kraus, u, v)
    elif kind == "twirl_clifford_sampled":
        count, cliffs = payload
        i = rng.integers(len(cliffs), size=count)
        j = rng.integers(len(cliffs), size=count)
        probs, norms = _twirl_batch(kraus, cliffs[i], cliffs[j])
    elif kind == "unitaries":
        u, v = payload
        probs, norms = _twirl_batch(kraus, u, v)
    else:  # pragma: no cover
        raise ValueError(kind)
    clips = 0
    if mode == "shots":
        scaled = probs / norms[:, None]
        clipped = np.clip(scaled, 0.0, 1.0)
        clips = int(np.count_nonzero(np.abs(clipped - scaled) > 0))
        hits = rng.binomial(shots, clipped)
        probs = hits / shots * norms[:, None]
    return probs, norms, clips


def estimate_triple(channel: KrausChannel, spec: ProtocolSpec, pre=None) -> SurvivalTriple:
    """Estimate the averaged triple with the protocol described by ``spec``.

    ``pre`` prepares the inputs ``G (psi_x (x) phi_y)`` for the non-physical
    maps used in process-matrix reconstruction; it is only meaningful with
    product-state sources.
    """
    d = channel.subsystem_dim
    kraus = channel.kraus
    if pre is not None:
        pre = np.asarray(pre, dtype=complex)
        if spec.input_source.startswith("twirl"):
            raise ValueError("prepared non-product inputs require a product-state source")
    enumerated = False
    jobs = []
    root = np.random.SeedSequence(spec.seed)

    if spec.input_source == "design_product":
        da = spec.design_a or _default_design(d)
        db = spec.design_b or da
        if da.dim != d or db.dim != d:
            raise DimensionError("design dimension does not match the channel subsystem")
        ia, ib = _enumerate_pairs(len(da), len(db))
        psi_all, phi_all = da.states[ia], db.states[ib]
        total = ia.size
        enumerated = True
        seeds = root.spawn(math.ceil(total / CHUNK))
        for c, ss in enumerate(seeds):
            sl = slice(c * CHUNK, (c + 1) * CHUNK)
            jobs.append(("states", (psi_all[sl], phi_all[sl]), kraus, pre, spec.mode, spec.shots, ss))
    elif spec.input_source == "twirl_clifford":
        if d != 2:
            raise UnsupportedDimension("Clifford twirling is only available for D=2")
        cliffs = clifford_group(2).as_array()
        if spec.mode == "exact":
            ia, ib = _enumerate_pairs(len(cliffs), len(cliffs))
            total = ia.size
            enumerated = True
            seeds = root.spawn(math.ceil(total / CHUNK))
            for c, ss in enumerate(seeds):
                sl = slice(c * CHUNK, (c + 1) * CHUNK)
                jobs.append(("unitaries", (cliffs[ia[sl]], cliffs[ib[sl]]), kraus, None, spec.mode, spec.shots, ss))
        else:
            total = spec.n_settings
            seeds = root.spawn(math.ceil(total / CHUNK))
            for c, ss in enumerate(seeds):
                count = min(CHUNK, total - c * CHUNK)
                jobs.append(("twirl_clifford_sampled", (count, cliffs), kraus, None, spec.mode, spec.shots, ss))
    else:
        total = spec.n_settings
        seeds = root.spawn(math.ceil(total / CHUNK))
        for c, ss in enumerate(seeds):
            count = min(CHUNK, total - c * CHUNK)
            jobs.append((spec.input_source, (count, d), kraus, pre, spec.mode, spec.shots, ss))

    if spec.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_chunk_job, jobs))
    else:
        results = [_chunk_job(j) for j in jobs]

    probs = np.concatenate([r[0] for r in results])
    norms = np.concatenate([r[1] for r in results])
    clips = sum(r[2] for r in results)
    mean = probs.mean(axis=0)
    n = probs.shape[0]
    if enumerated and spec.mode == "exact":
        se = np.zeros(3)
    elif enumerated:
        # settings are fixed; only binomial shot noise contributes
        p = np.clip(probs / norms[:, None], 0.0, 1.0)
        var = p * (1 - p) / spec.shots * (norms[:, None] ** 2)
        se = np.sqrt(var.sum(axis=0)) / n
    else:
        se = probs.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full(3, np.nan)
    return SurvivalTriple(
        float(mean[0]),
        float(mean[1]),
        float(mean[2]),
        float(se[0]),
        float(se[1]),
        float(se[2]),
        n_settings=int(n),
        shots_per_setting=spec.shots if spec.mode == "shots" else 0,
        clip_count=int(clips),
    )


# --- superoperator route ---------------------------------------------------

@lru_cache(maxsize=8)
def survival_superops(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(F_AB, F_A, F_B)`` as operators on ``H_D^{(x)4}``.

    ``F_AB = beta (W (x) W) beta``, ``F_A = beta (W (x) |I>><<I|/D) beta`` and
    ``F_B = beta (|I>><<I|/D (x) W) beta`` with ``W`` the separable Werner state.
    """
    b = beta(d)
    w = werner_sep(d)
    ii = np.outer(ket_identity(d), ket_identity(d)) / d
    f_ab = b @ np.kron(w, w) @ b
    f_a = b @ np.kron(w, ii) @ b
    f_b = b @ np.kron(ii, w) @ b
    for m in (f_ab, f_a, f_b):
        m.setflags(write=False)
    return f_ab, f_a, f_b


def _trace_product(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.sum(a * b.T))


def superop_triple_exact(channel: KrausChannel) -> SurvivalTriple:
    """Exact triple as ``Tr[F_alpha lambda]`` for ``alpha`` in AB, A, B."""
    d = channel.subsystem_dim
    lam = lambda_superop(channel)
    vals = []
    for f in survival_superops(d):
        z = _trace_product(f, lam)
        if abs(z.imag) > 1e-10:
            raise ArithmeticError(f"survive probability has imaginary part {z.imag:.3e}")
        vals.append(z.real)
    return SurvivalTriple(*vals)


# --- combiners -------------------------------------------------------------

def combine_entanglement(triple: SurvivalTriple, d: int) -> float:
    """Entanglement fidelity ``(1/D^2){1 + (D+1)^2 f_AB - (D+1)(f_A + f_B)}``.

    Noisy triples can push the value outside ``[0, 1]``; it is not clipped.
    """
    return (1 + (d + 1) ** 2 * triple.f_ab - (d + 1) * (triple.f_a + triple.f_b)) / d**2


def combine_average(triple: SurvivalTriple, d: int) -> float:
    """Average fidelity ``(1/(D^2+1)){2 + (D+1)^2 f_AB - (D+1)(f_A + f_B)}``."""
    return (2 + (d + 1) ** 2 * triple.f_ab - (d + 1) * (triple.f_a + triple.f_b)) / (d**2 + 1)


def propagate_se(triple: SurvivalTriple, d: int) -> tuple[float, float]:
    """Standard errors of (f_ent, f_avg), treating the three estimates as independent."""
    s = math.sqrt(((d + 1) ** 2 * triple.se_ab) ** 2 + ((d + 1) * triple.se_a) ** 2 + ((d + 1) * triple.se_b) ** 2)
    return s / d**2, s / (d**2 + 1)


def quality_flag(value: float, tol: float = 1e-12) -> str:
    return "ok" if -tol <= value <= 1 + tol else "out_of_range"


# --- single-system protocols -------------------------------------------------

def single_system_avg_fidelity(
    channel: KrausChannel,
    protocol: str = "design",
    n_settings: int = 10_000,
    seed: int = 0,
    design: StateDesign | None = None,
) -> float:
    """Average fidelity of a channel on one ``D``-level system.

    ``protocol`` is ``"haar"`` (random input states), ``"haar_twirl"``
    (fixed ``|0>`` conjugated by Haar unitaries), ``"clifford"`` (all 24
    single-qubit Cliffords) or ``"design"`` (a state 2-design, SIC by default).
    """
    d = channel.dim
    k = channel.kraus
    rng = np.random.default_rng(seed)
    if protocol == "haar":
        states = haar_state(d, rng, size=n_settings)
    elif protocol == "haar_twirl":
        states = haar_unitary(d, rng, size=n_settings)[:, :, 0]
    elif protocol == "clifford":
        if d != 2:
            raise UnsupportedDimension("Clifford protocol is only available for D=2")
        states = clifford_group(2).as_array()[:, :, 0]
    elif protocol == "design":
        states = (design or make_sic(d)).states
        if states.shape[1] != d:
            raise DimensionError("design dimension does not match the channel")
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    amps = np.einsum("si,mij,sj->sm", states.conj(), k, states)
    return float(np.mean(np.sum(np.abs(amps) ** 2, axis=1)))
