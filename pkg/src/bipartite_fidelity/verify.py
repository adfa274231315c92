"""One-shot numerical identity suite behind ``bifid verify``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import approx as ap
from .channels import (
    KrausChannel,
    average_fidelity_exact,
    channel_zoo,
    entanglement_fidelity,
    lambda_superop,
    pauli_string,
)
from .chi import plus_constant
from .designs import UnsupportedDimension, clifford_group, make_mub, make_sic, verify_2design
from .estimators import (
    ProtocolSpec,
    combine_average,
    combine_entanglement,
    estimate_triple,
    superop_triple_exact,
    survival_superops,
)
from .tensor import (
    beta,
    haar_state,
    haar_unitary,
    ket_identity,
    random_hermitian,
    random_matrix,
    vec_d,
    vec_d2,
    werner_sep,
)

TOL = 1e-10


@dataclass
class Check:
    name: str
    dim: int
    passed: bool | None
    value: float
    detail: str = ""

    @property
    def status(self) -> str:
        return "SKIP" if self.passed is None else ("PASS" if self.passed else "FAIL")

    def line(self) -> str:
        return f"{self.status}  D={self.dim}  {self.name:<38s} {self.value:.3e}  {self.detail}".rstrip()


def twirl_frame_mc(d: int, n_samples: int, rng: np.random.Generator, batch: int = 20_000) -> np.ndarray:
    """Monte Carlo ``E_U[(U (x) U^*)|Psi0>><<Psi0|(U (x) U^*)^dag]`` with ``Psi0 = |0><0|``."""
    acc = np.zeros((d * d, d * d), dtype=complex)
    done = 0
    while done < n_samples:
        count = min(batch, n_samples - done)
        cols = haar_unitary(d, rng, size=count)[:, :, 0]
        k = np.einsum("si,sj->sij", cols, cols.conj()).reshape(count, -1)
        acc += k.T @ k.conj()
        done += count
    return acc / n_samples


def _random_channels(d: int, rng, count: int = 3) -> list[KrausChannel]:
    return [channel_zoo("random_kraus", d, rng, r=r) for r in range(1, count + 1)]


def run_suite(dims=(2, 3), include_appendix: bool = False, haar_samples: int = 100_000, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out: list[Check] = []

    def add(name, d, err, tol=TOL, detail=""):
        out.append(Check(name, d, bool(err <= tol), float(err), detail))

    for d in dims:
        n = d * d
        a, b, rho = random_matrix(d, rng), random_matrix(d, rng), random_matrix(d, rng)
        add("vec inner product", d, abs(np.vdot(vec_d(a), vec_d(b)) - np.trace(a.conj().T @ b)))
        add("vec(A rho B) = (A x B^T) vec(rho)", d, np.abs(vec_d(a @ rho @ b) - np.kron(a, b.T) @ vec_d(rho)).max())
        psi, phi = haar_state(d, rng), haar_state(d, rng)
        add("vec(|psi><phi|) = psi x phi*", d, np.abs(vec_d(np.outer(psi, phi.conj())) - np.kron(psi, phi.conj())).max())
        g, s, dl = random_matrix(n, rng), random_matrix(n, rng), random_matrix(n, rng)
        add("four-index vec identity", d, np.abs(vec_d2(g @ s @ dl) - np.kron(g, dl.T) @ vec_d2(s)).max())
        bt = beta(d)
        add("beta involution", d, np.abs(bt @ bt - np.eye(d**4)).max())
        pa, pb = np.outer(psi, psi.conj()), np.outer(phi, phi.conj())
        add("beta |Psi x Phi) = |Psi>> x |Phi>>", d, np.abs(bt @ vec_d2(np.kron(pa, pb)) - np.kron(vec_d(pa), vec_d(pb))).max())

        for maker in (make_sic, make_mub):
            try:
                rep = verify_2design(maker(d))
                add(f"2-design ({maker.__name__[5:].upper()})", d, rep["max_deviation"])
            except UnsupportedDimension as exc:
                out.append(Check(f"2-design ({maker.__name__[5:].upper()})", d, None, 0.0, str(exc)))

        ha, hb = random_hermitian(d, rng), random_hermitian(d, rng)
        lhs = np.trace(werner_sep(d) @ np.kron(ha, hb.conj()))
        rhs = (np.trace(ha) * np.trace(hb) + np.trace(ha @ hb)) / (d * (d + 1))
        add("Werner trace identity", d, abs(lhs - rhs))

        if d == 2:
            cl = clifford_group(2).as_array()
            k = np.einsum("si,sj->sij", cl[:, :, 0], cl[:, :, 0].conj()).reshape(len(cl), -1)
            add("Clifford twirl frame = Werner", d, np.abs(k.T @ k.conj() / len(cl) - werner_sep(2)).max())
        else:
            out.append(Check("Clifford twirl frame = Werner", d, None, 0.0, "skipped: Clifford group only for D=2"))

        f_ab, f_a, f_b = survival_superops(d)
        ident = np.eye(d**4) - d * d * (d + 1) ** 2 * (f_ab - (f_a + f_b) / (d + 1))
        v = ket_identity(n)
        add("identity expansion via F operators", d, np.abs(ident - np.outer(v, v)).max())
        add("Delta = (D+1)^2 F_AB - (D+1)(F_A+F_B)", d, np.abs((d + 1) ** 2 * f_ab - (d + 1) * (f_a + f_b) - ap.delta_full(d)).max())
        big = werner_sep(n)
        recon = 2 * np.outer(v, v) / (n * (n + 1)) + ap.delta_full(d) / (n + 1)
        add("Werner(D^2) decomposition", d, np.abs(big - recon).max())

        worst = {k: 0.0 for k in ("tp", "superop", "design", "fent", "favg", "main")}
        for ch in _random_channels(d, rng):
            lam = lambda_superop(ch)
            worst["tp"] = max(worst["tp"], np.abs(v @ lam - v).max())
            t_sup = superop_triple_exact(ch)
            t_des = estimate_triple(ch, ProtocolSpec())
            worst["design"] = max(worst["design"], max(abs(x - y) for x, y in zip(t_sup.as_tuple(), t_des.as_tuple())))
            worst["fent"] = max(worst["fent"], abs(entanglement_fidelity(ch) - np.trace(lam).real / n**2))
            worst["favg"] = max(worst["favg"], abs(average_fidelity_exact(ch) - np.trace(big @ lam).real))
            worst["main"] = max(worst["main"], abs(combine_average(t_sup, d) - average_fidelity_exact(ch)))
            worst["superop"] = max(worst["superop"], abs(combine_entanglement(t_sup, d) - entanglement_fidelity(ch)))
        add("trace preservation (I|lambda = (I|", d, worst["tp"])
        add("design protocol = superop triple", d, worst["design"])
        add("f_ent = Tr[lambda]/D^4", d, worst["fent"])
        add("f_avg = Tr[W lambda]", d, worst["favg"])
        add("f_ent from survive triple", d, worst["superop"])
        add("f_avg from survive triple", d, worst["main"])

        if d == 2:
            ch = _random_channels(d, rng, 1)[0]
            cl_t = estimate_triple(ch, ProtocolSpec(input_source="twirl_clifford"))
            add("Clifford product twirl = design", d, max(abs(x - y) for x, y in zip(cl_t.as_tuple(), superop_triple_exact(ch).as_tuple())))
            g = pauli_string("XI") + pauli_string("ZY")
            add("non-physical map constant 2D^2", d, abs(plus_constant(ch, g) - 2 * d * d))
        else:
            out.append(Check("Clifford product twirl = design", d, None, 0.0, "skipped: Clifford group only for D=2"))

        try:
            errs = []
            for m in range(2, n + 1):
                plan = ap.ApproxPlan.prefix(d, m)
                errs.append(abs(ap.hs_error(plan).hs_norm_delta_appr - ap.closed_form_norm(d, m)))
            add("closed-form ||Delta_appr||", d, max(errs))
        except UnsupportedDimension as exc:
            out.append(Check("closed-form ||Delta_appr||", d, None, 0.0, str(exc)))

        if include_appendix:
            est = twirl_frame_mc(d, haar_samples, rng)
            dist = float(np.linalg.norm(est - werner_sep(d)))
            add("Haar twirl frame (Monte Carlo)", d, dist, tol=1e-2, detail=f"samples={haar_samples}")
    return out

