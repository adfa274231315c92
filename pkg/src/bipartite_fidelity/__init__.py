"""Average-fidelity estimation for bipartite qudit channels.

The package simulates trace-preserving channels on ``H_D (x) H_D``, evaluates
the three average survive probabilities (joint, subsystem A, subsystem B),
combines them into entanglement and average fidelities, reconstructs process
matrix elements from the same protocols, and quantifies the error made when
only a subset of SIC states is used as inputs.
"""

__version__ = "0.1.0"

from .tensor import (
    beta,
    haar_state,
    haar_unitary,
    vec_d,
    vec_d2,
    werner_sep,
)
from .designs import StateDesign, clifford_group, make_mub, make_sic, verify_2design
from .channels import (
    KrausChannel,
    apply,
    average_fidelity_exact,
    channel_zoo,
    compose_pre,
    entanglement_fidelity,
    lambda_superop,
)
from .estimators import (
    ProtocolSpec,
    SurvivalTriple,
    combine_average,
    combine_entanglement,
    estimate_triple,
    superop_triple_exact,
    survival_probs_pointwise,
)
from .chi import ChiMatrix, OperatorBasis, chi_direct, chi_full_protocol, pauli_basis
from .approx import ApproxPlan, closed_form_norm, delta_appr, hs_error

__all__ = [
    "__version__",
    "beta",
    "haar_state",
    "haar_unitary",
    "vec_d",
    "vec_d2",
    "werner_sep",
    "StateDesign",
    "clifford_group",
    "make_mub",
    "make_sic",
    "verify_2design",
    "KrausChannel",
    "apply",
    "average_fidelity_exact",
    "channel_zoo",
    "compose_pre",
    "entanglement_fidelity",
    "lambda_superop",
    "ProtocolSpec",
    "SurvivalTriple",
    "combine_average",
    "combine_entanglement",
    "estimate_triple",
    "superop_triple_exact",
    "survival_probs_pointwise",
    "ChiMatrix",
    "OperatorBasis",
    "chi_direct",
    "chi_full_protocol",
    "pauli_basis",
    "ApproxPlan",
    "closed_form_norm",
    "delta_appr",
    "hs_error",
]
