import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipartite_fidelity.channels import KrausChannel, apply, average_fidelity_exact, channel_zoo, depolarizing_kraus, entanglement_fidelity
from bipartite_fidelity.designs import StateDesign, UnsupportedDimension, make_mub
from bipartite_fidelity.estimators import (
    ProtocolSpec,
    SurvivalTriple,
    combine_average,
    combine_entanglement,
    estimate_triple,
    propagate_se,
    quality_flag,
    single_system_avg_fidelity,
    superop_triple_exact,
    survival_probs_pointwise,
)
from bipartite_fidelity.tensor import haar_state

from .conftest import zoo_channels


def brute_triple(ch, psi, phi):
    d = len(psi)
    p, q = np.outer(psi, psi.conj()), np.outer(phi, phi.conj())
    out = apply(ch, np.kron(p, q))
    eye = np.eye(d)
    return tuple(np.trace(m @ out).real for m in (np.kron(p, q), np.kron(p, eye), np.kron(eye, q)))


def test_pointwise_examples(rng):
    psi, phi = haar_state(2, rng), haar_state(2, rng)
    assert survival_probs_pointwise(channel_zoo("identity", 2), psi, phi) == pytest.approx((1, 1, 1))
    local = channel_zoo("local_depolarizing", 2, p_a=0, p_b=1)
    assert survival_probs_pointwise(local, psi, phi) == pytest.approx((0.5, 1, 0.5))
    swap = channel_zoo("swap", 2)
    assert survival_probs_pointwise(swap, [1, 0], [0, 1]) == pytest.approx((0, 0, 0), abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.sampled_from([2, 3]), r=st.integers(1, 3))
def test_pointwise_matches_density_matrix(seed, d, r):
    rng = np.random.default_rng(seed)
    ch = channel_zoo("random_kraus", d, rng, r=r)
    psi, phi = haar_state(d, rng), haar_state(d, rng)
    got = survival_probs_pointwise(ch, psi, phi)
    assert np.allclose(got, brute_triple(ch, psi, phi), atol=1e-12)
    assert all(-1e-12 <= x <= 1 + 1e-12 for x in got)


def test_combiner_examples():
    assert combine_entanglement(SurvivalTriple(1, 1, 1), 2) == pytest.approx(1)
    assert combine_entanglement(SurvivalTriple(0.5, 1, 0.5), 2) == pytest.approx(0.25)
    assert combine_entanglement(SurvivalTriple(0.25, 0.5, 0.5), 2) == pytest.approx(1 / 16)
    assert combine_average(SurvivalTriple(1, 1, 1), 2) == pytest.approx(1)
    assert combine_average(SurvivalTriple(0.25, 0.5, 0.5), 2) == pytest.approx(0.25)
    assert combine_average(SurvivalTriple(0.5, 1, 0.5), 2) == pytest.approx(0.4)


@given(
    t=st.tuples(*[st.floats(0, 1)] * 3),
    d=st.integers(2, 6),
)
def test_combiners_related(t, d):
    triple = SurvivalTriple(*t)
    n = d * d
    assert combine_average(triple, d) == pytest.approx((n * combine_entanglement(triple, d) + 1) / (n + 1), abs=1e-12)


def test_design_exact_examples():
    t = estimate_triple(channel_zoo("identity", 2), ProtocolSpec())
    assert t.as_tuple() == pytest.approx((1, 1, 1)) and (t.se_ab, t.se_a, t.se_b) == (0, 0, 0)
    assert t.n_settings == 16
    t = estimate_triple(channel_zoo("local_depolarizing", 2, p_a=0, p_b=1), ProtocolSpec())
    assert t.as_tuple() == pytest.approx((0.5, 1, 0.5), abs=1e-12)
    assert superop_triple_exact(channel_zoo("identity", 3)).as_tuple() == pytest.approx((1, 1, 1))


@pytest.mark.parametrize("d", [2, 3])
def test_design_superop_and_mub_agree(d):
    mub = make_mub(d)
    for ch in zoo_channels(d):
        ref = superop_triple_exact(ch).as_tuple()
        assert np.allclose(estimate_triple(ch, ProtocolSpec()).as_tuple(), ref, atol=1e-10)
        mixed = ProtocolSpec(design_a=mub)
        assert np.allclose(estimate_triple(ch, mixed).as_tuple(), ref, atol=1e-10)
        assert abs(combine_entanglement(superop_triple_exact(ch), d) - entanglement_fidelity(ch)) < 1e-10


def test_clifford_twirl_exact(rng):
    ch = channel_zoo("random_kraus", 2, rng, r=2)
    t = estimate_triple(ch, ProtocolSpec(input_source="twirl_clifford"))
    assert t.n_settings == 576
    assert np.allclose(t.as_tuple(), superop_triple_exact(ch).as_tuple(), atol=1e-10)


@pytest.mark.parametrize("source", ["haar_product", "twirl_haar"])
def test_random_sources_within_error(source, rng):
    ch = channel_zoo("random_kraus", 2, rng, r=3)
    t = estimate_triple(ch, ProtocolSpec(input_source=source, n_settings=20_000, seed=3))
    ref = superop_triple_exact(ch)
    for est, exact, se in zip(t.as_tuple(), ref.as_tuple(), (t.se_ab, t.se_a, t.se_b)):
        assert se > 0 and abs(est - exact) < 4 * se


def test_mc_rmse_halves_when_settings_quadruple():
    ch = channel_zoo("random_kraus", 2, np.random.default_rng(4), r=2)
    exact = superop_triple_exact(ch).f_ab
    rmse = []
    for n in (256, 1024):
        errs = [estimate_triple(ch, ProtocolSpec(input_source="haar_product", n_settings=n, seed=s)).f_ab - exact for s in range(300)]
        rmse.append(np.sqrt(np.mean(np.square(errs))))
    assert 0.5 * 0.75 <= rmse[1] / rmse[0] <= 0.5 * 1.25


def test_determinism_and_worker_independence(rng):
    ch = channel_zoo("random_kraus", 2, rng, r=2)
    base = ProtocolSpec(input_source="haar_product", n_settings=5000, seed=11)
    a = estimate_triple(ch, base)
    b = estimate_triple(ch, base)
    c = estimate_triple(ch, ProtocolSpec(input_source="haar_product", n_settings=5000, seed=11, workers=4))
    assert a == b == c
    d = estimate_triple(ch, ProtocolSpec(input_source="haar_product", n_settings=5000, seed=12))
    assert d != a


def test_shots_mode():
    ch = channel_zoo("global_depolarizing", 2, p=0.5)
    spec = ProtocolSpec(mode="shots", shots=500, seed=1)
    t = estimate_triple(ch, spec)
    assert t.shots_per_setting == 500 and t.clip_count == 0
    assert t == estimate_triple(ch, spec)
    ref = superop_triple_exact(ch)
    for est, exact, se in zip(t.as_tuple(), ref.as_tuple(), (t.se_ab, t.se_a, t.se_b)):
        assert 0 < se and abs(est - exact) < 5 * se
    ident = estimate_triple(channel_zoo("identity", 2), spec)
    assert ident.as_tuple() == (1, 1, 1) and ident.se_ab == 0


def test_shots_clifford_sampled(rng):
    ch = channel_zoo("random_kraus", 2, rng, r=2)
    t = estimate_triple(ch, ProtocolSpec(mode="shots", input_source="twirl_clifford", n_settings=4000, shots=50))
    ref = superop_triple_exact(ch)
    assert t.n_settings == 4000
    assert abs(t.f_ab - ref.f_ab) < 5 * t.se_ab


def test_spec_validation():
    with pytest.raises(ValueError):
        ProtocolSpec(mode="fast")
    with pytest.raises(ValueError):
        ProtocolSpec(input_source="random")
    with pytest.raises(ValueError):
        ProtocolSpec(design_a=StateDesign(2, np.eye(2)))
    with pytest.raises(UnsupportedDimension):
        estimate_triple(channel_zoo("identity", 3), ProtocolSpec(input_source="twirl_clifford"))
    with pytest.raises(ValueError):
        estimate_triple(channel_zoo("identity", 2), ProtocolSpec(input_source="twirl_haar"), pre=np.eye(4))


def test_propagate_and_quality():
    t = SurvivalTriple(0.5, 0.5, 0.5, 0.01, 0.0, 0.0)
    se_ent, se_avg = propagate_se(t, 2)
    assert se_ent == pytest.approx(0.09 / 4) and se_avg == pytest.approx(0.09 / 5)
    assert quality_flag(0.5) == "ok" and quality_flag(1.1) == "out_of_range"


def test_single_system_protocols():
    ident = KrausChannel(np.eye(2))
    for protocol in ("haar", "haar_twirl", "clifford", "design"):
        assert single_system_avg_fidelity(ident, protocol) == pytest.approx(1)
    dep = KrausChannel(depolarizing_kraus(2, 1.0))
    assert single_system_avg_fidelity(dep, "design") == pytest.approx(0.5)
    assert single_system_avg_fidelity(dep, "clifford") == pytest.approx(0.5)
    noisy = KrausChannel(depolarizing_kraus(3, 0.3))
    exact = average_fidelity_exact(noisy, bipartite=False)
    assert single_system_avg_fidelity(noisy, "design") == pytest.approx(exact, abs=1e-12)
    assert single_system_avg_fidelity(noisy, "haar", n_settings=50_000) == pytest.approx(exact, abs=5e-3)
