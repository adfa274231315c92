import numpy as np
import pytest

from bipartite_fidelity.designs import (
    DesignKind,
    StateDesign,
    UnsupportedDimension,
    clifford_group,
    frame_operator,
    make_mub,
    make_sic,
    verify_2design,
)
from bipartite_fidelity.tensor import werner_sep


def overlaps(design):
    s = design.states
    return np.abs(s.conj() @ s.T) ** 2


@pytest.mark.parametrize("d", [2, 3])
def test_sic_overlap_law(d):
    sic = make_sic(d)
    assert len(sic) == d * d and sic.kind is DesignKind.SIC
    expected = (1 + d * np.eye(d * d)) / (1 + d)
    assert np.abs(overlaps(sic) - expected).max() < 1e-10


def test_sic_d2_values():
    ov = overlaps(make_sic(2))
    off = ov[~np.eye(4, dtype=bool)]
    assert np.allclose(off, 1 / 3, atol=1e-12)
    assert np.abs(frame_operator(make_sic(2)) - werner_sep(2)).max() < 1e-12


def test_sic_d3_offdiagonal_quarter():
    ov = overlaps(make_sic(3))
    assert np.allclose(ov[~np.eye(9, dtype=bool)], 0.25, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_mub_overlaps(d):
    mub = make_mub(d)
    assert len(mub) == d * (d + 1)
    ov = overlaps(mub)
    for a in range(d + 1):
        for b in range(d + 1):
            block = ov[a * d:(a + 1) * d, b * d:(b + 1) * d]
            want = np.eye(d) if a == b else np.full((d, d), 1 / d)
            assert np.abs(block - want).max() < 1e-10


@pytest.mark.parametrize("maker,d", [(make_sic, 2), (make_sic, 3), (make_mub, 2), (make_mub, 3), (make_mub, 5)])
def test_known_designs_pass(maker, d):
    rep = verify_2design(maker(d))
    assert rep["pass"]
    assert rep["max_deviation"] < 1e-12


def test_computational_basis_fails():
    rep = verify_2design(StateDesign(2, np.eye(2)))
    assert not rep["pass"]
    # frame of {|0>,|1>}: (1/2)(|00><00| + |11><11|) vs the Werner state
    frame = np.diag([0.5, 0, 0, 0.5])
    assert np.isclose(rep["frame_deviation"], np.linalg.norm(frame - werner_sep(2)))


def test_unsupported_dimensions():
    with pytest.raises(UnsupportedDimension, match="no SIC fiducial available"):
        make_sic(5)
    with pytest.raises(UnsupportedDimension):
        make_mub(4)
    with pytest.raises(UnsupportedDimension):
        clifford_group(3)


def test_design_validation():
    with pytest.raises(ValueError):
        StateDesign(2, np.array([[1.0, 1.0]]))
    with pytest.raises(ValueError):
        StateDesign(3, np.eye(2))


@pytest.mark.parametrize("maker,d", [(make_sic, 3), (make_mub, 2)])
def test_json_round_trip(maker, d):
    design = maker(d)
    back = StateDesign.from_json(design.to_json())
    assert back.kind == design.kind and back.dim == d
    assert np.array_equal(back.states, design.states)


def test_subset_is_custom():
    sub = make_sic(2).subset([0, 2])
    assert sub.kind is DesignKind.CUSTOM and len(sub) == 2


def test_clifford_group_size_and_closure():
    group = clifford_group(2)
    els = group.as_array()
    assert len(group) == 24
    for u in els:
        assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-12

    def member(w):
        return any(abs(abs(np.vdot(c, w)) - 2) < 1e-9 for c in els)

    rng = np.random.default_rng(0)
    for a, b in rng.integers(24, size=(60, 2)):
        assert member(els[a] @ els[b])
    # no two elements equal up to phase
    gram = np.abs(np.einsum("aij,bij->ab", els.conj(), els))
    assert np.count_nonzero(np.isclose(gram, 2)) == 24


@pytest.mark.parametrize("psi0", [np.array([1, 0]), np.array([0.6, 0.8j])])
def test_clifford_frame_is_werner(psi0):
    els = clifford_group(2).as_array()
    cols = els @ psi0
    k = np.einsum("si,sj->sij", cols, cols.conj()).reshape(24, -1)
    assert np.abs(k.T @ k.conj() / 24 - werner_sep(2)).max() < 1e-10
