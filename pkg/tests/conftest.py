import numpy as np
import pytest

from bipartite_fidelity.channels import channel_zoo

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def _record(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, bool(passed), detail))
        print(f"[criterion {number}] {'PASS' if passed else 'FAIL'}  {title}  {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{number:>2}. {'PASS' if passed else 'FAIL'}  {title}  {detail}")


def zoo_channels(d, seed=7):
    """Every named zoo channel at subsystem dimension ``d``."""
    rng = np.random.default_rng(seed)
    chans = [
        channel_zoo("identity", d),
        channel_zoo("global_depolarizing", d, p=0.3),
        channel_zoo("global_depolarizing", d, p=1.0),
        channel_zoo("local_depolarizing", d, p_a=0.2, p_b=0.6),
        channel_zoo("product_unitary", d, rng),
        channel_zoo("random_unitary_mixture", d, rng, k=3),
        channel_zoo("random_kraus", d, rng, r=1),
        channel_zoo("random_kraus", d, rng, r=3),
        channel_zoo("swap", d),
    ]
    if d == 2:
        chans += [channel_zoo("pauli", 2, label="XX"), channel_zoo("pauli", 2, label="YZ")]
    return chans
