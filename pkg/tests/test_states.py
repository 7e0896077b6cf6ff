import math

import numpy as np
import pytest

from qssbell.bell import horodecki_S, mk_maximize
from qssbell.linalg import StateVector, kron, partial_trace, reorder_qubits
from qssbell.states import (
    AttackParams,
    QubitLayout,
    attack_qss,
    attack_two_party,
    counterexample_state,
    epr_phi_plus,
    ghz,
    load_state_file,
    parse_state_spec,
    random_density_matrix,
    save_state_file,
)

R2 = 1 / math.sqrt(2)
PHIS = [0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2]


def test_epr_amplitudes():
    assert np.allclose(epr_phi_plus().amplitudes, [R2, 0, 0, R2], atol=0)


def test_epr_horodecki_is_cirelson():
    assert horodecki_S(epr_phi_plus().density()) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_epr_marginal():
    assert np.allclose(partial_trace(epr_phi_plus(), [1]).matrix, np.eye(2) / 2)


@pytest.mark.parametrize("m", range(2, 8))
def test_ghz_shape(m):
    g = ghz(m)
    assert g.num_qubits == m
    assert np.count_nonzero(g.amplitudes) == 2
    assert g.amplitudes[0] == g.amplitudes[-1] == pytest.approx(R2)


@pytest.mark.parametrize("m", [1, 8, 2.5])
def test_ghz_range(m):
    with pytest.raises(ValueError):
        ghz(m)


def test_ghz2_is_epr():
    assert np.array_equal(ghz(2).amplitudes, epr_phi_plus().amplitudes)


def test_attack_two_party_no_attack():
    expected = kron(epr_phi_plus().amplitudes, np.array([1, 0]))
    assert np.allclose(attack_two_party(0.0).amplitudes, expected, atol=1e-16)


@pytest.mark.parametrize("phi", PHIS)
def test_attack_two_party_b_e_swap(phi):
    swapped = reorder_qubits(attack_two_party(phi), [0, 2, 1])
    assert np.abs(swapped.amplitudes - attack_two_party(math.pi / 2 - phi).amplitudes).max() < 1e-15


def test_attack_two_party_explicit_amplitudes():
    phi = 0.4
    v = attack_two_party(phi).amplitudes
    assert v[0b000] == pytest.approx(R2)
    assert v[0b110] == pytest.approx(R2 * math.cos(phi))
    assert v[0b101] == pytest.approx(R2 * math.sin(phi))
    assert np.count_nonzero(np.abs(v) > 0) == 3


def test_attack_phi_range():
    with pytest.raises(ValueError):
        attack_two_party(-0.1)
    with pytest.raises(ValueError):
        attack_two_party(1.6)
    attack_two_party(math.pi / 2)


def test_attack_ae_pair_at_quarter_pi():
    rho_ae = partial_trace(attack_two_party(math.pi / 4), [0, 2])
    assert horodecki_S(rho_ae) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("phi", [0.0, 0.3, 1.1, math.pi / 2])
def test_attack_qss_base_case(phi):
    assert np.array_equal(attack_qss(AttackParams(2, 1, phi)).amplitudes, attack_two_party(phi).amplitudes)


@pytest.mark.parametrize("N,h", [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3), (5, 2), (6, 5)])
def test_attack_qss_no_attack_is_ghz_times_zero(N, h):
    psi = attack_qss(AttackParams(N, h, 0.0))
    assert np.allclose(psi.amplitudes, kron(ghz(N).amplitudes, np.array([1, 0])))
    auth = partial_trace(psi, range(N))
    assert np.abs(auth.matrix - ghz(N).density().matrix).max() == 0.0


@pytest.mark.parametrize("N,h", [(3, 2), (3, 1), (4, 2), (5, 3)])
def test_attack_qss_three_terms(N, h):
    phi = 0.77
    psi = attack_qss(AttackParams(N, h, phi))
    nz = np.flatnonzero(np.abs(psi.amplitudes) > 0)
    assert len(nz) == 3
    assert abs(np.linalg.norm(psi.amplitudes) - 1) < 1e-12
    n = N - 1 - h
    expected = {
        0: R2,
        int("1" * N + "0", 2): R2 * math.cos(phi),
        int("1" * (1 + n) + "0" * h + "1", 2): R2 * math.sin(phi),
    }
    for idx, amp in expected.items():
        assert psi.amplitudes[idx] == pytest.approx(amp)


@pytest.mark.parametrize(
    "N,h",
    [(1, 1), (3, 0), (3, 3), (7, 2)],
)
def test_attack_params_invalid(N, h):
    with pytest.raises(ValueError):
        AttackParams(N, h, 0.1)


def test_layout_roles():
    lay = AttackParams(5, 2, 0.0).layout
    assert lay.roles == ("A", "C1", "C2", "B1", "B2", "E")
    assert lay.charlies == (1, 2)
    assert lay.bobs == (3, 4)
    assert lay.authorized == (0, 1, 2, 3, 4)
    assert lay.unauthorized == (0, 1, 2, 5)
    with pytest.raises(ValueError):
        QubitLayout(("A", "B1", "C1", "E"))
    with pytest.raises(ValueError):
        QubitLayout(("A", "C1", "E"))


@pytest.mark.parametrize("alpha", np.linspace(-3, 3, 13))
def test_counterexample_normalized(alpha):
    assert abs(np.linalg.norm(counterexample_state(alpha).amplitudes) - 1) < 1e-12


def test_counterexample_alpha_half_pi_first_qubit_pure():
    red = partial_trace(counterexample_state(math.pi / 2), [0])
    assert np.allclose(red.matrix, np.diag([0, 1]), atol=1e-15)
    assert np.linalg.matrix_rank(red.matrix, tol=1e-12) == 1


def test_counterexample_phases():
    v = counterexample_state(0.0).amplitudes
    assert v[0b0101] == pytest.approx(0.5j)
    assert v[0b0011] == pytest.approx(0.5)
    w = counterexample_state(math.pi / 2).amplitudes
    assert w[0b1001] == pytest.approx(1j * R2)


def test_local_rephasing_leaves_bell_values_unchanged():
    """Extra phases on the attack state are local unitaries: Bell maxima must not move."""
    psi = attack_qss(AttackParams(3, 1, 0.5))
    rng = np.random.default_rng(4)
    phases = [np.diag([1, np.exp(1j * t)]) for t in rng.uniform(0, 2 * np.pi, 4)]
    rephased = StateVector(kron(*phases) @ psi.amplitudes)
    for keep in [(0, 1), (0, 3), (0, 1, 2), (0, 1, 3)]:
        a = mk_maximize(partial_trace(psi, keep), restarts=20).value
        b = mk_maximize(partial_trace(rephased, keep), restarts=20).value
        assert a == pytest.approx(b, abs=1e-7)


@pytest.mark.parametrize(
    "spec,n",
    [("epr", 2), ("ghz:5", 5), ("attack:N=3,h=1,phi=0.3", 4), ("counterexample:alpha=0.955", 4)],
)
def test_parse_state_spec(spec, n):
    assert parse_state_spec(spec).num_qubits == n


@pytest.mark.parametrize("spec", ["", "ghz", "ghz:x", "attack:N=3,h=1", "attack:N=3,h=1,phi=0.3,q=1", "foo:1", "epr:2"])
def test_parse_state_spec_errors(spec):
    with pytest.raises(ValueError):
        parse_state_spec(spec)


def test_state_file_roundtrip(tmp_path):
    psi = counterexample_state(0.7)
    path = tmp_path / "s.json"
    save_state_file(psi, path)
    back = parse_state_spec(f"file:{path}")
    assert np.array_equal(back.amplitudes, psi.amplitudes)


def test_state_file_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"num_qubits": 2, "amplitudes": [[1, 0]]}')
    with pytest.raises(ValueError):
        load_state_file(path)
    path.write_text('{"amplitudes": []}')
    with pytest.raises(ValueError):
        load_state_file(path)


def test_random_density_matrix_sizes():
    rng = np.random.default_rng(0)
    for n in range(1, 5):
        assert random_density_matrix(n, rng).num_qubits == n
