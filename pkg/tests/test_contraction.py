import numpy as np
import pytest

from httnsim import (
    ChainedChannel,
    ClassicalTable,
    GateNoisePair,
    QuantumTensor,
    contract_classical,
    contract_tensor,
    contract_type1,
    contract_type2,
    contract_type3,
    contract_type4,
    make_depolarizing,
    pauli_matrix,
    state_preparation_channel,
    unitary_channel,
)
from httnsim.errors import ShapeError
from httnsim.rand import (
    rand_hermitian,
    rand_kraus_channel,
    rand_state,
    rand_unitary,
)

from conftest import basis_vec, indexed_states, kron_all, random_tensor

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
Z = pauli_matrix("Z")
X = pauli_matrix("X")


def direct_block(tensor, obs):
    """Oracle: M[i,i'] = <psi^i|O|psi^i'>, S[i,i'] = <psi^i|psi^i'> (noiseless)."""
    states = indexed_states(tensor)
    n = len(states)
    m = np.empty((n, n), dtype=complex)
    s = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            m[i, j] = np.vdot(states[i], obs @ states[j])
            s[i, j] = np.vdot(states[i], states[j])
    return m, s


# --- kind 1 ------------------------------------------------------------------


def test_type1_identity_z():
    blk = contract_type1(unitary_channel(np.eye(2)), Z, 1)
    assert np.abs(blk.m - np.diag([1, -1])).max() <= 1e-12
    assert np.array_equal(blk.s, np.eye(2))


def test_type1_hadamard_conjugation():
    blk = contract_type1(unitary_channel(HADAMARD), Z, 1)
    assert np.abs(blk.m - X).max() <= 1e-12


def test_type1_depolarized_hadamard():
    # traceless observable: mixing term drops, block scales by 1 - rate
    w = ChainedChannel(make_depolarizing(1, 0.1), unitary_channel(HADAMARD))
    blk = contract_type1(w, Z, 1)
    assert np.abs(blk.m - 0.9 * X).max() <= 1e-12


def test_type1_four_vs_six_input_assembly(rng):
    for _ in range(100):
        ch = rand_kraus_channel(2, rng)
        obs = rand_hermitian(4, rng)
        four = contract_type1(ch, obs, 1, assembly="four").m
        six = contract_type1(ch, obs, 1, assembly="six").m
        assert np.abs(four - six).max() <= 1e-12


def test_type1_matches_direct_elements(rng):
    for _ in range(20):
        t = random_tensor("1", tau=1, k_width=2, rng=rng)
        obs = rand_hermitian(4, rng)
        blk = contract_tensor(t, obs)
        m_ref, _ = direct_block(t, obs)
        assert np.abs(blk.m - m_ref).max() <= 1e-10


def test_type1_wide_index_register(rng):
    # tau = 2 exercises the Pauli-basis assembly
    t = random_tensor("1", tau=2, k_width=2, rng=rng)
    obs = rand_hermitian(4, rng)
    blk = contract_tensor(t, obs)
    m_ref, _ = direct_block(t, obs)
    assert np.abs(blk.m - m_ref).max() <= 1e-10


def test_type1_rejects_oversized_tau():
    with pytest.raises(ShapeError):
        contract_type1(unitary_channel(np.eye(2)), Z, 2)


# --- kind 2 ------------------------------------------------------------------


def test_type2_bell_carrier():
    ch = state_preparation_channel(BELL)
    blk = contract_type2(ch, Z, 1)
    assert np.abs(blk.m - np.diag([0.5, -0.5])).max() <= 1e-12
    assert np.abs(blk.s - np.eye(2) / 2).max() <= 1e-12


def test_type2_product_carrier():
    ch = state_preparation_channel(np.array([1, 0, 0, 0], dtype=complex))
    blk = contract_type2(ch, Z, 1)
    assert np.abs(blk.m - np.diag([1.0, 0.0])).max() <= 1e-12
    assert np.abs(blk.s - np.diag([1.0, 0.0])).max() <= 1e-12


def test_type2_noisy_matches_direct_formula(rng):
    # oracle: M[i,i'] = Tr[(|i><i'| (x) O) sigma]
    p = 0.3
    noise = make_depolarizing(2, p)
    ch = ChainedChannel(noise, state_preparation_channel(BELL))
    blk = contract_type2(ch, Z, 1)
    sigma = noise.apply(np.outer(BELL, BELL.conj()))
    m_ref = np.empty((2, 2), dtype=complex)
    s_ref = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            proj = np.zeros((2, 2), dtype=complex)
            proj[i, j] = 1.0
            m_ref[i, j] = np.trace(np.kron(proj, Z) @ sigma)
            s_ref[i, j] = np.trace(np.kron(proj, np.eye(2)) @ sigma)
    assert np.abs(blk.m - m_ref).max() <= 1e-12
    assert np.abs(blk.s - s_ref).max() <= 1e-12
    assert np.abs(blk.m - np.diag([(1 - p) / 2, -(1 - p) / 2])).max() <= 1e-12


def test_type2_random_matches_direct_elements(rng):
    for _ in range(20):
        t = random_tensor("2", tau=1, k_width=2, rng=rng)
        obs = rand_hermitian(4, rng)
        blk = contract_tensor(t, obs)
        m_ref, s_ref = direct_block(t, obs)
        assert np.abs(blk.m - m_ref).max() <= 1e-10
        assert np.abs(blk.s - s_ref).max() <= 1e-10


# --- kind 3 ------------------------------------------------------------------


def test_type3_basis_flip():
    ch = state_preparation_channel(np.array([1, 0], dtype=complex))
    blk = contract_type3(ch, Z, ("I", "X"), 1)
    assert np.abs(blk.m - np.diag([1, -1])).max() <= 1e-12
    assert np.abs(blk.s - np.eye(2)).max() <= 1e-12


def test_type3_plus_state():
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    ch = state_preparation_channel(plus)
    blk = contract_type3(ch, X, ("I", "Z"), 1)
    assert np.abs(blk.m - np.diag([1, -1])).max() <= 1e-12
    assert np.abs(blk.s - np.eye(2)).max() <= 1e-12


def test_type3_fully_mixed_kills_traceless():
    ch = make_depolarizing(1, 1.0)
    blk = contract_type3(ch, Z, ("I", "X"), 1)
    assert np.abs(blk.m).max() <= 1e-12
    assert np.abs(blk.s - np.eye(2)).max() <= 1e-12


def test_type3_random_matches_direct_elements(rng):
    for _ in range(20):
        t = random_tensor("3", tau=1, k_width=2, rng=rng)
        obs = rand_hermitian(4, rng)
        blk = contract_tensor(t, obs)
        m_ref, s_ref = direct_block(t, obs)
        assert np.abs(blk.m - m_ref).max() <= 1e-10
        assert np.abs(blk.s - s_ref).max() <= 1e-10


def test_type3_rejects_wrong_label_length():
    ch = state_preparation_channel(np.array([1, 0], dtype=complex))
    with pytest.raises(ShapeError):
        contract_type3(ch, Z, ("I", "XX"), 1)


# --- kind 4 ------------------------------------------------------------------


def test_type4_identity_and_flip():
    blk = contract_type4((np.eye(2), X), Z, 1)
    assert np.abs(blk.m - np.diag([1, -1])).max() <= 1e-12
    assert np.abs(blk.s - np.eye(2)).max() <= 1e-12


def test_type4_diagonal_damping():
    blk = contract_type4((np.eye(2), X), Z, 1,
                         noise=GateNoisePair(p=(0.5, 0.5), q=(0.0, 0.0)))
    assert np.abs(blk.m - np.diag([0.5, -0.5])).max() <= 1e-12
    assert np.abs(blk.s - np.eye(2)).max() <= 1e-12


def test_type4_offdiagonal_damping():
    blk = contract_type4((np.eye(2), HADAMARD), Z, 1,
                         noise=GateNoisePair(p=(0.0, 0.0), q=(0.1, 0.1)))
    # <0|Z H|0> = 1/sqrt(2), damped by (1-q)^2 = 0.81
    assert abs(blk.m[0, 1] - 0.81 / np.sqrt(2)) <= 1e-12
    assert abs(blk.s[0, 1] - 0.81 / np.sqrt(2)) <= 1e-12


def test_type4_damping_matches_rate_formula(rng):
    # oracle: noisy block = elementwise damped noiseless block; the diagonal
    # damping rate formula presumes a traceless observable
    p = (0.2, 0.35)
    q = (0.15, 0.05)
    unitaries = (rand_unitary(4, rng), rand_unitary(4, rng))
    obs = rand_hermitian(4, rng)
    obs -= np.trace(obs) / 4 * np.eye(4)
    clean = contract_type4(unitaries, obs, 1).m
    noisy = contract_type4(unitaries, obs, 1, noise=GateNoisePair(p, q))
    expect = np.array(
        [[(1 - p[0]) * clean[0, 0], (1 - q[0]) * (1 - q[1]) * clean[0, 1]],
         [(1 - q[1]) * (1 - q[0]) * clean[1, 0], (1 - p[1]) * clean[1, 1]]])
    assert np.abs(noisy.m - expect).max() <= 1e-10


def test_type4_random_matches_direct_elements(rng):
    for _ in range(10):
        t = random_tensor("4", tau=1, k_width=2, rng=rng)
        obs = rand_hermitian(4, rng)
        blk = contract_tensor(t, obs)
        m_ref, s_ref = direct_block(t, obs)
        assert np.abs(blk.m - m_ref).max() <= 1e-10
        assert np.abs(blk.s - s_ref).max() <= 1e-10


# --- classical ----------------------------------------------------------------


def test_classical_basis_columns():
    t = QuantumTensor(ClassicalTable(np.eye(2, dtype=complex)), tau=1, k_width=1)
    blk = contract_classical(t, Z)
    assert np.abs(blk.m - np.diag([1, -1])).max() <= 1e-15


def test_classical_zero_column_padding():
    table = np.zeros((2, 2), dtype=complex)
    table[:, 0] = [1, 0]
    t = QuantumTensor(ClassicalTable(table), tau=1, k_width=1)
    blk = contract_classical(t, Z)
    assert np.allclose(blk.m[:, 1], 0) and np.allclose(blk.m[1, :], 0)
    assert np.allclose(blk.s[:, 1], 0) and np.allclose(blk.s[1, :], 0)


def test_classical_matches_expansion_product(rng):
    t = random_tensor("c", tau=2, k_width=2, rng=rng)
    obs = rand_hermitian(4, rng)
    from httnsim import build_expansion_operator
    a = build_expansion_operator(t).matrix
    blk = contract_classical(t, obs)
    assert np.abs(blk.m - a.conj().T @ obs @ a).max() <= 1e-12
    assert np.abs(blk.s - a.conj().T @ a).max() <= 1e-12


# --- shared invariants ---------------------------------------------------------


@pytest.mark.parametrize("kind", ["1", "2", "3", "4", "c"])
def test_blocks_stay_hermitian_under_noise(kind, rng):
    from conftest import random_noise
    for _ in range(5):
        if kind == "4":
            noise = GateNoisePair(p=tuple(rng.uniform(0, 1, 2)),
                                  q=tuple(rng.uniform(0, 1, 2)))
        elif kind == "c":
            noise = None
        else:
            width = 3 if kind == "2" else 2
            noise = random_noise(width, rng, allow_none=False)
        t = random_tensor(kind, tau=1, k_width=2, rng=rng,
                          noise=noise) if noise is not None else \
            random_tensor(kind, tau=1, k_width=2, rng=rng)
        blk = contract_tensor(t, rand_hermitian(4, rng))
        assert np.abs(blk.m - blk.m.conj().T).max() <= 1e-10
        assert np.abs(blk.s - blk.s.conj().T).max() <= 1e-10
