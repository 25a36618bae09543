import numpy as np
import pytest

from httnsim import NoiseSpec, pauli_matrix, physicality_check
from httnsim.forging import (
    ForgedAnsatz,
    build_sampler_plan,
    forged_effective_state,
    forged_expectation,
    forged_htn_expectation,
    forged_sampler,
    optimal_coefficients,
    reconstruct,
    schmidt_decompose,
)
from httnsim.rand import rand_hermitian, rand_state, rand_unitary

from conftest import kron_all

Z = pauli_matrix("Z")
X = pauli_matrix("X")
BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def direct_expectation(psi, o1, o2):
    big = np.kron(o1, o2)
    return float(np.real(np.vdot(psi, big @ psi)))


def test_schmidt_product_state():
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    ansatz = schmidt_decompose(psi)
    assert abs(ansatz.lambdas[0] - 1.0) <= 1e-12
    assert np.abs(ansatz.lambdas[1:]).max() <= 1e-12


def test_schmidt_bell_pair():
    ansatz = schmidt_decompose(BELL)
    assert np.abs(ansatz.lambdas - 1 / np.sqrt(2)).max() <= 1e-12


def test_schmidt_reconstruction_full_rank(rng):
    for _ in range(10):
        psi = rand_state(4, rng)
        ansatz = schmidt_decompose(psi)
        assert np.abs(reconstruct(ansatz) - psi).max() <= 1e-10


def test_schmidt_truncation_error_is_tail_norm(rng):
    psi = rand_state(4, rng)
    for k in (1, 2, 3):
        ansatz = schmidt_decompose(psi, k=k)
        err = np.linalg.norm(reconstruct(ansatz) - psi)
        tail = np.sqrt(np.sum(ansatz.lambdas[k:]**2))
        assert abs(err - tail) <= 1e-10


def test_schmidt_rejects_bad_truncation():
    with pytest.raises(ValueError):
        schmidt_decompose(BELL, k=0)


def test_forged_expectation_bell_zz():
    ansatz = schmidt_decompose(BELL)
    assert abs(forged_expectation(ansatz, Z, Z) - 1.0) <= 1e-12


def test_forged_expectation_product_state():
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    ansatz = schmidt_decompose(psi)
    assert abs(forged_expectation(ansatz, Z, Z) - 1.0) <= 1e-12


def test_forged_expectation_matches_full_state(rng):
    for _ in range(20):
        psi = rand_state(4, rng)
        o1, o2 = rand_hermitian(4, rng), rand_hermitian(4, rng)
        ansatz = schmidt_decompose(psi)
        got = forged_expectation(ansatz, o1, o2)
        assert abs(got - direct_expectation(psi, o1, o2)) <= 1e-10


def test_three_way_agreement(rng):
    # forged = tree-contraction = full-state, across sizes
    for n_half in (1, 2, 3):
        for _ in (range(100) if n_half == 1 else range(20)):
            psi = rand_state(2 * n_half, rng)
            dim = 2**n_half
            o1, o2 = rand_hermitian(dim, rng), rand_hermitian(dim, rng)
            ansatz = schmidt_decompose(psi)
            direct = direct_expectation(psi, o1, o2)
            assert abs(forged_expectation(ansatz, o1, o2) - direct) <= 1e-10
            assert abs(forged_htn_expectation(ansatz, o1, o2) - direct) <= 1e-10


def test_lambda_l1_maximally_entangled():
    for n_half in (1, 2, 3):
        dim = 2**n_half
        psi = np.zeros(dim * dim, dtype=complex)
        for x in range(dim):
            psi[x * dim + x] = 1 / np.sqrt(dim)
        ansatz = schmidt_decompose(psi)
        assert abs(ansatz.lambda_l1 - np.sqrt(dim)) <= 1e-10


def test_optimal_coefficients_bell_blocks(rng):
    # with V = I and O = Z on both halves, the coefficient eigenproblem is
    # diag(1,-1) * diag(1,-1) = I: flat spectrum, energy 1
    from httnsim import contract_type1, unitary_channel
    m = contract_type1(unitary_channel(np.eye(2)), Z, 1).m
    energy, lam = optimal_coefficients(m, m)
    assert abs(energy - 1.0) <= 1e-12
    assert abs(np.linalg.norm(lam) - 1.0) <= 1e-12


def test_optimal_coefficients_beats_schmidt(rng):
    # re-optimizing the coefficients can only lower the forged energy
    psi = rand_state(2, rng)
    ansatz = schmidt_decompose(psi)
    o1, o2 = rand_hermitian(2, rng), rand_hermitian(2, rng)
    from httnsim import contract_type1, unitary_channel
    m1 = contract_type1(unitary_channel(ansatz.v1), o1, 1).m
    m2 = contract_type1(unitary_channel(ansatz.v2), o2, 1).m
    best, _ = optimal_coefficients(m1, m2)
    assert best <= forged_expectation(ansatz, o1, o2) + 1e-10


# --- sampler --------------------------------------------------------------------


def test_sampler_deterministic_single_term():
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    ansatz = schmidt_decompose(psi)
    plan = build_sampler_plan(ansatz, Z, Z)
    result = forged_sampler(plan, Z, Z, shots=1, seed=0)
    assert result.estimate == 1.0
    assert result.stderr == 0.0


def test_sampler_bell_converges():
    ansatz = schmidt_decompose(BELL)
    plan = build_sampler_plan(ansatz, Z, Z)
    result = forged_sampler(plan, Z, Z, shots=100_000, seed=42)
    assert abs(result.estimate - 1.0) <= 3 * result.stderr + 1e-12
    assert result.stderr <= 0.02


def test_sampler_stderr_scales_with_shots():
    ansatz = schmidt_decompose(BELL)
    plan = build_sampler_plan(ansatz, Z, Z)
    small = forged_sampler(plan, Z, Z, shots=1000, seed=1)
    large = forged_sampler(plan, Z, Z, shots=100_000, seed=1)
    assert large.stderr < small.stderr / 5  # ~ 1/sqrt(100) ideally


def test_sampler_unbiased_over_repeats(rng):
    psi = rand_state(2, rng)
    o1 = rand_hermitian(2, rng)
    o2 = rand_hermitian(2, rng)
    ansatz = schmidt_decompose(psi)
    exact = forged_expectation(ansatz, o1, o2)
    plan = build_sampler_plan(ansatz, o1, o2)
    estimates = np.array([
        forged_sampler(plan, o1, o2, shots=2000, seed=1000 + r).estimate
        for r in range(200)
    ])
    sigma = estimates.std(ddof=1) / np.sqrt(estimates.size)
    assert abs(estimates.mean() - exact) <= 4 * sigma


def test_sampler_rejects_zero_shots():
    plan = build_sampler_plan(schmidt_decompose(BELL), Z, Z)
    with pytest.raises(ValueError):
        forged_sampler(plan, Z, Z, shots=0, seed=0)


def test_plan_probabilities_normalized(rng):
    psi = rand_state(4, rng)
    plan = build_sampler_plan(schmidt_decompose(psi),
                              rand_hermitian(4, rng), rand_hermitian(4, rng))
    assert abs(plan.probabilities.sum() - 1.0) <= 1e-12
    assert abs(plan.scale - np.abs(plan.weights).sum()) <= 1e-12


# --- noisy forged states ----------------------------------------------------------


def test_noisy_forged_state_is_physical(rng):
    for _ in range(10):
        psi = rand_state(2, rng)
        ansatz = schmidt_decompose(psi)
        rho = forged_effective_state(
            ansatz,
            NoiseSpec("depolarizing", rate=float(rng.uniform(0, 0.7))),
            NoiseSpec("depolarizing", rate=float(rng.uniform(0, 0.7))))
        assert physicality_check(rho).is_physical


def test_noiseless_forged_state_matches_input(rng):
    psi = rand_state(4, rng)
    ansatz = schmidt_decompose(psi)
    rho = forged_effective_state(ansatz)
    assert np.abs(rho - np.outer(psi, psi.conj())).max() <= 1e-10
