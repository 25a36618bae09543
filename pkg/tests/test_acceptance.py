"""Acceptance suite: one test per top-level criterion, at stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.
"""

import time

import numpy as np
import pytest

from httnsim import (
    GateFamilyPrep,
    GateNoisePair,
    HttnTree,
    QuantumTensor,
    TreeRoot,
    contract_type1,
    effective_noisy_state,
    effective_noisy_state_type4,
    expectation,
    pauli_matrix,
    physicality_check,
)
from httnsim.decay import DecayConfig, layered_ratio, predicted_ratio, qem_rescale
from httnsim.deepvqe import (
    AnsatzSpec,
    ClusterModel,
    InteractionTerm,
    OptimizerSpec,
    deep_vqe_energy,
    gram_schmidt_transform,
)
from httnsim.forging import (
    build_sampler_plan,
    forged_expectation,
    forged_htn_expectation,
    forged_sampler,
    schmidt_decompose,
)
from httnsim.rand import rand_hermitian, rand_kraus_channel, rand_state

from conftest import (
    explicit_expectation,
    random_deep_tree,
    random_leaf_observables,
    random_two_layer_tree,
)


def ok(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


@pytest.fixture(scope="module")
def decay_rows():
    """N=10, d=2, small angles; rows for L in {4, 5, 6} over the rate grid."""
    rows = {}
    for layers in (4, 5, 6):
        cfg = DecayConfig(n_branch=10, layers=layers, depth=2,
                          angle_range=np.pi / 1000,
                          epsilons=(1e-5, 1e-4, 1e-3, 1e-2), seed=20240814)
        rows[layers] = layered_ratio(cfg)
    return rows


def test_oracle_equivalence_random_trees():
    # 100 random 2-layer trees, N <= 3 leaves, K <= 2, tau = 1, all kinds
    rng = np.random.default_rng(101)
    started = time.monotonic()
    for _ in range(100):
        tree = random_two_layer_tree(rng, kinds=("1", "2", "3", "4", "c"))
        obs = random_leaf_observables(tree, rng)
        got = expectation(tree, obs)
        want = explicit_expectation(tree, obs)
        assert abs(got - want) <= 1e-10
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    ok(f"oracle equivalence, 100 random trees ({elapsed:.1f}s)")


def test_four_vs_six_input_reduction():
    rng = np.random.default_rng(202)
    for _ in range(100):
        channel = rand_kraus_channel(2, rng)
        obs = rand_hermitian(4, rng)
        four = contract_type1(channel, obs, 1, assembly="four").m
        six = contract_type1(channel, obs, 1, assembly="six").m
        assert np.abs(four - six).max() <= 1e-12
    ok("four-input off-diagonal assembly equals six-input, 100 pairs")


def test_positivity_theorem():
    rng = np.random.default_rng(303)
    checked = 0
    for _ in range(140):
        tree = random_two_layer_tree(rng, noisy=True)
        report = physicality_check(effective_noisy_state(tree))
        assert report.min_eigenvalue >= -1e-9
        assert abs(report.trace - 1.0) <= 1e-9
        checked += 1
    for _ in range(60):
        tree = random_deep_tree(rng, noisy=True)
        report = physicality_check(effective_noisy_state(tree))
        assert report.min_eigenvalue >= -1e-9
        assert abs(report.trace - 1.0) <= 1e-9
        checked += 1
    ok(f"positivity of noisy effective states, {checked} random trees")


def test_gate_family_falsifier():
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    node = QuantumTensor(
        GateFamilyPrep((np.eye(2, dtype=complex), pauli_matrix("X"))),
        tau=1, k_width=1, noise=GateNoisePair(p=(0.5, 0.5), q=(0.0, 0.0)))
    tree = HttnTree(root=TreeRoot(state=plus), layers=[[node]])
    rho = effective_noisy_state_type4(tree)
    min_eig = float(np.linalg.eigvalsh(rho).min())
    assert abs(min_eig + 0.25) <= 1e-10
    assert not physicality_check(rho).is_physical
    ok(f"gate-family falsifier: min eigenvalue {min_eig:+.12f}")


def test_decay_law(decay_rows):
    # |r / r_pred - 1| = |expm1(log r - log r_pred)|, valid even where the
    # plain ratios underflow double precision (N=10, L=6, eps=1e-2)
    worst = 0.0
    for layers, rows in decay_rows.items():
        for row in rows:
            deviation = abs(np.expm1(row.log_ratio - row.log_predicted))
            worst = max(worst, deviation)
            assert deviation <= 1e-6, (layers, row.epsilon, deviation)
    spot = predicted_ratio(10, 4, 1e-3)
    assert abs(spot - (1 - 1e-3)**1111) <= 1e-15
    assert abs(spot - 0.3290) <= 5e-4
    spot_row = [r for r in decay_rows[4] if r.epsilon == 1e-3][0]
    assert abs(spot_row.ratio / spot - 1.0) <= 1e-6
    ok(f"decay law matches prediction (worst relative deviation {worst:.2e}); "
       f"spot value {spot:.6f}")


def test_small_instance_decay_exactness():
    cfg = DecayConfig(n_branch=2, layers=2, epsilons=(0.01,), seed=77)
    from httnsim.decay import _layer_unitaries
    u_root, u_leaf = _layer_unitaries(cfg)
    eps = 0.01

    def depol(rho, rate):
        d = rho.shape[0]
        return (1 - rate) * rho + rate * np.trace(rho) * np.eye(d) / d

    def basis(i, j):
        out = np.zeros((2, 2), dtype=complex)
        out[i, j] = 1.0
        return out

    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    rho = depol(u_root @ rho @ u_root.conj().T, eps)
    zero = basis(0, 0)

    def leaf_map(x):
        return depol(u_leaf @ np.kron(x, zero) @ u_leaf.conj().T, eps)

    step1 = np.zeros((8, 8), dtype=complex)
    for i in range(2):
        for j in range(2):
            step1 += np.kron(leaf_map(basis(i, j)),
                             rho.reshape(2, 2, 2, 2)[i, :, j, :])
    brute = np.zeros((16, 16), dtype=complex)
    for i in range(2):
        for j in range(2):
            brute += np.kron(step1.reshape(4, 2, 4, 2)[:, i, :, j],
                             leaf_map(basis(i, j)))
    z4 = np.diag([(-1.0)**bin(b).count("1") for b in range(16)]).astype(complex)
    brute_value = float(np.real(np.trace(z4 @ brute)))

    row = layered_ratio(cfg)[0]
    assert abs(row.noisy - brute_value) <= 1e-10
    ok("small-instance layered value equals full-tree noisy simulation")


def _tfi_model(excitations=None):
    ham = -(pauli_matrix("ZZ")) - 0.7 * (pauli_matrix("XI") + pauli_matrix("IX"))
    inter = (InteractionTerm(0, 1, -0.3, "IZ", "ZI"),)
    return ClusterModel((2, 2), (ham, ham), inter, excitations)


def test_deep_vqe_pipeline():
    complete = (("II", "XI", "ZI", "ZX"),) * 2
    model_c = _tfi_model(complete)
    exact = float(np.linalg.eigvalsh(model_c.total_hamiltonian())[0])
    energy_c = deep_vqe_energy(model_c, AnsatzSpec(depth=4),
                               OptimizerSpec("lbfgs", restarts=8), seed=11)
    assert abs(energy_c - exact) <= 1e-4

    model_t = _tfi_model()
    energy_t = deep_vqe_energy(model_t, AnsatzSpec(depth=3),
                               OptimizerSpec("lbfgs", restarts=4), seed=5)
    assert energy_t >= exact - 1e-8
    ok(f"cluster pipeline: complete-basis energy {energy_c:.8f} vs exact "
       f"{exact:.8f}; truncated bound holds ({energy_t:.8f})")


def test_gram_schmidt_contract():
    rng = np.random.default_rng(404)
    for _ in range(100):
        k = int(rng.integers(2, 7))
        rank = int(rng.integers(1, k + 1))
        g = rng.normal(size=(rank, k)) + 1j * rng.normal(size=(rank, k))
        s = g.conj().T @ g
        p, padded = gram_schmidt_transform(s)
        gram = np.conj(p) @ s @ p.T
        live = ~padded
        assert np.abs(gram[np.ix_(live, live)]
                      - np.eye(int(live.sum()))).max() <= 1e-8
    ok("orthonormalization contract over 100 random overlap matrices")


def test_forging_three_way_and_sampler():
    rng = np.random.default_rng(505)
    count = 0
    for _ in range(100):
        n_half = int(rng.integers(1, 4))
        dim = 2**n_half
        psi = rand_state(2 * n_half, rng)
        o1, o2 = rand_hermitian(dim, rng), rand_hermitian(dim, rng)
        ansatz = schmidt_decompose(psi)
        direct = float(np.real(np.vdot(psi, np.kron(o1, o2) @ psi)))
        assert abs(forged_expectation(ansatz, o1, o2) - direct) <= 1e-10
        assert abs(forged_htn_expectation(ansatz, o1, o2) - direct) <= 1e-10
        count += 1

    for n_half in (1, 2, 3):
        dim = 2**n_half
        psi = np.zeros(dim * dim, dtype=complex)
        for x in range(dim):
            psi[x * dim + x] = 1 / np.sqrt(dim)
        ansatz = schmidt_decompose(psi)
        assert abs(ansatz.lambda_l1 - np.sqrt(dim)) <= 1e-10

    psi = rand_state(2, rng)
    o1, o2 = rand_hermitian(2, rng), rand_hermitian(2, rng)
    ansatz = schmidt_decompose(psi)
    exact = forged_expectation(ansatz, o1, o2)
    plan = build_sampler_plan(ansatz, o1, o2)
    estimates = np.array([
        forged_sampler(plan, o1, o2, shots=2000, seed=9000 + r).estimate
        for r in range(200)
    ])
    sigma = estimates.std(ddof=1) / np.sqrt(estimates.size)
    assert abs(estimates.mean() - exact) <= 4 * sigma
    ok(f"forging three-way agreement ({count} seeds); max-entangled 1-norms; "
       f"sampler mean within 4 sigma")


def test_qem_round_trip(decay_rows):
    worst = 0.0
    for rows in decay_rows.values():
        for row in rows:
            rel = abs(row.qem_value / row.noiseless - 1.0)
            worst = max(worst, rel)
            assert rel <= 1e-5
            with np.errstate(over="ignore"):
                expected_mult = np.exp(-2.0 * row.log_predicted)
            if np.isfinite(expected_mult):
                assert row.variance_multiplier == expected_mult
            else:
                assert row.variance_multiplier == np.inf
            if row.predicted_ratio > 1e-300:
                mitigated, multiplier = qem_rescale(row.noisy,
                                                    row.predicted_ratio)
                assert abs(mitigated - row.qem_value) <= \
                    1e-10 * abs(row.qem_value)
                assert abs(multiplier - row.predicted_ratio**-2) <= \
                    1e-8 * row.predicted_ratio**-2
    ok(f"rescaling recovers noiseless values (worst relative error {worst:.2e})")
