"""How noise travels through a tree, and when the result stays physical.

Builds small trees, replaces ideal preparations with noisy channels, and
compares the two equivalent accounts of the outcome: the bottom-up block
contraction (what a measurement-based run computes) and the explicitly
composed effective density operator. For index-as-initial-state /
projection / Pauli tensors the effective state is always a density
operator; for gate-family tensors it can pick up negative eigenvalues.
"""

import numpy as np

from httnsim import (
    GateFamilyPrep,
    GateNoisePair,
    HttnTree,
    InitialStatePrep,
    NoiseSpec,
    QuantumTensor,
    TreeRoot,
    effective_noisy_state,
    effective_noisy_state_type4,
    noisy_expectation,
    pauli_matrix,
    physicality_check,
)

Z = pauli_matrix("Z")
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

# A two-layer tree: Bell-like parent prepared by a noisy circuit, two noisy
# single-qubit leaves.
cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                dtype=complex)
bell_prep = cnot @ np.kron(H, np.eye(2))
tree = HttnTree(
    root=TreeRoot(unitary=bell_prep, noise=NoiseSpec("depolarizing", rate=0.05)),
    layers=[[
        QuantumTensor(InitialStatePrep(H), tau=1, k_width=1,
                      noise=NoiseSpec("depolarizing", rate=0.1)),
        QuantumTensor(InitialStatePrep(np.eye(2, dtype=complex)), tau=1,
                      k_width=1, noise=NoiseSpec("depolarizing", rate=0.2)),
    ]])

value = noisy_expectation(tree, [Z, Z])
rho = effective_noisy_state(tree)
print("block-contraction value :", value)
print("Tr[ZZ rho_eff]          :", np.real(np.trace(np.kron(Z, Z) @ rho)))
print(physicality_check(rho))

# The same expectation shrinks as the leaf noise grows: each depolarizing
# tensor multiplies the (traceless-observable) signal by 1 - rate.
print("\nsignal damping with leaf noise:")
for rate in (0.0, 0.1, 0.3, 0.6):
    noisy_tree = HttnTree(
        root=TreeRoot(state=np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)),
        layers=[[
            QuantumTensor(InitialStatePrep(np.eye(2, dtype=complex)), tau=1,
                          k_width=1, noise=NoiseSpec("depolarizing", rate=rate)),
            QuantumTensor(InitialStatePrep(np.eye(2, dtype=complex)), tau=1,
                          k_width=1, noise=NoiseSpec("depolarizing", rate=rate)),
        ]])
    print(f"  rate={rate:.1f}  <ZZ> = {noisy_expectation(noisy_tree, [Z, Z]):+.4f}"
          f"  (prediction {(1 - rate) ** 2:+.4f})")

# Gate-family tensors break the pattern: the damped parent need not stay
# positive. This instance lands on eigenvalues {0.75, -0.25}.
print("\ngate-family counterexample:")
plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
node = QuantumTensor(GateFamilyPrep((np.eye(2, dtype=complex), pauli_matrix("X"))),
                     tau=1, k_width=1,
                     noise=GateNoisePair(p=(0.5, 0.5), q=(0.0, 0.0)))
rho4 = effective_noisy_state_type4(
    HttnTree(root=TreeRoot(state=plus), layers=[[node]]))
print("eigenvalues:", np.linalg.eigvalsh(rho4))
print(physicality_check(rho4))
