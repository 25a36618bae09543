"""Contracting single tensors into Hermitian blocks, four ways.

Every tensor is a family of K-qubit states labeled by a tau-bit classical
index. Contracting it against an observable O produces the 2^tau x 2^tau
matrices M[i,i'] = <psi^i|O|psi^i'> and S[i,i'] = <psi^i|psi^i'>; this
script walks through the measurement-style assembly for each preparation
kind and checks it against the expansion-operator product A^dag O A.
"""

import numpy as np

from httnsim import (
    ChainedChannel,
    GateNoisePair,
    InitialStatePrep,
    PauliFamilyPrep,
    ProjectedStatePrep,
    QuantumTensor,
    build_expansion_operator,
    contract_type1,
    contract_type2,
    contract_type3,
    contract_type4,
    make_depolarizing,
    pauli_matrix,
    state_preparation_channel,
    unitary_channel,
)

Z = pauli_matrix("Z")
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

# --- kind 1: the index is loaded as an initial state -------------------------
# |psi^i> = U(|i> (x) |0...0>). With U = H on one qubit and O = Z, the block
# is H Z H = X. A trailing depolarizing channel at rate 0.1 simply damps the
# whole (traceless-observable) block by 0.9.
print("== index as initial state ==")
print(contract_type1(unitary_channel(H), Z, tau=1).m.real)
noisy = ChainedChannel(make_depolarizing(1, 0.1), unitary_channel(H))
print(contract_type1(noisy, Z, tau=1).m.real)

# --- kind 2: the index is a projection of a carrier state --------------------
# |psi^i> = <i|psi> for a Bell carrier: both projected columns have norm
# 1/sqrt(2), which shows up on the diagonal of S (the normalization lives in
# S, never in the columns themselves).
print("\n== index as projection (Bell carrier) ==")
bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
block = contract_type2(state_preparation_channel(bell), Z, tau=1)
print("M:", np.round(block.m.real, 6).tolist())
print("S:", np.round(block.s.real, 6).tolist())

# --- kind 3: the index selects a Pauli string --------------------------------
print("\n== index as Pauli operator ==")
block = contract_type3(state_preparation_channel(np.array([1, 0], dtype=complex)),
                       Z, paulis=("I", "X"), tau=1)
print("M:", block.m.real)

# --- kind 4: the index selects which gate runs --------------------------------
# Off-diagonal entries come from a phase-swept controlled-gate circuit; the
# depolarizing pair (p diagonal, q off-diagonal) damps entries elementwise.
print("\n== index as gate choice ==")
clean = contract_type4((np.eye(2, dtype=complex), H), Z, tau=1)
damped = contract_type4((np.eye(2, dtype=complex), H), Z, tau=1,
                        noise=GateNoisePair(p=(0.0, 0.0), q=(0.1, 0.1)))
print("clean M[0,1] :", clean.m[0, 1])
print("damped M[0,1]:", damped.m[0, 1], "(= 0.81 x clean)")

# --- expansion operators -------------------------------------------------------
# A = sum_i |psi^i><i| stacks the indexed states as columns; noiseless blocks
# are exactly A^dag O A and A^dag A.
print("\n== expansion operator cross-check ==")
tensor = QuantumTensor(PauliFamilyPrep(np.array([1, 0], dtype=complex), ("I", "X")),
                       tau=1, k_width=1)
a = build_expansion_operator(tensor).matrix
print("A:", a.real.tolist())
print("A^dag Z A:", (a.conj().T @ Z @ a).real.tolist())

tensor2 = QuantumTensor(ProjectedStatePrep(bell), tau=1, k_width=1)
a2 = build_expansion_operator(tensor2).matrix
print("projected-state columns (unnormalized):", np.round(a2.real, 6).tolist())
