"""Shared helpers: independent brute-force oracles and random tree factories.

The explicit-summation oracle here deliberately avoids the library's
expansion-matrix route: tree states are built by looping over every
classical index combination and summing parent amplitudes times child
state kroneckers, which is the definition the contraction path must
reproduce.
"""

from __future__ import annotations

import itertools
from math import prod

import numpy as np
import pytest

from httnsim import (
    ClassicalTable,
    GateFamilyPrep,
    HttnTree,
    InitialStatePrep,
    NoiseSpec,
    PauliFamilyPrep,
    ProjectedStatePrep,
    QuantumTensor,
    TreeRoot,
    pauli_matrix,
)
from httnsim.rand import (
    rand_density,
    rand_hermitian,
    rand_kraus_channel,
    rand_state,
    rand_unitary,
)

PAULI = {c: pauli_matrix(c) for c in "IXYZ"}


@pytest.fixture
def rng():
    return np.random.default_rng(20240814)


def kron_all(mats):
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def basis_vec(index, dim):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


# --- explicit per-index state lists (oracle side) ---------------------------


def indexed_states(node: QuantumTensor) -> list[np.ndarray]:
    """|psi^i> for every classical index, straight from the prep payload."""
    dim = 2**node.k_width
    prep = node.prep
    states = []
    for i in range(2**node.tau):
        if isinstance(prep, InitialStatePrep):
            states.append(np.asarray(prep.unitary, dtype=complex)
                          @ basis_vec(i << (node.k_width - node.tau), dim))
        elif isinstance(prep, ProjectedStatePrep):
            psi = np.asarray(prep.state, dtype=complex).ravel()
            states.append(psi[i * dim:(i + 1) * dim].copy())
        elif isinstance(prep, PauliFamilyPrep):
            lab = prep.labels[i]
            if lab is None:
                states.append(np.zeros(dim, dtype=complex))
            else:
                states.append(kron_all([PAULI[c] for c in lab])
                              @ np.asarray(prep.state, dtype=complex).ravel())
        elif isinstance(prep, GateFamilyPrep):
            states.append(np.asarray(prep.unitaries[i], dtype=complex)
                          @ basis_vec(0, dim))
        elif isinstance(prep, ClassicalTable):
            states.append(np.asarray(prep.table, dtype=complex)[:, i].copy())
    return states


def explicit_layer_expand(vec: np.ndarray, nodes) -> np.ndarray:
    """Sum_i phi_i |psi_1^{i_1}> (x) ... (x) |psi_N^{i_N}>, term by term."""
    taus = [n.tau for n in nodes]
    state_lists = [indexed_states(n) for n in nodes]
    out_dim = prod(2**n.k_width for n in nodes)
    out = np.zeros(out_dim, dtype=complex)
    for combo in itertools.product(*[range(2**t) for t in taus]):
        flat = 0
        for t, c in zip(taus, combo):
            flat = (flat << t) | c
        amp = vec[flat]
        if amp == 0:
            continue
        term = state_lists[0][combo[0]]
        for states, c in zip(state_lists[1:], combo[1:]):
            term = np.kron(term, states[c])
        out += amp * term
    return out


def explicit_tree_state(tree: HttnTree) -> np.ndarray:
    """Normalized noiseless tree state by explicit index summation."""
    vec = tree.root.pure_state()
    for layer in tree.layers:
        vec = explicit_layer_expand(vec, layer)
    return vec / np.linalg.norm(vec)


def explicit_expectation(tree: HttnTree, leaf_obs) -> float:
    psi = explicit_tree_state(tree)
    big = kron_all(leaf_obs)
    return float(np.real(np.vdot(psi, big @ psi)))


# --- random tensor / tree factories -----------------------------------------


def random_pauli_string(k, rng):
    return "".join(str(rng.choice(list("IXYZ"))) for _ in range(k))


def random_tensor(kind: str, tau: int, k_width: int, rng,
                  noise: NoiseSpec | None = None) -> QuantumTensor:
    noise = noise or NoiseSpec()
    if kind == "1":
        prep = InitialStatePrep(rand_unitary(2**k_width, rng))
    elif kind == "2":
        prep = ProjectedStatePrep(rand_state(k_width + tau, rng))
    elif kind == "3":
        labels = tuple(random_pauli_string(k_width, rng) for _ in range(2**tau))
        prep = PauliFamilyPrep(rand_state(k_width, rng), labels)
    elif kind == "4":
        prep = GateFamilyPrep(tuple(rand_unitary(2**k_width, rng)
                                    for _ in range(2**tau)))
    elif kind == "c":
        table = (rng.normal(size=(2**k_width, 2**tau))
                 + 1j * rng.normal(size=(2**k_width, 2**tau)))
        prep = ClassicalTable(table)
    else:
        raise ValueError(kind)
    return QuantumTensor(prep, tau=tau, k_width=k_width, noise=noise)


def kraus_noise(channel) -> NoiseSpec:
    return NoiseSpec("kraus", kraus_ops=tuple(channel.kraus_ops))


def random_noise(k_qubits: int, rng, allow_none: bool = True) -> NoiseSpec:
    choices = ["depolarizing", "kraus"] + (["none"] if allow_none else [])
    kind = str(rng.choice(choices))
    if kind == "none":
        return NoiseSpec()
    if kind == "depolarizing":
        return NoiseSpec("depolarizing", rate=float(rng.uniform(0, 0.5)))
    ch = rand_kraus_channel(k_qubits, rng, n_kraus=int(rng.integers(2, 4)))
    return kraus_noise(ch)


def random_two_layer_tree(rng, kinds=("1", "2", "3", "c"), max_leaves=3,
                          max_k=2, noisy: bool = False) -> HttnTree:
    n_leaves = int(rng.integers(1, max_leaves + 1))
    leaves = []
    for _ in range(n_leaves):
        kind = rng.choice(list(kinds))
        k_width = int(rng.integers(1, max_k + 1))
        tau = 1
        node_noise = NoiseSpec()
        if noisy:
            width = k_width + tau if kind == "2" else k_width
            node_noise = random_noise(width, rng, allow_none=False) \
                if kind != "c" else NoiseSpec()
        leaves.append(random_tensor(kind, tau, k_width, rng, node_noise))
    if noisy and rng.random() < 0.5:
        root = TreeRoot(unitary=rand_unitary(2**n_leaves, rng),
                        noise=random_noise(n_leaves, rng, allow_none=False))
    else:
        root = TreeRoot(state=rand_state(n_leaves, rng))
    return HttnTree(root=root, layers=[leaves])


def random_deep_tree(rng, kinds=("1", "2", "3", "c"), noisy: bool = False) -> HttnTree:
    """A 3-layer tree: 2-qubit root, two mid nodes (K=1 or 2), leaves below."""
    mids = []
    for _ in range(2):
        kind = rng.choice(list(kinds))
        k_width = int(rng.integers(1, 3))
        node_noise = NoiseSpec()
        if noisy and kind != "c":
            width = k_width + 1 if kind == "2" else k_width
            node_noise = random_noise(width, rng, allow_none=False)
        mids.append(random_tensor(kind, 1, k_width, rng, node_noise))
    leaves = []
    for mid in mids:
        for _ in range(mid.k_width):
            kind = rng.choice(list(kinds))
            k_width = int(rng.integers(1, 3))
            node_noise = NoiseSpec()
            if noisy and kind != "c":
                width = k_width + 1 if kind == "2" else k_width
                node_noise = random_noise(width, rng, allow_none=False)
            leaves.append(random_tensor(kind, 1, k_width, rng, node_noise))
    if noisy and rng.random() < 0.5:
        root = TreeRoot(unitary=rand_unitary(4, rng),
                        noise=random_noise(2, rng, allow_none=False))
    else:
        root = TreeRoot(state=rand_state(2, rng))
    return HttnTree(root=root, layers=[mids, leaves])


def random_leaf_observables(tree: HttnTree, rng):
    return [rand_hermitian(2**leaf.k_width, rng) for leaf in tree.leaves]


__all__ = [
    "PAULI", "kron_all", "basis_vec", "indexed_states", "explicit_tree_state",
    "explicit_expectation", "random_tensor", "random_noise", "kraus_noise",
    "random_two_layer_tree", "random_deep_tree", "random_leaf_observables",
    "rand_density", "rand_hermitian", "rand_kraus_channel", "rand_state",
    "rand_unitary",
]
