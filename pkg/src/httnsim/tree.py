"""Hybrid tree tensor networks: assembly, contraction, noisy effective states.

A tree is a root tensor (a parent state on ``kappa`` qubits, either stored
classically or prepared by a possibly noisy circuit) plus a sequence of
layers of :class:`~httnsim.tensors.QuantumTensor` nodes. Layer ``0`` consumes
the root qubits; every node's tau-bit classical index consumes tau
designated qubits of its parent, and the last layer's K-qubit registers
carry the observable.

Expectation values contract Hermitian blocks bottom-up: the last layer's
observable blocks feed the previous layer as observables, down to
``Tr[M_first rho] / Tr[S_first rho]``. Noisy effective states compose the
per-node expansion maps top-down instead and divide by the trace; the two
routes agree by construction and are cross-checked in the test suite.

Concurrency: trees and tensors are immutable; sibling-subtree contractions
are independent. The per-tree block cache tolerates concurrent reads with
single-writer insertion (guarded by a lock).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from math import prod

import numpy as np

from .channels import GateNoisePair, NO_NOISE, NoiseSpec
from .contraction import contract_tensor
from .errors import (
    DegenerateNormalizationError,
    DimensionError,
    TopologyError,
    UnsupportedConstructionError,
    ValidationError,
)
from .linalg import (
    ATOL_PHYSICAL,
    ATOL_STRUCTURAL,
    DEGENERATE_TOL,
    dagger,
    ket,
    n_qubits,
    projector,
    tensor_product,
)
from .tensors import (
    GateFamilyPrep,
    QuantumTensor,
    build_expansion_operator,
    noisy_expansion_map,
)


@dataclass(frozen=True)
class TreeRoot:
    """Parent tensor of the tree.

    Exactly one of ``state`` (a classically stored vector or density matrix,
    always noiseless) or ``unitary`` (a circuit preparing ``U |0...0>``,
    optionally followed by the ``noise`` channel) must be given.
    """

    state: np.ndarray | None = None
    unitary: np.ndarray | None = None
    noise: NoiseSpec = NO_NOISE

    def __post_init__(self):
        if (self.state is None) == (self.unitary is None):
            raise ValidationError("give exactly one of state= or unitary=")
        if self.state is not None and not self.noise.is_none:
            raise ValidationError("classically stored parents are noiseless")

    @property
    def num_qubits(self) -> int:
        if self.state is not None:
            arr = np.asarray(self.state)
            return n_qubits(arr.shape[0])
        return n_qubits(np.asarray(self.unitary).shape[0])

    @property
    def is_noiseless(self) -> bool:
        return self.noise.is_none

    def density(self) -> np.ndarray:
        """The (noisy) parent density operator rho."""
        if self.state is not None:
            arr = np.asarray(self.state, dtype=complex)
            rho = projector(arr) if arr.ndim == 1 else arr
        else:
            u = np.asarray(self.unitary, dtype=complex)
            rho = projector(u @ ket(0, self.num_qubits))
            ch = self.noise.channel(self.num_qubits)
            if ch is not None:
                rho = ch.apply(rho)
        if abs(np.trace(rho) - 1.0) > ATOL_STRUCTURAL:
            raise ValidationError("root state must have unit trace/norm")
        return rho

    def pure_state(self) -> np.ndarray:
        """The noiseless parent state vector (rejects density-matrix roots)."""
        if self.state is not None:
            arr = np.asarray(self.state, dtype=complex)
            if arr.ndim != 1:
                raise ValidationError("root was given as a density matrix")
            return arr
        return np.asarray(self.unitary, dtype=complex) @ ket(0, self.num_qubits)


class _BlockCache:
    """(node index, observable bytes) -> contracted block, lock-guarded."""

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()

    def get_or_compute(self, key, compute):
        with self._lock:
            if key in self._data:
                return self._data[key]
        value = compute()
        with self._lock:
            self._data.setdefault(key, value)
        return self._data[key]


@dataclass(frozen=True)
class HttnTree:
    """Rooted tree of tensors with layer structure and per-node noise."""

    root: TreeRoot
    layers: tuple

    def __post_init__(self):
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "_cache", _BlockCache())
        if len(layers) == 0:
            raise TopologyError("a tree needs at least one tensor layer")
        upstream = self.root.num_qubits
        for depth, layer in enumerate(layers):
            if len(layer) == 0:
                raise TopologyError(f"layer {depth} is empty")
            consumed = sum(node.tau for node in layer)
            if consumed != upstream:
                raise TopologyError(
                    f"layer {depth} consumes {consumed} index qubits but the "
                    f"layer above provides {upstream}")
            if depth > 0:
                self._owner_map(depth)
            upstream = sum(node.k_width for node in layer)

    def _owner_map(self, depth: int) -> list[int]:
        """For each node in ``layers[depth]``, the index of its parent one layer up.

        Raises:
            TopologyError: if a node's index register straddles two parents.
        """
        parents = self.layers[depth - 1]
        spans = []
        start = 0
        for parent in parents:
            spans.append((start, start + parent.k_width))
            start += parent.k_width
        owners = []
        pos = 0
        for node in self.layers[depth]:
            lo, hi = pos, pos + node.tau
            owner = next((j for j, (a, b) in enumerate(spans)
                          if a <= lo and hi <= b), None)
            if owner is None:
                raise TopologyError(
                    f"a node's {node.tau}-bit index register straddles parents")
            owners.append(owner)
            pos = hi
        return owners

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def leaves(self) -> tuple:
        return self.layers[-1]

    @property
    def is_noiseless(self) -> bool:
        if not self.root.is_noiseless:
            return False
        for layer in self.layers:
            for node in layer:
                if isinstance(node.noise, GateNoisePair):
                    if any(node.noise.p) or any(node.noise.q):
                        return False
                elif not node.noise.is_none:
                    return False
        return True


@dataclass(frozen=True)
class PhysicalityReport:
    """Trace / positivity verdict for an effective state."""

    min_eigenvalue: float
    trace: complex
    is_physical: bool
    tol: float = ATOL_PHYSICAL

    def as_dict(self) -> dict:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "trace": [self.trace.real, self.trace.imag],
            "is_physical": self.is_physical,
            "tol": self.tol,
        }


def _normalize_observables(tree: HttnTree, observables) -> list[tuple[complex, list]]:
    """Accept one product term (list of per-leaf matrices) or a weighted sum."""
    leaves = tree.leaves
    if len(observables) > 0 and isinstance(observables[0], tuple):
        terms = [(complex(c), [np.asarray(o, dtype=complex) for o in ops])
                 for c, ops in observables]
    else:
        terms = [(1.0 + 0j, [np.asarray(o, dtype=complex) for o in observables])]
    for _, ops in terms:
        if len(ops) != len(leaves):
            raise DimensionError(
                f"need one observable per leaf ({len(leaves)}), got {len(ops)}")
        for o, leaf in zip(ops, leaves):
            if o.shape != (leaf.out_dim, leaf.out_dim):
                raise DimensionError(
                    f"leaf observable shape {o.shape} does not match K={leaf.k_width}")
    return terms


def _group_by_parent(tree: HttnTree, depth: int, blocks: list) -> list:
    """Kron the child blocks belonging to each parent node at ``depth``."""
    owners = tree._owner_map(depth + 1)
    grouped = []
    for j in range(len(tree.layers[depth])):
        mine = [blocks[c] for c, owner in enumerate(owners) if owner == j]
        grouped.append(tensor_product(mine))
    return grouped


def _chain_blocks(tree: HttnTree, leaf_mats: list | None,
                  tag: str) -> np.ndarray:
    """Contract bottom-up; ``leaf_mats=None`` runs the overlap (S) chain.

    Returns the kron of the first layer's blocks, an operator on the root
    register.
    """
    cache: _BlockCache = tree._cache
    blocks: list | None = None
    for depth in reversed(range(tree.num_layers)):
        nodes = tree.layers[depth]
        if depth == tree.num_layers - 1:
            if leaf_mats is None:
                observables = [np.eye(node.out_dim, dtype=complex) for node in nodes]
            else:
                observables = leaf_mats
        else:
            observables = _group_by_parent(tree, depth, blocks)
        new_blocks = []
        for idx, (node, obs) in enumerate(zip(nodes, observables)):
            if leaf_mats is None and depth == tree.num_layers - 1:
                key = (depth, idx, tag, b"overlap")
                blk = cache.get_or_compute(
                    key, lambda n=node, o=obs: contract_tensor(n, o).s)
            elif node.kind == "1" and np.array_equal(
                    obs, np.eye(node.out_dim, dtype=complex)):
                # identity observables pass through initial-state tensors
                # untouched (their overlap block is structurally I)
                blk = np.eye(node.index_count, dtype=complex)
            else:
                key = (depth, idx, tag, obs.tobytes())
                blk = cache.get_or_compute(
                    key, lambda n=node, o=obs: contract_tensor(n, o).m)
            new_blocks.append(blk)
        blocks = new_blocks
    return tensor_product(blocks)


def _contract_value(tree: HttnTree, observables,
                    allow_singular_overlap: bool = True) -> float:
    terms = _normalize_observables(tree, observables)
    rho = tree.root.density()
    s_top = _chain_blocks(tree, None, "S")
    denominator = complex(np.trace(s_top @ rho))
    if abs(denominator) <= DEGENERATE_TOL:
        raise DegenerateNormalizationError(
            f"normalization C^2 = {denominator:.3e} vanished")
    if not allow_singular_overlap:
        for leaf in tree.leaves:
            s_leaf = contract_tensor(leaf, np.eye(leaf.out_dim, dtype=complex)).s
            if np.linalg.matrix_rank(s_leaf, tol=1e-10) < s_leaf.shape[0]:
                raise ValidationError(
                    "singular leaf overlap block with strict mode enabled")
    numerator = 0.0 + 0j
    for coeff, ops in terms:
        m_top = _chain_blocks(tree, ops, "M")
        numerator += coeff * complex(np.trace(m_top @ rho))
    return float(np.real(numerator / denominator))


def expectation(tree: HttnTree, observables,
                allow_singular_overlap: bool = True) -> float:
    """Expectation value of a (sum of) product observable(s), noiseless trees.

    ``observables`` is either one list with a matrix per leaf or a list of
    ``(coeff, [matrix per leaf])`` terms for observables without tensor
    product structure.

    Raises:
        ValidationError: if any node or the root carries noise.
        DegenerateNormalizationError: if the normalization vanishes.
    """
    if not tree.is_noiseless:
        raise ValidationError(
            "expectation() requires a noiseless tree; use noisy_expectation()")
    return _contract_value(tree, observables, allow_singular_overlap)


def noisy_expectation(tree: HttnTree, observables,
                      allow_singular_overlap: bool = True) -> float:
    """Expectation under per-node noise, by the sequential block contraction.

    Reduces to :func:`expectation` when every noise spec is none.
    """
    return _contract_value(tree, observables, allow_singular_overlap)


# --- effective states --------------------------------------------------------


def apply_expansion_layer(op: np.ndarray, maps: list) -> np.ndarray:
    """Apply one expansion map per adjacent register block of ``op``."""
    done = 1
    pending = [m.dim_in for m in maps]
    for idx, emap in enumerate(maps):
        right = prod(pending[idx + 1:]) if idx + 1 < len(pending) else 1
        left_eye = np.eye(done, dtype=complex)
        right_eye = np.eye(right, dtype=complex)
        out_dim = done * emap.dim_out * right
        new = np.zeros((out_dim, out_dim), dtype=complex)
        for b in emap.kraus():
            k_full = np.kron(np.kron(left_eye, b), right_eye)
            new += k_full @ op @ dagger(k_full)
        op = new
        done *= emap.dim_out
    return op


def effective_noisy_state(tree: HttnTree) -> np.ndarray:
    """The effective density operator reproducing all noisy expectations.

    Composes the per-layer noisy expansion maps onto the root state and
    divides by the trace. Valid for initial-state, projection, Pauli, and
    classical tensors; gate-family nodes are rejected (their effective state
    is built by :func:`effective_noisy_state_type4` and need not be
    positive).

    Raises:
        UnsupportedConstructionError: if a gate-family node is present.
        DegenerateNormalizationError: if the composed state has zero trace.
    """
    for layer in tree.layers:
        for node in layer:
            if isinstance(node.prep, GateFamilyPrep):
                raise UnsupportedConstructionError(
                    "gate-family nodes have no CP expansion map; "
                    "use effective_noisy_state_type4")
    rho = tree.root.density()
    for layer in tree.layers:
        rho = apply_expansion_layer(rho, [noisy_expansion_map(n) for n in layer])
    trace = complex(np.trace(rho))
    if abs(trace) <= DEGENERATE_TOL:
        raise DegenerateNormalizationError("effective state has zero trace")
    return rho / trace


def _damping_matrix(node: QuantumTensor, diag, offdiag) -> np.ndarray:
    n_idx = node.index_count
    mat = np.empty((n_idx, n_idx), dtype=complex)
    for i in range(n_idx):
        for j in range(n_idx):
            mat[i, j] = diag[i] if i == j else offdiag[i] * offdiag[j]
    return mat


def effective_noisy_state_type4(tree: HttnTree,
                                noise: list[GateNoisePair] | None = None
                                ) -> np.ndarray:
    """Effective state of a two-layer, all gate-family tree (possibly non-PSD).

    With per-node rates ``p`` (diagonal circuits) and ``q`` (off-diagonal
    circuits), the parent state is damped entrywise: diagonal blocks by
    ``1 - p_i`` for the numerator (by 1 for the denominator), off-diagonal
    blocks by ``(1 - q_i)(1 - q_i')`` for both. The result is the expanded
    damped parent divided by the trace of its overlap-damped counterpart;
    no positivity is guaranteed.

    Raises:
        ValidationError: unless the tree has exactly one all-gate-family layer.
    """
    if tree.num_layers != 1:
        raise ValidationError("the gate-family effective state needs a 2-layer tree")
    nodes = tree.layers[0]
    if not all(isinstance(n.prep, GateFamilyPrep) for n in nodes):
        raise ValidationError("all nodes must be gate-family tensors")
    if noise is None:
        noise = []
        for node in nodes:
            if isinstance(node.noise, GateNoisePair):
                noise.append(node.noise)
            elif node.noise.is_none:
                noise.append(GateNoisePair.uniform(node.index_count, 0.0, 0.0))
            else:
                raise ValidationError("gate-family nodes take GateNoisePair noise")
    rho = tree.root.density()
    value_damp = tensor_product([
        _damping_matrix(node, [1.0 - p for p in pair.p],
                        [1.0 - q for q in pair.q])
        for node, pair in zip(nodes, noise)])
    overlap_damp = tensor_product([
        _damping_matrix(node, [1.0] * node.index_count,
                        [1.0 - q for q in pair.q])
        for node, pair in zip(nodes, noise)])
    a_full = tensor_product([build_expansion_operator(n).matrix for n in nodes])
    numerator = a_full @ (rho * value_damp) @ dagger(a_full)
    denominator = complex(np.trace(a_full @ (rho * overlap_damp) @ dagger(a_full)))
    if abs(denominator) <= DEGENERATE_TOL:
        raise DegenerateNormalizationError("overlap-damped trace vanished")
    return numerator / denominator


def pure_tree_state(tree: HttnTree) -> np.ndarray:
    """Normalized noiseless tree state via stacked expansion matrices.

    Raises:
        ValidationError: if the tree carries noise.
        DegenerateNormalizationError: if the stacked state has zero norm.
    """
    if not tree.is_noiseless:
        raise ValidationError("pure_tree_state requires a noiseless tree")
    vec = tree.root.pure_state()
    for layer in tree.layers:
        a_full = tensor_product(
            [build_expansion_operator(n).matrix for n in layer])
        vec = a_full @ vec
    norm = np.linalg.norm(vec)
    if norm <= np.sqrt(DEGENERATE_TOL):
        raise DegenerateNormalizationError("tree state has zero norm")
    return vec / norm


def physicality_check(rho: np.ndarray, tol: float = ATOL_PHYSICAL) -> PhysicalityReport:
    """Trace-one and positive-semidefinite verdict at the central tolerance.

    Raises:
        DimensionError: for non-square input.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {rho.shape}")
    trace = complex(np.trace(rho))
    min_eig = float(np.linalg.eigvalsh((rho + dagger(rho)) / 2).min())
    is_physical = bool(min_eig >= -tol and abs(trace - 1.0) <= tol)
    return PhysicalityReport(min_eigenvalue=min_eig, trace=trace,
                             is_physical=is_physical, tol=tol)
