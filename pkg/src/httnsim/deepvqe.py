"""Cluster decomposition pipeline: per-cluster VQE, excitation bases,
Gram-Schmidt orthonormalization, effective Hamiltonians, and top-layer VQE.

The workflow splits a Hamiltonian ``H = sum_s H_s + sum_{t,u} V_tu`` (with
``V_tu = sum_a c^a W_t^a (x) W_u^a``) over weakly coupled clusters:

1. approximate each cluster ground state ``|g_s>`` variationally;
2. build the excitation basis ``|psi_s^m> = D_s^m |g_s>`` (``D^0 = I``) and
   the lower-triangular matrix ``P_s`` that orthonormalizes it, from the
   overlap matrix alone;
3. project ``H`` into the orthonormalized product basis, giving an
   effective Hamiltonian on ``kappa = sum_s ceil(log2 K_s)`` qubits (indices
   beyond ``K_s`` are padded with zero states);
4. minimize the effective energy with a second variational loop.

Every energy produced along the way is a Rayleigh quotient of ``H`` on a
subspace, so it upper-bounds the true ground energy regardless of optimizer
quality.

The noise-robust variant rebuilds the state from Pauli excitations applied
to noisy cluster preparations only (no classically orthonormalized layer),
which keeps the effective state a valid density operator under any CPTP
noise; the plain variant's trace drifts once the orthonormalization matrix
is computed from noisy overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil, log2

import numpy as np
from scipy.optimize import minimize

from .channels import NO_NOISE, NoiseSpec
from .errors import (
    DimensionError,
    UnsupportedConstructionError,
    ValidationError,
)
from .linalg import (
    RANK_TOL,
    dagger,
    ket,
    n_qubits,
    pauli_matrix,
    projector,
    require_hermitian,
    tensor_product,
)
from .tensors import PauliFamilyPrep, QuantumTensor, noisy_expansion_map
from .tree import apply_expansion_layer


@dataclass(frozen=True)
class InteractionTerm:
    """One product term ``coeff * W_left (x) W_right`` between two clusters."""

    left: int
    right: int
    coeff: float
    op_left: str | np.ndarray
    op_right: str | np.ndarray


@dataclass(frozen=True)
class ClusterModel:
    """Clustered Hamiltonian with excitation operators per cluster.

    ``excitations[s]`` lists ``D_s^m`` as Pauli label strings or dense
    matrices; the first entry must be the identity. When omitted, the
    boundary interaction factors of each cluster are used (the default
    excitation choice), prefixed with the identity.
    """

    cluster_qubits: tuple
    cluster_hams: tuple
    interactions: tuple = ()
    excitations: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "cluster_qubits", tuple(self.cluster_qubits))
        hams = tuple(np.asarray(h, dtype=complex) for h in self.cluster_hams)
        object.__setattr__(self, "cluster_hams", hams)
        object.__setattr__(self, "interactions", tuple(self.interactions))
        if len(self.cluster_qubits) != len(hams):
            raise ValidationError("one Hamiltonian per cluster required")
        for n, h in zip(self.cluster_qubits, hams):
            require_hermitian(h, "cluster Hamiltonian")
            if h.shape[0] != 2**n:
                raise DimensionError(f"cluster Hamiltonian must act on {n} qubits")
        for term in self.interactions:
            if not (0 <= term.left < self.n_clusters
                    and 0 <= term.right < self.n_clusters
                    and term.left != term.right):
                raise ValidationError("interaction term indexes invalid clusters")
        if self.excitations is not None:
            excs = tuple(tuple(d) for d in self.excitations)
            object.__setattr__(self, "excitations", excs)
            if len(excs) != self.n_clusters:
                raise ValidationError("one excitation list per cluster required")
            for s, d_list in enumerate(excs):
                if len(d_list) < 1:
                    raise ValidationError("excitation lists must be nonempty")
                d0 = self.excitation_matrix(s, 0)
                if np.abs(d0 - np.eye(2**self.cluster_qubits[s])).max() > 1e-12:
                    raise ValidationError("the first excitation must be the identity")

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_qubits)

    @property
    def total_qubits(self) -> int:
        return sum(self.cluster_qubits)

    def default_excitations(self) -> tuple:
        """Identity plus the boundary interaction factors touching each cluster."""
        lists = []
        for s in range(self.n_clusters):
            ops: list = ["I" * self.cluster_qubits[s]]
            for term in self.interactions:
                for side, op in ((term.left, term.op_left),
                                 (term.right, term.op_right)):
                    if side == s and not _op_in(op, ops):
                        ops.append(op)
            lists.append(tuple(ops))
        return tuple(lists)

    def excitation_list(self, s: int) -> tuple:
        excs = self.excitations if self.excitations is not None \
            else self.default_excitations()
        return excs[s]

    def excitation_matrix(self, s: int, m: int) -> np.ndarray:
        return _as_operator(self.excitation_list(s)[m])

    def basis_size(self, s: int) -> int:
        return len(self.excitation_list(s))

    def interaction_matrix(self, term: InteractionTerm, side: str) -> np.ndarray:
        return _as_operator(term.op_left if side == "left" else term.op_right)

    def total_hamiltonian(self) -> np.ndarray:
        """Dense Hamiltonian on all ``sum n_s`` qubits (exact-diagonalization aid)."""
        dims = [2**n for n in self.cluster_qubits]
        total = np.zeros((int(np.prod(dims)),) * 2, dtype=complex)
        for s, h in enumerate(self.cluster_hams):
            factors = [np.eye(d, dtype=complex) for d in dims]
            factors[s] = h
            total += tensor_product(factors)
        for term in self.interactions:
            factors = [np.eye(d, dtype=complex) for d in dims]
            factors[term.left] = self.interaction_matrix(term, "left")
            factors[term.right] = self.interaction_matrix(term, "right")
            total += term.coeff * tensor_product(factors)
        return total


def _as_operator(op) -> np.ndarray:
    return pauli_matrix(op) if isinstance(op, str) else np.asarray(op, dtype=complex)


def _op_in(op, seen) -> bool:
    for other in seen:
        if isinstance(op, str) and isinstance(other, str):
            if op == other:
                return True
        elif np.array_equal(_as_operator(op), _as_operator(other)):
            return True
    return False


# --- variational machinery ----------------------------------------------------


@dataclass(frozen=True)
class AnsatzSpec:
    """Layered real-amplitude circuit: an RY layer, then ``depth`` blocks of
    a nearest-neighbor CNOT ladder followed by another RY layer."""

    depth: int = 2

    def n_params(self, num_qubits: int) -> int:
        return (self.depth + 1) * num_qubits


@dataclass(frozen=True)
class OptimizerSpec:
    """How to minimize variational energies.

    ``method`` is ``"nelder-mead"`` (derivative-free simplex, the default),
    ``"lbfgs"`` (L-BFGS-B fed with parameter-shift gradients), or ``"exact"``
    (eigensolver shortcut, no circuit optimization).
    """

    method: str = "nelder-mead"
    restarts: int = 4
    maxiter: int = 4000

    def __post_init__(self):
        if self.method not in ("nelder-mead", "lbfgs", "exact"):
            raise ValidationError(f"unknown optimizer method {self.method!r}")


@dataclass
class VqeOutcome:
    params: np.ndarray
    energy: float
    state: np.ndarray
    converged: bool
    message: str = ""


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@lru_cache(maxsize=16)
def _entangler_ladder(num_qubits: int) -> np.ndarray:
    out = np.eye(2**num_qubits, dtype=complex)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                     [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    for q in range(num_qubits - 1):
        gate = tensor_product(
            [np.eye(2**q, dtype=complex), cnot,
             np.eye(2**(num_qubits - q - 2), dtype=complex)])
        out = gate @ out
    return out


def ansatz_state(spec: AnsatzSpec, num_qubits: int,
                 params: np.ndarray) -> np.ndarray:
    """State vector prepared by the layered rotation circuit."""
    if num_qubits == 0:
        return np.ones(1, dtype=complex)
    params = np.asarray(params, dtype=float).reshape(spec.depth + 1, num_qubits)
    ladder = _entangler_ladder(num_qubits) if num_qubits > 1 else None
    vec = ket(0, num_qubits)
    for layer in range(spec.depth + 1):
        if layer > 0 and ladder is not None:
            vec = ladder @ vec
        rot = tensor_product([_ry(t) for t in params[layer]])
        vec = rot @ vec
    return vec


def _minimize_objective(objective, gradient, n_params: int,
                        optimizer: OptimizerSpec, rng) -> tuple[np.ndarray, float, bool, str]:
    best_x, best_f = None, np.inf
    converged, message = False, ""
    agreeing = 0
    for attempt in range(max(1, optimizer.restarts)):
        x0 = rng.uniform(-np.pi, np.pi, size=n_params)
        if optimizer.method == "lbfgs":
            res = minimize(objective, x0, jac=gradient, method="L-BFGS-B",
                           options={"maxiter": optimizer.maxiter,
                                    "ftol": 1e-14, "gtol": 1e-10})
        else:
            res = minimize(objective, x0, method="Nelder-Mead",
                           options={"maxiter": optimizer.maxiter,
                                    "xatol": 1e-10, "fatol": 1e-12})
        if res.fun < best_f - 1e-9:
            best_x, best_f = res.x, float(res.fun)
            converged, message = bool(res.success), str(res.message)
            agreeing = 0
        elif res.fun <= best_f + 1e-9:
            # two independent starts landing on the same value: stop early
            agreeing += 1
            if res.fun < best_f:
                best_x, best_f = res.x, float(res.fun)
            if agreeing >= 1 and attempt >= 1:
                break
    return best_x, best_f, converged, message


def _parameter_shift_grad(objective, x: np.ndarray) -> np.ndarray:
    """Exact gradient for circuits whose parameters enter through RY gates."""
    grad = np.empty_like(x)
    for j in range(x.size):
        shift = np.zeros_like(x)
        shift[j] = np.pi / 2
        grad[j] = (objective(x + shift) - objective(x - shift)) / 2.0
    return grad


def cluster_vqe(hamiltonian: np.ndarray, ansatz: AnsatzSpec,
                optimizer: OptimizerSpec, seed) -> VqeOutcome:
    """Minimize ``<psi(theta)|H|psi(theta)>`` for one cluster.

    Optimizer failure is non-fatal: the best parameter set seen is returned
    with ``converged=False`` and the solver message attached.
    """
    hamiltonian = require_hermitian(hamiltonian, "cluster Hamiltonian")
    num_qubits = n_qubits(hamiltonian.shape[0])
    rng = np.random.default_rng(seed)
    if optimizer.method == "exact":
        eigs, vecs = np.linalg.eigh(hamiltonian)
        state = vecs[:, 0]
        return VqeOutcome(params=np.zeros(0), energy=float(eigs[0]),
                          state=state, converged=True, message="eigensolver")

    def objective(x):
        vec = ansatz_state(ansatz, num_qubits, x)
        return float(np.real(np.vdot(vec, hamiltonian @ vec)))

    def gradient(x):
        return _parameter_shift_grad(objective, x)

    x, energy, converged, message = _minimize_objective(
        objective, gradient, ansatz.n_params(num_qubits), optimizer, rng)
    return VqeOutcome(params=x, energy=energy,
                      state=ansatz_state(ansatz, num_qubits, x),
                      converged=converged, message=message)


# --- basis construction ---------------------------------------------------------


def overlap_matrix(state: np.ndarray, excitations) -> np.ndarray:
    """Gram matrix ``S[l, m] = <state| D_l^dag D_m |state>``."""
    state = np.asarray(state, dtype=complex).ravel()
    mats = [_as_operator(d) for d in excitations]
    for d in mats:
        if d.shape[0] != state.size:
            raise DimensionError("excitation operator does not match the state")
    vecs = [d @ state for d in mats]
    k = len(vecs)
    s = np.empty((k, k), dtype=complex)
    for l in range(k):
        for m in range(k):
            s[l, m] = np.vdot(vecs[l], vecs[m])
    return s


def gram_schmidt_transform(overlap: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower-triangular ``P`` with ``conj(P) S P^T = I`` on the full-rank block.

    Directions whose squared residual norm falls below the rank tolerance
    produce all-zero rows, flagged in the returned boolean ``padded`` mask.
    """
    s = require_hermitian(overlap, "overlap matrix")
    k = s.shape[0]
    p = np.zeros((k, k), dtype=complex)
    padded = np.zeros(k, dtype=bool)
    for m in range(k):
        coeff = np.zeros(k, dtype=complex)
        coeff[m] = 1.0
        for l in range(m):
            if padded[l]:
                continue
            overlap_lm = np.conj(p[l]) @ s[:, m]
            coeff -= overlap_lm * p[l]
        norm_sq = float(np.real(np.conj(coeff) @ s @ coeff))
        if norm_sq <= RANK_TOL:
            padded[m] = True
            continue
        p[m] = coeff / np.sqrt(norm_sq)
    return p, padded


@dataclass
class EffectiveHamiltonian:
    """Projected Hamiltonian on the padded qubit register plus its metric."""

    matrix: np.ndarray       # 2^kappa x 2^kappa, zero on padded rows/cols
    metric: np.ndarray       # diagonal 0/1 support of the physical basis
    kappas: tuple            # per-cluster qubit counts, ceil(log2 K_s)
    padded: tuple            # per-cluster boolean masks of length 2^kappa_s

    @property
    def total_qubits(self) -> int:
        return sum(self.kappas)


def _embed_block(block: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[:block.shape[0], :block.shape[1]] = block
    return out


def effective_hamiltonian(model: ClusterModel, ground_states,
                          transforms=None) -> EffectiveHamiltonian:
    """Project the clustered Hamiltonian into the orthonormalized bases.

    ``transforms`` may carry precomputed ``(P_s, padded_s)`` pairs; otherwise
    they are derived from the overlap matrices of ``ground_states``.
    """
    n = model.n_clusters
    if len(ground_states) != n:
        raise ValidationError("one ground state per cluster required")
    if transforms is None:
        transforms = []
        for s in range(n):
            overlap = overlap_matrix(ground_states[s], model.excitation_list(s))
            transforms.append(gram_schmidt_transform(overlap))
    kappas = tuple(ceil(log2(model.basis_size(s))) for s in range(n))
    dims = [2**kappa for kappa in kappas]

    def raw_block(s: int, operator: np.ndarray) -> np.ndarray:
        state = np.asarray(ground_states[s], dtype=complex).ravel()
        vecs = [_as_operator(d) @ state for d in model.excitation_list(s)]
        k = len(vecs)
        block = np.empty((k, k), dtype=complex)
        for l in range(k):
            for m in range(k):
                block[l, m] = np.vdot(vecs[l], operator @ vecs[m])
        return block

    def normalized_block(s: int, operator: np.ndarray) -> np.ndarray:
        p, _ = transforms[s]
        block = np.conj(p) @ raw_block(s, operator) @ p.T
        return _embed_block(block, dims[s])

    def support(s: int) -> np.ndarray:
        p, padded = transforms[s]
        diag = np.zeros(dims[s])
        diag[:padded.size] = (~padded).astype(float)
        return np.diag(diag).astype(complex)

    supports = [support(s) for s in range(n)]
    padded_masks = []
    for s in range(n):
        mask = np.ones(dims[s], dtype=bool)
        _, padded = transforms[s]
        mask[:padded.size] = padded
        padded_masks.append(tuple(bool(b) for b in mask))

    total = np.zeros((int(np.prod(dims)),) * 2, dtype=complex)
    for s in range(n):
        factors = list(supports)
        factors[s] = normalized_block(s, model.cluster_hams[s])
        total += tensor_product(factors)
    for term in model.interactions:
        factors = list(supports)
        factors[term.left] = normalized_block(
            term.left, model.interaction_matrix(term, "left"))
        factors[term.right] = normalized_block(
            term.right, model.interaction_matrix(term, "right"))
        total += term.coeff * tensor_product(factors)
    metric = tensor_product(supports)
    require_hermitian(total, "effective Hamiltonian")
    return EffectiveHamiltonian(matrix=total, metric=metric, kappas=kappas,
                                padded=tuple(padded_masks))


# --- full pipeline ---------------------------------------------------------------


@dataclass
class DeepVqeResult:
    cluster_outcomes: list
    overlap_matrices: list
    transforms: list
    effective: EffectiveHamiltonian
    energy: float
    top_params: np.ndarray
    top_state: np.ndarray


def top_layer_vqe(effective: EffectiveHamiltonian, ansatz: AnsatzSpec,
                  optimizer: OptimizerSpec, seed) -> tuple[np.ndarray, float, np.ndarray]:
    """Minimize the metric-weighted quotient ``<phi|H|phi> / <phi|S|phi>``.

    The metric restricts the search to the physical (non-padded) support, so
    every value is a Rayleigh quotient of the original Hamiltonian on a
    subspace.
    """
    h = effective.matrix
    metric = effective.metric
    num_qubits = effective.total_qubits
    rng = np.random.default_rng(seed)
    if num_qubits == 0:
        state = np.ones(1, dtype=complex)
        return np.zeros(0), float(np.real(h[0, 0] / metric[0, 0])), state
    if optimizer.method == "exact":
        support = np.where(np.real(np.diag(metric)) > 0.5)[0]
        restricted = h[np.ix_(support, support)]
        eigs, vecs = np.linalg.eigh(restricted)
        state = np.zeros(h.shape[0], dtype=complex)
        state[support] = vecs[:, 0]
        return np.zeros(0), float(eigs[0]), state

    def quotient(x):
        vec = ansatz_state(ansatz, num_qubits, x)
        den = float(np.real(np.vdot(vec, metric @ vec)))
        if den < 1e-12:
            return 1e6
        return float(np.real(np.vdot(vec, h @ vec))) / den

    def gradient(x):
        return _parameter_shift_grad(quotient, x)

    x, energy, _, _ = _minimize_objective(
        quotient, gradient, ansatz.n_params(num_qubits), optimizer, rng)
    return x, energy, ansatz_state(ansatz, num_qubits, x)


def deep_vqe(model: ClusterModel, ansatz: AnsatzSpec | None = None,
             optimizer: OptimizerSpec | None = None, seed=0) -> DeepVqeResult:
    """Run the four-step pipeline and return all intermediate artifacts."""
    ansatz = ansatz or AnsatzSpec()
    optimizer = optimizer or OptimizerSpec()
    outcomes = [cluster_vqe(model.cluster_hams[s], ansatz, optimizer, seed + s)
                for s in range(model.n_clusters)]
    overlaps = [overlap_matrix(outcomes[s].state, model.excitation_list(s))
                for s in range(model.n_clusters)]
    transforms = [gram_schmidt_transform(s_mat) for s_mat in overlaps]
    effective = effective_hamiltonian(
        model, [o.state for o in outcomes], transforms)
    top_params, energy, top_state = top_layer_vqe(
        effective, ansatz, optimizer, seed + model.n_clusters)
    return DeepVqeResult(cluster_outcomes=outcomes, overlap_matrices=overlaps,
                         transforms=transforms, effective=effective,
                         energy=energy, top_params=top_params,
                         top_state=top_state)


def deep_vqe_energy(model: ClusterModel, ansatz: AnsatzSpec | None = None,
                    optimizer: OptimizerSpec | None = None, seed=0) -> float:
    """Top-layer energy of the full pipeline (a variational upper bound)."""
    return deep_vqe(model, ansatz, optimizer, seed).energy


# --- noisy effective states -------------------------------------------------------


def _pauli_excitation_labels(model: ClusterModel, s: int) -> tuple:
    labels = []
    for d in model.excitation_list(s):
        if not isinstance(d, str):
            raise UnsupportedConstructionError(
                "this variant needs Pauli-string excitation operators")
        labels.append(d)
    return tuple(labels)


def _excitation_nodes(model: ClusterModel, ground_states, noise,
                      kappas) -> list[QuantumTensor]:
    nodes = []
    for s in range(model.n_clusters):
        labels = list(_pauli_excitation_labels(model, s))
        labels += [None] * (2**kappas[s] - len(labels))
        nodes.append(QuantumTensor(
            PauliFamilyPrep(np.asarray(ground_states[s], dtype=complex),
                            tuple(labels)),
            tau=kappas[s], k_width=model.cluster_qubits[s],
            noise=noise[s] if noise is not None else NO_NOISE))
    return nodes


def dv2_effective_state(model: ClusterModel, ground_states, top_state,
                        noise: list[NoiseSpec] | None = None) -> np.ndarray:
    """Noise-robust effective state built from Pauli excitation layers only.

    ``top_state`` lives on ``sum_s ceil(log2 K_s)`` qubits. The returned
    operator is normalized and stays a density operator under arbitrary CPTP
    cluster noise.

    Raises:
        UnsupportedConstructionError: if an excitation is not a Pauli string.
    """
    kappas = [ceil(log2(model.basis_size(s))) for s in range(model.n_clusters)]
    nodes = _excitation_nodes(model, ground_states, noise, kappas)
    top = np.asarray(top_state, dtype=complex).ravel()
    rho = projector(top / np.linalg.norm(top))
    rho = apply_expansion_layer(rho, [noisy_expansion_map(n) for n in nodes])
    return rho / np.trace(rho)


def dv_effective_state(model: ClusterModel, ground_states, top_state,
                       noise: list[NoiseSpec] | None = None,
                       transforms=None) -> np.ndarray:
    """Effective state of the plain pipeline, orthonormalization layer included.

    The classical transformation layer normalizes the state only when it
    matches the overlaps of the *actual* (noisy) preparations; by default
    the ideal transforms are used, so under preparation noise the trace
    drifts away from one. Callers inspect ``np.trace`` on the result; no
    normalization is applied and positivity still holds. Pass transforms
    recalibrated on the noisy overlap blocks to restore unit trace.
    """
    kappas = [ceil(log2(model.basis_size(s))) for s in range(model.n_clusters)]
    nodes = _excitation_nodes(model, ground_states, noise, kappas)
    if transforms is None:
        transforms = []
        for s in range(model.n_clusters):
            overlap = overlap_matrix(ground_states[s], model.excitation_list(s))
            transforms.append(gram_schmidt_transform(overlap))
    top = np.asarray(top_state, dtype=complex).ravel()
    rho = projector(top / np.linalg.norm(top))
    transform_maps = []
    from .tensors import ClassicalTable
    for s, (p, _) in enumerate(transforms):
        table = _embed_block(p.T, 2**kappas[s])
        transform_maps.append(noisy_expansion_map(QuantumTensor(
            ClassicalTable(table), tau=kappas[s], k_width=kappas[s])))
    rho = apply_expansion_layer(rho, transform_maps)
    rho = apply_expansion_layer(rho, [noisy_expansion_map(n) for n in nodes])
    return rho
