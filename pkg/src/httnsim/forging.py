"""Entanglement forging: evaluate 2N-qubit expectations from N-qubit pieces.

A bipartite state is factored as ``(V1 (x) V2) sum_x lam_x |b_x>|b_x>`` by a
singular value decomposition of its amplitude matrix. Product observables
``O1 (x) O2`` are then evaluated from subsystem quantities only: diagonal
terms weight ``lam_x^2`` and cross terms combine the four superposition
states ``|phi^p> = (|b_x> + i^p |b_y>)/sqrt(2)`` with signs ``(-1)^p``.
A weighted sampling estimator draws those preparations in proportion to
their coefficients; its cost scales with the fourth power of the Schmidt
coefficients' 1-norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import NO_NOISE, NoiseSpec, unitary_channel
from .contraction import contract_type1
from .errors import DimensionError, ValidationError
from .linalg import ATOL_STRUCTURAL, dagger, n_qubits, require_hermitian
from .tensors import InitialStatePrep, QuantumTensor


@dataclass(frozen=True)
class ForgedAnsatz:
    """Schmidt form of a bipartite 2N-qubit state, possibly truncated.

    ``lambdas`` holds the full descending, nonnegative coefficient list
    (summing to one in squares); ``k`` marks how many leading terms the
    ansatz retains. Retained bitstrings are the computational basis states
    ``|x>`` for ``x < k``.
    """

    n_half: int
    lambdas: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    k: int

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        if not (1 <= self.k <= 2**self.n_half):
            raise ValueError(f"truncation k={self.k} outside [1, 2^N]")
        if np.any(lam < -1e-12) or np.any(np.diff(lam) > 1e-12):
            raise ValidationError("coefficients must be nonnegative, descending")
        if abs(np.sum(lam**2) - 1.0) > ATOL_STRUCTURAL:
            raise ValidationError("squared coefficients must sum to one")

    @property
    def coeffs(self) -> np.ndarray:
        return self.lambdas[:self.k]

    @property
    def lambda_l1(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))


def schmidt_decompose(psi: np.ndarray, k: int | None = None) -> ForgedAnsatz:
    """Factor a normalized 2N-qubit state via SVD of its amplitude matrix.

    Ties in the singular values keep the SVD's basis-index order; phases are
    absorbed into the factor unitaries so coefficients are real nonnegative.

    Raises:
        ValueError: if ``k < 1``.
        DimensionError: if the state does not split into two equal halves.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    total = n_qubits(psi.size)
    if total % 2 != 0:
        raise DimensionError(f"need an even qubit count, got {total}")
    n_half = total // 2
    if abs(np.linalg.norm(psi) - 1.0) > ATOL_STRUCTURAL:
        raise ValidationError("input state must be normalized")
    dim = 2**n_half
    if k is None:
        k = dim
    if k < 1:
        raise ValueError(f"truncation k={k} must be positive")
    amp = psi.reshape(dim, dim)
    u, singulars, vh = np.linalg.svd(amp)
    # psi = sum_x s_x (U e_x) (x) (vh^T e_x), so the second unitary is vh^T
    return ForgedAnsatz(n_half=n_half, lambdas=singulars, v1=u, v2=vh.T,
                        k=min(k, dim))


def reconstruct(ansatz: ForgedAnsatz) -> np.ndarray:
    """Rebuild the (possibly truncated) state vector from the Schmidt form."""
    dim = 2**ansatz.n_half
    out = np.zeros(dim * dim, dtype=complex)
    for x in range(ansatz.k):
        out += ansatz.lambdas[x] * np.kron(ansatz.v1[:, x], ansatz.v2[:, x])
    return out


def forged_expectation(ansatz: ForgedAnsatz, o1: np.ndarray,
                       o2: np.ndarray) -> float:
    """Expectation of ``O1 (x) O2`` from subsystem quantities only.

    Evaluates the diagonal coefficient-squared terms plus the four-phase
    superposition cross terms; with the full coefficient list this equals
    the direct 2N-qubit expectation.
    """
    o1 = require_hermitian(o1, "first-half observable")
    o2 = require_hermitian(o2, "second-half observable")
    dim = 2**ansatz.n_half
    if o1.shape[0] != dim or o2.shape[0] != dim:
        raise DimensionError("observables must act on one half each")
    oh1 = dagger(ansatz.v1) @ o1 @ ansatz.v1
    oh2 = dagger(ansatz.v2) @ o2 @ ansatz.v2
    lam = ansatz.coeffs
    total = 0.0
    for x in range(ansatz.k):
        total += lam[x]**2 * np.real(oh1[x, x] * oh2[x, x])
    for x in range(ansatz.k):
        for y in range(x):
            cross = 0.0
            for p in range(4):
                phi = np.zeros(dim, dtype=complex)
                phi[x] = 1.0
                phi[y] = 1j**p
                phi /= np.sqrt(2)
                cross += (-1)**p * np.real(np.vdot(phi, oh1 @ phi)
                                           * np.vdot(phi, oh2 @ phi))
            total += lam[x] * lam[y] * cross
    return float(total)


def forged_htn_expectation(ansatz: ForgedAnsatz, o1: np.ndarray,
                           o2: np.ndarray) -> float:
    """Same expectation through the tree-contraction route.

    Contracts each half as an index-as-initial-state tensor (``K = tau = N``)
    and sums ``lam_i lam_i' M1[i, i'] M2[i, i']`` over retained indices.
    """
    blocks = []
    for v, obs in ((ansatz.v1, o1), (ansatz.v2, o2)):
        blocks.append(contract_type1(unitary_channel(v),
                                     require_hermitian(obs, "observable"),
                                     tau=ansatz.n_half).m)
    lam = ansatz.coeffs
    total = 0.0 + 0j
    for i in range(ansatz.k):
        for j in range(ansatz.k):
            total += lam[i] * lam[j] * blocks[0][i, j] * blocks[1][i, j]
    return float(np.real(total))


def optimal_coefficients(m1: np.ndarray, m2: np.ndarray) -> tuple[float, np.ndarray]:
    """Best coefficient vector for fixed subsystem blocks.

    Minimizes the forged energy over the coefficients by diagonalizing the
    entrywise product ``M1 * M2`` (the overlap metric is the identity for
    initial-state preparations), returning the smallest eigenvalue and its
    eigenvector.
    """
    gram = np.asarray(m1) * np.asarray(m2)
    gram = require_hermitian(gram, "contracted coefficient matrix")
    eigs, vecs = np.linalg.eigh(gram)
    return float(eigs[0]), vecs[:, 0]


# --- weighted sampling ---------------------------------------------------------


@dataclass(frozen=True)
class SamplerPlan:
    """Signed preparation list for the weighted sampling estimator."""

    weights: np.ndarray       # signed coefficients mu_a (zero terms dropped)
    states_1: tuple           # per-term state vector on the first half
    states_2: tuple
    scale: float              # l1 norm of the weights
    lambda_l1: float          # truncated Schmidt 1-norm (overhead indicator)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.weights) / self.scale


def build_sampler_plan(ansatz: ForgedAnsatz, o1: np.ndarray,
                       o2: np.ndarray) -> SamplerPlan:
    """Enumerate the signed preparations behind :func:`forged_expectation`."""
    dim = 2**ansatz.n_half
    lam = ansatz.coeffs
    weights = []
    states_1 = []
    states_2 = []

    def push(weight, local):
        if abs(weight) == 0.0:
            return
        weights.append(weight)
        states_1.append(ansatz.v1 @ local)
        states_2.append(ansatz.v2 @ local)

    for x in range(ansatz.k):
        basis = np.zeros(dim, dtype=complex)
        basis[x] = 1.0
        push(float(lam[x]**2), basis)
    for x in range(ansatz.k):
        for y in range(x):
            for p in range(4):
                phi = np.zeros(dim, dtype=complex)
                phi[x] = 1.0
                phi[y] = 1j**p
                phi /= np.sqrt(2)
                push(float((-1)**p * lam[x] * lam[y]), phi)
    weights = np.asarray(weights, dtype=float)
    scale = float(np.sum(np.abs(weights)))
    if scale == 0.0:
        raise ValidationError("the sampling plan is empty (all-zero coefficients)")
    return SamplerPlan(weights=weights, states_1=tuple(states_1),
                       states_2=tuple(states_2), scale=scale,
                       lambda_l1=ansatz.lambda_l1)


@dataclass(frozen=True)
class SamplerResult:
    estimate: float
    stderr: float
    shots: int
    scale: float
    lambda_l1: float


def forged_sampler(plan: SamplerPlan, o1: np.ndarray, o2: np.ndarray,
                   shots: int, seed) -> SamplerResult:
    """Shot-sampled estimate of the forged expectation.

    Each shot draws one preparation with probability proportional to its
    coefficient magnitude, samples one eigenvalue of each half observable in
    the prepared states, and accumulates the signed product; the mean times
    the coefficient 1-norm estimates the expectation, with the empirical
    standard error reported alongside.

    Raises:
        ValueError: for a non-positive shot count.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    o1 = require_hermitian(o1, "first-half observable")
    o2 = require_hermitian(o2, "second-half observable")
    rng = np.random.default_rng(seed)
    eig1, basis1 = np.linalg.eigh(o1)
    eig2, basis2 = np.linalg.eigh(o2)
    n_terms = plan.weights.size
    signs = np.sign(plan.weights)
    draws = rng.choice(n_terms, size=shots, p=plan.probabilities)
    values = np.empty(shots, dtype=float)
    for a in range(n_terms):
        mask = draws == a
        count = int(mask.sum())
        if count == 0:
            continue
        prob1 = np.abs(dagger(basis1) @ plan.states_1[a])**2
        prob2 = np.abs(dagger(basis2) @ plan.states_2[a])**2
        prob1 = prob1 / prob1.sum()
        prob2 = prob2 / prob2.sum()
        out1 = rng.choice(eig1, size=count, p=prob1)
        out2 = rng.choice(eig2, size=count, p=prob2)
        values[mask] = signs[a] * out1 * out2
    estimate = plan.scale * float(values.mean())
    spread = float(values.std(ddof=1)) if shots > 1 else 0.0
    stderr = plan.scale * spread / np.sqrt(shots)
    return SamplerResult(estimate=estimate, stderr=stderr, shots=shots,
                         scale=plan.scale, lambda_l1=plan.lambda_l1)


# --- noisy forged states ----------------------------------------------------------


def forged_effective_state(ansatz: ForgedAnsatz, noise_1: NoiseSpec = NO_NOISE,
                           noise_2: NoiseSpec = NO_NOISE) -> np.ndarray:
    """Effective 2N-qubit state when both halves run through noisy channels.

    The parent holds the coefficients on a doubled index register,
    ``sum_x lam_x |x>|x>``, and each half expands its own copy through an
    index-as-initial-state tensor with ``K = tau = N``; the result is always
    a density operator.
    """
    from .tree import HttnTree, TreeRoot, effective_noisy_state

    dim = 2**ansatz.n_half
    lam_vec = np.zeros(dim, dtype=float)
    lam_vec[:ansatz.k] = ansatz.coeffs
    lam_vec = lam_vec / np.linalg.norm(lam_vec)
    parent = np.zeros(dim * dim, dtype=complex)
    for x in range(dim):
        parent[x * dim + x] = lam_vec[x]
    nodes = [
        QuantumTensor(InitialStatePrep(ansatz.v1), tau=ansatz.n_half,
                      k_width=ansatz.n_half, noise=noise_1),
        QuantumTensor(InitialStatePrep(ansatz.v2), tau=ansatz.n_half,
                      k_width=ansatz.n_half, noise=noise_2),
    ]
    tree = HttnTree(root=TreeRoot(state=parent), layers=[nodes])
    return effective_noisy_state(tree)
