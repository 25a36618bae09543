"""Noise accumulation in deep trees of identical tensors, and its rescaling.

An L-layer tree of rank-N index-as-initial-state tensors, each followed by
global depolarizing noise at rate ``eps``, damps a traceless observable by
one factor of ``1 - eps`` per contracted tensor. With ``N_tot = 1 + N + ...
+ N^(L-1) = (1 - N^L)/(1 - N)`` tensors (root included), the noisy-to-ideal
ratio is predicted by

    r(eps) = (1 - eps)^((1 - N^L)/(1 - N)),

which is near-exact in the small-rotation-angle regime where intermediate
blocks stay almost traceless. Dividing a measured value by the prediction
undoes the damping at the price of a ``r^-2`` sampling-variance factor.

Because every tensor in a layer is the same, one 2x2 contracted block per
layer suffices: the next layer's observable is its N-fold Kronecker power.
Only N-qubit vectors and one 2^N x 2^N observable are ever materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnderflowError, ValidationError
from .linalg import kron_power, pauli_matrix, tensor_product


@dataclass(frozen=True)
class DecayConfig:
    """Grid description for the layered-damping experiment."""

    n_branch: int
    layers: int
    depth: int = 2
    angle_range: float = np.pi / 1000.0
    epsilons: tuple = (0.0,)
    seed: int = 0
    max_register_qubits: int = 13

    def __post_init__(self):
        if self.n_branch < 2:
            raise ValidationError("branching factor must be at least 2")
        if self.layers < 2:
            raise ValidationError("at least two layers required")
        if self.depth < 1:
            raise ValidationError("ansatz depth must be at least 1")
        if self.angle_range <= 0:
            raise ValidationError("angle range must be positive")
        for eps in self.epsilons:
            if not 0.0 <= eps <= 1.0:
                raise ValueError(f"error rate {eps} outside [0, 1]")
        if self.n_branch > self.max_register_qubits:
            raise ValidationError(
                f"2^{self.n_branch} observable exceeds the configured memory "
                f"budget (max {self.max_register_qubits} qubits)")


@dataclass(frozen=True)
class DecayResult:
    """One grid point of the experiment.

    Deep grids drive the damping below double-precision range (for example
    ``0.99^111111``), so the ratio and its prediction are also carried as
    logarithms: ``ratio = sign * exp(log_ratio)`` whenever representable,
    and comparisons against the prediction stay meaningful through
    ``log_ratio - log_predicted`` even when both underflow.
    """

    n_branch: int
    layers: int
    depth: int
    epsilon: float
    seed: int
    noisy: float
    noiseless: float
    ratio: float
    predicted_ratio: float
    qem_value: float
    variance_multiplier: float
    log_ratio: float = 0.0
    log_predicted: float = 0.0

    CSV_COLUMNS = ("N", "L", "d", "epsilon", "seed", "noisy", "noiseless",
                   "ratio", "predicted_ratio", "qem_value",
                   "variance_multiplier")

    def csv_row(self) -> tuple:
        return (self.n_branch, self.layers, self.depth, self.epsilon,
                self.seed, self.noisy, self.noiseless, self.ratio,
                self.predicted_ratio, self.qem_value,
                self.variance_multiplier)


def build_hea(n_qubits: int, depth: int, angle_range: float, seed) -> np.ndarray:
    """Layered rotation/entangler circuit with small random angles.

    Each of the ``depth`` blocks applies one RY rotation per qubit (angles
    uniform in ``[-angle_range, angle_range]``) followed by a fixed
    nearest-neighbor CZ ladder. Deterministic per seed.
    """
    if n_qubits < 1:
        raise ValidationError("need at least one qubit")
    rng = np.random.default_rng(seed)
    dim = 2**n_qubits
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    ladder = np.eye(dim, dtype=complex)
    for q in range(n_qubits - 1):
        ladder = tensor_product(
            [np.eye(2**q, dtype=complex), cz,
             np.eye(2**(n_qubits - q - 2), dtype=complex)]) @ ladder
    unitary = np.eye(dim, dtype=complex)
    for _ in range(depth):
        angles = rng.uniform(-angle_range, angle_range, size=n_qubits)
        rots = [np.array([[np.cos(t / 2), -np.sin(t / 2)],
                          [np.sin(t / 2), np.cos(t / 2)]], dtype=complex)
                for t in angles]
        unitary = ladder @ tensor_product(rots) @ unitary
    return unitary


def predicted_ratio(n_branch: int, layers: int, epsilon: float) -> float:
    """Closed-form damping ``(1 - eps)^((1 - N^L)/(1 - N))``."""
    exponent = (n_branch**layers - 1) // (n_branch - 1)
    return float((1.0 - epsilon)**exponent)


def qem_rescale(noisy_value: float, predicted: float) -> tuple[float, float]:
    """Divide out the predicted damping; report the sampling-cost factor.

    Returns ``(noisy_value / predicted, predicted**-2)``; the second entry is
    how many times more samples the rescaled estimator needs for the same
    statistical accuracy.

    Raises:
        UnderflowError: if the predicted ratio is too small to divide by.
    """
    if predicted <= 1e-300:
        raise UnderflowError(f"predicted ratio {predicted} underflows")
    return noisy_value / predicted, predicted**-2


def _layer_unitaries(cfg: DecayConfig) -> list[np.ndarray]:
    return [build_hea(cfg.n_branch, cfg.depth, cfg.angle_range,
                      np.random.SeedSequence((cfg.seed, layer)))
            for layer in range(cfg.layers)]


def _block_value(unitary: np.ndarray, observable: np.ndarray,
                 epsilon: float) -> np.ndarray:
    """Contracted 2x2 block of one tensor under trailing depolarizing noise.

    Index register is the first qubit; expectation values for the four input
    states |0>, |1>, |+>, |+i> assemble the block. The depolarizing tail
    contributes ``eps * Tr[O] / 2^n`` exactly (kept even when tiny, so small
    instances match brute force to machine precision).
    """
    dim = unitary.shape[0]
    half = dim // 2
    mix = float(np.real(np.trace(observable))) / dim

    def e_value(vec: np.ndarray) -> complex:
        pure = np.vdot(vec, observable @ vec)
        return (1.0 - epsilon) * pure + epsilon * mix

    col0 = unitary[:, 0]
    col1 = unitary[:, half]
    e0 = e_value(col0)
    e1 = e_value(col1)
    e_plus = e_value((col0 + col1) / np.sqrt(2))
    e_plus_i = e_value((col0 + 1j * col1) / np.sqrt(2))
    m01 = e_plus - 1j * e_plus_i + (1j - 1.0) / 2.0 * (e0 + e1)
    return np.array([[e0.real, m01], [np.conj(m01), e1.real]], dtype=complex)


def _classical_block(unitary: np.ndarray, observable: np.ndarray) -> np.ndarray:
    dim = unitary.shape[0]
    a = unitary[:, [0, dim // 2]]
    return a.conj().T @ observable @ a


def _tree_value(cfg: DecayConfig, unitaries: list[np.ndarray], epsilon: float,
                classical_layers: frozenset) -> tuple[float, float]:
    """Bottom-up value using one block per layer (identical tensors).

    Blocks are renormalized each layer and the scale is tracked in log
    space, so values far below double-precision range keep full relative
    accuracy. Returns ``(sign, log|value|)``.
    """
    observable = kron_power(pauli_matrix("Z"), cfg.n_branch)
    log_scale = 0.0
    for layer in range(cfg.layers - 1, 0, -1):
        if (layer + 1) in classical_layers:
            block = _classical_block(unitaries[layer], observable)
        else:
            block = _block_value(unitaries[layer], observable, epsilon)
        norm = float(np.max(np.abs(block)))
        if norm == 0.0:
            return 0.0, -np.inf
        block = block / norm
        log_scale = cfg.n_branch * (log_scale + np.log(norm))
        observable = kron_power(block, cfg.n_branch)
    root_vec = unitaries[0][:, 0]
    value = float(np.real(np.vdot(root_vec, observable @ root_vec)))
    if 1 not in classical_layers:
        mix = float(np.real(np.trace(observable))) / observable.shape[0]
        value = (1.0 - epsilon) * value + epsilon * mix
    if value == 0.0:
        return 0.0, -np.inf
    return float(np.sign(value)), log_scale + np.log(abs(value))


def _safe_exp(log_value: float) -> float:
    """exp that silently saturates to 0.0 / inf outside double range."""
    with np.errstate(over="ignore", under="ignore"):
        return float(np.exp(log_value))


def _run(cfg: DecayConfig, classical_layers: frozenset) -> list[DecayResult]:
    for layer in classical_layers:
        if not 1 <= layer <= cfg.layers:
            raise ValidationError(f"classical layer index {layer} out of range")
    unitaries = _layer_unitaries(cfg)
    clean_sign, clean_log = _tree_value(cfg, unitaries, 0.0, classical_layers)
    noiseless = clean_sign * _safe_exp(clean_log)
    quantum_count = sum(cfg.n_branch**(layer - 1)
                        for layer in range(1, cfg.layers + 1)
                        if layer not in classical_layers)
    rows = []
    for eps in cfg.epsilons:
        sign, log_abs = _tree_value(cfg, unitaries, eps, classical_layers)
        noisy = sign * _safe_exp(log_abs)
        log_predicted = quantum_count * np.log1p(-eps) if eps < 1.0 else -np.inf
        log_ratio = log_abs - clean_log
        ratio = sign * clean_sign * _safe_exp(log_ratio)
        qem_value = sign * _safe_exp(log_abs - log_predicted)
        var_mult = _safe_exp(-2.0 * log_predicted)
        rows.append(DecayResult(
            n_branch=cfg.n_branch, layers=cfg.layers, depth=cfg.depth,
            epsilon=float(eps), seed=cfg.seed, noisy=noisy,
            noiseless=noiseless, ratio=ratio,
            predicted_ratio=_safe_exp(log_predicted),
            qem_value=qem_value, variance_multiplier=var_mult,
            log_ratio=log_ratio, log_predicted=log_predicted))
    return rows


def layered_ratio(cfg: DecayConfig) -> list[DecayResult]:
    """Measured and predicted damping ratios over the error-rate grid.

    All tensors carry depolarizing noise at the grid rate; the root
    preparation is included in the tensor count.
    """
    return _run(cfg, frozenset())


def mixed_layer_ratio(cfg: DecayConfig, classical_layers) -> list[DecayResult]:
    """Same experiment with some layers computed classically (noise-free).

    ``classical_layers`` holds 1-based layer indices (1 = root, ``layers`` =
    leaves). The predicted ratio counts only the remaining quantum tensors:
    making the leaf layer classical, for example, shrinks the exponent from
    ``(1 - N^L)/(1 - N)`` to ``(1 - N^(L-1))/(1 - N)``.
    """
    return _run(cfg, frozenset(int(x) for x in classical_layers))
