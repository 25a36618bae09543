"""Quantum and classical tensor definitions and their expansion operators.

A tensor is a family of K-qubit states ``|psi^i>`` labeled by a tau-bit
classical index ``i``. Five preparation kinds are supported:

* ``InitialStatePrep`` (type 1): ``|psi^i> = U (|i> (x) |0...0>)``.
* ``ProjectedStatePrep`` (type 2): ``|psi^i> = <i|psi>`` for a (K+tau)-qubit
  carrier state; columns stay unnormalized, the overlap block S carries the
  normalization.
* ``PauliFamilyPrep`` (type 3): ``|psi^i> = P^i |psi>`` for Pauli strings
  ``P^i``; a ``None`` label stands for a padded all-zero column.
* ``GateFamilyPrep`` (type 4): ``|psi^i> = U^i |0...0>``.
* ``ClassicalTable``: dense amplitude columns computed classically
  (possibly unnormalized or zero-padded).

The expansion operator of a tensor is the ``2^K x 2^tau`` matrix
``A = sum_i |psi^i><i|`` that grows a tau-qubit parent register into the
K-qubit child register. Under noise the expansion becomes a completely
positive *map* on operators rather than a matrix; :func:`noisy_expansion_map`
returns that map (with a rectangular Kraus representation) for kinds 1-3 and
classical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .channels import ChainedChannel, NoiseSpec, NO_NOISE, unitary_channel
from .errors import DimensionError, UnsupportedConstructionError, ValidationError
from .linalg import (
    ATOL_STRUCTURAL,
    dagger,
    is_unitary,
    ket,
    n_qubits,
    pauli_matrix,
    projector,
)


@dataclass(frozen=True)
class InitialStatePrep:
    """Classical index loaded as the initial state of the first tau qubits."""

    unitary: np.ndarray

    kind = "1"


@dataclass(frozen=True)
class ProjectedStatePrep:
    """Classical index realized by projecting the first tau qubits of a carrier state."""

    state: np.ndarray

    kind = "2"


@dataclass(frozen=True)
class PauliFamilyPrep:
    """Classical index selecting a Pauli string applied to a base state."""

    state: np.ndarray
    labels: tuple  # 2^tau entries; each a length-K Pauli string or None (padded)

    kind = "3"


@dataclass(frozen=True)
class GateFamilyPrep:
    """Classical index selecting which unitary prepares the state from |0...0>."""

    unitaries: tuple  # 2^tau unitaries on K qubits

    kind = "4"


@dataclass(frozen=True)
class ClassicalTable:
    """Dense amplitude columns (2^K x 2^tau), computed classically."""

    table: np.ndarray

    kind = "c"


Prep = Union[InitialStatePrep, ProjectedStatePrep, PauliFamilyPrep,
             GateFamilyPrep, ClassicalTable]


@dataclass(frozen=True)
class QuantumTensor:
    """A tree node: preparation data, index width tau, quantum width K, noise."""

    prep: Prep
    tau: int
    k_width: int
    noise: Union[NoiseSpec, object] = NO_NOISE
    name: str = ""

    def __post_init__(self):
        validate_tensor(self)

    @property
    def kind(self) -> str:
        return self.prep.kind

    @property
    def index_count(self) -> int:
        return 2**self.tau

    @property
    def out_dim(self) -> int:
        return 2**self.k_width


def validate_tensor(t: QuantumTensor) -> None:
    """Check the structural invariants of a tensor's preparation data.

    Raises:
        ValidationError: on any violated invariant.
    """
    if t.tau < 0 or t.k_width < 1:
        raise ValidationError(f"invalid widths tau={t.tau}, K={t.k_width}")
    n_idx, dim = t.index_count, t.out_dim
    prep = t.prep
    if isinstance(prep, InitialStatePrep):
        if t.tau > t.k_width:
            raise ValidationError("initial-state prep needs tau <= K")
        u = np.asarray(prep.unitary, dtype=complex)
        if u.shape != (dim, dim):
            raise ValidationError(f"unitary must be {dim}x{dim}, got {u.shape}")
        if not is_unitary(u):
            raise ValidationError("initial-state prep matrix is not unitary")
    elif isinstance(prep, ProjectedStatePrep):
        state = np.asarray(prep.state, dtype=complex).ravel()
        if state.size != 2**(t.k_width + t.tau):
            raise ValidationError(
                f"carrier state must live on K+tau={t.k_width + t.tau} qubits")
        if abs(np.linalg.norm(state) - 1.0) > ATOL_STRUCTURAL:
            raise ValidationError("carrier state is not normalized")
    elif isinstance(prep, PauliFamilyPrep):
        state = np.asarray(prep.state, dtype=complex).ravel()
        if state.size != dim:
            raise ValidationError(f"base state must live on K={t.k_width} qubits")
        if len(prep.labels) != n_idx:
            raise ValidationError(f"need {n_idx} Pauli labels, got {len(prep.labels)}")
        for lab in prep.labels:
            if lab is not None and len(lab) != t.k_width:
                raise ValidationError(f"Pauli string {lab!r} has wrong length")
    elif isinstance(prep, GateFamilyPrep):
        if len(prep.unitaries) != n_idx:
            raise ValidationError(f"need {n_idx} unitaries, got {len(prep.unitaries)}")
        for u in prep.unitaries:
            u = np.asarray(u, dtype=complex)
            if u.shape != (dim, dim) or not is_unitary(u):
                raise ValidationError("gate-family entries must be K-qubit unitaries")
    elif isinstance(prep, ClassicalTable):
        table = np.asarray(prep.table, dtype=complex)
        if table.shape != (dim, n_idx):
            raise ValidationError(
                f"classical table must be {dim}x{n_idx}, got {table.shape}")
    else:
        raise ValidationError(f"unknown preparation payload {type(prep).__name__}")


@dataclass(frozen=True)
class ExpansionOperator:
    """The matrix ``A = sum_i |psi^i><i|`` with its source tensor name."""

    matrix: np.ndarray
    source: str = ""


def build_expansion_operator(t: QuantumTensor) -> ExpansionOperator:
    """Column ``i`` is the state ``|psi^i>`` of the source tensor.

    Projected-state columns are kept unnormalized; padded Pauli labels and
    zero classical columns produce literal zero columns.
    """
    n_idx, dim = t.index_count, t.out_dim
    prep = t.prep
    a = np.zeros((dim, n_idx), dtype=complex)
    if isinstance(prep, InitialStatePrep):
        u = np.asarray(prep.unitary, dtype=complex)
        pad = t.k_width - t.tau
        for i in range(n_idx):
            a[:, i] = u @ ket(i << pad, t.k_width)
    elif isinstance(prep, ProjectedStatePrep):
        blocks = np.asarray(prep.state, dtype=complex).reshape(n_idx, dim)
        a = blocks.T.copy()
    elif isinstance(prep, PauliFamilyPrep):
        state = np.asarray(prep.state, dtype=complex).ravel()
        for i, lab in enumerate(prep.labels):
            if lab is not None:
                a[:, i] = pauli_matrix(lab) @ state
    elif isinstance(prep, GateFamilyPrep):
        for i, u in enumerate(prep.unitaries):
            a[:, i] = np.asarray(u, dtype=complex) @ ket(0, t.k_width)
    elif isinstance(prep, ClassicalTable):
        a = np.asarray(prep.table, dtype=complex).copy()
    return ExpansionOperator(matrix=a, source=t.name)


def preparation_channel(t: QuantumTensor):
    """The noisy preparation channel W of a tensor, or None when irrelevant.

    For initial-state tensors W acts on the K-qubit register and replaces the
    ideal unitary channel; for projected-state and Pauli-family tensors only
    the carrier state ``sigma = W(|0><0|)`` matters, see
    :func:`prepared_state`. Classical and gate-family tensors have no single
    preparation channel.
    """
    if isinstance(t.prep, InitialStatePrep):
        base = unitary_channel(t.prep.unitary)
        noise = t.noise.channel(t.k_width) if isinstance(t.noise, NoiseSpec) else None
        return base if noise is None else ChainedChannel(noise, base)
    return None


def prepared_state(t: QuantumTensor) -> np.ndarray:
    """Noisy carrier state sigma for projected-state / Pauli-family tensors."""
    if isinstance(t.prep, ProjectedStatePrep):
        sigma = projector(t.prep.state)
        width = t.k_width + t.tau
    elif isinstance(t.prep, PauliFamilyPrep):
        sigma = projector(t.prep.state)
        width = t.k_width
    else:
        raise UnsupportedConstructionError(
            "prepared_state applies to projected-state and Pauli-family tensors")
    noise = t.noise.channel(width) if isinstance(t.noise, NoiseSpec) else None
    return sigma if noise is None else noise.apply(sigma)


class ExpansionMap:
    """A noisy expansion map: operators on 2^tau dims -> operators on 2^K dims.

    The map is completely positive and admits a rectangular Kraus
    representation ``X -> sum_j B_j X B_j^dag`` (kinds 1-3 and classical).
    ``apply`` is exact for the affine depolarizing form in kind 1; ``kraus``
    materializes the operators for positivity arguments and joint
    application on tree layers.
    """

    def __init__(self, dim_in: int, dim_out: int, kraus: list[np.ndarray],
                 apply_fn=None):
        self.dim_in = dim_in
        self.dim_out = dim_out
        self._kraus = kraus
        self._apply_fn = apply_fn

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim_in, self.dim_in):
            raise DimensionError(
                f"expansion map expects {self.dim_in}x{self.dim_in}, got {x.shape}")
        if self._apply_fn is not None:
            return self._apply_fn(x)
        out = np.zeros((self.dim_out, self.dim_out), dtype=complex)
        for b in self._kraus:
            out += b @ x @ dagger(b)
        return out

    def kraus(self) -> list[np.ndarray]:
        return list(self._kraus)


def _state_eigenpairs(sigma: np.ndarray):
    """Eigenpairs of a density operator with negligible weights dropped."""
    vals, vecs = np.linalg.eigh((sigma + dagger(sigma)) / 2)
    pairs = []
    for j in range(vals.size):
        if vals[j] > 1e-14:
            pairs.append((float(vals[j]), vecs[:, j]))
    return pairs


def noisy_expansion_map(t: QuantumTensor) -> ExpansionMap:
    """Build the noisy expansion map of a tensor (kinds 1-3 and classical).

    * kind 1: ``X -> W(X (x) |0...0><0...0|)``.
    * kind 2: ``X -> sum_{i,i'} <i'|X|i> <i'|sigma|i>`` with tau-register
      blocks of the noisy carrier state sigma.
    * kind 3: ``X -> sum_{i,i'} <i'|X|i> P^{i'} sigma P^{i}``.
    * classical: ``X -> A X A^dag``.

    Gate-family tensors are rejected: their noise model is not a channel
    substitution (see the tree module's elementwise damping construction).

    Raises:
        UnsupportedConstructionError: for gate-family tensors.
    """
    n_idx, dim = t.index_count, t.out_dim
    prep = t.prep
    if isinstance(prep, InitialStatePrep):
        channel = preparation_channel(t)
        pad = t.k_width - t.tau
        anc = projector(ket(0, pad)) if pad else None

        def apply_fn(x: np.ndarray) -> np.ndarray:
            inp = np.kron(x, anc) if anc is not None else x
            return channel.apply(inp)

        embed = np.kron(np.eye(n_idx, dtype=complex), ket(0, pad).reshape(-1, 1)) \
            if pad else np.eye(n_idx, dtype=complex)
        kraus = [k @ embed for k in channel.to_kraus().kraus_ops]
        return ExpansionMap(n_idx, dim, kraus, apply_fn=apply_fn)

    if isinstance(prep, ProjectedStatePrep):
        sigma = prepared_state(t)
        kraus = []
        for weight, vec in _state_eigenpairs(sigma):
            # column i of B_j is the i-th tau-register block of eigenvector j
            blocks = vec.reshape(n_idx, dim)
            kraus.append(np.sqrt(weight) * blocks.T)
        if not kraus:
            kraus = [np.zeros((dim, n_idx), dtype=complex)]
        return ExpansionMap(n_idx, dim, kraus)

    if isinstance(prep, PauliFamilyPrep):
        sigma = prepared_state(t)
        paulis = [None if lab is None else pauli_matrix(lab) for lab in prep.labels]
        kraus = []
        for weight, vec in _state_eigenpairs(sigma):
            b = np.zeros((dim, n_idx), dtype=complex)
            for i, p in enumerate(paulis):
                if p is not None:
                    b[:, i] = p @ vec
            kraus.append(np.sqrt(weight) * b)
        if not kraus:
            kraus = [np.zeros((dim, n_idx), dtype=complex)]
        return ExpansionMap(n_idx, dim, kraus)

    if isinstance(prep, ClassicalTable):
        a = build_expansion_operator(t).matrix
        return ExpansionMap(n_idx, dim, [a])

    raise UnsupportedConstructionError(
        "gate-family tensors have no channel-form expansion map")
