"""Contraction of single tensors with observables into Hermitian blocks.

Each contraction simulates, at density-matrix level, the measurement
circuits that estimate the ``2^tau x 2^tau`` matrices

    M[i, i'] = <psi^i| O |psi^i'>      and      S[i, i'] = <psi^i | psi^i'>

for one tensor, with the ideal preparation channel optionally replaced by a
noisy one. Blocks are assembled conjugate-symmetrically (the lower triangle
is the conjugate of the upper one), so they are Hermitian by construction.

Assembly strategies follow the per-kind measurement procedures:

* kind 1 (index as initial state): expectation values ``E(|a>)`` for a small
  set of input states on the index register. For ``tau = 1`` both the
  six-input and the reduced four-input combination are provided; wider
  registers assemble ``|i'><i|`` from Pauli-basis inputs.
* kind 2 (index as projection): expectation values ``E(w) = Tr[(w (x) O) sigma]``
  over Pauli observables ``w`` on the index register.
* kind 3 (index as Pauli): Pauli decomposition of ``P^i O P^i'`` measured on
  the prepared state.
* kind 4 (index as gate): direct expectation for diagonal entries and a
  phase-swept test circuit with controlled gates for off-diagonal entries,
  with optional per-gate depolarizing noise.
* classical: dense algebra ``A^dag O A`` / ``A^dag A``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import DepolarizingChannel, GateNoisePair
from .errors import DimensionError, ShapeError, ValidationError
from .linalg import (
    dagger,
    ket,
    n_qubits,
    pauli_decompose,
    pauli_matrix,
    pauli_strings,
    projector,
    require_hermitian,
)
from .tensors import (
    ClassicalTable,
    GateFamilyPrep,
    InitialStatePrep,
    PauliFamilyPrep,
    ProjectedStatePrep,
    QuantumTensor,
    build_expansion_operator,
    preparation_channel,
    prepared_state,
)


@dataclass(frozen=True)
class HermitianBlock:
    """Contracted observable block ``m`` and overlap block ``s`` of one tensor."""

    m: np.ndarray
    s: np.ndarray
    tau: int
    tensor: str = ""
    observable: str = ""
    noisy: bool = False


def _hermitize_from_upper(mat: np.ndarray) -> np.ndarray:
    """Copy the conjugate upper triangle into the lower one (in place)."""
    n = mat.shape[0]
    for i in range(n):
        for j in range(i):
            mat[i, j] = np.conj(mat[j, i])
    return mat


# --- kind 1: classical index attached to initial states ---------------------

_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
_PLUS_I = np.array([1, 1j], dtype=complex) / np.sqrt(2)
_MINUS_I = np.array([1, -1j], dtype=complex) / np.sqrt(2)


def contract_type1(channel, observable: np.ndarray, tau: int,
                   assembly: str = "four", name: str = "") -> HermitianBlock:
    """Blocks for ``|psi^i> = U (|i> (x) |0...0>)`` under channel ``W``.

    ``E(|a>) = Tr[O W(|a><a| (x) |0...0><0...0|)]`` is evaluated for input
    states ``|a>`` on the index register. With ``tau = 1`` the off-diagonal
    element combines either four inputs (|0>, |1>, |+>, |+i>) or six
    (adding |->, |-i>); the two combinations agree identically because any
    linear E satisfies E(|+>)+E(|->) = E(|0>)+E(|1>) = E(|+i>)+E(|-i>).
    The overlap block is the identity by construction and is never measured.

    Raises:
        ShapeError: if ``tau`` exceeds the channel's qubit count.
    """
    k_width = n_qubits(channel.dim_in)
    if tau > k_width:
        raise ShapeError(f"index register tau={tau} exceeds K={k_width}")
    if assembly not in ("four", "six"):
        raise ValueError(f"assembly must be 'four' or 'six', got {assembly!r}")
    observable = require_hermitian(observable, "observable")
    if observable.shape[0] != channel.dim_out:
        raise DimensionError("observable does not match the channel output")
    pad = k_width - tau

    def e_value(index_op: np.ndarray) -> complex:
        inp = np.kron(index_op, projector(ket(0, pad))) if pad else index_op
        return complex(np.trace(observable @ channel.apply(inp)))

    n_idx = 2**tau
    m = np.zeros((n_idx, n_idx), dtype=complex)
    if tau == 1:
        e0 = e_value(projector(ket(0, 1)))
        e1 = e_value(projector(ket(1, 1)))
        e_plus = e_value(projector(_PLUS))
        e_plus_i = e_value(projector(_PLUS_I))
        if assembly == "six":
            e_minus = e_value(projector(_MINUS))
            e_minus_i = e_value(projector(_MINUS_I))
            m01 = (e_plus - e_minus - 1j * (e_plus_i - e_minus_i)) / 2.0
        else:
            m01 = e_plus - 1j * e_plus_i + (1j - 1.0) / 2.0 * (e0 + e1)
        m[0, 0] = e0.real
        m[1, 1] = e1.real
        m[0, 1] = m01
        m[1, 0] = np.conj(m01)
    else:
        e_by_pauli = {w: e_value(pauli_matrix(w)) for w in pauli_strings(tau)}
        for i in range(n_idx):
            for ip in range(i, n_idx):
                # |i'><i| = sum_w <i|w|i'>/2^tau * w
                val = 0.0
                for w, e_w in e_by_pauli.items():
                    val += pauli_matrix(w)[i, ip] / n_idx * e_w
                m[i, ip] = val
        _hermitize_from_upper(m)
        np.fill_diagonal(m, m.diagonal().real)
    s = np.eye(n_idx, dtype=complex)
    return HermitianBlock(m=m, s=s, tau=tau, tensor=name, observable="O")


# --- kind 2: classical index attached to projections -------------------------


def contract_type2(channel, observable: np.ndarray, tau: int,
                   name: str = "") -> HermitianBlock:
    """Blocks for ``|psi^i> = <i|psi>`` with carrier ``sigma = W(|0...0><0...0|)``.

    Matrix elements are assembled from ``E(w) = Tr[(w (x) O) sigma]`` over
    the Pauli observables ``w`` of the index register; ``S`` repeats the
    assembly with the observable replaced by the identity.
    """
    total = n_qubits(channel.dim_in)
    k_width = total - tau
    if k_width < 1:
        raise ShapeError(f"channel on {total} qubits cannot host tau={tau}")
    observable = require_hermitian(observable, "observable")
    if observable.shape[0] != 2**k_width:
        raise DimensionError(
            f"observable must act on K={k_width} qubits, got dim {observable.shape[0]}")
    sigma = channel.apply(projector(ket(0, total)))
    return _type2_blocks(sigma, observable, tau, name)


def _type2_blocks(sigma: np.ndarray, observable: np.ndarray, tau: int,
                  name: str = "") -> HermitianBlock:
    n_idx = 2**tau
    k_dim = sigma.shape[0] // n_idx
    eye_k = np.eye(k_dim, dtype=complex)

    def assemble(obs: np.ndarray) -> np.ndarray:
        e_by_pauli = {
            w: complex(np.trace(np.kron(pauli_matrix(w), obs) @ sigma))
            for w in pauli_strings(tau)
        }
        out = np.zeros((n_idx, n_idx), dtype=complex)
        for i in range(n_idx):
            for ip in range(i, n_idx):
                # |i><i'| = sum_w <i'|w|i>/2^tau * w
                val = 0.0
                for w, e_w in e_by_pauli.items():
                    val += pauli_matrix(w)[ip, i] / n_idx * e_w
                out[i, ip] = val
        _hermitize_from_upper(out)
        np.fill_diagonal(out, out.diagonal().real)
        return out

    return HermitianBlock(m=assemble(observable), s=assemble(eye_k), tau=tau,
                          tensor=name, observable="O")


# --- kind 3: classical index attached to Pauli operators ---------------------


def contract_type3(channel, observable: np.ndarray, paulis, tau: int,
                   name: str = "") -> HermitianBlock:
    """Blocks for ``|psi^i> = P^i |psi>`` with ``sigma = W(|0...0><0...0|)``.

    ``M[i, i'] = Tr[P^i O P^i' sigma]`` is evaluated by Pauli-decomposing
    ``P^i O P^i'`` and summing measured Pauli expectations on sigma.
    Overlap entries are ``S[i, i'] = Tr[P^i P^i' sigma]`` with non-padded
    diagonal fixed at one (the strings square to identity and sigma has unit
    trace). A ``None`` label marks a padded zero column.

    Raises:
        ShapeError: if a Pauli label does not match the register width.
    """
    k_width = n_qubits(channel.dim_in)
    observable = require_hermitian(observable, "observable")
    if observable.shape[0] != channel.dim_out:
        raise DimensionError("observable does not match the channel output")
    for lab in paulis:
        if lab is not None and len(lab) != k_width:
            raise ShapeError(f"Pauli label {lab!r} does not act on {k_width} qubits")
    if len(paulis) != 2**tau:
        raise ShapeError(f"need {2**tau} Pauli labels, got {len(paulis)}")
    sigma = channel.apply(projector(ket(0, k_width)))
    return _type3_blocks(sigma, observable, tuple(paulis), tau, name)


def _type3_blocks(sigma: np.ndarray, observable: np.ndarray, paulis: tuple,
                  tau: int, name: str = "") -> HermitianBlock:
    n_idx = 2**tau
    mats = [None if lab is None else pauli_matrix(lab) for lab in paulis]
    expectation_cache: dict[str, complex] = {}

    def pauli_expectation(labels: str) -> complex:
        if labels not in expectation_cache:
            expectation_cache[labels] = complex(
                np.trace(pauli_matrix(labels) @ sigma))
        return expectation_cache[labels]

    m = np.zeros((n_idx, n_idx), dtype=complex)
    s = np.zeros((n_idx, n_idx), dtype=complex)
    for i in range(n_idx):
        if mats[i] is None:
            continue
        for ip in range(i, n_idx):
            if mats[ip] is None:
                continue
            sandwiched = mats[i] @ observable @ mats[ip]
            m[i, ip] = sum(coeff * pauli_expectation(lab)
                           for coeff, lab in pauli_decompose(sandwiched))
            if ip == i:
                s[i, i] = 1.0
            else:
                s[i, ip] = np.trace(mats[i] @ mats[ip] @ sigma)
    _hermitize_from_upper(m)
    _hermitize_from_upper(s)
    np.fill_diagonal(m, m.diagonal().real)
    return HermitianBlock(m=m, s=s, tau=tau, tensor=name, observable="O")


# --- kind 4: classical index attached to unitary gates -----------------------


def contract_type4(unitaries, observable: np.ndarray, tau: int,
                   noise: GateNoisePair | None = None,
                   name: str = "") -> HermitianBlock:
    """Blocks for ``|psi^i> = U^i |0...0>`` via simulated test circuits.

    Diagonal entries measure ``O`` on ``U^i |0...0>``, optionally followed by
    K-qubit depolarizing with rate ``p[i]``. Off-diagonal entries run the
    controlled-gate circuit on one ancilla plus K qubits: the ancilla starts
    in ``(|0> + e^{i alpha} |1>)/sqrt(2)``, gate ``U^i`` fires on ancilla
    |1> and ``U^i'`` on ancilla |0>, each followed by (K+1)-qubit
    depolarizing with rates ``q[i]`` and ``q[i']``; measuring ``X (x) O`` at
    ``alpha = 0`` and ``alpha = pi/2`` gives the real and imaginary parts.
    Overlap entries repeat the circuit with the identity observable, with
    the diagonal fixed at one.

    Raises:
        ValidationError: if the number of unitaries does not match ``2^tau``.
    """
    n_idx = 2**tau
    if len(unitaries) != n_idx:
        raise ValidationError(f"need {n_idx} unitaries, got {len(unitaries)}")
    mats = [np.asarray(u, dtype=complex) for u in unitaries]
    k_width = n_qubits(mats[0].shape[0])
    observable = require_hermitian(observable, "observable")
    if observable.shape[0] != mats[0].shape[0]:
        raise DimensionError("observable does not match the gate register")
    if noise is None:
        noise = GateNoisePair.uniform(n_idx, 0.0, 0.0)
    if len(noise.p) != n_idx or len(noise.q) != n_idx:
        raise ValidationError("noise rate lists must have one entry per index")

    k_dim = 2**k_width
    eye_k = np.eye(k_dim, dtype=complex)
    zero_k = projector(ket(0, k_width))

    def diag_state(i: int) -> np.ndarray:
        out = mats[i] @ zero_k @ dagger(mats[i])
        if noise.p[i] > 0.0:
            out = DepolarizingChannel(k_width, noise.p[i]).apply(out)
        return out

    def offdiag_value(i: int, ip: int, alpha: float, obs: np.ndarray) -> float:
        anc = np.array([1.0, np.exp(1j * alpha)], dtype=complex) / np.sqrt(2)
        rho = np.kron(projector(anc), zero_k)
        fire_on_1 = np.kron(np.diag([1, 0]).astype(complex), eye_k) + \
            np.kron(np.diag([0, 1]).astype(complex), mats[i])
        rho = fire_on_1 @ rho @ dagger(fire_on_1)
        if noise.q[i] > 0.0:
            rho = DepolarizingChannel(k_width + 1, noise.q[i]).apply(rho)
        fire_on_0 = np.kron(np.diag([1, 0]).astype(complex), mats[ip]) + \
            np.kron(np.diag([0, 1]).astype(complex), eye_k)
        rho = fire_on_0 @ rho @ dagger(fire_on_0)
        if noise.q[ip] > 0.0:
            rho = DepolarizingChannel(k_width + 1, noise.q[ip]).apply(rho)
        readout = np.kron(pauli_matrix("X"), obs)
        return float(np.real(np.trace(readout @ rho)))

    m = np.zeros((n_idx, n_idx), dtype=complex)
    s = np.eye(n_idx, dtype=complex)
    for i in range(n_idx):
        m[i, i] = float(np.real(np.trace(observable @ diag_state(i))))
        for ip in range(i + 1, n_idx):
            m[i, ip] = offdiag_value(i, ip, 0.0, observable) \
                + 1j * offdiag_value(i, ip, np.pi / 2, observable)
            s[i, ip] = offdiag_value(i, ip, 0.0, eye_k) \
                + 1j * offdiag_value(i, ip, np.pi / 2, eye_k)
    _hermitize_from_upper(m)
    _hermitize_from_upper(s)
    return HermitianBlock(m=m, s=s, tau=tau, tensor=name, observable="O")


# --- classical tensors -------------------------------------------------------


def contract_classical(tensor: QuantumTensor, observable: np.ndarray,
                       name: str = "") -> HermitianBlock:
    """Blocks ``M = A^dag O A`` and ``S = A^dag A`` by dense algebra."""
    if not isinstance(tensor.prep, ClassicalTable):
        raise ValidationError("contract_classical expects a classical-table tensor")
    observable = require_hermitian(observable, "observable")
    a = build_expansion_operator(tensor).matrix
    if observable.shape[0] != a.shape[0]:
        raise DimensionError("observable does not match the amplitude table")
    return HermitianBlock(m=dagger(a) @ observable @ a, s=dagger(a) @ a,
                          tau=tensor.tau, tensor=name or tensor.name,
                          observable="O")


# --- dispatch over tensor kinds ----------------------------------------------


def contract_tensor(tensor: QuantumTensor, observable: np.ndarray) -> HermitianBlock:
    """Contract one tensor (with its own noise spec) against an observable."""
    prep = tensor.prep
    if isinstance(prep, InitialStatePrep):
        return contract_type1(preparation_channel(tensor), observable,
                              tensor.tau, name=tensor.name)
    if isinstance(prep, ProjectedStatePrep):
        block = _type2_blocks(prepared_state(tensor), observable, tensor.tau,
                              name=tensor.name)
        return block
    if isinstance(prep, PauliFamilyPrep):
        return _type3_blocks(prepared_state(tensor), observable, prep.labels,
                             tensor.tau, name=tensor.name)
    if isinstance(prep, GateFamilyPrep):
        noise = tensor.noise if isinstance(tensor.noise, GateNoisePair) else None
        if isinstance(tensor.noise, GateNoisePair) or tensor.noise.is_none:
            return contract_type4(prep.unitaries, observable, tensor.tau,
                                  noise=noise, name=tensor.name)
        raise ValidationError(
            "gate-family tensors take GateNoisePair noise, not a channel spec")
    return contract_classical(tensor, observable)
