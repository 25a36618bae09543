"""CPTP channels as Kraus lists, exact global depolarizing, and noise specs.

Channels are immutable after construction and expose the small duck-typed
surface ``dim_in`` / ``dim_out`` / ``apply(rho)``. Two concrete kinds exist:

* :class:`KrausChannel` applies ``sum_k K rho K^dag``.
* :class:`DepolarizingChannel` applies the exact affine map
  ``rho -> (1 - rate) rho + rate * Tr[rho] * I / d`` (extended linearly to
  arbitrary inputs); an equivalent Kraus realization is available through
  :meth:`DepolarizingChannel.to_kraus` for Choi-based positivity checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError
from .linalg import ATOL_STRUCTURAL, dagger, pauli_matrix, pauli_strings


class KrausChannel:
    """A completely positive map given by a list of (possibly rectangular) Kraus ops.

    Args:
        kraus_ops: matrices of common shape ``(dim_out, dim_in)``.
        require_tp: verify ``sum K^dag K = I`` within tolerance (default True).
    """

    def __init__(self, kraus_ops: list[np.ndarray], require_tp: bool = True):
        if len(kraus_ops) == 0:
            raise ValidationError("a channel needs at least one Kraus operator")
        ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise DimensionError("all Kraus operators must share one shape")
        self.kraus_ops = ops
        self.dim_out, self.dim_in = shape
        if require_tp:
            total = sum(dagger(k) @ k for k in ops)
            dev = float(np.max(np.abs(total - np.eye(self.dim_in))))
            if dev > ATOL_STRUCTURAL:
                raise ValidationError(
                    f"Kraus set is not trace preserving (deviation {dev:.3e})")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionError(
                f"channel expects a {self.dim_in}x{self.dim_in} input, got {rho.shape}")
        out = np.zeros((self.dim_out, self.dim_out), dtype=complex)
        for k in self.kraus_ops:
            out += k @ rho @ dagger(k)
        return out

    def to_kraus(self) -> "KrausChannel":
        return self


class DepolarizingChannel:
    """Global depolarizing channel on ``num_qubits`` qubits, exact affine form."""

    def __init__(self, num_qubits: int, rate: float):
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"depolarizing rate must lie in [0, 1], got {rate}")
        self.num_qubits = num_qubits
        self.rate = float(rate)
        self.dim_in = self.dim_out = 2**num_qubits

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionError(
                f"channel expects a {self.dim_in}x{self.dim_in} input, got {rho.shape}")
        mix = np.trace(rho) / self.dim_in
        return (1.0 - self.rate) * rho + self.rate * mix * np.eye(self.dim_in)

    def to_kraus(self) -> KrausChannel:
        """Exact Kraus realization via the uniform Pauli twirl.

        Uses ``(1/4^n) sum_P P rho P^dag = Tr[rho] I / 2^n``, giving weights
        ``sqrt(1 - rate + rate/4^n)`` on identity and ``sqrt(rate)/2^n`` on
        every non-identity Pauli string.
        """
        n = self.num_qubits
        w_id = np.sqrt(1.0 - self.rate + self.rate / 4**n)
        w_p = np.sqrt(self.rate) / 2**n
        ops = [w_id * np.eye(self.dim_in, dtype=complex)]
        if self.rate > 0.0:
            for labels in pauli_strings(n):
                if labels != "I" * n:
                    ops.append(w_p * pauli_matrix(labels))
        return KrausChannel(ops)


class ChainedChannel:
    """Sequential application ``outer(inner(rho))`` without Kraus materialization.

    Keeps the exact affine form of depolarizing factors intact; use
    :func:`compose_channels` when an explicit Kraus list is wanted.
    """

    def __init__(self, outer, inner):
        if outer.dim_in != inner.dim_out:
            raise DimensionError(
                f"cannot chain: outer expects dim {outer.dim_in}, "
                f"inner produces dim {inner.dim_out}")
        self.outer = outer
        self.inner = inner
        self.dim_in = inner.dim_in
        self.dim_out = outer.dim_out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.outer.apply(self.inner.apply(rho))

    def to_kraus(self) -> KrausChannel:
        return compose_channels(self.outer, self.inner)


def unitary_channel(u: np.ndarray) -> KrausChannel:
    """The channel ``rho -> U rho U^dag``."""
    return KrausChannel([np.asarray(u, dtype=complex)])


def state_preparation_channel(state: np.ndarray) -> KrausChannel:
    """The reset channel ``X -> Tr[X] |psi><psi|`` (Kraus ``|psi><j|``)."""
    psi = np.asarray(state, dtype=complex).ravel()
    dim = psi.size
    psi = psi / np.linalg.norm(psi)
    return KrausChannel(
        [np.outer(psi, np.eye(dim)[j]) for j in range(dim)])


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel([np.eye(dim, dtype=complex)])


def make_depolarizing(num_qubits: int, rate: float) -> DepolarizingChannel:
    """Global depolarizing channel ``rho -> (1-rate) rho + rate I/2^n``.

    Raises:
        ValueError: if ``rate`` lies outside ``[0, 1]``.
    """
    return DepolarizingChannel(num_qubits, rate)


def compose_channels(outer, inner) -> KrausChannel:
    """Kraus list of ``outer o inner`` (inner acts first)."""
    if outer.dim_in != inner.dim_out:
        raise DimensionError(
            f"cannot compose: outer expects dim {outer.dim_in}, "
            f"inner produces dim {inner.dim_out}")
    outer_k = outer.to_kraus().kraus_ops
    inner_k = inner.to_kraus().kraus_ops
    return KrausChannel([ko @ ki for ko in outer_k for ki in inner_k],
                        require_tp=False)


def tensor_channels(channels: list) -> KrausChannel:
    """Parallel action on adjacent registers, left factor most significant."""
    if len(channels) == 0:
        raise ValueError("tensor_channels requires at least one channel")
    out = channels[0].to_kraus()
    for ch in channels[1:]:
        right = ch.to_kraus()
        out = KrausChannel(
            [np.kron(a, b) for a in out.kraus_ops for b in right.kraus_ops],
            require_tp=False)
    return out


def choi_matrix(channel) -> np.ndarray:
    """Choi matrix ``sum_ij E(|i><j|) (x) |i><j|`` of a channel."""
    d_in = channel.dim_in
    d_out = channel.dim_out
    choi = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            e_ij = np.zeros((d_in, d_in), dtype=complex)
            e_ij[i, j] = 1.0
            choi += np.kron(channel.apply(e_ij), e_ij)
    return choi


def is_cptp(channel, atol: float = ATOL_STRUCTURAL) -> bool:
    """Complete positivity (Choi PSD) plus trace preservation on a basis."""
    choi = choi_matrix(channel)
    if float(np.linalg.eigvalsh((choi + dagger(choi)) / 2).min()) < -atol:
        return False
    d_in = channel.dim_in
    for i in range(d_in):
        e_ii = np.zeros((d_in, d_in), dtype=complex)
        e_ii[i, i] = 1.0
        if abs(np.trace(channel.apply(e_ii)) - 1.0) > atol:
            return False
    return True


@dataclass(frozen=True)
class NoiseSpec:
    """Per-tensor noise description.

    ``kind`` is one of ``"none"``, ``"depolarizing"`` (with ``rate``), or
    ``"kraus"`` (with ``kraus_ops``). The channel acts on the tensor's
    preparation register (K qubits for index-as-initial-state, index-as-Pauli
    and gate-family tensors; K + tau qubits for projection tensors).
    """

    kind: str = "none"
    rate: float = 0.0
    kraus_ops: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("none", "depolarizing", "kraus"):
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        if self.kind == "depolarizing" and not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"depolarizing rate must lie in [0, 1], got {self.rate}")
        if self.kind == "kraus" and len(self.kraus_ops) == 0:
            raise ValidationError("kraus noise needs a nonempty operator list")

    @property
    def is_none(self) -> bool:
        return self.kind == "none"

    def channel(self, num_qubits: int):
        """Materialize the channel on ``num_qubits`` qubits, or None for no noise."""
        if self.kind == "none":
            return None
        if self.kind == "depolarizing":
            return DepolarizingChannel(num_qubits, self.rate)
        ch = KrausChannel([np.asarray(k, dtype=complex) for k in self.kraus_ops])
        if ch.dim_in != 2**num_qubits or ch.dim_out != 2**num_qubits:
            raise DimensionError(
                f"kraus noise acts on dim {ch.dim_in}, tensor needs {2**num_qubits}")
        return ch


NO_NOISE = NoiseSpec()


@dataclass(frozen=True)
class GateNoisePair:
    """Depolarizing rates for gate-family (type 4) contraction circuits.

    ``p[i]`` acts on the K-qubit register after the ``i``-th gate in the
    diagonal-element circuit; ``q[i]`` acts on the (K+1)-qubit register after
    the ``i``-th controlled gate in the off-diagonal circuit.
    """

    p: tuple
    q: tuple

    def __post_init__(self):
        for name, rates in (("p", self.p), ("q", self.q)):
            if any(not 0.0 <= r <= 1.0 for r in rates):
                raise ValueError(f"{name} rates must lie in [0, 1]")

    @staticmethod
    def uniform(count: int, p: float, q: float) -> "GateNoisePair":
        return GateNoisePair(p=(p,) * count, q=(q,) * count)
