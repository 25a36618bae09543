"""Seeded random states, operators, and channels for tests and experiments."""

from __future__ import annotations

import numpy as np

from .channels import KrausChannel
from .linalg import dagger


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def rand_state(num_qubits: int, rng) -> np.ndarray:
    """Haar-ish random normalized state vector."""
    rng = rng_from(rng)
    v = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return v / np.linalg.norm(v)


def rand_unitary(dim: int, rng) -> np.ndarray:
    """Haar random unitary via QR of a complex Ginibre matrix."""
    rng = rng_from(rng)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_hermitian(dim: int, rng, scale: float = 1.0) -> np.ndarray:
    rng = rng_from(rng)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + dagger(g)) / 2.0


def rand_density(num_qubits: int, rng, rank: int | None = None) -> np.ndarray:
    """Random density matrix (mixture of random pure states)."""
    rng = rng_from(rng)
    dim = 2**num_qubits
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho)


def rand_kraus_channel(num_qubits: int, rng, n_kraus: int = 3) -> KrausChannel:
    """Random CPTP channel from a Haar isometry (Stinespring dilation)."""
    rng = rng_from(rng)
    dim = 2**num_qubits
    g = rng.normal(size=(dim * n_kraus, dim)) + 1j * rng.normal(size=(dim * n_kraus, dim))
    q, _ = np.linalg.qr(g)  # columns orthonormal: q^dag q = I(dim)
    return KrausChannel([q[j * dim:(j + 1) * dim, :] for j in range(n_kraus)])
