"""Dense complex linear algebra and Pauli-string utilities.

All operators in this package are plain ``numpy.ndarray`` objects with
``complex128`` entries; shape conventions are enforced by the validators
here (``is_hermitian``, ``is_density_matrix``, ...). Tensor products use
``numpy.kron`` with the fixed repo-wide ordering: the *left* factor holds
the most significant qubits.

Numeric tolerances are centralized in the table below; the rest of the
package imports them from this module.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from .errors import DimensionError, NonHermitianError

# --- central tolerance table ---------------------------------------------
ATOL_STRUCTURAL = 1e-10  # unitarity, hermiticity, trace preservation, PSD
ATOL_ALGEBRAIC = 1e-12  # exact-identity round trips (decompose/re-sum)
ATOL_PHYSICAL = 1e-9  # physicality verdicts on effective states
RANK_TOL = 1e-10  # squared-norm cutoff flagging padded directions
DEGENERATE_TOL = 1e-14  # |denominator| below this is treated as zero

PAULI_LABELS = "IXYZ"

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def n_qubits(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension; rejects non powers of two."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def ket(index: int, num_qubits: int) -> np.ndarray:
    """Computational basis column vector |index> on ``num_qubits`` qubits."""
    v = np.zeros(2**num_qubits, dtype=complex)
    v[index] = 1.0
    return v


def projector(state: np.ndarray) -> np.ndarray:
    """Rank-1 projector |psi><psi| from a state vector."""
    state = np.asarray(state, dtype=complex).ravel()
    return np.outer(state, state.conj())


def tensor_product(ops: list[np.ndarray]) -> np.ndarray:
    """Kronecker product of a nonempty list, left factor most significant.

    Raises:
        ValueError: on an empty list.
    """
    if len(ops) == 0:
        raise ValueError("tensor_product requires at least one operator")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def kron_power(op: np.ndarray, n: int) -> np.ndarray:
    """n-fold Kronecker power of an operator."""
    return tensor_product([op] * n)


# --- validators -----------------------------------------------------------


def is_hermitian(a: np.ndarray, atol: float = ATOL_ALGEBRAIC) -> bool:
    return a.shape[0] == a.shape[1] and np.max(np.abs(a - dagger(a))) <= atol


def is_unitary(a: np.ndarray, atol: float = ATOL_STRUCTURAL) -> bool:
    if a.shape[0] != a.shape[1]:
        return False
    return np.max(np.abs(dagger(a) @ a - np.eye(a.shape[0]))) <= atol


def is_density_matrix(rho: np.ndarray, atol: float = ATOL_STRUCTURAL) -> bool:
    """Trace one, Hermitian, and no eigenvalue below ``-atol``."""
    if rho.shape[0] != rho.shape[1]:
        return False
    if abs(np.trace(rho) - 1.0) > atol:
        return False
    if not is_hermitian(rho, atol):
        return False
    return float(np.linalg.eigvalsh(rho).min()) >= -atol


def require_hermitian(a: np.ndarray, what: str = "operator",
                      atol: float = ATOL_STRUCTURAL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {a.shape}")
    dev = float(np.max(np.abs(a - dagger(a))))
    if dev > atol:
        raise NonHermitianError(f"{what} deviates from Hermitian by {dev:.3e}")
    return a


# --- Pauli algebra ---------------------------------------------------------


def pauli_matrix(labels: str) -> np.ndarray:
    """Dense matrix of a Pauli string such as ``"XIZ"`` (left = most significant)."""
    if len(labels) == 0:
        raise ValueError("empty Pauli string")
    try:
        return tensor_product([PAULI_1Q[c] for c in labels])
    except KeyError as exc:
        raise ValueError(f"invalid Pauli letter in {labels!r}") from exc


def pauli_strings(num_qubits: int):
    """Iterate over all ``4**n`` Pauli label strings in lexicographic I<X<Y<Z order."""
    for combo in product(PAULI_LABELS, repeat=num_qubits):
        yield "".join(combo)


def pauli_decompose(a: np.ndarray, drop_tol: float = 1e-14) -> list[tuple[complex, str]]:
    """Expand a matrix in the Pauli-string basis.

    Returns ``[(coeff, labels), ...]`` with ``coeff = Tr[P a] / 2**n``, so that
    ``sum(c * pauli_matrix(s))`` reconstructs ``a``. Inputs need not be
    Hermitian; coefficients are complex in general. Terms with
    ``|coeff| <= drop_tol`` are omitted.

    Raises:
        DimensionError: if the matrix is not square with power-of-two size.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    n = n_qubits(a.shape[0])
    dim = a.shape[0]
    terms = []
    for labels in pauli_strings(n):
        coeff = np.trace(pauli_matrix(labels) @ a) / dim
        if abs(coeff) > drop_tol:
            terms.append((complex(coeff), labels))
    return terms


def pauli_recompose(terms: list[tuple[complex, str]], num_qubits: int) -> np.ndarray:
    """Sum ``coeff * pauli_matrix(labels)`` back into a dense matrix."""
    out = np.zeros((2**num_qubits, 2**num_qubits), dtype=complex)
    for coeff, labels in terms:
        out += coeff * pauli_matrix(labels)
    return out


# --- Hermitian spectral tools ----------------------------------------------


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate a vector's global phase so its first nonzero entry is real positive."""
    for entry in vec:
        if abs(entry) > 1e-12:
            return vec * (abs(entry) / entry)
    return vec


def hermitian_eigendecompose(a: np.ndarray,
                             atol: float = ATOL_STRUCTURAL) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition ``a = U^dag diag(eigs) U`` of a Hermitian matrix.

    Eigenvalues are sorted descending; each eigenvector's phase is fixed so
    its first nonzero component is real positive, and exact ties are broken
    by lexicographic order of the phase-fixed eigenvectors. Rows of ``U`` are
    the eigenvectors (paper-circuit convention: apply ``U`` before a Z-basis
    measurement to read off ``eigs``).

    Returns:
        (U, eigs) with ``U`` unitary and ``eigs`` real, descending.

    Raises:
        NonHermitianError: if ``a`` deviates from Hermitian beyond ``atol``.
    """
    a = require_hermitian(a, "eigendecomposition input", atol)
    eigs, vecs = np.linalg.eigh((a + dagger(a)) / 2.0)
    cols = [_fix_phase(vecs[:, j]) for j in range(vecs.shape[1])]

    def sort_key(j: int):
        v = cols[j]
        return (-eigs[j],) + tuple((round(x.real, 10), round(x.imag, 10)) for x in v)

    order = sorted(range(len(eigs)), key=sort_key)
    eigs_sorted = np.array([eigs[j] for j in order], dtype=float)
    u = np.array([cols[j] for j in order], dtype=complex).conj()
    return u, eigs_sorted
