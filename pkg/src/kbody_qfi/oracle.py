"""Dense brute-force operators and a Hermitian eigensolver.

Nothing in here uses the closed-form sector eigenvalues; the operators are
assembled from Kronecker products of local Pauli matrices so they can serve
as an independent check of :mod:`kbody_qfi.spectrum`.

Basis order is lexicographic with qubit 0 as the most significant bit and
``|0>`` before ``|1>``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import ConvergenceError, DomainError, ResourceLimitError
from .spectrum import HamiltonianSpec

logger = logging.getLogger(__name__)

MAX_DENSE_QUBITS = 12
MAX_EIG_DIM = 4096
# above this size the cyclic Jacobi sweeps get slow in numpy; LAPACK takes over
JACOBI_AUTO_MAX_DIM = 64

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class DenseOperator:
    """A ``2^N x 2^N`` Hermitian operator.

    Diagonal operators keep only their diagonal; :meth:`toarray` materializes.
    """

    data: np.ndarray
    is_diagonal: bool = False

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def toarray(self) -> np.ndarray:
        if self.is_diagonal:
            return np.diag(self.data.astype(complex))
        return self.data

    def __array__(self, dtype=None, copy=None):
        arr = self.toarray()
        return arr if dtype is None else arr.astype(dtype)


def local_operator(axis) -> np.ndarray:
    """``n.sigma`` for a unit 3-vector ``n``."""
    nx, ny, nz = axis
    return nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z


def kron_all(ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def _elementary_sums(n: int, orders, one, local, kron):
    """Sum of all ``n``-fold tensor strings with exactly ``k`` factors of ``local``.

    Built qubit by qubit:
    ``S_k(i) = S_k(i-1) x 1 + S_{k-1}(i-1) x local``.
    """
    kmax = max(orders)
    sums = [np.ones((1,) * one.ndim, dtype=one.dtype)] + [None] * kmax
    for _ in range(n):
        new = [kron(sums[0], one)] + [None] * kmax
        for k in range(1, kmax + 1):
            terms = []
            if sums[k] is not None:
                terms.append(kron(sums[k], one))
            if sums[k - 1] is not None:
                terms.append(kron(sums[k - 1], local))
            if terms:
                new[k] = terms[0] if len(terms) == 1 else terms[0] + terms[1]
        sums = new
    return {k: sums[k] for k in orders}


def _weights(spec: HamiltonianSpec) -> dict[int, float]:
    # each pure order is scaled to norm N/2; its all-|0> eigenvalue is C(N, k)
    n = spec.n_qubits
    return {k: g * (n / 2.0) / comb(n, k) for k, g in spec.couplings.items() if g != 0.0}


def _z_diagonal(spec: HamiltonianSpec, local=np.array([1.0, -1.0])) -> np.ndarray:
    weights = _weights(spec)
    sums = _elementary_sums(spec.n_qubits, list(weights), np.array([1.0, 1.0]), local, np.kron)
    diag = np.zeros(2**spec.n_qubits)
    for k, w in weights.items():
        diag += w * sums[k]
    return diag


def build_dense(spec: HamiltonianSpec) -> DenseOperator:
    """Materialize ``spec`` as a dense operator from explicit tensor products.

    The overall normalization constant is found from the oracle's own
    z-basis diagonal, which has the same spectrum for every axis.
    """
    n = spec.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise ResourceLimitError(f"dense operators limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    diag = _z_diagonal(spec)
    norm = 1.0
    if spec.normalized:
        norm = (n / 2.0) / np.max(np.abs(diag))
    if spec.is_diagonal:
        if spec.axis[2] < 0:
            # n = -z flips the sign of every odd-order string
            diag = _z_diagonal(spec, local=np.array([-1.0, 1.0]))
        return DenseOperator(norm * diag, is_diagonal=True)
    weights = _weights(spec)
    local, one = local_operator(spec.axis), IDENTITY
    if not np.any(local.imag):
        # axes in the x-z plane give real symmetric matrices; keep them real
        local, one = local.real, one.real
    sums = _elementary_sums(n, list(weights), one, local, np.kron)
    mat = np.zeros((2**n, 2**n), dtype=local.dtype)
    for k, w in weights.items():
        mat += w * sums[k]
    return DenseOperator(norm * mat, is_diagonal=False)


def as_matrix(op) -> np.ndarray:
    if isinstance(op, DenseOperator):
        return op.toarray()
    return np.asarray(op)


def check_hermitian(a, tol: float = 1e-12) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.conj().T)) > tol * max(1.0, np.max(np.abs(a))):
        raise DomainError("matrix is not Hermitian")
    return a


def _round_robin(n: int):
    """Pairings for one cyclic sweep; each round holds disjoint index pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Rotations within one round act on disjoint index pairs and are applied
    together.  Converges when the off-diagonal Frobenius mass falls below
    ``tol * ||A||_F``.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    v : ndarray
        Orthonormal eigenvectors as columns.
    """
    a = np.array(a, dtype=complex, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        w = np.real(np.diag(a)).copy()
        order = np.argsort(w, kind="stable")
        return w[order], v[:, order]
    rounds = [(np.array([p for p, _ in r]), np.array([q for _, q in r])) for r in _round_robin(n)]

    for sweep in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > 1e-300
            if not np.any(active):
                continue
            p, q, apq, mag = p[active], q[active], apq[active], mag[active]
            phase = apq / mag
            app = np.real(a[p, p])
            aqq = np.real(a[q, q])
            theta = (aqq - app) / (2.0 * mag)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(t**2 + 1.0)
            s = t * c
            # J[:, p] = (c, -s*conj(phase)), J[:, q] = (s, c*conj(phase)) in the (p, q) block
            jpp, jqp = c, -s * np.conj(phase)
            jpq, jqq = s, c * np.conj(phase)
            colp, colq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = colp * jpp + colq * jqp
            a[:, q] = colp * jpq + colq * jqq
            rowp, rowq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = np.conj(jpp)[:, None] * rowp + np.conj(jqp)[:, None] * rowq
            a[q, :] = np.conj(jpq)[:, None] * rowp + np.conj(jqq)[:, None] * rowq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * jpp + vq * jqp
            v[:, q] = vp * jpq + vq * jqq
    else:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off >= tol * scale:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal {off:.3e})")
    logger.debug("jacobi: n=%d converged after %d sweeps", n, sweep)
    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigendecompose_hermitian(a, method: str = "auto"):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_AUTO_MAX_DIM``, LAPACK beyond).
    """
    if isinstance(a, DenseOperator) and a.is_diagonal:
        w = np.real(a.data).astype(float)
        order = np.argsort(w, kind="stable")
        v = np.eye(a.dim, dtype=complex)[:, order]
        return w[order], v
    a = check_hermitian(as_matrix(a))
    if a.shape[0] > MAX_EIG_DIM:
        raise ResourceLimitError(f"dimension {a.shape[0]} exceeds {MAX_EIG_DIM}")
    if method == "auto":
        method = "jacobi" if a.shape[0] <= JACOBI_AUTO_MAX_DIM else "lapack"
    if method == "jacobi":
        return jacobi_eigh(a)
    if method == "lapack":
        w, v = np.linalg.eigh(a)
        return w, v
    raise DomainError(f"unknown eigensolver {method!r}")


def eigvalsh_dense(op, method: str = "auto") -> np.ndarray:
    """Ascending eigenvalues only; skips eigenvectors on the LAPACK path."""
    if method == "lapack" and not (isinstance(op, DenseOperator) and op.is_diagonal):
        a = check_hermitian(as_matrix(op))
        if a.shape[0] > MAX_EIG_DIM:
            raise ResourceLimitError(f"dimension {a.shape[0]} exceeds {MAX_EIG_DIM}")
        return np.linalg.eigvalsh(a)
    return eigendecompose_hermitian(op, method)[0]
