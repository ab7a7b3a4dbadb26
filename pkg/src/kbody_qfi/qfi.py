"""Quantum Fisher information of pure and mixed states."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DomainError
from .oracle import DenseOperator, as_matrix, check_hermitian, eigendecompose_hermitian
from .spectrum import ExcitationSpectrum

PURE_ATOL = 1e-12
DENSITY_ATOL = 1e-12
PSD_ATOL = 1e-10
# pairs of populations summing below this are dropped from the eigen-sum
EIGEN_SUM_CUTOFF = 1e-12


class QfiMethod(str, Enum):
    PURE_VARIANCE = "PureVariance"
    MIXED_EIGEN = "MixedEigen"
    TWO_COPY = "TwoCopy"


@dataclass(frozen=True)
class QfiValue:
    value: float
    method: QfiMethod

    def __float__(self):
        return float(self.value)


def check_pure_state(psi, atol: float = PURE_ATOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size == 0 or psi.size & (psi.size - 1):
        raise DomainError(f"state length {psi.size} is not a power of two")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > atol:
        raise DomainError(f"state is not normalized (norm^2 = {norm!r})")
    return psi


def check_density_matrix(rho, atol: float = DENSITY_ATOL, psd_atol: float = PSD_ATOL) -> np.ndarray:
    rho = check_hermitian(np.asarray(rho, dtype=complex), tol=atol)
    if rho.shape[0] & (rho.shape[0] - 1):
        raise DomainError(f"dimension {rho.shape[0]} is not a power of two")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise DomainError(f"trace {tr!r} differs from 1")
    return rho


def _apply(op, psi):
    if isinstance(op, ExcitationSpectrum):
        diag = op.diagonal()
        if diag.size != psi.size:
            raise DomainError(f"spectrum of dimension {diag.size} vs state of length {psi.size}")
        return diag * psi
    if isinstance(op, DenseOperator) and op.is_diagonal:
        if op.dim != psi.size:
            raise DomainError(f"operator of dimension {op.dim} vs state of length {psi.size}")
        return op.data * psi
    a = as_matrix(op)
    if a.shape != (psi.size, psi.size):
        raise DomainError(f"operator of shape {a.shape} vs state of length {psi.size}")
    return a @ psi


def variance(psi, op) -> float:
    """``<A^2> - <A>^2`` for a pure state.

    ``op`` may be a dense matrix, a :class:`DenseOperator`, or an
    :class:`ExcitationSpectrum` (read as a diagonal operator).
    """
    psi = check_pure_state(psi)
    a_psi = _apply(op, psi)
    mean = np.vdot(psi, a_psi).real
    second = np.vdot(a_psi, a_psi).real
    var = second - mean**2
    if var < 0.0:
        if var < -PURE_ATOL * max(1.0, second):
            raise DomainError(f"negative variance {var!r}; operator is not Hermitian?")
        var = 0.0
    return float(var)


def qfi_pure(psi, op) -> QfiValue:
    """Fisher information of a pure state: four times the variance."""
    return QfiValue(4.0 * variance(psi, op), QfiMethod.PURE_VARIANCE)


def qfi_mixed(rho, op, method: str = "auto") -> QfiValue:
    r"""Fisher information from the eigen-decomposition of ``rho``.

    .. math:: F = 2 \sum_{k,l} \frac{(\lambda_k-\lambda_l)^2}{\lambda_k+\lambda_l} |\langle k|A|l\rangle|^2
    """
    rho = check_density_matrix(rho)
    a = check_hermitian(as_matrix(op), tol=1e-10)
    if a.shape != rho.shape:
        raise DomainError(f"operator shape {a.shape} vs density matrix {rho.shape}")
    lam, vecs = eigendecompose_hermitian(rho, method=method)
    if lam[0] < -PSD_ATOL:
        raise DomainError(f"density matrix has eigenvalue {lam[0]!r}")
    lam = np.clip(lam, 0.0, None)
    a_eig = vecs.conj().T @ a @ vecs
    lsum = lam[:, None] + lam[None, :]
    ldiff = lam[:, None] - lam[None, :]
    keep = lsum > EIGEN_SUM_CUTOFF
    weights = np.zeros_like(lsum)
    weights[keep] = ldiff[keep] ** 2 / lsum[keep]
    value = 2.0 * np.sum(weights * np.abs(a_eig) ** 2)
    return QfiValue(float(max(value, 0.0)), QfiMethod.MIXED_EIGEN)


def two_copy_variance(rho, op) -> float:
    """``Tr[(1 x A^2 - A x A)(rho x rho)]`` without building the doubled space.

    Both terms factorize over the copies:
    ``Tr[rho] Tr[rho A^2] - Tr[rho A]^2``.
    """
    rho = check_density_matrix(rho)
    a = as_matrix(op)
    if a.shape != rho.shape:
        raise DomainError(f"operator shape {a.shape} vs density matrix {rho.shape}")
    rho_a = rho @ a
    first = np.trace(rho).real * np.trace(rho_a @ a).real
    second = np.trace(rho_a).real ** 2
    var = first - second
    return float(0.0 if -PURE_ATOL < var < 0.0 else var)


def two_copy_variance_dense(rho, op) -> float:
    """Same quantity evaluated on the explicit ``4^N``-dimensional product; small N only."""
    rho = np.asarray(rho, dtype=complex)
    a = as_matrix(op)
    eye = np.eye(a.shape[0])
    w = np.kron(eye, a @ a) - np.kron(a, a)
    return float(np.trace(w @ np.kron(rho, rho)).real)


def variance_batch(psis, ops) -> np.ndarray:
    """Row-wise pure-state variances.

    ``psis`` has shape (S, d); ``ops`` is one (d, d) matrix or a stack (S, d, d).
    """
    psis = np.asarray(psis, dtype=complex)
    ops = np.asarray(ops)
    if ops.ndim == 2:
        a_psi = psis @ ops.T
    else:
        a_psi = np.einsum("sij,sj->si", ops, psis)
    mean = np.einsum("si,si->s", psis.conj(), a_psi).real
    second = np.einsum("si,si->s", a_psi.conj(), a_psi).real
    var = second - mean**2
    return np.where((var < 0.0) & (var > -PURE_ATOL), 0.0, var)
