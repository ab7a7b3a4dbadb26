"""scikit-learn style wrappers around the functional core.

These let the optimizers and the witness sit inside pipelines, grid
searches and ``clone``; all numerics live in the underlying modules.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DomainError
from .product_opt import _variance_batch, bound_b12, optimize_full, optimize_symmetric
from .spectrum import as_spectrum


def check_probabilities(X, n_qubits=None) -> np.ndarray:
    """Validate a (n_samples, N) array of local ``|0>`` probabilities."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if n_qubits is not None and X.shape[1] != n_qubits:
        raise DomainError(f"expected {n_qubits} columns, got {X.shape[1]}")
    if np.any(X < 0.0) or np.any(X > 1.0):
        raise DomainError("probabilities must lie in [0, 1]")
    return X


class ProductStateQFI(TransformerMixin, BaseEstimator):
    """Map rows of local probabilities to product-state Fisher information.

    Parameters
    ----------
    hamiltonian : HamiltonianSpec or ExcitationSpectrum
        Generator whose Fisher information is evaluated.
    """

    def __init__(self, hamiltonian=None):
        self.hamiltonian = hamiltonian

    def fit(self, X=None, y=None):
        if self.hamiltonian is None:
            raise DomainError("hamiltonian must be set before fitting")
        self.spectrum_ = as_spectrum(self.hamiltonian)
        self.n_features_in_ = self.spectrum_.n_qubits
        return self

    def transform(self, X):
        check_is_fitted(self, "spectrum_")
        X = check_probabilities(X, self.n_features_in_)
        return 4.0 * _variance_batch(self.spectrum_.omegas, X)[:, None]


class ProductStateMaximizer(BaseEstimator):
    """Find the product state with the largest Fisher information.

    ``fit`` takes the Hamiltonian itself as ``X``.  After fitting,
    ``max_qfi_``, ``best_params_`` and ``report_`` hold the result.

    Parameters
    ----------
    method : {"full", "symmetric"}
        Search all product states or only identical single-qubit factors.
    n_starts : int
        Multi-start budget for ``method="full"``.
    random_state : int, Generator or None
    """

    def __init__(self, method="full", n_starts=100, random_state=None):
        self.method = method
        self.n_starts = n_starts
        self.random_state = random_state

    def fit(self, X, y=None):
        spectrum = as_spectrum(X)
        if self.method == "full":
            rs = self.random_state
            seed = rs if isinstance(rs, np.random.Generator) else check_random_state(rs).randint(2**31)
            report = optimize_full(spectrum, n_starts=self.n_starts, seed=seed)
        elif self.method == "symmetric":
            report = optimize_symmetric(spectrum)
        else:
            raise DomainError(f"unknown method {self.method!r}")
        self.report_ = report
        self.max_qfi_ = report.best_qfi
        self.best_params_ = np.asarray(report.best_params.probs)
        return self


class ThreeBodyWitness(ClassifierMixin, BaseEstimator):
    """Threshold classifier: does an observed Fisher information certify three-body terms?

    ``predict`` returns ``True`` for values strictly above the one-plus-two-body
    bound for ``n_qubits``.
    """

    def __init__(self, n_qubits=3):
        self.n_qubits = n_qubits

    def fit(self, X=None, y=None):
        self.bound_ = bound_b12(self.n_qubits)
        self.classes_ = np.array([False, True])
        return self

    def decision_function(self, X):
        check_is_fitted(self, "bound_")
        X = check_array(np.asarray(X, dtype=float).reshape(-1, 1), dtype=np.float64)
        return X[:, 0] - self.bound_

    def predict(self, X):
        return self.decision_function(X) > 0.0
