"""Product-state Fisher information bounds for symmetric k-body Ising-like Hamiltonians."""
from .exceptions import ConvergenceError, DegenerateSpecError, DomainError, ResourceLimitError
from .oracle import DenseOperator, build_dense, eigendecompose_hermitian
from .product_opt import (
    OptimumReport,
    ProductStateParams,
    bound_b12,
    excitation_distribution,
    f_max_k2,
    optimize_full,
    optimize_symmetric,
    p_max_k2,
    stationarity_residuals,
    variance_product,
)
from .qfi import QfiValue, qfi_mixed, qfi_pure, two_copy_variance, variance
from .spectrum import (
    ExcitationSpectrum,
    HamiltonianSpec,
    build_spectrum,
    couplings_from_string_weights,
    degeneracy,
    omega_term,
)
from .witness import (
    MonteCarloReport,
    Verdict,
    WitnessReport,
    detect,
    gamma_scan,
    ising_with_field,
    monte_carlo_violation,
)

__version__ = "0.1.0"
