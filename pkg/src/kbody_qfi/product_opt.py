"""Variance of family Hamiltonians over pure product states, and its maximization.

For a Hamiltonian diagonal in the computational basis, a product state
``(x)_i (sqrt(p_i)|0> + e^{i phi_i} sqrt(1-p_i)|1>)`` enters the variance
only through the distribution of the number of ``|1>`` factors, a
Poisson-binomial law that is built here by an ``O(N^2)`` convolution.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from math import comb, sqrt

import numpy as np

from .exceptions import DomainError, ResourceLimitError
from .roots import solve_cubic
from .spectrum import ExcitationSpectrum, as_spectrum

logger = logging.getLogger(__name__)

# values closer than this (relative) count as the same maximum
TIE_RTOL = 1e-10
MAX_FULL_QUBITS = 13


class OptimumMethod(str, Enum):
    SYMMETRIC_SCAN = "SymmetricScan"
    MULTI_START_GRADIENT = "MultiStartGradient"
    CLOSED_FORM = "ClosedForm"
    STATIONARITY_SOLVE = "StationaritySolve"


@dataclass(frozen=True)
class ProductStateParams:
    """Local ``|0>`` probabilities of a pure product state."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).ravel()
        if probs.size == 0:
            raise DomainError("need at least one probability")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0.0) or np.any(probs > 1.0):
            raise DomainError(f"probabilities must lie in [0, 1], got {probs}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def symmetric(cls, n: int, p: float) -> "ProductStateParams":
        return cls(np.full(n, p))

    @property
    def n_qubits(self) -> int:
        return self.probs.size

    def state_vector(self, phases=None) -> np.ndarray:
        """Amplitudes in the lexicographic basis, qubit 0 most significant."""
        phases = np.zeros(self.n_qubits) if phases is None else np.asarray(phases, dtype=float)
        psi = np.ones(1, dtype=complex)
        for p, ph in zip(self.probs, phases):
            psi = np.kron(psi, np.array([sqrt(p), np.exp(1j * ph) * sqrt(1.0 - p)]))
        return psi


@dataclass(frozen=True)
class OptimumReport:
    best_params: ProductStateParams
    best_qfi: float
    method: OptimumMethod
    stationarity_residual: float
    n_starts: int = 1
    history: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "best_params": [float(p) for p in self.best_params.probs],
            "best_qfi": float(self.best_qfi),
            "method": self.method.value,
            "stationarity_residual": float(self.stationarity_residual),
            "n_starts": int(self.n_starts),
        }


def _as_probs(params) -> np.ndarray:
    if isinstance(params, ProductStateParams):
        return params.probs
    return ProductStateParams(params).probs


def _distribution(probs: np.ndarray) -> np.ndarray:
    """Batched excitation distribution; ``probs`` has shape (..., N)."""
    shape = probs.shape[:-1]
    n = probs.shape[-1]
    dist = np.zeros(shape + (n + 1,))
    dist[..., 0] = 1.0
    for i in range(n):
        p = probs[..., i, None]
        shifted = np.zeros_like(dist)
        shifted[..., 1:] = dist[..., :-1]
        dist = p * dist + (1.0 - p) * shifted
    return dist


def excitation_distribution(params) -> np.ndarray:
    """Probability of finding ``e`` qubits in ``|1>``, for ``e = 0..N``.

    Coefficients of ``prod_i (p_i + (1 - p_i) x)``.

    >>> excitation_distribution([0.5, 0.5, 0.5])
    array([0.125, 0.375, 0.375, 0.125])
    """
    return _distribution(_as_probs(params))


def _check_lengths(spectrum: ExcitationSpectrum, n: int) -> None:
    if spectrum.n_qubits != n:
        raise DomainError(f"spectrum for {spectrum.n_qubits} qubits vs {n} probabilities")


def _variance_batch(omegas: np.ndarray, probs: np.ndarray) -> np.ndarray:
    dist = _distribution(probs)
    mean = dist @ omegas
    var = dist @ (omegas**2) - mean**2
    return np.maximum(var, 0.0)


def variance_product(spectrum, params) -> float:
    """Variance of the Hamiltonian in the product state with ``|0>`` probabilities ``params``."""
    spectrum = as_spectrum(spectrum)
    probs = _as_probs(params)
    _check_lengths(spectrum, probs.size)
    return float(_variance_batch(spectrum.omegas, probs))


def qfi_product(spectrum, params) -> float:
    return 4.0 * variance_product(spectrum, params)


def _leave_one_out(probs: np.ndarray) -> np.ndarray:
    """Distributions with qubit ``i`` removed; shape (..., N, N)."""
    n = probs.shape[-1]
    out = []
    for i in range(n):
        others = np.delete(probs, i, axis=-1)
        out.append(_distribution(others))
    return np.stack(out, axis=-2)


def _gradient_batch(omegas: np.ndarray, probs: np.ndarray):
    dist = _distribution(probs)
    mean = dist @ omegas
    var = dist @ (omegas**2) - mean**2
    loo = _leave_one_out(probs)
    # d P(e) / d p_i = Q_i(e) - Q_i(e - 1), so sum_e dP(e) f(e) = sum_e Q_i(e) (f(e) - f(e + 1))
    d1 = omegas[:-1] - omegas[1:]
    d2 = omegas[:-1] ** 2 - omegas[1:] ** 2
    grad = loo @ d2 - 2.0 * mean[..., None] * (loo @ d1)
    return np.maximum(var, 0.0), grad


def stationarity_residuals(spectrum, params) -> np.ndarray:
    """Partial derivatives of the variance with respect to each ``p_i``.

    These vanish at interior stationary points of the product-state variance.
    """
    spectrum = as_spectrum(spectrum)
    probs = _as_probs(params)
    _check_lengths(spectrum, probs.size)
    return _gradient_batch(spectrum.omegas, probs)[1]


def _projected_gradient(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.clip(x + g, 0.0, 1.0) - x


def projected_gradient_norm(spectrum, params) -> float:
    spectrum = as_spectrum(spectrum)
    probs = _as_probs(params)
    g = stationarity_residuals(spectrum, probs)
    return float(np.max(np.abs(_projected_gradient(probs, g))))


# --- symmetric ansatz -------------------------------------------------------


def _binomial_rows(m: int, p: np.ndarray) -> np.ndarray:
    """``C(m, e) p^(m-e) (1-p)^e`` for each p (rows) and e = 0..m (columns)."""
    p = np.asarray(p, dtype=float)[..., None]
    e = np.arange(m + 1)
    coef = np.array([comb(m, j) for j in range(m + 1)], dtype=float)
    return coef * p ** (m - e) * (1.0 - p) ** e


def _symmetric_derivs(omegas: np.ndarray, p):
    """Variance on ``p_i = p`` with its first two derivatives in ``p``."""
    n = omegas.size - 1
    om2 = omegas**2
    d1 = omegas[:-1] - omegas[1:]
    d2 = om2[:-1] - om2[1:]
    b_n = _binomial_rows(n, p)
    b_n1 = _binomial_rows(n - 1, p)
    mean = b_n @ omegas
    var = b_n @ om2 - mean**2
    mean_p = n * (b_n1 @ d1)
    var_p = n * (b_n1 @ d2) - 2.0 * mean * mean_p
    if n >= 2:
        b_n2 = _binomial_rows(n - 2, p)
        dd1 = d1[:-1] - d1[1:]
        dd2 = d2[:-1] - d2[1:]
        mean_pp = n * (n - 1) * (b_n2 @ dd1)
        var_pp = n * (n - 1) * (b_n2 @ dd2) - 2.0 * mean_p**2 - 2.0 * mean * mean_pp
    else:
        var_pp = -2.0 * mean_p**2
    return var, var_p, var_pp


def symmetric_variance(spectrum, p) -> np.ndarray:
    """Variance on the identical-factor product state, vectorized over ``p``."""
    return _symmetric_derivs(as_spectrum(spectrum).omegas, p)[0]


def _polish_symmetric(omegas, lo, hi, p0, tol=1e-12, max_iter=200):
    """Safeguarded Newton on the derivative inside ``[lo, hi]``."""
    f_lo = _symmetric_derivs(omegas, lo)[1]
    f_hi = _symmetric_derivs(omegas, hi)[1]
    bracketed = f_lo >= 0.0 >= f_hi
    p = p0
    for _ in range(max_iter):
        _, d1, d2 = _symmetric_derivs(omegas, p)
        if abs(d1) < tol:
            break
        if bracketed:
            if d1 > 0.0:
                lo = p
            else:
                hi = p
        step_ok = d2 < 0.0
        if step_ok:
            new = p - d1 / d2
            step_ok = lo <= new <= hi
        if not step_ok:
            if not bracketed:
                break
            new = 0.5 * (lo + hi)
        if new == p or hi - lo < 1e-16:
            p = new
            break
        p = new
    return float(p)


def _pick(candidates):
    """Best ``(value, key, payload)`` under the tie rule: larger key wins among near-equal values."""
    top = max(c[0] for c in candidates)
    tied = [c for c in candidates if c[0] >= top - TIE_RTOL * max(1.0, abs(top))]
    return max(tied, key=lambda c: c[1])


def optimize_symmetric(spectrum, grid_size: int = 10_000) -> OptimumReport:
    """Maximize the Fisher information over identical product states ``p_i = p``.

    A dense grid on ``[0, 1]`` locates the maxima; each interior grid maximum
    is refined by safeguarded Newton on the derivative.
    """
    spectrum = as_spectrum(spectrum)
    omegas = spectrum.omegas
    n = spectrum.n_qubits
    grid = np.linspace(0.0, 1.0, grid_size)
    values = _symmetric_derivs(omegas, grid)[0]
    top = values.max()
    # local maxima of the sampled curve that are close to the global one
    padded = np.concatenate(([-np.inf], values, [-np.inf]))
    is_peak = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:])
    peaks = np.flatnonzero(is_peak & (values >= top - 1e-6 * max(1.0, abs(top))))
    candidates = []
    for i in peaks:
        if 0 < i < grid_size - 1:
            p = _polish_symmetric(omegas, grid[i - 1], grid[i + 1], grid[i])
        else:
            p = float(grid[i])
        val = float(_symmetric_derivs(omegas, p)[0])
        candidates.append((val, (p,), p))
    val, _, p = _pick(candidates)
    params = ProductStateParams.symmetric(n, p)
    return OptimumReport(
        best_params=params,
        best_qfi=4.0 * max(val, 0.0),
        method=OptimumMethod.SYMMETRIC_SCAN,
        stationarity_residual=projected_gradient_norm(spectrum, params),
    )


# --- full product-state optimization ---------------------------------------


def _hessian_batch(omegas: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Second derivatives of the variance; shape (..., N, N).

    The distribution is affine in each ``p_i``, so mixed terms come from
    leave-two-out distributions and second differences of the spectrum.
    """
    n = probs.shape[-1]
    dist = _distribution(probs)
    mean = dist @ omegas
    loo = _leave_one_out(probs)
    d1 = omegas[:-1] - omegas[1:]
    mean_i = loo @ d1
    om2 = omegas**2
    dd1 = omegas[:-2] - 2.0 * omegas[1:-1] + omegas[2:]
    dd2 = om2[:-2] - 2.0 * om2[1:-1] + om2[2:]
    second = np.zeros(probs.shape + (n,))
    mean_ij = np.zeros(probs.shape + (n,))
    for i in range(n):
        for j in range(i + 1, n):
            r = _distribution(np.delete(probs, [i, j], axis=-1))
            second[..., i, j] = second[..., j, i] = r @ dd2
            mean_ij[..., i, j] = mean_ij[..., j, i] = r @ dd1
    return second - 2.0 * mean_i[..., :, None] * mean_i[..., None, :] - 2.0 * mean[..., None, None] * mean_ij


def _ascend(omegas, x0, tol=1e-7, max_iter=10_000, armijo=1e-4):
    """Batched projected gradient ascent on ``[0, 1]^N``.

    Barzilai-Borwein trial steps with backtracking; each row of ``x0`` is an
    independent start.
    """
    x = np.clip(np.array(x0, dtype=float), 0.0, 1.0)
    f, g = _gradient_batch(omegas, x)
    step = np.ones(x.shape[0])
    n_iter = np.zeros(x.shape[0], dtype=int)
    active = np.ones(x.shape[0], dtype=bool)
    for _ in range(max_iter):
        pg = np.max(np.abs(_projected_gradient(x, g)), axis=1)
        active &= pg >= tol
        if not active.any():
            break
        idx = np.flatnonzero(active)
        xa, fa, ga, sa = x[idx], f[idx], g[idx], step[idx]
        pending = np.ones(idx.size, dtype=bool)
        x_new, f_new, g_new = xa.copy(), fa.copy(), ga.copy()
        for _ in range(40):
            if not pending.any():
                break
            j = np.flatnonzero(pending)
            trial = np.clip(xa[j] + sa[j, None] * ga[j], 0.0, 1.0)
            ft, gt = _gradient_batch(omegas, trial)
            gain = np.einsum("ij,ij->i", ga[j], trial - xa[j])
            ok = ft >= fa[j] + armijo * gain
            done = j[ok]
            x_new[done], f_new[done], g_new[done] = trial[ok], ft[ok], gt[ok]
            pending[done] = False
            sa[j[~ok]] *= 0.5
        # no sufficient increase left at working precision; hand over to Newton
        active[idx[pending]] = False
        s = x_new - xa
        y = g_new - ga
        sy = -np.einsum("ij,ij->i", s, y)
        ss = np.einsum("ij,ij->i", s, s)
        bb = np.where(sy > 1e-300, ss / np.where(sy > 1e-300, sy, 1.0), 1e3)
        step[idx] = np.clip(bb, 1e-8, 1e8)
        x[idx], f[idx], g[idx] = x_new, f_new, g_new
        n_iter[idx] += 1
    return x, f, g, n_iter


def _newton_polish(omegas, x, f, g, tol=1e-10, max_iter=50):
    """Projected Newton steps on the free coordinates of each row.

    Uses a pseudo-inverse so that flat directions of degenerate maxima are
    left alone.  A step is kept only if the value does not drop beyond
    rounding and the projected gradient shrinks.
    """
    x, f, g = x.copy(), f.copy(), g.copy()
    pg = np.max(np.abs(_projected_gradient(x, g)), axis=1)
    for row in range(x.shape[0]):
        xr, fr, gr, pr = x[row], f[row], g[row], pg[row]
        for _ in range(max_iter):
            if pr < tol:
                break
            free = ~(((xr <= 0.0) & (gr < 0.0)) | ((xr >= 1.0) & (gr > 0.0)))
            if not free.any():
                break
            hess = _hessian_batch(omegas, xr)
            d = np.zeros_like(xr)
            d[free] = -np.linalg.pinv(hess[np.ix_(free, free)], rcond=1e-12) @ gr[free]
            trial = np.clip(xr + d, 0.0, 1.0)
            ft, gt = _gradient_batch(omegas, trial)
            pt = np.max(np.abs(_projected_gradient(trial, gt)))
            if ft < fr - 1e-13 * max(1.0, abs(fr)) or pt >= pr:
                break
            xr, fr, gr, pr = trial, float(ft), gt, pt
        x[row], f[row], g[row], pg[row] = xr, fr, gr, pr
    return x, f, pg


def _starts(n, spectrum, n_starts, rng):
    sym = optimize_symmetric(spectrum).best_params.probs
    starts = [sym]
    delta = 0.05
    for i in range(n):
        for sign in (1.0, -1.0):
            s = sym.copy()
            s[i] = np.clip(s[i] + sign * delta, 0.0, 1.0)
            starts.append(s)
    n_random = max(n_starts - len(starts), 0)
    starts = np.array(starts)
    if n_random:
        starts = np.vstack([starts, rng.uniform(0.0, 1.0, size=(n_random, n))])
    return starts


def optimize_full(spectrum, n_starts: int = 100, seed=None, tol: float = 1e-10,
                  max_iter: int = 10_000) -> OptimumReport:
    """Maximize the Fisher information over all pure product states.

    Starts are the symmetric optimum with its ``2N`` single-coordinate
    perturbations; uniform random points fill the rest of ``n_starts``.
    Among maxima equal within :data:`TIE_RTOL` the lexicographically largest
    probability vector is reported.
    """
    spectrum = as_spectrum(spectrum)
    n = spectrum.n_qubits
    if n > MAX_FULL_QUBITS:
        raise ResourceLimitError(f"full optimization is supported up to {MAX_FULL_QUBITS} qubits, got {n}")
    if n_starts < 1:
        raise DomainError("n_starts must be positive")
    rng = np.random.default_rng(seed)
    starts = _starts(n, spectrum, n_starts, rng)
    x, f, g, n_iter = _ascend(spectrum.omegas, starts, tol=max(tol, 1e-7), max_iter=max_iter)
    x, f, pg = _newton_polish(spectrum.omegas, x, f, g, tol=tol)
    logger.debug("optimize_full: n=%d starts=%d max iterations=%d", n, len(starts), n_iter.max())
    candidates = [(float(fi), tuple(xi), i) for i, (fi, xi) in enumerate(zip(f, x))]
    val, _, i = _pick(candidates)
    return OptimumReport(
        best_params=ProductStateParams(x[i]),
        best_qfi=4.0 * val,
        method=OptimumMethod.MULTI_START_GRADIENT,
        stationarity_residual=float(pg[i]),
        n_starts=len(starts),
    )


# --- closed forms for one- and two-body terms -------------------------------


def _check_n3(n: int) -> None:
    if int(n) != n or n < 3:
        raise DomainError(f"closed forms need n >= 3, got {n}")


def variance_symmetric_k2(n: int, p):
    """Two-body variance on ``p_i = p`` as an explicit quartic."""
    _check_n3(n)
    p = np.asarray(p, dtype=float)
    poly = -2 * n * (2 * n - 3) * p**4 + 4 * n * (2 * n - 3) * p**3 - n * (5 * n - 7) * p**2 + n * (n - 1) * p
    return 4.0 / (n - 1) * poly


def p_max_k2(n: int) -> float:
    """Optimal identical ``|0>`` probability for the pure two-body Hamiltonian."""
    _check_n3(n)
    return (2 * n - 3 + sqrt(2 * n * n - 7 * n + 6)) / (4 * n - 6)


def f_max_k2(n: int) -> float:
    """Largest product-state Fisher information for the pure two-body Hamiltonian."""
    _check_n3(n)
    return 2.0 * n * (n - 1) / (2 * (n - 2) + 1)


def _b12_coeffs(n: int):
    # -16 N p (p - 1) / (N+1)^2 * (A + C p + B p^2), expanded in powers of p
    a = (n - 2) ** 2
    b = 2 * (n - 1) * (2 * n - 3)
    c = -2 * (n - 1) * (2 * n - 5)
    k = -16.0 * n / (n + 1) ** 2
    return k, (b, c - b, a - c, -a, 0)


def b12_polynomial(n: int, p):
    _check_n3(n)
    k, coeffs = _b12_coeffs(n)
    return k * np.polyval(coeffs, np.asarray(p, dtype=float))


def bound_b12_argmax(n: int) -> tuple[float, float]:
    """Maximizer and maximum of the one-plus-two-body bound polynomial on ``[0, 1]``."""
    _check_n3(n)
    k, (c4, c3, c2, c1, _) = _b12_coeffs(n)
    cands = [0.0, 1.0]
    try:
        roots = solve_cubic(4.0 * c4, 3.0 * c3, 2.0 * c2, float(c1))
        cands += [r for r in roots if 0.0 <= r <= 1.0]
    except (ValueError, ArithmeticError):
        roots = []
    if len(cands) == 2:
        grid = np.linspace(0.0, 1.0, 100_001)
        cands.append(float(grid[np.argmax(b12_polynomial(n, grid))]))
    vals = [float(b12_polynomial(n, p)) for p in cands]
    j = int(np.argmax(vals))
    return cands[j], vals[j]


def bound_b12(n: int) -> float:
    """Largest product-state Fisher information when only one- and two-body terms are present."""
    return bound_b12_argmax(n)[1]


def scan_orders(n_values, k_max: int = 5, n_starts: int = 100, seed: int = 0) -> list[tuple[int, int, float]]:
    """Largest product-state Fisher information of each pure order ``k <= min(k_max, N)``.

    Returns ``(N, k, max_qfi)`` rows; each problem gets its own child seed.
    """
    from concurrent.futures import ThreadPoolExecutor

    from ._config import max_workers
    from .spectrum import HamiltonianSpec, build_spectrum

    jobs = [(int(n), k) for n in n_values for k in range(1, min(k_max, int(n)) + 1)]
    seeds = np.random.SeedSequence(seed).spawn(len(jobs))

    def run(job):
        (n, k), ss = job
        spectrum = build_spectrum(HamiltonianSpec.pure_order(n, k))
        return optimize_full(spectrum, n_starts=n_starts, seed=np.random.default_rng(ss)).best_qfi

    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        values = list(pool.map(run, zip(jobs, seeds)))
    return [(n, k, v) for (n, k), v in zip(jobs, values)]
