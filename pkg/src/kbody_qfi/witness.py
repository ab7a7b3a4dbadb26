"""Certifying three-body terms from product-state Fisher information.

Within the family, a Hamiltonian with only one- and two-body terms cannot
give a product state Fisher information above ``bound_b12(N)``.  Observing
more certifies at least three-body couplings.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import norm

from ._config import max_workers
from .exceptions import DomainError
from .oracle import build_dense
from .product_opt import bound_b12, optimize_full
from .qfi import variance_batch
from .spectrum import HamiltonianSpec, build_spectrum, couplings_from_string_weights, raw_spectrum

logger = logging.getLogger(__name__)

MC_CHUNK = 4096
# computed values equal to the bound up to round-off are not violations
ROUNDING_RTOL = 1e-10


class Verdict(str, Enum):
    AT_LEAST_THREE_LOCAL = "AtLeastThreeLocal"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class WitnessReport:
    n_qubits: int
    bound: float
    observed_qfi: float
    verdict: Verdict

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "bound": self.bound,
            "observed_qfi": self.observed_qfi,
            "verdict": self.verdict.value,
        }


def detect(observed_qfi: float, n: int) -> WitnessReport:
    """Compare an observed product-state Fisher information with the two-body bound.

    Only a strict excess certifies three-body terms.
    """
    if observed_qfi < 0 or not np.isfinite(observed_qfi):
        raise DomainError(f"observed QFI must be finite and nonnegative, got {observed_qfi}")
    bound = bound_b12(n)
    verdict = Verdict.AT_LEAST_THREE_LOCAL if observed_qfi > bound else Verdict.INCONCLUSIVE
    return WitnessReport(int(n), bound, float(observed_qfi), verdict)


def ising_with_field(n: int, gamma3: float, axis="x") -> HamiltonianSpec:
    """Fully connected Ising model with tuned field plus a three-body admixture.

    Every one-, two- and three-body Pauli string carries weight 1, 1 and
    ``gamma3`` respectively, and the sum is rescaled to norm ``N/2``.
    """
    if n < 3:
        raise DomainError(f"three-body terms need n >= 3, got {n}")
    if gamma3 < 0:
        raise DomainError(f"gamma3 must be nonnegative, got {gamma3}")
    couplings = couplings_from_string_weights(n, {1: 1.0, 2: 1.0, 3: float(gamma3)})
    return HamiltonianSpec(n, couplings, axis=axis, normalized=True)


def exceeds_bound(value, bound: float):
    """Strict excess over ``bound`` for numerically computed values."""
    return np.asarray(value) > bound + ROUNDING_RTOL * max(1.0, abs(bound))


class ScanRow(NamedTuple):
    gamma3: float
    max_product_qfi: float
    bound: float
    violated: bool


def _scan_point(n, gamma3, n_starts, seed_seq):
    # the local rotation to the diagonal basis maps product states to product states
    spec = ising_with_field(n, gamma3)
    report = optimize_full(build_spectrum(spec), n_starts=n_starts, seed=np.random.default_rng(seed_seq))
    return report.best_qfi


def gamma_scan(n: int, gamma3_grid: Sequence[float], n_starts: int = 100, seed: int = 0) -> list[ScanRow]:
    """Largest product-state Fisher information along a grid of three-body weights."""
    grid = [float(g) for g in gamma3_grid]
    if not grid:
        raise DomainError("gamma3 grid is empty")
    bound = bound_b12(n)
    seeds = np.random.SeedSequence(seed).spawn(len(grid))
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        values = list(pool.map(lambda a: _scan_point(n, *a), [(g, n_starts, s) for g, s in zip(grid, seeds)]))
    return [ScanRow(g, v, bound, bool(exceeds_bound(v, bound))) for g, v in zip(grid, values)]


@dataclass(frozen=True)
class MonteCarloReport:
    n_qubits: int
    samples: int
    violations: int
    frequency: float
    wilson_interval_95: tuple[float, float]
    seed: int
    max_observed_qfi: float

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "samples": self.samples,
            "violations": self.violations,
            "frequency": self.frequency,
            "wilson_interval_95": list(self.wilson_interval_95),
            "seed": self.seed,
            "max_observed_qfi": self.max_observed_qfi,
        }


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    z = norm.ppf(0.5 + confidence / 2.0)
    phat = successes / trials
    denom = 1.0 + z**2 / trials
    centre = (phat + z**2 / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z**2 / (4 * trials**2)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return float(lo), float(hi)


class IsingFamily:
    """Dense operators of ``ising_with_field(n, g)`` for many ``g`` at once.

    The unnormalized operator is affine in ``g``; only the overall scale
    needs recomputing per sample.
    """

    def __init__(self, n: int, axis="x"):
        self.n = n
        base = couplings_from_string_weights(n, {1: 1.0, 2: 1.0})
        extra = couplings_from_string_weights(n, {3: 1.0})
        self.base = build_dense(HamiltonianSpec(n, base, axis=axis, normalized=False)).toarray()
        self.extra = build_dense(HamiltonianSpec(n, extra, axis=axis, normalized=False)).toarray()
        self.base_spec = raw_spectrum(n, base)
        self.extra_spec = raw_spectrum(n, extra)

    def scale(self, gamma3) -> np.ndarray:
        gamma3 = np.asarray(gamma3, dtype=float)
        peaks = np.max(np.abs(self.base_spec + gamma3[..., None] * self.extra_spec), axis=-1)
        return (self.n / 2.0) / peaks

    def operators(self, gamma3) -> np.ndarray:
        gamma3 = np.asarray(gamma3, dtype=float)
        s = self.scale(gamma3)[:, None, None]
        return s * (self.base[None] + gamma3[:, None, None] * self.extra[None])

    def qfi(self, gamma3, states) -> np.ndarray:
        return 4.0 * variance_batch(states, self.operators(gamma3))


def haar_product_states(rng: np.random.Generator, size: int, n: int):
    """Independent Haar-random qubits; returns ``(states, probs, phases)``.

    ``|<0|q>|^2`` of a Haar-random qubit is uniform on ``[0, 1]``.
    """
    probs = rng.uniform(0.0, 1.0, size=(size, n))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(size, n))
    states = np.ones((size, 1), dtype=complex)
    for i in range(n):
        local = np.stack([np.sqrt(probs[:, i]), np.exp(1j * phases[:, i]) * np.sqrt(1.0 - probs[:, i])], axis=1)
        states = np.einsum("si,sj->sij", states, local).reshape(size, -1)
    return states, probs, phases


def _mc_chunk(family, n, seed, index, size, gamma3_range, bound):
    # chunk index is the counter; results do not depend on scheduling
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    lo, hi = gamma3_range
    gammas = rng.uniform(lo, hi, size=size) if hi > lo else np.full(size, float(lo))
    states, _, _ = haar_product_states(rng, size, n)
    values = family.qfi(gammas, states)
    return int(np.count_nonzero(exceeds_bound(values, bound))), float(values.max())


def monte_carlo_violation(n: int = 3, samples: int = 100_000, seed: int = 0,
                          gamma3_range: tuple[float, float] = (0.0, 1.0)) -> MonteCarloReport:
    """Fraction of random (three-body weight, product state) draws that beat the bound."""
    if samples < 1:
        raise DomainError("samples must be >= 1")
    lo, hi = gamma3_range
    if not 0.0 <= lo <= hi:
        raise DomainError(f"invalid gamma3 range {gamma3_range}")
    family = IsingFamily(n)
    bound = bound_b12(n)
    sizes = [min(MC_CHUNK, samples - start) for start in range(0, samples, MC_CHUNK)]
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        results = list(pool.map(
            lambda a: _mc_chunk(family, n, seed, a[0], a[1], (lo, hi), bound), enumerate(sizes)
        ))
    violations = sum(r[0] for r in results)
    top = max(r[1] for r in results)
    logger.info("monte carlo: %d/%d violations (n=%d, seed=%d)", violations, samples, n, seed)
    return MonteCarloReport(
        n_qubits=n,
        samples=samples,
        violations=violations,
        frequency=violations / samples,
        wilson_interval_95=wilson_interval(violations, samples),
        seed=int(seed),
        max_observed_qfi=top,
    )
