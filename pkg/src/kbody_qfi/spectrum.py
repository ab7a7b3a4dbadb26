"""Excitation-sector spectra of the symmetric k-body Ising-like family.

A member of the family is a weighted sum over interaction orders ``k'`` of
all Pauli strings ``(n.sigma)^{i_1} x ... x (n.sigma)^{i_N}`` with exactly
``k'`` nontrivial factors.  Every such operator is constant on the set of
basis states with ``e`` local ``|1>`` factors, so the whole spectrum is the
``N + 1`` numbers ``Omega_e`` with multiplicities ``C(N, e)``.

Coupling weights multiply the per-order operators ``omega^{N,k'}``, each of
which is already scaled to operator norm ``N/2``.  Use
:func:`couplings_from_string_weights` when the weights are given per Pauli
string instead.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping

import numpy as np

from .exceptions import DegenerateSpecError, DomainError

MAX_QUBITS = 16


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return comb(n, k)


def _check_order(n: int, k_prime: int) -> None:
    if not 1 <= k_prime <= n:
        raise DomainError(f"interaction order {k_prime} outside [1, {n}]")


def _check_excitation(n: int, e: int) -> None:
    if not 0 <= e <= n:
        raise DomainError(f"excitation count {e} outside [0, {n}]")


def degeneracy(n: int, e: int) -> int:
    """Size of the excitation sector with ``e`` flipped qubits."""
    _check_excitation(n, e)
    return comb(n, e)


def omega_term_exact(n: int, k_prime: int, e: int) -> Fraction:
    """Exact eigenvalue of the normalized pure order-``k_prime`` term on sector ``e``."""
    _check_order(n, k_prime)
    _check_excitation(n, e)
    # alternating sum of integer binomials; divide once at the end
    num = sum((-1) ** j * _binom(e, j) * _binom(n - e, k_prime - j) for j in range(e + 1))
    return Fraction(n * num, 2 * comb(n, k_prime))


def omega_term(n: int, k_prime: int, e: int) -> float:
    """Eigenvalue ``omega_e^{N,k'}`` of the order-``k'`` term, normalized to ``N/2``.

    Examples
    --------
    >>> omega_term(3, 2, 1)
    -0.5
    >>> omega_term(4, 1, 2)
    0.0
    """
    return float(omega_term_exact(n, k_prime, e))


def _as_axis(axis) -> tuple[float, float, float]:
    if isinstance(axis, str):
        try:
            return {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}[axis.lower()]
        except KeyError:
            raise DomainError(f"unknown axis label {axis!r}") from None
    vec = tuple(float(a) for a in axis)
    if len(vec) != 3:
        raise DomainError("axis must be a 3-vector")
    return vec


@dataclass(frozen=True)
class HamiltonianSpec:
    """Symbolic description of one member of the family.

    Parameters
    ----------
    n_qubits : int
        Number of qubits ``N`` (2 to 16).
    couplings : mapping of int to float
        Weight of each normalized interaction order ``k'``.
    axis : 3-vector or {"x", "y", "z"}
        Direction ``n`` of the local operator ``n.sigma``.
    normalized : bool
        Rescale the total so that its operator norm is ``N/2``.
    """

    n_qubits: int
    couplings: Mapping[int, float]
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    normalized: bool = True

    def __post_init__(self):
        n = self.n_qubits
        if int(n) != n or not 2 <= n <= MAX_QUBITS:
            raise DomainError(f"n_qubits must be an integer in [2, {MAX_QUBITS}], got {n}")
        object.__setattr__(self, "n_qubits", int(n))
        couplings = {}
        for k, g in dict(self.couplings).items():
            if int(k) != k:
                raise DomainError(f"interaction order {k!r} is not an integer")
            _check_order(n, int(k))
            couplings[int(k)] = float(g)
        object.__setattr__(self, "couplings", dict(sorted(couplings.items())))
        axis = _as_axis(self.axis)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise DomainError(f"axis {axis} is not a unit vector")
        object.__setattr__(self, "axis", axis)
        if not any(g != 0.0 for g in couplings.values()):
            raise DegenerateSpecError("at least one coupling must be nonzero")

    @classmethod
    def pure_order(cls, n_qubits: int, k: int, axis="z", normalized: bool = True) -> "HamiltonianSpec":
        """The Hamiltonian with order-``k`` terms only."""
        return cls(n_qubits, {k: 1.0}, axis, normalized)

    @classmethod
    def up_to_order(cls, n_qubits: int, m: int, axis="z", normalized: bool = True) -> "HamiltonianSpec":
        """Canonical ``H_{k<=m}`` with unit weight on every normalized order."""
        return cls(n_qubits, {k: 1.0 for k in range(1, m + 1)}, axis, normalized)

    @property
    def is_diagonal(self) -> bool:
        return self.axis[0] == 0.0 and self.axis[1] == 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n_qubits,
            "couplings": {str(k): g for k, g in self.couplings.items()},
            "axis": list(self.axis),
            "normalized": self.normalized,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "HamiltonianSpec":
        try:
            return cls(
                n_qubits=data["n"],
                couplings={int(k): float(g) for k, g in data["couplings"].items()},
                axis=data.get("axis", (0.0, 0.0, 1.0)),
                normalized=bool(data.get("normalized", True)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise DomainError(f"malformed Hamiltonian spec: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "HamiltonianSpec":
        return cls.from_dict(json.loads(text))


def couplings_from_string_weights(n: int, weights: Mapping[int, float]) -> dict[int, float]:
    """Convert per-Pauli-string weights into per-order coupling weights.

    A weight ``w`` on every string of order ``k'`` equals ``w * C(N, k') / (N/2)``
    times the normalized order operator ``omega^{N,k'}``.
    """
    out = {}
    for k, w in weights.items():
        _check_order(n, k)
        out[int(k)] = float(w) * comb(n, k) * 2.0 / n
    return out


@dataclass(frozen=True)
class ExcitationSpectrum:
    """Eigenvalue per excitation sector together with sector sizes."""

    n_qubits: int
    omegas: np.ndarray
    degeneracies: np.ndarray
    norm_constant: float = 1.0
    spec: HamiltonianSpec | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        degs = np.asarray(self.degeneracies, dtype=np.int64)
        if omegas.shape != (self.n_qubits + 1,) or degs.shape != omegas.shape:
            raise DomainError("omegas and degeneracies must both have length n_qubits + 1")
        omegas.setflags(write=False)
        degs.setflags(write=False)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "degeneracies", degs)

    def expanded(self) -> np.ndarray:
        """All ``2^N`` eigenvalues, sorted ascending."""
        return np.sort(np.repeat(self.omegas, self.degeneracies))

    def diagonal(self) -> np.ndarray:
        """Diagonal in the lexicographic computational basis (qubit 0 most significant)."""
        n = self.n_qubits
        idx = np.arange(2**n, dtype=np.uint32)
        popcount = np.zeros(idx.shape, dtype=np.int64)
        for b in range(n):
            popcount += (idx >> b) & 1
        return self.omegas[popcount]

    def reversed(self) -> "ExcitationSpectrum":
        """Spectrum with the roles of ``|0>`` and ``|1>`` exchanged."""
        return ExcitationSpectrum(self.n_qubits, self.omegas[::-1].copy(), self.degeneracies, self.norm_constant)


def raw_spectrum(n: int, couplings: Mapping[int, float]) -> np.ndarray:
    """Weighted sum of order terms before any overall rescaling."""
    out = np.zeros(n + 1)
    for k, g in couplings.items():
        if g == 0.0:
            continue
        out += g * np.array([omega_term(n, k, e) for e in range(n + 1)])
    return out


def build_spectrum(spec: HamiltonianSpec) -> ExcitationSpectrum:
    """Sector spectrum of ``spec``; the local axis does not enter."""
    n = spec.n_qubits
    omegas = raw_spectrum(n, spec.couplings)
    peak = np.max(np.abs(omegas))
    if peak == 0.0:
        raise DegenerateSpecError("couplings cancel; the Hamiltonian is identically zero")
    norm = 1.0
    if spec.normalized:
        norm = (n / 2.0) / peak
        omegas = omegas * norm
    degs = np.array([comb(n, e) for e in range(n + 1)], dtype=np.int64)
    return ExcitationSpectrum(n, omegas, degs, norm, spec)


def as_spectrum(obj) -> ExcitationSpectrum:
    """Accept either a spectrum or a Hamiltonian description."""
    if isinstance(obj, ExcitationSpectrum):
        return obj
    if isinstance(obj, HamiltonianSpec):
        return build_spectrum(obj)
    raise TypeError(f"expected HamiltonianSpec or ExcitationSpectrum, got {type(obj).__name__}")
