"""Analytic PH measurement statistics.

Expectation and variance are evaluated two ways: as traces
``Tr[rho eta H]`` / ``Tr[rho eta (H - <H>)^2]`` and as spectral sums over the
eta-orthonormal eigenbasis weighted by ``p_kk`` and the signs ``s_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TOL_REL, PHObservable, QuantumState, fro
from .errors import DimensionMismatch, NotPseudoHermitian
from .spectral import PHSpectrum


def _rho_eta(state: QuantumState, h: PHObservable) -> tuple[np.ndarray, bool]:
    return state.eta_normalized(h.metric)


def _real(z: complex, scale: float, what: str) -> float:
    if abs(z.imag) > TOL_REL * max(scale, 1.0):
        raise NotPseudoHermitian(
            f"{what} has an imaginary part {z.imag:.3e}; observable is not PH", imag=z.imag
        )
    return float(z.real)


def expectation(h: PHObservable, state: QuantumState) -> float:
    """``<H>_eta = Tr[rho eta H]`` with ``rho`` eta-normalized on demand."""
    rho, _ = _rho_eta(state, h)
    z = complex(np.trace(rho @ h.metric.eta @ h.matrix))
    return _real(z, fro(h.matrix), "expectation")


def variance(h: PHObservable, state: QuantumState) -> float:
    """``Tr[rho eta (H - <H>)^2]``; negative values are possible for indefinite eta."""
    rho, _ = _rho_eta(state, h)
    mean = expectation(h, state)
    X = h.matrix - mean * np.eye(h.dim)
    z = complex(np.trace(rho @ h.metric.eta @ X @ X))
    return _real(z, fro(X) ** 2, "variance")


def correlation(a: PHObservable, b: PHObservable, state: QuantumState) -> complex:
    """``<AB>_eta = Tr[rho eta A B]``; complex in general."""
    rho, _ = _rho_eta(state, a)
    return complex(np.trace(rho @ a.metric.eta @ a.matrix @ b.matrix))


@dataclass(frozen=True, eq=False)
class DecompositionCoefficients:
    p: np.ndarray
    signs: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        """Real diagonal ``p_kk``."""
        return np.diag(self.p).real.copy()

    def eta_trace(self) -> float:
        """``sum_k s_k p_kk``, equal to ``Tr[rho eta]``."""
        return float(np.sum(self.signs * self.populations))


def decomposition_coefficients(spectrum: PHSpectrum, state: QuantumState) -> DecompositionCoefficients:
    """``p_kl = <E_k|eta rho eta|E_l> / (<E_k|eta|E_k> <E_l|eta|E_l>)``."""
    if state.dim != spectrum.dim:
        raise DimensionMismatch(
            f"state has dim {state.dim}, spectrum has dim {spectrum.dim}",
            state_dim=state.dim,
            spectrum_dim=spectrum.dim,
        )
    rho, _ = state.eta_normalized(spectrum.metric)
    E = spectrum.eigenvectors
    eta = spectrum.metric.eta
    s = spectrum.signs
    p = (E.conj().T @ eta @ rho @ eta @ E) / np.outer(s, s)
    return DecompositionCoefficients(p, s.copy())


def reconstruct_state(spectrum: PHSpectrum, coeffs: DecompositionCoefficients) -> np.ndarray:
    """``sum_kl p_kl |E_k><E_l|``."""
    E = spectrum.eigenvectors
    return E @ coeffs.p @ E.conj().T


def spectral_expectation(spectrum: PHSpectrum, coeffs: DecompositionCoefficients) -> float:
    return float(np.sum(coeffs.populations * coeffs.signs * spectrum.eigenvalues))


def spectral_variance(spectrum: PHSpectrum, coeffs: DecompositionCoefficients) -> float:
    m = spectral_expectation(spectrum, coeffs)
    return float(np.sum(coeffs.populations * coeffs.signs * (spectrum.eigenvalues - m) ** 2))


@dataclass(frozen=True)
class MeasurementStatistics:
    expectation: float
    variance: float
    populations: np.ndarray
    signs: np.ndarray
    eigenvalues: np.ndarray
    renormalized: bool


def measure(h: PHObservable, spectrum: PHSpectrum, state: QuantumState) -> MeasurementStatistics:
    """Trace-form statistics plus populations; flags on-demand eta-normalization."""
    _, renorm = state.eta_normalized(h.metric)
    coeffs = decomposition_coefficients(spectrum, state)
    return MeasurementStatistics(
        expectation(h, state),
        variance(h, state),
        coeffs.populations,
        spectrum.signs.copy(),
        spectrum.eigenvalues.copy(),
        renorm,
    )


@dataclass(frozen=True, eq=False)
class EffectSet:
    effects: list[np.ndarray]

    def total(self) -> np.ndarray:
        return np.sum(self.effects, axis=0)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        """``Tr[rho M_k]`` for an explicit (already normalized) density matrix."""
        return np.array([np.trace(rho @ M).real for M in self.effects])


def effect_set(spectrum: PHSpectrum) -> EffectSet:
    """``M_k = eta |E_k><E_k| eta / <E_k|eta|E_k>``; the set sums to ``eta``."""
    eta = spectrum.metric.eta
    effects = []
    for k in range(spectrum.dim):
        u = eta @ spectrum.vector(k)
        effects.append(spectrum.signs[k] * np.outer(u, u.conj()))
    return EffectSet(effects)

