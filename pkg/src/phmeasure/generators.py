"""Random PH fixtures for property tests and randomized acceptance checks.

Every generator takes a ``numpy.random.Generator`` and constructs its output
so that the PH condition holds exactly (up to rounding).
"""

from __future__ import annotations

import numpy as np

from .core import PHMetric, PHObservable, check_pseudo_hermitian, make_metric


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (X + X.conj().T) / 2


def random_invertible(rng: np.random.Generator, n: int, spread: float = 0.4) -> np.ndarray:
    """Identity plus a perturbation small enough to keep the condition number modest."""
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return np.eye(n) + spread * X / np.sqrt(2 * n)


def random_positive_metric(rng: np.random.Generator, n: int) -> PHMetric:
    """``eta = (S S^dagger)^-1`` for random invertible ``S``."""
    S = random_invertible(rng, n)
    return make_metric(np.linalg.inv(S @ S.conj().T))


def random_ph_positive(rng: np.random.Generator, n: int = 3) -> PHObservable:
    """``H = eta^-1 h`` with Hermitian ``h`` and positive-definite ``eta``."""
    metric = random_positive_metric(rng, n)
    h = random_hermitian(rng, n)
    return check_pseudo_hermitian(metric.eta_inverse @ h, metric)


def random_ph_with_signature(
    rng: np.random.Generator, signs, eigenvalues=None
) -> PHObservable:
    """PH observable with prescribed eigenvector signature.

    Picks an invertible eigenbasis ``V`` and sets
    ``eta = V^-dagger diag(signs) V^-1`` and ``H = V diag(e) V^-1``, so the
    spectrum is real and ``<E_k|eta|E_l> = s_k delta_kl`` by construction.
    """
    s = np.asarray(signs, dtype=float)
    n = s.shape[0]
    if eigenvalues is None:
        eigenvalues = np.sort(rng.uniform(-2, 2, size=n))
        while np.min(np.diff(eigenvalues)) < 0.05:
            eigenvalues = np.sort(rng.uniform(-2, 2, size=n))
    V = random_invertible(rng, n)
    Vi = np.linalg.inv(V)
    eta = Vi.conj().T @ np.diag(s) @ Vi
    metric = make_metric((eta + eta.conj().T) / 2)
    H = V @ np.diag(np.asarray(eigenvalues, dtype=complex)) @ Vi
    return check_pseudo_hermitian(H, metric)


def random_pure_state(rng: np.random.Generator, n: int = 3) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, n: int = 3, rank: int | None = None) -> np.ndarray:
    rank = rank or n
    X = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def random_unit_vector(rng: np.random.Generator, n: int = 3) -> np.ndarray:
    return random_pure_state(rng, n)
