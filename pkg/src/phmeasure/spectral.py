"""Eigendecomposition of PH observables under the eta inner product.

For a non-degenerate PH observable with real spectrum the eigenvectors,
rescaled so that ``<E_k|eta|E_k> = s_k = +-1``, are eta-orthogonal and
resolve the identity as ``sum_k s_k |E_k><E_k| eta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TOL_REL, PHMetric, PHObservable, fro
from .errors import ComplexSpectrum, Degenerate, VanishingEigenNorm

TOL_DEG = 1e-8
TOL_NORM = 1e-8


@dataclass(frozen=True, eq=False)
class PHSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column k is E_k
    signs: np.ndarray
    metric: PHMetric
    raw_eta_norms: np.ndarray  # <E_k|eta|E_k> for Dirac-unit eigenvectors

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]

    def reconstruct(self) -> np.ndarray:
        """``sum_k e_k s_k |E_k><E_k| eta``."""
        E = self.eigenvectors
        return (E * (self.eigenvalues * self.signs)) @ E.conj().T @ self.metric.eta


def _phase_fix(v: np.ndarray) -> np.ndarray:
    mag = np.abs(v)
    # first index within rounding of the maximum keeps ties deterministic
    k = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-9))[0])
    return v * (np.conj(v[k]) / mag[k])


def decompose(h: PHObservable) -> PHSpectrum:
    """Eigenpairs of ``h`` sorted by ascending eigenvalue, eta-normalized.

    Raises
    ------
    ComplexSpectrum
        Some eigenvalue has an imaginary part above ``TOL_REL * max|e|``.
    Degenerate
        Two eigenvalues are closer than ``TOL_DEG * max|e|``.
    VanishingEigenNorm
        Some ``|<E_k|eta|E_k>|`` (Dirac-unit ``E_k``) is below ``TOL_NORM``.
    """
    H = h.matrix
    eta = h.metric.eta
    w, V = np.linalg.eig(H)
    scale = max(float(np.max(np.abs(w))), fro(H) * 1e-3, np.finfo(float).tiny)
    imag = float(np.max(np.abs(w.imag)))
    if imag > TOL_REL * scale:
        raise ComplexSpectrum(
            "observable has complex eigenvalues", max_imag=imag, eigenvalues=[str(z) for z in w]
        )
    e = w.real
    order = np.argsort(e, kind="stable")
    e = e[order]
    V = V[:, order]
    gaps = np.diff(e)
    if gaps.size and float(gaps.min()) < TOL_DEG * scale:
        raise Degenerate(
            "observable spectrum is degenerate", min_gap=float(gaps.min()), eigenvalues=e.tolist()
        )

    vecs = np.empty_like(V)
    raw = np.empty(e.shape[0])
    for k in range(e.shape[0]):
        v = V[:, k] / np.linalg.norm(V[:, k])
        g = float(np.vdot(v, eta @ v).real)
        raw[k] = g
        if abs(g) < TOL_NORM:
            raise VanishingEigenNorm(
                f"eigenvector {k} has vanishing eta-norm",
                index=k,
                eta_norm=g,
                tol_norm=TOL_NORM,
            )
        vecs[:, k] = _phase_fix(v) / np.sqrt(abs(g))
    signs = np.sign(raw).astype(float)
    for a in (e, vecs, signs, raw):
        a.setflags(write=False)
    return PHSpectrum(e, vecs, signs, h.metric, raw)


def eta_gram(spectrum: PHSpectrum) -> np.ndarray:
    """``G_kl = <E_k|eta|E_l>``."""
    E = spectrum.eigenvectors
    return E.conj().T @ spectrum.metric.eta @ E


def completeness_residual(spectrum: PHSpectrum) -> float:
    """``||sum_k s_k |E_k><E_k| eta - 1||_F``."""
    E = spectrum.eigenvectors
    S = (E * spectrum.signs) @ E.conj().T @ spectrum.metric.eta
    return fro(S - np.eye(spectrum.dim))


def eigen_residual(h: PHObservable, spectrum: PHSpectrum) -> float:
    """Largest ``||H E_k - e_k E_k||`` relative to ``||H||_F``."""
    E = spectrum.eigenvectors
    R = h.matrix @ E - E * spectrum.eigenvalues
    return float(np.max(np.linalg.norm(R, axis=0) / np.linalg.norm(E, axis=0))) / max(
        fro(h.matrix), np.finfo(float).tiny
    )
