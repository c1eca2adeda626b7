"""Direct-sum dilated projective measurement.

Subspace ``k`` projects onto the dual vector ``v_k`` proportional to
``eta E_k``, which is Dirac-orthogonal to every eigenvector except ``E_k``.
Allocating trials to subspace ``k`` with weight ``w_k = 1/|<v_k|E_k>|^2``
turns the detection rate in that subspace into ``p_kk``.

Nothing here depends on the measured state; the state only enters through
:func:`subspace_probability` and :func:`dilated_state`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TOL_ABS, TOL_REL, PHMetric, QuantumState, fro
from .errors import IllConditioned, IndexOutOfRange, NotUnitVector
from .spectral import PHSpectrum, _phase_fix


@dataclass(frozen=True)
class TwoLevelRotation:
    """Unitary on the adjacent modes ``(mode, mode + 1)``.

    Acting on those two modes it is
    ``[[cos t e^{-i a}, sin t e^{-i b}], [-sin t e^{i b}, cos t e^{i a}]]``
    and it maps ``r (cos t e^{i a}, sin t e^{i b})`` onto ``(r, 0)``.
    """

    mode: int
    theta: float
    phi_a: float
    phi_b: float

    def block(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        ea, eb = np.exp(1j * self.phi_a), np.exp(1j * self.phi_b)
        return np.array([[c * ea.conjugate(), s * eb.conjugate()], [-s * eb, c * ea]])

    def matrix(self, n: int) -> np.ndarray:
        U = np.eye(n, dtype=complex)
        i = self.mode
        U[i : i + 2, i : i + 2] = self.block()
        return U


def compose(factors: list[TwoLevelRotation], n: int) -> np.ndarray:
    """Product of factors in application order (first factor acts first)."""
    U = np.eye(n, dtype=complex)
    for f in factors:
        U = f.matrix(n) @ U
    return U


def synthesize_unitary(v) -> tuple[np.ndarray, list[TwoLevelRotation]]:
    """Unitary ``U`` with ``U v = e_0`` built from at most ``n - 1`` adjacent rotations.

    Entries of ``v`` are eliminated from the last mode upward, mirroring a
    triangular beam-displacer mesh. Steps that would be the identity are
    skipped, so ``v = e_0`` yields an empty factor list.
    """
    x = np.array(v, dtype=complex)
    n = x.shape[0]
    nrm = float(np.linalg.norm(x))
    if abs(nrm - 1.0) > TOL_REL:
        raise NotUnitVector(f"vector norm is {nrm!r}, expected 1", norm=nrm)
    factors: list[TwoLevelRotation] = []
    for i in range(n - 2, -1, -1):
        a, b = x[i], x[i + 1]
        if abs(b) == 0.0 and (a.imag == 0.0 and a.real >= 0.0):
            continue
        r = float(np.hypot(abs(a), abs(b)))
        f = TwoLevelRotation(
            mode=i,
            theta=float(np.arctan2(abs(b), abs(a))),
            phi_a=float(np.angle(a)),
            phi_b=float(np.angle(b)),
        )
        factors.append(f)
        x[i], x[i + 1] = r, 0.0
    return compose(factors, n), factors


@dataclass(frozen=True, eq=False)
class DilatedMeasurement:
    duals: np.ndarray  # column k is v_k
    overlaps: np.ndarray  # w_k = 1 / |<v_k|E_k>|^2
    unitaries: list[np.ndarray]
    factorizations: list[list[TwoLevelRotation]]
    eigenvalues: np.ndarray
    signs: np.ndarray
    metric: PHMetric

    @property
    def dim(self) -> int:
        return self.duals.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self.overlaps

    @property
    def normalizer(self) -> float:
        """``N = sum_k w_k / n``."""
        return float(np.sum(self.overlaps) / self.dim)

    @property
    def allocation(self) -> np.ndarray:
        """Per-trial subspace selection probabilities ``w_k / sum_l w_l``."""
        return self.overlaps / np.sum(self.overlaps)

    def projector(self, k: int) -> np.ndarray:
        v = self.duals[:, k]
        return np.outer(v, v.conj())

    def dilated_projector(self) -> np.ndarray:
        """Explicit ``P_1 + ... + P_n`` on the ``n^2``-dimensional direct sum."""
        n = self.dim
        P = np.zeros((n * n, n * n), dtype=complex)
        for k in range(n):
            P[k * n : (k + 1) * n, k * n : (k + 1) * n] = self.projector(k)
        return P


def dual_vectors(spectrum: PHSpectrum) -> np.ndarray:
    """Columns ``v_k = eta E_k / ||eta E_k||`` with the spectral phase convention."""
    eta = spectrum.metric.eta
    n = spectrum.dim
    out = np.empty((n, n), dtype=complex)
    for k in range(n):
        u = eta @ spectrum.vector(k)
        nrm = float(np.linalg.norm(u))
        if nrm <= TOL_ABS:
            raise IllConditioned(f"||eta E_{k}|| vanishes", index=k, norm=nrm)
        out[:, k] = _phase_fix(u / nrm)
    return out


def build_dilation(spectrum: PHSpectrum) -> DilatedMeasurement:
    duals = dual_vectors(spectrum)
    n = spectrum.dim
    ov = np.array(
        [abs(np.vdot(duals[:, k], spectrum.vector(k))) ** -2 for k in range(n)], dtype=float
    )
    unitaries = []
    factorizations = []
    for k in range(n):
        U, f = synthesize_unitary(duals[:, k])
        unitaries.append(U)
        factorizations.append(f)
    return DilatedMeasurement(
        duals,
        ov,
        unitaries,
        factorizations,
        spectrum.eigenvalues.copy(),
        spectrum.signs.copy(),
        spectrum.metric,
    )


def subspace_probability(dilation: DilatedMeasurement, k: int, state: QuantumState) -> float:
    """``w_k Tr[P_k rho]`` for the eta-normalized ``rho``; equals ``p_kk``."""
    if not 0 <= k < dilation.dim:
        raise IndexOutOfRange(f"subspace index {k} outside 0..{dilation.dim - 1}", index=k)
    rho, _ = state.eta_normalized(dilation.metric)
    v = dilation.duals[:, k]
    return float(dilation.overlaps[k] * np.vdot(v, rho @ v).real)


def dilated_state(dilation: DilatedMeasurement, rho: np.ndarray) -> np.ndarray:
    """Explicit ``(1/N)(w_1 rho + ... + w_n rho)`` on the direct sum."""
    n = dilation.dim
    S = np.zeros((n * n, n * n), dtype=complex)
    for k in range(n):
        S[k * n : (k + 1) * n, k * n : (k + 1) * n] = dilation.overlaps[k] * rho
    return S / dilation.normalizer


def idempotence_residual(P: np.ndarray) -> float:
    return fro(P @ P - P)
