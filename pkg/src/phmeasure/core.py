"""Core types: PH metrics, pseudo-Hermitian observables and quantum states.

A pseudo-Hermitian (PH) observable is a square matrix ``H`` together with an
invertible Hermitian metric ``eta`` such that ``H^dagger = eta H eta^-1``.
The metric defines the inner product ``<a|b>_eta = <a|eta|b>``.

All containers are frozen dataclasses holding read-only numpy arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidState,
    NonFinite,
    NotHermitian,
    NotPseudoHermitian,
    NotSquare,
    Singular,
    VanishingEtaNorm,
    ZeroVector,
)

TOL_REL = 1e-9
TOL_ABS = 1e-12
TOL_SING = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(a: Any) -> np.ndarray:
    """Coerce ``a`` to a finite square complex matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}", shape=list(m.shape))
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix has NaN or Inf entries")
    return m


def as_vector(v: Any) -> np.ndarray:
    x = np.asarray(v, dtype=complex)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {x.shape}", shape=list(x.shape))
    if not np.all(np.isfinite(x)):
        raise NonFinite("vector has NaN or Inf entries")
    return x


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def fro(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, "fro"))


class Definiteness(str, enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    INDEFINITE = "Indefinite"


class Normalization(str, enum.Enum):
    DIRAC = "Dirac"
    ETA = "EtaNormalized"


@dataclass(frozen=True, eq=False)
class PHMetric:
    """Invertible Hermitian metric with cached inverse."""

    eta: np.ndarray
    eta_inverse: np.ndarray
    definiteness: Definiteness
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.eta.shape[0]

    @property
    def is_positive_definite(self) -> bool:
        return self.definiteness is Definiteness.POSITIVE_DEFINITE

    def same_as(self, other: "PHMetric") -> bool:
        return self is other or (
            self.eta.shape == other.eta.shape and bool(np.array_equal(self.eta, other.eta))
        )


def make_metric(eta: Any) -> PHMetric:
    """Validate ``eta`` and build a :class:`PHMetric`.

    Raises
    ------
    NotHermitian
        If ``||eta - eta^dagger||_F > TOL_REL * ||eta||_F``.
    Singular
        If the ratio of extreme singular values is below ``TOL_SING``.
    """
    m = as_matrix(eta)
    norm = fro(m)
    if norm == 0.0:
        raise Singular("metric is the zero matrix", sv_ratio=0.0)
    herm_res = fro(m - dagger(m))
    if herm_res > TOL_REL * norm:
        raise NotHermitian("metric is not Hermitian", residual=herm_res / norm)
    m = (m + dagger(m)) / 2
    sv = np.linalg.svd(m, compute_uv=False)
    ratio = float(sv[-1] / sv[0])
    if ratio < TOL_SING:
        raise Singular("metric is numerically singular", sv_ratio=ratio)
    inv = np.linalg.inv(m)
    n = m.shape[0]
    inv_res = fro(m @ inv - np.eye(n))
    if inv_res > TOL_REL * np.sqrt(n):
        raise Singular("metric inverse is inaccurate", inverse_residual=inv_res)
    w = np.linalg.eigvalsh(m)
    definiteness = (
        Definiteness.POSITIVE_DEFINITE if bool(np.all(w > 0)) else Definiteness.INDEFINITE
    )
    return PHMetric(_frozen(m), _frozen(inv), definiteness, np.asarray(w, dtype=float))


def ph_residual(h: np.ndarray, metric: PHMetric) -> float:
    """Relative residual ``||H^dagger - eta H eta^-1||_F / ||H||_F``."""
    norm = fro(h)
    if norm == 0.0:
        return 0.0
    return fro(dagger(h) - metric.eta @ h @ metric.eta_inverse) / norm


@dataclass(frozen=True, eq=False)
class PHObservable:
    matrix: np.ndarray
    metric: PHMetric
    residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def check_pseudo_hermitian(h: Any, metric: PHMetric, tol: float = TOL_REL) -> PHObservable:
    """Validate the PH condition for ``h`` under ``metric``.

    The relative residual is stored on the returned observable. A residual
    above ``tol`` raises :class:`NotPseudoHermitian` with the value attached.
    """
    m = as_matrix(h)
    if m.shape[0] != metric.dim:
        raise DimensionMismatch(
            f"observable has dim {m.shape[0]}, metric has dim {metric.dim}",
            observable_dim=m.shape[0],
            metric_dim=metric.dim,
        )
    res = ph_residual(m, metric)
    if res > tol:
        raise NotPseudoHermitian(
            f"H^dagger != eta H eta^-1 (relative residual {res:.3e})", residual=res
        )
    return PHObservable(_frozen(m), metric, res)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density matrix plus a normalization convention.

    ``rho`` is always the PSD, unit-trace density matrix. For an
    eta-normalized state the operator actually used in traces is
    ``scale * rho`` with ``scale = 1 / Tr[rho eta]``; ``scale`` is negative
    when the state has negative eta-norm under an indefinite metric.
    """

    rho: np.ndarray
    normalization: Normalization = Normalization.DIRAC
    metric: Optional[PHMetric] = None
    scale: float = 1.0

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.scale * self.rho

    def eta_norm(self, metric: PHMetric) -> float:
        """``Tr[rho eta]`` of the Dirac-normalized density matrix."""
        return float(np.trace(self.rho @ metric.eta).real)

    def eta_normalized(self, metric: PHMetric) -> tuple[np.ndarray, bool]:
        """Return ``rho / Tr[rho eta]`` and whether renormalization was needed."""
        if metric.dim != self.dim:
            raise DimensionMismatch(
                f"state has dim {self.dim}, metric has dim {metric.dim}",
                state_dim=self.dim,
                metric_dim=metric.dim,
            )
        if (
            self.normalization is Normalization.ETA
            and self.metric is not None
            and self.metric.same_as(metric)
        ):
            return self.matrix, False
        t = self.eta_norm(metric)
        if abs(t) <= TOL_ABS:
            raise VanishingEtaNorm("state has vanishing eta-norm Tr[rho eta]", eta_norm=t)
        return self.rho / t, True


def _check_density(rho: np.ndarray) -> np.ndarray:
    norm = fro(rho)
    if fro(rho - dagger(rho)) > TOL_REL * max(norm, 1.0):
        raise InvalidState("density matrix is not Hermitian")
    rho = (rho + dagger(rho)) / 2
    tr = float(np.trace(rho).real)
    if tr <= TOL_ABS:
        raise InvalidState("density matrix has non-positive trace", trace=tr)
    rho = rho / tr
    w_min = float(np.linalg.eigvalsh(rho)[0])
    if w_min < -TOL_ABS:
        raise InvalidState("density matrix is not positive semi-definite", min_eigenvalue=w_min)
    return rho


def _finish_state(rho: np.ndarray, metric: Optional[PHMetric], mode: Normalization) -> QuantumState:
    mode = Normalization(mode)
    if mode is Normalization.DIRAC:
        return QuantumState(_frozen(rho), Normalization.DIRAC, metric, 1.0)
    if metric is None:
        raise InvalidState("eta-normalization requires a metric")
    if metric.dim != rho.shape[0]:
        raise DimensionMismatch(
            f"state has dim {rho.shape[0]}, metric has dim {metric.dim}",
            state_dim=rho.shape[0],
            metric_dim=metric.dim,
        )
    t = float(np.trace(rho @ metric.eta).real)
    if abs(t) <= TOL_ABS:
        raise VanishingEtaNorm("state is eta-null and cannot be eta-normalized", eta_norm=t)
    return QuantumState(_frozen(rho), Normalization.ETA, metric, 1.0 / t)


def state_from_pure(
    psi: Any, metric: Optional[PHMetric] = None, mode: Normalization | str = Normalization.ETA
) -> QuantumState:
    """Build ``|psi><psi|`` under the requested normalization."""
    v = as_vector(psi)
    nrm = float(np.vdot(v, v).real)
    if nrm <= TOL_ABS**2:
        raise ZeroVector("state vector is zero")
    if Normalization(mode) is Normalization.ETA and metric is not None:
        g = float(np.vdot(v, metric.eta @ v).real)
        if abs(g) <= TOL_ABS * nrm:
            raise VanishingEtaNorm(
                "state is eta-null and cannot be eta-normalized", eta_norm=g / nrm
            )
    v = v / np.sqrt(nrm)
    return _finish_state(np.outer(v, v.conj()), metric, mode)


def state_from_density(
    rho: Any, metric: Optional[PHMetric] = None, mode: Normalization | str = Normalization.DIRAC
) -> QuantumState:
    """Wrap a (possibly mixed) density matrix; it is rescaled to unit trace."""
    return _finish_state(_check_density(as_matrix(rho)), metric, mode)


def eta_inner(psi1: Any, psi2: Any, metric: PHMetric) -> complex:
    """``<psi1|eta|psi2>``, conjugate-linear in the first argument."""
    a = as_vector(psi1)
    b = as_vector(psi2)
    if a.shape != b.shape or a.shape[0] != metric.dim:
        raise DimensionMismatch(
            "vectors and metric must share a dimension",
            dims=[a.shape[0], b.shape[0], metric.dim],
        )
    return complex(np.vdot(a, metric.eta @ b))


# JSON: complex matrices are nested lists of [re, im] pairs. Python floats
# serialise with shortest round-trip repr, so encoding is bit-exact.


def matrix_to_json(m: np.ndarray) -> list:
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [matrix_to_json(row) for row in a]


def matrix_from_json(data: Any) -> np.ndarray:
    """Decode a matrix of ``[re, im]`` pairs; a plain real matrix is also accepted."""
    a = np.asarray(data, dtype=float)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim == 2:
        return a.astype(complex)
    raise DimensionMismatch(f"cannot decode a matrix from array of shape {a.shape}")


def vector_from_json(data: Any) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim == 2 and a.shape[-1] == 2:
        return a[:, 0] + 1j * a[:, 1]
    if a.ndim == 1:
        return a.astype(complex)
    raise DimensionMismatch(f"cannot decode a vector from array of shape {a.shape}")


def metric_to_dict(metric: PHMetric) -> dict:
    return {"eta": matrix_to_json(metric.eta)}


def observable_to_dict(obs: PHObservable) -> dict:
    return {"eta": matrix_to_json(obs.metric.eta), "matrix": matrix_to_json(obs.matrix)}


def observable_from_dict(data: dict) -> PHObservable:
    metric = make_metric(matrix_from_json(data["eta"]))
    return check_pseudo_hermitian(matrix_from_json(data["matrix"]), metric)
