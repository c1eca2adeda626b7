"""Uncertainty relation for pairs of PH observables sharing a metric.

The covariance matrix

    M = [[<(dA)^2>,           <AB> - <A><B>],
         [<BA> - <B><A>,      <(dB)^2>     ]]

is positive semi-definite for a positive-definite metric, which gives
``<(dA)^2><(dB)^2> >= |<AB> - <A><B>|^2``. The ratio ``R`` of the two sides
is reported signed, since variances can be negative under an indefinite
metric.

``AB`` itself is generally not PH; :func:`product_split` writes it as
``(1 + i) C1 + (1 - i) C2`` with both ``C1`` and ``C2`` PH, so ``<AB>`` can
be measured on the same simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import TOL_ABS, Definiteness, PHObservable, QuantumState, check_pseudo_hermitian
from .errors import MetricMismatch
from .measurement import correlation, expectation, variance
from .sampler import run_experiment

TOL_PSD = 1e-9


def _require_shared_metric(a: PHObservable, b: PHObservable) -> None:
    if not a.metric.same_as(b.metric):
        raise MetricMismatch("observables carry different metrics")


def product_split(a: PHObservable, b: PHObservable) -> tuple[PHObservable, PHObservable]:
    """``C1, C2 = (AB + BA)/4 +- (AB - BA)/(4i)``."""
    _require_shared_metric(a, b)
    AB = a.matrix @ b.matrix
    BA = b.matrix @ a.matrix
    anti = (AB + BA) / 4
    comm = (AB - BA) / 4j
    c1 = check_pseudo_hermitian(anti + comm, a.metric)
    c2 = check_pseudo_hermitian(anti - comm, a.metric)
    return c1, c2


def covariance_matrix(a: PHObservable, b: PHObservable, state: QuantumState) -> np.ndarray:
    _require_shared_metric(a, b)
    ma, mb = expectation(a, state), expectation(b, state)
    M = np.empty((2, 2), dtype=complex)
    M[0, 0] = variance(a, state)
    M[1, 1] = variance(b, state)
    M[0, 1] = correlation(a, b, state) - ma * mb
    M[1, 0] = correlation(b, a, state) - mb * ma
    return M


def psd_violation(M: np.ndarray) -> float:
    """Most negative eigenvalue of the Hermitian part relative to ``TOL_PSD * ||M||``; 0 if PSD."""
    w = np.linalg.eigvalsh((M + M.conj().T) / 2)
    floor = -TOL_PSD * max(np.linalg.norm(M), 1.0)
    return float(min(w[0] - floor, 0.0))


@dataclass(frozen=True, eq=False)
class UncertaintyReport:
    var_a: float
    var_b: float
    cross_term: complex
    m_matrix: Optional[np.ndarray]
    ratio_r: float
    metric_definiteness: Definiteness
    mode: str = "analytic"
    std_error_r: float = 0.0
    status: str = "ok"

    @property
    def defined(self) -> bool:
        return self.status == "ok"

    @property
    def determinant(self) -> float:
        return self.var_a * self.var_b - abs(self.cross_term) ** 2


def _ratio(var_a: float, var_b: float, cross: complex) -> tuple[float, str]:
    c2 = abs(cross) ** 2
    if c2 <= TOL_ABS**2:
        return float("inf"), "undefined"
    return var_a * var_b / c2, "ok"


def uncertainty_ratio(
    a: PHObservable,
    b: PHObservable,
    state: QuantumState,
    mode: str = "analytic",
    trials: int = 1_000_000,
    seed: int = 42,
    workers: int = 1,
) -> UncertaintyReport:
    """Evaluate ``R = <(dA)^2><(dB)^2> / |<AB> - <A><B>|^2``.

    In ``"sampled"`` mode ``A``, ``B``, ``C1`` and ``C2`` are each run through
    the dilation and sampler with independent seeds derived from ``seed``,
    and ``<AB>`` is rebuilt from the split. The standard error of ``R`` is
    the delta-method propagation over all four count vectors.

    A vanishing cross term is reported with ``status="undefined"`` and
    ``ratio_r = inf`` rather than raised.
    """
    _require_shared_metric(a, b)
    definiteness = a.metric.definiteness
    if mode == "analytic":
        M = covariance_matrix(a, b, state)
        var_a, var_b, cross = M[0, 0].real, M[1, 1].real, complex(M[0, 1])
        r, status = _ratio(var_a, var_b, cross)
        return UncertaintyReport(var_a, var_b, cross, M, r, definiteness, "analytic", 0.0, status)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")

    c1, c2 = product_split(a, b)
    seeds = [
        int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(4)
    ]
    runs = [
        run_experiment(obs, state, trials, sd, workers).sampled
        for obs, sd in zip((a, b, c1, c2), seeds)
    ]
    ea, eb, e1, e2 = runs
    ma, va = ea.expectation_hat, ea.variance_hat
    mb, vb = eb.expectation_hat, eb.variance_hat
    corr = (1 + 1j) * e1.expectation_hat + (1 - 1j) * e2.expectation_hat
    cross = corr - ma * mb
    r, status = _ratio(va, vb, cross)
    se = float("nan")
    if status == "ok":
        se = _ratio_std_error(ma, va, mb, vb, cross, runs)
    M = np.array([[va, cross], [np.conj(cross), vb]], dtype=complex)
    return UncertaintyReport(va, vb, cross, M, r, definiteness, "sampled", se, status)


def _ratio_std_error(ma, va, mb, vb, cross, runs) -> float:
    ea, eb, e1, e2 = runs
    x2 = abs(cross) ** 2
    re, im = cross.real, cross.imag
    dR_dva = vb / x2
    dR_dvb = va / x2
    dR_dre = -2 * va * vb * re / x2**2
    dR_dim = -2 * va * vb * im / x2**2
    # Re X = c1 + c2 - ma mb, Im X = c1 - c2
    grads = [
        dR_dva * ea.grad_variance + dR_dre * (-mb) * ea.grad_expectation,
        dR_dvb * eb.grad_variance + dR_dre * (-ma) * eb.grad_expectation,
        (dR_dre + dR_dim) * e1.grad_expectation,
        (dR_dre - dR_dim) * e2.grad_expectation,
    ]
    total = sum(float(np.sum(g**2 * run.counts_used.counts)) for g, run in zip(grads, runs))
    return float(np.sqrt(total))

