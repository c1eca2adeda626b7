"""Monte Carlo model of the photonic measurement.

Each emitted photon is allocated to subspace ``k`` with probability
``w_k / sum_l w_l``, then detected at output mode 0 with probability
``<v_k|rho|v_k>`` (postselection). Detected events are labelled with the
eigenvalue ``e_k`` and carry the statistical weight ``s_k``; no knowledge of
``rho`` is used beyond these Bernoulli trials.

Trials are split into fixed-size chunks, each with its own RNG stream
derived from ``(seed, chunk index)``, so counts do not depend on how many
workers process the chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import PHObservable, QuantumState
from .dilation import DilatedMeasurement, build_dilation
from .errors import DegenerateStatistics, DimensionMismatch
from .measurement import expectation, variance
from .spectral import PHSpectrum, decompose

CHUNK = 1 << 16
N_BOOTSTRAP = 1000


@dataclass(frozen=True, eq=False)
class EventRecord:
    counts: np.ndarray
    trials: int
    seed: int
    eigenvalues: np.ndarray
    signs: np.ndarray

    @property
    def detected(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "EventRecord") -> "EventRecord":
        # merging partial runs is plain count addition
        return EventRecord(
            self.counts + other.counts,
            self.trials + other.trials,
            self.seed,
            self.eigenvalues,
            self.signs,
        )


@dataclass(frozen=True, eq=False)
class MeasurementEstimate:
    expectation_hat: float
    variance_hat: float
    std_error: float
    variance_std_error: float
    counts_used: EventRecord
    bootstrap_std_error: Optional[float] = None
    bootstrap_variance_std_error: Optional[float] = None
    grad_expectation: np.ndarray = field(default=None, repr=False)
    grad_variance: np.ndarray = field(default=None, repr=False)


def _chunk_counts(c: int, size: int, seed: int, alloc: np.ndarray, detect: np.ndarray) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(c,))))
    allocated = rng.multinomial(size, alloc)
    return rng.binomial(allocated, detect)


def detection_probabilities(dilation: DilatedMeasurement, rho: np.ndarray) -> np.ndarray:
    """``<v_k|rho|v_k>`` for a Dirac-normalized density matrix."""
    V = dilation.duals
    q = np.einsum("ik,ij,jk->k", V.conj(), rho, V).real
    return np.clip(q, 0.0, 1.0)


def simulate_events(
    dilation: DilatedMeasurement,
    spectrum: PHSpectrum,
    state: QuantumState,
    trials: int,
    seed: int,
    workers: int = 1,
) -> EventRecord:
    """Count postselected detections per subspace over ``trials`` photons."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if state.dim != dilation.dim:
        raise DimensionMismatch(
            f"state has dim {state.dim}, dilation has dim {dilation.dim}",
            state_dim=state.dim,
            dilation_dim=dilation.dim,
        )
    alloc = dilation.allocation
    detect = detection_probabilities(dilation, state.rho)
    sizes = [CHUNK] * (trials // CHUNK)
    if trials % CHUNK:
        sizes.append(trials % CHUNK)

    def work(c: int) -> np.ndarray:
        return _chunk_counts(c, sizes[c], seed, alloc, detect)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(c) for c in range(len(sizes))]
    counts = np.sum(parts, axis=0).astype(np.int64)
    return EventRecord(counts, int(trials), seed, spectrum.eigenvalues.copy(), spectrum.signs.copy())


def _weighted_moments(counts: np.ndarray, e: np.ndarray, s: np.ndarray) -> tuple[float, float]:
    d = float(np.sum(s * counts))
    if d == 0.0:
        raise DegenerateStatistics(
            "weighted event total sum_k s_k n_k is zero", counts=counts.tolist()
        )
    mean = float(np.sum(s * e * counts)) / d
    var = float(np.sum(s * (e - mean) ** 2 * counts)) / d
    return mean, var


def estimator_gradients(record: EventRecord) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives of the mean and variance estimators with respect to each ``n_k``."""
    n = record.counts.astype(float)
    e, s = record.eigenvalues, record.signs
    d = float(np.sum(s * n))
    mean, var = _weighted_moments(n, e, s)
    g_mean = s * (e - mean) / d
    g_var = s * ((e - mean) ** 2 - var) / d
    return g_mean, g_var


def delta_variance(grad: np.ndarray, counts: np.ndarray) -> float:
    # both estimators are scale-invariant in the counts, so the multinomial
    # covariance term vanishes and only sum_k g_k^2 n_k survives
    return float(np.sum(grad**2 * counts))


def estimate(record: EventRecord, bootstrap: int = 0, bootstrap_seed: int = 0) -> MeasurementEstimate:
    """Weighted-count estimators of ``<H>_eta`` and ``<(dH)^2>_eta``.

    Standard errors come from the delta method. With ``bootstrap > 0`` the
    counts are also resampled that many times (multinomial over ``trials``)
    as a cross-check.
    """
    counts = record.counts.astype(float)
    mean, var = _weighted_moments(counts, record.eigenvalues, record.signs)
    g_mean, g_var = estimator_gradients(record)
    se_mean = np.sqrt(delta_variance(g_mean, counts))
    se_var = np.sqrt(delta_variance(g_var, counts))
    bs_mean = bs_var = None
    if bootstrap:
        bs_mean, bs_var = _bootstrap(record, bootstrap, bootstrap_seed)
    return MeasurementEstimate(
        mean, var, float(se_mean), float(se_var), record, bs_mean, bs_var, g_mean, g_var
    )


def _bootstrap(record: EventRecord, n_resamples: int, seed: int) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    T = record.trials
    p = np.append(record.counts, T - record.detected) / T
    means, variances = [], []
    for _ in range(n_resamples):
        c = rng.multinomial(T, p)[:-1]
        try:
            m, v = _weighted_moments(c.astype(float), record.eigenvalues, record.signs)
        except DegenerateStatistics:
            continue
        means.append(m)
        variances.append(v)
    return float(np.std(means, ddof=1)), float(np.std(variances, ddof=1))


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    analytic_expectation: float
    analytic_variance: float
    sampled: MeasurementEstimate
    spectrum: PHSpectrum
    dilation: DilatedMeasurement

    @property
    def analytic(self) -> tuple[float, float]:
        return self.analytic_expectation, self.analytic_variance


def run_experiment(
    observable: PHObservable,
    state: QuantumState,
    trials: int,
    seed: int,
    workers: int = 1,
    bootstrap: int = 0,
) -> ExperimentResult:
    """Analytic statistics next to a sampled estimate for the same inputs."""
    spectrum = decompose(observable)
    dilation = build_dilation(spectrum)
    record = simulate_events(dilation, spectrum, state, trials, seed, workers)
    sampled = estimate(record, bootstrap=bootstrap, bootstrap_seed=seed)
    return ExperimentResult(
        expectation(observable, state), variance(observable, state), sampled, spectrum, dilation
    )
