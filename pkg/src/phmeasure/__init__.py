"""Pseudo-Hermitian observables and their direct-sum dilated measurement."""

from .core import (
    Definiteness,
    Normalization,
    PHMetric,
    PHObservable,
    QuantumState,
    check_pseudo_hermitian,
    eta_inner,
    make_metric,
    state_from_density,
    state_from_pure,
)
from .dilation import DilatedMeasurement, build_dilation, dual_vectors, subspace_probability, synthesize_unitary
from .measurement import decomposition_coefficients, effect_set, expectation, variance
from .sampler import estimate, run_experiment, simulate_events
from .spectral import PHSpectrum, completeness_residual, decompose, eta_gram
from .uncertainty import covariance_matrix, product_split, uncertainty_ratio

__version__ = "0.1.0"
