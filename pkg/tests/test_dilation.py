import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phmeasure import fixtures
from phmeasure.core import Normalization, check_pseudo_hermitian, make_metric, state_from_density, state_from_pure
from phmeasure.dilation import (
    DilatedMeasurement,
    build_dilation,
    compose,
    dilated_state,
    dual_vectors,
    idempotence_residual,
    subspace_probability,
    synthesize_unitary,
)
from phmeasure.errors import IndexOutOfRange, NotUnitVector
from phmeasure.generators import random_density, random_hermitian, random_unit_vector
from phmeasure.measurement import decomposition_coefficients
from phmeasure.spectral import decompose


def test_eq5_zero_mode_dual():
    sp = decompose(fixtures.observable("eq5.A"))
    v = dual_vectors(sp)[:, 1]
    expected = np.array([0, -4, 0.6]) / np.linalg.norm([0, -4, 0.6])
    assert abs(abs(np.vdot(expected, v)) - 1) < 1e-12
    # v is orthogonal to the other two eigenvectors (hand solution: (+-sqrt 2.49, 0.3, 2))
    for lam in (np.sqrt(2.49), -np.sqrt(2.49)):
        E = np.array([lam, 0.3, 2.0])
        assert abs(np.vdot(expected, E)) < 1e-12


def test_duals_biorthogonal(fixture_observable):
    _, h = fixture_observable
    sp = decompose(h)
    V = dual_vectors(sp)
    overlaps = V.conj().T @ sp.eigenvectors
    off = overlaps - np.diag(np.diag(overlaps))
    assert np.abs(off).max() <= 1e-9
    assert np.allclose(np.linalg.norm(V, axis=0), 1.0)


def test_hermitian_duals_are_eigenvectors(rng):
    h = check_pseudo_hermitian(random_hermitian(rng, 3), make_metric(np.eye(3)))
    sp = decompose(h)
    d = build_dilation(sp)
    assert np.allclose(d.duals, sp.eigenvectors, atol=1e-12)
    assert np.allclose(d.overlaps, 1.0)
    assert d.normalizer == pytest.approx(1.0)


def test_eq5_weights_are_eta_image_norms():
    sp = decompose(fixtures.observable("eq5.A"))
    d = build_dilation(sp)
    eta = sp.metric.eta
    expected = [np.linalg.norm(eta @ sp.vector(k)) ** 2 for k in range(3)]
    assert np.allclose(d.overlaps, expected, rtol=1e-12)
    assert d.normalizer == pytest.approx(sum(expected) / 3)


def test_projectors_idempotent(fixture_observable):
    _, h = fixture_observable
    d = build_dilation(decompose(h))
    for k in range(3):
        assert idempotence_residual(d.projector(k)) <= 1e-12
    P = d.dilated_projector()
    assert P.shape == (9, 9)
    assert idempotence_residual(P) <= 1e-12


def test_dilation_has_no_state_field():
    names = {f.name for f in dataclasses.fields(DilatedMeasurement)}
    assert not names & {"rho", "state"}


def test_protocol_identity(fixture_observable, rng):
    _, h = fixture_observable
    sp = decompose(h)
    d = build_dilation(sp)
    for _ in range(100):
        rho = random_density(rng)
        if abs(np.trace(rho @ h.metric.eta)) < 1e-6:
            continue
        s = state_from_density(rho, h.metric, Normalization.ETA)
        p = decomposition_coefficients(sp, s).populations
        got = [subspace_probability(d, k, s) for k in range(3)]
        assert np.allclose(got, p, atol=1e-9)


def test_eigenmode_captures_everything(eta_pos):
    sp = decompose(fixtures.observable("eq5.A"))
    d = build_dilation(sp)
    s = state_from_pure(sp.vector(0), eta_pos, Normalization.ETA)
    probs = [subspace_probability(d, k, s) for k in range(3)]
    assert probs == pytest.approx([1.0, 0.0, 0.0], abs=1e-12)


def test_indefinite_weighted_sum(rng, eta_indef):
    sp = decompose(fixtures.observable("eq6.A"))
    d = build_dilation(sp)
    s = state_from_density(random_density(rng), eta_indef, Normalization.ETA)
    total = sum(sp.signs[k] * subspace_probability(d, k, s) for k in range(3))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_subspace_index_checked(eta_pos):
    d = build_dilation(decompose(fixtures.observable("eq5.A")))
    s = state_from_pure([0, 1, 0], eta_pos)
    with pytest.raises(IndexOutOfRange):
        subspace_probability(d, 3, s)


def test_dilated_state_trace(eta_pos):
    sp = decompose(fixtures.observable("eq5.B"))
    d = build_dilation(sp)
    s = state_from_pure(fixtures.theta_state(0.2, 1.1), eta_pos)
    Sigma = dilated_state(d, s.matrix)
    P = d.dilated_projector()
    pops = decomposition_coefficients(sp, s).populations
    assert np.trace(P @ Sigma).real == pytest.approx(pops.sum() / d.normalizer)


def test_synthesize_identity_for_e0():
    U, factors = synthesize_unitary([1, 0, 0])
    assert factors == []
    assert np.array_equal(U, np.eye(3))


def test_synthesize_single_rotation():
    U, factors = synthesize_unitary([0, 1, 0])
    assert len(factors) == 1 and factors[0].mode == 0
    assert np.allclose(U @ np.array([0, 1, 0]), [1, 0, 0])


@pytest.mark.parametrize("v", [[1j, 0, 0], [0, 0, -1], [0, 0, 1j]])
def test_synthesize_phase_only_cases(v):
    U, factors = synthesize_unitary(v)
    assert len(factors) <= 2
    assert np.allclose(U @ np.array(v), [1, 0, 0])


def test_synthesize_rejects_non_unit():
    with pytest.raises(NotUnitVector):
        synthesize_unitary([1, 1, 0])


def test_fixture_unitaries(fixture_observable):
    _, h = fixture_observable
    d = build_dilation(decompose(h))
    for k in range(3):
        U, v = d.unitaries[k], d.duals[:, k]
        assert np.linalg.norm(U @ v - np.eye(3)[0]) <= 1e-10
        assert np.linalg.norm(compose(d.factorizations[k], 3) - U) <= 1e-10
        assert np.allclose(U @ U.conj().T, np.eye(3), atol=1e-12)
        assert len(d.factorizations[k]) <= 2


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6))
def test_synthesize_random(seed, n):
    v = random_unit_vector(np.random.default_rng(seed), n)
    U, factors = synthesize_unitary(v)
    assert len(factors) <= n - 1
    assert np.linalg.norm(U @ v - np.eye(n)[0]) <= 1e-10
    assert np.linalg.norm(compose(factors, n) - U) <= 1e-10
    for f in factors:
        B = f.block()
        assert np.allclose(B @ B.conj().T, np.eye(2), atol=1e-13)
