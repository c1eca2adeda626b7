"""Named qutrit fixtures: two metrics, two observable pairs, and the state family."""

from __future__ import annotations

import numpy as np

from .core import PHMetric, PHObservable, check_pseudo_hermitian, make_metric
from .errors import ConfigParse

ETA_POS = np.diag([1.0, 1.0, 0.6]).astype(complex)
ETA_INDEF = np.diag([1.0, 1.0, -1.0]).astype(complex)

EQ5_A = np.array([[0, 0.3, 1.2], [0.3, 0, 0], [2, 0, 0]], dtype=complex)
EQ5_B = np.array([[0, 2, -0.6], [2, 0, 0], [-1, 0, 0]], dtype=complex)
EQ6_A = np.array([[0, 2, -1], [2, 0, 0], [1, 0, 0]], dtype=complex)
EQ6_B = np.array([[0, 4, -3], [4, 0, 0], [3, 0, 0]], dtype=complex)

METRICS = {
    "eta_pos": ETA_POS,
    "eta_indef": ETA_INDEF,
    "identity": np.eye(3, dtype=complex),
}

OBSERVABLES = {
    "eq5.A": EQ5_A,
    "eq5.B": EQ5_B,
    "eq6.A": EQ6_A,
    "eq6.B": EQ6_B,
}

# metric each observable fixture was published with
NATURAL_METRIC = {
    "eq5.A": "eta_pos",
    "eq5.B": "eta_pos",
    "eq6.A": "eta_indef",
    "eq6.B": "eta_indef",
}

THETA1_TILTED = np.pi / 2.5


def metric(name: str) -> PHMetric:
    try:
        return make_metric(METRICS[name])
    except KeyError:
        raise ConfigParse(f"unknown metric fixture {name!r}", known=sorted(METRICS)) from None


def observable_matrix(name: str) -> np.ndarray:
    try:
        return OBSERVABLES[name].copy()
    except KeyError:
        raise ConfigParse(
            f"unknown observable fixture {name!r}", known=sorted(OBSERVABLES)
        ) from None


def observable(name: str, metric_name: str | None = None) -> PHObservable:
    mname = metric_name or NATURAL_METRIC.get(name)
    if mname is None:
        raise ConfigParse(f"unknown observable fixture {name!r}", known=sorted(OBSERVABLES))
    return check_pseudo_hermitian(observable_matrix(name), metric(mname))


def theta_state(theta1: float, theta2: float) -> np.ndarray:
    """Unnormalized ``(cos t1 sin t2, cos t1 cos t2, sin t1)``."""
    c1 = np.cos(theta1)
    return np.array([c1 * np.sin(theta2), c1 * np.cos(theta2), np.sin(theta1)], dtype=complex)
