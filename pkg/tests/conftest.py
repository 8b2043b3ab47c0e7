"""Shared fixtures: one oval scenario reused across the suite.

Truth generation and log synthesis dominate test runtime, so the heavy
artifacts are built once per session and treated as read-only.
"""

import numpy as np
import pytest

from markerloc import (
    CameraSpec,
    NoiseSpec,
    SensorRates,
    generate_truth,
    oval_map,
    synthesize_log,
)


@pytest.fixture(scope="session")
def oval():
    return oval_map()


@pytest.fixture(scope="session")
def oval_truth(oval):
    return generate_truth(oval, speed=1.0, dt=0.01, laps=1.0)


@pytest.fixture(scope="session")
def oval_reference(oval_truth):
    return oval_truth.reference()


@pytest.fixture(scope="session")
def camera():
    return CameraSpec()


@pytest.fixture(scope="session")
def oval_markers(oval):
    return oval.markers_by_id()


@pytest.fixture(scope="session")
def clean_log(oval_truth, oval, camera):
    return synthesize_log(
        oval_truth, oval, NoiseSpec.noiseless(), SensorRates(), camera=camera, seed=0
    )


@pytest.fixture(scope="session")
def outlier_log(oval_truth, oval, camera):
    return synthesize_log(
        oval_truth,
        oval,
        NoiseSpec(outlier_prob=0.1),
        SensorRates(),
        camera=camera,
        seed=0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
