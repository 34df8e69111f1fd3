import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vibecycle.signal_data import DomainLabel, Provenance, VibrationRecord

settings.register_profile(
    "ci",
    deadline=None,
    suppress_health_check=[
        HealthCheck.too_slow,
        HealthCheck.large_base_example,
        HealthCheck.data_too_large,
    ],
)
settings.load_profile("ci")


def make_record(
    samples,
    joint_id=1,
    domain=DomainLabel.UNDAMAGED,
    provenance=Provenance.REAL,
    sample_rate_hz=1024.0,
):
    return VibrationRecord(
        joint_id=joint_id,
        domain=domain,
        provenance=provenance,
        sample_rate_hz=sample_rate_hz,
        samples=np.asarray(samples, dtype=np.float64),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def record_2seg(rng):
    return make_record(rng.standard_normal(2048))
