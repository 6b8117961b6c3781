import numpy as np
import pytest
from hypothesis import settings

from sparsebeam import ChannelSet, PowerModel, QosTargets

# wall-clock deadlines make property tests flaky on loaded machines
settings.register_profile("no_deadline", deadline=None)
settings.load_profile("no_deadline")


def rayleigh(rng, k, nt):
    """One (K, N_t) draw of unit-variance circularly symmetric entries."""
    return (rng.standard_normal((k, nt)) + 1j * rng.standard_normal((k, nt))) / np.sqrt(2.0)


def channel_set(h):
    """Wrap a single-band (K, N_t) array as a ChannelSet."""
    h = np.asarray(h, dtype=complex)
    return ChannelSet(h.shape[1], h.shape[0], 1, h[None])


@pytest.fixture
def pm():
    """Reference power model: c1=0.3 W, 30% amplifier efficiency."""
    return PowerModel()


@pytest.fixture
def qos4():
    """Four users, 3 dB targets, unit noise."""
    return QosTargets.uniform(4)
