import numpy as np
import pytest

from secrecy_region import ChannelStats, Scenario, draw_batches

K_H1 = np.array([[0.2, 0.0], [0.0, 0.04]])
K_H2 = np.array([[0.1, 0.08], [0.08, 0.1]])
MU1 = np.array([0.7, 0.1])
MU2 = np.array([0.1, 0.6])


def rayleigh(p_t=10.0, **kw):
    return Scenario(ChannelStats(np.zeros(2), K_H1, "user1"), ChannelStats(np.zeros(2), K_H2, "user2"),
                    p_t, **kw)


def rician(p_t=10.0, **kw):
    return Scenario(ChannelStats(MU1, K_H1, "user1"), ChannelStats(MU2, K_H2, "user2"), p_t, **kw)


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    a = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return a @ a.conj().T / n


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def rayleigh_small():
    sc = rayleigh(mc_samples=20_000, alpha_grid=11)
    return sc, draw_batches(sc)
