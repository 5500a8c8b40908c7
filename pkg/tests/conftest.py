import math

import numpy as np
import pytest

from isacsim.config import default_scenario


def make_scenario(
    n_tx=8,
    n_rx=8,
    n_users=2,
    n_clusters=3,
    seed=12345,
    rcs=1.0,
    p_max=1.0,
    p_0=None,
    csi_noise_std=0.0,
):
    """Small deterministic scenario used across the test suite."""
    return default_scenario(
        n_tx=n_tx,
        n_rx=n_rx,
        n_users=n_users,
        n_clusters=n_clusters,
        seed=seed,
        episodes=500,
        rcs=rcs,
        p_max=p_max,
        p_0=p_0,
        csi_noise_std=csi_noise_std,
    )


@pytest.fixture
def desk_scenario():
    return make_scenario()


def random_snapshot(rng, n_tx=8, n_rx=8, n_users=2, gain_scale=1e-7, noise=5.0119e-14):
    """Synthetic channel snapshot with steering vectors at random directions."""
    from isacsim.array import Direction, steering_vector, uca_geometry
    from isacsim.scenario import ChannelSnapshot

    lam = 299_792_458.0 / 39e9
    tx = uca_geometry(n_tx, lam)
    rx = uca_geometry(n_rx, lam)
    d = Direction(rng.uniform(0.3, math.pi - 0.3), rng.uniform(0.0, 2.0 * math.pi))
    h = 1e-5 * (
        rng.standard_normal((n_users, n_tx)) + 1j * rng.standard_normal((n_users, n_tx))
    )
    return ChannelSnapshot(
        user_channels=h,
        target_direction=d,
        b_tx_target=steering_vector(tx, d),
        b_rx_target=steering_vector(rx, d),
        sensing_gain=gain_scale * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi)),
        target_distance=rng.uniform(10.0, 150.0),
        episode_index=0,
        noise_power_user=noise,
        noise_power_bs=noise,
    )


def random_action(rng, n_tx=8, n_users=2, p_total=1.0):
    """Random beams scaled so the total transmit power equals ``p_total``."""
    from isacsim.metrics import BeamformingAction

    w = rng.standard_normal((n_tx, n_users)) + 1j * rng.standard_normal((n_tx, n_users))
    ws = rng.standard_normal(n_tx) + 1j * rng.standard_normal(n_tx)
    total = np.sum(np.abs(w) ** 2) + np.sum(np.abs(ws) ** 2)
    scale = math.sqrt(p_total / total)
    return BeamformingAction(comm_beams=scale * w, sense_beam=scale * ws)
