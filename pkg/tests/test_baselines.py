import math

import numpy as np
import pytest
from scipy import stats

from isacsim.array import Direction, steering_vector, uca_geometry
from isacsim.baselines import (
    Codebook,
    DqnAgent,
    DqnConfig,
    build_codebook,
    dqn_train,
    random_policy,
    random_rollouts,
)
from isacsim.env import IsacEnv, mrt_warm_start
from isacsim.metrics import sum_spectral_efficiency
from isacsim.scenario import draw_channel

from conftest import make_scenario


def test_random_policy_power_equality():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a = random_policy(rng, 8, 2, 1.0)
        assert abs(a.total_power() - 1.0) <= 1e-9


def test_random_policy_reproducible():
    a1 = random_policy(np.random.default_rng(7), 8, 2, 1.0)
    a2 = random_policy(np.random.default_rng(7), 8, 2, 1.0)
    np.testing.assert_array_equal(a1.comm_beams, a2.comm_beams)
    np.testing.assert_array_equal(a1.sense_beam, a2.sense_beam)


def test_random_policy_below_mrt_on_paired_episodes(desk_scenario):
    rng = np.random.default_rng(1)
    rand_rates = []
    mrt_rates = []
    for t in range(1000):
        snap = draw_channel(desk_scenario, t)
        a_rand = random_policy(rng, 8, 2, desk_scenario.p_max)
        a_mrt = mrt_warm_start(snap, desk_scenario.p_max)
        rand_rates.append(sum_spectral_efficiency(snap, a_rand))
        mrt_rates.append(sum_spectral_efficiency(snap, a_mrt))
    assert np.mean(rand_rates) < np.mean(mrt_rates)


@pytest.fixture(scope="module")
def tx_geometry_16():
    return uca_geometry(16, wavelength=299_792_458.0 / 39e9)


def test_codebook_size_and_norms(tx_geometry_16):
    cb = build_codebook(16, 512, tx_geometry_16)
    assert cb.size == 512
    assert cb.n_tx == 16
    np.testing.assert_allclose(np.linalg.norm(cb.beams, axis=1), 1.0, atol=1e-12)


def test_codebook_entries_are_steering_vectors(tx_geometry_16):
    cb = build_codebook(16, 512, tx_geometry_16)
    for i in (0, 100, 511):
        theta, phi = cb.directions[i]
        b = steering_vector(tx_geometry_16, Direction(theta=theta, phi=phi))
        np.testing.assert_array_equal(cb.beams[i], b)


@pytest.mark.parametrize("n_tx", [8, 16])
def test_codebook_covers_random_directions(n_tx):
    geo = uca_geometry(n_tx, wavelength=299_792_458.0 / 39e9)
    cb = build_codebook(n_tx, 512, geo)
    rng = np.random.default_rng(2)
    for _ in range(500):
        theta = math.acos(rng.uniform(-1.0, 1.0))
        phi = rng.uniform(0.0, 2.0 * math.pi)
        b = steering_vector(geo, Direction(theta=theta, phi=phi))
        assert np.max(np.abs(cb.beams.conj() @ b)) >= 0.5


def test_codebook_beams_distinct(tx_geometry_16):
    cb = build_codebook(16, 512, tx_geometry_16)
    corr = np.abs(cb.beams.conj() @ cb.beams.T)
    np.fill_diagonal(corr, 0.0)
    assert corr.max() < 1.0 - 1e-9


def test_codebook_invalid_arguments(tx_geometry_16):
    with pytest.raises(ValueError):
        build_codebook(16, 0, tx_geometry_16)
    with pytest.raises(ValueError):
        build_codebook(16, 512, tx_geometry_16, n_azimuth=7, n_elevation=8)
    with pytest.raises(ValueError):
        build_codebook(8, 512, tx_geometry_16)


def test_dqn_config_validation():
    with pytest.raises(ValueError):
        DqnConfig(power_levels=1)
    with pytest.raises(ValueError):
        DqnConfig(codebook_size=0)
    with pytest.raises(ValueError):
        DqnConfig(gamma=-0.1)


def tiny_dqn(seed=0, state_dim=12, n_users=2, n_tx=8, codebook_size=32, **kw):
    defaults = dict(codebook_size=codebook_size, hidden_sizes=(16, 12))
    defaults.update(kw)
    cfg = DqnConfig(**defaults)
    geo = uca_geometry(n_tx, wavelength=299_792_458.0 / 39e9)
    cb = build_codebook(n_tx, codebook_size, geo)
    return DqnAgent(state_dim, n_users, cfg, cb, p_max=1.0, n_tx=n_tx,
                    rng=np.random.default_rng(seed))


def test_dqn_head_layout():
    agent = tiny_dqn()
    assert agent.n_heads == 6
    widths = [sl.stop - sl.start for sl in agent.head_slices]
    assert widths == [32, 32, 32, 10, 10, 10]
    assert agent.net.output_dim == 3 * 32 + 3 * 10


def test_dqn_greedy_deterministic():
    agent = tiny_dqn()
    s = np.random.default_rng(3).standard_normal(12)
    np.testing.assert_array_equal(agent.act(s, epsilon=0.0),
                                  agent.act(s, epsilon=0.0))


def test_dqn_pure_exploration_uniform_chi_square():
    agent = tiny_dqn(seed=4)
    s = np.zeros(12)
    draws = 10_000
    counts = np.zeros((agent.n_heads, 32))
    for _ in range(draws):
        idx = agent.act(s, epsilon=1.0)
        for h in range(agent.n_heads):
            counts[h, idx[h]] += 1
    for h, sl in enumerate(agent.head_slices):
        width = sl.stop - sl.start
        obs = counts[h, :width]
        expected = draws / width
        chi2 = float(np.sum((obs - expected) ** 2) / expected)
        assert chi2 < stats.chi2.ppf(0.999, width - 1)


def test_dqn_assemble_power_levels():
    agent = tiny_dqn()
    # all heads at the top level: even split, projection is a no-op
    top = np.array([0, 1, 2, 9, 9, 9])
    a = agent.assemble(top)
    assert a.total_power() == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(a.beam_powers(), 1.0 / 3.0, rtol=1e-12)
    # mixed levels keep their pre-projection proportions
    mixed = np.array([0, 1, 2, 9, 4, 1])
    a = agent.assemble(mixed)
    assert abs(a.total_power() - 1.0) <= 1e-9
    powers = a.beam_powers()
    np.testing.assert_allclose(powers / powers[0],
                               np.array([10.0, 5.0, 2.0]) / 10.0, rtol=1e-9)


def test_dqn_assemble_always_feasible():
    agent = tiny_dqn(seed=5)
    rng = np.random.default_rng(6)
    for _ in range(200):
        idx = np.concatenate([rng.integers(0, 32, 3), rng.integers(0, 10, 3)])
        a = agent.assemble(idx)
        assert abs(a.total_power() - 1.0) <= 1e-9


def test_dqn_epsilon_decay_floor():
    agent = tiny_dqn(epsilon_initial=1.0, epsilon_final=0.5, epsilon_decay=0.5)
    for _ in range(10):
        agent.decay_epsilon()
    assert agent.epsilon == 0.5


def test_dqn_overfits_single_transition():
    agent = tiny_dqn(seed=7, gamma=0.0, lr=1e-3, batch_size=4)
    rng = np.random.default_rng(8)
    s = rng.standard_normal(12)
    idx = np.array([3, 1, 4, 2, 5, 0], dtype=float)
    agent.buffer.push(s, idx, 0.9, rng.standard_normal(12), False)
    loss = math.inf
    for _ in range(3000):
        batch = agent.buffer.sample(4, agent.rng)
        loss = agent.update(*batch)
    assert loss < 1e-6


def test_dqn_train_deterministic(desk_scenario):
    def run():
        env = IsacEnv(desk_scenario, rho=0.2, steps_per_episode=10)
        agent = tiny_dqn(seed=9, state_dim=env.state_dim, batch_size=8)
        log = dqn_train(env, agent, episodes=2)
        return log.episode_column("reward")

    r1, r2 = run(), run()
    np.testing.assert_array_equal(r1, r2)
    assert len(r1) == 2


def test_dqn_train_logs_epsilon(desk_scenario):
    env = IsacEnv(desk_scenario, rho=0.2, steps_per_episode=10)
    agent = tiny_dqn(seed=10, state_dim=env.state_dim, batch_size=8,
                     epsilon_decay=0.1)
    log = dqn_train(env, agent, episodes=1)
    eps = log.step_column("noise_std")
    assert eps[0] == 1.0
    assert np.all(np.diff(eps) <= 0)


def test_random_rollouts_deterministic(desk_scenario):
    def run():
        env = IsacEnv(desk_scenario, rho=0.2, steps_per_episode=10)
        return random_rollouts(env, episodes=2, seed=11).episode_column("reward")

    np.testing.assert_array_equal(run(), run())
