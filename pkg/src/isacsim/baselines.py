"""Comparison policies: random beamforming and a discrete-codebook DQN.

The DQN factors the joint action across per-link heads (one beam head and
one power head per user plus one pair for the sensing beam) on a shared
trunk, which keeps the output layer linear in the codebook size instead of
exponential in the number of links. Both baselines emit the same TrainLog
schema as the DDPG trainer; for the DQN the ``noise_std`` column carries
the current epsilon.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .array import Direction, steering_vector
from .agent import ReplayBuffer, TrainLog
from .env import action_to_vector, project_power
from .metrics import BeamformingAction
from .neural import Adam, DenseNet, soft_update

logger = logging.getLogger(__name__)


def random_policy(rng, n_tx, n_users, p_max, p_0=None):
    """Gaussian beams projected onto the power budget; redraws the measure-zero
    all-zero sample."""
    dim = 2 * n_tx * (n_users + 1)
    while True:
        raw = rng.standard_normal(dim)
        if raw @ raw > 0.0:
            return project_power(raw, p_max, n_tx, n_users, p_0)


@dataclass(frozen=True)
class Codebook:
    """Steered-beam dictionary on an azimuth x elevation grid."""

    beams: np.ndarray  # (size, n_tx) complex, unit-norm rows
    directions: np.ndarray  # (size, 2) [theta, phi]

    @property
    def size(self):
        return self.beams.shape[0]

    @property
    def n_tx(self):
        return self.beams.shape[1]


def build_codebook(n_tx, size, geometry, n_azimuth=None, n_elevation=None):
    """Steering vectors over a uniform azimuth grid and a uniform-in-sine
    elevation grid.

    The planar array cannot tell theta from pi - theta, so elevations live in
    (0, pi/2]; spacing them uniformly in sin(theta) keeps the worst-case
    correlation gap flat across the hemisphere.
    """
    if size < 1:
        raise ValueError("codebook size must be >= 1")
    if geometry.element_positions.shape[0] != n_tx:
        raise ValueError("geometry element count does not match n_tx")
    if n_azimuth is None and n_elevation is None:
        n_elevation = 8 if size % 8 == 0 else 1
        n_azimuth = size // n_elevation
    if n_azimuth is None or n_elevation is None or n_azimuth * n_elevation != size:
        raise ValueError(
            f"cannot factor size {size} into {n_azimuth} x {n_elevation} grid"
        )
    beams = np.empty((size, n_tx), dtype=complex)
    directions = np.empty((size, 2))
    i = 0
    for m in range(n_elevation):
        theta = math.asin((m + 1) / n_elevation)
        for a in range(n_azimuth):
            phi = 2.0 * math.pi * a / n_azimuth
            d = Direction(theta=theta, phi=phi)
            beams[i] = steering_vector(geometry, d)
            directions[i] = (theta, phi)
            i += 1
    return Codebook(beams=beams, directions=directions)


@dataclass(frozen=True)
class DqnConfig:
    codebook_size: int = 512
    power_levels: int = 10
    epsilon_initial: float = 1.0
    epsilon_final: float = 0.05
    epsilon_decay: float = 1e-4
    lr: float = 1e-5
    gamma: float = 0.5
    tau: float = 1e-3
    buffer_capacity: int = 100_000
    batch_size: int = 32
    target_update_interval: int = 2
    hidden_sizes: tuple = (400, 300)

    def __post_init__(self):
        if self.power_levels < 2:
            raise ValueError("power_levels must be >= 2")
        if self.codebook_size < 1:
            raise ValueError("codebook_size must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.batch_size < 1 or self.target_update_interval < 1:
            raise ValueError("batch_size and target_update_interval must be >= 1")


class DqnAgent:
    """Multi-head Q-network over codebook and power-level indices.

    Heads 0..J are beam selectors (codebook_size outputs each), heads
    J+1..2J+1 pick the matching power level; the sensing link is the last
    beam/power pair. Actions are index vectors of length 2(J+1).
    """

    def __init__(self, state_dim, n_users, cfg, codebook, p_max, n_tx,
                 p_0=None, rng=None):
        if codebook.size != cfg.codebook_size:
            raise ValueError("codebook does not match configured size")
        self.cfg = cfg
        self.codebook = codebook
        self.state_dim = int(state_dim)
        self.n_users = int(n_users)
        self.n_tx = int(n_tx)
        self.p_max = float(p_max)
        self.p_0 = p_0
        self.rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        links = n_users + 1
        self.head_slices = []
        off = 0
        for _ in range(links):
            self.head_slices.append(slice(off, off + cfg.codebook_size))
            off += cfg.codebook_size
        for _ in range(links):
            self.head_slices.append(slice(off, off + cfg.power_levels))
            off += cfg.power_levels
        h = list(cfg.hidden_sizes)
        self.net = DenseNet([state_dim] + h + [off], rng=self.rng)
        self.target_net = self.net.copy()
        self.opt = Adam(self.net.parameters(), cfg.lr)
        self.buffer = ReplayBuffer(cfg.buffer_capacity)
        # per-beam power for level m is (m+1)/levels of an even split
        self.level_powers = (np.arange(1, cfg.power_levels + 1)
                             / cfg.power_levels) * (p_max / links)
        self.epsilon = cfg.epsilon_initial
        self.global_step = 0
        self.skipped_updates = 0

    @property
    def n_heads(self):
        return len(self.head_slices)

    def act(self, features, epsilon=0.0):
        """Per-head epsilon-greedy index selection."""
        q = self.net.forward(features)
        idx = np.empty(self.n_heads, dtype=np.int64)
        for h, sl in enumerate(self.head_slices):
            width = sl.stop - sl.start
            if epsilon > 0.0 and self.rng.uniform() < epsilon:
                idx[h] = self.rng.integers(width)
            else:
                idx[h] = int(np.argmax(q[sl]))
        return idx

    def assemble(self, indices):
        """Indexed beams scaled by their power levels, projected to p_max."""
        links = self.n_users + 1
        beams = np.empty((links, self.n_tx), dtype=complex)
        for link in range(links):
            beam = self.codebook.beams[indices[link]]
            p = self.level_powers[indices[links + link]]
            beams[link] = math.sqrt(p) * beam
        raw = action_to_vector(
            BeamformingAction(comm_beams=beams[: self.n_users].T,
                              sense_beam=beams[self.n_users])
        )
        return project_power(raw, self.p_max, self.n_tx, self.n_users, self.p_0)

    def decay_epsilon(self):
        self.epsilon = max(self.cfg.epsilon_final,
                           self.epsilon * (1.0 - self.cfg.epsilon_decay))

    def update(self, states, action_indices, rewards, next_states, terminals):
        """Factored TD step: each head regresses on its own max target."""
        batch = states.shape[0]
        q = self.net.forward(states)
        q_next = self.target_net.forward(next_states)
        grad = np.zeros_like(q)
        rows = np.arange(batch)
        total = 0.0
        for h, sl in enumerate(self.head_slices):
            y = rewards + self.cfg.gamma * (1.0 - terminals) * q_next[:, sl].max(axis=1)
            chosen = sl.start + action_indices[:, h].astype(np.int64)
            err = q[rows, chosen] - y
            total += float(err @ err)
            grad[rows, chosen] += 2.0 * err / (batch * self.n_heads)
        loss = total / (batch * self.n_heads)
        if not np.isfinite(loss):
            self.skipped_updates += 1
            logger.warning("non-finite DQN loss, update skipped")
            return loss
        self.net.backward(grad)
        self.opt.step(self.net.gradients())
        return loss

    def update_target(self):
        soft_update(self.target_net, self.net, self.cfg.tau)


def dqn_train(env, agent, episodes, start_episode=0, log=None):
    """Episode/step loop for the DQN baseline; same TrainLog schema as DDPG."""
    cfg = agent.cfg
    log = TrainLog() if log is None else log
    for t in range(start_episode, start_episode + episodes):
        ep_t0 = time.perf_counter()
        state = env.reset(t)
        rewards = []
        rates = []
        sinrs = []
        for k in range(env.steps_per_episode):
            lat_t0 = time.perf_counter_ns()
            indices = agent.act(state.features, epsilon=agent.epsilon)
            action = agent.assemble(indices)
            latency_us = (time.perf_counter_ns() - lat_t0) / 1e3
            next_state, r, done, info = env.step(action)
            if not np.isfinite(r):
                raise RuntimeError(f"non-finite reward {r} at episode {t} step {k}")
            agent.buffer.push(state.features, indices.astype(float), r,
                              next_state.features, done)
            if agent.buffer.size >= cfg.batch_size:
                s_b, a_b, r_b, s2_b, d_b = agent.buffer.sample(cfg.batch_size,
                                                               agent.rng)
                agent.update(s_b, a_b, r_b, s2_b, d_b)
                log.n_updates += 1
            agent.global_step += 1
            if agent.global_step % cfg.target_update_interval == 0:
                agent.update_target()
            log.add_step(
                episode=t, step=k, reward=r, sum_rate=info["sum_rate"],
                sensing_sinr=info["sensing_sinr"],
                sensing_sinr_db=10.0 * math.log10(max(info["sensing_sinr"], 1e-300)),
                noise_std=agent.epsilon, actor_latency_us=latency_us,
            )
            agent.decay_epsilon()
            rewards.append(r)
            rates.append(info["sum_rate"])
            sinrs.append(info["sensing_sinr"])
            state = next_state
        log.add_episode(
            episode=t,
            reward=float(np.mean(rewards)),
            sum_rate=float(np.mean(rates)),
            sensing_sinr=float(np.mean(sinrs)),
            wall_clock_ms=(time.perf_counter() - ep_t0) * 1e3,
        )
    log.skipped_updates = agent.skipped_updates
    return log


def random_rollouts(env, episodes, seed, start_episode=0, log=None):
    """Rollouts of the random policy in the shared TrainLog schema."""
    rng = np.random.default_rng(seed)
    cfg = env.cfg
    log = TrainLog() if log is None else log
    for t in range(start_episode, start_episode + episodes):
        ep_t0 = time.perf_counter()
        env.reset(t)
        rewards = []
        rates = []
        sinrs = []
        for k in range(env.steps_per_episode):
            lat_t0 = time.perf_counter_ns()
            action = random_policy(rng, cfg.n_tx, cfg.n_users, cfg.p_max, cfg.p_0)
            latency_us = (time.perf_counter_ns() - lat_t0) / 1e3
            _, r, done, info = env.step(action)
            if not np.isfinite(r):
                raise RuntimeError(f"non-finite reward {r} at episode {t} step {k}")
            log.add_step(
                episode=t, step=k, reward=r, sum_rate=info["sum_rate"],
                sensing_sinr=info["sensing_sinr"],
                sensing_sinr_db=10.0 * math.log10(max(info["sensing_sinr"], 1e-300)),
                noise_std=0.0, actor_latency_us=latency_us,
            )
            rewards.append(r)
            rates.append(info["sum_rate"])
            sinrs.append(info["sensing_sinr"])
        log.add_episode(
            episode=t,
            reward=float(np.mean(rewards)),
            sum_rate=float(np.mean(rates)),
            sensing_sinr=float(np.mean(sinrs)),
            wall_clock_ms=(time.perf_counter() - ep_t0) * 1e3,
        )
    return log
