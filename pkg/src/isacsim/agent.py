"""DDPG learner for joint beamforming and power control.

Actor and critic are the dense nets from :mod:`isacsim.neural`; the critic
always sees the power-projected action, and the actor gradient is chained
through the projection Jacobian so the optimized policy is the one actually
deployed. Exploration is additive Gaussian noise on the tanh output with a
per-step multiplicative decay.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .env import (
    DegenerateActionError,
    Normalizer,
    action_to_vector,
    project_power,
    projection_pullback,
)
from .neural import Adam, DenseNet, soft_update

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

STEP_COLUMNS = (
    "episode",
    "step",
    "reward",
    "sum_rate",
    "sensing_sinr",
    "sensing_sinr_db",
    "noise_std",
    "actor_latency_us",
)
EPISODE_COLUMNS = ("episode", "reward", "sum_rate", "sensing_sinr", "wall_clock_ms")


@dataclass
class TrainLog:
    """Per-step and per-episode training records, one row per event."""

    step_rows: list = field(default_factory=list)
    episode_rows: list = field(default_factory=list)
    skipped_updates: int = 0
    n_updates: int = 0

    def add_step(self, **kw):
        self.step_rows.append(tuple(kw[c] for c in STEP_COLUMNS))

    def add_episode(self, **kw):
        self.episode_rows.append(tuple(kw[c] for c in EPISODE_COLUMNS))

    def step_column(self, name):
        i = STEP_COLUMNS.index(name)
        return np.array([row[i] for row in self.step_rows])

    def episode_column(self, name):
        i = EPISODE_COLUMNS.index(name)
        return np.array([row[i] for row in self.episode_rows])


class ReplayBuffer:
    """Fixed-capacity FIFO ring over flat transition arrays.

    Storage is allocated lazily from the first pushed shapes; sampling is
    uniform with replacement.
    """

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.size = 0
        self.cursor = 0
        self.states = None
        self.actions = None
        self.rewards = None
        self.next_states = None
        self.terminals = None

    def _allocate(self, state_dim, action_dim):
        self.states = np.zeros((self.capacity, state_dim))
        self.actions = np.zeros((self.capacity, action_dim))
        self.rewards = np.zeros(self.capacity)
        self.next_states = np.zeros((self.capacity, state_dim))
        self.terminals = np.zeros(self.capacity)

    def push(self, state, action, reward, next_state, terminal):
        if self.states is None:
            self._allocate(len(state), len(action))
        i = self.cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.terminals[i] = float(terminal)
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size, rng):
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return (
            self.states[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_states[idx],
            self.terminals[idx],
        )

    def state_arrays(self, prefix="buf_"):
        if self.states is None or self.size == 0:
            return {}
        if self.size == self.capacity:
            # roll so index 0 is the oldest entry; cursor restarts at 0
            shift = -self.cursor
            return {
                f"{prefix}states": np.roll(self.states, shift, axis=0),
                f"{prefix}actions": np.roll(self.actions, shift, axis=0),
                f"{prefix}rewards": np.roll(self.rewards, shift),
                f"{prefix}next_states": np.roll(self.next_states, shift, axis=0),
                f"{prefix}terminals": np.roll(self.terminals, shift),
            }
        return {
            f"{prefix}states": self.states[: self.size],
            f"{prefix}actions": self.actions[: self.size],
            f"{prefix}rewards": self.rewards[: self.size],
            f"{prefix}next_states": self.next_states[: self.size],
            f"{prefix}terminals": self.terminals[: self.size],
        }

    def load_state_arrays(self, arrays, prefix="buf_"):
        key = f"{prefix}states"
        if key not in arrays:
            return
        states = arrays[key]
        n = states.shape[0]
        if n > self.capacity:
            raise ValueError("stored buffer exceeds configured capacity")
        self._allocate(states.shape[1], arrays[f"{prefix}actions"].shape[1])
        self.states[:n] = states
        self.actions[:n] = arrays[f"{prefix}actions"]
        self.rewards[:n] = arrays[f"{prefix}rewards"]
        self.next_states[:n] = arrays[f"{prefix}next_states"]
        self.terminals[:n] = arrays[f"{prefix}terminals"]
        self.size = n
        self.cursor = n % self.capacity


@dataclass(frozen=True)
class DdpgConfig:
    gamma: float = 0.5
    tau: float = 1e-6
    batch_size: int = 32
    target_update_interval: int = 2
    noise_std_initial: float = 0.1
    noise_decay: float = 1e-5
    episodes: int = 5000
    steps_per_episode: int = 20
    lr_actor: float = 1e-5
    lr_critic: float = 1e-5
    buffer_capacity: int = 100_000
    hidden_sizes: tuple = (400, 300)
    actor_final_scale: float = 3e-3

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.batch_size < 1 or self.target_update_interval < 1:
            raise ValueError("batch_size and target_update_interval must be >= 1")
        if self.episodes < 1 or self.steps_per_episode < 1:
            raise ValueError("episodes and steps_per_episode must be >= 1")


class DdpgAgent:
    """Actor/critic pair with target twins, replay, and projection-aware updates."""

    def __init__(self, state_dim, action_dim, cfg, p_max, n_tx, n_users,
                 p_0=None, rng=None):
        self.cfg = cfg
        self.state_dim = int(state_dim)
        self.action_dim = int(action_dim)
        self.p_max = float(p_max)
        self.p_0 = p_0
        self.n_tx = int(n_tx)
        self.n_users = int(n_users)
        self.rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        h = list(cfg.hidden_sizes)
        self.actor = DenseNet([state_dim] + h + [action_dim], output_activation="tanh",
                              final_scale=cfg.actor_final_scale, rng=self.rng)
        self.critic = DenseNet([state_dim + action_dim] + h + [1], rng=self.rng)
        self.target_actor = self.actor.copy()
        self.target_critic = self.critic.copy()
        self.actor_opt = Adam(self.actor.parameters(), cfg.lr_actor)
        self.critic_opt = Adam(self.critic.parameters(), cfg.lr_critic)
        self.buffer = ReplayBuffer(cfg.buffer_capacity)
        self.noise_std = cfg.noise_std_initial
        self.global_step = 0
        self.skipped_updates = 0

    def act(self, features, noise_std=0.0):
        """Policy output with optional exploration noise, clamped to [-1, 1]."""
        a = self.actor.forward(features)
        if noise_std > 0.0:
            a = a + self.rng.normal(0.0, noise_std, size=a.shape)
        return np.clip(a, -1.0, 1.0)

    def project_rows(self, raws):
        """Power projection applied to each row of a raw-action batch."""
        if self.p_0 is None or self.p_0 >= self.p_max:
            norms = np.linalg.norm(raws, axis=1, keepdims=True)
            if np.any(norms == 0.0):
                raise DegenerateActionError("all-zero raw action in batch")
            return raws * (math.sqrt(self.p_max) / norms)
        return np.stack([
            action_to_vector(project_power(r, self.p_max, self.n_tx,
                                           self.n_users, self.p_0))
            for r in raws
        ])

    def critic_targets(self, rewards, next_states, terminals):
        """TD targets from the target twins; terminal transitions use r alone."""
        a_next = self.target_actor.forward(next_states)
        q_next = self.target_critic.forward(
            np.concatenate([next_states, self.project_rows(a_next)], axis=1)
        )[:, 0]
        return rewards + self.cfg.gamma * (1.0 - terminals) * q_next

    def critic_update(self, states, actions_raw, targets):
        """One Adam step on the mean-squared TD error; returns the loss."""
        batch = states.shape[0]
        x = np.concatenate([states, self.project_rows(actions_raw)], axis=1)
        q = self.critic.forward(x)[:, 0]
        err = q - targets
        loss = float(np.mean(err**2))
        if not np.isfinite(loss):
            self.skipped_updates += 1
            logger.warning("non-finite critic loss, update skipped")
            return loss
        self.critic.backward((2.0 * err / batch)[:, None])
        self.critic_opt.step(self.critic.gradients())
        return loss

    def actor_update(self, states):
        """Ascend mean Q(s, P(mu(s))); returns the pre-update mean Q."""
        batch = states.shape[0]
        a_raw = self.actor.forward(states)
        x = np.concatenate([states, self.project_rows(a_raw)], axis=1)
        q = self.critic.forward(x)[:, 0]
        mean_q = float(np.mean(q))
        # descent on -mean(Q): dL/dq = -1/B, take the critic's input gradient
        g_in = self.critic.backward(np.full((batch, 1), -1.0 / batch))
        g_proj = g_in[:, self.state_dim:]
        g_raw = np.empty_like(a_raw)
        for i in range(batch):
            g_raw[i] = projection_pullback(a_raw[i], g_proj[i], self.p_max)
        if not np.all(np.isfinite(g_raw)):
            self.skipped_updates += 1
            logger.warning("non-finite actor gradient, update skipped")
            return mean_q
        self.actor.backward(g_raw)
        self.actor_opt.step(self.actor.gradients())
        return mean_q

    def update_targets(self):
        soft_update(self.target_actor, self.actor, self.cfg.tau)
        soft_update(self.target_critic, self.critic, self.cfg.tau)

    def decay_noise(self):
        self.noise_std *= 1.0 - self.cfg.noise_decay


def train(env, agent, episodes=None, start_episode=0, checkpoint_dir=None,
          checkpoint_interval=0, log=None):
    """Run the episode/step training loop; returns the accumulated TrainLog.

    ``start_episode`` supports bit-exact resume from a checkpoint: the caller
    restores the agent and the env's normalizer first, then continues here.
    """
    cfg = agent.cfg
    episodes = cfg.episodes if episodes is None else episodes
    log = TrainLog() if log is None else log
    for t in range(start_episode, start_episode + episodes):
        ep_t0 = time.perf_counter()
        state = env.reset(t)
        rewards = []
        rates = []
        sinrs = []
        for k in range(env.steps_per_episode):
            lat_t0 = time.perf_counter_ns()
            raw = agent.act(state.features, noise_std=agent.noise_std)
            try:
                action = env.project(raw)
            except DegenerateActionError:
                raw = action_to_vector(state.prev_action)
                action = state.prev_action
            latency_us = (time.perf_counter_ns() - lat_t0) / 1e3
            next_state, r, done, info = env.step(action)
            if not np.isfinite(r):
                raise RuntimeError(
                    f"non-finite reward {r} at episode {t} step {k}"
                )
            agent.buffer.push(state.features, raw, r, next_state.features, done)
            if agent.buffer.size >= cfg.batch_size:
                s_b, a_b, r_b, s2_b, d_b = agent.buffer.sample(cfg.batch_size,
                                                               agent.rng)
                targets = agent.critic_targets(r_b, s2_b, d_b)
                agent.critic_update(s_b, a_b, targets)
                agent.actor_update(s_b)
                log.n_updates += 1
            agent.global_step += 1
            if agent.global_step % cfg.target_update_interval == 0:
                agent.update_targets()
            log.add_step(
                episode=t, step=k, reward=r, sum_rate=info["sum_rate"],
                sensing_sinr=info["sensing_sinr"],
                sensing_sinr_db=10.0 * math.log10(max(info["sensing_sinr"], 1e-300)),
                noise_std=agent.noise_std, actor_latency_us=latency_us,
            )
            agent.decay_noise()
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
        if checkpoint_dir is not None and checkpoint_interval > 0 \
                and (t + 1) % checkpoint_interval == 0:
            save_checkpoint(f"{checkpoint_dir}/checkpoint_{t + 1:06d}.npz",
                            agent, env.normalizer, t)
    log.skipped_updates = agent.skipped_updates
    return log


def save_checkpoint(path, agent, normalizer, episode):
    """Write everything needed for bit-exact resume into one npz file."""
    cfg = asdict(agent.cfg)
    cfg["hidden_sizes"] = list(cfg["hidden_sizes"])
    meta = {
        "version": CHECKPOINT_VERSION,
        "cfg": cfg,
        "state_dim": agent.state_dim,
        "action_dim": agent.action_dim,
        "p_max": agent.p_max,
        "p_0": None if agent.p_0 is None else float(agent.p_0),
        "n_tx": agent.n_tx,
        "n_users": agent.n_users,
        "episode": int(episode),
        "global_step": agent.global_step,
        "noise_std": agent.noise_std,
        "skipped_updates": agent.skipped_updates,
        "rng_state": agent.rng.bit_generator.state,
        "normalizer": {
            "dim": normalizer.dim,
            "warmup": normalizer.warmup,
            "decay": normalizer.decay,
            "update_count": normalizer.update_count,
            "frozen": normalizer.frozen,
        },
    }
    arrays = {}
    arrays.update(agent.actor.state_arrays("actor_"))
    arrays.update(agent.critic.state_arrays("critic_"))
    arrays.update(agent.target_actor.state_arrays("tactor_"))
    arrays.update(agent.target_critic.state_arrays("tcritic_"))
    arrays.update(agent.actor_opt.state_arrays("aopt_"))
    arrays.update(agent.critic_opt.state_arrays("copt_"))
    arrays.update(agent.buffer.state_arrays())
    arrays["norm_mean"] = normalizer.running_mean
    arrays["norm_min"] = normalizer.running_min
    arrays["norm_max"] = normalizer.running_max
    np.savez(path, meta=np.str_(json.dumps(meta)), **arrays)


def load_checkpoint(path):
    """Rebuild (agent, normalizer, next_episode) from a checkpoint file."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        cfg_dict = dict(meta["cfg"])
        cfg_dict["hidden_sizes"] = tuple(cfg_dict["hidden_sizes"])
        cfg = DdpgConfig(**cfg_dict)
        agent = DdpgAgent(
            meta["state_dim"], meta["action_dim"], cfg, meta["p_max"],
            meta["n_tx"], meta["n_users"], p_0=meta["p_0"],
            rng=np.random.default_rng(0),
        )
        agent.actor.load_state_arrays(data, "actor_")
        agent.critic.load_state_arrays(data, "critic_")
        agent.target_actor.load_state_arrays(data, "tactor_")
        agent.target_critic.load_state_arrays(data, "tcritic_")
        agent.actor_opt.params = agent.actor.parameters()
        agent.critic_opt.params = agent.critic.parameters()
        agent.actor_opt.load_state_arrays(data, "aopt_")
        agent.critic_opt.load_state_arrays(data, "copt_")
        agent.buffer.load_state_arrays(data)
        agent.global_step = int(meta["global_step"])
        agent.noise_std = float(meta["noise_std"])
        agent.skipped_updates = int(meta["skipped_updates"])
        rng_state = meta["rng_state"]
        agent.rng = np.random.default_rng()
        agent.rng.bit_generator.state = rng_state
        nm = meta["normalizer"]
        normalizer = Normalizer(dim=nm["dim"], warmup=nm["warmup"], decay=nm["decay"])
        normalizer.load_state_dict({
            "running_mean": data["norm_mean"],
            "running_min": data["norm_min"],
            "running_max": data["norm_max"],
            "update_count": nm["update_count"],
            "frozen": nm["frozen"],
        })
    return agent, normalizer, meta["episode"] + 1
