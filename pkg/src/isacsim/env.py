"""MDP wrapper around the scenario: state encoding, power projection, episodes.

The actor emits a raw real vector (tanh range); :func:`project_power` rebuilds
the complex beams and rescales them so the total transmit power equals the
budget exactly.  States are the complex-split channel snapshot plus the
previous action, passed through a mean normalizer.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import BeamformingAction, reward, sensing_sinr, sum_spectral_efficiency
from .scenario import ChannelSnapshot, ScenarioConfig, draw_channel

logger = logging.getLogger(__name__)

POWER_TOL = 1e-9
"""Relative tolerance on the transmit-power equality after projection."""

CAP_ROUNDS = 5
"""Maximum clip-and-renormalize rounds when the per-beam cap is active."""


class DegenerateActionError(ValueError):
    """Raised when a raw action cannot be projected (all-zero input or an
    unsatisfiable per-beam cap); callers substitute the previous action."""


class PowerConstraintError(RuntimeError):
    """An action fed to the environment violates the power equality."""


def action_dim(n_tx: int, n_users: int) -> int:
    """Length of the real action vector: re/im halves of J+1 beams."""
    return 2 * n_tx * (n_users + 1)


def state_dim(n_tx: int, n_users: int) -> int:
    """Length of the state feature vector: re/im of channels, target steering
    vector, sensing gain and the previous action."""
    return 2 * (n_tx * n_users + n_tx + 1) + action_dim(n_tx, n_users)


def vector_to_action(vec: np.ndarray, n_tx: int, n_users: int) -> BeamformingAction:
    """Reassemble complex beams from the [re..., im...] real vector."""
    m = n_tx * (n_users + 1)
    if vec.shape != (2 * m,):
        raise ValueError(f"expected raw vector of length {2 * m}, got {vec.shape}")
    flat = vec[:m] + 1j * vec[m:]
    return BeamformingAction(
        comm_beams=flat[: n_tx * n_users].reshape(n_tx, n_users, order="F"),
        sense_beam=flat[n_tx * n_users :],
    )


def action_to_vector(a: BeamformingAction) -> np.ndarray:
    flat = np.concatenate([a.comm_beams.reshape(-1, order="F"), a.sense_beam])
    return np.concatenate([flat.real, flat.imag])


def project_power(
    raw: np.ndarray,
    p_max: float,
    n_tx: int,
    n_users: int,
    p_0: float | None = None,
) -> BeamformingAction:
    """Scale the raw beams so the total power equals ``p_max`` exactly.

    With a per-beam cap ``p_0`` < ``p_max``, over-cap beams are clipped and the
    remainder renormalized for at most CAP_ROUNDS rounds.
    """
    raw = np.asarray(raw, dtype=float)
    total = float(raw @ raw)
    if total == 0.0:
        raise DegenerateActionError("all-zero raw action has no direction to scale")
    action = vector_to_action(raw * math.sqrt(p_max / total), n_tx, n_users)
    if p_0 is None or p_0 >= p_max:
        return action

    for _ in range(CAP_ROUNDS):
        powers = action.beam_powers()
        capped = powers > p_0
        if not np.any(capped):
            break
        w = action.comm_beams.copy()
        ws = action.sense_beam.copy()
        for i in np.flatnonzero(capped):
            if i < n_users:
                w[:, i] *= math.sqrt(p_0 / powers[i])
            else:
                ws = ws * math.sqrt(p_0 / powers[i])
        free_power = max(p_max - p_0 * int(np.sum(capped)), 0.0)
        current_free = float(np.sum(powers[~capped])) if np.any(~capped) else 0.0
        if current_free > 0.0:
            boost = math.sqrt(free_power / current_free)
            for i in np.flatnonzero(~capped):
                if i < n_users:
                    w[:, i] *= boost
                else:
                    ws = ws * boost
        action = BeamformingAction(comm_beams=w, sense_beam=ws)
    if abs(action.total_power() - p_max) > 1e-6 * p_max:
        raise DegenerateActionError(
            f"per-beam cap {p_0} W cannot meet the {p_max} W power equality"
        )
    return action


def projection_pullback(raw: np.ndarray, grad_out: np.ndarray, p_max: float) -> np.ndarray:
    """Jacobian-transpose product of the power normalization v -> sqrt(p)v/|v|.

    The component of ``grad_out`` along ``raw`` is annihilated (the projection
    is scale invariant).  Per-beam clipping, when enabled, is ignored here.
    """
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:
        raise DegenerateActionError("projection has no derivative at zero")
    unit = raw / norm
    return (math.sqrt(p_max) / norm) * (grad_out - unit * float(unit @ grad_out))


@dataclass
class Normalizer:
    """Mean normalization with running statistics, frozen after a warmup.

    The mean follows an exponential moving average; the divisor is the running
    min-to-max span, floored so constant coordinates stay finite.
    """

    dim: int
    warmup: int = 2000
    decay: float = 0.999
    running_mean: np.ndarray = field(default=None)
    running_min: np.ndarray = field(default=None)
    running_max: np.ndarray = field(default=None)
    update_count: int = 0
    frozen: bool = False

    def __post_init__(self):
        if self.running_mean is None:
            self.running_mean = np.zeros(self.dim)
            self.running_min = np.zeros(self.dim)
            self.running_max = np.zeros(self.dim)

    def update(self, x: np.ndarray) -> None:
        if self.frozen:
            logger.debug("normalizer update after freeze ignored")
            return
        x = np.asarray(x, dtype=float)
        if self.update_count == 0:
            self.running_mean = x.copy()
            self.running_min = x.copy()
            self.running_max = x.copy()
        else:
            self.running_mean = self.decay * self.running_mean + (1.0 - self.decay) * x
            np.minimum(self.running_min, x, out=self.running_min)
            np.maximum(self.running_max, x, out=self.running_max)
        self.update_count += 1
        if self.update_count >= self.warmup:
            self.frozen = True

    def normalize(self, x: np.ndarray) -> np.ndarray:
        span = np.maximum(self.running_max - self.running_min, 1e-12)
        return (x - self.running_mean) / span

    def state_dict(self) -> dict:
        return {
            "running_mean": self.running_mean.copy(),
            "running_min": self.running_min.copy(),
            "running_max": self.running_max.copy(),
            "update_count": self.update_count,
            "frozen": self.frozen,
        }

    def load_state_dict(self, state: dict) -> None:
        self.running_mean = np.asarray(state["running_mean"], dtype=float).copy()
        self.running_min = np.asarray(state["running_min"], dtype=float).copy()
        self.running_max = np.asarray(state["running_max"], dtype=float).copy()
        self.update_count = int(state["update_count"])
        self.frozen = bool(state["frozen"])


def raw_state_features(snap: ChannelSnapshot, prev: BeamformingAction) -> np.ndarray:
    """Complex-split state: [re/im h_1..h_J, re/im b_tx(target), re/im alpha,
    previous action vector]."""
    parts = []
    for j in range(snap.n_users):
        parts.append(snap.user_channels[j].real)
        parts.append(snap.user_channels[j].imag)
    parts.append(snap.b_tx_target.real)
    parts.append(snap.b_tx_target.imag)
    parts.append([snap.sensing_gain.real, snap.sensing_gain.imag])
    parts.append(action_to_vector(prev))
    return np.concatenate(parts)


def encode_state(
    snap: ChannelSnapshot, prev: BeamformingAction, norm: Normalizer
) -> np.ndarray:
    return norm.normalize(raw_state_features(snap, prev))


@dataclass(frozen=True)
class State:
    features: np.ndarray
    raw_snapshot: ChannelSnapshot
    prev_action: BeamformingAction
    step_index: int
    episode_index: int


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray  # pre-projection (post-tanh) raw vector
    reward: float
    next_state: np.ndarray
    terminal: bool


def mrt_warm_start(snap: ChannelSnapshot, p_max: float) -> BeamformingAction:
    """Matched-filter initialization: each beam along its channel (or the
    target steering vector), equal per-beam power, projected to ``p_max``."""
    n_tx, n_users = snap.n_tx, snap.n_users
    w = np.zeros((n_tx, n_users), dtype=complex)
    for j in range(n_users):
        h = snap.user_channels[j]
        w[:, j] = h / np.linalg.norm(h)
    a = BeamformingAction(comm_beams=w, sense_beam=snap.b_tx_target.copy())
    return project_power(action_to_vector(a), p_max, n_tx, n_users)


class IsacEnv:
    """Episode/step loop over frozen channel snapshots.

    Single-threaded by design; run independent instances for parallel rollouts.
    """

    def __init__(
        self,
        cfg: ScenarioConfig,
        rho: float,
        steps_per_episode: int,
        normalizer: Normalizer | None = None,
    ):
        if not 0.0 <= rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if steps_per_episode < 1:
            raise ValueError("steps_per_episode must be >= 1")
        self.cfg = cfg
        self.rho = rho
        self.steps_per_episode = steps_per_episode
        self.normalizer = normalizer or Normalizer(
            dim=state_dim(cfg.n_tx, cfg.n_users)
        )
        self._state: State | None = None

    @property
    def state_dim(self) -> int:
        return state_dim(self.cfg.n_tx, self.cfg.n_users)

    @property
    def action_dim(self) -> int:
        return action_dim(self.cfg.n_tx, self.cfg.n_users)

    def project(self, raw: np.ndarray) -> BeamformingAction:
        return project_power(
            raw, self.cfg.p_max, self.cfg.n_tx, self.cfg.n_users, self.cfg.p_0
        )

    def _encode(self, snap, prev) -> np.ndarray:
        x = raw_state_features(snap, prev)
        self.normalizer.update(x)
        return self.normalizer.normalize(x)

    def reset(self, t: int) -> State:
        snap = draw_channel(self.cfg, t)
        prev = mrt_warm_start(snap, self.cfg.p_max)
        self._state = State(
            features=self._encode(snap, prev),
            raw_snapshot=snap,
            prev_action=prev,
            step_index=0,
            episode_index=t,
        )
        return self._state

    def step(self, action: BeamformingAction):
        """Apply ``action`` on the frozen snapshot; returns
        (next_state, reward, done, info) with the raw metric values in info."""
        if self._state is None:
            raise RuntimeError("call reset() before step()")
        total = action.total_power()
        if abs(total - self.cfg.p_max) > 1e-6 * self.cfg.p_max:
            raise PowerConstraintError(
                f"action power {total} violates the {self.cfg.p_max} W equality"
            )
        snap = self._state.raw_snapshot
        gamma_c = sum_spectral_efficiency(snap, action)
        nu_s = sensing_sinr(snap, action)
        r = reward(gamma_c, nu_s, self.rho)
        done = self._state.step_index + 1 >= self.steps_per_episode
        next_state = State(
            features=self._encode(snap, action),
            raw_snapshot=snap,
            prev_action=action,
            step_index=self._state.step_index + 1,
            episode_index=self._state.episode_index,
        )
        self._state = next_state
        info = {"sum_rate": gamma_c, "sensing_sinr": nu_s}
        return next_state, r, done, info
