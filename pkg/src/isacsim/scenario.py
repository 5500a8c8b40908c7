"""Time-evolving environment: users, clusters, target trajectory, channels.

A scenario is fully described by an immutable :class:`ScenarioConfig`.  Each
episode index maps deterministically to one frozen :class:`ChannelSnapshot`
(channel vectors, target steering vectors, combined sensing gain) derived from
the scenario seed, so runs are reproducible from the configuration alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .array import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    Direction,
    direction_to,
    steering_vector,
    uca_geometry,
)

# fixed reflection loss applied to every non-line-of-sight path (10 dB)
NLOS_REFLECTION_LOSS = 10.0 ** (-10.0 / 20.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError("power must be positive to convert to dBm")
    return 10.0 * math.log10(watts * 1e3)


def dbsm_to_m2(dbsm: float) -> float:
    """Radar cross-section from dB(m^2) to m^2."""
    return 10.0 ** (dbsm / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Static description of the simulated ISAC downlink scene.

    Powers are linear watts and the RCS is linear m^2; dB conversions happen
    at configuration-load time.  ``n_paths`` counts the line-of-sight path plus
    one path per cluster.
    """

    carrier_frequency: float
    n_tx: int
    n_rx: int
    n_users: int
    user_positions: np.ndarray  # (J, 3) meters
    cluster_positions: np.ndarray  # (L-1, 3) meters
    target_waypoints_times: np.ndarray  # (M,) seconds, strictly increasing
    target_waypoints_positions: np.ndarray  # (M, 3) meters
    rcs: float  # m^2
    noise_power_user: float  # W
    noise_power_bs: float  # W
    p_max: float  # W
    p_0: float  # W, per-beam cap (p_0 == p_max disables it)
    slot_duration: float  # s
    n_paths: int
    rng_seed: int
    element_spacing_wavelengths: float = 0.5
    target_distance_bounds: tuple = (10.0, 150.0)
    csi_noise_std: float = 0.0  # additive channel-knowledge error, 0 = perfect CSI

    def __post_init__(self):
        users = np.atleast_2d(np.asarray(self.user_positions, dtype=float))
        clusters = np.asarray(self.cluster_positions, dtype=float).reshape(-1, 3)
        times = np.asarray(self.target_waypoints_times, dtype=float)
        points = np.atleast_2d(np.asarray(self.target_waypoints_positions, dtype=float))
        object.__setattr__(self, "user_positions", users)
        object.__setattr__(self, "cluster_positions", clusters)
        object.__setattr__(self, "target_waypoints_times", times)
        object.__setattr__(self, "target_waypoints_positions", points)

        if self.carrier_frequency <= 0.0:
            raise ValueError("carrier_frequency must be positive")
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("antenna counts must be >= 1")
        if users.shape != (self.n_users, 3):
            raise ValueError(
                f"user_positions must have shape ({self.n_users}, 3), got {users.shape}"
            )
        if self.n_paths != 1 + clusters.shape[0]:
            raise ValueError(
                f"n_paths={self.n_paths} but {clusters.shape[0]} clusters were given "
                "(need n_paths = 1 + number of clusters)"
            )
        for name in ("noise_power_user", "noise_power_bs", "p_max", "p_0", "slot_duration"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.p_0 > self.p_max:
            raise ValueError("p_0 cannot exceed p_max")
        if self.rcs < 0.0:
            raise ValueError("rcs must be nonnegative")
        if times.size == 0:
            raise ValueError("target_waypoints must contain at least one waypoint")
        if times.size != points.shape[0]:
            raise ValueError("waypoint times and positions must have equal length")
        if times.size > 1 and not np.all(np.diff(times) > 0.0):
            raise ValueError("waypoint times must be strictly increasing")
        if np.any(np.linalg.norm(users, axis=1) == 0.0):
            raise ValueError("a user at the origin has no direction")
        if clusters.shape[0] and np.any(np.linalg.norm(clusters, axis=1) == 0.0):
            raise ValueError("a cluster at the origin has no direction")
        d_min, d_max = self.target_distance_bounds
        lo, hi = _trajectory_distance_range(times, points)
        if lo < d_min - 1e-9 or hi > d_max + 1e-9:
            raise ValueError(
                f"target distance range [{lo:.3f}, {hi:.3f}] m leaves the configured "
                f"bounds [{d_min}, {d_max}] m"
            )

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    def tx_geometry(self) -> ArrayGeometry:
        return uca_geometry(self.n_tx, self.wavelength, self.element_spacing_wavelengths)

    def rx_geometry(self) -> ArrayGeometry:
        return uca_geometry(self.n_rx, self.wavelength, self.element_spacing_wavelengths)


def _trajectory_distance_range(times, points):
    """Min/max distance from the origin over the piecewise-linear trajectory."""
    dists = np.linalg.norm(points, axis=1)
    lo = float(np.min(dists))
    hi = float(np.max(dists))
    for a, b in zip(points[:-1], points[1:]):
        seg = b - a
        denom = float(seg @ seg)
        if denom == 0.0:
            continue
        s = -float(a @ seg) / denom
        if 0.0 < s < 1.0:
            lo = min(lo, float(np.linalg.norm(a + s * seg)))
    return lo, hi


@dataclass(frozen=True)
class ChannelSnapshot:
    """One episode's frozen environment.

    ``user_channels`` has shape (J, n_tx); the steering vectors are unit norm.
    Noise powers are carried along so the metric kernels need no extra context.
    """

    user_channels: np.ndarray
    target_direction: Direction
    b_tx_target: np.ndarray
    b_rx_target: np.ndarray
    sensing_gain: complex
    target_distance: float
    episode_index: int
    noise_power_user: float
    noise_power_bs: float

    @property
    def n_users(self) -> int:
        return self.user_channels.shape[0]

    @property
    def n_tx(self) -> int:
        return self.user_channels.shape[1]

    @property
    def n_rx(self) -> int:
        return self.b_rx_target.shape[0]


def target_position(cfg: ScenarioConfig, t: int) -> np.ndarray:
    """Piecewise-linear target position at episode ``t`` (time t * slot_duration).

    Clamps to the first/last waypoint outside the covered time span.
    """
    if t < 0:
        raise ValueError("episode index must be >= 0")
    time = t * cfg.slot_duration
    times = cfg.target_waypoints_times
    points = cfg.target_waypoints_positions
    return np.array([np.interp(time, times, points[:, i]) for i in range(3)])


def sensing_gain(
    d0: float, rcs: float, wavelength: float, n_tx: int, n_rx: int
) -> complex:
    """Combined two-way sensing channel gain for a target at distance ``d0``.

    Magnitude sqrt(n_tx n_rx) sqrt(rcs) lambda / ((4 pi)^(3/2) d0^2) with the
    round-trip phase exp(-i 2 pi (2 d0) / lambda).
    """
    if d0 <= 0.0:
        raise ValueError("target distance must be positive")
    if rcs < 0.0:
        raise ValueError("rcs must be nonnegative")
    magnitude = (
        math.sqrt(n_tx * n_rx)
        * math.sqrt(rcs)
        * wavelength
        / ((4.0 * math.pi) ** 1.5 * d0 * d0)
    )
    phase = -2.0 * math.pi * (2.0 * d0) / wavelength
    return magnitude * complex(math.cos(phase), math.sin(phase))


def episode_rng(cfg: ScenarioConfig, t: int) -> np.random.Generator:
    """Random source for episode ``t``, derived from the scenario seed."""
    return np.random.default_rng(np.random.SeedSequence((cfg.rng_seed, t)))


def draw_channel(
    cfg: ScenarioConfig, t: int, rng: np.random.Generator | None = None
) -> ChannelSnapshot:
    """Draw the frozen channel snapshot for episode ``t``.

    The line-of-sight coefficient is the free-space amplitude with a uniformly
    random phase; each cluster path carries the two-hop free-space amplitude, a
    unit-variance complex Gaussian fade and a fixed 10 dB reflection loss.
    With ``rng`` omitted the draw depends only on (seed, t) and is bitwise
    reproducible.
    """
    if rng is None:
        rng = episode_rng(cfg, t)
    lam = cfg.wavelength
    tx_geom = cfg.tx_geometry()
    n_clusters = cfg.cluster_positions.shape[0]

    user_dists = np.linalg.norm(cfg.user_positions, axis=1)
    cluster_dists = np.linalg.norm(cfg.cluster_positions, axis=1)
    cluster_steering = np.array(
        [steering_vector(tx_geom, direction_to(c)) for c in cfg.cluster_positions]
    ).reshape(n_clusters, cfg.n_tx)

    los_phases = rng.uniform(0.0, 2.0 * math.pi, size=cfg.n_users)
    nlos_fades = (
        rng.standard_normal((cfg.n_users, n_clusters))
        + 1j * rng.standard_normal((cfg.n_users, n_clusters))
    ) / math.sqrt(2.0)

    channels = np.zeros((cfg.n_users, cfg.n_tx), dtype=complex)
    for j in range(cfg.n_users):
        beta0 = lam / (4.0 * math.pi * user_dists[j]) * np.exp(1j * los_phases[j])
        h = beta0 * steering_vector(tx_geom, direction_to(cfg.user_positions[j]))
        for l in range(n_clusters):
            hop = cluster_dists[l] + np.linalg.norm(
                cfg.user_positions[j] - cfg.cluster_positions[l]
            )
            beta_l = (
                lam / (4.0 * math.pi * hop) * nlos_fades[j, l] * NLOS_REFLECTION_LOSS
            )
            h = h + beta_l * cluster_steering[l]
        channels[j] = math.sqrt(cfg.n_tx) * h

    if cfg.csi_noise_std > 0.0:
        channels = channels + cfg.csi_noise_std * (
            rng.standard_normal(channels.shape) + 1j * rng.standard_normal(channels.shape)
        ) / math.sqrt(2.0)

    pos = target_position(cfg, t)
    d0 = float(np.linalg.norm(pos))
    target_dir = direction_to(pos)
    return ChannelSnapshot(
        user_channels=channels,
        target_direction=target_dir,
        b_tx_target=steering_vector(tx_geom, target_dir),
        b_rx_target=steering_vector(cfg.rx_geometry(), target_dir),
        sensing_gain=sensing_gain(d0, cfg.rcs, lam, cfg.n_tx, cfg.n_rx),
        target_distance=d0,
        episode_index=t,
        noise_power_user=cfg.noise_power_user,
        noise_power_bs=cfg.noise_power_bs,
    )
