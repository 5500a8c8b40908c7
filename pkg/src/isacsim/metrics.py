"""Closed-form performance kernels: SINRs, spectral efficiency, reward.

The sensing receive beamformer is the generalized-Rayleigh-quotient maximizer
u = R^-1 b_rx, where R is the interference-plus-noise covariance of the echo;
the resulting sensing SINR collapses to the closed form
|alpha|^2 (b_rx^H R^-1 b_rx) |b_tx^H w_s|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .scenario import ChannelSnapshot

REWARD_SINR_FLOOR = 1e-12
"""Floor inside log10 of the sensing term, far below any achievable SINR."""


@dataclass(frozen=True)
class BeamformingAction:
    """Transmit beams: ``comm_beams`` is (n_tx, J) with one column per user,
    ``sense_beam`` is the length-n_tx sensing beam."""

    comm_beams: np.ndarray
    sense_beam: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.comm_beams, dtype=complex)
        ws = np.asarray(self.sense_beam, dtype=complex)
        if w.ndim != 2:
            raise ValueError("comm_beams must be a (n_tx, J) matrix")
        if ws.ndim != 1 or ws.shape[0] != w.shape[0]:
            raise ValueError("sense_beam length must match comm_beams rows")
        object.__setattr__(self, "comm_beams", w)
        object.__setattr__(self, "sense_beam", ws)

    @property
    def n_tx(self) -> int:
        return self.comm_beams.shape[0]

    @property
    def n_users(self) -> int:
        return self.comm_beams.shape[1]

    def total_power(self) -> float:
        return float(
            np.sum(np.abs(self.comm_beams) ** 2) + np.sum(np.abs(self.sense_beam) ** 2)
        )

    def beam_powers(self) -> np.ndarray:
        """Per-beam powers, communication beams first, sensing beam last."""
        comm = np.sum(np.abs(self.comm_beams) ** 2, axis=0)
        return np.append(comm, np.sum(np.abs(self.sense_beam) ** 2))


def comm_sinr(snap: ChannelSnapshot, a: BeamformingAction, j: int) -> float:
    """Downlink SINR of user ``j``: own beam over other beams plus the sensing
    beam plus user noise."""
    if not 0 <= j < snap.n_users:
        raise ValueError(f"user index {j} out of range")
    h = snap.user_channels[j]
    gains = np.abs(h.conj() @ a.comm_beams) ** 2
    signal = gains[j]
    interference = float(np.sum(gains)) - float(signal)
    sense_leak = abs(h.conj() @ a.sense_beam) ** 2
    return float(signal / (interference + sense_leak + snap.noise_power_user))


def sum_spectral_efficiency(snap: ChannelSnapshot, a: BeamformingAction) -> float:
    """Sum over users of log2(1 + SINR), in bits/s/Hz."""
    return float(
        sum(math.log2(1.0 + comm_sinr(snap, a, j)) for j in range(snap.n_users))
    )


def interference_covariance(snap: ChannelSnapshot, a: BeamformingAction) -> np.ndarray:
    """Covariance of the communication beams' echo plus receiver noise.

    R = sum_j |alpha|^2 (A w_j)(A w_j)^H + sigma_bs^2 I with A = b_rx b_tx^H.
    Because A is rank one, A w_j = (b_tx^H w_j) b_rx and the sum collapses to
    a single rank-one term.
    """
    gain2 = abs(snap.sensing_gain) ** 2
    tx_proj = snap.b_tx_target.conj() @ a.comm_beams  # (J,) scalars b_tx^H w_j
    echo_power = gain2 * float(np.sum(np.abs(tx_proj) ** 2))
    n_rx = snap.n_rx
    R = echo_power * np.outer(snap.b_rx_target, snap.b_rx_target.conj())
    R[np.diag_indices(n_rx)] += snap.noise_power_bs
    return R


def rq_receive_beamformer(snap: ChannelSnapshot, a: BeamformingAction) -> np.ndarray:
    """Rayleigh-quotient-optimal receive beamformer u = R^-1 b_rx, computed via
    a Hermitian solve."""
    R = interference_covariance(snap, a)
    try:
        return scipy.linalg.solve(R, snap.b_rx_target, assume_a="pos")
    except (scipy.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
        raise np.linalg.LinAlgError(f"interference covariance is singular: {exc}")


def sensing_sinr_for_receiver(
    snap: ChannelSnapshot, a: BeamformingAction, u: np.ndarray
) -> float:
    """Explicit sensing SINR quotient |u^H alpha A w_s|^2 / (u^H R u) for an
    arbitrary receive beamformer ``u``."""
    R = interference_covariance(snap, a)
    echo = snap.sensing_gain * snap.b_rx_target * (
        snap.b_tx_target.conj() @ a.sense_beam
    )
    num = abs(u.conj() @ echo) ** 2
    den = float(np.real(u.conj() @ R @ u))
    return float(num / den)


def sensing_sinr(snap: ChannelSnapshot, a: BeamformingAction) -> float:
    """Sensing SINR at the optimal receive beamformer:
    |alpha|^2 (b_rx^H R^-1 b_rx) |b_tx^H w_s|^2."""
    R = interference_covariance(snap, a)
    solved = scipy.linalg.solve(R, snap.b_rx_target, assume_a="pos")
    quad = float(np.real(snap.b_rx_target.conj() @ solved))
    tx_gain = abs(snap.b_tx_target.conj() @ a.sense_beam) ** 2
    return float(abs(snap.sensing_gain) ** 2 * quad * tx_gain)


def reward(gamma_c: float, nu_s: float, rho: float) -> float:
    """Scalar training reward: rho * sum-rate + (1 - rho) * log10(sensing SINR).

    ``rho`` = 1 optimizes communication only.  The sensing SINR is floored at
    REWARD_SINR_FLOOR so an all-communication beam set cannot produce -inf.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if nu_s < 0.0:
        raise ValueError("sensing SINR cannot be negative")
    return float(rho * gamma_c + (1.0 - rho) * math.log10(max(nu_s, REWARD_SINR_FLOOR)))
