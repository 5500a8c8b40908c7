"""Antenna array geometry and steering vectors for uniform circular arrays."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
"""Speed of light in m/s."""


@dataclass(frozen=True)
class Direction:
    """Propagation direction: elevation ``theta`` in [0, pi], azimuth ``phi`` in [0, 2*pi)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi}")


def direction_to(position) -> Direction:
    """Direction from the origin toward a 3D ``position`` (meters)."""
    p = np.asarray(position, dtype=float)
    r = np.linalg.norm(p)
    if r == 0.0:
        raise ValueError("cannot compute a direction toward the origin")
    theta = math.acos(np.clip(p[2] / r, -1.0, 1.0))
    phi = math.atan2(p[1], p[0]) % (2.0 * math.pi)
    # atan2 can return 2*pi after the modulo when p[1] is a tiny negative number
    if phi >= 2.0 * math.pi:
        phi = 0.0
    return Direction(theta, phi)


@dataclass(frozen=True)
class ArrayGeometry:
    """Element positions (n, 3) in meters and the carrier wavelength in meters."""

    element_positions: np.ndarray
    wavelength: float

    def __post_init__(self):
        pos = np.asarray(self.element_positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError("element_positions must have shape (n, 3) with n >= 1")
        if self.wavelength <= 0.0:
            raise ValueError("wavelength must be positive")
        object.__setattr__(self, "element_positions", pos)

    @property
    def n_elements(self) -> int:
        return self.element_positions.shape[0]


def uca_positions(n: int, spacing: float) -> np.ndarray:
    """Positions of ``n`` elements on a uniform circular array in the z=0 plane.

    ``spacing`` is the adjacent-element chord distance; the circle radius is
    spacing / (2 sin(pi/n)) and element 0 sits at azimuth 0.  A single element
    degenerates to the origin (the radius formula is singular there).
    """
    if n < 1:
        raise ValueError(f"element count must be >= 1, got {n}")
    if spacing <= 0.0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if n == 1:
        return np.zeros((1, 3))
    radius = spacing / (2.0 * math.sin(math.pi / n))
    angles = 2.0 * math.pi * np.arange(n) / n
    return np.column_stack(
        [radius * np.cos(angles), radius * np.sin(angles), np.zeros(n)]
    )


def uca_geometry(n: int, wavelength: float, spacing_wavelengths: float = 0.5) -> ArrayGeometry:
    """UCA geometry with chord spacing given as a fraction of the wavelength."""
    return ArrayGeometry(uca_positions(n, spacing_wavelengths * wavelength), wavelength)


def wavevector(d: Direction, wavelength: float) -> np.ndarray:
    """Wavevector (2*pi/lambda) [sin(th)cos(ph), sin(th)sin(ph), cos(th)]."""
    if wavelength <= 0.0:
        raise ValueError("wavelength must be positive")
    st = math.sin(d.theta)
    return (2.0 * math.pi / wavelength) * np.array(
        [st * math.cos(d.phi), st * math.sin(d.phi), math.cos(d.theta)]
    )


def steering_vector(g: ArrayGeometry, d: Direction) -> np.ndarray:
    """Unit-norm steering vector: entry n is exp(i k.u_n) / sqrt(N)."""
    phases = g.element_positions @ wavevector(d, g.wavelength)
    return np.exp(1j * phases) / math.sqrt(g.n_elements)
