import math

import numpy as np
import pytest

from isacsim.array import (
    ArrayGeometry,
    Direction,
    direction_to,
    steering_vector,
    uca_geometry,
    uca_positions,
    wavevector,
)


def test_single_element_at_origin():
    pos = uca_positions(1, 0.5)
    assert pos.shape == (1, 3)
    assert np.all(pos == 0.0)


def test_square_chord_spacing_exact():
    # n=4 with spacing 1: a unit square inscribed in a circle of radius 1/sqrt(2)
    pos = uca_positions(4, 1.0)
    assert pos.shape == (4, 3)
    r = np.linalg.norm(pos[0])
    assert r == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-15)
    for i in range(4):
        chord = np.linalg.norm(pos[(i + 1) % 4] - pos[i])
        assert chord == pytest.approx(1.0, rel=1e-12)


def test_uca16_radius_39ghz():
    # independent oracle: r = spacing / (2 sin(pi/16))
    lam = 0.0076867
    spacing = lam / 2.0
    r_expected = spacing / (2.0 * math.sin(math.pi / 16.0))
    pos = uca_positions(16, spacing)
    radii = np.linalg.norm(pos, axis=1)
    assert np.allclose(radii, r_expected, rtol=1e-12)
    assert r_expected == pytest.approx(0.0098497, abs=1e-6)
    # all elements in the z=0 plane, element 0 at azimuth 0
    assert np.all(pos[:, 2] == 0.0)
    assert pos[0, 1] == pytest.approx(0.0, abs=1e-15)
    chords = np.linalg.norm(np.roll(pos, -1, axis=0) - pos, axis=1)
    assert np.allclose(chords, spacing, rtol=1e-12)


def test_uca_rejects_bad_arguments():
    with pytest.raises(ValueError):
        uca_positions(0, 0.5)
    with pytest.raises(ValueError):
        uca_positions(8, 0.0)
    with pytest.raises(ValueError):
        uca_positions(8, -1.0)


def test_wavevector_axis_cases():
    np.testing.assert_allclose(
        wavevector(Direction(0.0, 0.0), 1.0), [0.0, 0.0, 2.0 * math.pi], atol=1e-15
    )
    np.testing.assert_allclose(
        wavevector(Direction(math.pi / 2.0, 0.0), 1.0),
        [2.0 * math.pi, 0.0, 0.0],
        atol=1e-15,
    )


def test_wavevector_oblique():
    # direct evaluation: theta=pi/4, phi=pi/2, lambda=0.5
    k = wavevector(Direction(math.pi / 4.0, math.pi / 2.0), 0.5)
    expected = 4.0 * math.pi * math.sin(math.pi / 4.0)
    np.testing.assert_allclose(k, [0.0, expected, expected], atol=1e-12)
    assert expected == pytest.approx(8.8857658763, abs=1e-9)


def test_steering_single_element():
    g = ArrayGeometry(np.zeros((1, 3)), 1.0)
    b = steering_vector(g, Direction(0.3, 0.7))
    assert b.shape == (1,)
    assert b[0] == pytest.approx(1.0 + 0.0j)


def test_steering_boresight_uniform():
    # k along z is orthogonal to every in-plane element position
    g = uca_geometry(16, 1.0)
    b = steering_vector(g, Direction(0.0, 1.234))
    np.testing.assert_allclose(b, np.full(16, 1.0 / 4.0), atol=1e-14)


def test_steering_inplane_phase_uca16():
    lam = 299_792_458.0 / 39e9
    g = uca_geometry(16, lam)
    b = steering_vector(g, Direction(math.pi / 2.0, 0.0))
    # element 0 sits at (r, 0, 0): phase = 2*pi*r/lam = pi / (2 sin(pi/16))
    expected_phase = math.pi / (2.0 * math.sin(math.pi / 16.0))
    assert expected_phase == pytest.approx(8.05165, abs=1e-4)
    wrapped = expected_phase % (2.0 * math.pi)
    assert np.angle(b[0]) % (2.0 * math.pi) == pytest.approx(wrapped, abs=1e-12)
    assert abs(b[0]) == pytest.approx(1.0 / 4.0, rel=1e-12)


def test_steering_unit_norm_random():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 33))
        g = uca_geometry(n, 0.01, spacing_wavelengths=rng.uniform(0.1, 2.0))
        d = Direction(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2.0 * math.pi))
        b = steering_vector(g, d)
        assert abs(np.linalg.norm(b) - 1.0) <= 1e-12


def test_steering_deterministic():
    g = uca_geometry(16, 0.0077)
    d = Direction(1.1, 2.2)
    b1 = steering_vector(g, d)
    b2 = steering_vector(g, d)
    assert np.array_equal(b1, b2)


def test_rotation_invariance_about_z():
    rng = np.random.default_rng(11)
    g = uca_geometry(16, 0.0077)
    for _ in range(20):
        d1 = Direction(rng.uniform(0.1, math.pi - 0.1), rng.uniform(0.0, 2.0 * math.pi))
        d2 = Direction(rng.uniform(0.1, math.pi - 0.1), rng.uniform(0.0, 2.0 * math.pi))
        before = abs(np.vdot(steering_vector(g, d1), steering_vector(g, d2)))

        psi = rng.uniform(0.0, 2.0 * math.pi)
        rot = np.array(
            [
                [math.cos(psi), -math.sin(psi), 0.0],
                [math.sin(psi), math.cos(psi), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        g_rot = ArrayGeometry(g.element_positions @ rot.T, g.wavelength)
        d1r = Direction(d1.theta, (d1.phi + psi) % (2.0 * math.pi))
        d2r = Direction(d2.theta, (d2.phi + psi) % (2.0 * math.pi))
        after = abs(np.vdot(steering_vector(g_rot, d1r), steering_vector(g_rot, d2r)))
        assert after == pytest.approx(before, abs=1e-10)


def test_direction_validation():
    with pytest.raises(ValueError):
        Direction(-0.1, 0.0)
    with pytest.raises(ValueError):
        Direction(0.5, 2.0 * math.pi)
    with pytest.raises(ValueError):
        direction_to([0.0, 0.0, 0.0])


def test_direction_to_known_points():
    d = direction_to([0.0, 0.0, 5.0])
    assert d.theta == pytest.approx(0.0)
    d = direction_to([1.0, 1.0, 0.0])
    assert d.theta == pytest.approx(math.pi / 2.0)
    assert d.phi == pytest.approx(math.pi / 4.0)
