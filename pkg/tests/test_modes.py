import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biphoton.emitters import EmitterPair
from biphoton.modes import (
    XHAT,
    YHAT,
    ZHAT,
    BasisLabel,
    DegenerateBasisError,
    PhotonMode,
    basis_for,
    direction,
    projection,
    transverse_projector,
)

PERP = EmitterPair(math.pi / 4, -math.pi / 4, 0.075)
thetas = st.floats(0.01, math.pi - 0.01)
phis = st.floats(-math.pi, math.pi)


def test_xz_basis_on_axis():
    b = basis_for(math.pi / 2, math.pi / 2, "xz_at_y")
    assert np.array_equal(b.e1, XHAT) and np.array_equal(b.e2, ZHAT)
    with pytest.raises(DegenerateBasisError):
        basis_for(1.0, 0.3, "xz_at_y")


def test_spherical_basis_on_axis():
    b = basis_for(math.pi / 2, math.pi / 2, BasisLabel.SPHERICAL)
    assert np.allclose(b.e1, ZHAT, atol=1e-15)


def test_te_tm_degenerate_on_axis():
    with pytest.raises(DegenerateBasisError):
        basis_for(math.pi / 2, math.pi / 2, "te_tm")


@pytest.mark.parametrize("label", ["te_tm", "spherical"])
def test_bases_orthonormal_on_grid(label):
    for theta in np.linspace(0.05, math.pi - 0.05, 20):
        for phi in np.linspace(-math.pi, math.pi, 20):
            k = direction(theta, phi)
            if label == "te_tm" and abs(abs(k[1]) - 1) < 1e-6:
                continue
            b = basis_for(theta, phi, label)
            assert abs(b.e1 @ b.e2) < 1e-12
            assert abs(b.e1 @ k) < 1e-12 and abs(b.e2 @ k) < 1e-12
            assert np.linalg.norm(b.e1) == pytest.approx(1) and np.linalg.norm(b.e2) == pytest.approx(1)
            assert abs(abs(np.cross(b.e1, b.e2) @ k) - 1) < 1e-12


@given(thetas, phis, st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_polarization_completeness(theta, phi, v):
    a, b = np.array(v[:3]), np.array(v[3:])
    k = direction(theta, phi)
    basis = basis_for(theta, phi, "spherical")
    total = sum((a @ e) * (b @ e) for e in basis.vectors())
    assert total == pytest.approx(a @ b - (a @ k) * (b @ k), abs=1e-12)


def test_projection_examples():
    mode = PhotonMode(math.pi / 2, math.pi / 2, 0.0, XHAT)
    assert projection(PERP, mode, 1) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert projection(PERP, mode, 1) - projection(PERP, mode, 2) == 0
    with pytest.raises(ValueError):
        projection(PERP, mode, 3)


def test_projection_phase_along_axis():
    mode = PhotonMode(0.0, 0.0, 0.0, XHAT)
    p1, p2 = projection(PERP, mode, 1), projection(PERP, mode, 2)
    assert (p1 / p2) == pytest.approx(np.exp(-1j * PERP.k0_r12), rel=1e-12)


def test_projection_magnitude_bounded():
    rng = np.random.default_rng(3)
    for _ in range(50):
        theta, phi = rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi)
        e = basis_for(theta, phi, "spherical").e2
        mode = PhotonMode(theta, phi, rng.normal(0, 10), e)
        assert abs(projection(PERP, mode, 1)) <= 1 + 1e-15


def test_mode_validation():
    with pytest.raises(ValueError):
        PhotonMode(math.pi / 2, math.pi / 2, 0.0, YHAT)
    with pytest.raises(ValueError):
        PhotonMode(math.pi / 2, math.pi / 2, 0.0, 2 * XHAT)


def test_axis_directions_exact():
    assert np.array_equal(direction(math.pi / 2, math.pi / 2), YHAT)
    assert np.array_equal(direction(math.pi / 2, -math.pi / 2), -YHAT)


@given(thetas, phis)
def test_transverse_projector_matches_basis_sum(theta, phi):
    k = direction(theta, phi)
    basis = basis_for(theta, phi, "spherical")
    mu = np.stack([PERP.dipole(1), PERP.dipole(2)])
    u = basis.vectors() @ mu.T
    assert np.allclose(u.T @ u, transverse_projector(PERP, k), atol=1e-12)
