import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biphoton.amplitudes import (
    ALICE_DIR,
    BOB_DIR,
    UndefinedPhaseError,
    amplitude,
    axis_amplitudes,
    cgg_steady,
    cgg_time_dependent,
    dipole_radiation_pattern,
    einstein_weight,
    lorentz_blocks,
    probability_density,
    relative_phase,
    spectral_kernels,
)
from biphoton.emitters import EmitterPair, hybrid_levels
from biphoton.modes import XHAT, YHAT, ZHAT, PhotonMode, basis_for, direction

PAIR = EmitterPair(math.pi / 4, -math.pi / 4, 0.075)
LEVELS = hybrid_levels(PAIR)

unit = st.floats(0.0, 1.0)
detunings = st.floats(-20.0, 20.0)


def mode_from(theta, phi, detuning, mix):
    b = basis_for(theta, phi, "spherical")
    pol = math.cos(2 * math.pi * mix) * b.e1 + math.sin(2 * math.pi * mix) * b.e2
    return PhotonMode(theta, phi, detuning, pol / np.linalg.norm(pol))


mode_strategy = st.builds(
    mode_from, st.floats(0.05, math.pi - 0.05), st.floats(-math.pi, math.pi), detunings, unit
)


def shifted_amplitude(pair, couplings, mode_a, mode_b, shift):
    """Reference amplitude with both emitters translated by ``shift`` (units of lambda0)."""
    out = []
    for m in (mode_a, mode_b):
        k = 2 * math.pi * pair.n * (1 + m.detuning / pair.omega0) * m.k_hat
        p = [
            (pair.dipole(j) @ m.pol) * np.exp(-1j * k @ (pair.position(j) + shift)) for j in (1, 2)
        ]
        out.append((p[0] + p[1], p[0] - p[1]))
    g_s, g_a = spectral_kernels(couplings, mode_a.detuning, mode_b.detuning, einstein_weight(mode_a, mode_b))
    return out[0][0] * out[1][0] * g_s + out[0][1] * out[1][1] * g_a


def test_resonant_symmetric_block():
    mode = PhotonMode(*ALICE_DIR, LEVELS.delta_plus, XHAT)
    block = lorentz_blocks(PAIR, LEVELS, mode, LEVELS.delta_minus)
    # exact value has the collective rate (1 + gamma12)/2 in the denominator
    assert abs(block.s_plus) == pytest.approx(math.sqrt(2) / (0.5 * LEVELS.rate_plus), rel=1e-12)
    assert abs(block.s_plus) == pytest.approx(2 * math.sqrt(2), rel=3e-2)
    assert block.a_plus == 0 and block.a_minus == 0


def test_anti_diagonal_ridge_denominator():
    mode = PhotonMode(*ALICE_DIR, 3.7, XHAT)
    block = lorentz_blocks(PAIR, LEVELS, mode, -3.7)
    numerator = block.s_plus * (0.5 * LEVELS.rate_plus + 1j * (LEVELS.V - 3.7))
    # on the anti-diagonal the ridge denominator is exactly gamma0 = 1
    assert block.s_zero == pytest.approx(numerator, rel=1e-14)


def test_z_polarization_kills_symmetric_numerators():
    mode = PhotonMode(*ALICE_DIR, 0.3, ZHAT)
    block = lorentz_blocks(PAIR, LEVELS, mode, 0.0)
    assert block.s_plus == 0 and block.s_minus == 0 and block.s_zero == 0
    assert abs(block.a_zero) == pytest.approx(math.sqrt(2) / abs(1 - 0.3j), rel=1e-12)


def test_einstein_weight():
    a = PhotonMode(*ALICE_DIR, 1.0, XHAT)
    assert einstein_weight(a, a) == 2
    assert einstein_weight(a, PhotonMode(*ALICE_DIR, 1.0 + 1e-12, XHAT)) == 1


@given(mode_strategy, mode_strategy)
def test_mode_swap_symmetry(a, b):
    ab, ba = cgg_steady(PAIR, LEVELS, a, b), cgg_steady(PAIR, LEVELS, b, a)
    assert abs(ab - ba) <= 1e-15 * max(abs(ab), 1e-300) * 4


@given(mode_strategy, mode_strategy, st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_origin_independence(a, b, shift):
    shift = np.array(shift)
    ref = cgg_steady(PAIR, LEVELS, a, b)
    moved = shifted_amplitude(PAIR, LEVELS, a, b, shift)
    assert abs(moved) == pytest.approx(abs(ref), rel=1e-12, abs=1e-300)
    k_total = 2 * math.pi * PAIR.n * ((1 + a.detuning / PAIR.omega0) * a.k_hat + (1 + b.detuning / PAIR.omega0) * b.k_hat)
    assert moved == pytest.approx(ref * np.exp(-1j * k_total @ shift), rel=1e-10, abs=1e-300)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.floats(-2, 2), st.floats(-2, 2))
def test_relative_phase_origin_independent(shift, wa, wb):
    shift = np.array(shift)
    da, db = LEVELS.delta_minus + wa, LEVELS.delta_plus + wb
    ref = relative_phase(PAIR, LEVELS, da, db)
    m = lambda ang, d, e: PhotonMode(ang[0], ang[1], d, e)
    xx = shifted_amplitude(PAIR, LEVELS, m(ALICE_DIR, da, XHAT), m(BOB_DIR, db, XHAT), shift)
    zz = shifted_amplitude(PAIR, LEVELS, m(ALICE_DIR, da, ZHAT), m(BOB_DIR, db, ZHAT), shift)
    moved = np.angle(xx * np.conj(zz))
    assert abs(np.angle(np.exp(1j * (moved - ref)))) < 1e-12


@given(st.floats(0.1, 3.0), st.floats(-3, 3), st.floats(0.1, 3.0), st.floats(-3, 3), detunings, detunings, unit, unit)
def test_basis_covariance(ta, pa, tb, pb, da, db, rot_a, rot_b):
    ka, kb = direction(ta, pa), direction(tb, pb)
    ba, bb = basis_for(ta, pa, "spherical").vectors(), basis_for(tb, pb, "spherical").vectors()

    def matrix(vecs_a, vecs_b):
        return np.array([[amplitude(PAIR, LEVELS, ka, ea, kb, eb, da, db) for eb in vecs_b] for ea in vecs_a])

    def rotation(u):
        c, s = math.cos(2 * math.pi * u), math.sin(2 * math.pi * u)
        return np.array([[c, s], [-s, c]])

    ra, rb = rotation(rot_a), rotation(rot_b)
    base = matrix(ba, bb)
    turned = matrix(ra @ ba, rb @ bb)
    scale = max(np.linalg.norm(base), 1e-300)
    assert np.linalg.norm(turned - ra @ base @ rb.T) <= 1e-12 * scale
    assert abs(np.linalg.norm(turned) - np.linalg.norm(base)) <= 1e-12 * scale


def test_vectorized_amplitude_matches_mode_assembly():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = mode_from(rng.uniform(0.1, 3), rng.uniform(-3, 3), rng.normal(0, 5), rng.uniform())
        b = mode_from(rng.uniform(0.1, 3), rng.uniform(-3, 3), rng.normal(0, 5), rng.uniform())
        vec = amplitude(PAIR, LEVELS, a.k_hat, a.pol, b.k_hat, b.pol, a.detuning, b.detuning)
        assert vec == pytest.approx(cgg_steady(PAIR, LEVELS, a, b), rel=1e-12)


def test_cross_polarized_vanish_on_axis():
    grid = np.linspace(-15, 15, 31)
    amps = axis_amplitudes(PAIR, LEVELS, grid[:, None], grid[None, :])
    peak = np.max(np.abs(amps["xx"]))
    assert np.max(np.abs(amps["xz"])) <= 1e-13 * peak
    assert np.max(np.abs(amps["zx"])) <= 1e-13 * peak


def test_time_dependent_limits():
    a = PhotonMode(*ALICE_DIR, LEVELS.delta_plus, XHAT)
    b = PhotonMode(*BOB_DIR, LEVELS.delta_minus, XHAT)
    assert cgg_time_dependent(PAIR, LEVELS, a, b, 0.0) == 0
    steady = cgg_steady(PAIR, LEVELS, a, b)
    assert cgg_time_dependent(PAIR, LEVELS, a, b, 50.0) == pytest.approx(steady, rel=1e-10)
    with pytest.raises(ValueError):
        cgg_time_dependent(PAIR, LEVELS, a, b, -1.0)


def test_density_conventions():
    a = PhotonMode(*ALICE_DIR, LEVELS.delta_plus, XHAT)
    b = PhotonMode(*BOB_DIR, LEVELS.delta_minus, XHAT)
    med = probability_density(PAIR, LEVELS, a, b)
    vac = probability_density(PAIR, LEVELS, a, b, convention="vacuum")
    assert vac == pytest.approx(med * 2.25, rel=1e-14)
    assert med > 0
    with pytest.raises(ValueError):
        probability_density(PAIR, LEVELS, a, b, convention="furlongs")


def test_density_peak_frozen():
    # frozen from a term-by-term evaluation at r12 = 0.075
    a = PhotonMode(*ALICE_DIR, LEVELS.delta_plus, XHAT)
    b = PhotonMode(*BOB_DIR, LEVELS.delta_minus, XHAT)
    assert probability_density(PAIR, LEVELS, a, b) == pytest.approx(1.5393e-3, rel=2e-3)


def test_relative_phase_undefined():
    parallel = EmitterPair(0.0, 0.0, 0.075)
    with pytest.raises(UndefinedPhaseError):
        relative_phase(parallel, hybrid_levels(parallel), 1.0, -1.0)


def test_relative_phase_continuous_on_diagonal():
    grid = np.linspace(-10, 10, 401)
    phases = np.array([relative_phase(PAIR, LEVELS, d, d) for d in grid])
    jumps = np.abs(np.angle(np.exp(1j * np.diff(phases))))
    assert np.max(jumps) < 0.3
    assert np.all((phases > -math.pi) & (phases <= math.pi))


def test_dipole_pattern_examples():
    assert dipole_radiation_pattern(XHAT, math.pi / 2, math.pi / 2) == pytest.approx(1.0)
    assert dipole_radiation_pattern(ZHAT, 0.0, 0.0) == pytest.approx(0.0)
    assert dipole_radiation_pattern(XHAT, math.pi / 4, 0.0) == pytest.approx(0.5)
    assert dipole_radiation_pattern(YHAT, math.pi / 2, math.pi / 2) == pytest.approx(0.0)
