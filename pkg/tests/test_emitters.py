import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biphoton.emitters import (
    DBATT,
    EmitterPair,
    NoRootError,
    PhysicalPreset,
    coherent_coupling,
    dissipative_coupling,
    hybrid_levels,
    load_preset,
    parse_key_value,
    rescale_r12_for_fixed_V,
)

angles = st.floats(-math.pi, math.pi)
separations = st.floats(1e-3, 5.0)
PERP = (math.pi / 4, -math.pi / 4)


def green_couplings(alpha1, alpha2, x):
    """Independent oracle: couplings from the free-space dyadic Green tensor."""
    mu1 = np.array([math.cos(alpha1), 0, math.sin(alpha1)])
    mu2 = np.array([math.cos(alpha2), 0, math.sin(alpha2)])
    rr = np.outer([0, 0, 1.0], [0, 0, 1.0])
    g = np.exp(1j * x) * ((1 / x + 1j / x**2 - 1 / x**3) * np.eye(3) + (-1 / x - 3j / x**2 + 3 / x**3) * rr)
    val = mu1 @ g @ mu2
    return -0.75 * val.real, 1.5 * val.imag


def test_v_reference_values():
    assert coherent_coupling(EmitterPair(*PERP, 0.05)) == pytest.approx(11.17, rel=5e-3)
    assert coherent_coupling(EmitterPair(*PERP, 0.075)) == pytest.approx(3.5, rel=3e-2)
    assert coherent_coupling(EmitterPair(*PERP, 0.05, alpha_dw=0.5)) == pytest.approx(5.585, rel=5e-3)


def test_gamma12_perpendicular_reference():
    # frozen from the Green-tensor oracle at x = 2 pi 1.5 0.075
    x = 2 * math.pi * 1.5 * 0.075
    assert green_couplings(*PERP, x)[1] == pytest.approx(-0.024103114560, abs=1e-10)
    assert dissipative_coupling(EmitterPair(*PERP, 0.075)) == pytest.approx(-0.024103114560, abs=1e-10)


@given(angles, angles, separations)
def test_couplings_match_green_tensor(a1, a2, r):
    pair = EmitterPair(a1, a2, r)
    v, g = green_couplings(a1, a2, pair.k0_r12)
    assert coherent_coupling(pair) == pytest.approx(v, rel=1e-9, abs=1e-9)
    assert dissipative_coupling(pair) == pytest.approx(g, rel=1e-9, abs=1e-9)


@given(angles, angles, separations, st.floats(0.01, 1.0))
def test_linear_in_debye_waller(a1, a2, r, c):
    full = EmitterPair(a1, a2, r)
    part = full.replace(alpha_dw=c)
    assert coherent_coupling(part) == pytest.approx(c * coherent_coupling(full), rel=1e-12, abs=1e-300)
    assert dissipative_coupling(part) == pytest.approx(c * dissipative_coupling(full), rel=1e-12, abs=1e-300)


@given(angles, angles, separations)
def test_exchange_symmetry(a1, a2, r):
    p, q = EmitterPair(a1, a2, r), EmitterPair(a2, a1, r)
    assert coherent_coupling(p) == pytest.approx(coherent_coupling(q), rel=1e-13, abs=1e-13)
    assert dissipative_coupling(p) == pytest.approx(dissipative_coupling(q), rel=1e-13, abs=1e-13)


@given(angles, angles, st.floats(1e-4, 100.0))
def test_dissipative_bounded(a1, a2, r):
    assert abs(dissipative_coupling(EmitterPair(a1, a2, r))) <= 1.0 + 1e-12


def test_small_separation_limits():
    assert dissipative_coupling(EmitterPair(0, 0, 1e-3)) == pytest.approx(1.0, abs=1e-4)
    assert dissipative_coupling(EmitterPair(*PERP, 1e-3)) == pytest.approx(0.0, abs=1e-4)
    assert hybrid_levels(EmitterPair(0, 0, 1e-3)).rate_minus == pytest.approx(0.0, abs=1e-4)


def test_small_argument_series_is_continuous():
    # the series branch of the dissipative term meets the direct formula
    x_switch = 0.05 / (2 * math.pi * 1.5)
    below = dissipative_coupling(EmitterPair(0, math.pi / 2, x_switch * (1 - 1e-9)))
    above = dissipative_coupling(EmitterPair(0, math.pi / 2, x_switch * (1 + 1e-9)))
    assert below == pytest.approx(above, abs=1e-9)


def test_perpendicular_dissipative_suppressed():
    # near field only; further out the dissipative term oscillates up to ~0.23
    for r in np.linspace(0.01, 0.1, 100):
        assert abs(dissipative_coupling(EmitterPair(*PERP, r))) < 0.05


def test_far_field_decay():
    near = EmitterPair(*PERP, 5.0)
    far = EmitterPair(*PERP, 5000.0)
    assert abs(coherent_coupling(far)) < abs(coherent_coupling(near)) * 10
    assert abs(coherent_coupling(far)) < 1e-4 and abs(dissipative_coupling(far)) < 1e-4


def test_hybrid_levels_package():
    c = hybrid_levels(EmitterPair(*PERP, 0.075))
    # absolute frequencies near omega0 ~ 2e7 carry ~1e-9 rounding
    assert c.omega_plus - c.omega_minus == pytest.approx(2 * c.V, abs=1e-8)
    assert 2 * c.V == pytest.approx(7.0, rel=3e-2)
    assert c.rate_plus + c.rate_minus == pytest.approx(2.0)


def test_invalid_pairs_rejected():
    with pytest.raises(ValueError):
        EmitterPair(0, 0, 0.0)
    with pytest.raises(ValueError):
        EmitterPair(0, 0, 0.1, alpha_dw=0.0)
    with pytest.raises(ValueError):
        EmitterPair(0, 0, 0.1, alpha_dw=1.5)


def test_rescale_identity_and_root():
    pair = EmitterPair(*PERP, 0.05)
    assert rescale_r12_for_fixed_V(pair, 1.0) == pair.r12
    r = rescale_r12_for_fixed_V(pair, 0.5)
    assert r < 0.05
    moved = pair.replace(r12=r, alpha_dw=0.5)
    assert coherent_coupling(moved) == pytest.approx(coherent_coupling(pair), rel=1e-10)


def test_rescale_no_root():
    with pytest.raises(NoRootError):
        rescale_r12_for_fixed_V(EmitterPair(*PERP, 1e-3), 1e-12)


def test_dbatt_preset():
    assert DBATT.omega0_over_gamma0 == pytest.approx(2.258e7, rel=1e-3)
    pair = DBATT.pair(*PERP, 0.05)
    assert pair.n == 1.5


def test_load_preset(tmp_path):
    path = tmp_path / "mol.cfg"
    path.write_text("name = test_mol  # comment\ngamma0_hz = 1e7\nlambda0_nm = 700\nn = 2.0\n")
    preset = load_preset(path)
    assert preset.refractive_index == 2.0
    assert preset.lambda0_vac == pytest.approx(700e-9)
    with pytest.raises(ValueError):
        parse_key_value("no equals sign")
    path.write_text("gamma0_hz = 1\nlambda0_nm = 1\nn = 1\ncolour = red\n")
    with pytest.raises(ValueError):
        load_preset(path)
    with pytest.raises(ValueError):
        PhysicalPreset("bad", -1.0, 1e-7)
