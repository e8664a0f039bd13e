"""Two-photon amplitudes of the relaxed emitter pair.

All amplitudes are *reduced*: the field normalization volume and the scalar
prefactor sqrt(omega / (2 eps0 n^2 hbar)) mu of each coupling are stripped and
only re-attached, analytically, in :func:`probability_density`.  Eliminating
mu through gamma0 leaves

    P = (3 pi / 2)^2 / (2 pi)^6 * (omega/omega0)^3 (omega'/omega0)^3 |c|^2

per unit solid angle squared and per unit wavenumber squared, wavenumbers
measured in gamma0 / c with c the speed of light in the medium.

Reduced projections are P_j = (mu_j . e) exp(-i k . r_j); the true conjugated
couplings carry an extra common factor i, so every two-photon amplitude here
differs from the physical one by the global sign i^2 = -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .emitters import Couplings, EmitterPair
from .modes import PhotonMode, XHAT, ZHAT, direction, projection_pair

__all__ = [
    "DENSITY_PREFACTOR",
    "LorentzBlock",
    "UndefinedPhaseError",
    "lorentz_blocks",
    "einstein_weight",
    "cgg_steady",
    "cgg_time_dependent",
    "probability_density",
    "density_weight",
    "spectral_kernels",
    "emitter_kernel",
    "amplitude",
    "axis_amplitudes",
    "relative_phase",
    "dipole_radiation_pattern",
    "ALICE_DIR",
    "BOB_DIR",
]

DENSITY_PREFACTOR = (1.5 * math.pi) ** 2 / (2.0 * math.pi) ** 6

# detection directions +y (Alice) and -y (Bob) as spherical angles
ALICE_DIR = (math.pi / 2, math.pi / 2)
BOB_DIR = (math.pi / 2, -math.pi / 2)


class UndefinedPhaseError(ValueError):
    pass


def _d_plus(c: Couplings, delta):
    return 0.5 * (1.0 + c.gamma12) + 1j * (c.V - delta)


def _d_minus(c: Couplings, delta):
    return 0.5 * (1.0 - c.gamma12) + 1j * (-c.V - delta)


def _d_zero(delta_a, delta_b):
    return 1.0 - 1j * (delta_a + delta_b)


@dataclass(frozen=True)
class LorentzBlock:
    s_plus: complex
    s_minus: complex
    a_plus: complex
    a_minus: complex
    s_zero: complex
    a_zero: complex


def lorentz_blocks(pair: EmitterPair, couplings: Couplings, mode: PhotonMode, partner_detuning: float) -> LorentzBlock:
    p1, p2 = projection_pair(pair, mode.k_hat, mode.pol, mode.detuning)
    p1, p2 = complex(p1), complex(p2)
    dp = _d_plus(couplings, mode.detuning)
    dm = _d_minus(couplings, mode.detuning)
    d0 = _d_zero(mode.detuning, partner_detuning)
    s, a = p1 + p2, p1 - p2
    return LorentzBlock(
        s_plus=s / dp, s_minus=s / dm, a_plus=a / dp, a_minus=a / dm, s_zero=s / d0, a_zero=a / d0
    )


def einstein_weight(mode_a: PhotonMode, mode_b: PhotonMode) -> int:
    return 2 if mode_a.same_as(mode_b) else 1


def cgg_steady(pair: EmitterPair, couplings: Couplings, mode_a: PhotonMode, mode_b: PhotonMode) -> complex:
    """Reduced steady-state two-photon amplitude, assembled term by term."""
    eps = einstein_weight(mode_a, mode_b)
    a = lorentz_blocks(pair, couplings, mode_a, mode_b.detuning)
    b = lorentz_blocks(pair, couplings, mode_b, mode_a.detuning)
    sym = a.s_minus * (b.s_plus - b.s_zero) + b.s_minus * (a.s_plus - a.s_zero)
    anti = a.a_plus * (b.a_minus - b.a_zero) + b.a_plus * (a.a_minus - a.a_zero)
    return (-sym + anti) / (2 * eps)


def cgg_time_dependent(
    pair: EmitterPair, couplings: Couplings, mode_a: PhotonMode, mode_b: PhotonMode, t: float
) -> complex:
    """Reduced two-photon amplitude at time t (units 1/gamma0) before the t -> inf limit."""
    if t < 0:
        raise ValueError("t must be non-negative")
    eps = einstein_weight(mode_a, mode_b)
    a = lorentz_blocks(pair, couplings, mode_a, mode_b.detuning)
    b = lorentz_blocks(pair, couplings, mode_b, mode_a.detuning)
    da, db = mode_a.detuning, mode_b.detuning

    def grow(rate):
        # 1 - exp(-rate t), accurate for small t
        return -np.expm1(-rate * t)

    total = (
        -grow(_d_plus(couplings, db)) * a.s_minus * b.s_plus
        - grow(_d_plus(couplings, da)) * b.s_minus * a.s_plus
        + grow(_d_minus(couplings, db)) * a.a_plus * b.a_minus
        + grow(_d_minus(couplings, da)) * b.a_plus * a.a_minus
        + grow(_d_zero(da, db))
        * (a.s_minus * b.s_zero + b.s_minus * a.s_zero - a.a_plus * b.a_zero - b.a_plus * a.a_zero)
    )
    return complex(total / (2 * eps))


def density_weight(pair: EmitterPair, delta_a, delta_b):
    """Prefactor turning |c|^2 into the pair emission density P."""
    return DENSITY_PREFACTOR * (1.0 + delta_a / pair.omega0) ** 3 * (1.0 + delta_b / pair.omega0) ** 3


def probability_density(
    pair: EmitterPair,
    couplings: Couplings,
    mode_a: PhotonMode,
    mode_b: PhotonMode,
    convention: str = "medium",
) -> float:
    """Pair emission density P for two modes.

    ``convention="medium"`` measures wavenumbers in gamma0/c with c the speed
    of light in the medium; ``"vacuum"`` multiplies by n^2.
    """
    c = cgg_steady(pair, couplings, mode_a, mode_b)
    p = float(density_weight(pair, mode_a.detuning, mode_b.detuning) * abs(c) ** 2)
    if convention == "medium":
        return p
    if convention == "vacuum":
        return p * pair.n**2
    raise ValueError(f"unknown convention {convention!r}")


def spectral_kernels(couplings: Couplings, delta_a, delta_b, eps: int = 1):
    """Symmetric- and antisymmetric-channel kernels (g_S, g_A).

    The reduced amplitude is c = N_S(a) N_S(b) g_S + N_A(a) N_A(b) g_A with
    N_S = P1 + P2 and N_A = P1 - P2 for each photon.
    """
    dpa, dpb = _d_plus(couplings, delta_a), _d_plus(couplings, delta_b)
    dma, dmb = _d_minus(couplings, delta_a), _d_minus(couplings, delta_b)
    inv0 = 1.0 / _d_zero(delta_a, delta_b)
    g_s = -((1.0 / dpb - inv0) / dma + (1.0 / dpa - inv0) / dmb) / (2 * eps)
    g_a = ((1.0 / dmb - inv0) / dpa + (1.0 / dma - inv0) / dpb) / (2 * eps)
    return g_s, g_a


def _phase_factors(pair: EmitterPair, k_hat, delta):
    # exp(-i k.r_j) for j = 1, 2, stacked on a trailing axis
    half = pair.k0_r12 * (1.0 + np.asarray(delta) / pair.omega0) * 0.5 * k_hat[2]
    return np.stack([np.exp(-1j * half), np.exp(1j * half)], axis=-1)


def emitter_kernel(pair: EmitterPair, couplings: Couplings, k_a, k_b, delta_a, delta_b) -> np.ndarray:
    """Emitter-resolved kernel H[..., j, l] with c = sum_jl (mu_j.e_a)(mu_l.e_b) H_jl."""
    delta_a, delta_b = np.broadcast_arrays(np.asarray(delta_a, float), np.asarray(delta_b, float))
    g_s, g_a = (np.asarray(g) for g in spectral_kernels(couplings, delta_a, delta_b))
    pa = _phase_factors(pair, np.asarray(k_a, float), delta_a)
    pb = _phase_factors(pair, np.asarray(k_b, float), delta_b)
    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])
    h = g_s[..., None, None] + sign * g_a[..., None, None]
    return pa[..., :, None] * pb[..., None, :] * h


def amplitude(pair: EmitterPair, couplings: Couplings, k_a, pol_a, k_b, pol_b, delta_a, delta_b):
    """Vectorized reduced amplitude for fixed directions/polarizations (continuum, eps = 1)."""
    h = emitter_kernel(pair, couplings, k_a, k_b, delta_a, delta_b)
    ua = np.array([pair.dipole(j) @ np.asarray(pol_a, float) for j in (1, 2)])
    ub = np.array([pair.dipole(j) @ np.asarray(pol_b, float) for j in (1, 2)])
    return np.einsum("j,...jl,l->...", ua, h, ub)


def axis_amplitudes(pair: EmitterPair, couplings: Couplings, delta_a, delta_b) -> dict[str, np.ndarray]:
    """Amplitudes for Alice along +y and Bob along -y in the x/z basis, keyed 'xx', 'xz', 'zx', 'zz'."""
    ka, kb = direction(*ALICE_DIR), direction(*BOB_DIR)
    h = emitter_kernel(pair, couplings, ka, kb, delta_a, delta_b)
    out = {}
    for la, ea in (("x", XHAT), ("z", ZHAT)):
        ua = np.array([pair.dipole(j) @ ea for j in (1, 2)])
        for lb, eb in (("x", XHAT), ("z", ZHAT)):
            ub = np.array([pair.dipole(j) @ eb for j in (1, 2)])
            out[la + lb] = np.einsum("j,...jl,l->...", ua, h, ub)
    return out


def relative_phase(pair: EmitterPair, couplings: Couplings, omega, omega_prime) -> float:
    """Phase of the xx amplitude minus that of the zz amplitude, wrapped to (-pi, pi].

    ``omega`` is the detuning of the photon travelling along +y and
    ``omega_prime`` that of the photon along -y (both in gamma0 units).
    """
    mode = lambda angles, d, pol: PhotonMode(angles[0], angles[1], d, pol)
    c_xx = cgg_steady(pair, couplings, mode(ALICE_DIR, omega, XHAT), mode(BOB_DIR, omega_prime, XHAT))
    c_zz = cgg_steady(pair, couplings, mode(ALICE_DIR, omega, ZHAT), mode(BOB_DIR, omega_prime, ZHAT))
    if abs(c_xx) < 1e-300 or abs(c_zz) < 1e-300:
        raise UndefinedPhaseError("relative phase undefined: a co-polarized amplitude vanishes")
    delta = math.atan2((c_xx * c_zz.conjugate()).imag, (c_xx * c_zz.conjugate()).real)
    return math.pi if delta == -math.pi else delta


def dipole_radiation_pattern(orientation, theta, phi):
    """Classical far-field |E|^2 pattern of a point dipole, normalized to a maximum of 1."""
    o = np.asarray(orientation, dtype=float)
    o = o / np.linalg.norm(o)
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st = np.sin(theta)
    cos_angle = o[0] * st * np.cos(phi) + o[1] * st * np.sin(phi) + o[2] * np.cos(theta)
    return 1.0 - cos_angle**2
