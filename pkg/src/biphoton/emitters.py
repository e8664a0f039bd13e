"""Emitter-pair configuration and the radiative couplings between the two emitters.

Units: rates and frequencies are in units of the single-emitter decay rate
gamma0, lengths in units of the vacuum transition wavelength lambda0.  The
phase argument of the couplings is ``k0 r12 = 2 pi n r12``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import constants

__all__ = [
    "PhysicalPreset",
    "EmitterPair",
    "Couplings",
    "NoRootError",
    "PRESETS",
    "DBATT",
    "coherent_coupling",
    "dissipative_coupling",
    "hybrid_levels",
    "rescale_r12_for_fixed_V",
    "load_preset",
    "parse_key_value",
]


class NoRootError(ValueError):
    """Raised when no separation reproduces the requested coherent coupling."""


@dataclass(frozen=True)
class PhysicalPreset:
    name: str
    gamma0_hz: float  # gamma0 / (2 pi)
    lambda0_vac: float  # metres
    refractive_index: float = 1.0
    alpha_dw: float = 1.0

    def __post_init__(self):
        if not self.gamma0_hz > 0:
            raise ValueError("gamma0_hz must be positive")
        if not self.lambda0_vac > 0:
            raise ValueError("lambda0_vac must be positive")
        if not self.refractive_index >= 1:
            raise ValueError("refractive_index must be >= 1")
        if not 0 < self.alpha_dw <= 1:
            raise ValueError("alpha_dw must lie in (0, 1]")

    @property
    def omega0_over_gamma0(self) -> float:
        # both quantities carry the same 2 pi
        return constants.c / self.lambda0_vac / self.gamma0_hz

    def pair(self, alpha1: float, alpha2: float, r12: float, **overrides) -> "EmitterPair":
        kw = dict(
            n=self.refractive_index,
            omega0=self.omega0_over_gamma0,
            alpha_dw=self.alpha_dw,
        )
        kw.update(overrides)
        return EmitterPair(alpha1=alpha1, alpha2=alpha2, r12=r12, **kw)


DBATT = PhysicalPreset("dbatt", gamma0_hz=21.5e6, lambda0_vac=618e-9, refractive_index=1.5)
PRESETS: dict[str, PhysicalPreset] = {"dbatt": DBATT}

_PRESET_KEYS = {"name", "gamma0_hz", "lambda0_nm", "n", "alpha_dw"}


def parse_key_value(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key.lower()] = value
    return out


def load_preset(path: str | Path, register: bool = True) -> PhysicalPreset:
    """Load a preset from a ``key = value`` file (gamma0_hz, lambda0_nm, n, alpha_dw)."""
    path = Path(path)
    values = parse_key_value(path.read_text())
    unknown = set(values) - _PRESET_KEYS
    if unknown:
        raise ValueError(f"unknown preset keys: {sorted(unknown)}")
    missing = {"gamma0_hz", "lambda0_nm", "n"} - set(values)
    if missing:
        raise ValueError(f"missing preset keys: {sorted(missing)}")
    preset = PhysicalPreset(
        name=values.get("name", path.stem),
        gamma0_hz=float(values["gamma0_hz"]),
        lambda0_vac=float(values["lambda0_nm"]) * 1e-9,
        refractive_index=float(values["n"]),
        alpha_dw=float(values.get("alpha_dw", 1.0)),
    )
    if register:
        PRESETS[preset.name] = preset
    return preset


@dataclass(frozen=True)
class EmitterPair:
    """Two emitters at r_{1,2} = +-(r12/2) z with dipoles in the xz-plane.

    ``alpha1``/``alpha2`` are the dipole angles measured from x towards z,
    ``r12`` is in units of lambda0 and ``omega0`` in units of gamma0.
    """

    alpha1: float
    alpha2: float
    r12: float
    n: float = 1.5
    omega0: float = DBATT.omega0_over_gamma0
    alpha_dw: float = 1.0

    def __post_init__(self):
        if not self.r12 > 0:
            raise ValueError("r12 must be positive (the couplings diverge at r12 = 0)")
        if not 0 < self.alpha_dw <= 1:
            raise ValueError("alpha_dw must lie in (0, 1]")
        if not self.n >= 1:
            raise ValueError("refractive index must be >= 1")
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")

    @property
    def k0_r12(self) -> float:
        return 2.0 * math.pi * self.n * self.r12

    def dipole(self, j: int) -> np.ndarray:
        a = self.alpha1 if j == 1 else self.alpha2
        return np.array([math.cos(a), 0.0, math.sin(a)])

    def position(self, j: int) -> np.ndarray:
        """Emitter position in units of lambda0 (midpoint at the origin)."""
        sign = 1.0 if j == 1 else -1.0
        return np.array([0.0, 0.0, sign * 0.5 * self.r12])

    def replace(self, **changes) -> "EmitterPair":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Couplings:
    V: float
    gamma12: float
    omega0: float

    @property
    def delta_plus(self) -> float:
        """Detuning of the omega0 + V line."""
        return self.V

    @property
    def delta_minus(self) -> float:
        return -self.V

    @property
    def omega_plus(self) -> float:
        return self.omega0 + self.V

    @property
    def omega_minus(self) -> float:
        return self.omega0 - self.V

    @property
    def rate_plus(self) -> float:
        return 1.0 + self.gamma12

    @property
    def rate_minus(self) -> float:
        return 1.0 - self.gamma12


def _angular_factors(alpha1: float, alpha2: float) -> tuple[float, float]:
    cc = math.cos(alpha1) * math.cos(alpha2)
    ss = math.sin(alpha1) * math.sin(alpha2)
    return cc, cc - 2.0 * ss


def _sinc_minus_term(x: float) -> float:
    """(x cos x - sin x) / x**3 without cancellation at small x."""
    if abs(x) < 0.05:
        x2 = x * x
        return -1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0 + x2**3 / 45360.0
    return (x * math.cos(x) - math.sin(x)) / x**3


def _coherent(alpha1, alpha2, x, alpha_dw):
    cc, mixed = _angular_factors(alpha1, alpha2)
    c, s = math.cos(x), math.sin(x)
    return alpha_dw * 0.75 * (-cc * c / x + mixed * (s / x**2 + c / x**3))


def _dissipative(alpha1, alpha2, x, alpha_dw):
    cc, mixed = _angular_factors(alpha1, alpha2)
    sinc = math.sin(x) / x
    return alpha_dw * 1.5 * (cc * sinc + mixed * _sinc_minus_term(x))


def coherent_coupling(pair: EmitterPair) -> float:
    """Coherent dipole-dipole coupling V in units of gamma0."""
    return _coherent(pair.alpha1, pair.alpha2, pair.k0_r12, pair.alpha_dw)


def dissipative_coupling(pair: EmitterPair) -> float:
    """Dissipative coupling gamma12 in units of gamma0."""
    return _dissipative(pair.alpha1, pair.alpha2, pair.k0_r12, pair.alpha_dw)


def hybrid_levels(pair: EmitterPair) -> Couplings:
    return Couplings(V=coherent_coupling(pair), gamma12=dissipative_coupling(pair), omega0=pair.omega0)


def rescale_r12_for_fixed_V(pair: EmitterPair, alpha_dw_new: float, rtol: float = 1e-12) -> float:
    """Separation at which ``alpha_dw_new`` reproduces the coherent coupling of ``pair``.

    Scans log r12 upward from 1e-4 lambda0 for the first (near-field) crossing
    and bisects it in log r12.
    """
    if not 0 < alpha_dw_new <= 1:
        raise ValueError("alpha_dw_new must lie in (0, 1]")
    if alpha_dw_new == pair.alpha_dw:
        return pair.r12
    target = coherent_coupling(pair)

    def f(log_r):
        x = 2.0 * math.pi * pair.n * math.exp(log_r)
        return _coherent(pair.alpha1, pair.alpha2, x, alpha_dw_new) - target

    grid = np.linspace(math.log(1e-4), math.log(10.0), 2001)
    values = [f(g) for g in grid]
    lo = hi = None
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            return math.exp(grid[i])
        if values[i] * values[i + 1] < 0:
            lo, hi = grid[i], grid[i + 1]
            break
    if lo is None:
        raise NoRootError(
            f"alpha_dw={alpha_dw_new} cannot reach V={target:.6g} for r12 in (1e-4, 10] lambda0"
        )
    f_lo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return math.exp(mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < rtol:
            break
    return math.exp(0.5 * (lo + hi))
