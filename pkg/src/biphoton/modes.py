"""Photon modes, transverse polarization bases and emitter coupling projections."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .emitters import EmitterPair

__all__ = [
    "BasisLabel",
    "PolarizationBasis",
    "PhotonMode",
    "DegenerateBasisError",
    "direction",
    "basis_for",
    "projection",
    "projection_pair",
    "transverse_projector",
    "XHAT",
    "YHAT",
    "ZHAT",
]

XHAT = np.array([1.0, 0.0, 0.0])
YHAT = np.array([0.0, 1.0, 0.0])
ZHAT = np.array([0.0, 0.0, 1.0])

_AXIS_TOL = 1e-9


class DegenerateBasisError(ValueError):
    pass


class BasisLabel(str, enum.Enum):
    XZ_AT_Y = "xz_at_y"
    TE_TM = "te_tm"
    SPHERICAL = "spherical"


def direction(theta: float, phi: float) -> np.ndarray:
    st = math.sin(theta)
    k = np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])
    # cos(pi/2) = 6e-17 in floating point; keep the coordinate axes exact
    k[np.abs(k) < 1e-15] = 0.0
    return k


@dataclass(frozen=True)
class PolarizationBasis:
    e1: np.ndarray
    e2: np.ndarray
    label: BasisLabel

    def vectors(self) -> np.ndarray:
        return np.stack([self.e1, self.e2])


def _on_y_axis(k: np.ndarray) -> int:
    """+1 / -1 when k is along +y / -y, else 0."""
    if abs(k[0]) < _AXIS_TOL and abs(k[2]) < _AXIS_TOL:
        return 1 if k[1] > 0 else -1
    return 0


def te_tm_vectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """TE/TM unit vectors for the plane spanned by k(theta, phi) and y.

    TE = (cos t, 0, -sin t cos p) / norm and TM = TE x k, which fixes the
    sign convention shared with the lens-rotated TM vector.
    """
    ct, st, cp = math.cos(theta), math.sin(theta), math.cos(phi)
    norm = math.hypot(ct, st * cp)
    if norm < 1e-12:
        raise DegenerateBasisError("TE/TM basis is undefined for k along +-y")
    te = np.array([ct, 0.0, -st * cp]) / norm
    tm = np.cross(te, direction(theta, phi))
    return te, tm / np.linalg.norm(tm)


def basis_for(theta: float, phi: float, label: BasisLabel | str) -> PolarizationBasis:
    label = BasisLabel(label)
    k = direction(theta, phi)
    if label is BasisLabel.XZ_AT_Y:
        if not _on_y_axis(k):
            raise DegenerateBasisError("the x/z basis is only transverse for k along +-y")
        return PolarizationBasis(XHAT.copy(), ZHAT.copy(), label)
    if label is BasisLabel.TE_TM:
        te, tm = te_tm_vectors(theta, phi)
        return PolarizationBasis(te, tm, label)
    ct, st, cp, sp = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    e1 = np.array([-ct * cp, -ct * sp, st])
    e2 = np.array([sp, -cp, 0.0])
    return PolarizationBasis(e1, e2, label)


@dataclass(frozen=True)
class PhotonMode:
    """Plane-wave mode; the frequency is stored as the detuning from omega0 in gamma0 units."""

    theta: float
    phi: float
    detuning: float
    pol: np.ndarray = field(repr=False)

    def __post_init__(self):
        pol = np.asarray(self.pol, dtype=float)
        object.__setattr__(self, "pol", pol)
        if abs(np.linalg.norm(pol) - 1.0) > 1e-12:
            raise ValueError("polarization must be a unit vector")
        if abs(pol @ self.k_hat) > 1e-12:
            raise ValueError("polarization must be transverse to the propagation direction")

    @property
    def k_hat(self) -> np.ndarray:
        return direction(self.theta, self.phi)

    def omega(self, omega0: float) -> float:
        return omega0 + self.detuning

    def same_as(self, other: "PhotonMode") -> bool:
        return (
            self.theta == other.theta
            and self.phi == other.phi
            and self.detuning == other.detuning
            and np.array_equal(self.pol, other.pol)
        )


def _phase_arg(pair: EmitterPair, k_hat: np.ndarray, detuning, j: int):
    # k.r_j with |k| = k0 (1 + detuning/omega0) and r_j = +-(r12/2) z
    sign = 1.0 if j == 1 else -1.0
    return pair.k0_r12 * (1.0 + np.asarray(detuning) / pair.omega0) * (0.5 * sign * k_hat[2])


def projection_pair(pair: EmitterPair, k_hat, pol, detuning):
    """Conjugated coupling projections (P1, P2) of both emitters.

    P_j = (mu_j . e) exp(-i k . r_j) with the scalar prefactor and the volume
    stripped.  ``detuning`` may be an array.
    """
    k_hat = np.asarray(k_hat, dtype=float)
    pol = np.asarray(pol, dtype=float)
    out = []
    for j in (1, 2):
        amp = pair.dipole(j) @ pol
        out.append(amp * np.exp(-1j * _phase_arg(pair, k_hat, detuning, j)))
    return out[0], out[1]


def projection(pair: EmitterPair, mode: PhotonMode, which_emitter: int) -> complex:
    if which_emitter not in (1, 2):
        raise ValueError("which_emitter must be 1 or 2")
    p = projection_pair(pair, mode.k_hat, mode.pol, mode.detuning)[which_emitter - 1]
    return complex(p)


def transverse_projector(pair: EmitterPair, k_hat) -> np.ndarray:
    """2x2 matrix sum_s (mu_j . e_s)(mu_l . e_s) over a transverse basis of k_hat."""
    k_hat = np.asarray(k_hat, dtype=float)
    mu = np.stack([pair.dipole(1), pair.dipole(2)])
    along = mu @ k_hat
    return mu @ mu.T - np.outer(along, along)
