"""Spectral filtering, frequency-erasing polarization tomography and two-qubit entanglement metrics.

Density matrices use the ordered basis (xx, xz, zx, zz): first letter for
Alice's photon (filtered at the upper hybrid line), second for Bob's.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .emitters import Couplings, EmitterPair
from .integration import QuadratureFailure, emitter_gram
from .modes import XHAT, ZHAT, direction, te_tm_vectors
from .quadrature import QuadratureSpec

__all__ = [
    "FilterPair",
    "LensRotation",
    "PolarizationDensityMatrix",
    "NotPositiveError",
    "filter_profile",
    "lens_rotation",
    "detection_vectors",
    "tomography",
    "concurrence",
    "fidelity",
    "fidelity_unsquared",
    "purity",
    "bell_state",
    "werner_state",
    "metrics",
    "BASIS_LABELS",
]

BASIS_LABELS = ("xx", "xz", "zx", "zz")
ALICE = (math.pi / 2, math.pi / 2)
BOB = (math.pi / 2, -math.pi / 2)


class NotPositiveError(ValueError):
    pass


def filter_profile(omega, center, gamma_filter):
    """Lorentzian amplitude transmission, unity at ``center``; frequencies as detunings."""
    if not gamma_filter > 0:
        raise ValueError("filter linewidth must be positive")
    half = 0.5 * gamma_filter
    return half / (half + 1j * (np.asarray(omega) - center))


@dataclass(frozen=True)
class FilterPair:
    gamma_filter: float
    center_a: float
    center_b: float

    def __post_init__(self):
        if not self.gamma_filter > 0:
            raise ValueError("filter linewidth must be positive")

    @classmethod
    def at_hybrid_lines(cls, couplings: Couplings, gamma_filter: float) -> "FilterPair":
        """Alice's filter on the upper line omega0 + V, Bob's on omega0 - V."""
        return cls(gamma_filter, couplings.delta_plus, couplings.delta_minus)

    def power_weight(self, delta_a, delta_b):
        """|F_A|^2 |F_B|^2."""
        h2 = (0.5 * self.gamma_filter) ** 2
        return h2 / (h2 + (delta_a - self.center_a) ** 2) * h2 / (h2 + (delta_b - self.center_b) ** 2)


@dataclass(frozen=True)
class LensRotation:
    """Maps (TE, TM) amplitudes at an off-axis direction to (x, z) amplitudes behind the lens."""

    r: np.ndarray
    theta: float
    phi: float

    def __post_init__(self):
        if not np.allclose(self.r.T @ self.r, np.eye(2), atol=1e-12, rtol=0):
            raise ValueError("lens rotation must be orthogonal")


def lens_rotation(theta: float, phi: float) -> LensRotation:
    k = direction(theta, phi)
    if not k[1] > 0:
        raise ValueError("lens collects only directions with a positive y component")
    ct, stcp = math.cos(theta), math.sin(theta) * math.cos(phi)
    norm = math.hypot(ct, stcp)
    if norm < 1e-12:
        # on-axis: TE/TM coincide with x/z, no rotation
        return LensRotation(np.eye(2), theta, phi)
    r = np.array([[ct, stcp], [-stcp, ct]]) / norm
    return LensRotation(r, theta, phi)


def detection_vectors(theta: float, phi: float) -> np.ndarray:
    """Effective field polarizations (rows) that end up as x and z behind Alice's lens.

    Along +-y no lens is needed and the rows are x and z themselves.
    """
    k = direction(theta, phi)
    if abs(k[0]) < 1e-12 and abs(k[2]) < 1e-12:
        return np.stack([XHAT, ZHAT])
    rot = lens_rotation(theta, phi).r
    te, tm = te_tm_vectors(theta, phi)
    return rot @ np.stack([te, tm])


def _bob_vectors(theta: float, phi: float) -> np.ndarray:
    k = direction(theta, phi)
    if abs(k[0]) > 1e-9 or abs(k[2]) > 1e-9:
        raise ValueError("Bob detects along +-y without a lens")
    return np.stack([XHAT, ZHAT])


@dataclass(frozen=True)
class PolarizationDensityMatrix:
    m: np.ndarray
    n_factor: float
    converged: bool = True
    error: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.m, complex)
        object.__setattr__(self, "m", m)
        if m.shape != (4, 4):
            raise ValueError("density matrix must be 4x4")
        if not self.n_factor > 0:
            raise ValueError("normalization N must be positive")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError("density matrix trace differs from 1")
        low = np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()
        if low < -1e-10:
            raise NotPositiveError(f"density matrix has eigenvalue {low:.3g}")

    def element(self, row: str, col: str) -> complex:
        return complex(self.m[BASIS_LABELS.index(row), BASIS_LABELS.index(col)])


def tomography(
    pair: EmitterPair,
    couplings: Couplings,
    filters: FilterPair,
    detect_dirs=(ALICE, BOB),
    spec: QuadratureSpec | None = None,
    strict: bool = False,
) -> PolarizationDensityMatrix:
    """Post-selected polarization state of a filtered photon pair, frequencies traced out.

    All ten independent entries come from one vector-valued adaptive integral
    of the emitter Gram matrix; the basis change onto (x, z) is applied after.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-7)
    (ta, pa), (tb, pb) = detect_dirs
    vec_a = detection_vectors(ta, pa)
    vec_b = _bob_vectors(tb, pb)
    half_width = 0.5 * filters.gamma_filter
    res = emitter_gram(
        pair,
        couplings,
        math.cos(ta),
        math.cos(tb),
        spec,
        weight=filters.power_weight,
        extra_features_a=[(filters.center_a, half_width)],
        extra_features_b=[(filters.center_b, half_width)],
        window=spec.window(couplings.V, filters.gamma_filter),
        label=f"tomography integral (Gamma={filters.gamma_filter:g}, r12={pair.r12:g})",
    )
    if strict and not res.converged:
        raise QuadratureFailure(res.message)
    mu = np.stack([pair.dipole(1), pair.dipole(2)])
    ua = vec_a @ mu.T  # [s, j]
    ub = vec_b @ mu.T  # [s', l]
    u = np.einsum("sj,tl->stjl", ua, ub).reshape(4, 4)
    raw = u @ res.value @ u.T
    raw = 0.5 * (raw + raw.conj().T)
    n = float(np.trace(raw).real)
    return PolarizationDensityMatrix(raw / n, n, res.converged, res.error / n if n else math.inf)


def bell_state(sign: int = -1) -> np.ndarray:
    """(|xx> + sign |zz>) / sqrt(2) as a state vector."""
    v = np.zeros(4, complex)
    v[0], v[3] = 1.0, sign
    return v / math.sqrt(2.0)


def werner_state(p: float, sign: int = -1) -> np.ndarray:
    psi = bell_state(sign)
    return p * np.outer(psi, psi.conj()) + (1.0 - p) * np.eye(4) / 4.0


def _as_matrix(rho) -> np.ndarray:
    return rho.m if isinstance(rho, PolarizationDensityMatrix) else np.asarray(rho, complex)


_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho) -> float:
    m = _as_matrix(rho)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    flipped = _SYSY @ m.conj() @ _SYSY
    herm = root @ flipped @ root
    lam = np.linalg.eigvalsh(0.5 * (herm + herm.conj().T))[::-1]
    lam = np.where(lam < 1e-12, 0.0, lam)
    s = np.sqrt(lam)
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def fidelity_unsquared(rho, sign: int = -1) -> float:
    psi = bell_state(sign)
    return float((psi.conj() @ _as_matrix(rho) @ psi).real)


def fidelity(rho, sign: int = -1) -> float:
    """Squared overlap expectation with the Bell state (|xx> - |zz>)/sqrt(2)."""
    return fidelity_unsquared(rho, sign) ** 2


def purity(rho) -> float:
    m = _as_matrix(rho)
    return float(np.trace(m @ m).real)


def metrics(rho: PolarizationDensityMatrix) -> dict[str, float]:
    return {
        "C": concurrence(rho),
        "F": fidelity(rho),
        "F_unsquared": fidelity_unsquared(rho),
        "purity": purity(rho),
        "N": rho.n_factor,
    }
