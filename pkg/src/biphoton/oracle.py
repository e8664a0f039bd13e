"""Time-domain cross-check of the closed-form amplitudes.

The one-excitation amplitudes are integrated numerically from the coupled
Markovian equations, and the two-photon amplitude is accumulated alongside
as a running time integral of its source terms.  Nothing here reuses the
closed forms of :mod:`biphoton.amplitudes`, so agreement checks their
transcription.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .amplitudes import cgg_steady, cgg_time_dependent, einstein_weight, ALICE_DIR, BOB_DIR
from .emitters import Couplings, EmitterPair, hybrid_levels
from .modes import PhotonMode, XHAT, ZHAT, basis_for, projection_pair

__all__ = [
    "AmplitudeTrajectory",
    "OracleError",
    "CheckResult",
    "VerificationReport",
    "integrate_single_photon",
    "analytic_single_photon",
    "integrate_two_photon",
    "verify_cgg_limit",
    "random_mode",
    "run_verification",
]

T_MAX = 50.0


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class AmplitudeTrajectory:
    times: np.ndarray
    c_ee: np.ndarray
    c_eg: np.ndarray
    c_ge: np.ndarray
    mode: PhotonMode


def _projections(pair: EmitterPair, mode: PhotonMode):
    p1, p2 = projection_pair(pair, mode.k_hat, mode.pol, mode.detuning)
    return complex(p1), complex(p2)


def _single_rhs(couplings: Couplings, detuning: float, p1: complex, p2: complex):
    cross = 1j * couplings.V + 0.5 * couplings.gamma12

    def rhs(t, y):
        drive = -1j * np.exp((1j * detuning - 1.0) * t)
        c_eg, c_ge = y
        return np.array([drive * p2 - 0.5 * c_eg - cross * c_ge, drive * p1 - 0.5 * c_ge - cross * c_eg])

    return rhs


def _solve(rhs, y0, t_end, rtol, t_eval=None):
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=rtol, atol=rtol * 1e-3, t_eval=t_eval)
    if not sol.success:
        raise OracleError(f"time integration failed: {sol.message}")
    return sol


def _check_t_end(t_end):
    if not 0 < t_end <= T_MAX:
        raise ValueError(f"t_end must lie in (0, {T_MAX:g}] (units 1/gamma0)")


def integrate_single_photon(
    pair: EmitterPair,
    couplings: Couplings,
    mode: PhotonMode,
    t_end: float,
    dt_control: float = 1e-10,
    times=None,
) -> AmplitudeTrajectory:
    """One-photon-emitted amplitudes c_eg (emitter 1 still excited) and c_ge by adaptive Runge-Kutta.

    ``dt_control`` is the relative local error tolerance.
    """
    _check_t_end(t_end)
    p1, p2 = _projections(pair, mode)
    t_eval = np.linspace(0.0, t_end, 201) if times is None else np.asarray(times, float)
    sol = _solve(_single_rhs(couplings, mode.detuning, p1, p2), np.zeros(2, complex), t_end, dt_control, t_eval)
    return AmplitudeTrajectory(sol.t, np.exp(-sol.t), sol.y[0], sol.y[1], mode)


def analytic_single_photon(pair: EmitterPair, couplings: Couplings, mode: PhotonMode, times) -> AmplitudeTrajectory:
    """Closed-form one-photon amplitudes (symmetric/antisymmetric decomposition)."""
    t = np.asarray(times, float)
    p1, p2 = _projections(pair, mode)
    d = mode.detuning
    sym_rate = 0.5 * (1.0 + couplings.gamma12) + 1j * couplings.V
    anti_rate = 0.5 * (1.0 - couplings.gamma12) - 1j * couplings.V
    s_minus = (p1 + p2) / (0.5 * (1.0 - couplings.gamma12) + 1j * (-couplings.V - d))
    a_plus = (p1 - p2) / (0.5 * (1.0 + couplings.gamma12) + 1j * (couplings.V - d))
    drive = np.exp((1j * d - 1.0) * t)
    es, ea = np.exp(-sym_rate * t), np.exp(-anti_rate * t)
    c_eg = (s_minus * es - a_plus * ea - (s_minus - a_plus) * drive) / 2j
    c_ge = (s_minus * es + a_plus * ea - (s_minus + a_plus) * drive) / 2j
    return AmplitudeTrajectory(t, np.exp(-t), c_eg, c_ge, mode)


def integrate_two_photon(
    pair: EmitterPair,
    couplings: Couplings,
    mode_a: PhotonMode,
    mode_b: PhotonMode,
    t_end: float,
    rtol: float = 1e-11,
) -> complex:
    """Reduced two-photon amplitude at ``t_end`` from the joint time integration."""
    _check_t_end(t_end)
    eps = einstein_weight(mode_a, mode_b)
    pa1, pa2 = _projections(pair, mode_a)
    pb1, pb2 = _projections(pair, mode_b)
    rhs_a = _single_rhs(couplings, mode_a.detuning, pa1, pa2)
    rhs_b = _single_rhs(couplings, mode_b.detuning, pb1, pb2)
    da, db = mode_a.detuning, mode_b.detuning

    def rhs(t, y):
        # photon a first, then b from the remaining excitation, and the reverse order
        eg_a, ge_a, eg_b, ge_b, _ = y
        ea, eb = np.exp(1j * da * t), np.exp(1j * db * t)
        source = (eg_a * pb1 + ge_a * pb2) * eb + (eg_b * pa1 + ge_b * pa2) * ea
        return np.concatenate([rhs_a(t, y[0:2]), rhs_b(t, y[2:4]), [-1j * source / eps]])

    sol = _solve(rhs, np.zeros(5, complex), t_end, rtol)
    return complex(sol.y[4, -1])


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    bound: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.deviation <= self.bound


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {c.name}: deviation {c.deviation:.3e} (bound {c.bound:.1e}) {c.detail}".rstrip()
            for c in self.checks
        ]


def verify_cgg_limit(
    pair: EmitterPair, couplings: Couplings, mode_a: PhotonMode, mode_b: PhotonMode, t_end: float = T_MAX
) -> CheckResult:
    """Relative deviation between the time-integrated amplitude and the steady closed form.

    When both magnitudes are below 1e-25 the absolute difference is reported instead.
    """
    numeric = integrate_two_photon(pair, couplings, mode_a, mode_b, t_end)
    closed = cgg_steady(pair, couplings, mode_a, mode_b)
    scale = max(abs(numeric), abs(closed))
    if scale < 1e-25:
        return CheckResult("suppressed channel", abs(numeric - closed), 1e-25, f"|c|={scale:.2e}")
    return CheckResult("two-photon limit", abs(numeric - closed) / scale, 1e-6, f"|c|={abs(closed):.4g}")


def random_mode(rng: np.random.Generator, detuning_scale: float, centers=()) -> PhotonMode:
    cos_t = rng.uniform(-0.95, 0.95)
    theta, phi = math.acos(cos_t), rng.uniform(0.0, 2.0 * math.pi)
    b = basis_for(theta, phi, "spherical")
    ang = rng.uniform(0.0, 2.0 * math.pi)
    pol = math.cos(ang) * b.e1 + math.sin(ang) * b.e2
    pol = pol / np.linalg.norm(pol)
    center = rng.choice(list(centers)) if len(centers) else 0.0
    return PhotonMode(theta, phi, center + detuning_scale * rng.standard_normal(), pol)


def run_verification(pair: EmitterPair | None = None, n_random: int = 10, seed: int = 0) -> VerificationReport:
    """Full oracle battery: one-photon trajectories, on-axis limits and random mode pairs."""
    pair = pair or EmitterPair(math.pi / 4, -math.pi / 4, 0.075)
    c = hybrid_levels(pair)
    rng = np.random.Generator(np.random.Philox(seed))
    report = VerificationReport()
    grid = np.linspace(0.0, 10.0, 401)
    worst = 0.0
    for _ in range(3):
        mode = random_mode(rng, 2.0, (c.V, -c.V))
        num = integrate_single_photon(pair, c, mode, 10.0, times=grid)
        ana = analytic_single_photon(pair, c, mode, grid)
        worst = max(worst, np.max(np.abs(num.c_eg - ana.c_eg)), np.max(np.abs(num.c_ge - ana.c_ge)))
    report.checks.append(CheckResult("one-photon amplitudes on [0, 10]", float(worst), 1e-6))

    up, down = c.delta_plus, c.delta_minus
    for la, pa in (("x", XHAT), ("z", ZHAT)):
        for lb, pb in (("x", XHAT), ("z", ZHAT)):
            ma = PhotonMode(*ALICE_DIR, up, pa)
            mb = PhotonMode(*BOB_DIR, down, pb)
            res = verify_cgg_limit(pair, c, ma, mb)
            report.checks.append(CheckResult(f"on-axis {la}{lb}: {res.name}", res.deviation, res.bound, res.detail))
    for i in range(n_random):
        ma = random_mode(rng, 3.0, (c.V, -c.V))
        mb = random_mode(rng, 3.0, (c.V, -c.V))
        res = verify_cgg_limit(pair, c, ma, mb)
        report.checks.append(CheckResult(f"random pair {i}: {res.name}", res.deviation, res.bound, res.detail))
    ma, mb = random_mode(rng, 1.0, (up,)), random_mode(rng, 1.0, (down,))
    t1 = cgg_time_dependent(pair, c, ma, mb, 1.0)
    n1 = integrate_two_photon(pair, c, ma, mb, 1.0)
    report.checks.append(CheckResult("finite-time amplitude at t=1", abs(t1 - n1) / max(abs(n1), 1e-300), 1e-8))
    return report
