"""Spectral integrals of the pair emission density: angular density D and total normalization.

The polarization-summed density factorizes through a 4x4 "emitter Gram
matrix": with H_jl the emitter-resolved kernel of :func:`emitter_kernel`,

    sum_pol |c|^2 = sum Pi^A_jj' Pi^B_ll' H_jl conj(H_j'l'),

where Pi is the transverse projector of the dipoles.  H depends on the two
directions only through cos(theta) of each, so one spectral integral serves
every azimuth and every polarization basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amplitudes import density_weight, spectral_kernels
from .emitters import Couplings, EmitterPair
from .modes import direction
from .quadrature import QuadResult, QuadratureSpec, feature_breakpoints, integrate_2d

__all__ = [
    "AngularDensityGrid",
    "NormalizationResult",
    "NormalizationError",
    "QuadratureFailure",
    "dipole_projectors",
    "emitter_gram",
    "spectral_features",
    "angular_density",
    "angular_density_map",
    "total_normalization",
    "normalization_by_quadrature",
    "sample_sphere",
]

_SIGN = np.array([[1.0, -1.0], [-1.0, 1.0]])


class QuadratureFailure(RuntimeError):
    """A spectral integral missed its tolerance; the message names the integral."""


class NormalizationError(RuntimeError):
    pass


def dipole_projectors(pair: EmitterPair, k_hat) -> np.ndarray:
    """Pi[..., j, j'] = mu_j.mu_j' - (mu_j.k)(mu_j'.k) for an array of unit vectors (..., 3)."""
    mu = np.stack([pair.dipole(1), pair.dipole(2)])
    along = np.asarray(k_hat, float) @ mu.T
    return (mu @ mu.T) - along[..., :, None] * along[..., None, :]


def _kernel(pair: EmitterPair, couplings: Couplings, cos_a, cos_b, da, db):
    """H[..., j, l] at given cos(theta) of each photon (broadcast with the detunings)."""
    g_s, g_a = (np.asarray(g) for g in spectral_kernels(couplings, da, db))
    half = 0.5 * pair.k0_r12
    pa = half * (1.0 + da / pair.omega0) * cos_a
    pb = half * (1.0 + db / pair.omega0) * cos_b
    ph_a = np.stack([np.exp(-1j * pa), np.exp(1j * pa)], axis=-1)
    ph_b = np.stack([np.exp(-1j * pb), np.exp(1j * pb)], axis=-1)
    h = g_s[..., None, None] + _SIGN * g_a[..., None, None]
    return ph_a[..., :, None] * ph_b[..., None, :] * h


def spectral_features(couplings: Couplings, extra=()):
    """(center, width) pairs marking where the spectral integrand has structure."""
    feats = [
        (couplings.V, 0.5 * max(couplings.rate_plus, 1e-6)),
        (-couplings.V, 0.5 * max(couplings.rate_minus, 1e-6)),
        (0.0, 1.0),
    ]
    return feats + list(extra)


def emitter_gram(
    pair: EmitterPair,
    couplings: Couplings,
    cos_a: float,
    cos_b: float,
    spec: QuadratureSpec | None = None,
    weight=None,
    extra_features_a=(),
    extra_features_b=(),
    window: float | None = None,
    label: str = "emitter Gram matrix",
) -> QuadResult:
    """4x4 Hermitian matrix G[(j,l),(j',l')] = double integral of w * H_jl conj(H_j'l').

    ``weight(da, db)`` multiplies the density weight (e.g. filter transmissions).
    The returned ``value`` has shape (4, 4) with index j*2+l.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-6)
    if window is None:
        scales = [couplings.V] + [w for _, w in list(extra_features_a) + list(extra_features_b)]
        window = spec.window(*scales)
    iu = np.triu_indices(4)

    def integrand(da, db):
        h = _kernel(pair, couplings, cos_a, cos_b, da, db).reshape(da.shape + (4,))
        w = density_weight(pair, da, db)
        if weight is not None:
            w = w * weight(da, db)
        outer = h[..., :, None] * np.conj(h[..., None, :])
        return outer[..., iu[0], iu[1]] * w[..., None]

    fa = spectral_features(couplings, extra_features_a)
    fb = spectral_features(couplings, extra_features_b)

    def windowed(w):
        return integrate_2d(
            integrand, -w, w, -w, w, spec,
            feature_breakpoints(-w, w, fa),
            feature_breakpoints(-w, w, fb),
        )

    res = windowed(window)
    if spec.tail_extrapolation:
        # the ridge tail outside the window falls off as 1/W; cancel the 1/W and 1/W^2 terms
        mid, far = windowed(2 * window), windowed(4 * window)
        first = 2 * mid.value - res.value
        value = (8 * far.value - 6 * mid.value + res.value) / 3
        res = QuadResult(
            value,
            max(res.error, mid.error, far.error) + float(np.max(np.abs(value - first))),
            res.converged and mid.converged and far.converged,
            res.n_regions + mid.n_regions + far.n_regions,
            res.n_evals + mid.n_evals + far.n_evals,
            "; ".join(m for m in (res.message, mid.message, far.message) if m),
        )
    g = np.zeros((4, 4), complex)
    g[iu] = res.value
    g = g + np.triu(g, 1).conj().T
    if res.message:
        res.message = f"{label}: {res.message}"
    res.value = g
    return res


def _contract(gram: np.ndarray, proj_a: np.ndarray, proj_b: np.ndarray) -> np.ndarray:
    g = gram.reshape(2, 2, 2, 2)  # j, l, j', l'
    return np.einsum("...ab,...cd,acbd->...", proj_a, proj_b, g).real


def angular_density(
    pair: EmitterPair,
    couplings: Couplings,
    theta: float,
    phi: float,
    theta_p: float,
    phi_p: float,
    spec: QuadratureSpec | None = None,
    strict: bool = False,
) -> float:
    """Pair density D per unit solid angle squared, frequencies and polarizations summed."""
    res = emitter_gram(pair, couplings, math.cos(theta), math.cos(theta_p), spec)
    if strict and not res.converged:
        raise QuadratureFailure(res.message)
    pa = dipole_projectors(pair, direction(theta, phi))
    pb = dipole_projectors(pair, direction(theta_p, phi_p))
    return float(_contract(res.value, pa, pb))


@dataclass(frozen=True)
class AngularDensityGrid:
    theta: float
    phi: float
    theta_p: np.ndarray
    phi_p: np.ndarray
    values: np.ndarray  # shape (len(theta_p), len(phi_p))
    spec: QuadratureSpec
    all_converged: bool

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.theta_p[i]), float(self.phi_p[j])


def angular_density_map(
    pair: EmitterPair,
    couplings: Couplings,
    theta: float,
    phi: float,
    theta_p,
    phi_p,
    spec: QuadratureSpec | None = None,
    mapper=map,
) -> AngularDensityGrid:
    """D over a (theta', phi') grid for photon A fixed at (theta, phi).

    ``mapper`` is an order-preserving map (builtin ``map`` or a pool's) over the theta' rows.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-6)
    theta_p = np.asarray(theta_p, float)
    phi_p = np.asarray(phi_p, float)
    cos_a = math.cos(theta)
    grams = list(mapper(_gram_row, [(pair, couplings, cos_a, math.cos(t), spec) for t in theta_p]))
    pa = dipole_projectors(pair, direction(theta, phi))
    values = np.empty((len(theta_p), len(phi_p)))
    for i, (t, res) in enumerate(zip(theta_p, grams)):
        ks = np.stack([direction(t, p) for p in phi_p])
        values[i] = _contract(res.value, pa, dipole_projectors(pair, ks))
    # zero out rounding-level negatives only
    floor = -1e-12 * float(np.max(np.abs(values)))
    values = np.where((values < 0) & (values > floor), 0.0, values)
    return AngularDensityGrid(theta, phi, theta_p, phi_p, values, spec, all(r.converged for r in grams))


def _gram_row(args):
    return emitter_gram(*args)


# ---------------------------------------------------------------- normalization


@dataclass(frozen=True)
class NormalizationResult:
    """Total emission probability of the photon pair.

    ``probability`` counts each unordered photon pair once (half the ordered
    double integral ``ordered_integral``).
    """

    probability: float
    std_error: float
    ordered_integral: float
    n_samples: int
    seed: int

    @property
    def relative_error(self) -> float:
        return self.std_error / abs(self.probability) if self.probability else math.inf

    @property
    def reliable(self) -> bool:
        return self.relative_error <= 0.05

    def check(self) -> "NormalizationResult":
        if not self.reliable:
            raise NormalizationError(
                f"Monte-Carlo standard error {self.std_error:.3g} exceeds 5% of {self.probability:.6g}"
            )
        return self


def sample_sphere(rng: np.random.Generator, n: int):
    """Uniform directions as (cos theta, phi)."""
    return rng.uniform(-1.0, 1.0, n), rng.uniform(0.0, 2.0 * math.pi, n)


def _cauchy_pdf(x, loc, scale):
    return scale / (math.pi * ((x - loc) ** 2 + scale**2))


def _detuning_mixture(couplings: Couplings):
    """Components (kind, a_loc, a_scale, b_loc, b_scale) of the importance density.

    kind 'prod' draws both detunings independently; 'ridge_a' draws the first
    detuning and the sum; 'ridge_b' the second and the sum.
    """
    v = couplings.V
    sp = max(0.5 * couplings.rate_plus, 1e-6)
    sm = max(0.5 * couplings.rate_minus, 1e-6)
    broad = 2.0 + abs(v)
    return [
        ("prod", -v, sm, v, sp),
        ("prod", v, sp, -v, sm),
        ("ridge_a", -v, sm, 0.0, 1.0),
        ("ridge_a", v, sp, 0.0, 1.0),
        ("ridge_b", -v, sm, 0.0, 1.0),
        ("ridge_b", v, sp, 0.0, 1.0),
        ("prod", 0.0, broad, 0.0, broad),
    ]


def _draw_detunings(rng, comps, n):
    which = rng.integers(0, len(comps), n)
    u1 = rng.standard_cauchy(n)
    u2 = rng.standard_cauchy(n)
    da = np.empty(n)
    db = np.empty(n)
    for i, (kind, l1, s1, l2, s2) in enumerate(comps):
        m = which == i
        x1 = l1 + s1 * u1[m]
        x2 = l2 + s2 * u2[m]
        if kind == "prod":
            da[m], db[m] = x1, x2
        elif kind == "ridge_a":
            da[m], db[m] = x1, x2 - x1
        else:
            db[m], da[m] = x1, x2 - x1
    return da, db


def _mixture_pdf(comps, da, db):
    pdf = np.zeros_like(da)
    for kind, l1, s1, l2, s2 in comps:
        if kind == "prod":
            pdf += _cauchy_pdf(da, l1, s1) * _cauchy_pdf(db, l2, s2)
        elif kind == "ridge_a":
            pdf += _cauchy_pdf(da, l1, s1) * _cauchy_pdf(da + db, l2, s2)
        else:
            pdf += _cauchy_pdf(db, l1, s1) * _cauchy_pdf(da + db, l2, s2)
    return pdf / len(comps)


def _pol_summed_density(pair, couplings, cos_a, phi_a, cos_b, phi_b, da, db):
    sin_a = np.sqrt(np.maximum(0.0, 1.0 - cos_a**2))
    sin_b = np.sqrt(np.maximum(0.0, 1.0 - cos_b**2))
    ka = np.stack([sin_a * np.cos(phi_a), sin_a * np.sin(phi_a), cos_a], axis=-1)
    kb = np.stack([sin_b * np.cos(phi_b), sin_b * np.sin(phi_b), cos_b], axis=-1)
    h = _kernel(pair, couplings, cos_a, cos_b, da, db)
    pa = dipole_projectors(pair, ka)
    pb = dipole_projectors(pair, kb)
    summed = np.einsum("nab,ncd,nac,nbd->n", pa, pb, h, np.conj(h)).real
    return density_weight(pair, da, db) * summed


def _shard(args):
    pair, couplings, seed_seq, n = args
    rng = np.random.Generator(np.random.Philox(seed_seq))
    comps = _detuning_mixture(couplings)
    cos_a, phi_a = sample_sphere(rng, n)
    cos_b, phi_b = sample_sphere(rng, n)
    da, db = _draw_detunings(rng, comps, n)
    f = _pol_summed_density(pair, couplings, cos_a, phi_a, cos_b, phi_b, da, db)
    # no photons below zero frequency
    f = np.where((da > -pair.omega0) & (db > -pair.omega0), f, 0.0)
    q = _mixture_pdf(comps, da, db) / (4.0 * math.pi) ** 2
    ratio = f / q
    return float(ratio.sum()), float((ratio**2).sum()), n


def total_normalization(
    pair: EmitterPair,
    couplings: Couplings,
    n_samples: int = 200_000,
    seed: int = 0,
    n_shards: int = 16,
    mapper=map,
    strict: bool = False,
) -> NormalizationResult:
    """Monte-Carlo estimate of the total pair emission probability.

    Directions are drawn uniformly on both spheres and detunings from a
    Lorentzian mixture matched to the hybrid-level peaks and the
    energy-conservation ridge.  Shards use independent Philox streams spawned
    from ``seed`` and are reduced in shard order, so the result depends only on
    (seed, n_samples, n_shards).
    """
    if n_samples < 100_000:
        raise ValueError("n_samples must be at least 1e5")
    children = np.random.SeedSequence(seed).spawn(n_shards)
    sizes = [n_samples // n_shards + (1 if i < n_samples % n_shards else 0) for i in range(n_shards)]
    parts = list(mapper(_shard, [(pair, couplings, children[i], sizes[i]) for i in range(n_shards)]))
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean**2, 0.0) / (n_samples - 1)
    result = NormalizationResult(0.5 * mean, 0.5 * math.sqrt(var), mean, n_samples, seed)
    return result.check() if strict else result


def normalization_by_quadrature(
    pair: EmitterPair,
    couplings: Couplings,
    n_cos: int = 8,
    spec: QuadratureSpec | None = None,
    window: float = 2000.0,
) -> float:
    """Deterministic counterpart of :func:`total_normalization` (same unordered-pair convention).

    Azimuths are integrated analytically through the averaged projector and
    cos(theta) of each photon by Gauss-Legendre with ``n_cos`` nodes.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-6)
    x, w = np.polynomial.legendre.leggauss(n_cos)
    mu = np.stack([pair.dipole(1), pair.dipole(2)])
    cx, cz = mu[:, 0], mu[:, 2]

    def averaged_projector(c):
        # 2 pi times the azimuthal mean of Pi for mu in the xz-plane
        s2 = 1.0 - c * c
        along = np.outer(cx, cx) * 0.5 * s2 + np.outer(cz, cz) * c * c
        return 2.0 * math.pi * (mu @ mu.T - along)

    total = 0.0
    for xa, wa in zip(x, w):
        for xb, wb in zip(x, w):
            g = emitter_gram(pair, couplings, xa, xb, spec, window=window).value
            total += wa * wb * _contract(g, averaged_projector(xa), averaged_projector(xb))
    return 0.5 * float(total)
