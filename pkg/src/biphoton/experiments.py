"""Named experiments producing tables, one per reproduced figure."""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import amplitudes as amp
from .emitters import PRESETS, EmitterPair, hybrid_levels
from .integration import QuadratureFailure, angular_density_map, total_normalization
from .modes import direction
from .oracle import run_verification
from .postselection import FilterPair, metrics, tomography
from .quadrature import QuadratureSpec

__all__ = [
    "ParameterError",
    "Table",
    "Experiment",
    "EXPERIMENTS",
    "parse_number",
    "parse_range",
    "resolve_params",
    "run_experiment",
]


class ParameterError(ValueError):
    pass


_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_number(text: str) -> float:
    """Float from a small arithmetic expression; ``pi`` is the only name allowed."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ParameterError(f"cannot parse number {text!r}")

    try:
        return float(ev(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ParameterError(f"cannot parse number {text!r}") from exc


def parse_range(text: str) -> np.ndarray:
    """``a:b:N`` (linear), ``a:b:logN`` (log-spaced), comma lists or a single value."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParameterError(f"range {text!r} must be start:stop:N or start:stop:logN")
        lo, hi = parse_number(parts[0]), parse_number(parts[1])
        count = parts[2].strip()
        log = count.startswith("log")
        try:
            n = int(count[3:] if log else count)
        except ValueError as exc:
            raise ParameterError(f"bad point count in range {text!r}") from exc
        if n < 1:
            raise ParameterError(f"range {text!r} needs at least one point")
        if log:
            if lo <= 0 or hi <= 0:
                raise ParameterError(f"log range {text!r} needs positive bounds")
            return np.logspace(math.log10(lo), math.log10(hi), n)
        return np.linspace(lo, hi, n)
    values = np.array([parse_number(t) for t in text.split(",") if t.strip()])
    if values.size == 0:
        raise ParameterError("empty parameter value")
    return values


@dataclass
class Table:
    columns: list[str]
    rows: np.ndarray
    comments: list[str] = field(default_factory=list)
    # optional heatmap: (value column, x column, y column)
    heatmap: tuple[str, str, str] | None = None
    log_color: bool = False
    failed: str = ""
    report: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Experiment:
    name: str
    func: Callable
    defaults: dict
    description: str


COMMON = {
    "preset": "dbatt",
    "alpha1": "pi/4",
    "alpha2": "-pi/4",
    "alpha_dw": "1",
    "rel_tol": "1e-7",
    "seed": "0",
}


def resolve_params(name: str, overrides: dict) -> dict:
    exp = EXPERIMENTS[name]
    allowed = {**COMMON, **exp.defaults}
    unknown = set(overrides) - set(allowed)
    if unknown:
        raise ParameterError(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    params = dict(allowed)
    params.update({k: str(v) for k, v in overrides.items() if v is not None})
    if params["preset"] not in PRESETS:
        raise ParameterError(f"unknown preset {params['preset']!r}")
    try:
        QuadratureSpec(rel_tol=parse_number(params["rel_tol"]))
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc
    return params


def _pair(params, r12=None, alpha1=None, alpha2=None) -> EmitterPair:
    preset = PRESETS[params["preset"]]
    return preset.pair(
        parse_number(params["alpha1"]) if alpha1 is None else alpha1,
        parse_number(params["alpha2"]) if alpha2 is None else alpha2,
        parse_number(params["r12"]) if r12 is None else r12,
        alpha_dw=parse_number(params["alpha_dw"]),
    )


def _spec(params) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=parse_number(params["rel_tol"]))


def _postselect(pair, gamma, spec, dirs=None):
    c = hybrid_levels(pair)
    kw = {} if dirs is None else {"detect_dirs": dirs}
    return metrics(tomography(pair, c, FilterPair.at_hybrid_lines(c, gamma), spec=spec, strict=True, **kw))


# ---------------------------------------------------------------- experiments


def exp_couplings(params, mapper):
    rows = []
    for r in parse_range(params["r12"]):
        c = hybrid_levels(_pair(params, r12=r))
        rows.append((r, c.V, c.gamma12))
    return Table(["r12", "V", "gamma12"], np.array(rows))


def exp_pattern(params, mapper):
    th = parse_range(params["theta"])
    ph = parse_range(params["phi"])
    pair = _pair(params, r12=1.0)
    sym = pair.dipole(1) + pair.dipole(2)
    anti = pair.dipole(1) - pair.dipole(2)
    T, P = np.meshgrid(th, ph, indexing="ij")
    rows = [T.ravel(), P.ravel()]
    cols = ["theta", "phi"]
    for label, vec in (("symmetric", sym), ("antisymmetric", anti)):
        if np.linalg.norm(vec) < 1e-12:
            rows.append(np.zeros(T.size))
        else:
            rows.append(amp.dipole_radiation_pattern(vec, T, P).ravel())
        cols.append(f"E2_{label}")
    return Table(cols, np.column_stack(rows), heatmap=("E2_symmetric", "theta", "phi"))


def _detuning_grid(params):
    return parse_range(params["da"]), parse_range(params["db"])


def exp_spectral_density(params, mapper):
    pair = _pair(params)
    c = hybrid_levels(pair)
    da, db = _detuning_grid(params)
    A, B = np.meshgrid(da, db, indexing="ij")
    amps = amp.axis_amplitudes(pair, c, A, B)
    w = amp.density_weight(pair, A, B)
    cols, rows = ["da", "db"], [A.ravel(), B.ravel()]
    for conv, factor in (("medium", 1.0), ("vacuum", pair.n**2)):
        for key in ("xx", "xz", "zx", "zz"):
            cols.append(f"P_{key}_{conv}")
            rows.append((factor * w * np.abs(amps[key]) ** 2).ravel())
    comments = [
        f"V = {c.V:.17g}, gamma12 = {c.gamma12:.17g}",
        "P per unit solid angle squared and unit wavenumber squared;",
        "medium columns measure wavenumbers in gamma0/c_medium, vacuum columns in gamma0/c_vacuum (factor n^2)",
    ]
    return Table(cols, np.column_stack(rows), comments, heatmap=("P_xx_medium", "da", "db"))


def exp_phase_map(params, mapper):
    pair = _pair(params)
    c = hybrid_levels(pair)
    da, db = _detuning_grid(params)
    A, B = np.meshgrid(da, db, indexing="ij")
    amps = amp.axis_amplitudes(pair, c, A, B)
    prod = amps["xx"] * np.conj(amps["zz"])
    delta = np.angle(prod)
    delta = np.where(delta == -math.pi, math.pi, delta)
    return Table(
        ["da", "db", "delta"],
        np.column_stack([A.ravel(), B.ravel(), delta.ravel()]),
        [f"V = {c.V:.17g}; delta = arg(c_xx) - arg(c_zz) in (-pi, pi]"],
        heatmap=("delta", "da", "db"),
    )


def exp_angular_map(params, mapper):
    pair = _pair(params)
    c = hybrid_levels(pair)
    th = parse_range(params["theta"])
    ph = parse_range(params["phi"])
    spec = QuadratureSpec(rel_tol=max(parse_number(params["rel_tol"]), parse_number(params["map_rel_tol"])))
    grid = angular_density_map(
        pair, c, parse_number(params["theta0"]), parse_number(params["phi0"]), th, ph, spec, mapper
    )
    T, P = np.meshgrid(th, ph, indexing="ij")
    t_max, p_max = grid.argmax()
    table = Table(
        ["theta_p", "phi_p", "D"],
        np.column_stack([T.ravel(), P.ravel(), grid.values.ravel()]),
        [f"argmax theta_p = {t_max:.17g}, phi_p = {p_max:.17g}"],
        heatmap=("D", "theta_p", "phi_p"),
    )
    if not grid.all_converged:
        table.failed = "angular density: a spectral integral missed its tolerance"
    return table


def exp_rho(params, mapper):
    pair = _pair(params)
    c = hybrid_levels(pair)
    gamma = parse_number(params["gamma"])
    dirs = ((parse_number(params["theta"]), parse_number(params["phi"])), (math.pi / 2, -math.pi / 2))
    rho = tomography(pair, c, FilterPair.at_hybrid_lines(c, gamma), dirs, _spec(params), strict=True)
    labels = ("xx", "xz", "zx", "zz")
    rows = [(i, j, rho.m[i, j].real, rho.m[i, j].imag) for i in range(4) for j in range(4)]
    m = metrics(rho)
    comments = [f"basis order {','.join(labels)} (row/col indices 0-3)"]
    comments += [f"{k} = {v:.17g}" for k, v in m.items()]
    return Table(["row", "col", "re", "im"], np.array(rows, float), comments)


def _metric_row(args):
    pair, gamma, spec, dirs = args
    return _postselect(pair, gamma, spec, dirs)


_METRIC_COLUMNS = {"C": "C", "F": "F", "F_unsquared": "F_unsquared", "N": "N", "purity": "purity"}


def _metric_names(params):
    names = [m.strip() for m in params["metrics"].split(",") if m.strip()]
    bad = [m for m in names if m not in _METRIC_COLUMNS]
    if bad:
        raise ParameterError(f"unknown metric(s): {', '.join(bad)}")
    return names


def exp_sweep_gamma_r12(params, mapper):
    gammas = parse_range(params["gamma"])
    r12s = parse_range(params["r12"])
    names = _metric_names(params)
    spec = _spec(params)
    jobs = [(_pair(params, r12=r), g, spec, None) for g in gammas for r in r12s]
    results = list(mapper(_metric_row, jobs))
    n_max = max(res["N"] for res in results)
    rows = []
    k = 0
    for g in gammas:
        for r in r12s:
            res = results[k]
            k += 1
            row = [g, r] + [res[n] for n in names]
            if "N" in names:
                row.append(res["N"] / n_max)
            rows.append(row)
    cols = ["gamma", "r12"] + names + (["N_over_Nmax"] if "N" in names else [])
    first = names[0] if names else None
    return Table(cols, np.array(rows), heatmap=(first, "gamma", "r12") if first else None, log_color=True)


def exp_lens_map(params, mapper):
    pair = _pair(params)
    gamma = parse_number(params["gamma"])
    th = parse_range(params["theta"])
    ph = parse_range(params["phi"])
    spec = _spec(params)
    bob = (math.pi / 2, -math.pi / 2)
    jobs = [(pair, gamma, spec, ((t, p), bob)) for t in th for p in ph]
    for _, _, _, ((t, p), _) in jobs:
        if not direction(t, p)[1] > 0:
            raise ParameterError("lens-map directions need a positive y component")
    results = list(mapper(_metric_row, jobs))
    rows = [
        (t, p, 1 - res["F"], 1 - res["F_unsquared"], 1 - res["C"])
        for ((_, _, _, ((t, p), _)), res) in zip(jobs, results)
    ]
    return Table(
        ["theta", "phi", "one_minus_F", "one_minus_F_unsquared", "one_minus_C"],
        np.array(rows),
        heatmap=("one_minus_F", "theta", "phi"),
        log_color=True,
    )


def exp_dipole_angle_sweep(params, mapper):
    alphas = parse_range(params["alpha1"])
    r12 = parse_number(params["r12"])
    gamma = parse_number(params["gamma"])
    spec = _spec(params)
    jobs = [(_pair(params, r12=r12, alpha1=a, alpha2=-a), gamma, spec, None) for a in alphas]
    results = list(mapper(_metric_row, jobs))
    rows = [(a, 1 - r["C"], 1 - r["F"], 1 - r["F_unsquared"], r["purity"], r["N"]) for a, r in zip(alphas, results)]
    return Table(
        ["alpha1", "one_minus_C", "one_minus_F", "one_minus_F_unsquared", "purity", "N"], np.array(rows)
    )


def exp_distant(params, mapper):
    r12s = parse_range(params["r12"])
    gamma = parse_number(params["gamma"])
    spec = _spec(params)
    pairs = [_pair(params, r12=r) for r in r12s]
    results = list(mapper(_metric_row, [(p, gamma, spec, None) for p in pairs]))
    rows = []
    for p, r in zip(pairs, results):
        c = hybrid_levels(p)
        rows.append((p.r12, c.V, c.gamma12, 1 - r["C"], 1 - r["F"], 1 - r["F_unsquared"]))
    return Table(["r12", "V", "gamma12", "one_minus_C", "one_minus_F", "one_minus_F_unsquared"], np.array(rows))


def exp_verify(params, mapper):
    pair = _pair(params)
    report = run_verification(pair, int(parse_number(params["n_random"])), int(parse_number(params["seed"])))
    rows = [(i, c.deviation, c.bound, float(c.passed)) for i, c in enumerate(report.checks)]
    comments = [f"check {i}: {c.name}" for i, c in enumerate(report.checks)]
    table = Table(["check", "deviation", "bound", "passed"], np.array(rows), comments)
    if not report.passed:
        table.failed = "; ".join(c.name for c in report.checks if not c.passed)
    table.report = report.lines()
    return table


def exp_normalize(params, mapper):
    n = int(parse_number(params["n_samples"]))
    seed = int(parse_number(params["seed"]))
    rows, bad = [], []
    for r in parse_range(params["r12"]):
        pair = _pair(params, r12=r)
        res = total_normalization(pair, hybrid_levels(pair), n, seed, mapper=mapper)
        rows.append((r, res.probability, res.std_error, res.ordered_integral, n))
        if not res.reliable:
            bad.append(f"r12={r:g}")
    table = Table(
        ["r12", "probability", "std_error", "ordered_integral", "n_samples"],
        np.array(rows),
        ["probability counts each unordered photon pair once (half of ordered_integral)"],
    )
    if bad:
        table.failed = "normalization standard error above 5% at " + ", ".join(bad)
    return table


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment("couplings", exp_couplings, {"r12": "0.02:0.5:100"}, "V and gamma12 versus separation"),
        Experiment("pattern", exp_pattern, {"theta": "0:pi:37", "phi": "-pi:pi:73"}, "classical dipole patterns"),
        Experiment(
            "spectral-density",
            exp_spectral_density,
            {"r12": "0.075", "da": "-10:10:201", "db": "-10:10:201"},
            "pair density P at +-y over both detunings",
        ),
        Experiment(
            "phase-map",
            exp_phase_map,
            {"r12": "0.075", "da": "-10:10:201", "db": "-10:10:201"},
            "relative phase of the xx and zz amplitudes",
        ),
        Experiment(
            "angular-map",
            exp_angular_map,
            {"r12": "0.075", "theta0": "pi/2", "phi0": "pi/2", "theta": "0:pi:40", "phi": "-pi:pi:40", "map_rel_tol": "1e-4"},
            "angular pair density D",
        ),
        Experiment(
            "rho",
            exp_rho,
            {"r12": "0.05", "gamma": "1e-2", "theta": "pi/2", "phi": "pi/2"},
            "post-selected polarization density matrix",
        ),
        Experiment(
            "sweep-gamma-r12",
            exp_sweep_gamma_r12,
            {"gamma": "1e-2:10:log25", "r12": "0.03:0.15:25", "metrics": "C,F,N,purity"},
            "metrics over filter width and separation",
        ),
        Experiment(
            "lens-map",
            exp_lens_map,
            {"r12": "0.05", "gamma": "1e-2", "theta": "pi/2-0.3:pi/2+0.3:13", "phi": "pi/2-0.3:pi/2+0.3:13"},
            "fidelity versus Alice's detection direction",
        ),
        Experiment(
            "dipole-angle-sweep",
            exp_dipole_angle_sweep,
            {"r12": "0.05", "gamma": "1e-2", "alpha1": "0:pi/2:21"},
            "metrics versus dipole angle alpha1 = -alpha2",
        ),
        Experiment(
            "distant",
            exp_distant,
            {"r12": "0.05:3:60", "gamma": "1e-2"},
            "metrics at large separations",
        ),
        Experiment("verify", exp_verify, {"r12": "0.075", "n_random": "10"}, "time-domain oracle checks"),
        Experiment(
            "normalize",
            exp_normalize,
            {"r12": "0.05,0.075,0.3", "n_samples": "200000"},
            "Monte-Carlo total emission probability",
        ),
    ]
}


def run_experiment(name: str, params: dict, mapper=map) -> Table:
    try:
        return EXPERIMENTS[name].func(params, mapper)
    except QuadratureFailure as exc:
        return Table([], np.empty((0, 0)), failed=str(exc))
