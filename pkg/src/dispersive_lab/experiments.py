"""Config-driven experiments, run records and plot-data emission.

Each subcommand takes a validated config dict, runs the numerical check and
returns an :class:`Outcome`; :func:`execute` wraps it in a :class:`RunRecord`
written atomically as JSON next to any CSV series. Configs are TOML (hand
written) or JSON (machine round trips) and must carry an integer ``seed``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from . import exponents as ex
from . import kernel as kn
from . import norms as nm
from . import solver as sv
from .spectral import (
    Field,
    TorusGrid,
    build_cutoff,
    frequency_radius,
    gaussian_field,
    lp_project,
    random_band_limited,
    rescale_field,
    write_field,
)

__all__ = [
    "ConfigError",
    "Outcome",
    "RunRecord",
    "SUBCOMMANDS",
    "OUT_ENV",
    "load_config",
    "validate",
    "execute",
    "report",
    "write_csv",
]

OUT_ENV = "DISPERSIVE_LAB_OUT"
STATUSES = ("pass", "fail", "inconclusive")
REPORT_COLUMNS = ("id", "subcommand", "paper_anchor", "key", "value", "tolerance", "status")


class ConfigError(ValueError):
    """Invalid config; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass
class Outcome:
    status: str
    results: dict
    summary: str
    key: str = ""
    value: Any = None
    tolerance: Any = None
    csv_columns: tuple = ()
    csv_rows: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)


@dataclass
class RunRecord:
    id: str
    timestamp: str
    subcommand: str
    config: dict
    paper_anchor: str
    status: str
    results: dict
    environment: dict
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if x is ex.INF:
        return "inf"
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


# ------------------------------------------------------------- config


def load_config(path: str | os.PathLike) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise ConfigError("config", f"cannot read {path}: {err.strerror}") from None
    try:
        if path.suffix.lower() == ".json":
            return json.loads(raw.decode())
        return tomllib.loads(raw.decode())
    except (ValueError, tomllib.TOMLDecodeError) as err:
        raise ConfigError("config", f"parse error in {path}: {err}") from None


_MISSING = object()


def _get(cfg: dict, name: str, kind: Callable, default=_MISSING, check=None, why: str = ""):
    if name not in cfg:
        if default is _MISSING:
            raise ConfigError(name, "missing required field")
        return default
    val = cfg[name]
    try:
        if kind is bool and not isinstance(val, bool):
            raise TypeError
        out = kind(val)
    except (TypeError, ValueError, ex.ExponentError):
        raise ConfigError(name, f"cannot interpret {val!r} as {getattr(kind, '__name__', kind)}") from None
    if check is not None and not check(out):
        raise ConfigError(name, why or f"value {val!r} out of range")
    return out


def _rational(v) -> Fraction:
    if isinstance(v, float):
        v = Fraction(v).limit_denominator(10**6)
    out = ex.as_exponent(v)
    if out is ex.INF:
        raise ValueError("infinite")
    return out


def _int(v) -> int:
    if isinstance(v, bool) or not float(v).is_integer():
        raise ValueError("not an integer")
    return int(v)


def _triple(v) -> ex.ExponentTriple:
    if isinstance(v, str) and v == "selected":
        raise ValueError("selected")
    return ex.ExponentTriple.parse(v)


def _grid(cfg: dict, ndim: int, split: int) -> TorusGrid:
    g = cfg.get("grid")
    if not isinstance(g, dict):
        raise ConfigError("grid", "missing table with 'n' and 'L'")
    n = g.get("n", _MISSING)
    L = g.get("L", _MISSING)
    if n is _MISSING:
        raise ConfigError("grid.n", "missing required field")
    if L is _MISSING:
        raise ConfigError("grid.L", "missing required field")
    pts = list(n) if isinstance(n, list) else [n] * ndim
    ext = list(L) if isinstance(L, list) else [L] * ndim
    if len(pts) != ndim:
        raise ConfigError("grid.n", f"needs {ndim} entries")
    if len(ext) != ndim:
        raise ConfigError("grid.L", f"needs {ndim} entries")
    try:
        return TorusGrid(tuple(float(e) for e in ext), tuple(_int(p) for p in pts), split)
    except ValueError as err:
        raise ConfigError("grid", str(err)) from None


def _seed(cfg: dict) -> int:
    return _get(cfg, "seed", _int, check=lambda s: 0 <= s < 2**64, why="must be a u64")


def _equation(cfg: dict) -> str:
    return _get(cfg, "equation", str, check=lambda e: e in ("nls", "nlw"),
                why="must be 'nls' or 'nlw'")


# ------------------------------------------------------------ helpers


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, columns, rows) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    tmp.replace(path)


def _atomic_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _selection(equation: str, N: int, s: Fraction, p: Fraction, eps=None) -> ex.SelectionResult:
    if equation == "nls":
        return ex.select_schrodinger_exponents(N, s, p, eps)
    return ex.select_wave_exponents(N, s - Fraction(1, 2), p, eps)


# ---------------------------------------------------------- subcommands


def run_exponents(cfg: dict) -> Outcome:
    eq = _equation(cfg)
    N = _get(cfg, "N", _int, check=lambda n: n >= 2, why="must be >= 2")
    s = _get(cfg, "s", _rational)
    p = _get(cfg, "p", _rational)
    eps = _get(cfg, "epsilon", _rational, default=None)
    k = 2 if eq == "nls" else 1
    s_int = s if eq == "nls" else s - Fraction(1, 2)
    try:
        sel = _selection(eq, N, s, p, eps)
    except ex.EmptyWindowError as err:
        return Outcome("fail", {"error": str(err)}, f"empty window: {err}")
    member = ex.in_class_S(N, k, sel.triple) if eq == "nls" else ex.in_class_W(N, k, sel.triple)
    res = {"inputs": {"equation": eq, "N": N, "s": str(s), "p": str(p), "s_internal": str(s_int)},
           **sel.to_dict(), "admissible": member, "critical_index": str(ex.critical_index(N, p))}
    ok = member and sel.beta > 0
    expect = cfg.get("expect", {})
    if "triple" in expect:
        ok &= sel.triple == ex.ExponentTriple.parse(expect["triple"])
    if "beta" in expect:
        ok &= sel.beta == _rational(expect["beta"])
    if "epsilon" in expect:
        ok &= sel.epsilon == _rational(expect["epsilon"])
    return Outcome("pass" if ok else "fail", res,
                   f"eps={sel.epsilon} triple={sel.triple} beta={sel.beta}",
                   key="beta", value=str(sel.beta), tolerance="exact")


def run_strichartz_scan(cfg: dict) -> Outcome:
    N = _get(cfg, "N", _int, check=lambda n: n >= 2, why="must be >= 2")
    k = _get(cfg, "k", _int, check=lambda v: 1 <= v < N, why="must satisfy 1 <= k < N")
    sigma = _get(cfg, "sigma", _int, check=lambda v: v in (1, 2), why="must be 1 or 2")
    s = _get(cfg, "s", _rational, default=Fraction(1))
    p = _get(cfg, "p", _rational, default=Fraction(3))
    grid = _grid(cfg, N, k)
    T0 = _get(cfg, "T0", float, check=lambda v: v > 0, why="must be positive")
    js = _get(cfg, "js", list)
    samples = _get(cfg, "time_samples", _int, default=33, check=lambda v: v >= 2)
    tol = _get(cfg, "tolerance", float, default=0.2)
    width = _get(cfg, "datum_width", float, default=None)
    triples = []
    for i, t in enumerate(_get(cfg, "triples", list)):
        if t == "selected":
            triples.append(ex.select_schrodinger_exponents(N, s, p).triple)
        else:
            try:
                triples.append(_triple(t))
            except (ValueError, ex.ExponentError):
                raise ConfigError(f"triples[{i}]", f"cannot parse {t!r}") from None
    params = ex.EquationParams(N, k, sigma, s, p)
    f = point_mass_surrogate(grid, width)
    out = nm.band_quotients(f, params, triples, T0, [int(j) for j in js], samples)
    rows = out.pop("rows")
    spreads, unit_err = {}, 0.0
    for t in triples:
        qs = np.asarray(out[str(t)])
        spreads[str(t)] = float(qs.max() / qs.min() - 1)
        if t.q is ex.INF and t.r == 2 and t.r_tilde == 2:
            unit_err = max(unit_err, float(np.max(np.abs(qs - 1))))
    worst = max(spreads.values())
    ok = worst <= tol and unit_err <= 1e-8
    res = {"quotients": out, "spread": spreads, "unitary_error": unit_err,
           "triples": [str(t) for t in triples]}
    return Outcome("pass" if ok else "fail", res,
                   f"max spread {worst:.3g} (tol {tol}), unitary error {unit_err:.2e}",
                   key="max_spread", value=worst, tolerance=tol,
                   csv_columns=nm.NORM_SCAN_COLUMNS, csv_rows=rows)


def point_mass_surrogate(grid: TorusGrid, width: float | None = None) -> Field:
    """Normalized narrow Gaussian standing in for a point mass at the origin."""
    width = width if width is not None else 2.0 * max(grid.spacing)
    g = gaussian_field(grid, width)
    return Field(grid, g.samples / g.l2())


def run_kernel_decay(cfg: dict) -> Outcome:
    sigma = _get(cfg, "sigma", _int, check=lambda v: v in (1, 2), why="must be 1 or 2")
    N = _get(cfg, "N", _int, check=lambda n: 1 <= n <= 4, why="must be in 1..4")
    k = _get(cfg, "k", _int, default=1, check=lambda v: 1 <= v <= N)
    mode = _get(cfg, "norm_mode", str, check=lambda m: m in ("sup_xy", "sup_x_l2_eta"),
                why="must be 'sup_xy' or 'sup_x_l2_eta'")
    t_min = _get(cfg, "t_min", float, default=1.0)
    t_max = _get(cfg, "t_max", float, default=100.0)
    npts = _get(cfg, "t_points", _int, default=12, check=lambda v: v >= 8, why="must be >= 8")
    qp = _get(cfg, "quad_points", _int, default=64, check=lambda v: v >= 8)
    tol = _get(cfg, "tolerance", float, default=0.15)
    ts = np.geomspace(t_min, t_max, npts)
    try:
        rep = kn.decay_fit(sigma, N, k, mode, ts, build_cutoff(), qp)
    except kn.QuadratureError as err:
        return Outcome("inconclusive", {"error": str(err)}, f"quadrature did not converge: {err}")
    except ValueError as err:
        raise ConfigError("t_grid", str(err)) from None
    dev = abs(rep.fitted_slope + rep.predicted_beta)
    status = "pass" if dev <= tol else "fail"
    return Outcome(status, rep.to_dict(),
                   f"slope {rep.fitted_slope:.4f} vs {-rep.predicted_beta:.4f} (tol {tol})",
                   key="fitted_slope", value=rep.fitted_slope, tolerance=tol,
                   csv_columns=kn.KERNEL_SCAN_COLUMNS, csv_rows=rep.rows(sigma, N, k, mode))


def run_hessian_scan(cfg: dict) -> Outcome:
    seed = _seed(cfg)
    cases = _get(cfg, "cases", list)
    samples = _get(cfg, "samples", _int, default=1000, check=lambda v: v >= 1)
    fd_tol = _get(cfg, "fd_tolerance", float, default=1e-6)
    rng = np.random.default_rng(seed)
    out, ok, rows = [], True, []
    for i, case in enumerate(cases):
        try:
            N, k = (int(c) for c in case)
        except (TypeError, ValueError):
            raise ConfigError(f"cases[{i}]", f"expected [N, k], got {case!r}") from None
        if not 1 <= k < N:
            raise ConfigError(f"cases[{i}]", "needs 1 <= k < N")
        r = kn.hessian_scan(N, k, samples, rng)
        good = (r["sigma2_min_rank"] == N - k and r["sigma2_max_rank"] == N - k
                and r["sigma1_min_rank"] >= N - k - 1 and r["sigma1_full_min_rank"] >= N - 1
                and r["sigma2_full_min_rank"] == N and r["max_fd_error"] <= fd_tol)
        r["pass"] = good
        ok &= good
        out.append(r)
        rows.append((N, k, r["sigma2_min_rank"], r["sigma1_min_rank"], r["max_fd_error"]))
    fd = max(r["max_fd_error"] for r in out)
    return Outcome("pass" if ok else "fail", {"cases": out},
                   f"{len(out)} cases, max fd error {fd:.2e}", key="max_fd_error", value=fd,
                   tolerance=fd_tol,
                   csv_columns=("N", "k", "sigma2_min_rank", "sigma1_min_rank", "max_fd_error"),
                   csv_rows=rows)


def _nonlinearity(cfg: dict, p: Fraction) -> sv.Nonlinearity:
    lam = _get(cfg, "lambda", float, default=1.0)
    form = _get(cfg, "form", str, default="power_preserving",
                check=lambda f: f in ("power_preserving", "power_modulus"),
                why="must be 'power_preserving' or 'power_modulus'")
    return sv.Nonlinearity(float(p), lam, form)


def _default_triples(eq: str, N: int, sel: ex.SelectionResult) -> list[ex.ExponentTriple]:
    if eq == "nls":
        base = [ex.ExponentTriple.parse(["inf", 2, 2])]
        extra = ex.ExponentTriple.parse([4, 4, "8/3"]) if N == 3 else None
    else:
        base = [ex.ExponentTriple.parse(["inf", 4, 4])] if N == 2 else []
        extra = None
    out = base + ([extra] if extra else []) + [sel.triple]
    return list(dict.fromkeys(out))


def build_problem(cfg: dict, rng: np.random.Generator) -> tuple[sv.Problem, dict]:
    """Problem plus data diagnostics from a solver config."""
    eq = _equation(cfg)
    N = _get(cfg, "N", _int, check=lambda n: n >= 2, why="must be >= 2")
    k = 2 if eq == "nls" else 1
    if "k" in cfg and _get(cfg, "k", _int) != k:
        raise ConfigError("k", f"{eq} runs use k = {k}")
    s = _get(cfg, "s", _rational)
    p = _get(cfg, "p", _rational)
    nl = _nonlinearity(cfg, p)
    sigma = 2 if eq == "nls" else 1
    try:
        params = ex.EquationParams(N, k, sigma, s, p)
    except ex.ExponentError as err:
        raise ConfigError("p", str(err)) from None
    if eq == "nlw" and not Fraction(1, 2) < s <= 1:
        raise ConfigError("s", "wave runs need 1/2 < s <= 1")
    if eq == "nls" and not 0 < s <= 1:
        raise ConfigError("s", "Schrodinger runs need 0 < s <= 1")
    try:
        sel = _selection(eq, N, s, p)
    except ex.ExponentError as err:
        raise ConfigError("p", f"outside the admissible range: {err}") from None
    grid = _grid(cfg, N, k)
    if "triples" in cfg:
        triples = []
        for i, t in enumerate(_get(cfg, "triples", list)):
            if t == "selected":
                triples.append(sel.triple)
                continue
            try:
                triples.append(_triple(t))
            except (ValueError, ex.ExponentError):
                raise ConfigError(f"triples[{i}]", f"cannot parse {t!r}") from None
    else:
        triples = _default_triples(eq, N, sel)
    data_cfg = cfg.get("data", {})
    kind = data_cfg.get("kind", "random")
    if kind == "constant":
        c = complex(data_cfg.get("value", 0.5))
        f = Field(grid, np.full(grid.shape, c))
        data = sv.CauchyDataS(f) if eq == "nls" else sv.CauchyDataW(f, Field(grid, np.zeros(grid.shape)))
    elif kind == "random":
        k_max = float(data_cfg.get("k_max", 2.0))
        width = data_cfg.get("width")
        f = random_band_limited(grid, rng, k_max, width, mean_zero=(eq == "nlw"))
        if eq == "nls":
            data = sv.CauchyDataS(f)
        else:
            g = random_band_limited(grid, rng, k_max, width, mean_zero=True)
            data = sv.CauchyDataW(f, g)
    else:
        raise ConfigError("data.kind", f"unknown data kind {kind!r}")
    prob = sv.Problem(eq, data, nl, params, triples)
    if kind == "random" and "norm" in data_cfg:
        scale = float(data_cfg["norm"]) / prob.data_norm()
        if eq == "nls":
            data = sv.CauchyDataS(data.f * scale)
        else:
            data = sv.CauchyDataW(data.f * scale, data.g * scale)
        prob = prob.with_data(data)
    diag = {"data_norm": prob.data_norm(), "triples": [str(t) for t in triples],
            "selection": sel.to_dict(), "grid": grid.to_dict(), "data_kind": kind}
    return prob, diag


def run_solve(cfg: dict) -> Outcome:
    rng = np.random.default_rng(_seed(cfg))
    prob, diag = build_problem(cfg, rng)
    T = _get(cfg, "T", float, check=lambda v: v > 0, why="must be positive")
    max_iter = _get(cfg, "max_iter", _int, default=50, check=lambda v: v >= 1)
    tol = _get(cfg, "tol", float, default=1e-10, check=lambda v: v > 0)
    samples = _get(cfg, "time_samples", _int, default=33, check=lambda v: v >= 2)
    u, rep = sv.picard_solve(prob, T, max_iter, tol, samples)
    res = {"report": rep.to_dict(), **diag}
    fixed = prob.distance(prob.phi(u), u)
    res["fixed_point_residual"] = fixed
    if prob.equation == "nls" and prob.nl.form == "power_preserving":
        mass = np.sqrt(np.sum(np.abs(u.states) ** 2, axis=tuple(range(1, u.states.ndim)))
                       * prob.grid.cell_volume)
        res["mass_drift"] = float(np.max(np.abs(mass / mass[0] - 1)))
    ok = rep.converged
    if diag["data_kind"] == "constant" and prob.equation == "nls":
        c = complex(prob.data.f.samples.flat[0])
        rate = prob.nl.lam * abs(c) ** (prob.nl.p - 1)
        exact = c * np.exp(-1j * rate * u.times)
        err = float(np.max(np.abs(u.states - exact.reshape((-1,) + (1,) * prob.grid.ndim))))
        res["exact_error"] = err
        ok &= err <= 10 * tol
    status = "pass" if ok else ("fail" if rep.diverged else "inconclusive")
    snaps = {}
    if cfg.get("snapshot", False):
        snaps = {"u_final": Field(prob.grid, u.states[-1])}
    return Outcome(status, res,
                   f"{len(rep.iterates_gap)} iterations, last gap "
                   f"{rep.iterates_gap[-1] if rep.iterates_gap else 0:.3e}",
                   key="last_gap", value=rep.iterates_gap[-1] if rep.iterates_gap else 0.0,
                   tolerance=tol, csv_columns=("iteration", "gap"),
                   csv_rows=list(enumerate(rep.iterates_gap, 1)), snapshots=snaps)


def run_contraction(cfg: dict) -> Outcome:
    seed = _seed(cfg)
    rng = np.random.default_rng(seed)
    prob, diag = build_problem(cfg, rng)
    T0 = _get(cfg, "T0", float, check=lambda v: v > 0, why="must be positive")
    n_pairs = _get(cfg, "n_pairs", _int, default=12, check=lambda v: v >= 1)
    samples = _get(cfg, "time_samples", _int, default=33, check=lambda v: v >= 2)
    bisect = _get(cfg, "bisect_steps", _int, default=3, check=lambda v: v >= 0)
    max_iter = _get(cfg, "max_iter", _int, default=60)
    tol = _get(cfg, "tol", float, default=1e-10)
    k_max = cfg.get("data", {}).get("k_max")
    found = sv.search_contraction_time(prob, T0, n_pairs, samples, seed, 20, bisect, max_iter,
                                       tol, k_max)
    res = {**diag, "history": found["history"], "found": found["found"]}
    if not found["found"]:
        return Outcome("fail", res, "no contracting T found", key="T", value=None)
    rep, prep = found["report"], found["picard"]
    res.update({"T": found["T"], "report": rep.to_dict(), "picard_gaps": prep.iterates_gap})
    return Outcome("pass", res,
                   f"T={found['T']:.4g} max ratio {rep.max_ratio:.3g} "
                   f"budget {rep.budget_lhs:.4g} <= {rep.budget_rhs:.4g}",
                   key="T", value=found["T"], tolerance="ratio<=1/2",
                   csv_columns=("T", "pass", "max_ratio", "budget_ok", "picard_converged"),
                   csv_rows=[tuple(h.values()) for h in found["history"]])


def run_nonlinear_check(cfg: dict) -> Outcome:
    seed = _seed(cfg)
    rng = np.random.default_rng(seed)
    prob, diag = build_problem(cfg, rng)
    T = _get(cfg, "T", float, check=lambda v: v > 0, why="must be positive")
    samples = _get(cfg, "time_samples", _int, default=33,
                   check=lambda v: v >= 3 and v % 2 == 1, why="must be odd and >= 3")
    n_traj = _get(cfg, "n_trajectories", _int, default=20, check=lambda v: v >= 1)
    k_max = float(cfg.get("data", {}).get("k_max", 2.0))
    out = nonlinear_ratio_family(prob, T, samples, n_traj, rng, k_max)
    ok = out["scalar_deviation"] <= 1e-8 and out["halving_factor"] <= 4 and \
        np.all(np.isfinite(out["ratios"]))
    return Outcome("pass" if ok else "fail", {**diag, **out},
                   f"C = {out['constant']:.4g}, scalar dev {out['scalar_deviation']:.1e}, "
                   f"T/2 factor {out['halving_factor']:.3g}",
                   key="constant", value=out["constant"], tolerance=4,
                   csv_columns=("trajectory", "ratio_T", "ratio_T_half"),
                   csv_rows=list(zip(range(n_traj), out["ratios"], out["ratios_half"])))


def nonlinear_ratio_family(prob: sv.Problem, T: float, samples: int, n_traj: int,
                           rng: np.random.Generator, k_max: float) -> dict:
    """Nonlinear-estimate ratios over random free trajectories.

    Reports the recorded constant (the family maximum), the worst relative
    change under ``u -> 2.5 u`` and the worst factor between ``T`` and ``T/2``.
    """
    sel = prob.selection()
    times = np.linspace(0.0, T, samples)
    ratios, half, scal = [], [], 0.0
    for _ in range(n_traj):
        f = random_band_limited(prob.grid, rng, k_max, mean_zero=prob.equation == "nlw")
        data = sv.CauchyDataS(f) if prob.equation == "nls" else sv.CauchyDataW(f, f * 0.0)
        u = sv.free_trajectory(data, times)
        r = sv.nonlinear_estimate_check(u, prob.nl, prob.params, sel, T, prob.equation)
        r2 = sv.nonlinear_estimate_check(u * 2.5, prob.nl, prob.params, sel, T, prob.equation)
        rh = sv.nonlinear_estimate_check(u, prob.nl, prob.params, sel, times[samples // 2],
                                         prob.equation)
        ratios.append(r)
        half.append(rh)
        scal = max(scal, abs(r2 / r - 1) if r > 0 else abs(r2))
    ratios, half = np.asarray(ratios), np.asarray(half)
    factor = float(np.max(np.maximum(ratios / half, half / ratios)))
    return {"ratios": ratios.tolist(), "ratios_half": half.tolist(),
            "constant": float(max(ratios.max(), half.max())),
            "scalar_deviation": float(scal), "halving_factor": factor,
            "beta": str(sel.beta), "triple": str(sel.triple)}


def run_rough_data(cfg: dict) -> Outcome:
    seed = _seed(cfg)
    N = _get(cfg, "N", _int, check=lambda n: n >= 2, why="must be >= 2")
    k = _get(cfg, "k", _int, check=lambda v: 1 <= v < N, why="must satisfy 1 <= k < N")
    s = _get(cfg, "s", float, check=lambda v: v > 0, why="must be positive")
    eps = _get(cfg, "rough_x_exponent", float, check=lambda v: v > 0, why="must be positive")
    smooth = cfg.get("smooth_y", {"kind": "gaussian", "width": 1.0})
    grid = _grid(cfg, N, k)
    tol = _get(cfg, "stability_tolerance", float, default=0.02)
    growth = _get(cfg, "min_growth", float, default=1.2)
    f, diag = sv.rough_data_builder({"rough_x_exponent": eps, "smooth_y": smooth}, grid, s, seed)
    ok = (diag["l2x_hsy_change"] <= tol and diag["phi1_l2_change"] < 0.01
          and diag["hs_growth"] >= growth)
    return Outcome("pass" if ok else "fail", diag,
                   f"L2_x H^s_y change {diag['l2x_hsy_change']:.3%}, H^s growth "
                   f"{diag['hs_growth']:.3f}", key="hs_growth", value=diag["hs_growth"],
                   tolerance=growth,
                   csv_columns=("grid", "phi1_l2", "phi1_hs", "f_l2x_hsy", "f_hs"),
                   csv_rows=[(lab, diag[lab]["phi1_l2"], diag[lab]["phi1_hs"],
                              diag[lab]["f_l2x_hsy"], diag[lab]["f_hs"])
                             for lab in ("grid", "doubled")])


def run_scaling_check(cfg: dict) -> Outcome:
    seed = _seed(cfg)
    N = _get(cfg, "N", _int, check=lambda n: n >= 1, why="must be >= 1")
    grid = _grid(cfg, N, _get(cfg, "k", _int, default=1))
    cases = _get(cfg, "cases", list)
    deltas = [_get({"d": d}, "d", float) for d in _get(cfg, "deltas", list)]
    k_max = _get(cfg, "k_max", float, default=2.0)
    tol = _get(cfg, "tolerance", float, default=0.01)
    f = random_band_limited(grid, np.random.default_rng(seed), k_max, width=2.0, mean_zero=True)
    rows, worst = [], 0.0
    for i, case in enumerate(cases):
        try:
            p, s = (_rational(v) for v in case)
            a = float(2 / (p - 1))
            e = float(ex.scaling_exponent(N, p, s))
        except (TypeError, ValueError, ex.ExponentError):
            raise ConfigError(f"cases[{i}]", f"expected [p, s], got {case!r}") from None
        base = nm.sobolev_norm(f, float(s), "homogeneous")
        for d in deltas:
            try:
                fd = rescale_field(f, d, a)
            except ValueError as err:
                raise ConfigError("deltas", str(err)) from None
            ratio = nm.sobolev_norm(fd, float(s), "homogeneous") / base
            pred = d**e
            dev = abs(ratio / pred - 1)
            worst = max(worst, dev)
            rows.append((N, str(p), str(s), d, ratio, pred, dev))
    ok = worst <= tol
    return Outcome("pass" if ok else "fail", {"rows": rows, "max_deviation": worst},
                   f"max relative deviation {worst:.2e} (tol {tol})", key="max_deviation",
                   value=worst, tolerance=tol,
                   csv_columns=("N", "p", "s", "delta", "ratio", "predicted", "deviation"),
                   csv_rows=rows)


def run_lp_check(cfg: dict) -> Outcome:
    seed = _seed(cfg)
    N = _get(cfg, "N", _int, check=lambda n: n >= 1, why="must be >= 1")
    grid = _grid(cfg, N, _get(cfg, "k", _int, default=1))
    j_min = _get(cfg, "j_min", _int)
    j_max = _get(cfg, "j_max", _int, check=lambda v: v >= j_min, why="must be >= j_min")
    k_max = _get(cfg, "k_max", float, default=4.0)
    tol = _get(cfg, "tolerance", float, default=1e-10)
    cutoff = build_cutoff(_get(cfg, "profile", str, default="mollifier"),
                          _get(cfg, "smoothness", float, default=1.0))
    r = np.linspace(2.0**j_min, 2.0**j_max, 20001)
    pou = float(np.max(np.abs(cutoff.partial_sum(r, j_min, j_max) - 1)))
    f = random_band_limited(grid, np.random.default_rng(seed), k_max, mean_zero=True)
    rho = frequency_radius(grid)
    nz = rho[rho > 0]
    if nz.min() < 2.0**j_min or k_max > 2.0**j_max:
        raise ConfigError("j_min", "dyadic range must cover the spectrum of the test field")
    acc = np.zeros(grid.shape, dtype=complex)
    for j in range(j_min, j_max + 1):
        acc += lp_project(f, j, cutoff).samples
    rec = float(np.max(np.abs(acc - f.samples)) / np.max(np.abs(f.samples)))
    ok = pou <= tol and rec <= tol
    return Outcome("pass" if ok else "fail",
                   {"partition_error": pou, "reconstruction_error": rec, "bands": [j_min, j_max]},
                   f"partition error {pou:.1e}, reconstruction error {rec:.1e} (tol {tol})",
                   key="reconstruction_error", value=rec, tolerance=tol)


SUBCOMMANDS: dict[str, tuple[Callable[[dict], Outcome], str]] = {
    "exponents": (run_exponents, "exponent selection for the nonlinear estimates"),
    "strichartz-scan": (run_strichartz_scan, "frequency-localized Strichartz estimate"),
    "kernel-decay": (run_kernel_decay, "fixed-time kernel decay"),
    "hessian-scan": (run_hessian_scan, "Hessian rank of the localized phase"),
    "nonlinear-check": (run_nonlinear_check, "nonlinear estimate with the T^beta gain"),
    "solve": (run_solve, "Duhamel fixed point (local existence)"),
    "contraction": (run_contraction, "contraction of the solution map on X(T, A)"),
    "rough-data": (run_rough_data, "partially regular data outside H^s"),
    "scaling-check": (run_scaling_check, "scaling identity for the rescaled data norm"),
    "lp-check": (run_lp_check, "dyadic partition of unity and Littlewood-Paley reconstruction"),
}


def validate(subcommand: str, cfg: dict) -> None:
    if subcommand not in SUBCOMMANDS:
        raise ConfigError("subcommand", f"unknown subcommand {subcommand!r}")
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a table")
    _seed(cfg)


def _run_id(subcommand: str, cfg: dict, out_dir: Path) -> str:
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:10]
    base = f"{subcommand}-{digest}"
    n = 0
    while (out_dir / f"{base}-{n:03d}.json").exists():
        n += 1
    return f"{base}-{n:03d}"


def execute(subcommand: str, cfg: dict, out_dir: str | os.PathLike | None = None,
            seed: int | None = None) -> RunRecord:
    """Validate, run and persist one experiment."""
    cfg = dict(cfg)
    if seed is not None:
        cfg["seed"] = seed
    validate(subcommand, cfg)
    out = Path(out_dir or os.environ.get(OUT_ENV, "results"))
    out.mkdir(parents=True, exist_ok=True)
    fn, anchor = SUBCOMMANDS[subcommand]
    t0 = time.perf_counter()
    outcome = fn(cfg)
    elapsed = time.perf_counter() - t0
    if outcome.status not in STATUSES:
        raise RuntimeError(f"bad status {outcome.status!r}")
    rid = _run_id(subcommand, cfg, out)
    files = {}
    if outcome.csv_rows:
        csv_path = out / f"{rid}.csv"
        write_csv(csv_path, outcome.csv_columns, outcome.csv_rows)
        files["csv"] = csv_path.name
    for name, fld in outcome.snapshots.items():
        p = out / f"{rid}-{name}.field"
        write_field(p, fld)
        files[name] = p.name
    env = {"python": platform.python_version(), "numpy": np.__version__,
           "precision": "complex128", "elapsed_s": elapsed, "files": files}
    rec = RunRecord(
        id=rid,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        subcommand=subcommand,
        config=cfg,
        paper_anchor=anchor,
        status=outcome.status,
        results=outcome.results,
        environment=env,
        summary={"text": outcome.summary, "key": outcome.key, "value": outcome.value,
                 "tolerance": outcome.tolerance},
    )
    _atomic_text(out / f"{rid}.json", rec.to_json())
    return rec


def report(results_dir: str | os.PathLike) -> list[dict]:
    """Aggregate every run record in ``results_dir`` into ``summary.csv``.

    Records are read, never modified; the summary is rewritten in full.
    """
    d = Path(results_dir)
    recs = []
    for p in sorted(d.glob("*.json")):
        try:
            data = json.loads(p.read_text())
        except ValueError:
            continue
        if isinstance(data, dict) and {"id", "status", "paper_anchor"} <= data.keys():
            recs.append(data)
    if not recs:
        raise FileNotFoundError(f"no run records in {d}")
    rows = []
    for r in recs:
        summ = r.get("summary", {})
        rows.append({"id": r["id"], "subcommand": r.get("subcommand", ""),
                     "paper_anchor": r["paper_anchor"], "key": summ.get("key", ""),
                     "value": summ.get("value", ""), "tolerance": summ.get("tolerance", ""),
                     "status": r["status"]})
    write_csv(d / "summary.csv", REPORT_COLUMNS, [tuple(r[c] for c in REPORT_COLUMNS) for r in rows])
    return rows


def format_table(rows: list[dict]) -> str:
    widths = {c: max(len(c), *(len(_fmt(r[c])) for r in rows)) for c in REPORT_COLUMNS}
    lines = ["  ".join(c.ljust(widths[c]) for c in REPORT_COLUMNS)]
    for r in rows:
        lines.append("  ".join(_fmt(r[c]).ljust(widths[c]) for c in REPORT_COLUMNS))
    return "\n".join(lines)
