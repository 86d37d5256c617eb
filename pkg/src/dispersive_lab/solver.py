"""Duhamel maps, Picard iteration and empirical contraction budgets.

Two equations are supported on the torus surrogate:

* ``nls``: ``i u_t + Laplacian u = F_p(u)``, data ``f`` in ``L^2_x H^s_y``.
* ``nlw``: ``u_tt - Laplacian u = F_p(u)``, data ``(f, g)`` with
  ``<d_y>^{s'} f`` in ``H^{1/2}`` and ``<d_y>^{s'} g`` in ``H^{-1/2}``.

For the wave equation the user supplies ``s`` in ``(1/2, 1]`` and all
internal norms use ``s' = s - 1/2``.

The time integral in the Duhamel term is a cumulative trapezoid on the
trajectory's samples, carried out in Fourier space after removing the free
phase so that the integrand is the interaction-picture nonlinearity.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .exponents import (
    EquationParams,
    ExponentTriple,
    SelectionResult,
    as_exponent,
    dual,
    recip,
    select_schrodinger_exponents,
    select_wave_exponents,
    to_float,
)
from .norms import (
    NormSpec,
    Trajectory,
    contraction_distance,
    mixed_norms_batch,
    spacetime_norm,
    spacetime_norms,
)
from .spectral import Field, TorusGrid, derivative_symbol, frequency_radius

__all__ = [
    "Nonlinearity",
    "CauchyDataS",
    "CauchyDataW",
    "ContractionReport",
    "Problem",
    "evaluate_nonlinearity",
    "lipschitz_check",
    "chain_rule_check",
    "free_trajectory",
    "duhamel_map_S",
    "duhamel_map_W",
    "picard_solve",
    "nonlinear_estimate_check",
    "measure_constants",
    "contraction_experiment",
    "search_contraction_time",
    "rough_data_builder",
]

_SKIP = 1e-14


@dataclass(frozen=True)
class Nonlinearity:
    """``lam |u|^(p-1) u`` (power_preserving) or ``lam |u|^p`` (power_modulus)."""

    p: float
    lam: float = 1.0
    form: str = "power_preserving"

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.form not in ("power_preserving", "power_modulus"):
            raise ValueError(f"unknown form {self.form!r}")

    def __call__(self, u: np.ndarray) -> np.ndarray:
        a = np.abs(u)
        if self.form == "power_preserving":
            return self.lam * a ** (self.p - 1) * u
        return (self.lam * a**self.p).astype(complex)

    def derivative_magnitude(self, u: np.ndarray) -> np.ndarray:
        """``|d_u F| + |d_ubar F|`` (Wirtinger derivatives)."""
        a = np.abs(u)
        p, lam = self.p, abs(self.lam)
        # both forms: |d_u F| = lam (p+-1)/2 |u|^(p-1), |d_ubar F| = lam (p-+1)/2 |u|^(p-1)
        # or p/2 each for the modulus form; the sum is lam p |u|^(p-1) either way
        return lam * p * a ** (p - 1)


@dataclass
class CauchyDataS:
    f: Field


@dataclass
class CauchyDataW:
    """Wave data; ``g`` is projected to mean zero on construction."""

    f: Field
    g: Field
    projected_mean: complex = 0j

    def __post_init__(self):
        if self.f.grid != self.g.grid:
            raise ValueError("f and g must share a grid")
        mean = complex(self.g.samples.mean())
        if mean != 0:
            self.g = Field(self.g.grid, self.g.samples - mean)
        self.projected_mean = mean


@dataclass
class ContractionReport:
    T: float
    A: float
    ratios: list = field(default_factory=list)
    budget_lhs: float = float("nan")
    budget_rhs: float = float("nan")
    converged: bool = False
    iterates_gap: list = field(default_factory=list)
    diverged: bool = False
    constants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if any(r < 0 for r in self.ratios):
            raise ValueError("contraction ratios must be nonnegative")

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def budget_ok(self) -> bool:
        return bool(self.budget_lhs <= self.budget_rhs)

    def gaps_geometric(self, factor: float = 0.9, last: int = 3) -> bool:
        """Consecutive gap ratios at most ``factor`` over the final ``last`` steps."""
        g = [x for x in self.iterates_gap]
        if len(g) < 2:
            return len(g) == 1
        ratios = [b / a for a, b in zip(g[:-1], g[1:]) if a > 0]
        return all(r <= factor for r in ratios[-last:])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_ratio"] = self.max_ratio
        d["budget_ok"] = self.budget_ok
        return d


def evaluate_nonlinearity(nl: Nonlinearity, u: Field) -> Field:
    return Field(u.grid, nl(u.samples))


def lipschitz_check(nl: Nonlinearity, u: Field, v: Field) -> float:
    """``max |F(u)-F(v)| / ((|u|^(p-1)+|v|^(p-1)) |u-v|)`` over the samples."""
    a, b = u.samples, v.samples
    num = np.abs(nl(a) - nl(b))
    den = (np.abs(a) ** (nl.p - 1) + np.abs(b) ** (nl.p - 1)) * np.abs(a - b)
    ok = den >= _SKIP
    if not np.any(ok):
        return 0.0
    return float(np.max(num[ok] / den[ok]))


def chain_rule_check(nl: Nonlinearity, u: Field, s: float, a, b, c) -> float:
    """``|| |grad|^s F(u) ||_c / (||u||_{a(p-1)}^(p-1) || |grad|^s u ||_b)``."""
    a, b, c = as_exponent(a), as_exponent(b), as_exponent(c)
    if recip(c) != recip(a) + recip(b):
        raise ValueError(f"1/c = 1/a + 1/b violated for a={a}, b={b}, c={c}")
    for name, e in (("a", a), ("b", b), ("c", c)):
        if not 1 < to_float(e) < math.inf:
            raise ValueError(f"exponent {name} = {e} must lie in (1, inf)")
    if not 0 < s <= 1:
        raise ValueError(f"s must lie in (0, 1], got {s}")
    sym = derivative_symbol(u.grid, s, "all", "homogeneous")

    def ds(x):
        return sfft.ifftn(sfft.fftn(x, workers=-1) * sym, workers=-1)

    fa = to_float(a) * (nl.p - 1)
    num = float(mixed_norms_batch(np.abs(ds(nl(u.samples))), u.grid, c, c))
    den = (float(mixed_norms_batch(np.abs(u.samples), u.grid, fa, fa)) ** (nl.p - 1)
           * float(mixed_norms_batch(np.abs(ds(u.samples)), u.grid, b, b)))
    if den == 0:
        return 0.0
    return num / den


# ------------------------------------------------------------- Duhamel


def _fft(states: np.ndarray) -> np.ndarray:
    return sfft.fftn(states, axes=tuple(range(1, states.ndim)), workers=-1)


def _ifft(states: np.ndarray) -> np.ndarray:
    return sfft.ifftn(states, axes=tuple(range(1, states.ndim)), workers=-1)


def _cumtrapz(g: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid along axis 0, starting at 0."""
    out = np.zeros_like(g)
    dt = np.diff(times).reshape((-1,) + (1,) * (g.ndim - 1))
    out[1:] = np.cumsum(0.5 * dt * (g[1:] + g[:-1]), axis=0)
    return out


def _tshape(times: np.ndarray, ndim: int) -> np.ndarray:
    return times.reshape((-1,) + (1,) * ndim)


def _check_T(u: Trajectory, T: float) -> None:
    if not math.isclose(u.times[-1], T, rel_tol=1e-10, abs_tol=1e-14) or u.times[0] != 0:
        raise ValueError(f"trajectory must be sampled on [0, {T}]")


def free_trajectory(data, times: np.ndarray) -> Trajectory:
    """Free evolution of NLS or NLW data at ``times``."""
    times = np.asarray(times, float)
    if isinstance(data, CauchyDataS):
        grid = data.f.grid
        rho2 = frequency_radius(grid) ** 2
        spec = sfft.fftn(data.f.samples, workers=-1)
        states = _ifft(np.exp(-1j * _tshape(times, grid.ndim) * rho2) * spec)
    else:
        grid = data.f.grid
        rho = frequency_radius(grid)
        fh = sfft.fftn(data.f.samples, workers=-1)
        gh = sfft.fftn(data.g.samples, workers=-1)
        tt = _tshape(times, grid.ndim)
        states = _ifft(np.cos(tt * rho) * fh + _sinc_mult(tt, rho) * gh)
    return Trajectory.from_states(grid, times, states)


def _sinc_mult(t: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``sin(t rho) / rho`` with the value ``t`` at ``rho = 0``."""
    safe = np.where(rho > 0, rho, 1.0)
    return np.where(rho > 0, np.sin(t * rho) / safe, t * np.ones_like(rho))


def _duhamel_S(u: Trajectory, nl: Nonlinearity) -> np.ndarray:
    """``-i int_0^t e^{i(t-tau) Laplacian} F(u(tau)) dtau`` at every sample."""
    grid = u.grid
    rho2 = frequency_radius(grid) ** 2
    tt = _tshape(u.times, grid.ndim)
    Fh = _fft(nl(u.states))
    integ = _cumtrapz(np.exp(1j * tt * rho2) * Fh, u.times)
    return _ifft(-1j * np.exp(-1j * tt * rho2) * integ)


def _duhamel_W(u: Trajectory, nl: Nonlinearity) -> np.ndarray:
    """``int_0^t sin((t-tau)|grad|)/|grad| F(u(tau)) dtau`` at every sample.

    Uses ``sin((t-tau) r) = sin(t r) cos(tau r) - cos(t r) sin(tau r)``; the
    zero mode is integrated directly as ``int (t - tau) F dtau``.
    """
    grid = u.grid
    rho = frequency_radius(grid)
    tt = _tshape(u.times, grid.ndim)
    Fh = _fft(nl(u.states))
    safe = np.where(rho > 0, rho, 1.0)
    ic = _cumtrapz(np.cos(tt * rho) * Fh, u.times)
    is_ = _cumtrapz(np.sin(tt * rho) * Fh, u.times)
    out = (np.sin(tt * rho) * ic - np.cos(tt * rho) * is_) / safe
    zero = (0,) * grid.ndim
    F0 = Fh[(slice(None),) + zero]
    i0 = _cumtrapz(F0, u.times)
    i1 = _cumtrapz(u.times * F0, u.times)
    out[(slice(None),) + zero] = u.times * i0 - i1
    return _ifft(out)


def duhamel_map_S(f: Field, u: Trajectory, nl: Nonlinearity, T: float) -> Trajectory:
    """``Phi(u)(t) = e^{it Laplacian} f - i int_0^t e^{i(t-tau) Laplacian} F(u) dtau``."""
    _check_T(u, T)
    free = free_trajectory(CauchyDataS(f), u.times)
    if nl.lam == 0:
        return free
    return free.with_states(free.states + _duhamel_S(u, nl))


def duhamel_map_W(f: Field, g: Field, u: Trajectory, nl: Nonlinearity, T: float) -> Trajectory:
    """``cos(t|grad|) f + sin(t|grad|)/|grad| g + int_0^t sin((t-tau)|grad|)/|grad| F(u)``."""
    _check_T(u, T)
    free = free_trajectory(CauchyDataW(f, g), u.times)
    if nl.lam == 0:
        return free
    return free.with_states(free.states + _duhamel_W(u, nl))


# ------------------------------------------------------- problem setup


@dataclass
class Problem:
    """Equation, data and the finite triple set standing in for the full class."""

    equation: str
    data: object
    nl: Nonlinearity
    params: EquationParams
    triples: tuple[ExponentTriple, ...]

    def __post_init__(self):
        if self.equation not in ("nls", "nlw"):
            raise ValueError(f"equation must be 'nls' or 'nlw', got {self.equation!r}")
        want = CauchyDataS if self.equation == "nls" else CauchyDataW
        if not isinstance(self.data, want):
            raise TypeError(f"{self.equation} needs {want.__name__}")
        if not self.triples:
            raise ValueError("triple set is empty")
        self.triples = tuple(self.triples)

    @property
    def grid(self) -> TorusGrid:
        return self.data.f.grid

    @property
    def s_internal(self) -> float:
        s = float(self.params.s)
        return s if self.equation == "nls" else s - 0.5

    def selection(self, pick=None) -> SelectionResult:
        if self.equation == "nls":
            return select_schrodinger_exponents(self.params.N, self.params.s, self.params.p, pick)
        s = as_exponent(self.params.s) - Fraction(1, 2)
        return select_wave_exponents(self.params.N, s, self.params.p, pick)

    def x_spec(self, t: ExponentTriple) -> NormSpec:
        """Norm of the solution space: ``W^{s,r~}_y`` (NLS) or ``<d_y>^{s'}`` (NLW)."""
        return NormSpec.from_triple(t, self.s_internal, "y_only", "inhomogeneous")

    def x_norm(self, u: Trajectory) -> float:
        return max(spacetime_norms(u, self.triples, self.s_internal, "y_only"))

    def distance(self, u: Trajectory, v: Trajectory) -> float:
        return contraction_distance(u, v, self.triples)

    def data_norm(self) -> float:
        grid = self.grid
        sy = derivative_symbol(grid, self.s_internal, "y_only", "inhomogeneous")
        if self.equation == "nls":
            fh = sfft.fftn(self.data.f.samples, norm="ortho", workers=-1)
            return float(np.sqrt(np.sum(np.abs(sy * fh) ** 2) * grid.cell_volume))
        out = 0.0
        for fld, power in ((self.data.f, 0.5), (self.data.g, -0.5)):
            sym = sy * derivative_symbol(grid, power, "all", "homogeneous")
            fh = sfft.fftn(fld.samples, norm="ortho", workers=-1)
            out += float(np.sqrt(np.sum(np.abs(sym * fh) ** 2) * grid.cell_volume))
        return out

    def free(self, times: np.ndarray) -> Trajectory:
        return free_trajectory(self.data, times)

    def nonlinear_part(self, u: Trajectory) -> np.ndarray:
        if self.nl.lam == 0:
            return np.zeros_like(u.states)
        return _duhamel_S(u, self.nl) if self.equation == "nls" else _duhamel_W(u, self.nl)

    def phi(self, u: Trajectory) -> Trajectory:
        if self.equation == "nls":
            return duhamel_map_S(self.data.f, u, self.nl, u.times[-1])
        return duhamel_map_W(self.data.f, self.data.g, u, self.nl, u.times[-1])

    def with_data(self, data) -> "Problem":
        return Problem(self.equation, data, self.nl, self.params, self.triples)


def _times(T: float, samples: int) -> np.ndarray:
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if samples < 2:
        raise ValueError("need at least two time samples")
    return np.linspace(0.0, T, samples)


def picard_solve(problem: Problem, T: float, max_iter: int = 50, tol: float = 1e-10,
                 samples: int = 33) -> tuple[Trajectory, ContractionReport]:
    """Iterate ``u^{n+1} = Phi(u^n)`` from the free evolution.

    Stops when ``d(u^{n+1}, u^n) < tol``; flags divergence after three
    consecutive growing gaps.
    """
    times = _times(T, samples)
    u = problem.free(times)
    gaps: list[float] = []
    grow = 0
    converged = diverged = False
    for _ in range(max_iter):
        nxt = problem.phi(u)
        gap = problem.distance(nxt, u)
        gaps.append(gap)
        u = nxt
        if gap < tol:
            converged = True
            break
        if len(gaps) > 1 and gap > gaps[-2]:
            grow += 1
            if grow >= 3:
                diverged = True
                break
        else:
            grow = 0
    ratios = [b / a for a, b in zip(gaps[:-1], gaps[1:]) if a > 0]
    rep = ContractionReport(T=T, A=problem.x_norm(u), ratios=ratios, converged=converged,
                            iterates_gap=gaps, diverged=diverged)
    if diverged:
        rep.notes.append("gaps grew for three consecutive iterations")
    return u, rep


# ------------------------------------------------ nonlinear estimates


def nonlinear_estimate_check(u: Trajectory, nl: Nonlinearity, params: EquationParams,
                             sel: SelectionResult, T: float, equation: str = "nls") -> float:
    """``||<grad_y>^s F(u)||_{L^{q'} L^{r'} L^{r~'}} / (T^beta ||u||^p_{L^q L^r W^{s,r~}})``.

    ``u`` is restricted to ``[0, T]``. For ``equation="nlw"`` the regularity
    is ``s - 1/2``.
    """
    u = u.restrict(T)
    s = float(params.s) if equation == "nls" else float(params.s) - 0.5
    t = sel.triple
    dspec = NormSpec(dual(t.q), dual(t.r), dual(t.r_tilde), s, "y_only", "inhomogeneous")
    Fu = u.with_states(nl(u.states))
    lhs = spacetime_norm(Fu, dspec)
    if lhs == 0:
        return 0.0
    rhs = T ** float(sel.beta) * spacetime_norm(u, NormSpec.from_triple(t, s, "y_only")) ** nl.p
    return lhs / rhs


# ------------------------------------------------------ contraction


def measure_constants(problem: Problem, T: float, samples: int, probes: Sequence[Trajectory],
                      beta: float) -> dict:
    """Free Strichartz constant ``C~`` and nonlinear constant ``C^`` on this grid.

    ``C~ = ||free||_X / ||data||``; ``C^`` is the largest
    ``||Phi(u) - free||_X / (T^beta ||u||_X^p)`` over ``probes``.
    """
    times = _times(T, samples)
    free = problem.free(times)
    dn = problem.data_norm()
    c_tilde = problem.x_norm(free) / dn if dn > 0 else 0.0
    c_hat = 0.0
    for u in probes:
        un = problem.x_norm(u)
        if un == 0 or problem.nl.lam == 0:
            continue
        part = u.with_states(problem.nonlinear_part(u))
        c_hat = max(c_hat, problem.x_norm(part) / (T**beta * un**problem.nl.p))
    return {"C_tilde": c_tilde, "C_hat": c_hat, "data_norm": dn, "beta": beta}


def _random_data_like(problem: Problem, rng: np.random.Generator, k_max: float):
    from .spectral import random_band_limited

    grid = problem.grid
    f = random_band_limited(grid, rng, k_max)
    if problem.equation == "nls":
        return CauchyDataS(f)
    return CauchyDataW(f, random_band_limited(grid, rng, k_max, mean_zero=True))


def _sample_pairs(problem: Problem, times: np.ndarray, A: float, n_pairs: int,
                  rng: np.random.Generator, k_max: float) -> list[tuple[Trajectory, Trajectory]]:
    def in_ball(tr: Trajectory, radius: float) -> Trajectory:
        n = problem.x_norm(tr)
        return tr * (radius / n) if n > 0 else tr

    pairs = []
    for _ in range(max(0, n_pairs - 2)):
        u = in_ball(free_trajectory(_random_data_like(problem, rng, k_max), times),
                    A * rng.uniform(0.2, 1.0))
        v = in_ball(free_trajectory(_random_data_like(problem, rng, k_max), times),
                    A * rng.uniform(0.2, 1.0))
        pairs.append((u, v))
    base = in_ball(free_trajectory(_random_data_like(problem, rng, k_max), times), 0.5 * A)
    for scale in (1.0, 0.01):
        if len(pairs) >= n_pairs:
            break
        pert = free_trajectory(_random_data_like(problem, rng, k_max), times)
        pert = in_ball(pert, 0.5 * A * scale)
        pairs.append((base, base + pert))
    return pairs


def contraction_experiment(problem: Problem, T: float, n_pairs: int = 12, samples: int = 33,
                           seed: int = 0, k_max: float | None = None, pick=None) -> ContractionReport:
    """Sample ``d(Phi u, Phi v) / d(u, v)`` on the ball ``X(T, A)``, ``A = 2 C~ ||data||``.

    The budget ``C~ ||data|| + C^ T^beta A^p <= A`` is evaluated with the
    measured constants; ``converged`` requires every ratio ``<= 1/2`` and
    the budget to hold.
    """
    rng = np.random.default_rng(seed)
    times = _times(T, samples)
    k_max = k_max if k_max is not None else _default_kmax(problem.grid)
    beta = float(problem.selection(pick).beta)
    free = problem.free(times)
    probes_raw = [free] + [free_trajectory(_random_data_like(problem, rng, k_max), times)
                           for _ in range(3)]
    base = measure_constants(problem, T, samples, [], beta)
    A = 2 * base["C_tilde"] * base["data_norm"]
    probes = [p * (A / problem.x_norm(p)) for p in probes_raw if problem.x_norm(p) > 0]
    consts = measure_constants(problem, T, samples, probes, beta)
    ratios = []
    for u, v in _sample_pairs(problem, times, A, n_pairs, rng, k_max):
        d = problem.distance(u, v)
        if d == 0:
            continue
        diff = problem.nonlinear_part(u) - problem.nonlinear_part(v)
        num = problem.distance(u.with_states(diff), u.with_states(np.zeros_like(diff)))
        ratios.append(num / d)
    lhs = consts["C_tilde"] * consts["data_norm"] + consts["C_hat"] * T**beta * A**problem.nl.p
    rep = ContractionReport(T=T, A=A, ratios=ratios, budget_lhs=lhs, budget_rhs=A,
                            constants=consts)
    rep.converged = bool(rep.max_ratio <= 0.5 and rep.budget_ok)
    rep.notes.append(f"triple set of size {len(problem.triples)} stands in for the full class")
    return rep


def _default_kmax(grid: TorusGrid) -> float:
    # a quarter of Nyquist keeps F(u) nearly alias-free; never below the first nonzero shell
    quarter = 0.25 * min(math.pi * n / L for n, L in zip(grid.points, grid.extents))
    return max(quarter, 1.5 * 2 * math.pi / max(grid.extents))


def search_contraction_time(problem: Problem, T0: float, n_pairs: int = 12, samples: int = 33,
                            seed: int = 0, max_halvings: int = 20, bisect_steps: int = 4,
                            max_iter: int = 60, tol: float = 1e-10,
                            k_max: float | None = None) -> dict:
    """Find ``T`` where sampled ratios are ``<= 1/2``, the budget holds and Picard gaps decay.

    Halves ``T0`` until a passing time is found, then bisects between the
    last failing and the first passing time to enlarge it.
    """

    def attempt(T):
        rep = contraction_experiment(problem, T, n_pairs, samples, seed, k_max)
        _, prep = picard_solve(problem, T, max_iter, tol, samples)
        ok = rep.converged and prep.converged and prep.gaps_geometric()
        return ok, rep, prep

    T, fail_T = T0, None
    history = []
    for _ in range(max_halvings + 1):
        ok, rep, prep = attempt(T)
        history.append({"T": T, "pass": ok, "max_ratio": rep.max_ratio,
                        "budget_ok": rep.budget_ok, "picard_converged": prep.converged})
        if ok:
            break
        fail_T, T = T, T / 2
    else:
        return {"found": False, "history": history}
    best = (T, rep, prep)
    if fail_T is not None:
        lo, hi = T, fail_T
        for _ in range(bisect_steps):
            mid = 0.5 * (lo + hi)
            ok, r2, p2 = attempt(mid)
            history.append({"T": mid, "pass": ok, "max_ratio": r2.max_ratio,
                            "budget_ok": r2.budget_ok, "picard_converged": p2.converged})
            if ok:
                lo, best = mid, (mid, r2, p2)
            else:
                hi = mid
    T, rep, prep = best
    return {"found": True, "T": T, "report": rep, "picard": prep, "history": history}


# -------------------------------------------------------- rough data


def _mode_phase(seed: int, index: tuple[int, ...]) -> float:
    rng = np.random.default_rng([seed] + [i + (1 << 20) for i in index])
    return float(rng.uniform(0, 2 * math.pi))


def rough_data_builder(profile: dict, grid: TorusGrid, s: float, seed: int = 0) -> tuple[Field, dict]:
    """``f = phi1(x) phi2(y)`` with ``phi1`` in ``L^2`` but not ``H^s`` in the limit.

    ``profile["rough_x_exponent"]`` is ``eps`` in the coefficient law
    ``|c_m| = <m>^{-(N-k)/2 - eps}``; with ``eps <= s`` the ``H^s`` norm of
    ``phi1`` diverges as the grid is refined while the ``L^2`` norm
    converges. Phases depend only on the mode index, so a refined grid
    carries the same coarse modes. ``profile["smooth_y"]`` is a dict such
    as ``{"kind": "gaussian", "width": 1.0}``.
    """
    eps = float(profile["rough_x_exponent"])
    smooth = dict(profile.get("smooth_y", {"kind": "gaussian", "width": 1.0}))
    if smooth.get("kind", "gaussian") != "gaussian":
        raise ValueError(f"unsupported smooth_y kind {smooth.get('kind')!r}")
    width = float(smooth.get("width", 1.0))
    diag = {}
    fields = {}
    for label, g in (("grid", grid), ("doubled", grid.refine(2))):
        phi1, x_l2, x_hs = _rough_factor(g, eps, s, seed)
        yax = g.y_axes
        ymesh = [g.mesh()[a] for a in yax]
        phi2 = np.exp(-sum(m**2 for m in ymesh) / (2 * width**2))
        f = Field(g, phi1 * phi2)
        fields[label] = f
        diag[label] = {
            "phi1_l2": x_l2,
            "phi1_hs": x_hs,
            "f_l2": f.l2(),
            "f_l2x_hsy": _sob(f, s, "y_only"),
            "f_hs": _sob(f, s, "all"),
        }
    a, b = diag["grid"], diag["doubled"]
    diag["phi1_l2_change"] = abs(b["phi1_l2"] / a["phi1_l2"] - 1)
    diag["phi1_hs_growth"] = b["phi1_hs"] / a["phi1_hs"]
    diag["l2x_hsy_change"] = abs(b["f_l2x_hsy"] / a["f_l2x_hsy"] - 1)
    diag["hs_growth"] = b["f_hs"] / a["f_hs"]
    diag["eps"] = eps
    diag["s"] = s
    return fields["grid"], diag


def _sob(f: Field, s: float, axes: str) -> float:
    fh = sfft.fftn(f.samples, norm="ortho", workers=-1)
    sym = derivative_symbol(f.grid, s, axes, "inhomogeneous")
    return float(np.sqrt(np.sum(np.abs(sym * fh) ** 2) * f.grid.cell_volume))


def _rough_factor(grid: TorusGrid, eps: float, s: float, seed: int) -> tuple[np.ndarray, float, float]:
    """x-profile broadcast to the grid shape, plus its ``L^2`` and ``H^s`` norms."""
    xax = grid.x_axes
    if not xax:
        raise ValueError("grid has no x-axes")
    d = len(xax)
    shape = tuple(grid.points[a] for a in xax)
    idx = np.meshgrid(*[np.fft.fftfreq(n, 1.0 / n).astype(int) for n in shape], indexing="ij")
    m2 = sum(i.astype(float) ** 2 for i in idx)
    amp = (1.0 + m2) ** (-(d / 2 + eps) / 2)
    phase = np.empty(shape)
    for pos in np.ndindex(*shape):
        phase[pos] = _mode_phase(seed, tuple(int(i[pos]) for i in idx))
    coeffs = amp * np.exp(1j * phase)
    vol = float(np.prod([grid.extents[a] for a in xax]))
    npts = int(np.prod(shape))
    # physical samples of sum_m c_m e^{i xi_m x} / sqrt(vol)
    xs = sfft.ifftn(coeffs, workers=-1) * npts / math.sqrt(vol)
    xi2 = sum(np.asarray(k) ** 2 for k in np.meshgrid(
        *[2 * math.pi * np.fft.fftfreq(n, L / n) for n, L in
          zip(shape, [grid.extents[a] for a in xax])], indexing="ij"))
    l2 = float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))
    hs = float(np.sqrt(np.sum((1 + xi2) ** s * np.abs(coeffs) ** 2)))
    # centre the coordinates the same way as the grid mesh (origin at index n/2)
    xs = np.fft.fftshift(xs)
    full = np.reshape(xs, shape + (1,) * (grid.ndim - d))
    if xax != tuple(range(d)):
        raise ValueError("x-axes must lead the grid axes")
    return np.broadcast_to(full, grid.shape), l2, hs
