"""Mixed Lebesgue, Sobolev and space-time norms on the torus surrogate.

All integrals are Riemann sums with the grid's cell volume; ``inf``
exponents are grid maxima. Exponents may be given as floats or as exact
values from :mod:`dispersive_lab.exponents` (converted on entry).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.fft as sfft

from .exponents import (
    EquationParams,
    ExponentTriple,
    check_thm1_conditions,
    to_float,
)
from .spectral import (
    Field,
    SpectralCutoff,
    TorusGrid,
    build_cutoff,
    derivative_symbol,
    frequency_radius,
)

__all__ = [
    "Trajectory",
    "NormSpec",
    "NORM_SCAN_COLUMNS",
    "mixed_space_norm",
    "mixed_norms_batch",
    "sobolev_norm",
    "spacetime_norm",
    "spacetime_norms",
    "strichartz_quotient",
    "free_spacetime_norms",
    "band_quotients",
    "contraction_distance",
    "embedding_check",
    "square_function_ratio",
    "trapezoid_weights",
]

NORM_SCAN_COLUMNS = ("j", "q", "r", "r_tilde", "s", "quotient", "grid_n", "grid_L", "T", "samples")


_f = to_float


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.size == 1:
        raise ValueError("trapezoid weights need at least two samples")
    dt = np.diff(times)
    w = np.zeros_like(times)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time samples of fields on a common grid with quadrature weights.

    ``states`` has shape ``(len(times),) + grid.shape``.
    """

    grid: TorusGrid
    times: np.ndarray
    weights: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if times.ndim != 1 or times.shape != weights.shape:
            raise ValueError("times and weights must be 1-D and of equal length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if states.shape != (times.size,) + self.grid.shape:
            raise ValueError(f"states shape {states.shape} does not match times/grid")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_states(cls, grid: TorusGrid, times, states) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        return cls(grid, times, trapezoid_weights(times), states)

    @classmethod
    def constant(cls, f: Field, T: float, samples: int) -> "Trajectory":
        times = np.linspace(0.0, T, samples)
        return cls.from_states(f.grid, times, np.broadcast_to(f.samples, (samples,) + f.grid.shape))

    @property
    def T(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return self.times.size

    def state(self, i: int) -> Field:
        return Field(self.grid, self.states[i])

    def with_states(self, states: np.ndarray) -> "Trajectory":
        return Trajectory(self.grid, self.times, self.weights, states)

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        _check_compatible(self, other)
        return self.with_states(self.states - other.states)

    def __add__(self, other: "Trajectory") -> "Trajectory":
        _check_compatible(self, other)
        return self.with_states(self.states + other.states)

    def __mul__(self, c) -> "Trajectory":
        return self.with_states(self.states * c)

    __rmul__ = __mul__

    def restrict(self, T: float) -> "Trajectory":
        """Samples in ``[0, T]``; ``T`` must coincide with a sample time."""
        keep = self.times <= T + 1e-12 * max(1.0, abs(T))
        if not np.isclose(self.times[keep][-1], T, rtol=1e-10, atol=1e-14):
            raise ValueError(f"T = {T} is not a sample time")
        return Trajectory.from_states(self.grid, self.times[keep], self.states[keep])

    def translate(self, shift: Sequence[int]) -> "Trajectory":
        axes = tuple(range(1, self.grid.ndim + 1))
        return self.with_states(np.roll(self.states, tuple(shift), axis=axes))


def _check_compatible(u: Trajectory, v: Trajectory) -> None:
    if u.grid != v.grid or u.times.shape != v.times.shape or not np.allclose(u.times, v.times):
        raise ValueError("trajectories differ in grid or time samples")


@dataclass(frozen=True)
class NormSpec:
    """``L^q_t L^r_x W^{s, r~}`` with derivative on ``derivative_axes``."""

    q: object
    r: object
    r_tilde: object
    s: float = 0.0
    derivative_axes: str = "none"
    derivative_flavor: str = "inhomogeneous"

    def __post_init__(self):
        for name in ("q", "r", "r_tilde"):
            if _f(getattr(self, name)) < 1:
                raise ValueError(f"exponent {name} must be >= 1")
        if self.derivative_axes not in ("none", "y_only", "all"):
            raise ValueError(f"bad derivative_axes {self.derivative_axes!r}")

    @classmethod
    def from_triple(cls, t: ExponentTriple, s: float = 0.0, derivative_axes: str = "none",
                    derivative_flavor: str = "inhomogeneous") -> "NormSpec":
        return cls(t.q, t.r, t.r_tilde, float(s), derivative_axes, derivative_flavor)


# ------------------------------------------------------------ spatial


def _lp_reduce(a: np.ndarray, p: float, axes: tuple[int, ...], measure: float) -> np.ndarray:
    """(sum |a|^p * measure)^(1/p) over ``axes``; ``a`` is nonnegative."""
    if not axes:
        return a
    if np.isinf(p):
        return a.max(axis=axes)
    scale = a.max(axis=axes, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    s = np.sum((a / safe) ** p, axis=axes) * measure
    return np.squeeze(safe, axis=axes) * s ** (1.0 / p)


def mixed_norms_batch(abs_vals: np.ndarray, grid: TorusGrid, r, r_tilde) -> np.ndarray:
    """``L^r_x L^r~_y`` norms of each leading-axis slice of ``abs_vals``."""
    r, rt = _f(r), _f(r_tilde)
    lead = abs_vals.ndim - grid.ndim
    y_axes = tuple(lead + a for a in grid.y_axes)
    x_axes = tuple(lead + a for a in grid.x_axes)
    dy = float(np.prod([grid.spacing[a] for a in grid.y_axes]))
    dx = float(np.prod([grid.spacing[a] for a in grid.x_axes])) if grid.x_axes else 1.0
    inner = _lp_reduce(abs_vals, rt, y_axes, dy)
    return _lp_reduce(inner, r, x_axes, dx)


def mixed_space_norm(f: Field, r, r_tilde) -> float:
    """``(int (int |f|^r~ dy)^(r/r~) dx)^(1/r)`` as a Riemann sum."""
    return float(mixed_norms_batch(np.abs(f.samples), f.grid, r, r_tilde))


def _spectrum(samples: np.ndarray, grid: TorusGrid) -> np.ndarray:
    axes = tuple(range(samples.ndim - grid.ndim, samples.ndim))
    return sfft.fftn(samples, axes=axes, norm="ortho", workers=-1)


def _apply_symbol(samples: np.ndarray, grid: TorusGrid, symbol: np.ndarray) -> np.ndarray:
    axes = tuple(range(samples.ndim - grid.ndim, samples.ndim))
    spec = sfft.fftn(samples, axes=axes, workers=-1)
    spec *= symbol
    return sfft.ifftn(spec, axes=axes, workers=-1)


def sobolev_norm(f: Field, s: float, flavor: str = "inhomogeneous", axes: str = "all") -> float:
    """L^2 norm of ``|grad|^s f`` or ``<grad>^s f`` (spectral evaluation)."""
    if s == 0:
        return f.l2() if f.space == "physical" else f.spectral_l2()
    coeffs = f.samples if f.space == "spectral" else _spectrum(f.samples, f.grid)
    sym = derivative_symbol(f.grid, float(s), axes, flavor)
    return float(np.sqrt(np.sum(np.abs(sym * coeffs) ** 2) * f.grid.cell_volume))


def _time_reduce(vals: np.ndarray, weights: np.ndarray, q: float) -> float:
    if np.isinf(q):
        return float(vals.max())
    scale = vals.max()
    if scale == 0:
        return 0.0
    return float(scale * np.sum(weights * (vals / scale) ** q) ** (1.0 / q))


def _slice_norms(u: Trajectory, spec: NormSpec) -> np.ndarray:
    states = u.states
    if spec.derivative_axes != "none" and spec.s != 0:
        sym = derivative_symbol(u.grid, spec.s, spec.derivative_axes, spec.derivative_flavor)
        states = _apply_symbol(states, u.grid, sym)
    return mixed_norms_batch(np.abs(states), u.grid, spec.r, spec.r_tilde)


def spacetime_norm(u: Trajectory, spec: NormSpec) -> float:
    """``(sum_i w_i ||u(t_i)||^q)^(1/q)``, or the max over samples for ``q = inf``."""
    if len(u) == 0:
        raise ValueError("empty trajectory")
    return _time_reduce(_slice_norms(u, spec), u.weights, _f(spec.q))


def spacetime_norms(u: Trajectory, triples: Sequence[ExponentTriple], s: float = 0.0,
                    derivative_axes: str = "none",
                    derivative_flavor: str = "inhomogeneous") -> list[float]:
    """:func:`spacetime_norm` for several triples sharing one derivative."""
    states = u.states
    if derivative_axes != "none" and s != 0:
        sym = derivative_symbol(u.grid, s, derivative_axes, derivative_flavor)
        states = _apply_symbol(states, u.grid, sym)
    absu = np.abs(states)
    return [_time_reduce(mixed_norms_batch(absu, u.grid, t.r, t.r_tilde), u.weights, _f(t.q))
            for t in triples]


def free_spacetime_norms(f: Field, sigma: int, times: np.ndarray, weights: np.ndarray,
                         triples: Sequence[ExponentTriple], time_sign: float = 1.0) -> list[float]:
    """Space-time norms of the free flow of ``f`` for several triples.

    Streams over time samples so that no trajectory is stored.
    """
    grid = f.grid
    spec = sfft.fftn(f.samples, workers=-1)
    rho_s = frequency_radius(grid) ** sigma
    per_t = np.empty((len(triples), len(times)))
    for i, t in enumerate(times):
        u = np.abs(sfft.ifftn(spec * np.exp(1j * time_sign * t * rho_s), workers=-1))
        for k, tr in enumerate(triples):
            per_t[k, i] = mixed_norms_batch(u, grid, tr.r, tr.r_tilde)
    return [_time_reduce(per_t[k], weights, to_float(tr.q)) for k, tr in enumerate(triples)]


def strichartz_quotient(f: Field, params: EquationParams, t: ExponentTriple, T: float,
                        time_samples: int) -> float:
    """Empirical Strichartz constant of ``f`` for the triple ``t`` on ``[0, T]``.

    Ratio of the free-flow space-time norm to ``||f||_{H^s}`` (homogeneous)
    with ``s`` fixed by the scaling condition.
    """
    cond = check_thm1_conditions(params, t)
    if not cond["condition_sc2"]:
        raise ValueError(f"triple {t} violates the dispersion condition for {params}")
    denom = sobolev_norm(f, float(cond["implied_s"]), "homogeneous", "all")
    if denom == 0:
        raise ZeroDivisionError("zero data norm")
    times = np.linspace(0.0, T, time_samples)
    (num,) = free_spacetime_norms(f, params.sigma, times, trapezoid_weights(times), [t])
    return num / denom


def band_quotients(f: Field, params: EquationParams, triples: Sequence[ExponentTriple],
                   T0: float, js: Iterable[int], time_samples: int,
                   cutoff: SpectralCutoff | None = None) -> dict:
    """Strichartz quotients of ``P_j f`` over the time windows ``[0, 2^(-sigma j) T0]``.

    The window shrinks with the band exactly as the change of variables
    ``2^-j zeta -> zeta`` dictates, so for ``f`` close to a point mass the
    quotients should not depend on ``j``. Returns ``{triple_str: [q_j ...]}``
    plus a ``rows`` list in :data:`NORM_SCAN_COLUMNS` order.
    """
    cutoff = cutoff or build_cutoff()
    grid = f.grid
    rho = frequency_radius(grid)
    spec = sfft.fftn(f.samples, workers=-1)
    implied = [float(check_thm1_conditions(params, t)["implied_s"]) for t in triples]
    out = {str(t): [] for t in triples}
    rows = []
    for j in js:
        pj = Field(grid, sfft.ifftn(spec * cutoff.psi_j(rho, j), workers=-1))
        T = T0 * 2.0 ** (-params.sigma * j)
        times = np.linspace(0.0, T, time_samples)
        nums = free_spacetime_norms(pj, params.sigma, times, trapezoid_weights(times), triples)
        for t, s, num in zip(triples, implied, nums):
            quotient = num / sobolev_norm(pj, s, "homogeneous", "all")
            out[str(t)].append(quotient)
            rows.append((j, *t.as_strings(), s, quotient, grid.points[0], grid.extents[0], T,
                         time_samples))
    out["rows"] = rows
    return out


def contraction_distance(u: Trajectory, v: Trajectory, triples: Sequence[ExponentTriple]) -> float:
    """``max`` over ``triples`` of ``||u - v||_{L^q L^r L^r~}``."""
    if not triples:
        raise ValueError("need at least one triple")
    diff = u - v
    absd = np.abs(diff.states)
    best = 0.0
    for t in triples:
        vals = mixed_norms_batch(absd, u.grid, t.r, t.r_tilde)
        best = max(best, _time_reduce(vals, u.weights, to_float(t.q)))
    return best


def embedding_check(f: Field, s: float, r_tilde, target_exponent, y_dim: int) -> float:
    """Largest slice-wise ratio ``||f||_{L^target_y} / ||f||_{W^{s,r~}_y}`` over x."""
    grid = f.grid
    if y_dim != grid.split:
        raise ValueError(f"y_dim {y_dim} does not match grid split {grid.split}")
    rt, tgt = _f(r_tilde), _f(target_exponent)
    y_axes = grid.y_axes
    dy = float(np.prod([grid.spacing[a] for a in y_axes]))
    sym = derivative_symbol(grid, float(s), "y_only", "inhomogeneous")
    ws = np.abs(_apply_symbol(f.samples, grid, sym))
    num = _lp_reduce(np.abs(f.samples), tgt, y_axes, dy)
    den = _lp_reduce(ws, rt, y_axes, dy)
    ok = den > 1e-300
    if not np.any(ok):
        raise ZeroDivisionError("zero W^{s,r} norm on every slice")
    num, den, ok = np.atleast_1d(num), np.atleast_1d(den), np.atleast_1d(ok)
    return float(np.max(num[ok] / den[ok]))


def square_function_ratio(f: Field, r, r_tilde, j_min: int, j_max: int,
                          cutoff: SpectralCutoff | None = None) -> float:
    """``||f|| / ||(sum_j |P_j f|^2)^(1/2)||`` in ``L^r_x L^r~_y``."""
    cutoff = cutoff or build_cutoff()
    rho = frequency_radius(f.grid)
    spec = sfft.fftn(f.samples, workers=-1)
    sq = np.zeros(f.grid.shape)
    for j in range(j_min, j_max + 1):
        sq += np.abs(sfft.ifftn(spec * cutoff.psi_j(rho, j), workers=-1)) ** 2
    g = mixed_norms_batch(np.sqrt(sq), f.grid, r, r_tilde)
    return mixed_space_norm(f, r, r_tilde) / float(g)
