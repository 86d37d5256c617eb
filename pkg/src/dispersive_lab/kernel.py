"""Quadrature of the frequency-localized dispersive kernel and its decay.

``K(x, y, t) = (2 pi)^-N int e^{i (x,y).(xi,eta)} e^{i t |(xi,eta)|^sigma} psi(xi,eta)``

Because ``psi`` is radial the kernel depends on ``|(x, y)|`` only, and the
angular integral has the closed form ``(2 pi)^{N/2} u^{1-N/2} J_{N/2-1}(u)``.
The production path therefore integrates over the radius alone with
composite Gauss-Legendre panels whose count grows linearly with ``t``. A
tensor-product rule over the bounding box of the annulus is kept as an
independent route for small ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma, j0, j1, jv

from .spectral import SpectralCutoff, build_cutoff

__all__ = [
    "QuadratureError",
    "PhaseSpec",
    "DecayFitReport",
    "KERNEL_SCAN_COLUMNS",
    "kernel_value",
    "kernel_radial",
    "kernel_value_tensor",
    "partial_kernel_value",
    "partial_kernel_radial",
    "sup_kernel",
    "sup_partial_kernel_l2",
    "decay_fit",
    "hessian_of_phase",
    "hessian_fd",
    "hessian_rank",
    "sample_annulus",
    "hessian_scan",
]

KERNEL_SCAN_COLUMNS = ("sigma", "N", "k", "norm_mode", "t", "value")

_PANEL = 16
_NODES_PER_PERIOD = 8
_REL_TOL = 1e-4


class QuadratureError(RuntimeError):
    """Doubling the quadrature changed the result by more than the tolerance."""


def _panels(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    m = max(1, math.ceil(n / _PANEL))
    edges = np.linspace(a, b, m + 1)
    x, w = leggauss(_PANEL)
    half = 0.5 * np.diff(edges)
    nodes = (half[:, None] * (x + 1) + edges[:-1, None]).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _node_count(quad_points: int, length: float, max_freq: float) -> int:
    cycles = max_freq * length / (2 * math.pi)
    return int(quad_points + _NODES_PER_PERIOD * cycles)


def _sphere_ft(dim: int, u: np.ndarray) -> np.ndarray:
    """``int_{S^{dim-1}} e^{i u theta_1} dtheta`` as a function of ``u >= 0``."""
    u = np.asarray(u, dtype=float)
    if dim == 1:
        return 2.0 * np.cos(u)
    if dim == 2:
        return 2 * math.pi * j0(u)
    if dim == 3:
        return 4 * math.pi * np.sinc(u / math.pi)
    nu = dim / 2 - 1
    area = 2 * math.pi ** (dim / 2) / gamma(dim / 2)
    out = np.full(u.shape, area)
    nz = u > 1e-8
    un = u[nz]
    bessel = j1(un) if dim == 4 else jv(nu, un)
    out[nz] = (2 * math.pi) ** (dim / 2) * bessel / un**nu
    return out


def kernel_radial(r, t: float, sigma: int, N: int, cutoff: SpectralCutoff | None = None,
                  quad_points: int = 64) -> np.ndarray:
    """``K`` at radii ``r = |(x, y)|`` (vectorized over ``r``)."""
    if sigma not in (1, 2):
        raise ValueError(f"sigma must be 1 or 2, got {sigma}")
    cutoff = cutoff or build_cutoff()
    r = np.atleast_1d(np.asarray(r, dtype=float))
    max_freq = sigma * 2.0 ** (sigma - 1) * abs(t) + float(r.max(initial=0.0))
    n = _node_count(quad_points, 1.5, max_freq)
    rho, w = _panels(0.5, 2.0, n)
    weight = w * rho ** (N - 1) * cutoff.psi(rho) * np.exp(1j * t * rho**sigma)
    out = np.empty(r.shape, dtype=complex)
    chunk = max(1, 2_000_000 // rho.size)
    for s in range(0, r.size, chunk):
        rr = r[s:s + chunk]
        out[s:s + chunk] = _sphere_ft(N, np.outer(rr, rho)) @ weight
    return out / (2 * math.pi) ** N


def _converged(fn, quad_points: int):
    a = fn(quad_points)
    b = fn(2 * quad_points)
    scale = np.max(np.abs(b))
    err = np.max(np.abs(a - b))
    if scale > 0 and err > _REL_TOL * scale:
        raise QuadratureError(f"refinement changed kernel by {err / scale:.2e} relative")
    return b


def kernel_value(x: Sequence[float], y: Sequence[float], t: float, sigma: int,
                 cutoff: SpectralCutoff | None = None, quad_points: int = 64) -> complex:
    """Kernel at one point, validated by doubling ``quad_points``.

    Raises
    ------
    QuadratureError
        If the doubled rule moves the value by more than ``1e-4`` relative.
    """
    x, y = np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float))
    N = x.size + y.size
    r = float(np.sqrt(np.sum(x**2) + np.sum(y**2)))
    val = _converged(lambda qp: kernel_radial([r], t, sigma, N, cutoff, qp), quad_points)
    return complex(val[0])


def kernel_value_tensor(x: Sequence[float], y: Sequence[float], t: float, sigma: int,
                        cutoff: SpectralCutoff | None = None, nodes: int = 64) -> complex:
    """Tensor-product Gauss-Legendre over ``[-2, 2]^N`` (independent cross-check).

    ``nodes`` is the per-axis count; cost grows like ``nodes^N``.
    """
    cutoff = cutoff or build_cutoff()
    z = np.concatenate([np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float))])
    N = z.size
    g, w = _panels(-2.0, 2.0, nodes)
    grids = np.meshgrid(*([g] * N), indexing="ij", sparse=True)
    wgrids = np.meshgrid(*([w] * N), indexing="ij", sparse=True)
    rho = np.sqrt(sum(a**2 for a in grids))
    weight = math.prod(wgrids)
    phase = sum(zi * a for zi, a in zip(z, grids)) + t * rho**sigma
    integrand = np.exp(1j * phase) * cutoff.psi(rho) * weight
    return complex(np.sum(integrand) / (2 * math.pi) ** N)


def partial_kernel_radial(x_radii, eta_norm: float, t: float, sigma: int, N: int, k: int,
                          cutoff: SpectralCutoff | None = None, quad_points: int = 64) -> np.ndarray:
    """Partial kernel at ``|x|`` in ``x_radii`` for a frozen ``|eta|``."""
    if eta_norm > 2:
        raise ValueError(f"|eta| = {eta_norm} exceeds 2")
    cutoff = cutoff or build_cutoff()
    d = N - k
    if d < 1:
        raise ValueError("partial kernel needs N - k >= 1")
    x_radii = np.atleast_1d(np.asarray(x_radii, float))
    lo = math.sqrt(max(0.0, 0.25 - eta_norm**2))
    hi = math.sqrt(4.0 - eta_norm**2)
    if hi <= lo:
        return np.zeros(x_radii.shape, dtype=complex)
    max_freq = sigma * 2.0 ** (sigma - 1) * abs(t) + float(x_radii.max(initial=0.0))
    n = _node_count(quad_points, hi - lo, max_freq)
    rho, w = _panels(lo, hi, n)
    full = np.sqrt(rho**2 + eta_norm**2)
    weight = w * rho ** (d - 1) * cutoff.psi(full) * np.exp(1j * t * full**sigma)
    return (_sphere_ft(d, np.outer(x_radii, rho)) @ weight) / (2 * math.pi) ** N


def partial_kernel_value(x: Sequence[float], eta: Sequence[float], t: float, sigma: int,
                         cutoff: SpectralCutoff | None = None, quad_points: int = 64) -> complex:
    x, eta = np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(eta, float))
    N, k = x.size + eta.size, eta.size
    en = float(np.linalg.norm(eta))
    xr = [float(np.linalg.norm(x))]
    val = _converged(
        lambda qp: partial_kernel_radial(xr, en, t, sigma, N, k, cutoff, qp), quad_points)
    return complex(val[0])


# ---------------------------------------------------------------- decay


def _probe_radii(t: float, sigma: int, per_unit: float) -> np.ndarray:
    # stationary points sit at |z| = sigma rho^(sigma-1) t, rho in [1/2, 2]
    reach = sigma * 2.0 ** (sigma - 1) * t * 1.1 + 10.0
    return np.linspace(0.0, reach, int(per_unit * reach) + 2)


def sup_kernel(t: float, sigma: int, N: int, cutoff: SpectralCutoff | None = None,
               quad_points: int = 64, per_unit: float = 20.0) -> float:
    """``sup_{x,y} |K|`` over a radial probe set containing the origin."""
    radii = _probe_radii(t, sigma, per_unit)
    vals = _converged(lambda qp: kernel_radial(radii, t, sigma, N, cutoff, qp), quad_points)
    return float(np.abs(vals).max())


def sup_partial_kernel_l2(t: float, sigma: int, N: int, k: int,
                          cutoff: SpectralCutoff | None = None, quad_points: int = 64,
                          eta_nodes: int = 64, per_unit: float = 10.0) -> float:
    """``sup_x (int_{|eta|<=2} |K~(x, eta, t)|^2 deta)^(1/2)``."""
    radii = _probe_radii(t, sigma, per_unit)
    e, we = _panels(0.0, 2.0, eta_nodes)
    sphere = 2 * math.pi ** (k / 2) / gamma(k / 2)

    def agg(qp):
        acc = np.zeros(radii.shape)
        for en, wn in zip(e, we):
            vals = partial_kernel_radial(radii, float(en), t, sigma, N, k, cutoff, qp)
            acc += wn * sphere * en ** (k - 1) * np.abs(vals) ** 2
        return np.sqrt(acc)

    return float(_converged(agg, quad_points).max())


@dataclass
class DecayFitReport:
    fitted_slope: float
    predicted_beta: float
    t_range: tuple[float, float]
    residual: float
    times: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    constant: float = float("nan")

    def rows(self, sigma: int, N: int, k: int, norm_mode: str) -> list[tuple]:
        return [(sigma, N, k, norm_mode, t, v) for t, v in zip(self.times, self.values)]

    def to_dict(self) -> dict:
        return {
            "fitted_slope": self.fitted_slope,
            "predicted_beta": self.predicted_beta,
            "t_range": list(self.t_range),
            "residual": self.residual,
            "constant": self.constant,
            "times": self.times,
            "values": self.values,
        }


def decay_fit(sigma: int, N: int, k: int, norm_mode: str, t_grid: Sequence[float],
              cutoff: SpectralCutoff | None = None, quad_points: int = 64) -> DecayFitReport:
    """Least-squares slope of ``log ||K(t)||`` against ``log t``.

    ``norm_mode`` is ``"sup_xy"`` (full kernel, predicted rate
    ``(N-2+sigma)/2``) or ``"sup_x_l2_eta"`` (partial kernel, predicted rate
    ``(N-k-2+sigma)/2``). ``constant`` is the smallest ``C`` with
    ``||K(t)|| <= C (1+t)^-beta`` on the grid.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.size < 8:
        raise ValueError("t_grid needs at least 8 points")
    if ts.min() < 1 or ts.max() > 100:
        raise ValueError("t_grid must lie in [1, 100]")
    ratios = ts[1:] / ts[:-1]
    if np.any(ratios <= 1) or not np.allclose(ratios, ratios[0], rtol=1e-6):
        raise ValueError("t_grid must be increasing and log-spaced")
    if norm_mode == "sup_xy":
        beta = (N - 2 + sigma) / 2
        vals = [sup_kernel(t, sigma, N, cutoff, quad_points) for t in ts]
    elif norm_mode == "sup_x_l2_eta":
        beta = (N - k - 2 + sigma) / 2
        vals = [sup_partial_kernel_l2(t, sigma, N, k, cutoff, quad_points) for t in ts]
    else:
        raise ValueError(f"unknown norm_mode {norm_mode!r}")
    vals = np.asarray(vals)
    lt, lv = np.log(ts), np.log(vals)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = float(np.sqrt(np.mean((lv - (slope * lt + intercept)) ** 2)))
    const = float(np.max(vals * (1 + ts) ** beta))
    return DecayFitReport(float(slope), float(beta), (float(ts[0]), float(ts[-1])), resid,
                          ts.tolist(), vals.tolist(), const)


# ------------------------------------------------------------- Hessians


@dataclass(frozen=True)
class PhaseSpec:
    """Phase ``xi -> |(xi, eta)|^sigma`` with ``eta`` frozen (empty: full phase)."""

    sigma: int
    eta: tuple[float, ...] = ()

    def __post_init__(self):
        if self.sigma not in (1, 2):
            raise ValueError(f"sigma must be 1 or 2, got {self.sigma}")
        eta = tuple(float(e) for e in self.eta)
        object.__setattr__(self, "eta", eta)
        if math.sqrt(sum(e * e for e in eta)) > 2:
            raise ValueError("frozen |eta| must be <= 2")

    def value(self, xi) -> float:
        r2 = float(np.sum(np.square(xi))) + sum(e * e for e in self.eta)
        return r2 ** (self.sigma / 2)


def _check_annulus(spec: PhaseSpec, xi: np.ndarray) -> float:
    r = math.sqrt(float(np.sum(xi**2)) + sum(e * e for e in spec.eta))
    if not 0.5 - 1e-12 <= r <= 2 + 1e-12:
        raise ValueError(f"|(xi, eta)| = {r:.6g} is outside the annulus [1/2, 2]")
    return r


def hessian_of_phase(spec: PhaseSpec, xi) -> np.ndarray:
    """Analytic Hessian in ``xi`` of ``|(xi, eta)|^sigma``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r = _check_annulus(spec, xi)
    d = xi.size
    if spec.sigma == 2:
        return 2.0 * np.eye(d)
    return (r**2 * np.eye(d) - np.outer(xi, xi)) / r**3


def hessian_fd(spec: PhaseSpec, xi, h: float = 1e-4) -> np.ndarray:
    """Central second differences of the phase."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    _check_annulus(spec, xi)
    d = xi.size
    H = np.empty((d, d))
    f = spec.value
    for i in range(d):
        for j in range(i, d):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = h
            ej[j] = h
            val = (f(xi + ei + ej) - f(xi + ei - ej) - f(xi - ei + ej) + f(xi - ei - ej)) / (4 * h * h)
            H[i, j] = H[j, i] = val
    return H


def hessian_rank(spec: PhaseSpec, xi, tol: float = 1e-8) -> int:
    """Singular values above ``tol`` times the largest."""
    sv = np.linalg.svd(hessian_of_phase(spec, xi), compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def sample_annulus(rng: np.random.Generator, N: int, n: int) -> np.ndarray:
    """``n`` points uniform in ``{1/2 <= |zeta| <= 2}`` of ``R^N``."""
    v = rng.standard_normal((n, N))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    lo, hi = 0.5**N, 2.0**N
    radius = (lo + (hi - lo) * rng.random(n)) ** (1.0 / N)
    return v * radius[:, None]


def hessian_scan(N: int, k: int, samples: int, rng: np.random.Generator,
                 tol: float = 1e-8) -> dict:
    """Rank statistics of the frozen and full Hessians on random annulus points."""
    pts = sample_annulus(rng, N, samples)
    out = {"N": N, "k": k, "samples": samples}
    fd_err = 0.0
    for sigma in (1, 2):
        ranks, full_ranks = [], []
        for z in pts:
            xi, eta = z[: N - k], z[N - k:]
            spec = PhaseSpec(sigma, tuple(eta))
            ranks.append(hessian_rank(spec, xi, tol))
            full_ranks.append(hessian_rank(PhaseSpec(sigma), z, tol))
            fd_err = max(fd_err, float(np.max(np.abs(hessian_of_phase(spec, xi) - hessian_fd(spec, xi)))))
        out[f"sigma{sigma}_min_rank"] = int(min(ranks))
        out[f"sigma{sigma}_max_rank"] = int(max(ranks))
        out[f"sigma{sigma}_full_min_rank"] = int(min(full_ranks))
    out["max_fd_error"] = fd_err
    return out
