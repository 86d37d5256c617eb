"""Periodic-grid Fourier machinery: multipliers, dyadic cutoffs, propagators.

The torus ``prod_i [-L_i/2, L_i/2)`` with ``n_i`` points per axis stands in
for ``R^N``. The last ``split`` axes are the y-variables, the rest are x.
Transforms use the unitary ("ortho") DFT normalization, so that
``sum |f|^2 dV == sum |f_hat|^2 dV`` exactly.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft
from numpy.polynomial.legendre import leggauss

__all__ = [
    "TorusGrid",
    "Field",
    "SpectralCutoff",
    "transform",
    "apply_multiplier",
    "build_cutoff",
    "lp_project",
    "fractional_derivative",
    "propagate",
    "rescale_field",
    "write_field",
    "read_field",
    "gaussian_field",
    "random_band_limited",
]

_FFT_WORKERS = -1


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid; ``split`` = number of trailing y-axes."""

    extents: tuple[float, ...]
    points: tuple[int, ...]
    split: int

    def __post_init__(self):
        extents = tuple(float(L) for L in self.extents)
        points = tuple(int(n) for n in self.points)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "points", points)
        if len(extents) != len(points) or not extents:
            raise ValueError("extents and points must be nonempty and of equal length")
        if any(L <= 0 for L in extents):
            raise ValueError(f"extents must be positive, got {extents}")
        if any(n <= 0 or n % 2 for n in points):
            raise ValueError(f"point counts must be positive and even, got {points}")
        if not 1 <= self.split <= len(points):
            raise ValueError(f"split must lie in [1, {len(points)}], got {self.split}")

    @classmethod
    def cube(cls, N: int, L: float, n: int, split: int) -> "TorusGrid":
        return cls((L,) * N, (n,) * N, split)

    @property
    def ndim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def x_axes(self) -> tuple[int, ...]:
        return tuple(range(self.ndim - self.split))

    @property
    def y_axes(self) -> tuple[int, ...]:
        return tuple(range(self.ndim - self.split, self.ndim))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extents, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def coords(self, axis: int) -> np.ndarray:
        n, L = self.points[axis], self.extents[axis]
        return (np.arange(n) - n // 2) * (L / n)

    def mesh(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays (open mesh)."""
        return _open(self, [self.coords(a) for a in range(self.ndim)])

    def freqs(self, axis: int) -> np.ndarray:
        n, L = self.points[axis], self.extents[axis]
        return 2 * np.pi * sfft.fftfreq(n, d=L / n)

    def freq_mesh(self) -> list[np.ndarray]:
        return _open(self, [self.freqs(a) for a in range(self.ndim)])

    def refine(self, factor: int = 2) -> "TorusGrid":
        return TorusGrid(self.extents, tuple(n * factor for n in self.points), self.split)

    def to_dict(self) -> dict:
        return {"extents": list(self.extents), "points": list(self.points), "split": self.split}


def _open(grid: TorusGrid, vecs: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = []
    for a, v in enumerate(vecs):
        shape = [1] * grid.ndim
        shape[a] = v.size
        out.append(v.reshape(shape))
    return out


@lru_cache(maxsize=16)
def _radius(grid: TorusGrid, axes: tuple[int, ...]) -> np.ndarray:
    """|zeta| restricted to ``axes``, as a read-only full-shape array."""
    fm = grid.freq_mesh()
    sq = np.zeros(grid.shape)
    for a in axes:
        sq = sq + fm[a] ** 2
    out = np.sqrt(sq)
    out.setflags(write=False)
    return out


def frequency_radius(grid: TorusGrid, axes: str = "all") -> np.ndarray:
    sel = tuple(range(grid.ndim)) if axes == "all" else grid.y_axes
    if axes not in ("all", "y_only"):
        raise ValueError(f"axes must be 'all' or 'y_only', got {axes!r}")
    return _radius(grid, sel)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples on a :class:`TorusGrid`.

    ``space`` is ``"physical"`` for point samples and ``"spectral"`` for the
    unitary DFT coefficients (standard FFT ordering).
    """

    grid: TorusGrid
    samples: np.ndarray
    space: str = dc_field(default="physical")

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=complex)
        if arr.shape != self.grid.shape:
            raise ValueError(f"samples shape {arr.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "samples", arr)

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.samples + other.samples, self.space)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.samples - other.samples, self.space)

    def __mul__(self, c) -> "Field":
        return Field(self.grid, self.samples * c, self.space)

    __rmul__ = __mul__

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.grid.cell_volume))

    def spectral_l2(self) -> float:
        coeffs = self.samples if self.space == "spectral" else transform(self).samples
        return float(np.sqrt(np.sum(np.abs(coeffs) ** 2) * self.grid.cell_volume))


def _same_grid(a: Field, b: Field) -> None:
    if a.grid != b.grid or a.space != b.space:
        raise ValueError("fields live on different grids or spaces")


def transform(f: Field, direction: str = "forward") -> Field:
    """Unitary DFT; ``inverse(forward(f)) == f`` to round-off."""
    if f.samples.shape != f.grid.shape:
        raise ValueError("shape mismatch with grid")
    if direction == "forward":
        return Field(f.grid, sfft.fftn(f.samples, norm="ortho", workers=_FFT_WORKERS), "spectral")
    if direction == "inverse":
        return Field(f.grid, sfft.ifftn(f.samples, norm="ortho", workers=_FFT_WORKERS), "physical")
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def _multiply_spectrum(grid: TorusGrid, samples: np.ndarray, mult: np.ndarray) -> np.ndarray:
    spec = sfft.fftn(samples, workers=_FFT_WORKERS)
    spec *= mult
    return sfft.ifftn(spec, workers=_FFT_WORKERS)


def apply_multiplier(f: Field, m: Callable[[list[np.ndarray]], np.ndarray] | np.ndarray) -> Field:
    """Multiply the spectrum of ``f`` by ``m`` and transform back.

    ``m`` is either an array broadcastable to the grid (FFT ordering) or a
    callable receiving the open frequency mesh.
    """
    mult = m(f.grid.freq_mesh()) if callable(m) else m
    mult = np.broadcast_to(np.asarray(mult), f.grid.shape)
    if not np.all(np.isfinite(mult)):
        raise ValueError("multiplier is not finite on the frequency lattice")
    return Field(f.grid, _multiply_spectrum(f.grid, f.samples, mult))


# ---------------------------------------------------------------- cutoffs

_GL_X, _GL_W = leggauss(64)


def _bump(t: np.ndarray, a: float) -> np.ndarray:
    out = np.zeros_like(t)
    inside = (t > 0) & (t < 1)
    ti = t[inside]
    out[inside] = np.exp(-a / (ti * (1 - ti)))
    return out


def _mollifier_step(x: np.ndarray, a: float) -> np.ndarray:
    """Normalized integral of the bump ``exp(-a/(t(1-t)))`` from 0 to ``x``."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    nodes = 0.5 * (1 + _GL_X)
    den = 0.5 * np.dot(_GL_W, _bump(nodes, a))
    flat = x.ravel()
    out = np.empty_like(flat)
    for start in range(0, flat.size, 8192):
        chunk = flat[start:start + 8192]
        t = chunk[:, None] * nodes[None, :]
        out[start:start + 8192] = 0.5 * chunk * (_bump(t, a) @ _GL_W) / den
    out = np.clip(out.reshape(x.shape), 0.0, 1.0)
    out[x <= 0] = 0.0
    out[x >= 1] = 1.0
    return out


def _ratio_step(x: np.ndarray, a: float) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        h0 = np.where(x > 0, np.exp(-a / np.where(x > 0, x, 1.0)), 0.0)
        h1 = np.where(x < 1, np.exp(-a / np.where(x < 1, 1 - x, 1.0)), 0.0)
    return h0 / (h0 + h1)


@dataclass(frozen=True)
class SpectralCutoff:
    """Dyadic cutoff ``psi(zeta) = theta(|zeta|) - theta(2|zeta|)``.

    ``theta`` is 1 on ``[0, 1]``, 0 on ``[2, inf)`` and smooth in between, so
    ``psi`` is supported in ``1/2 <= |zeta| <= 2`` and the dyadic sum
    telescopes to 1 away from the origin.
    """

    profile: str = "mollifier"
    smoothness: float = 1.0

    def theta(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        step = _mollifier_step if self.profile == "mollifier" else _ratio_step
        # theta(r) = 1 - step(r - 1), evaluated on unique radii (lattices repeat them)
        uniq, inv = np.unique(r, return_inverse=True)
        vals = 1.0 - step(uniq - 1.0, self.smoothness)
        vals[uniq <= 1.0] = 1.0
        vals[uniq >= 2.0] = 0.0
        return vals[inv].reshape(r.shape)

    def psi(self, r) -> np.ndarray:
        """Cutoff as a function of the radius ``|zeta|``."""
        r = np.asarray(r, dtype=float)
        return self.theta(r) - self.theta(2.0 * r)

    def psi_j(self, r, j: int) -> np.ndarray:
        return self.psi(np.asarray(r, dtype=float) * 2.0 ** (-j))

    def partial_sum(self, r, j_min: int, j_max: int) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return sum(self.psi_j(r, j) for j in range(j_min, j_max + 1))

    def telescoped(self, r, j_min: int, j_max: int) -> np.ndarray:
        """Closed form of :meth:`partial_sum`: ``theta(2^-b r) - theta(2^(1-a) r)``."""
        r = np.asarray(r, dtype=float)
        return self.theta(r * 2.0 ** (-j_max)) - self.theta(r * 2.0 ** (1 - j_min))


def build_cutoff(profile: str = "mollifier", smoothness: float = 1.0) -> SpectralCutoff:
    """Dyadic cutoff with a mollifier-integral (default) or ratio-of-exponentials step."""
    if profile not in ("mollifier", "ratio"):
        raise ValueError(f"unknown profile {profile!r}")
    if smoothness <= 0:
        raise ValueError("smoothness must be positive")
    return SpectralCutoff(profile, float(smoothness))


def lp_project(f: Field, j: int, cutoff: SpectralCutoff | None = None) -> Field:
    """Littlewood-Paley piece ``P_j f``."""
    cutoff = cutoff or build_cutoff()
    return apply_multiplier(f, cutoff.psi_j(frequency_radius(f.grid), j))


def derivative_symbol(grid: TorusGrid, s: float, axes: str = "all",
                      flavor: str = "inhomogeneous") -> np.ndarray:
    rho = frequency_radius(grid, axes)
    if flavor == "inhomogeneous":
        return (1.0 + rho**2) ** (s / 2)
    if flavor == "homogeneous":
        out = np.zeros_like(rho)
        nz = rho > 0
        out[nz] = rho[nz] ** s
        return out
    raise ValueError(f"flavor must be 'homogeneous' or 'inhomogeneous', got {flavor!r}")


def fractional_derivative(f: Field, s: float, axes: str = "all",
                          flavor: str = "inhomogeneous") -> Field:
    """``|grad|^s`` or ``<grad>^s``, over all axes or the y-axes only.

    The homogeneous symbol is set to 0 at the zero frequency.
    """
    return apply_multiplier(f, derivative_symbol(f.grid, s, axes, flavor))


def propagator_symbol(grid: TorusGrid, t: float, sigma: int) -> np.ndarray:
    if sigma not in (1, 2):
        raise ValueError(f"sigma must be 1 or 2, got {sigma}")
    rho = frequency_radius(grid)
    return np.exp(1j * t * rho**sigma)


def propagate(f: Field, t: float, sigma: int) -> Field:
    """``exp(i t (-Laplacian)^(sigma/2)) f``."""
    return apply_multiplier(f, propagator_symbol(f.grid, t, sigma))


def rescale_field(f: Field, delta: float, amplitude_exp: float) -> Field:
    """``f_delta(z) = delta^a f(delta z)`` for dyadic ``delta``.

    The point counts are kept and the extents divided by ``delta``; each
    sample of the result then sits exactly on a sample of ``f``.
    """
    m = math.log2(delta) if delta > 0 else float("nan")
    if not math.isfinite(m) or m != round(m):
        raise ValueError(f"delta must be a power of two, got {delta}")
    g = TorusGrid(tuple(L / delta for L in f.grid.extents), f.grid.points, f.grid.split)
    return Field(g, f.samples * delta**amplitude_exp)


# ------------------------------------------------------------- binary I/O

_ENDIAN = "<"


def write_field(path: str | Path, f: Field) -> None:
    """Write a flat binary snapshot.

    Layout (little-endian): int64 axis count, float64 extents, int64 point
    counts, int64 split, then interleaved re/im float64 in row-major order.
    """
    g = f.grid
    d = g.ndim
    head = struct.pack(f"{_ENDIAN}q{d}d{d}qq", d, *g.extents, *g.points, g.split)
    body = np.ascontiguousarray(f.samples, dtype="<c16").view("<f8")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(head)
        fh.write(body.tobytes(order="C"))
    tmp.replace(path)


def read_field(path: str | Path) -> Field:
    raw = Path(path).read_bytes()
    (d,) = struct.unpack_from(f"{_ENDIAN}q", raw, 0)
    off = 8
    extents = struct.unpack_from(f"{_ENDIAN}{d}d", raw, off)
    off += 8 * d
    points = struct.unpack_from(f"{_ENDIAN}{d}q", raw, off)
    off += 8 * d
    (split,) = struct.unpack_from(f"{_ENDIAN}q", raw, off)
    off += 8
    grid = TorusGrid(extents, points, split)
    vals = np.frombuffer(raw, dtype="<f8", offset=off)
    if vals.size != 2 * int(np.prod(points)):
        raise ValueError("payload size does not match header")
    samples = vals.view("<c16").reshape(points).astype(complex)
    return Field(grid, samples)


# ----------------------------------------------------------- test data


def gaussian_field(grid: TorusGrid, width: float = 1.0, center=None) -> Field:
    """``exp(-|z - c|^2 / (2 width^2))`` sampled on the grid."""
    mesh = grid.mesh()
    center = np.zeros(grid.ndim) if center is None else np.asarray(center, float)
    sq = sum((m - c) ** 2 for m, c in zip(mesh, center))
    return Field(grid, np.exp(-sq / (2 * width**2)) * np.ones(grid.shape))


def random_band_limited(grid: TorusGrid, rng: np.random.Generator, k_max: float,
                        width: float | None = None, real: bool = False,
                        mean_zero: bool = False) -> Field:
    """Random field with spectrum inside ``|zeta| < k_max``.

    With ``width`` set, the field is windowed by a Gaussian of that width and
    band-limited again, so it is concentrated near the origin.
    """
    rho = frequency_radius(grid)
    taper = _ratio_step(2.0 * (1.0 - rho / k_max), 1.0)
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    samples = sfft.ifftn(coeffs * taper, workers=_FFT_WORKERS)
    if width is not None:
        samples = samples * gaussian_field(grid, width).samples
        samples = sfft.ifftn(sfft.fftn(samples, workers=_FFT_WORKERS) * taper,
                             workers=_FFT_WORKERS)
    if real:
        samples = samples.real.astype(complex)
    if mean_zero:
        samples = samples - samples.mean()
    out = Field(grid, samples)
    return out * (1.0 / out.l2())
