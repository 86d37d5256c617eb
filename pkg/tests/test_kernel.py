import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma, jv

from dispersive_lab import kernel as kmod
from dispersive_lab.kernel import (
    PhaseSpec,
    QuadratureError,
    decay_fit,
    hessian_fd,
    hessian_of_phase,
    hessian_rank,
    hessian_scan,
    kernel_radial,
    kernel_value,
    kernel_value_tensor,
    partial_kernel_radial,
    partial_kernel_value,
    sample_annulus,
    sup_kernel,
)
from dispersive_lab.spectral import Field, TorusGrid, apply_multiplier, build_cutoff, frequency_radius


@pytest.mark.parametrize("dim", [1, 2, 3, 4, 5, 6])
def test_sphere_transform_closed_forms(dim):
    u = np.linspace(0.0, 30.0, 301)
    got = kmod._sphere_ft(dim, u)
    nu = dim / 2 - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        ref = (2 * np.pi) ** (dim / 2) * jv(nu, u) / u**nu
    ref[0] = 2 * np.pi ** (dim / 2) / gamma(dim / 2)
    assert np.allclose(got, ref, atol=1e-12, rtol=1e-12)


def test_sphere_transform_against_angular_quadrature():
    # circle: int_0^{2 pi} e^{iu cos a} da, sphere: 2 pi int_0^pi e^{iu cos a} sin a da
    for u in (0.3, 2.0, 7.5):
        c = integrate.quad(lambda a: math.cos(u * math.cos(a)), 0, 2 * math.pi)[0]
        s = 2 * math.pi * integrate.quad(lambda a: math.cos(u * math.cos(a)) * math.sin(a), 0, math.pi)[0]
        assert kmod._sphere_ft(2, np.array([u]))[0] == pytest.approx(c, rel=1e-10)
        assert kmod._sphere_ft(3, np.array([u]))[0] == pytest.approx(s, rel=1e-10)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_kernel_at_origin_time_zero(N):
    c = build_cutoff()
    area = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    radial = integrate.quad(lambda r: r ** (N - 1) * float(c.psi(r)), 0.5, 2.0, limit=200)[0]
    ref = area * radial / (2 * math.pi) ** N
    assert kernel_radial([0.0], 0.0, 2, N, quad_points=256)[0].real == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("sigma,t,z", [(2, 0.7, (0.4, -0.3)), (1, 2.0, (1.0, 0.5)),
                                        (2, 0.7, (0.3, 0.2, -0.5))])
def test_radial_reduction_matches_tensor_rule(sigma, t, z):
    x, y = z[:1], z[1:]
    radial = kernel_value(x, y, t, sigma)
    tensor = kernel_value_tensor(x, y, t, sigma, nodes=96 if len(z) == 2 else 128)
    assert abs(radial - tensor) <= 1e-6 * abs(radial)


@pytest.mark.parametrize("sigma,t", [(2, 1.0), (1, 3.0)])
def test_kernel_matches_spectral_propagation_of_point_mass(sigma, t):
    # P_0 e^{it|D|^sigma} applied to a discrete unit point mass samples the kernel
    g = TorusGrid.cube(2, 64.0, 256, 1)
    delta = np.zeros(g.shape)
    delta[g.points[0] // 2, g.points[1] // 2] = 1.0 / g.cell_volume
    rho = frequency_radius(g)
    mult = build_cutoff().psi(rho) * np.exp(1j * t * rho**sigma)
    out = apply_multiplier(Field(g, delta), mult).samples
    x = g.coords(0)
    row = out[:, g.points[1] // 2]
    sel = np.abs(x) <= 8
    ref = kernel_radial(np.abs(x[sel]), t, sigma, 2)
    assert np.max(np.abs(row[sel] - ref)) <= 1e-3 * np.max(np.abs(ref))


def test_kernel_is_radial():
    a = kernel_value([1.0, 0.0], [0.0], 1.5, 2)
    b = kernel_value([0.0, 0.6], [0.8], 1.5, 2)
    assert abs(a - b) < 1e-12


def test_partial_kernel_reduces_to_one_dimensional_integral():
    # N - k = 1: K~(x, eta) = (2 pi)^-N int e^{i x xi} psi e^{it|.|^sigma} dxi
    t, eta, x = 1.3, 0.9, 0.7
    c = build_cutoff()

    def integrand(xi, part):
        r = math.hypot(xi, eta)
        v = float(c.psi(r)) * complex(math.cos(x * xi + t * r * r), math.sin(x * xi + t * r * r))
        return v.real if part == 0 else v.imag

    re = integrate.quad(integrand, -2, 2, args=(0,), limit=400, points=[0.0])[0]
    im = integrate.quad(integrand, -2, 2, args=(1,), limit=400, points=[0.0])[0]
    ref = complex(re, im) / (2 * math.pi) ** 3
    got = partial_kernel_value([x], [eta, 0.0], t, 2)
    assert abs(got - ref) < 1e-9 * abs(ref)


def test_partial_kernel_validation():
    with pytest.raises(ValueError):
        partial_kernel_radial([0.0], 2.5, 1.0, 2, 3, 2)
    with pytest.raises(ValueError):
        partial_kernel_radial([0.0], 1.0, 1.0, 2, 2, 2)
    assert np.all(partial_kernel_radial([0.0, 1.0], 2.0, 1.0, 2, 3, 2) == 0)


def test_underresolved_quadrature_raises(monkeypatch):
    monkeypatch.setattr(kmod, "_NODES_PER_PERIOD", 0)
    with pytest.raises(QuadratureError):
        sup_kernel(60.0, 2, 3, quad_points=16, per_unit=1)


def test_kernel_sigma_validated():
    with pytest.raises(ValueError):
        kernel_radial([0.0], 1.0, 3, 2)


def test_decay_fit_validates_grid():
    with pytest.raises(ValueError):
        decay_fit(2, 3, 2, "sup_xy", np.geomspace(1, 100, 5))
    with pytest.raises(ValueError):
        decay_fit(2, 3, 2, "sup_xy", np.geomspace(0.5, 100, 10))
    with pytest.raises(ValueError):
        decay_fit(2, 3, 2, "sup_xy", np.linspace(1, 100, 10))
    with pytest.raises(ValueError):
        decay_fit(2, 3, 2, "sup_zz", np.geomspace(1, 100, 10))


@pytest.mark.parametrize("sigma", [1, 2])
def test_large_time_rate_is_scale_invariant(sigma):
    # t^beta sup|K| settles to a constant once the stationary set has left the origin
    N = 3
    beta = (N - 2 + sigma) / 2
    scaled = [sup_kernel(t, sigma, N, per_unit=2) * t**beta for t in (100.0, 200.0, 400.0)]
    assert max(scaled) / min(scaled) < 1.02


@pytest.mark.parametrize("sigma,eta", [(1, (0.5,)), (2, (0.5,)), (1, ()), (2, ())])
def test_hessian_analytic_vs_finite_difference(sigma, eta):
    spec = PhaseSpec(sigma, eta)
    rng = np.random.default_rng(0)
    for _ in range(20):
        xi = rng.standard_normal(2)
        xi *= 1.0 / np.linalg.norm(xi)
        assert np.max(np.abs(hessian_of_phase(spec, xi) - hessian_fd(spec, xi))) < 1e-6


def test_hessian_ranks():
    xi = np.array([0.6, 0.3])
    assert hessian_rank(PhaseSpec(2, (0.4,)), xi) == 2
    assert hessian_rank(PhaseSpec(1, (0.4,)), xi) == 2
    # the full sigma = 1 phase is homogeneous of degree one: radial direction is flat
    assert hessian_rank(PhaseSpec(1), xi) == 1
    assert hessian_rank(PhaseSpec(1), np.array([0.6, 0.3, 0.4])) == 2


def test_phase_validation():
    with pytest.raises(ValueError):
        PhaseSpec(3)
    with pytest.raises(ValueError):
        PhaseSpec(1, (2.5,))
    with pytest.raises(ValueError):
        hessian_of_phase(PhaseSpec(2), [0.1, 0.1])


def test_sample_annulus_and_scan():
    rng = np.random.default_rng(1)
    pts = sample_annulus(rng, 4, 500)
    r = np.linalg.norm(pts, axis=1)
    assert r.min() >= 0.5 and r.max() <= 2.0
    out = hessian_scan(3, 2, 50, np.random.default_rng(2))
    assert out["sigma2_min_rank"] == out["sigma2_max_rank"] == 1
    assert out["sigma1_min_rank"] == 1
    assert out["sigma1_full_min_rank"] == 2
    assert out["max_fd_error"] < 1e-6
