import math

import numpy as np
import pytest
from scipy import integrate, special

from shesim.errors import SpecParseError
from shesim.kernels import (
    NOT_POINTWISE,
    ExponentialKernel,
    GaussianKernel,
    MaternKernel,
    RieszKernel,
    WhiteNoise,
    eval_correlation,
    eval_spectral_density,
    heat_kernel,
    kernel_spec_string,
    parse_kernel,
)

ALL_KERNELS = [
    WhiteNoise(1),
    WhiteNoise(2),
    RieszKernel(1, beta=0.5),
    RieszKernel(2, beta=1.2),
    GaussianKernel(1, scale=1.0),
    GaussianKernel(2, scale=0.7),
    ExponentialKernel(1, scale=1.3),
    MaternKernel(1, nu=1.5, scale=0.8),
    MaternKernel(2, nu=0.7, scale=1.1),
]

POINTWISE_KERNELS = [k for k in ALL_KERNELS if not isinstance(k, (WhiteNoise, RieszKernel))]


def test_correlation_pinned_values():
    assert eval_correlation(GaussianKernel(1, scale=1.0), 0.0) == 1.0
    assert eval_correlation(WhiteNoise(1), 3.3) is NOT_POINTWISE
    # |4|^(-1/2)
    assert eval_correlation(RieszKernel(1, beta=0.5), 4.0) == pytest.approx(0.5, abs=0)
    assert eval_correlation(RieszKernel(1, beta=0.5), 0.0) == math.inf


def test_correlation_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        eval_correlation(GaussianKernel(2), [1.0])
    with pytest.raises(ValueError, match="dimension"):
        eval_spectral_density(WhiteNoise(1), [1.0, 2.0])


@pytest.mark.parametrize("kernel", POINTWISE_KERNELS)
def test_correlation_symmetry(kernel):
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.normal(size=kernel.dimension) * 3.0
        assert eval_correlation(kernel, x) == eval_correlation(kernel, -x)


def test_heat_kernel_pinned_values():
    assert heat_kernel(1.0, [0.0]) == pytest.approx(0.3989422804, abs=1e-10)
    assert heat_kernel(1.0, [0.0, 0.0]) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-12)
    with pytest.raises(ValueError):
        heat_kernel(0.0, [0.0])
    with pytest.raises(ValueError):
        heat_kernel(-1.0, [0.0])


def test_heat_kernel_monotone_decay():
    x = np.linspace(0.0, 30.0, 200)[:, None]
    vals = heat_kernel(0.7, x)
    assert np.all(np.diff(vals) <= 0.0)
    assert vals[-1] < 1e-100


@pytest.mark.parametrize("t,d", [(0.5, 1), (2.0, 1), (0.5, 2), (1.5, 2)])
def test_heat_kernel_unit_mass(t, d):
    half = 8.0 * math.sqrt(t)
    n = 2001 if d == 1 else 801
    axis = np.linspace(-half, half, n)
    if d == 1:
        vals = heat_kernel(t, axis[:, None])
        mass = np.trapezoid(vals, axis)
    else:
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        pts = np.stack([xx, yy], axis=-1)
        vals = heat_kernel(t, pts)
        mass = np.trapezoid(np.trapezoid(vals, axis, axis=1), axis)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_heat_kernel_semigroup_d1():
    s, t = 0.3, 0.5
    x = np.linspace(-12.0, 12.0, 1201)
    dx = x[1] - x[0]
    ps = heat_kernel(s, x[:, None])
    pt = heat_kernel(t, x[:, None])
    conv = np.convolve(ps, pt, mode="same") * dx
    want = heat_kernel(s + t, x[:, None])
    mid = slice(200, 1001)  # away from truncation boundary
    assert np.max(np.abs(conv[mid] - want[mid])) < 1e-6


def test_spectral_density_pinned_values():
    assert eval_spectral_density(WhiteNoise(1), 3.7) == 1.0
    # total mass of the unit gaussian correlation
    got = eval_spectral_density(GaussianKernel(1, scale=1.0), 0.0)
    mass, _ = integrate.quad(lambda x: math.exp(-x * x / 2.0), -np.inf, np.inf)
    assert got == pytest.approx(mass, rel=1e-10)


@pytest.mark.parametrize("kernel", ALL_KERNELS)
def test_spectral_density_even(kernel):
    rng = np.random.default_rng(11)
    for _ in range(10):
        xi = rng.normal(size=kernel.dimension) * 4.0
        assert eval_spectral_density(kernel, xi) == eval_spectral_density(kernel, -xi)


@pytest.mark.parametrize(
    "kernel",
    [GaussianKernel(1, scale=1.0), ExponentialKernel(1, scale=1.3), MaternKernel(1, nu=1.5, scale=0.8)],
)
@pytest.mark.parametrize("xi", [0.3, 1.0, 2.5])
def test_spectral_density_quadrature_oracle_d1(kernel, xi):
    # fhat(xi) = 2 * int_0^inf f(r) cos(r xi) dr
    want, _ = integrate.quad(
        lambda r: eval_correlation(kernel, r) * math.cos(r * xi), 0.0, np.inf, limit=400
    )
    want *= 2.0
    assert eval_spectral_density(kernel, xi) == pytest.approx(want, rel=1e-7)


@pytest.mark.parametrize("kernel", [GaussianKernel(2, scale=0.7), MaternKernel(2, nu=0.7, scale=1.1)])
@pytest.mark.parametrize("xi_norm", [0.5, 1.5])
def test_spectral_density_hankel_oracle_d2(kernel, xi_norm):
    # isotropic d=2 transform: fhat = 2*pi int_0^inf f(r) J0(r |xi|) r dr
    want, _ = integrate.quad(
        lambda r: eval_correlation(kernel, [r, 0.0]) * special.j0(r * xi_norm) * r,
        0.0,
        np.inf,
        limit=400,
    )
    want *= 2.0 * math.pi
    got = eval_spectral_density(kernel, [xi_norm, 0.0])
    assert got == pytest.approx(want, rel=1e-6)


def _damped_riesz_transform(beta, eps):
    # 2 * int_0^inf x^-beta exp(-eps x) cos(x) dx, split so QAWF sees the tail
    def f(x):
        return 0.0 if x == 0.0 else x**-beta * math.exp(-eps * x)

    head, _ = integrate.quad(lambda x: f(x) * math.cos(x), 0.0, 1.0, epsrel=1e-12, limit=200)
    tail, _ = integrate.quad(f, 1.0, np.inf, weight="cos", wvar=1.0, limit=400)
    return 2.0 * (head + tail)


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.75])
def test_riesz_spectral_constant_oracle(beta):
    # oracle: regularized transform, Richardson-extrapolated in the damping
    eps_grid = [0.04, 0.02, 0.01, 0.005, 0.0025]
    vals = [_damped_riesz_transform(beta, e) for e in eps_grid]
    oracle = 0.0
    for i, (ei, vi) in enumerate(zip(eps_grid, vals)):
        li = 1.0
        for j, ej in enumerate(eps_grid):
            if j != i:
                li *= (0.0 - ej) / (ei - ej)
        oracle += li * vi
    got = RieszKernel(1, beta=beta).spectral_constant
    assert got == pytest.approx(oracle, rel=1e-6)
    # homogeneity: fhat(xi) = c |xi|^(beta-1)
    k = RieszKernel(1, beta=beta)
    assert eval_spectral_density(k, 2.0) == pytest.approx(got * 2.0 ** (beta - 1.0), rel=1e-12)


@pytest.mark.parametrize("kernel", POINTWISE_KERNELS)
def test_gram_matrix_psd(kernel):
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(25, kernel.dimension)) * 2.0
    gram = np.empty((25, 25))
    for i in range(25):
        for j in range(25):
            gram[i, j] = eval_correlation(kernel, pts[i] - pts[j])
    eigs = np.linalg.eigvalsh(gram)
    assert eigs.min() >= -1e-10 * np.trace(gram)


@pytest.mark.parametrize("kernel", [WhiteNoise(1), RieszKernel(1, beta=0.5)])
def test_spectral_discretization_nonnegative(kernel):
    # white noise / Riesz have no pointwise Gram; their lattice covariance is
    # circulant with eigenvalues proportional to fhat >= 0
    xi = 2.0 * math.pi * np.fft.fftfreq(64, d=0.25)
    vals = kernel.spectral_radial(np.abs(xi[xi != 0.0]))
    assert np.all(vals >= 0.0)


def test_kernel_validation():
    with pytest.raises(ValueError):
        RieszKernel(1, beta=1.0)  # needs beta < d
    with pytest.raises(ValueError):
        RieszKernel(1, beta=0.0)
    with pytest.raises(ValueError):
        GaussianKernel(1, scale=-1.0)
    with pytest.raises(ValueError):
        MaternKernel(2, nu=0.0, scale=1.0)


@pytest.mark.parametrize(
    "spec,cls,dim",
    [
        ("white,dim=1", WhiteNoise, 1),
        ("white,dim=2", WhiteNoise, 2),
        ("riesz:beta=0.5,dim=1", RieszKernel, 1),
        ("gaussian:scale=1,dim=2", GaussianKernel, 2),
        ("exp:scale=2.5,dim=1", ExponentialKernel, 1),
        ("matern:nu=1.5,scale=0.8,dim=1", MaternKernel, 1),
    ],
)
def test_parse_kernel(spec, cls, dim):
    k = parse_kernel(spec)
    assert isinstance(k, cls)
    assert k.dimension == dim
    assert parse_kernel(kernel_spec_string(k)) == k


@pytest.mark.parametrize(
    "bad", ["", "sombrero,dim=1", "riesz:dim=1", "white,dim=huh", "gaussian:scale=1,width=2,dim=1"]
)
def test_parse_kernel_rejects(bad):
    with pytest.raises(SpecParseError):
        parse_kernel(bad)
