import math

import numpy as np
import pytest
from scipy import special

from shesim import dalang
from shesim.errors import DivergentIntegralError
from shesim.kernels import (
    ExponentialKernel,
    GaussianKernel,
    MaternKernel,
    RieszKernel,
    WhiteNoise,
)

W1 = WhiteNoise(1)
W2 = WhiteNoise(2)
R_HALF = RieszKernel(1, beta=0.5)
G1 = GaussianKernel(1, scale=1.0)

FINITE_KERNELS = [
    W1,
    R_HALF,
    G1,
    ExponentialKernel(1, scale=1.3),
    MaternKernel(1, nu=1.5, scale=0.8),
    GaussianKernel(2, scale=0.7),
]


@pytest.mark.parametrize("beta", [0.25, 1.0, 4.0])
def test_upsilon_white_d1_closed_form(beta):
    # (2*pi)^-1 * int dxi/(beta+xi^2) = 1/(2*sqrt(beta))
    assert dalang.upsilon(W1, beta) == pytest.approx(0.5 / math.sqrt(beta), rel=1e-8)


def test_upsilon_divergent_cases():
    assert dalang.upsilon(W2, 1.0) == math.inf
    assert dalang.upsilon(WhiteNoise(3), 2.0) == math.inf
    with pytest.raises(ValueError):
        dalang.upsilon(W1, 0.0)
    with pytest.raises(ValueError):
        dalang.upsilon(W1, -1.0)


def test_upsilon_riesz_finite():
    val = dalang.upsilon(R_HALF, 1.0)
    assert 0.0 < val < math.inf


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.4])
def test_upsilon_alpha_white_closed_form(alpha):
    want = (
        (2.0 * math.pi) ** -1
        * math.sqrt(math.pi)
        * special.gamma(0.5 - alpha)
        / special.gamma(1.0 - alpha)
    )
    assert dalang.upsilon_alpha(W1, alpha) == pytest.approx(want, rel=1e-6)


def test_upsilon_alpha_white_divergence_threshold():
    assert dalang.upsilon_alpha(W1, 0.5) == math.inf
    assert dalang.upsilon_alpha(W1, 0.7) == math.inf
    # 0.48 is the closest sub-critical alpha the 1e-6 error contract certifies
    assert dalang.upsilon_alpha(W1, 0.48) < math.inf


@pytest.mark.parametrize("beta", [0.25, 0.5, 1.2])
def test_upsilon_alpha_riesz_threshold(beta):
    d = 2 if beta >= 1.0 else 1
    k = RieszKernel(d, beta=beta)
    cut = 1.0 - beta / 2.0
    assert dalang.upsilon_alpha(k, cut - 0.05) < math.inf
    assert dalang.upsilon_alpha(k, cut) == math.inf
    assert dalang.upsilon_alpha(k, min(0.99, cut + 0.05)) == math.inf


def test_upsilon_alpha_range_check():
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            dalang.upsilon_alpha(W1, bad)


def test_upsilon_gaussian_mpmath_oracle():
    import mpmath

    mpmath.mp.dps = 30
    want = float(
        mpmath.quad(
            lambda r: mpmath.sqrt(2 * mpmath.pi) * mpmath.e ** (-(r**2) / 2) / (1 + r**2),
            [0, 1, mpmath.inf],
        )
        / (2 * mpmath.pi)
        * 2  # surface measure in d=1
    )
    assert dalang.upsilon(G1, 1.0) == pytest.approx(want, rel=1e-9)


def test_upsilon_alpha_monotone_in_alpha():
    for k in (W1, R_HALF, G1):
        alphas = np.linspace(0.02, 0.45, 20)
        vals = [dalang.upsilon_alpha(k, a) for a in alphas]
        assert all(v < math.inf for v in vals)
        assert all(b >= a * (1.0 - 1e-9) for a, b in zip(vals, vals[1:]))


def test_upsilon_monotone_in_beta():
    for k in (W1, R_HALF, G1):
        betas = np.linspace(0.5, 6.0, 20)
        vals = [dalang.upsilon(k, b) for b in betas]
        assert all(b <= a * (1.0 + 1e-9) for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("kernel", FINITE_KERNELS)
def test_upsilon_alpha_limit_matches_upsilon_one(kernel):
    # quadratic extrapolation of log(upsilon_alpha), alpha {0.05, 0.02, 0.01} -> 0
    # (the leading alpha-dependence is exponential, so the log is the smooth fit)
    alphas = [0.05, 0.02, 0.01]
    vals = [math.log(dalang.upsilon_alpha(kernel, a)) for a in alphas]
    extrap = 0.0
    for i, (ai, vi) in enumerate(zip(alphas, vals)):
        li = 1.0
        for j, aj in enumerate(alphas):
            if j != i:
                li *= (0.0 - aj) / (ai - aj)
        extrap += li * vi
    assert math.exp(extrap) == pytest.approx(dalang.upsilon(kernel, 1.0), abs=2e-5)


def test_bound_chain_upsilon_vs_upsilon_alpha():
    # for beta > 1/2:  upsilon(2*beta) <= (2*beta)^-alpha * upsilon_alpha(alpha)
    cases = [
        (W1, 0.25, 0.6),
        (W1, 0.4, 1.0),
        (W1, 0.1, 3.0),
        (R_HALF, 0.5, 0.8),
        (R_HALF, 0.3, 2.0),
        (G1, 0.25, 0.7),
        (G1, 0.6, 1.5),
        (ExponentialKernel(1, scale=1.3), 0.5, 1.0),
        (MaternKernel(1, nu=1.5, scale=0.8), 0.35, 5.0),
        (GaussianKernel(2, scale=0.7), 0.45, 0.9),
    ]
    for kernel, alpha, beta in cases:
        lhs = dalang.upsilon(kernel, 2.0 * beta)
        rhs = (2.0 * beta) ** (-alpha) * dalang.upsilon_alpha(kernel, alpha)
        assert lhs <= rhs * (1.0 + 1e-7), (kernel, alpha, beta)


def test_admissible_alpha_sup():
    assert dalang.admissible_alpha_sup(W1) == pytest.approx(0.5, abs=1e-4)
    for beta in (0.25, 0.5, 1.0):
        d = 2 if beta >= 1.0 else 1
        got = dalang.admissible_alpha_sup(RieszKernel(d, beta=beta))
        assert got == pytest.approx(1.0 - beta / 2.0, abs=1e-4)
    assert dalang.admissible_alpha_sup(G1) == 1.0
    assert dalang.admissible_alpha_sup(W2) == 0.0


def test_constant_C_white_pinned():
    # inner mass 2, outer int_{|xi|>1} |xi|^-1.5 dxi = 4
    want = (2.0 * math.pi) ** -1 * 2.0**-0.25 * 4.0
    assert dalang.constant_C(W1, 0.25) == pytest.approx(want, rel=1e-7)


def test_constant_C_gaussian_oracle():
    import mpmath

    mpmath.mp.dps = 30
    alpha = 0.5
    fhat = lambda r: mpmath.sqrt(2 * mpmath.pi) * mpmath.e ** (-(r**2) / 2)
    inner = float(2 * mpmath.quad(fhat, [0, 1]))
    outer = float(2 * mpmath.quad(lambda r: fhat(r) * r ** (-2 * (1 - alpha)), [1, mpmath.inf]))
    want = (2.0 * math.pi) ** -1 * 2.0**-alpha * max(inner, outer)
    assert dalang.constant_C(G1, alpha) == pytest.approx(want, rel=1e-7)


def test_constant_C_positive_and_guarded():
    for kernel, alpha in [(W1, 0.3), (R_HALF, 0.6), (G1, 0.9)]:
        assert dalang.constant_C(kernel, alpha) > 0.0
    with pytest.raises(DivergentIntegralError):
        dalang.constant_C(W1, 0.6)
    with pytest.raises(DivergentIntegralError):
        dalang.constant_C(W2, 0.5)


def test_report_invariants():
    rep = dalang.report(W1, 0.25)
    assert not rep.divergent
    assert rep.quadrature_error < 1e-6 * max(1.0, rep.value)
    assert rep.as_dict()["value"] == rep.value
    rep2 = dalang.report(W1, 0.5)
    assert rep2.divergent
    assert rep2.as_dict()["value"] == "divergent"
