"""Integrability functionals of the spectral density.

Two families of integrals control everything downstream:

    upsilon(beta)        = (2*pi)^(-d) * int fhat(xi) / (beta + |xi|^2) dxi
    upsilon_alpha(alpha) = (2*pi)^(-d) * int fhat(xi) / (1 + |xi|^2)^(1-alpha) dxi

Finiteness of the first (for some, equivalently all, beta > 0) is the
classical integrability requirement for a random-field solution; the second
strengthens it and governs Hoelder exponents and moment growth rates.

Divergence is decided symbolically from each kernel family's spectral tail
exponent, never from a quadrature timeout: the d-dimensional integrand decays
like |xi|^(e - 2(1-alpha)) with e the tail exponent of fhat, and the integral
diverges exactly when that power is >= -d.  Finite values are computed by
radial reduction, adaptive quadrature up to a cutoff R (geometric panels, so
power-law tails pose no stiffness), and an analytic remainder bound beyond R
kept below 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import DivergentIntegralError
from .kernels import kernel_spec_string, sphere_surface

_TAIL_TOL = 1e-10
_REL_TOL = 1e-8


def _converges(kernel, weight_decay):
    """True iff int fhat(xi) |xi|^(-weight_decay) dxi converges at infinity.

    weight_decay is 2 for upsilon and 2*(1-alpha) for upsilon_alpha.
    """
    e = kernel.tail_exponent
    if e == -math.inf:
        return True
    return e + kernel.dimension - weight_decay < 0.0


def _tail_cutoff(kernel, weight_decay):
    """(ln R, bound): log cutoff radius and analytic bound on the neglected
    tail of the full (2*pi)^(-d)-scaled integral.

    Working in log radius keeps near-critical exponents (where R is
    astronomically large) inside floating-point range; ln R is capped at 690
    and the correspondingly larger remainder is reported in the error.
    """
    d = kernel.dimension
    c_env, e_env, r_valid = kernel.power_envelope()
    power = e_env + d - weight_decay  # radial integrand tail is r^(power-1)
    if power >= 0.0:
        raise DivergentIntegralError("tail cutoff requested for a divergent integral")
    scale = sphere_surface(d) * (2.0 * math.pi) ** (-d)
    ln_r = -math.log(scale * c_env / (-power * _TAIL_TOL)) / power
    ln_cap = 690.0 / max(1.0, d - 1.0)  # keep r^(d-1) representable
    ln_r = min(ln_cap, max(0.0, math.log(max(1.0, r_valid)), ln_r))
    tail = scale * c_env * math.exp(power * ln_r) / (-power)
    return ln_r, tail


def _radial_quad(kernel, weight_fn, weight_decay, lo=0.0):
    """(2*pi)^(-d) * int_{|xi|>=lo} fhat(xi) * weight(|xi|) dxi via radial
    reduction; returns (value, error_estimate including the tail bound).

    The range [max(lo,1), R] is integrated in log radius, which stays
    efficient however slowly the integrand decays.
    """
    d = kernel.dimension
    scale = sphere_surface(d) * (2.0 * math.pi) ** (-d)
    ln_r_cut, tail = _tail_cutoff(kernel, weight_decay)

    def integrand(r):
        return float(kernel.spectral_radial(r)) * r ** (d - 1) * weight_fn(r)

    value, err = 0.0, 0.0
    if lo < 1.0:
        # substitute r = s^m to flatten the r^(d-1+p0) origin behavior
        m = max(1, math.ceil(2.0 / (d + kernel.origin_exponent)))
        v, q_err = integrate.quad(
            lambda s: integrand(s**m) * m * s ** (m - 1),
            lo ** (1.0 / m),
            1.0,
            epsrel=_REL_TOL,
            epsabs=1e-14,
            limit=200,
        )
        value += v
        err += q_err
    ln_lo = math.log(max(lo, 1.0))
    if ln_r_cut > ln_lo:
        v, q_err = integrate.quad(
            lambda u: integrand(math.exp(u)) * math.exp(u),
            ln_lo,
            ln_r_cut,
            epsrel=_REL_TOL,
            epsabs=1e-14,
            limit=200,
        )
        value += v
        err += q_err
    return scale * value + tail, scale * err + tail


@dataclass(frozen=True)
class DalangReport:
    """Evaluation record for one integrability check."""

    kernel_spec: str
    alpha: float
    value: float  # math.inf when divergent
    quadrature_error: float

    @property
    def divergent(self):
        return math.isinf(self.value)

    def as_dict(self):
        return {
            "kernel": self.kernel_spec,
            "alpha": self.alpha,
            "value": "divergent" if self.divergent else self.value,
            "error_estimate": self.quadrature_error,
        }


def upsilon(kernel, beta):
    """(2*pi)^(-d) * int fhat(xi)/(beta + |xi|^2) dxi; inf when divergent."""
    if beta <= 0:
        raise ValueError(f"upsilon needs beta > 0, got {beta}")
    if not _converges(kernel, 2.0):
        return math.inf
    value, _ = _radial_quad(kernel, lambda r: 1.0 / (beta + r * r), 2.0)
    return value


def upsilon_alpha(kernel, alpha, with_error=False):
    """(2*pi)^(-d) * int fhat(xi)/(1 + |xi|^2)^(1-alpha) dxi; inf when divergent.

    alpha must lie in (0, 1); the alpha = 0 limit is upsilon(beta=1).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"upsilon_alpha needs 0 < alpha < 1, got {alpha}")
    if not _converges(kernel, 2.0 * (1.0 - alpha)):
        return (math.inf, 0.0) if with_error else math.inf
    value, err = _radial_quad(
        kernel, lambda r: (1.0 + r * r) ** (alpha - 1.0), 2.0 * (1.0 - alpha)
    )
    if err >= 1e-6 * max(1.0, value):
        raise RuntimeError(f"quadrature error {err} too large for value {value}")
    return (value, err) if with_error else value


def report(kernel, alpha):
    """DalangReport for upsilon_alpha (alpha > 0) or upsilon(1) (alpha = 0)."""
    if alpha == 0.0:
        if not _converges(kernel, 2.0):
            return DalangReport(kernel_spec_string(kernel), 0.0, math.inf, 0.0)
        val, err = _radial_quad(kernel, lambda r: 1.0 / (1.0 + r * r), 2.0)
    else:
        val, err = upsilon_alpha(kernel, alpha, with_error=True)
    return DalangReport(kernel_spec_string(kernel), alpha, val, err)


def admissible_alpha_sup(kernel, tol=1e-4):
    """sup{alpha in (0,1): upsilon_alpha finite}, by bisection on the symbolic
    convergence predicate; 0.0 if no alpha works, 1.0 if all do."""

    def ok(alpha):
        return _converges(kernel, 2.0 * (1.0 - alpha))

    if not ok(tol / 4.0):
        return 0.0
    if ok(1.0 - tol / 4.0):
        return 1.0
    lo, hi = tol / 4.0, 1.0 - tol / 4.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def constant_C(kernel, alpha):
    """Explicit growth constant

        C = (2*pi)^(-d) * 2^(-alpha) * max( int_{|xi|<=1} fhat,
                                            int_{|xi|>1} fhat / |xi|^(2(1-alpha)) ).

    Requires upsilon_alpha finite at this alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"constant_C needs 0 < alpha < 1, got {alpha}")
    if not _converges(kernel, 2.0 * (1.0 - alpha)):
        raise DivergentIntegralError(
            f"improved integrability fails at alpha={alpha} for {kernel_spec_string(kernel)}"
        )
    d = kernel.dimension
    surf = sphere_surface(d)

    def inner_integrand(r):
        return float(kernel.spectral_radial(r)) * r ** (d - 1)

    inner, _ = integrate.quad(inner_integrand, 0.0, 1.0, epsrel=_REL_TOL, epsabs=1e-14, limit=400)
    inner *= surf

    outer_scaled, _ = _radial_quad(
        kernel, lambda r: r ** (-2.0 * (1.0 - alpha)), 2.0 * (1.0 - alpha), lo=1.0
    )
    outer = outer_scaled * (2.0 * math.pi) ** d  # raw spectral mass, no (2*pi)^(-d)
    return (2.0 * math.pi) ** (-d) * 2.0 ** (-alpha) * max(inner, outer)
