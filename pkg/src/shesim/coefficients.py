"""Drift and diffusion coefficient families.

Coefficients are plain callables (vectorized over numpy arrays).  The named
families carry enough structure for symbolic growth classification and
blow-up criteria; arbitrary tabulated data falls back to sampling heuristics
with fixed, documented thresholds.

Two distinct slope notions are used downstream and must not be conflated:
``growth_rate_constant`` is the through-origin ratio sup |g(z) - g(0)| / |z|
that enters the moment bounds, while ``lipschitz_estimate`` is a plain
finite-difference slope bound used only for step-size sanity checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import HypothesisError, SpecParseError


class GrowthClass(enum.Enum):
    SUB_CRITICAL = "sub-critical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


class BlowupVerdict(enum.Enum):
    BLOW_UP_EXPECTED = "blow-up-expected"
    GLOBAL_EXPECTED = "global-expected"


@dataclass(frozen=True)
class Coefficient:
    """Base class; subclasses implement __call__ on scalars and arrays."""

    def __call__(self, z):
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(Coefficient):
    lam: float = 1.0

    def __call__(self, z):
        return self.lam * np.asarray(z, dtype=float)


@dataclass(frozen=True)
class Constant(Coefficient):
    """Constant coefficient, the additive-noise case."""

    value: float = 1.0

    def __call__(self, z):
        return np.full_like(np.asarray(z, dtype=float), self.value)


@dataclass(frozen=True)
class Power(Coefficient):
    """Odd power sign(z) |z|^p, p >= 1 (locally Lipschitz)."""

    exponent: float = 2.0

    def __post_init__(self):
        if self.exponent < 1.0:
            raise ValueError(f"power exponent must be >= 1, got {self.exponent}")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return np.sign(z) * np.abs(z) ** self.exponent


@dataclass(frozen=True)
class SinProduct(Coefficient):
    """z * sin(z): locally but not globally Lipschitz, linear growth."""

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return z * np.sin(z)


@dataclass(frozen=True)
class PowerLog(Coefficient):
    """|z|^b * log(1 + |z|)^a; a + b > 0 gives g(0) = 0, a + b >= 1 gives
    local Lipschitz continuity."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.a + self.b <= 0.0:
            raise ValueError("powerlog needs a + b > 0 so the value at 0 vanishes")

    def __call__(self, z):
        z = np.abs(np.asarray(z, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = z**self.b * np.log1p(z) ** self.a
        return np.where(z == 0.0, 0.0, out)


@dataclass(frozen=True, eq=False)
class Custom(Coefficient):
    """Tabulated coefficient, linearly interpolated (clamped outside the
    table).  Built from a two-column text file: z and g(z), z increasing."""

    z_table: np.ndarray = field(repr=False)
    g_table: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = np.asarray(self.z_table, dtype=float)
        g = np.asarray(self.g_table, dtype=float)
        if z.ndim != 1 or z.shape != g.shape or z.size < 2:
            raise ValueError("custom coefficient needs matching 1-d tables, length >= 2")
        if np.any(np.diff(z) <= 0.0):
            raise ValueError("custom coefficient table must have strictly increasing z")
        object.__setattr__(self, "z_table", z)
        object.__setattr__(self, "g_table", g)

    @classmethod
    def from_file(cls, path):
        data = np.loadtxt(path)
        if data.ndim != 2 or data.shape[1] != 2:
            raise SpecParseError(f"custom coefficient file {path!r} must have two columns")
        return cls(z_table=data[:, 0], g_table=data[:, 1])

    def __call__(self, z):
        return np.interp(np.asarray(z, dtype=float), self.z_table, self.g_table)


@dataclass(frozen=True)
class TruncatedCoefficient(Coefficient):
    """base evaluated at the radial clamp (1 ^ N/|z|) z: equal to base on
    [-N, N], frozen at base(+-N) outside, hence globally Lipschitz."""

    base: Coefficient
    level: float

    def __post_init__(self):
        if self.level <= 0.0:
            raise ValueError(f"truncation level must be positive, got {self.level}")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.base(np.clip(z, -self.level, self.level))


def truncate(coef, level):
    return TruncatedCoefficient(base=coef, level=level)


def evaluate(coef, z):
    """Pointwise value; scalar in, scalar out."""
    out = coef(z)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# growth-rate constants
# ---------------------------------------------------------------------------


def growth_rate_constant(coef, radius, samples=4096):
    """sup over a log-spaced grid of |g(z) - g(0)| / |z| on 0 < |z| <= radius.

    For a truncated coefficient the global sup is attained on |z| <= level, so
    radius = level recovers it.  samples >= 1000 required; the grid spans four
    decades below the radius, on both signs, endpoint included.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples for a trustworthy sup")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    zs = np.geomspace(radius * 1e-4, radius, samples)
    g0 = float(coef(0.0))
    sup = 0.0
    for signed in (zs, -zs):
        ratios = np.abs(np.asarray(coef(signed)) - g0) / np.abs(signed)
        sup = max(sup, float(np.max(ratios)))
    return sup


def lipschitz_estimate(coef, radius, samples=4096):
    """Finite-difference slope bound on [-radius, radius]; solver plumbing,
    distinct from the through-origin growth rate."""
    zs = np.linspace(-radius, radius, samples)
    vals = np.asarray(coef(zs))
    return float(np.max(np.abs(np.diff(vals) / np.diff(zs))))


# ---------------------------------------------------------------------------
# growth classification
# ---------------------------------------------------------------------------

_VANISHES, _BOUNDED, _UNBOUNDED = 0, 1, 2


def _symbolic_ratio_limit(coef, log_power):
    """Limit class of |g(z)| / (|z| (log|z|)^log_power) as |z| -> inf for the
    closed families; None when unknown."""
    if isinstance(coef, TruncatedCoefficient):
        return _VANISHES  # bounded numerator
    if isinstance(coef, (Linear, SinProduct, Constant)):
        return _VANISHES
    if isinstance(coef, Power):
        return _VANISHES if coef.exponent == 1.0 else _UNBOUNDED
    if isinstance(coef, PowerLog):
        if coef.b < 1.0:
            return _VANISHES
        if coef.b > 1.0:
            return _UNBOUNDED
        if coef.a < log_power:
            return _VANISHES
        if coef.a == log_power:
            return _BOUNDED
        return _UNBOUNDED
    return None


def _sampled_ratio_limit(coef, log_power):
    zs = 10.0 ** np.arange(2, 13, dtype=float)
    ratios = np.abs(np.asarray(coef(zs))) / (zs * np.log(zs) ** log_power)
    tail = ratios[-3:]
    if np.all(np.diff(ratios[-5:]) <= 0.0) and tail[-1] < 1e-2:
        return _VANISHES
    if np.max(tail) <= 10.0 * np.median(ratios):
        return _BOUNDED
    return _UNBOUNDED


def _ratio_limit(coef, log_power):
    limit = _symbolic_ratio_limit(coef, log_power)
    if limit is None:
        limit = _sampled_ratio_limit(coef, log_power)
    return limit


def classify_growth(b_coef, sigma_coef, alpha):
    """Joint growth class of (b, sigma): sub-critical when both normalized
    ratios |b(z)|/(|z| log|z|) and |sigma(z)|/(|z| (log|z|)^(alpha/2)) vanish
    at infinity, critical when bounded, supercritical otherwise.

    Both coefficients must vanish at 0.  Closed families are classified
    symbolically; tabulated ones by sampling at z = 10^k, k = 2..12, with
    fixed thresholds (monotone decrease below 1e-2 for vanishing; tail within
    10x the median for boundedness).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    for name, coef in (("b", b_coef), ("sigma", sigma_coef)):
        if float(coef(0.0)) != 0.0:
            raise HypothesisError(f"{name} must vanish at 0 for growth classification")
    score = max(_ratio_limit(b_coef, 1.0), _ratio_limit(sigma_coef, alpha / 2.0))
    return (GrowthClass.SUB_CRITICAL, GrowthClass.CRITICAL, GrowthClass.SUPERCRITICAL)[score]


# ---------------------------------------------------------------------------
# blow-up criteria
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OsgoodResult:
    verdict: BlowupVerdict
    integral: float  # math.inf when divergent

    @property
    def blow_up(self):
        return self.verdict is BlowupVerdict.BLOW_UP_EXPECTED


def _check_positive_increasing(coef, c, what="drift"):
    zs = np.geomspace(max(c, 1e-6), max(c, 1e-6) * 1e8, 400)
    vals = np.asarray(coef(zs))
    if np.any(vals <= 0.0):
        raise HypothesisError(f"{what} is not positive on [{c}, inf)")
    if np.any(np.diff(vals) < 0.0):
        raise HypothesisError(f"{what} is not increasing on [{c}, inf)")


def osgood_check(b_coef, c):
    """Finite-time blow-up criterion for additive noise: blow-up is expected
    iff int_c^inf du / b(u) is finite.

    Closed families are decided by tail exponents (with the integral in
    closed form or by quadrature); tabulated/unknown coefficients use
    geometric partial integrals with a Richardson-style tail extrapolation
    and a divergence test.
    """
    if c <= 0.0:
        raise ValueError("threshold c must be positive")
    _check_positive_increasing(b_coef, c)

    if isinstance(b_coef, TruncatedCoefficient):
        # frozen at b(level) beyond the clamp: integrand ~ constant, divergent
        return OsgoodResult(BlowupVerdict.GLOBAL_EXPECTED, math.inf)
    if isinstance(b_coef, (Linear, SinProduct)):
        return OsgoodResult(BlowupVerdict.GLOBAL_EXPECTED, math.inf)
    if isinstance(b_coef, Power):
        p = b_coef.exponent
        if p <= 1.0:
            return OsgoodResult(BlowupVerdict.GLOBAL_EXPECTED, math.inf)
        return OsgoodResult(BlowupVerdict.BLOW_UP_EXPECTED, c ** (1.0 - p) / (p - 1.0))
    if isinstance(b_coef, PowerLog):
        convergent = b_coef.b > 1.0 or (b_coef.b == 1.0 and b_coef.a > 1.0)
        if not convergent:
            return OsgoodResult(BlowupVerdict.GLOBAL_EXPECTED, math.inf)
        # integrate in log coordinates; u = e^v turns the slow algebraic
        # tail into clean exponential decay
        val, _ = integrate.quad(
            lambda v: math.exp(v) / float(b_coef(math.exp(v))),
            math.log(c),
            690.0,
            epsrel=1e-10,
            limit=400,
        )
        return OsgoodResult(BlowupVerdict.BLOW_UP_EXPECTED, val)

    # unknown family: partial integrals over geometrically growing windows
    edges = c * 10.0 ** np.arange(0, 9)
    increments = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda u: 1.0 / float(b_coef(u)), lo, hi, limit=200)
        increments.append(val)
    increments = np.array(increments)
    ratios = increments[1:] / increments[:-1]
    if np.all(ratios[-3:] < 0.7):
        rho = float(ratios[-1])
        tail = increments[-1] * rho / (1.0 - rho)
        return OsgoodResult(BlowupVerdict.BLOW_UP_EXPECTED, float(np.sum(increments) + tail))
    return OsgoodResult(BlowupVerdict.GLOBAL_EXPECTED, math.inf)


def salins_check(b_coef, sigma_coef, h, gamma, z_max=1e12, samples=600):
    """Comparison test against a dominating function h: requires h positive,
    increasing, with divergent reciprocal integral; returns True iff
    |b(z)| <= h(|z|) everywhere on the test grid and
    |sigma(z)| <= |z|^(1-gamma) h(|z|)^gamma for z > 1.
    """
    if not 0.0 < gamma < 0.5:
        raise ValueError(f"gamma must be in (0, 1/2), got {gamma}")
    _check_positive_increasing(h, 1.0, what="dominating function")
    if osgood_check(h, 1.0).blow_up:
        raise HypothesisError("dominating function has a convergent reciprocal integral")

    zs = np.concatenate([[0.0], np.geomspace(1e-6, z_max, samples)])
    hz = np.asarray(h(zs))
    for signed in (zs, -zs):
        if np.any(np.abs(np.asarray(b_coef(signed))) > hz * (1.0 + 1e-12)):
            return False
    zs_far = np.geomspace(1.0 + 1e-9, z_max, samples)
    envelope = zs_far ** (1.0 - gamma) * np.asarray(h(zs_far)) ** gamma
    for signed in (zs_far, -zs_far):
        if np.any(np.abs(np.asarray(sigma_coef(signed))) > envelope * (1.0 + 1e-12)):
            return False
    return True


# ---------------------------------------------------------------------------
# coefficient spec grammar: linear:lambda=<r> | power:p=<r> | zsinz
#   | powerlog:a=<r>,b=<r> | const:c=<r> | custom:file=<path>
# ---------------------------------------------------------------------------


def parse_coefficient(spec):
    text = spec.strip().replace(":", ",", 1)
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise SpecParseError(f"empty coefficient spec: {spec!r}")
    family = tokens[0].lower()
    kv = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise SpecParseError(f"expected key=value, got {tok!r} in {spec!r}")
        key, _, value = tok.partition("=")
        kv[key.strip().lower()] = value.strip()

    def num(key):
        if key not in kv:
            raise SpecParseError(f"coefficient spec {spec!r} is missing {key!r}")
        try:
            return float(kv.pop(key))
        except ValueError:
            raise SpecParseError(f"non-numeric value for {key!r} in {spec!r}") from None

    if family == "linear":
        out = Linear(lam=num("lambda"))
    elif family == "power":
        out = Power(exponent=num("p"))
    elif family == "zsinz":
        out = SinProduct()
    elif family == "powerlog":
        out = PowerLog(a=num("a"), b=num("b"))
    elif family == "const":
        out = Constant(value=num("c"))
    elif family == "custom":
        if "file" not in kv:
            raise SpecParseError(f"custom coefficient spec {spec!r} needs file=<path>")
        out = Custom.from_file(kv.pop("file"))
    else:
        raise SpecParseError(f"unknown coefficient family {family!r} in {spec!r}")
    if kv:
        raise SpecParseError(f"unknown parameters {sorted(kv)} for {family!r} in {spec!r}")
    return out


def coefficient_spec_string(coef):
    if isinstance(coef, Linear):
        return f"linear:lambda={coef.lam!r}"
    if isinstance(coef, Power):
        return f"power:p={coef.exponent!r}"
    if isinstance(coef, SinProduct):
        return "zsinz"
    if isinstance(coef, PowerLog):
        return f"powerlog:a={coef.a!r},b={coef.b!r}"
    if isinstance(coef, Constant):
        return f"const:c={coef.value!r}"
    raise TypeError(f"no canonical spec string for {coef!r}")
