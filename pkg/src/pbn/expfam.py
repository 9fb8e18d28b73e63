"""Scalar engine for the four maximum-entropy prior / activation families.

Each family is an exponential-class density on one of three canonical data
ranges (all reals, the nonnegative half line, or the unit interval):

    log p(x; a) = (a0 + a) * x + beta * x**2 + logZ(a)

with (a0, beta) frozen per family so that the a = 0 member is the MaxEnt
prior (standard normal, half normal, mean-2 exponential, or uniform).  The
activation lambda(a) is the mean of p(.; a), its derivative is the variance,
and the cumulant generating function kappa satisfies kappa' = lambda.

All functions accept scalars or numpy arrays of natural parameters and are
pure; the only stateful argument is the caller-supplied random generator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfcx, log_ndtr, ndtr

from .errors import DomainError, ParameterError, RangeError

_LOG_2PI = math.log(2.0 * math.pi)

# Largest admissible natural parameter for the exponential family (the
# density stops being normalizable at 0.5).
EXP_ALPHA_MAX = 0.5 - 1e-9

# Below this point the truncated-Gaussian moment formulas switch to an
# asymptotic series in 1/|a|; the direct expressions lose precision to
# cancellation once the mass is pinned against the origin.
_TG_SERIES_CUT = -25.0

# Half-width of the Taylor window that removes the removable singularity of
# the truncated-exponential formulas at a = 0.
_TED_TAYLOR_CUT = 1e-4


class DomainKind(enum.Enum):
    REALS = "reals"
    POSITIVE = "positive"
    UNIT = "unit"

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            return False
        if self is DomainKind.REALS:
            return True
        if self is DomainKind.POSITIVE:
            return bool(np.all(x >= 0.0))
        return bool(np.all((x >= 0.0) & (x <= 1.0)))

    def clamp_interior(self, x, eps: float = 1e-9):
        """Pull boundary points strictly inside the domain."""
        x = np.asarray(x, dtype=np.float64)
        if self is DomainKind.REALS:
            return x
        if self is DomainKind.POSITIVE:
            return np.maximum(x, eps)
        return np.clip(x, eps, 1.0 - eps)


class Family(enum.Enum):
    GAUSSIAN = "gaussian"
    TRUNC_GAUSSIAN = "trunc_gaussian"
    EXPONENTIAL = "exponential"
    TRUNC_EXPONENTIAL = "trunc_exponential"


# (domain, a0, beta) per family; these are fixed, not user-tunable.
_FAMILY_TABLE = {
    Family.GAUSSIAN: (DomainKind.REALS, 0.0, -0.5),
    Family.TRUNC_GAUSSIAN: (DomainKind.POSITIVE, 0.0, -0.5),
    Family.EXPONENTIAL: (DomainKind.POSITIVE, -0.5, 0.0),
    Family.TRUNC_EXPONENTIAL: (DomainKind.UNIT, 0.0, 0.0),
}


@dataclass(frozen=True)
class ExpFamilySpec:
    family: Family
    alpha0: float = field(default=None)  # type: ignore[assignment]
    beta: float = field(default=None)  # type: ignore[assignment]
    domain: DomainKind = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        dom, a0, b = _FAMILY_TABLE[self.family]
        for name, val, want in (("alpha0", self.alpha0, a0),
                                ("beta", self.beta, b),
                                ("domain", self.domain, dom)):
            if val is None:
                object.__setattr__(self, name, want)
            elif val != want:
                raise ParameterError(
                    f"{self.family.value}: {name}={val!r} does not match the "
                    f"fixed family table value {want!r}")

    def admissible(self, alpha) -> bool:
        alpha = np.asarray(alpha, dtype=np.float64)
        if not np.all(np.isfinite(alpha)):
            return False
        if self.family is Family.EXPONENTIAL:
            return bool(np.all(alpha < EXP_ALPHA_MAX))
        return True


GAUSSIAN = ExpFamilySpec(Family.GAUSSIAN)
TRUNC_GAUSSIAN = ExpFamilySpec(Family.TRUNC_GAUSSIAN)
EXPONENTIAL = ExpFamilySpec(Family.EXPONENTIAL)
TRUNC_EXPONENTIAL = ExpFamilySpec(Family.TRUNC_EXPONENTIAL)


def _check_alpha(spec: ExpFamilySpec, alpha):
    alpha = np.asarray(alpha, dtype=np.float64)
    if not spec.admissible(alpha):
        raise ParameterError(
            f"{spec.family.value}: inadmissible natural parameter")
    return alpha


def _scalar_or_array(value, template):
    if np.isscalar(template) or np.ndim(template) == 0:
        return float(value)
    return value


# ---------------------------------------------------------------------------
# truncated Gaussian internals
# ---------------------------------------------------------------------------

def _tg_ratio(alpha):
    """N(a)/Phi(a), the hazard of the lower-truncated unit normal."""
    alpha = np.asarray(alpha, dtype=np.float64)
    r = np.empty_like(alpha)
    neg = alpha <= 0
    if np.any(neg):
        # erfcx is stable for nonnegative arguments
        r[neg] = math.sqrt(2.0 / math.pi) / erfcx(-alpha[neg] / math.sqrt(2.0))
    if np.any(~neg):
        a = alpha[~neg]
        r[~neg] = np.exp(-0.5 * a * a) / (math.sqrt(2.0 * math.pi) * ndtr(a))
    return r


def _tg_moments(alpha):
    """(mean, variance, d variance/d a) of the truncated Gaussian.

    Series branch for deeply negative a, where the direct combinations of
    the hazard cancel catastrophically.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    lam = np.empty_like(alpha)
    lamp = np.empty_like(alpha)
    lampp = np.empty_like(alpha)

    deep = alpha < _TG_SERIES_CUT
    if np.any(~deep):
        a = alpha[~deep]
        r = _tg_ratio(a)
        m = a + r
        lam[~deep] = m
        lamp[~deep] = 1.0 - r * m
        lampp[~deep] = r * (a * a + 3.0 * a * r + 2.0 * r * r - 1.0)
    if np.any(deep):
        u = -1.0 / alpha[deep]
        u2 = u * u
        lam[deep] = u * (1.0 + u2 * (-2.0 + u2 * (10.0 + u2 * (-74.0 + 706.0 * u2))))
        lamp[deep] = u2 * (1.0 + u2 * (-6.0 + u2 * (50.0 + u2 * (-518.0 + 6354.0 * u2))))
        lampp[deep] = u2 * u * (2.0 + u2 * (-24.0 + u2 * (300.0 - 4144.0 * u2)))
    return lam, lamp, lampp


# ---------------------------------------------------------------------------
# truncated exponential internals
# ---------------------------------------------------------------------------

def _ted_moments(alpha):
    alpha = np.asarray(alpha, dtype=np.float64)
    lam = np.empty_like(alpha)
    lamp = np.empty_like(alpha)
    lampp = np.empty_like(alpha)

    tiny = np.abs(alpha) < _TED_TAYLOR_CUT
    if np.any(tiny):
        a = alpha[tiny]
        a2 = a * a
        lam[tiny] = 0.5 + a / 12.0 - a * a2 / 720.0
        lamp[tiny] = 1.0 / 12.0 - a2 / 240.0 + a2 * a2 / 6048.0
        lampp[tiny] = -a / 120.0 + a * a2 / 1512.0
    if np.any(~tiny):
        a = alpha[~tiny]
        inv = 1.0 / a
        # mean: 1/(1 - e^{-a}) - 1/a; the reciprocal term vanishes for very
        # negative a faster than float64 can see.
        recd = np.zeros_like(a)
        ok = a >= -36.0
        recd[ok] = 1.0 / -np.expm1(-a[ok])
        lam[~tiny] = recd - inv
        inv2 = inv * inv
        l1 = inv2.copy()
        l2 = -2.0 * inv2 * inv
        mid = np.abs(a) <= 100.0
        half = 0.5 * a[mid]
        sh = np.sinh(half)
        l1[mid] -= 1.0 / (4.0 * sh * sh)
        l2[mid] += np.cosh(half) / (4.0 * sh * sh * sh)
        lamp[~tiny] = l1
        lampp[~tiny] = l2
    return lam, lamp, lampp


def _ted_cgf(alpha):
    """log((e^a - 1)/a), the cumulant generating function of Uniform(0,1)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    out = np.empty_like(alpha)
    tiny = np.abs(alpha) < _TED_TAYLOR_CUT
    pos = (alpha >= _TED_TAYLOR_CUT)
    neg = (alpha <= -_TED_TAYLOR_CUT)
    if np.any(tiny):
        a = alpha[tiny]
        out[tiny] = 0.5 * a + a * a / 24.0 - a ** 4 / 2880.0
    if np.any(pos):
        a = alpha[pos]
        out[pos] = a + np.log1p(-np.exp(-a)) - np.log(a)
    if np.any(neg):
        a = alpha[neg]
        out[neg] = np.log1p(-np.exp(a)) - np.log(-a)
    return out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def log_partition(spec: ExpFamilySpec, alpha):
    """log Z(a): the additive normalizer in log p = (a0+a)x + beta x^2 + logZ."""
    alpha = _check_alpha(spec, alpha)
    fam = spec.family
    if fam is Family.GAUSSIAN:
        out = -0.5 * alpha * alpha - 0.5 * _LOG_2PI
    elif fam is Family.TRUNC_GAUSSIAN:
        out = -0.5 * alpha * alpha - 0.5 * _LOG_2PI - log_ndtr(alpha)
    elif fam is Family.EXPONENTIAL:
        out = np.log1p(-2.0 * alpha) - math.log(2.0)
    else:
        out = -_ted_cgf(alpha)
    return _scalar_or_array(out, alpha)


def log_density(spec: ExpFamilySpec, alpha, x):
    """Log of p(x; a).  Raises DomainError off-support."""
    if not spec.domain.contains(x):
        raise DomainError(f"{spec.family.value}: x outside {spec.domain.value}")
    alpha = _check_alpha(spec, alpha)
    xa = np.asarray(x, dtype=np.float64)
    out = (spec.alpha0 + alpha) * xa + spec.beta * xa * xa \
        + log_partition(spec, alpha)
    return _scalar_or_array(out, np.broadcast(alpha, xa))


def activation(spec: ExpFamilySpec, alpha):
    """lambda(a) = E[x]; strictly increasing with image in the open domain."""
    alpha = _check_alpha(spec, alpha)
    fam = spec.family
    if fam is Family.GAUSSIAN:
        out = alpha.copy()
    elif fam is Family.TRUNC_GAUSSIAN:
        out = _tg_moments(alpha)[0]
    elif fam is Family.EXPONENTIAL:
        out = 2.0 / (1.0 - 2.0 * alpha)
    else:
        out = _ted_moments(alpha)[0]
    return _scalar_or_array(out, alpha)


def activation_deriv(spec: ExpFamilySpec, alpha):
    """d lambda / d a = Var[x] > 0."""
    alpha = _check_alpha(spec, alpha)
    fam = spec.family
    if fam is Family.GAUSSIAN:
        out = np.ones_like(alpha)
    elif fam is Family.TRUNC_GAUSSIAN:
        out = _tg_moments(alpha)[1]
    elif fam is Family.EXPONENTIAL:
        lam = 2.0 / (1.0 - 2.0 * alpha)
        out = lam * lam
    else:
        out = _ted_moments(alpha)[1]
    return _scalar_or_array(out, alpha)


def activation_deriv2(spec: ExpFamilySpec, alpha):
    """d^2 lambda / d a^2, the third cumulant.  Needed by gradient code."""
    alpha = _check_alpha(spec, alpha)
    fam = spec.family
    if fam is Family.GAUSSIAN:
        out = np.zeros_like(alpha)
    elif fam is Family.TRUNC_GAUSSIAN:
        out = _tg_moments(alpha)[2]
    elif fam is Family.EXPONENTIAL:
        lam = 2.0 / (1.0 - 2.0 * alpha)
        out = 2.0 * lam * lam * lam
    else:
        out = _ted_moments(alpha)[2]
    return _scalar_or_array(out, alpha)


def cgf(spec: ExpFamilySpec, alpha):
    """kappa(a) = log E_0[e^{a x}] = logZ(0) - logZ(a)."""
    alpha = _check_alpha(spec, alpha)
    fam = spec.family
    if fam is Family.GAUSSIAN:
        out = 0.5 * alpha * alpha
    elif fam is Family.TRUNC_GAUSSIAN:
        out = math.log(2.0) + 0.5 * alpha * alpha + log_ndtr(alpha)
    elif fam is Family.EXPONENTIAL:
        out = -np.log1p(-2.0 * alpha)
    else:
        out = _ted_cgf(alpha)
    return _scalar_or_array(out, alpha)


def _activation_image(spec: ExpFamilySpec):
    if spec.family is Family.GAUSSIAN:
        return -np.inf, np.inf
    if spec.family is Family.TRUNC_EXPONENTIAL:
        return 0.0, 1.0
    return 0.0, np.inf  # TG and exponential both map onto (0, inf)


def activation_inverse(spec: ExpFamilySpec, y):
    """Solve lambda(a) = y.  y must lie strictly inside the image."""
    y = float(y)
    lo, hi = _activation_image(spec)
    if not (lo < y < hi) or not math.isfinite(y):
        raise RangeError(
            f"{spec.family.value}: {y} outside the open activation image "
            f"({lo}, {hi})")
    fam = spec.family
    if fam is Family.GAUSSIAN:
        return y
    if fam is Family.EXPONENTIAL:
        return 0.5 - 1.0 / y
    if fam is Family.TRUNC_GAUSSIAN:
        # lambda(a) > max(a, 0) and lambda(-t) < 1/t give a rigorous bracket
        blo, bhi = -2.0 / y - 1.0, y
    else:
        blo, bhi = -1.0 / y - 1.0, 1.0 / (1.0 - y) + 1.0
    from scipy.optimize import brentq
    a = brentq(lambda t: activation(spec, t) - y, blo, bhi,
               xtol=1e-14, rtol=8.9e-16, maxiter=200)
    # one guarded Newton polish; brentq already lands near machine precision
    resid = activation(spec, a) - y
    if abs(resid) > 1e-12:
        a -= resid / max(activation_deriv(spec, a), 1e-300)
    return float(a)


def _sample_trunc_gaussian(alpha, rng):
    """Draws from the truncated Gaussian: naive rejection above the origin,
    Robert's translated-exponential rejection below it."""
    shape = np.shape(alpha)
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    out = np.empty_like(alpha)
    todo = np.ones(alpha.shape, dtype=bool)
    for _ in range(10000):
        if not np.any(todo):
            return out.reshape(shape)
        idx = np.nonzero(todo)[0]
        a = alpha[idx]
        easy = a >= 0
        if np.any(easy):
            cand = rng.normal(a[easy], 1.0)
            ok = cand >= 0
            tgt = idx[easy][ok]
            out[tgt] = cand[ok]
            todo[tgt] = False
        hard = ~easy
        if np.any(hard):
            t = -a[hard]
            astar = 0.5 * (t + np.sqrt(t * t + 4.0))
            s = t + rng.exponential(1.0, size=t.shape) / astar
            accept = rng.random(t.shape) <= np.exp(-0.5 * (s - astar) ** 2)
            tgt = idx[hard][accept]
            out[tgt] = (s - t)[accept]
            todo[tgt] = False
    raise RuntimeError("truncated-Gaussian sampler failed to terminate")


def _sample_ted(alpha, rng):
    alpha = np.asarray(alpha, dtype=np.float64)
    u = rng.random(alpha.shape)
    out = np.empty_like(alpha)
    flat = np.abs(alpha) < 1e-8
    out[flat] = u[flat]
    pos = alpha >= 1e-8
    neg = alpha <= -1e-8
    if np.any(pos):
        a = alpha[pos]
        # exact inverse CDF rewritten to avoid exp overflow for large a
        out[pos] = 1.0 + np.log(u[pos] + (1.0 - u[pos]) * np.exp(-a)) / a
    if np.any(neg):
        a = -alpha[neg]
        out[neg] = -np.log(u[neg] + (1.0 - u[neg]) * np.exp(-a)) / a
    return out


def sample(spec: ExpFamilySpec, alpha, rng, size=None):
    """Draw from p(.; a).  `alpha` may be an array (one draw per entry);
    `size` is honored only for scalar alpha."""
    alpha = _check_alpha(spec, alpha)
    scalar = alpha.ndim == 0
    if size is not None:
        if not scalar:
            raise ParameterError("size is only valid with scalar alpha")
        alpha = np.full(size, float(alpha))
    fam = spec.family
    if fam is Family.GAUSSIAN:
        out = rng.normal(alpha, 1.0)
    elif fam is Family.TRUNC_GAUSSIAN:
        out = _sample_trunc_gaussian(np.atleast_1d(alpha), rng)
        out = out.reshape(np.shape(alpha))
    elif fam is Family.EXPONENTIAL:
        out = rng.exponential(2.0 / (1.0 - 2.0 * alpha))
    else:
        out = _sample_ted(np.atleast_1d(alpha), rng).reshape(np.shape(alpha))
    if scalar and size is None:
        return float(out)
    return out
