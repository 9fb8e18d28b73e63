"""Single network layer: forward map, saddle-point solve, and log-J.

A layer is a dimension-reducing linear map z = W'x followed by a bias and a
strictly monotonic elementwise activation.  The input carries a MaxEnt prior
from `expfam`; conditioning that prior on W'x = z yields a surrogate density
whose natural parameters are W h_z, where h_z solves

    W' lambda(W h) = z.

The same h_z is the saddle point for evaluating the prior-mapped feature
density p0(z), which enters the log-J function

    log J(x) = log p0(x) - log p0(W'x).

The saddle system is the gradient of the strictly convex map
h -> sum_i kappa((W h)_i) - h'z, so damped Newton iteration converges
whenever z lies in the open feasible image; otherwise the iteration stalls
and the layer reports a sampling failure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import expfam
from .errors import DimensionError, DomainError, ModeError, SamplingFailure

# Output-activation marker for layers that apply only the bias.
LINEAR = None

_LOG_2PI = math.log(2.0 * math.pi)

# Margin kept between exponential-family pre-activations and their pole.
_EXP_MARGIN = 1e-6

# Interior clamp applied to boundary inputs before log-J evaluation.
BOUNDARY_EPS = 1e-9


class SampleMode(enum.Enum):
    SURROGATE = "surrogate"
    EXACT_GAUSSIAN = "exact_gaussian"


@dataclass(frozen=True)
class LayerSpec:
    W: np.ndarray
    b: np.ndarray
    input_family: expfam.ExpFamilySpec
    output_activation: expfam.ExpFamilySpec | None = LINEAR

    def __post_init__(self):
        W = np.ascontiguousarray(np.asarray(self.W, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64))
        if W.ndim != 2:
            raise DimensionError("W must be a 2-d array")
        n, m = W.shape
        if not (1 <= m <= n):
            raise DimensionError(f"need N >= M >= 1, got W shape {W.shape}")
        if b.shape != (m,):
            raise DimensionError(f"bias shape {b.shape} does not match M={m}")
        sv = np.linalg.svd(W, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise DimensionError("W is rank deficient")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def n_in(self) -> int:
        return self.W.shape[0]

    @property
    def n_out(self) -> int:
        return self.W.shape[1]


@dataclass
class SaddleSolution:
    h: np.ndarray
    xbar: np.ndarray
    sigma_logdet: float
    converged: bool
    iterations: int
    residual: float
    merits: list = field(default_factory=list, repr=False)


def forward(layer: LayerSpec, x):
    """Return (z, y) with z = W'x and y the biased, activated output."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.n_in,):
        raise DimensionError(f"x shape {x.shape}, expected ({layer.n_in},)")
    if not layer.input_family.domain.contains(x):
        raise DomainError("layer input outside the prior domain")
    z = layer.W.T @ x
    a = layer.b + z
    if layer.output_activation is LINEAR:
        return z, a
    return z, expfam.activation(layer.output_activation, a)


def _factor_sigma(W, lamp_u):
    """Cholesky of Sigma = W' diag(lambda'(u)) W with a jitter retry."""
    sigma = W.T @ (lamp_u[:, None] * W)
    jitter = 0.0
    for _ in range(4):
        try:
            c = cho_factor(sigma + jitter * np.eye(sigma.shape[0]), lower=True)
            return c, sigma
        except LinAlgError:
            base = 1e-10 * max(np.trace(sigma), 1e-30) / sigma.shape[0]
            jitter = base if jitter == 0.0 else jitter * 100.0
    raise SamplingFailure("saddle Hessian factorization broke down",
                          residual=np.inf)


def solve_saddle(layer: LayerSpec, z, max_iter: int = 200) -> SaddleSolution:
    """Damped Newton solve of W' lambda(W h) = z from the prior mode h = 0."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (layer.n_out,):
        raise DimensionError(f"z shape {z.shape}, expected ({layer.n_out},)")
    if not np.all(np.isfinite(z)):
        raise DomainError("z must be finite")
    W = layer.W
    fam = layer.input_family
    is_exp = fam.family is expfam.Family.EXPONENTIAL
    tol = 1e-9 * (1.0 + np.max(np.abs(z)))

    h = np.zeros(layer.n_out)
    u = W @ h
    lam_u = np.asarray(expfam.activation(fam, u))
    F = W.T @ lam_u - z
    merit = float(np.linalg.norm(F))
    merits = [merit]

    def finish(converged, iters):
        resid = float(np.max(np.abs(F)))
        if not converged:
            raise SamplingFailure(
                f"no saddle point for z (residual {resid:.3e} after "
                f"{iters} iterations)", residual=resid)
        lamp_u = np.asarray(expfam.activation_deriv(fam, u))
        c, _ = _factor_sigma(W, lamp_u)
        logdet = 2.0 * float(np.sum(np.log(np.diag(c[0]))))
        return SaddleSolution(h=h, xbar=lam_u.copy(), sigma_logdet=logdet,
                              converged=True, iterations=iters,
                              residual=resid, merits=merits)

    for it in range(max_iter):
        if np.max(np.abs(F)) <= tol:
            return finish(True, it)
        lamp_u = np.asarray(expfam.activation_deriv(fam, u))
        c, _ = _factor_sigma(W, lamp_u)
        d = cho_solve(c, -F)
        Wd = W @ d

        t = 1.0
        if is_exp:
            # keep every pre-activation below the 0.5 pole with a margin
            room = (0.5 - _EXP_MARGIN) - u
            pos = Wd > 0
            if np.any(pos):
                t = min(1.0, float(np.min(room[pos] / Wd[pos])))
            if t <= 0:
                return finish(False, it)

        improved = False
        while t > 1e-14:
            u_new = u + t * Wd
            lam_new = np.asarray(expfam.activation(fam, u_new))
            F_new = W.T @ lam_new - z
            m_new = float(np.linalg.norm(F_new))
            if np.isfinite(m_new) and m_new < merit:
                improved = True
                break
            t *= 0.5
        if not improved:
            return finish(False, it)
        h = h + t * d
        u = u_new
        lam_u = lam_new
        F = F_new
        merit = m_new
        merits.append(merit)

    if np.max(np.abs(F)) <= tol:
        return finish(True, max_iter)
    return finish(False, max_iter)


def conditional_mean(layer: LayerSpec, z):
    """MaxEnt right inverse of z: the mean lambda(W h_z) of the surrogate."""
    return solve_saddle(layer, z).xbar


def log_p0z_spa(layer: LayerSpec, z):
    """Saddle-point evaluation of the prior-mapped feature log density.

    Exact for a Gaussian prior; nearly exact for the others once the input
    dimension is moderately large.
    """
    z = np.asarray(z, dtype=np.float64)
    sol = solve_saddle(layer, z)
    u = layer.W @ sol.h
    big_k = float(np.sum(expfam.cgf(layer.input_family, u)))
    m = layer.n_out
    return big_k - float(sol.h @ z) - 0.5 * sol.sigma_logdet - 0.5 * m * _LOG_2PI


def log_prior(layer: LayerSpec, x):
    """Sum of the elementwise MaxEnt prior log density at x."""
    return float(np.sum(expfam.log_density(layer.input_family, 0.0, x)))


def log_j(layer: LayerSpec, x):
    """log p0(x) - log p0(W'x); the layer's projected-density contribution.

    Boundary inputs are pulled strictly inside the domain first so that the
    feature stays in the open feasible image.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.n_in,):
        raise DimensionError(f"x shape {x.shape}, expected ({layer.n_in},)")
    if not layer.input_family.domain.contains(x):
        raise DomainError("layer input outside the prior domain")
    xc = layer.input_family.domain.clamp_interior(x, BOUNDARY_EPS)
    z = layer.W.T @ xc
    return log_prior(layer, xc) - log_p0z_spa(layer, z)


def sample_given_z(layer: LayerSpec, z, mode: SampleMode, rng):
    """Draw one input-space sample whose feature is (exactly or nearly) z."""
    z = np.asarray(z, dtype=np.float64)
    if mode is SampleMode.EXACT_GAUSSIAN:
        if layer.input_family.family is not expfam.Family.GAUSSIAN:
            raise ModeError("exact manifold sampling needs a Gaussian prior")
        sol = solve_saddle(layer, z)
        eps = rng.standard_normal(layer.n_in)
        gram = cho_factor(layer.W.T @ layer.W, lower=True)
        perp = eps - layer.W @ cho_solve(gram, layer.W.T @ eps)
        return sol.xbar + perp
    sol = solve_saddle(layer, z)
    u = layer.W @ sol.h
    return np.asarray(expfam.sample(layer.input_family, u, rng))
