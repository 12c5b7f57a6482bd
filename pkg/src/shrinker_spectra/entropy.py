"""Entropy functionals on model shrinkers and their discrete versions.

Discrete conventions shared by every functional here:

* integrals are the lumped quadrature ``sum_i w_i (.)_i``;
* the Dirichlet energy ``int |grad phi|^2 dv`` is the edge form ``phi @ S @ phi``;
  in the W-functional the term ``int |grad f|^2 rho dv`` is evaluated as
  ``4 sqrt(rho) @ S @ sqrt(rho)``, which makes W and K agree to rounding
  whenever ``phi^2 = rho`` has discrete mass one;
* the dimensional constants of both functionals carry the discrete mass;
* ``0 ln 0 = 0``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import ConstraintError, ParameterError
from .grid import Discretization, carre_du_champ, log_density, node_laplacian, weighted_stiffness
from .models import ModelShrinker, log_sphere_area

NORM_TOL = 1e-2


@dataclass
class FunctionalReport:
    name: str
    terms: dict
    digest: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return float(sum(self.terms.values()))

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "terms": dict(self.terms), "digest": self.digest,
                **({"meta": self.meta} if self.meta else {})}


@dataclass(frozen=True)
class MetricData:
    """Dimension and scalar-curvature samples for functionals on a grid
    that does not come from a model shrinker."""

    n: int
    R: np.ndarray


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=float)).tobytes())
    return h.hexdigest()[:16]


def _metric(disc: Discretization, metric):
    if isinstance(metric, ModelShrinker):
        return metric.n, metric.sample(disc)["R"]
    if isinstance(metric, MetricData):
        R = np.broadcast_to(np.asarray(metric.R, dtype=float), (disc.n_nodes,))
        return metric.n, R
    raise ParameterError("metric must be a ModelShrinker or MetricData")


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def shrinker_entropy(shrinker: ModelShrinker) -> float:
    """Closed-form entropy mu_s of a model shrinker."""
    if shrinker.kind == "gaussian":
        return 0.0
    if shrinker.kind == "sphere":
        n = shrinker.n
        R = shrinker.scalar_curvature
        return float(shrinker.log_volume - 0.5 * n * (1.0 + math.log(2.0 * math.pi * n / R)))
    m = shrinker.m
    return float(log_sphere_area(m) - 0.5 * m * (math.log(2.0 * math.pi / (m - 1)) + 1.0))


def _check_mass(mass: float, tol: float, what: str):
    if not abs(mass - 1.0) <= tol:
        raise ConstraintError(f"{what} has total mass {mass:.12g}, expected 1 within {tol:g}")


def w_functional(disc: Discretization, metric, f_samples, tau: float, norm_tol: float = NORM_TOL) -> FunctionalReport:
    """Discrete W(g, f, tau) = int [tau (R + |grad f|^2) + f - n] (4 pi tau)^(-n/2) e^(-f) dv."""
    n, R = _metric(disc, metric)
    f = np.asarray(f_samples, dtype=float)
    if f.shape != (disc.n_nodes,):
        raise ParameterError("f samples must cover every node")
    log_rho = -0.5 * n * math.log(4.0 * math.pi * tau) - f
    rho = np.exp(log_rho)
    mass = float(disc.weights @ rho)
    _check_mass(mass, norm_tol, "(4 pi tau)^(-n/2) e^(-f) dv")
    half = np.exp(0.5 * log_rho)
    terms = {
        "dirichlet": 4.0 * tau * float(half @ (disc.stiffness @ half)),
        "curvature": tau * float(disc.weights @ (R * rho)),
        "potential": float(disc.weights @ (f * rho)),
        "dimension": -n * mass,
    }
    return FunctionalReport("W", terms, _digest(f, [tau]), {"mass": mass})


def k_functional(disc: Discretization, phi_samples, tau: float, metric, norm_tol: float = NORM_TOL) -> FunctionalReport:
    """Discrete K(g, phi, tau) = int (4 tau |grad phi|^2 + tau R phi^2 - phi^2 ln phi^2) dv - n (1 + ln(4 pi tau)/2).

    The constant is multiplied by the discrete mass int phi^2 dv (equal to
    one on the constraint set), which keeps K(phi) = W(f) an exact discrete
    identity for phi^2 = (4 pi tau)^(-n/2) e^(-f) even when quadrature leaves
    the mass slightly off one.
    """
    n, R = _metric(disc, metric)
    phi = np.asarray(phi_samples, dtype=float)
    if phi.shape != (disc.n_nodes,):
        raise ParameterError("phi samples must cover every node")
    if np.any(phi < 0):
        raise ConstraintError("phi must be nonnegative")
    p2 = phi * phi
    mass = float(disc.weights @ p2)
    _check_mass(mass, norm_tol, "int phi^2 dv")
    terms = {
        "dirichlet": 4.0 * tau * float(phi @ (disc.stiffness @ phi)),
        "curvature": tau * float(disc.weights @ (R * p2)),
        "entropy": -float(disc.weights @ _xlogx(p2)),
        "constant": -n * (1.0 + 0.5 * math.log(4.0 * math.pi * tau)) * mass,
    }
    return FunctionalReport("K", terms, _digest(phi, [tau]), {"mass": mass})


def model_density(disc: Discretization, shrinker: ModelShrinker, normalize: bool = True) -> np.ndarray:
    """phi = sqrt((4 pi tau)^(-n/2) e^(-f)) at the nodes, optionally rescaled to
    discrete mass one."""
    log_rho = log_density(disc, shrinker)
    if normalize:
        log_rho = log_rho - logsumexp(log_rho, b=disc.weights)
    return np.exp(0.5 * log_rho)


def gibbs_value(weights_mu, H_samples, t: float) -> tuple[float, np.ndarray]:
    """-ln sum_i mu_i e^(-t H_i) and the Gibbs density u^2 = e^(-tH) / sum mu e^(-tH)."""
    mu = np.asarray(weights_mu, dtype=float)
    H = np.asarray(H_samples, dtype=float)
    if not t > 0:
        raise ParameterError("t must be positive")
    if mu.shape != H.shape or np.any(mu < 0) or not np.any(mu > 0):
        raise ParameterError("mu must be a nonnegative, nonzero weight vector matching H")
    lse = logsumexp(-t * H, b=mu)
    if not np.isfinite(lse):
        raise ParameterError("partition sum is not finite and positive")
    return float(-lse), np.exp(-t * H - lse)


def gibbs_objective(weights_mu, H_samples, t: float, u2) -> float:
    """sum mu u^2 ln u^2 + t sum mu H u^2 (the quantity bounded below by the Gibbs value)."""
    mu = np.asarray(weights_mu, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    return float(mu @ _xlogx(u2) + t * (mu @ (np.asarray(H_samples, dtype=float) * u2)))


def gibbs_trials(trials: int = 1000, seed: int = 42, rel_tol: float = 1e-12) -> dict:
    """Random discrete instances of the Gibbs variational inequality.

    Each trial draws a measure mu (some atoms may be zero), an energy H, a
    temperature t and an admissible density u^2, then checks
    objective(u^2) >= value and objective(gibbs density) == value.
    """
    rng = np.random.default_rng(seed)
    violations, worst_equality, worst_margin = 0, 0.0, math.inf
    for _ in range(int(trials)):
        size = int(rng.integers(1, 40))
        mu = rng.exponential(size=size)
        mu[rng.random(size) < 0.1] = 0.0
        if not np.any(mu > 0):
            mu[0] = 1.0
        H = rng.normal(scale=float(rng.choice([0.1, 1.0, 10.0])), size=size)
        t = float(np.exp(rng.uniform(-3.0, 3.0)))
        value, density = gibbs_value(mu, H, t)
        scale = 1.0 + abs(value) + t * float(np.abs(H).max())
        eq = abs(gibbs_objective(mu, H, t, density) - value) / scale
        worst_equality = max(worst_equality, eq)
        u2 = rng.exponential(size=size) * (rng.random(size) > 0.2)
        if not np.any(u2 * mu > 0):
            u2 = np.ones(size)
        u2 = u2 / float(mu @ u2)
        margin = (gibbs_objective(mu, H, t, u2) - value) / scale
        worst_margin = min(worst_margin, margin)
        if margin < -rel_tol:
            violations += 1
    return {"trials": int(trials), "seed": int(seed), "violations": violations,
            "max_equality_error": worst_equality, "min_margin": worst_margin, "tolerance": rel_tol}


def log_sobolev_deficit(disc: Discretization, shrinker: ModelShrinker, u_samples, norm_tol: float = 1e-8) -> float:
    """4 tau int |grad u|^2 d mu - int u^2 ln u^2 d mu (nonnegative on shrinkers)."""
    u = np.asarray(u_samples, dtype=float)
    if u.shape != (disc.n_nodes,):
        raise ParameterError("u samples must cover every node")
    log_rho = log_density(disc, shrinker)
    mu = disc.weights * np.exp(log_rho)
    mass = float(mu @ (u * u))
    _check_mass(mass, norm_tol, "int u^2 d mu")
    K = weighted_stiffness(disc, log_rho)
    return 4.0 * shrinker.tau * float(u @ (K @ u)) - float(mu @ _xlogx(u * u))


def euler_lagrange_field(disc: Discretization, metric, f_samples, tau: float) -> np.ndarray:
    """tau (R + 2 Delta f - |grad f|^2) + f - n at the interior nodes."""
    n, R = _metric(disc, metric)
    f = np.asarray(f_samples, dtype=float)
    val = tau * (R + 2.0 * node_laplacian(disc, f) - carre_du_champ(disc, f)) + f - n
    return val[disc.free]


def euler_lagrange_residual(disc: Discretization, metric, f_samples, tau: float) -> float:
    """Spread (max - min) of the Euler-Lagrange expression over interior nodes.

    Zero identifies critical points of W on the normalized set; the common
    value is then mu(g, tau) for a minimizer.
    """
    val = euler_lagrange_field(disc, metric, f_samples, tau)
    return float(val.max() - val.min())
