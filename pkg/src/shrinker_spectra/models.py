"""Closed-form model Ricci shrinkers and potential families.

Three model shrinkers are provided:

* ``gaussian``: flat R^n with f = |x|^2/(4 tau)
* ``sphere``: the round S^n of radius sqrt(2(n-1) tau), f constant
* ``cylinder``: S^m(r) x R^k with r = sqrt(2(m-1) tau), f = |y|^2/(4 tau)

In every case ``f_offset`` is fixed analytically so that the weighted
measure (4 pi tau)^(-n/2) e^(-f) dv has total mass one.

Points on the noncompact factor are handled as *flat coordinates*; the
sphere factor never enters f, R or |grad f|^2, so its coordinates are only
validated, not used.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import gammaln

from . import expr as _expr
from .errors import DomainError, ExpressionError, ParameterError, TabulationMiss

KINDS = ("gaussian", "sphere", "cylinder")


def sphere_area(n: int) -> float:
    """Area of the unit n-sphere in R^(n+1)."""
    return math.exp(log_sphere_area(n))


def log_sphere_area(n: int) -> float:
    return math.log(2.0) + 0.5 * (n + 1) * math.log(math.pi) - gammaln(0.5 * (n + 1))


@dataclass(frozen=True)
class ModelShrinker:
    kind: str
    n: int
    tau: float
    m: int | None = None
    k: int = 0
    f_offset: float = 0.0

    @property
    def radius(self) -> float | None:
        """Radius of the sphere factor (None for the Gaussian)."""
        if self.kind == "gaussian":
            return None
        return math.sqrt(2.0 * (self.m - 1) * self.tau)

    @property
    def flat_dim(self) -> int:
        return {"gaussian": self.n, "sphere": 0, "cylinder": self.k}[self.kind]

    @property
    def compact(self) -> bool:
        return self.kind == "sphere"

    @property
    def scalar_curvature(self) -> float:
        if self.kind == "gaussian":
            return 0.0
        return self.m / (2.0 * self.tau)

    @property
    def mu_s(self) -> float:
        from .entropy import shrinker_entropy

        return shrinker_entropy(self)

    @property
    def hamilton_constant(self) -> float:
        """The constant tau (R + |grad f|^2) - f."""
        return self.tau * self.scalar_curvature - self.f_offset

    @property
    def log_volume(self) -> float:
        """log of the Riemannian volume (compact models only)."""
        if self.kind != "sphere":
            return math.inf
        return log_sphere_area(self.n) + self.n * math.log(self.radius)

    def label(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian(n={self.n},tau={self.tau:g})"
        if self.kind == "sphere":
            return f"sphere(n={self.n},tau={self.tau:g})"
        return f"cylinder(m={self.m},k={self.k},tau={self.tau:g})"

    # -- pointwise fields on flat coordinates ------------------------------
    def fields(self, flat: np.ndarray | None, count: int | None = None) -> dict[str, np.ndarray]:
        """Closed-form (f, |grad f|^2, Laplacian f, R) at a batch of points.

        ``flat`` has shape (N, flat_dim); for the sphere pass ``None`` and a
        point ``count``.
        """
        tau = self.tau
        if self.flat_dim == 0:
            if count is None:
                count = 0 if flat is None else len(flat)
            ones = np.ones(count)
            return {
                "f": self.f_offset * ones,
                "grad_f_sq": 0.0 * ones,
                "laplacian_f": 0.0 * ones,
                "R": self.scalar_curvature * ones,
            }
        flat = np.asarray(flat, dtype=float)
        if flat.ndim != 2 or flat.shape[1] != self.flat_dim:
            raise DomainError(f"{self.label()} expects flat coordinates of dimension {self.flat_dim}")
        r2 = np.einsum("ij,ij->i", flat, flat)
        npts = len(flat)
        return {
            "f": r2 / (4.0 * tau) + self.f_offset,
            "grad_f_sq": r2 / (4.0 * tau * tau),
            "laplacian_f": np.full(npts, self.flat_dim / (2.0 * tau)),
            "R": np.full(npts, self.scalar_curvature),
        }

    def sample(self, disc) -> dict[str, np.ndarray]:
        """Fields at every node of a discretization built for this model."""
        check_compatible(self, disc)
        return self.fields(disc.flat_coords, count=disc.n_nodes)


def _check_tau(tau):
    if not (isinstance(tau, (int, float)) and math.isfinite(tau) and tau > 0):
        raise ParameterError(f"tau must be a positive real, got {tau!r}")
    return float(tau)


def _check_int(name, value, lo):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < lo:
        raise ParameterError(f"{name} must be an integer >= {lo}, got {value!r}")
    return int(value)


def make_gaussian(n: int, tau: float) -> ModelShrinker:
    # the Gaussian integral of (4 pi tau)^(-n/2) e^(-|x|^2/4tau) is already 1
    return ModelShrinker("gaussian", _check_int("n", n, 1), _check_tau(tau))


def make_sphere(n: int, tau: float) -> ModelShrinker:
    n = _check_int("n", n, 2)
    tau = _check_tau(tau)
    r = math.sqrt(2.0 * (n - 1) * tau)
    # f_offset = log((4 pi tau)^(-n/2) Vol(S^n(r)))
    offset = log_sphere_area(n) + n * math.log(r) - 0.5 * n * math.log(4.0 * math.pi * tau)
    return ModelShrinker("sphere", n, tau, m=n, k=0, f_offset=offset)


def make_cylinder(m: int, k: int, tau: float) -> ModelShrinker:
    m = _check_int("m", m, 2)
    k = _check_int("k", k, 1)
    tau = _check_tau(tau)
    r = math.sqrt(2.0 * (m - 1) * tau)
    # the R^k Gaussian factor integrates to (4 pi tau)^(k/2) and cancels
    offset = log_sphere_area(m) + m * math.log(r) - 0.5 * m * math.log(4.0 * math.pi * tau)
    return ModelShrinker("cylinder", m + k, tau, m=m, k=k, f_offset=offset)


def make_model(kind: str, *, n: int | None = None, tau: float = 1.0, m: int | None = None,
               k: int | None = None) -> ModelShrinker:
    if kind == "gaussian":
        return make_gaussian(n if n is not None else 1, tau)
    if kind == "sphere":
        return make_sphere(n if n is not None else 2, tau)
    if kind == "cylinder":
        return make_cylinder(m if m is not None else 2, k if k is not None else 1, tau)
    raise ParameterError(f"unknown model kind {kind!r}; expected one of {KINDS}")


def _split_point(shrinker: ModelShrinker, point):
    """Validate a chart point and return its flat coordinates (1-D array)."""
    if shrinker.kind == "gaussian":
        x = np.atleast_1d(np.asarray(point, dtype=float))
        if x.shape != (shrinker.n,) or not np.all(np.isfinite(x)):
            raise DomainError(f"expected a point of R^{shrinker.n}, got {point!r}")
        return x
    if shrinker.kind == "sphere":
        _check_sphere_point(point, shrinker.n)
        return np.zeros(0)
    try:
        p, y = point
    except (TypeError, ValueError):
        raise DomainError("cylinder points are pairs (p, y)") from None
    _check_sphere_point(p, shrinker.m)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (shrinker.k,) or not np.all(np.isfinite(y)):
        raise DomainError(f"expected y in R^{shrinker.k}, got {y!r}")
    return y


def _check_sphere_point(p, m):
    p = np.asarray(p, dtype=float)
    if p.shape != (m + 1,) or abs(np.linalg.norm(p) - 1.0) > 1e-12:
        raise DomainError(f"sphere points are unit vectors in R^{m + 1}, got {p!r}")


def eval_geometry(shrinker: ModelShrinker, point) -> tuple[float, float, float, float]:
    """Exact (f, |grad f|^2, Laplacian f, R) at one chart point.

    Gaussian points are vectors of R^n, sphere points unit vectors of
    R^(n+1) (use ``disc.unit_point(i)`` for mesh vertex ids) and cylinder
    points pairs ``(p, y)``.
    """
    flat = _split_point(shrinker, point)
    vals = shrinker.fields(flat[None, :] if flat.size else None, count=1)
    return tuple(float(vals[key][0]) for key in ("f", "grad_f_sq", "laplacian_f", "R"))


def check_compatible(shrinker: ModelShrinker, disc) -> None:
    fd = 0 if disc.flat_coords is None else disc.flat_coords.shape[1]
    if fd != shrinker.flat_dim:
        raise DomainError(f"{disc.label} has {fd} flat directions, {shrinker.label()} needs {shrinker.flat_dim}")
    if shrinker.kind != "gaussian":
        if disc.sphere_dim != shrinker.m:
            raise DomainError(f"{disc.label} carries no S^{shrinker.m} factor")
        if abs(disc.sphere_radius - shrinker.radius) > 1e-12 * shrinker.radius:
            raise DomainError(
                f"sphere factor radius {disc.sphere_radius} != model radius {shrinker.radius}; use rescale_sphere")
    elif disc.sphere_dim:
        raise DomainError("the Gaussian shrinker has no sphere factor")


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

PROBE_RADII = (10.0, 100.0, 1000.0)


def probe_directions(dim: int) -> np.ndarray:
    eye = np.eye(dim)
    dirs = [eye, -eye]
    if dim > 1:
        d = np.ones(dim) / math.sqrt(dim)
        dirs += [d[None, :], -d[None, :]]
        rng = np.random.default_rng(1234)
        extra = rng.standard_normal((4, dim))
        dirs.append(extra / np.linalg.norm(extra, axis=1)[:, None])
    return np.vstack(dirs)


def probe_confining(func, dim: int) -> bool:
    """Heuristic divergence test along fixed rays.

    ``func`` maps an (N, dim) array of flat points to values. A function is
    declared confining when along every probe ray it is finite and strictly
    increasing at radii 10, 100, 1000 with a total rise above one.
    """
    if dim == 0:
        return True
    dirs = probe_directions(dim)
    with np.errstate(all="ignore"):
        vals = [np.asarray(func(r * dirs), dtype=float) * np.ones(len(dirs)) for r in PROBE_RADII]
    v = np.vstack(vals)
    if not np.all(np.isfinite(v)):
        return False
    return bool(np.all(np.diff(v, axis=0) > 0) and np.all(v[-1] - v[0] > 1.0))


@dataclass(frozen=True)
class PotentialSpec:
    """A declarative potential V on the flat coordinates of a model.

    Use the constructors :func:`constant`, :func:`affine`, :func:`harmonic`,
    :func:`polynomial`, :func:`tabulated` and :func:`expression`.
    """

    family: str
    params: Mapping = field(default_factory=dict)
    confining: bool = False
    lower_bound: float = -math.inf
    text: str = ""

    def describe(self) -> str:
        return self.text or self.family

    def digest(self) -> str:
        h = hashlib.sha256(self.describe().encode())
        if self.family == "tabulated":
            h.update(np.ascontiguousarray(self.params["values"]).tobytes())
        return h.hexdigest()[:16]

    def __call__(self, flat, shrinker: ModelShrinker | None = None, count: int | None = None):
        return self.evaluate(flat, shrinker, count)

    def evaluate(self, flat, shrinker: ModelShrinker | None = None, count: int | None = None) -> np.ndarray:
        """V at a batch of flat coordinates (shape (N, d)); ``flat`` may be
        None on the sphere, in which case ``count`` gives the point count."""
        if flat is None:
            flat = np.zeros((count or 0, 0))
        flat = np.asarray(flat, dtype=float)
        if flat.ndim == 1:
            flat = flat[:, None]
        npts = len(flat)
        p = self.params
        fam = self.family
        if fam == "constant":
            return np.full(npts, float(p["c"]))
        if fam == "affine":
            b = np.atleast_1d(np.asarray(p["b"], dtype=float))
            if not np.any(b):
                return np.full(npts, float(p["c"]))
            _need_dim(flat, len(b), fam)
            return flat @ b + float(p["c"])
        if fam == "harmonic":
            b = np.atleast_1d(np.asarray(p["center"], dtype=float))
            _need_dim(flat, len(b), fam)
            d = flat - b
            return float(p["stiffness"]) * np.einsum("ij,ij->i", d, d) + float(p["offset"])
        if fam == "polynomial":
            out = np.zeros(npts)
            for expo, coef in p["terms"]:
                _need_dim(flat, len(expo), fam)
                term = np.full(npts, float(coef))
                for axis, e in enumerate(expo):
                    if e:
                        term = term * flat[:, axis] ** e
                out = out + term
            return out
        if fam == "tabulated":
            index = p["index"]
            idx = np.empty(npts, dtype=int)
            for i, row in enumerate(flat):
                key = (row + 0.0).tobytes()  # folds -0.0 into 0.0
                if key not in index:
                    raise TabulationMiss(f"no tabulated value at {row.tolist()}")
                idx[i] = index[key]
            return np.asarray(p["values"])[idx]
        if fam == "expression":
            env = dict(p.get("bindings", {}))
            env.update(coordinate_env(flat))
            if shrinker is not None:
                env["tau"] = shrinker.tau
                env["f"] = shrinker.fields(flat if shrinker.flat_dim else None, count=npts)["f"]
            try:
                with np.errstate(all="ignore"):
                    val = _expr.evaluate(p["tree"], env)
            except ExpressionError:
                raise
            return np.broadcast_to(np.asarray(val, dtype=float), (npts,)).copy()
        raise ParameterError(f"unknown potential family {fam!r}")


def coordinate_env(flat: np.ndarray) -> dict[str, np.ndarray]:
    """Names for flat coordinates: x1, x2, ... and x, y, z for the first three.

    With a single flat direction ``y`` is an alias of ``x`` (the line factor
    of a cylinder is usually written y).
    """
    d = flat.shape[1]
    env = {f"x{j + 1}": flat[:, j] for j in range(d)}
    for j, name in enumerate("xyz"[:d]):
        env[name] = flat[:, j]
    if d == 1:
        env["y"] = flat[:, 0]
    return env


def _need_dim(flat, d, fam):
    if flat.shape[1] != d:
        raise DomainError(f"{fam} potential of dimension {d} evaluated on {flat.shape[1]}-dimensional points")


def constant(c: float) -> PotentialSpec:
    return PotentialSpec("constant", {"c": float(c)}, confining=False, lower_bound=float(c), text=f"{float(c)!r}")


def affine(b, c: float = 0.0) -> PotentialSpec:
    b = tuple(float(v) for v in np.atleast_1d(b))
    lb = float(c) if not any(b) else -math.inf
    return PotentialSpec("affine", {"b": b, "c": float(c)}, confining=False, lower_bound=lb,
                         text=f"affine(b={list(b)},c={float(c)!r})")


def harmonic(center=(0.0,), stiffness: float = 1.0, offset: float = 0.0) -> PotentialSpec:
    """V(x) = stiffness |x - center|^2 + offset."""
    center = tuple(float(v) for v in np.atleast_1d(center))
    stiffness = float(stiffness)
    if stiffness <= 0:
        raise ParameterError("harmonic stiffness must be positive")
    return PotentialSpec("harmonic", {"center": center, "stiffness": stiffness, "offset": float(offset)},
                         confining=True, lower_bound=float(offset),
                         text=f"harmonic(center={list(center)},k={stiffness!r},c={float(offset)!r})")


def polynomial(coeffs) -> PotentialSpec:
    """Polynomial potential.

    ``coeffs`` is either a sequence ``[c0, c1, ...]`` in one variable or a
    mapping from exponent tuples to coefficients.
    """
    if isinstance(coeffs, Mapping):
        terms = tuple((tuple(int(e) for e in k), float(v)) for k, v in sorted(coeffs.items()))
    else:
        terms = tuple(((i,), float(c)) for i, c in enumerate(coeffs) if c != 0)
    if not terms:
        terms = (((0,), 0.0),)
    dim = len(terms[0][0])
    if any(len(e) != dim for e, _ in terms):
        raise ParameterError("polynomial exponent tuples must share one dimension")
    lb = -math.inf
    if dim == 1:
        c = np.zeros(max(e[0] for e, _ in terms) + 1)
        for (e,), v in terms:
            c[e] += v
        deg = len(c) - 1
        confining = deg >= 2 and deg % 2 == 0 and c[-1] > 0
        if confining:
            crit = np.roots(np.polynomial.polynomial.polyder(c)[::-1])
            crit = crit[np.abs(crit.imag) < 1e-9].real
            vals = np.polynomial.polynomial.polyval(crit, c) if crit.size else np.array([c[0]])
            lb = float(vals.min()) - 1e-9 * (1.0 + abs(float(vals.min())))
        elif deg == 0:
            lb = float(c[0])
    else:
        spec = PotentialSpec("polynomial", {"terms": terms})
        confining = probe_confining(lambda pts: spec.evaluate(pts), dim)
    text = "+".join(f"{v!r}*" + "*".join(f"x{j + 1}^{e}" for j, e in enumerate(k) if e) for k, v in terms)
    return PotentialSpec("polynomial", {"terms": terms}, confining=bool(confining), lower_bound=lb,
                         text=f"poly({text})")


def tabulated(coords, values, confining: bool = False) -> PotentialSpec:
    """Potential given by samples on an exact set of flat coordinates."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    values = np.asarray(values, dtype=float)
    if len(values) != len(coords):
        raise ParameterError("tabulated coordinates and values differ in length")
    index = {(row + 0.0).tobytes(): i for i, row in enumerate(coords)}
    return PotentialSpec("tabulated", {"index": index, "values": values}, confining=bool(confining),
                         lower_bound=float(values.min()) if values.size else -math.inf,
                         text=f"tabulated[{len(values)}]")


def expression(text: str, dim: int = 1, shrinker: ModelShrinker | None = None,
               bindings: Mapping[str, float] | None = None) -> PotentialSpec:
    """Potential from a string in the :mod:`shrinker_spectra.expr` grammar.

    ``dim`` is the number of flat coordinates; confinement is decided by
    :func:`probe_confining`.
    """
    tree = _expr.parse(text)
    bindings = {k: float(v) for k, v in (bindings or {}).items()}
    known = set(coordinate_env(np.zeros((1, dim)))) | set(bindings) | {"tau", "f"}
    unknown = _expr.variables(tree) - known
    if unknown:
        raise ExpressionError(f"unknown variable(s) {sorted(unknown)} in {text!r}")
    if {"tau", "f"} & _expr.variables(tree) and shrinker is None:
        raise ExpressionError(f"{text!r} refers to the model (f or tau) but no model was given")
    spec = PotentialSpec("expression", {"tree": tree, "bindings": bindings}, text=text)
    if shrinker is not None and shrinker.compact:
        confining = True
    else:
        confining = probe_confining(lambda pts: spec.evaluate(pts, shrinker), dim)
    canonical = _expr.to_string(tree)
    if bindings:
        canonical += " with " + ",".join(f"{k}={v!r}" for k, v in sorted(bindings.items()))
    return PotentialSpec("expression", {"tree": tree, "bindings": bindings}, confining=confining,
                         text=canonical)


def eval_potential(potential: PotentialSpec, point, shrinker: ModelShrinker | None = None) -> float:
    """V at a single point (a vector of flat coordinates, or a chart point
    when ``shrinker`` is given)."""
    if shrinker is not None:
        flat = _split_point(shrinker, point)
        if flat.size == 0:
            return float(potential.evaluate(None, shrinker, count=1)[0])
        return float(potential.evaluate(flat[None, :], shrinker)[0])
    flat = np.atleast_1d(np.asarray(point, dtype=float))
    return float(potential.evaluate(flat[None, :])[0])


def potential_samples(potential: PotentialSpec, shrinker: ModelShrinker, disc) -> np.ndarray:
    """V at every node of ``disc``."""
    return potential.evaluate(disc.flat_coords, shrinker, count=disc.n_nodes)


def shift(potential: PotentialSpec, c: float) -> PotentialSpec:
    """V + c, keeping the family where that is possible."""
    c = float(c)
    p = potential.params
    fam = potential.family
    if fam == "constant":
        return constant(p["c"] + c)
    if fam == "affine":
        return affine(p["b"], p["c"] + c)
    if fam == "harmonic":
        return harmonic(p["center"], p["stiffness"], p["offset"] + c)
    if fam == "tabulated":
        out = dict(p)
        out["values"] = np.asarray(p["values"]) + c
        return PotentialSpec("tabulated", out, potential.confining, potential.lower_bound + c,
                             f"{potential.text}+{c!r}")
    if fam == "polynomial":
        terms = list(p["terms"])
        dim = len(terms[0][0])
        terms.append(((0,) * dim, c))
        merged: dict = {}
        for e, v in terms:
            merged[e] = merged.get(e, 0.0) + v
        return polynomial(merged)
    if fam == "expression":
        tree = _expr.Binary("+", p["tree"], _expr.Num(c))
        return PotentialSpec("expression", {"tree": tree, "bindings": p.get("bindings", {})},
                             potential.confining, potential.lower_bound + c, f"({potential.text})+{c!r}")
    raise ParameterError(f"cannot shift family {fam!r}")


__all__ = [
    "ModelShrinker", "PotentialSpec", "make_gaussian", "make_sphere", "make_cylinder", "make_model",
    "eval_geometry", "eval_potential", "constant", "affine", "harmonic", "polynomial", "tabulated",
    "expression", "probe_confining", "sphere_area", "potential_samples", "shift",
]
