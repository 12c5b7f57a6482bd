"""Spectral lower bounds on model shrinkers: right-hand sides, eigenvalue
runs with Richardson extrapolation, and pass/fail reports.

Bound ids:

* ``1.1``: -Laplacian + V on flat R^n (Gaussian model only)
* ``1.2``: -Laplacian + R/4 + V, entropy term mu_s
* ``1.3``: as 1.2 with a general mu(g, tau); on models mu = mu_s
* ``1.4``: drifted operator -Delta_f + V on L^2(d mu)
* ``1.5``: drifted operator, bound with the inner infimum of n - f - tau R_f

Equality is judged after extrapolation in h^2 over at least three nested
resolutions; a rigidity diagnostic (a discrete Hessian norm or an
Euler-Lagrange spread) must vanish as well before a run is reported as
``equality_confirmed``.
"""
from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .eig import DEFAULT_SEED, DEFAULT_TOL, DENSE_CAP, dense_reference, smallest_eigenpair
from .entropy import euler_lagrange_residual
from .errors import ParameterError, RefusalError
from .grid import (
    Discretization, assemble_drifted, assemble_schrodinger, drift_potential, fd_hessian_norm,
    log_integrate_exp, model_grid,
)
from .models import ModelShrinker, PotentialSpec, expression, potential_samples, probe_directions, shift

THEOREMS = ("1.1", "1.2", "1.3", "1.4", "1.5")
DRIFTED = ("1.4", "1.5")
VERDICTS = ("holds", "equality_confirmed", "violated_within_tolerance_review")
EQUALITY_TOL = 5e-4
RIGIDITY_TOL = 1e-6
STRICT_FACTOR = 10.0
AGMON_TARGET = 18.0
BOUNDARY_MARGIN = 50.0
TRUNCATION_TOL = 1e-8
MAX_DOUBLINGS = 3
CSV_COLUMNS = ("theorem", "model", "potential", "resolution", "L", "lambda0", "rhs", "gap", "verdict")


# ---------------------------------------------------------------------------
# resolutions and extrapolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Resolution:
    """One mesh: spacing ``h`` of the flat directions and/or sphere ``level``."""

    h: float | None = None
    level: int | None = None

    def label(self) -> str:
        parts = []
        if self.level is not None:
            parts.append(f"level={self.level}")
        if self.h is not None:
            parts.append(f"h={self.h:g}")
        return ",".join(parts)

    def to_dict(self) -> dict:
        return {"h": self.h, "level": self.level}


def default_schedule(shrinker: ModelShrinker) -> tuple[Resolution, ...]:
    if shrinker.kind == "sphere":
        return tuple(Resolution(level=lv) for lv in (3, 4, 5))
    if shrinker.kind == "cylinder":
        return tuple(Resolution(h=h, level=lv) for lv, h in ((1, 0.5), (2, 0.25), (3, 0.125)))
    h0 = {1: 0.125, 2: 0.25}.get(shrinker.n, 0.5)
    return tuple(Resolution(h=h0 / 2 ** j) for j in range(3))


def richardson(values, ratio: float = 2.0, order: int = 2):
    """Romberg table for a sequence computed at h, h/ratio, h/ratio^2, ...
    with an error expansion in powers h^order, h^(2 order), ...

    Returns ``(estimate, table, error_estimate)`` where the error estimate
    is the difference between the last two diagonal entries.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise ParameterError("nothing to extrapolate")
    table = [vals]
    for k in range(1, len(vals)):
        prev = table[-1]
        fac = ratio ** (order * k)
        table.append([prev[j + 1] + (prev[j + 1] - prev[j]) / (fac - 1.0) for j in range(len(prev) - 1)])
    est = table[-1][-1]
    err = abs(est - table[-2][-1]) if len(table) > 1 else math.inf
    return est, table, err


def observed_order(values, ratio: float = 2.0) -> float:
    """log_ratio of successive difference ratios from the last three values."""
    if len(values) < 3:
        return math.nan
    a, b, c = (float(v) for v in values[-3:])
    floor = 1e-13 * max(1.0, abs(c))
    if abs(b - c) <= floor or abs(a - b) <= floor:
        return math.nan
    return math.log(abs((a - b) / (b - c))) / math.log(ratio)


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def _finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise ParameterError(f"{what} is not finite (integral overflow or zero)")
    return value


def _log_partition(disc, potential, tau, shrinker=None, weighted=False):
    if shrinker is None:
        V = potential.evaluate(disc.flat_coords, count=disc.n_nodes)
    else:
        V = potential_samples(potential, shrinker, disc)
    with np.errstate(over="ignore"):
        val = log_integrate_exp(disc, -4.0 * tau * V, shrinker if weighted else None)
    return _finite(val, "log of the integral of exp(-4 tau V)")


def _dimension_term(n, tau):
    return n / (4.0 * tau) * (1.0 + 0.5 * math.log(4.0 * math.pi * tau))


def rhs_frank_terms(n: int, tau: float, potential: PotentialSpec, disc: Discretization) -> dict:
    if disc.sphere_dim or disc.flat_coords is None or disc.flat_coords.shape[1] != n:
        raise ParameterError(f"the flat bound needs an {n}-dimensional flat grid")
    return {
        "log_partition": -_log_partition(disc, potential, tau) / (4.0 * tau),
        "dimension": _dimension_term(n, tau),
    }


def rhs_frank(n: int, tau: float, potential: PotentialSpec, disc: Discretization) -> float:
    """-(1/4tau) ln int e^(-4 tau V) dv + (n/4tau)(1 + ln(4 pi tau)/2)."""
    return float(sum(rhs_frank_terms(n, tau, potential, disc).values()))


def rhs_thm_1_2_terms(shrinker: ModelShrinker, potential: PotentialSpec, disc: Discretization,
                      mu: float | None = None) -> dict:
    tau = shrinker.tau
    mu = shrinker.mu_s if mu is None else float(mu)
    return {
        "log_partition": -_log_partition(disc, potential, tau, shrinker) / (4.0 * tau),
        "entropy": mu / (4.0 * tau),
        "dimension": _dimension_term(shrinker.n, tau),
    }


def rhs_thm_1_2(shrinker: ModelShrinker, potential: PotentialSpec, disc: Discretization) -> float:
    """Flat bound plus mu_s/(4 tau)."""
    return float(sum(rhs_thm_1_2_terms(shrinker, potential, disc).values()))


def rhs_thm_1_3(shrinker: ModelShrinker, potential: PotentialSpec, disc: Discretization,
                mu: float | None = None) -> float:
    """As :func:`rhs_thm_1_2` with mu(g, tau) in place of mu_s (defaults to mu_s)."""
    return float(sum(rhs_thm_1_2_terms(shrinker, potential, disc, mu).values()))


def rhs_thm_1_4_terms(shrinker: ModelShrinker, potential: PotentialSpec, disc: Discretization) -> dict:
    tau = shrinker.tau
    return {"log_partition": -_log_partition(disc, potential, tau, shrinker, weighted=True) / (4.0 * tau)}


def rhs_thm_1_4(shrinker: ModelShrinker, potential: PotentialSpec, disc: Discretization) -> float:
    """-(1/4tau) ln int e^(-4 tau V) d mu."""
    return float(sum(rhs_thm_1_4_terms(shrinker, potential, disc).values()))


def weighted_curvature_gap(shrinker: ModelShrinker, disc: Discretization) -> np.ndarray:
    """n - f - tau R_f at every node, R_f = R + 2 Laplacian(f) - |grad f|^2."""
    geo = shrinker.sample(disc)
    tau = shrinker.tau
    return (shrinker.n - geo["f"] - tau * geo["R"] - 2.0 * tau * geo["laplacian_f"]
            + tau * geo["grad_f_sq"])


def rhs_thm_1_5_terms(shrinker: ModelShrinker, potential: PotentialSpec, disc: Discretization,
                      mu: float | None = None, form: str = "printed") -> dict:
    """Terms of the drifted bound with the weighted-curvature infimum (id 1.5).

    ``form="printed"`` adds mu(g, tau) with coefficient one; ``form="derived"``
    uses mu/(4 tau), the coefficient produced when the log-Sobolev step is
    divided through by 4 tau.  The inner infimum over normalized u is the
    minimum of n - f - tau R_f over the free nodes.
    """
    if form not in ("printed", "derived"):
        raise ParameterError("form must be 'printed' or 'derived'")
    tau = shrinker.tau
    mu = shrinker.mu_s if mu is None else float(mu)
    gap = weighted_curvature_gap(shrinker, disc)[disc.free]
    return {
        "log_partition": rhs_thm_1_4_terms(shrinker, potential, disc)["log_partition"],
        "entropy": mu if form == "printed" else mu / (4.0 * tau),
        "infimum": float(gap.min()) / (4.0 * tau),
    }


def rhs_thm_1_5(shrinker: ModelShrinker, potential: PotentialSpec, disc: Discretization,
                mu: float | None = None, form: str = "printed") -> float:
    return float(sum(rhs_thm_1_5_terms(shrinker, potential, disc, mu, form).values()))


def rhs_terms(theorem: str, shrinker: ModelShrinker, potential: PotentialSpec, disc: Discretization) -> dict:
    if theorem == "1.1":
        return rhs_frank_terms(shrinker.n, shrinker.tau, potential, disc)
    if theorem in ("1.2", "1.3"):
        return rhs_thm_1_2_terms(shrinker, potential, disc)
    if theorem == "1.4":
        return rhs_thm_1_4_terms(shrinker, potential, disc)
    if theorem == "1.5":
        return rhs_thm_1_5_terms(shrinker, potential, disc)
    raise ParameterError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    theorem: str
    model: str
    potential: str
    geometry_digest: str
    potential_digest: str
    lhs: dict
    rhs: dict
    gap: float
    combined_tol: float
    equality_tol: float
    equality_expected: bool
    rigidity: dict | None
    verdict: str
    strict: bool
    truncation: dict | None
    schedule: list
    notes: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def lambda0(self) -> float:
        return self.lhs["extrapolated"]

    @property
    def rhs_value(self) -> float:
        return self.rhs["extrapolated"]

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "theorem": self.theorem, "model": self.model, "potential": self.potential,
            "geometry_digest": self.geometry_digest, "potential_digest": self.potential_digest,
            "schedule": self.schedule, "lhs": self.lhs, "rhs": self.rhs, "gap": self.gap,
            "combined_tol": self.combined_tol, "equality_tol": self.equality_tol,
            "equality_expected": self.equality_expected, "rigidity": self.rigidity,
            "verdict": self.verdict, "strict": self.strict, "truncation": self.truncation,
            "notes": list(self.notes), "meta": self.meta,
        }

    def rows(self) -> list[dict]:
        """Summary-table rows: one per resolution and one extrapolated row."""
        out = []
        for run, rhs in zip(self.lhs["runs"], self.rhs["values"]):
            out.append({
                "theorem": self.theorem, "model": self.model, "potential": self.potential,
                "resolution": run["resolution"], "L": run["L"], "lambda0": run["lambda0"], "rhs": rhs,
                "gap": run["lambda0"] - rhs, "verdict": "",
            })
        L = self.lhs["runs"][-1]["L"] if self.lhs["runs"] else None
        out.append({
            "theorem": self.theorem, "model": self.model, "potential": self.potential,
            "resolution": "extrapolated", "L": L, "lambda0": self.lambda0, "rhs": self.rhs_value,
            "gap": self.gap, "verdict": self.verdict,
        })
        return out


def decide_verdict(gap: float, combined_tol: float, equality_tol: float, rigidity: dict | None):
    """Return ``(verdict, strict)``."""
    rigid = rigidity is not None and rigidity["value"] <= rigidity["threshold"]
    if abs(gap) <= equality_tol and rigid:
        return "equality_confirmed", False
    if gap >= -combined_tol:
        return "holds", bool(gap > STRICT_FACTOR * combined_tol)
    return "violated_within_tolerance_review", False


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def _check_combination(theorem, shrinker, potential):
    if theorem not in THEOREMS:
        raise ParameterError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
    if theorem == "1.1" and shrinker.kind != "gaussian":
        raise ParameterError("bound 1.1 applies to flat R^n only (the gaussian model)")
    if not isinstance(potential, PotentialSpec):
        raise ParameterError("potential must be a PotentialSpec")


def _effective(theorem, shrinker, potential):
    """The multiplication term of the plain-L^2 operator, as a function of
    flat coordinates."""
    if theorem in DRIFTED:
        return lambda pts: potential.evaluate(pts, shrinker) + drift_potential(shrinker, pts)
    quarter_R = 0.25 * shrinker.scalar_curvature
    return lambda pts: potential.evaluate(pts, shrinker) + quarter_R


def _ray_values(func, dim, radii):
    dirs = probe_directions(dim)
    pts = (dirs[:, None, :] * radii[None, :, None]).reshape(-1, dim)
    with np.errstate(all="ignore"):
        vals = np.asarray(func(pts), dtype=float)
    return vals.reshape(len(dirs), len(radii))


def _containment_radius(func, dim, rise=40.0, cap=1e3):
    """Smallest radius on a 1/4 lattice where the effective potential has
    risen by ``rise`` above its minimum along every probe ray."""
    radii = np.arange(0.25, cap + 0.25, 0.25)
    vals = _ray_values(func, dim, radii)
    floor = np.nanmin(vals[:, 0])
    ok = np.all(vals - floor >= rise, axis=0)
    if not ok.any():
        raise RefusalError("effective potential does not rise enough to truncate the domain")
    return float(radii[np.argmax(ok)])


def margin_radius(func, dim, energy, margin=BOUNDARY_MARGIN, cap=1e3):
    """Smallest radius on a 1/4 lattice where the effective potential exceeds
    ``energy + margin`` along every probe ray."""
    radii = np.arange(0.25, cap + 0.25, 0.25)
    vals = _ray_values(func, dim, radii)
    ok = np.all(vals >= energy + margin, axis=0)
    if not ok.any():
        raise RefusalError("effective potential never clears the boundary margin")
    return float(radii[np.argmax(ok)])


def agmon_radius(func, dim, energy, target=AGMON_TARGET, cap=1e3, step=0.01):
    """Smallest radius where the Agmon distance int sqrt((W - energy)_+) reaches
    ``target`` along every probe ray; eigenfunctions have decayed by about
    exp(-target) beyond it."""
    radii = np.arange(step, cap + step, step)
    vals = _ray_values(func, dim, radii)
    dist = np.cumsum(np.sqrt(np.clip(vals - energy, 0.0, None)), axis=1) * step
    ok = np.all(dist >= target, axis=0)
    if not ok.any():
        raise RefusalError("eigenfunction decay too slow to truncate the domain")
    return float(radii[np.argmax(ok)])


def _round_up(L, h0):
    return math.ceil(L / h0 - 1e-9) * h0


def build_operator(theorem, shrinker, potential, res: Resolution, L=None):
    """Discretization and LHS operator of ``theorem`` at one resolution."""
    N = None
    if shrinker.flat_dim:
        if res.h is None:
            raise ParameterError(f"{shrinker.label()} needs a flat spacing h in every resolution")
        N = int(round(2.0 * L / res.h)) + 1
    if shrinker.kind != "gaussian" and res.level is None:
        raise ParameterError(f"{shrinker.label()} needs a sphere level in every resolution")
    disc = model_grid(shrinker, L if shrinker.flat_dim else None, N, res.level)
    if theorem in DRIFTED:
        op = assemble_drifted(disc, shrinker, potential)
    else:
        op = assemble_schrodinger(disc, shrinker, potential)
    return disc, op


def _solve(op, tol, seed):
    target = op.companion if op.companion is not None else op
    return smallest_eigenpair(target, tol=tol, seed=seed)


def _rigidity(theorem, shrinker, potential, disc, threshold):
    tau = shrinker.tau
    V = potential_samples(potential, shrinker, disc)
    if theorem in ("1.1", "1.2"):
        f = shrinker.sample(disc)["f"]
        return {"name": "hessian(4 tau V - f)", "value": fd_hessian_norm(disc, 4.0 * tau * V - f),
                "threshold": threshold}
    if theorem == "1.3":
        C = _log_partition(disc, potential, tau) - 0.5 * shrinker.n * math.log(4.0 * math.pi * tau)
        val = euler_lagrange_residual(disc, shrinker, 4.0 * tau * V + C, tau)
        return {"name": "euler_lagrange_spread(4 tau V + C)", "value": val, "threshold": threshold}
    if theorem == "1.4":
        return {"name": "hessian(V)", "value": fd_hessian_norm(disc, V), "threshold": threshold}
    return None


def verify(theorem_id: str, shrinker: ModelShrinker, potential: PotentialSpec, resolution_schedule=None, *,
           L: float | None = None, domain_sizes=None, tol: float = DEFAULT_TOL,
           equality_tol: float = EQUALITY_TOL, rigidity_tol: float = RIGIDITY_TOL,
           seed: int = DEFAULT_SEED, oracle: bool = True, dense_cap: int = DENSE_CAP) -> BoundReport:
    """Compare the extrapolated lowest eigenvalue with the selected bound.

    ``resolution_schedule`` is a sequence of :class:`Resolution` from coarse
    to fine with spacings halving; at least three are required.  On
    noncompact models the half width ``L`` starts where the effective
    potential clears the ground-state estimate by ``BOUNDARY_MARGIN`` and the
    Agmon distance reaches ``AGMON_TARGET`` (or at the given ``L``); it is then
    doubled at the coarsest resolution until lambda0 moves by less than
    ``TRUNCATION_TOL``.  Passing ``domain_sizes`` replaces the doubling by an
    explicit study whose largest size is used.
    """
    theorem = str(theorem_id)
    _check_combination(theorem, shrinker, potential)
    schedule = tuple(resolution_schedule) if resolution_schedule is not None else default_schedule(shrinker)
    if len(schedule) < 3:
        raise ParameterError(f"resolution schedule has {len(schedule)} entries; at least 3 are needed")
    schedule = tuple(r if isinstance(r, Resolution) else Resolution(**r) for r in schedule)
    notes = []

    truncation = None
    if shrinker.flat_dim:
        h0 = schedule[0].h
        if h0 is None or not h0 > 0:
            raise ParameterError("flat spacing h must be positive")
        dim = shrinker.flat_dim
        eff = _effective(theorem, shrinker, potential)
        def coarse(size):
            _, op = build_operator(theorem, shrinker, potential, schedule[0], size)
            return _solve(op, tol, seed).lambda0

        accepted = True
        if domain_sizes:
            sizes = sorted({_round_up(float(x), h0) for x in domain_sizes})
            if len(sizes) < 2:
                raise ParameterError("truncation study needs at least two distinct domain sizes")
            lams = [coarse(size) for size in sizes]
            L = sizes[-1]
        else:
            if L is None:
                L0 = _round_up(_containment_radius(eff, dim), h0)
                est = coarse(L0)
                L = max(margin_radius(eff, dim, est), agmon_radius(eff, dim, est))
            L = _round_up(float(L), h0)
            sizes, lams = [L, 2 * L], [coarse(L), coarse(2 * L)]
            while abs(lams[-2] - lams[-1]) > TRUNCATION_TOL * max(1.0, abs(lams[-1])):
                if len(sizes) > MAX_DOUBLINGS:
                    accepted = False
                    notes.append("domain doubling did not settle lambda0 within the truncation tolerance")
                    break
                sizes.append(2 * sizes[-1])
                lams.append(coarse(sizes[-1]))
            L = sizes[-2] if accepted else sizes[-1]
        slack = 1e-9 * max(1.0, abs(lams[-1]))
        monotone = all(lams[i] >= lams[i + 1] - slack for i in range(len(lams) - 1))
        i = sizes.index(L)
        estimate = abs(lams[i] - lams[i + 1]) if i + 1 < len(lams) else abs(lams[-2] - lams[-1])
        truncation = {"L": sizes, "lambda0": lams, "resolution": schedule[0].label(), "monotone": monotone,
                      "estimate": estimate, "accepted_L": L, "accepted": accepted}
        if not monotone:
            notes.append("lambda0 decreased when the domain grew larger; check the truncation")

    runs, rhs_vals, oracle_vals = [], [], []
    disc = None
    terms = {}
    for res in schedule:
        disc, op = build_operator(theorem, shrinker, potential, res, L)
        sol = _solve(op, tol, seed)
        entry = {
            "resolution": res.label(), "h": res.h, "level": res.level, "L": L if shrinker.flat_dim else None,
            "nodes": disc.n_nodes, "unknowns": op.size, "lambda0": sol.lambda0, "residual": sol.residual,
            "threshold": sol.threshold, "iterations": sol.iterations, "method": sol.method,
        }
        if oracle and op.size <= dense_cap:
            target = op.companion if op.companion is not None else op
            entry["oracle"] = float(dense_reference(target, cap=dense_cap)[0])
            oracle_vals.append(entry["oracle"])
        runs.append(entry)
        terms = rhs_terms(theorem, shrinker, potential, disc)
        rhs_vals.append(float(sum(terms.values())))

    lam_ext, lam_table, lam_err = richardson([r["lambda0"] for r in runs])
    rhs_ext, rhs_table, rhs_err = richardson(rhs_vals)
    lhs = {
        "runs": runs, "extrapolated": lam_ext, "table": lam_table, "error_estimate": lam_err,
        "observed_order": observed_order([r["lambda0"] for r in runs]),
    }
    if len(oracle_vals) == len(runs):
        o_ext, _, o_err = richardson(oracle_vals)
        lhs["oracle"] = {"values": oracle_vals, "extrapolated": o_ext, "error_estimate": o_err,
                         "max_difference": float(max(abs(a["lambda0"] - a["oracle"]) for a in runs))}
    rhs = {"values": rhs_vals, "extrapolated": rhs_ext, "table": rhs_table, "error_estimate": rhs_err,
           "terms": terms}
    if theorem == "1.5":
        derived = [rhs_thm_1_5(shrinker, potential, disc, form="derived")]
        rhs["derived_form_finest"] = derived[0]
        rhs["printed_minus_derived"] = rhs_vals[-1] - derived[0]
        if shrinker.kind == "gaussian":
            rhs["consistency_with_1.4"] = rhs_vals[-1] - rhs_thm_1_4(shrinker, potential, disc)
        if shrinker.mu_s != 0.0:
            notes.append("bound 1.5 uses mu with coefficient one; rhs.derived_form_finest has the "
                         "mu/(4 tau) variant")

    gap = lam_ext - rhs_ext
    eig_err = max(r["residual"] for r in runs)
    combined = lam_err + rhs_err + eig_err + (truncation["estimate"] if truncation else 0.0)
    combined = max(combined, 1e-10 * (1.0 + abs(lam_ext)))
    rigidity = _rigidity(theorem, shrinker, potential, disc, rigidity_tol)
    verdict, strict = decide_verdict(gap, combined, equality_tol, rigidity)
    equality_expected = rigidity is not None and rigidity["value"] <= rigidity["threshold"]

    gdig = hashlib.sha256(
        f"{shrinker!r}|{[r.to_dict() for r in schedule]}|{L!r}".encode()).hexdigest()[:16]
    return BoundReport(
        theorem=theorem, model=shrinker.label(), potential=potential.describe(), geometry_digest=gdig,
        potential_digest=potential.digest(), lhs=lhs, rhs=rhs, gap=gap, combined_tol=combined,
        equality_tol=equality_tol, equality_expected=equality_expected, rigidity=rigidity, verdict=verdict,
        strict=strict, truncation=truncation, schedule=[r.to_dict() for r in schedule], notes=notes,
        meta={"tol": tol, "seed": seed, "operator": "drifted" if theorem in DRIFTED else "schrodinger"},
    )


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

def worker_count(jobs: int) -> int:
    env = os.environ.get("SHRINKER_SPECTRA_THREADS")
    try:
        cap = int(env) if env else (os.cpu_count() or 1)
    except ValueError:
        raise ParameterError(f"SHRINKER_SPECTRA_THREADS must be an integer, got {env!r}") from None
    return max(1, min(cap, jobs))


def renormalizing_shift(theorem, shrinker, potential, reference: Discretization, target_log: float) -> float:
    """Constant c with ln int e^(-4 tau (V + c)) equal to ``target_log`` on ``reference``."""
    weighted = theorem in DRIFTED
    log_int = _log_partition(reference, potential, shrinker.tau, shrinker, weighted=weighted)
    return (log_int - target_log) / (4.0 * shrinker.tau)


def scan(theorem_id: str, shrinker: ModelShrinker, potential_family, parameter_grid, *,
         renormalize: bool = True, reference_L: float = 10.0, workers: int | None = None,
         **verify_kwargs) -> list[BoundReport]:
    """Verify a one-parameter family of potentials.

    ``potential_family`` is either a callable ``theta -> PotentialSpec`` or
    an expression string in the variable ``theta``.  With ``renormalize``
    every member is shifted by a constant so that int e^(-4 tau V) matches
    the first member on a fixed reference grid; the right-hand side is then
    the same for every member and the gap isolates the eigenvalue.
    """
    params = [float(t) for t in parameter_grid]
    if not params:
        raise ParameterError("empty parameter grid")
    if isinstance(potential_family, str):
        text = potential_family
        dim = max(shrinker.flat_dim, 1)
        family = lambda t: expression(text, dim=dim, shrinker=shrinker, bindings={"theta": t})  # noqa: E731
    elif callable(potential_family):
        family = potential_family
    else:
        raise ParameterError("potential family must be an expression string or a callable")
    members = [family(t) for t in params]
    shifts = [0.0] * len(members)
    if renormalize:
        sched = verify_kwargs.get("resolution_schedule") or default_schedule(shrinker)
        finest = sched[-1] if isinstance(sched[-1], Resolution) else Resolution(**sched[-1])
        N = int(round(2.0 * reference_L / finest.h)) + 1 if shrinker.flat_dim else None
        ref = model_grid(shrinker, reference_L if shrinker.flat_dim else None, N, finest.level)
        weighted = str(theorem_id) in DRIFTED
        target = _log_partition(ref, members[0], shrinker.tau, shrinker, weighted=weighted)
        shifts = [renormalizing_shift(theorem_id, shrinker, m, ref, target) for m in members]
        members = [shift(m, c) if c != 0.0 else m for m, c in zip(members, shifts)]

    def job(i):
        rep = verify(theorem_id, shrinker, members[i], **verify_kwargs)
        rep.meta.update({"parameter": params[i], "shift": shifts[i]})
        return rep

    n_workers = worker_count(len(members)) if workers is None else max(1, int(workers))
    if n_workers == 1:
        return [job(i) for i in range(len(members))]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(job, range(len(members))))
