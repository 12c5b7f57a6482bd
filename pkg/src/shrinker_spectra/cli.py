"""Command line front end: ``verify``, ``entropy``, ``converge``, ``scan``, ``gibbs``.

Exit codes: 0 success, 2 configuration error, 3 eigensolver did not
converge, 4 a bound was violated beyond tolerance (or a property test
failed).

Every run writes ``effective-config.json`` (all defaults resolved) and a
``report.json`` that embeds that config and the package version; table
commands also write a CSV.  Output is a pure function of the config, so
identical configs give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    CSV_COLUMNS, THEOREMS, Resolution, build_operator, default_schedule, observed_order, richardson, scan,
    verify,
)
from .entropy import gibbs_trials, k_functional, model_density, w_functional
from .errors import ConvergenceError, ShrinkerSpectraError
from .grid import dump_matrix, dump_nodes, dump_weights, model_grid
from .models import KINDS, expression, make_model

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VIOLATION = 0, 2, 3, 4
COMMANDS = ("verify", "entropy", "converge", "scan", "gibbs")
DEFAULT_FAMILY = "(1-theta)*x^2+theta*x^4"


@dataclass(frozen=True)
class RunConfig:
    command: str = "verify"
    theorem: str = "1.2"
    model: str = "gaussian"
    n: int | None = None
    m: int | None = None
    k: int | None = None
    tau: float = 0.25
    potential: str = "x^2"
    h: tuple = ()
    levels: tuple = ()
    L: float | None = None
    domain_sizes: tuple = ()
    tol: float = 1e-10
    equality_tol: float = 5e-4
    rigidity_tol: float = 1e-6
    seed: int = 20240611
    oracle: bool = True
    out: str = "shrinker-spectra-out"
    dump_matrix: bool = False
    family: str = DEFAULT_FAMILY
    thetas: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    trials: int = 1000
    check_w: bool = False

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("h", "levels", "domain_sizes", "thetas"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        data = dict(data)
        for key in ("h", "levels", "domain_sizes", "thetas"):
            if key in data and data[key] is not None:
                data[key] = tuple(data[key])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


class ConfigError(ShrinkerSpectraError, ValueError):
    pass


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------

def resolve(cfg: RunConfig) -> RunConfig:
    """Fill model dimensions and the resolution schedule explicitly."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.model not in KINDS:
        raise ConfigError(f"unknown model {cfg.model!r}; expected one of {KINDS}")
    if cfg.theorem not in THEOREMS:
        raise ConfigError(f"unknown bound id {cfg.theorem!r}; expected one of {THEOREMS}")
    n, m, k = cfg.n, cfg.m, cfg.k
    if cfg.model == "gaussian":
        n = 1 if n is None else n
        m, k = None, None
    elif cfg.model == "sphere":
        n = 2 if n is None else n
        m, k = n, 0
    else:
        m = 2 if m is None else m
        k = 1 if k is None else k
        if n is not None and n != m + k:
            raise ConfigError(f"cylinder n={n} does not equal m + k = {m + k}")
        n = m + k
    shrinker = _shrinker(cfg.model, n, m, k, cfg.tau)
    h, levels = tuple(cfg.h), tuple(cfg.levels)
    if not h and not levels:
        sched = default_schedule(shrinker)
        h = tuple(r.h for r in sched if r.h is not None)
        levels = tuple(r.level for r in sched if r.level is not None)
    if shrinker.flat_dim and not h:
        raise ConfigError(f"{shrinker.label()} needs flat spacings (--h or --N)")
    if shrinker.kind != "gaussian" and not levels:
        raise ConfigError(f"{shrinker.label()} needs sphere levels (--levels)")
    if shrinker.flat_dim == 0:
        h = ()
    if shrinker.kind == "gaussian":
        levels = ()
    return dataclasses.replace(cfg, n=n, m=m, k=k, h=tuple(float(x) for x in h),
                               levels=tuple(int(x) for x in levels))


def _shrinker(model, n, m, k, tau):
    try:
        if model == "cylinder":
            return make_model(model, m=m, k=k, tau=tau)
        return make_model(model, n=n, tau=tau)
    except ShrinkerSpectraError as exc:
        raise ConfigError(str(exc)) from exc


def schedule_of(cfg: RunConfig) -> tuple[Resolution, ...]:
    h, lv = list(cfg.h), list(cfg.levels)
    count = max(len(h), len(lv))
    if h and lv and len(h) != len(lv):
        raise ConfigError("--h and --levels must have the same length")
    return tuple(Resolution(h=h[i] if h else None, level=lv[i] if lv else None) for i in range(count))


def potential_of(cfg: RunConfig, shrinker):
    return expression(cfg.potential, dim=max(shrinker.flat_dim, 1), shrinker=shrinker)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def _emit(cfg: RunConfig, payload: dict, table=None, table_name="summary.csv", columns=CSV_COLUMNS) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective-config.json").write_text(cfg.to_json())
    body = {"version": __version__, "command": cfg.command, "config": cfg.to_dict(), **payload}
    (out / "report.json").write_text(dumps(body))
    if table is not None:
        write_csv(out / table_name, columns, table)
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _verify_kwargs(cfg: RunConfig) -> dict:
    return {
        "resolution_schedule": schedule_of(cfg), "L": cfg.L, "domain_sizes": list(cfg.domain_sizes) or None,
        "tol": cfg.tol, "equality_tol": cfg.equality_tol, "rigidity_tol": cfg.rigidity_tol, "seed": cfg.seed,
        "oracle": cfg.oracle,
    }


def _verdict_code(verdicts) -> int:
    return EXIT_OK if all(v in ("holds", "equality_confirmed") for v in verdicts) else EXIT_VIOLATION


def cmd_verify(cfg: RunConfig, stream=sys.stdout) -> int:
    shrinker = _shrinker(cfg.model, cfg.n, cfg.m, cfg.k, cfg.tau)
    potential = potential_of(cfg, shrinker)
    report = verify(cfg.theorem, shrinker, potential, **_verify_kwargs(cfg))
    out = _emit(cfg, {"report": report.to_dict()}, report.rows())
    if cfg.dump_matrix:
        res = schedule_of(cfg)[-1]
        disc, op = build_operator(cfg.theorem, shrinker, potential, res, report.lhs["runs"][-1]["L"])
        dump_matrix(op, out / "operator.mtx")
        dump_weights(op, out / "weights.mtx")
        dump_nodes(disc, out / "nodes.csv")
        if op.companion is not None:
            dump_matrix(op.companion, out / "operator-conjugated.mtx")
    print(f"bound {report.theorem} on {report.model} with V = {report.potential}", file=stream)
    print(f"  lambda0 = {report.lambda0:.12g}  rhs = {report.rhs_value:.12g}  gap = {report.gap:.6g}"
          f"  (tol {report.combined_tol:.3g})", file=stream)
    print(f"  verdict: {report.verdict}", file=stream)
    return _verdict_code([report.verdict])


def cmd_entropy(cfg: RunConfig, stream=sys.stdout) -> int:
    shrinker = _shrinker(cfg.model, cfg.n, cfg.m, cfg.k, cfg.tau)
    mu = shrinker.mu_s
    payload = {"model": shrinker.label(), "mu_s": mu}
    print(f"{shrinker.label()}: mu_s = {mu!r}", file=stream)
    rows = []
    if cfg.check_w:
        L = cfg.L if cfg.L is not None else 10.0
        for res in schedule_of(cfg):
            N = int(round(2.0 * L / res.h)) + 1 if shrinker.flat_dim else None
            disc = model_grid(shrinker, L if shrinker.flat_dim else None, N, res.level)
            f = shrinker.sample(disc)["f"]
            W = w_functional(disc, shrinker, f, shrinker.tau)
            K = k_functional(disc, model_density(disc, shrinker, normalize=False), shrinker.tau, shrinker)
            rows.append({"resolution": res.label(), "h": disc.h, "W": W.value, "K": K.value,
                         "W_minus_mu_s": W.value - mu, "W_minus_K": W.value - K.value})
            print(f"  {res.label():>18}  W = {W.value:.10f}  K = {K.value:.10f}  "
                  f"W - mu_s = {W.value - mu:.3e}  W - K = {W.value - K.value:.1e}", file=stream)
        payload["check"] = rows
    cols = ("resolution", "h", "W", "K", "W_minus_mu_s", "W_minus_K")
    _emit(cfg, payload, rows if cfg.check_w else None, "entropy.csv", cols)
    return EXIT_OK


def cmd_converge(cfg: RunConfig, stream=sys.stdout) -> int:
    shrinker = _shrinker(cfg.model, cfg.n, cfg.m, cfg.k, cfg.tau)
    potential = potential_of(cfg, shrinker)
    report = verify(cfg.theorem, shrinker, potential, **_verify_kwargs(cfg))
    lams = [r["lambda0"] for r in report.lhs["runs"]]
    _, table, _ = richardson(lams)
    rows = []
    for j, run in enumerate(report.lhs["runs"]):
        rows.append({"h": run["h"], "level": run["level"], "lambda0": run["lambda0"],
                     "extrapolated": table[j][0],
                     "difference": lams[j] - lams[j - 1] if j else None})
    order = observed_order(lams)
    _emit(cfg, {"report": report.to_dict(), "observed_order": order, "rows": rows}, rows,
          "convergence.csv", ("h", "level", "lambda0", "extrapolated", "difference"))
    for row in rows:
        print(f"  {_fmt(row['h']):>10} {_fmt(row['level']):>4}  lambda0 = {row['lambda0']:.12g}"
              f"  extrapolated = {row['extrapolated']:.12g}", file=stream)
    print(f"  observed order = {order:.3f}", file=stream)
    return _verdict_code([report.verdict])


def cmd_scan(cfg: RunConfig, stream=sys.stdout) -> int:
    shrinker = _shrinker(cfg.model, cfg.n, cfg.m, cfg.k, cfg.tau)
    reports = scan(cfg.theorem, shrinker, cfg.family, cfg.thetas, **_verify_kwargs(cfg))
    rows = [rep.rows()[-1] for rep in reports]
    for row, rep in zip(rows, reports):
        row["theta"] = rep.meta["parameter"]
    _emit(cfg, {"reports": [r.to_dict() for r in reports]}, rows, "summary.csv", ("theta",) + CSV_COLUMNS)
    for row in rows:
        print(f"  theta = {row['theta']:<6g} lambda0 = {row['lambda0']:.10f}  gap = {row['gap']:.6g}"
              f"  {row['verdict']}", file=stream)
    return _verdict_code(r.verdict for r in reports)


def cmd_gibbs(cfg: RunConfig, stream=sys.stdout) -> int:
    result = gibbs_trials(cfg.trials, cfg.seed)
    _emit(cfg, {"gibbs": result})
    print(f"gibbs: {result['trials']} trials, {result['violations']} violations, "
          f"max equality error {result['max_equality_error']:.2e}", file=stream)
    return EXIT_OK if result["violations"] == 0 and result["max_equality_error"] <= 1e-12 else EXIT_VIOLATION


HANDLERS = {"verify": cmd_verify, "entropy": cmd_entropy, "converge": cmd_converge, "scan": cmd_scan,
            "gibbs": cmd_gibbs}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shrinker-spectra",
                                     description="Spectral bounds for Schrodinger operators on model Ricci shrinkers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON RunConfig; explicit flags override it")
        p.add_argument("--model", choices=KINDS)
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--tau", type=float)
        p.add_argument("--h", type=float, nargs="+", help="flat spacings, coarse to fine")
        p.add_argument("--N", type=int, nargs="+", help="flat node counts on [-L, L] (needs --L)")
        p.add_argument("--levels", type=int, nargs="+", help="sphere subdivision levels")
        p.add_argument("--L", type=float)
        p.add_argument("--out")
        p.add_argument("--seed", type=int)
        if name in ("verify", "converge", "scan"):
            p.add_argument("--theorem", choices=THEOREMS)
            p.add_argument("--domain-sizes", type=float, nargs="+", dest="domain_sizes")
            p.add_argument("--tol", type=float)
            p.add_argument("--equality-tol", type=float, dest="equality_tol")
            p.add_argument("--rigidity-tol", type=float, dest="rigidity_tol")
            p.add_argument("--no-oracle", action="store_false", dest="oracle", default=None)
        if name in ("verify", "converge"):
            p.add_argument("--potential")
        if name == "verify":
            p.add_argument("--dump-matrix", action="store_true", dest="dump_matrix", default=None)
        if name == "scan":
            p.add_argument("--family", help="expression in theta")
            p.add_argument("--thetas", type=float, nargs="+")
        if name == "gibbs":
            p.add_argument("--trials", type=int)
        if name == "entropy":
            p.add_argument("--check-w", action="store_true", dest="check_w", default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = RunConfig(command=args.command)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        data["command"] = args.command
        base = RunConfig.from_dict(data)
    overrides = {}
    for f in dataclasses.fields(RunConfig):
        if f.name in ("command",):
            continue
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = tuple(val) if isinstance(val, list) else val
    N = getattr(args, "N", None)
    if N:
        L = overrides.get("L", base.L)
        if L is None:
            raise ConfigError("--N needs --L")
        if any(x < 3 for x in N):
            raise ConfigError("--N values must be at least 3")
        overrides["h"] = tuple(2.0 * L / (x - 1) for x in N)
    return dataclasses.replace(base, **overrides)


def main(argv=None, stream=sys.stdout) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(config_from_args(args))
        return HANDLERS[cfg.command](cfg, stream=stream)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ShrinkerSpectraError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
