"""Command-line entry point: ``rqf <command> [options]``.

Every command prints one JSON document on stdout (sorted keys, full
resolved settings under ``"settings"``) and sends diagnostics to stderr.
Exit codes: 0 success, 1 domain error, 2 usage error.

Settings resolve as defaults <- config file <- flags.  The config file is
flat ``key = value`` text (``#`` starts a comment) given by ``--config`` or
the ``RQF_CONFIG`` environment variable.  Keys are option names with
dashes or underscores; unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import RQFError
from .model import MarketParams, drift_coefficient, regime_diagnostic

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# option schema
# --------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _omega(text: str):
    if str(text) == "optimal":
        return "optimal"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'optimal', got {text!r}")


def _flag(text) -> bool:
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


# name -> (type, default, choices, help); each command picks the options it uses
OPTIONS = {
    "sigma": (float, 0.2, None, "volatility"),
    "rate": (float, 0.05, None, "risk-free rate"),
    "q": (float, 1.0, None, "relativistic parameter (squared light speed)"),
    "kind": (str, "call", ("call", "put"), "vanilla contract type"),
    "spot": (float, 100.0, None, "spot price"),
    "strike": (float, 100.0, None, "strike price"),
    "maturity": (float, 1.0, None, "time to maturity in years"),
    "method": (str, "bs", ("bs", "heat", "kernel"), "pricing method"),
    "payoff": (str, "butterfly",
               ("call", "put", "binary", "butterfly", "indicator", "constant"),
               "terminal payoff for --method kernel"),
    "strikes": (_float_list, [90.0, 100.0, 110.0], None,
                "butterfly strikes k1,k2,k3 (kernel payoff or kernel boundary)"),
    "lo": (float, 4.5, None, "indicator lower log-price bound"),
    "hi": (float, 4.7, None, "indicator upper log-price bound"),
    "value": (float, 1.0, None, "indicator/constant/binary payout"),
    "x": (float, None, None, "evaluation log-price for --method kernel (default ln spot)"),
    "t": (float, None, None, "evaluation time for --method kernel (default maturity)"),
    "force_truncate": (float, None, None,
                       "clip the payoff to |log-price| <= Z before kernel pricing"),
    "tol": (float, None, None, "tolerance"),
    "x_min": (float, None, None, "grid lower log-price (default ln K - 8 sigma sqrt T)"),
    "x_max": (float, None, None, "grid upper log-price (default ln K + 8 sigma sqrt T)"),
    "t_min": (float, 0.0, None, "grid start time"),
    "t_max": (float, None, None, "grid end time (default T/2)"),
    "nx": (int, 41, None, "grid nodes in log-price"),
    "nt": (int, 41, None, "grid nodes in time"),
    "boundary": (str, "bs", ("bs", "kernel", "zero", "csv"), "source of Dirichlet data"),
    "boundary_file": (str, None, None, "field CSV (x,t,value) whose edges are the boundary"),
    "scheme": (str, "auto", ("auto", "central", "upwind"), "first-derivative scheme"),
    "quartic_term": (_flag, False, None,
                     "include the zeroth-order term of the direct Klein-Gordon substitution"),
    "omega": (_omega, 1.5, None, "SOR relaxation factor in (0, 2) or 'optimal'"),
    "max_iter": (int, 200000, None, "SOR iteration cap"),
    "q_list": (_float_list, [1e2, 1e3, 1e4, 1e5, 1e6], None, "ascending q values"),
    "n": (int, 401, None, "grid nodes per axis"),
    "floor_factor": (float, 10.0, None, "flag deviations within this factor of the floor"),
    "check": (str, "witt", ("witt", "rotation", "scale", "variation"), "which check"),
    "nmax": (int, 3, None, "generator indices run over -nmax..nmax"),
    "alphas": (_float_list, [0.3, 1.0], None, "rotation angles in radians"),
    "lams": (_float_list, [0.5, 1.5], None, "scale factors"),
    "budget": (float, 10.0, None, "allowed residual growth factor"),
    "input": (str, None, None, "CSV file with header date,price"),
    "model": (str, "both", ("gaussian", "cauchy", "both"), "distribution family"),
}

PARAMS = ("sigma", "rate", "q")
VANILLA = ("kind", "spot", "strike", "maturity")

COMMANDS = {
    "info": ("model constants and conformal-regime diagnostic", PARAMS, None),
    "price": ("price a claim", PARAMS + VANILLA + (
        "method", "payoff", "strikes", "lo", "hi", "value", "x", "t", "force_truncate", "tol"),
        1e-8),
    "solve": ("elliptic boundary-value solve on a log-price/time rectangle", PARAMS + VANILLA + (
        "x_min", "x_max", "t_min", "t_max", "nx", "nt", "boundary", "boundary_file", "strikes",
        "scheme", "quartic_term", "omega", "max_iter", "tol"), 1e-10),
    "limit-study": ("residual of the Black-Scholes field as q grows", (
        "sigma", "rate") + VANILLA + ("q_list", "n", "floor_factor"), None),
    "symmetry": ("symmetry checks", PARAMS + ("check", "nmax", "alphas", "lams", "budget"),
                 None),
    "fit": ("Gaussian vs Cauchy fit of log-returns", ("input", "model"), None),
}
# per-command default overrides: the grid studies need |A| h well below 1
COMMAND_DEFAULTS = {"symmetry": {"sigma": 1.0}}


def _help(name, tol_default, cmd=None):
    typ, default, choices, text = OPTIONS[name]
    default = COMMAND_DEFAULTS.get(cmd, {}).get(name, default)
    if name == "tol":
        default = tol_default
        text = "quadrature tolerance" if tol_default == 1e-8 else "solver residual tolerance"
    if default is not None:
        shown = ",".join(f"{v:g}" for v in default) if isinstance(default, list) else default
        text += f" (default: {shown})"
    return text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rqf", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"rqf {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for cmd, (desc, names, tol_default) in COMMANDS.items():
        sp = sub.add_parser(cmd, help=desc, description=desc)
        sp.add_argument("--config", metavar="PATH",
                        help="flat key = value settings file (also via RQF_CONFIG)")
        for name in names:
            typ, _, choices, _ = OPTIONS[name]
            sp.add_argument("--" + name.replace("_", "-"), dest=name, type=typ,
                            choices=choices, default=None, help=_help(name, tol_default, cmd),
                            metavar=None if choices else name.upper())
        if cmd in ("solve", "limit-study"):
            sp.add_argument("--dump", metavar="PATH", help="write plot-ready CSV to PATH")
    return parser


def read_config(path) -> dict:
    """Parse ``key = value`` lines; raises UsageError on malformed or unknown keys."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}")
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve(args: argparse.Namespace, env=None) -> dict:
    """Merge defaults, config file and flags for the chosen command."""
    env = os.environ if env is None else env
    desc, names, tol_default = COMMANDS[args.command]
    path = args.config or env.get("RQF_CONFIG")
    config = read_config(path) if path else {}
    settings = {}
    for name in names:
        typ, default, choices, _ = OPTIONS[name]
        default = COMMAND_DEFAULTS.get(args.command, {}).get(name, default)
        if name == "tol":
            default = tol_default
        value = getattr(args, name)
        if value is None and name in config:
            try:
                value = typ(config[name])
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {name!r}: {exc}")
            if choices and value not in choices:
                raise UsageError(f"config key {name!r}: expected one of {', '.join(choices)}")
        settings[name] = default if value is None else value
    return settings


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _params(s) -> MarketParams:
    return MarketParams(s["sigma"], s["rate"], s["q"])


def cmd_info(s) -> dict:
    from .gauge import Variant, gauge_params

    p = _params(s)
    A = drift_coefficient(p)
    return {
        "drift": {"re": A.re, "im": A.im, "abs2": A.abs2},
        "regime": regime_diagnostic(p).as_dict(),
        "gauge": {v.value: {"a": g.a, "b": g.b}
                  for v in Variant for g in [gauge_params(p, v)]},
        "mass": p.mass,
        "light_speed": p.light_speed,
    }


def _kernel_payoff(s):
    from . import kernel_pricer as kp

    name = s["payoff"]
    if name == "call":
        return kp.call_payoff(s["strike"])
    if name == "put":
        return kp.put_payoff(s["strike"])
    if name == "binary":
        return kp.binary_payoff(s["strike"], s["value"])
    if name == "butterfly":
        if len(s["strikes"]) != 3:
            raise UsageError("--strikes: expected three values k1,k2,k3")
        return kp.butterfly_payoff(*s["strikes"])
    if name == "indicator":
        return kp.indicator_payoff(s["lo"], s["hi"], s["value"])
    return kp.constant_payoff(s["value"])


def cmd_price(s) -> dict:
    from .classical import VanillaSpec, bs_closed_form, heat_kernel_price

    method = s["method"]
    if method in ("bs", "heat"):
        spec = VanillaSpec(s["kind"], s["strike"], s["maturity"], s["spot"])
        if method == "bs":
            return {"price": bs_closed_form(spec, s["sigma"], s["rate"])}
        return {"price": heat_kernel_price(spec, s["sigma"], s["rate"], s["tol"])}

    from .kernel_pricer import KernelQuery, price_kernel

    p = _params(s)
    x = math.log(s["spot"]) if s["x"] is None else s["x"]
    t = s["maturity"] if s["t"] is None else s["t"]
    res = price_kernel(_kernel_payoff(s), KernelQuery(x, t, p, s["tol"]),
                       force_truncate=s["force_truncate"])
    return {**res.as_dict(), "x": x, "t": t}


def _default_grid(s):
    from .gauge import Grid

    k = math.log(s["strike"])
    half = 8.0 * s["sigma"] * math.sqrt(s["maturity"])
    return Grid(
        k - half if s["x_min"] is None else s["x_min"],
        k + half if s["x_max"] is None else s["x_max"],
        s["t_min"],
        0.5 * s["maturity"] if s["t_max"] is None else s["t_max"],
        s["nx"], s["nt"],
    )


def cmd_solve(s, dump=None) -> dict:
    from . import pde_solver as pde
    from .gauge import Field2D

    p = _params(s)
    grid = _default_grid(s)
    source = s["boundary"]
    if source == "bs":
        bd = pde.bs_boundary(grid, s["kind"], s["strike"], s["maturity"], s["sigma"], s["rate"])
    elif source == "kernel":
        bd = pde.kernel_boundary(grid, _kernel_payoff({**s, "payoff": "butterfly"}), p)
    elif source == "zero":
        bd = pde.BoundaryData.from_function(grid, lambda x, t: np.zeros_like(x))
    else:
        if not s["boundary_file"]:
            raise UsageError("--boundary csv requires --boundary-file PATH")
        fld = Field2D.from_csv(s["boundary_file"])
        grid = fld.grid
        bd = pde.BoundaryData.from_field(fld)
    op = pde.discretize(p, grid, s["scheme"], quartic_term=s["quartic_term"])
    res = pde.solve_bvp(op, bd, tol=s["tol"], max_iter=s["max_iter"], omega=s["omega"])
    if dump:
        res.field.to_csv(dump)
    v = res.field.values
    j, i = grid.nt // 2, grid.nx // 2
    out = {
        **res.as_dict(),
        "operator": op.describe(),
        "grid": {k: getattr(grid, k) for k in ("x_min", "x_max", "t_min", "t_max", "nx", "nt")},
        "centre": {"x": float(grid.x[i]), "t": float(grid.t[j]), "value": float(v[j, i])},
        "max_value": float(v.max()),
        "min_value": float(v.min()),
    }
    if source == "bs":
        ref = pde.bs_field(grid, s["kind"], s["strike"], s["maturity"], s["sigma"], s["rate"])
        out["max_deviation_from_bs"] = float(np.max(np.abs(v - ref.values)))
    return out


def cmd_limit_study(s, dump=None) -> dict:
    from .classical import VanillaSpec
    from .pde_solver import default_limit_grid, limit_study

    spec = VanillaSpec(s["kind"], s["strike"], s["maturity"], s["spot"])
    base = MarketParams(s["sigma"], s["rate"], 1.0)
    grid = default_limit_grid(spec, s["sigma"], s["n"])
    study = limit_study(base, s["q_list"], grid, spec, s["floor_factor"])
    if dump:
        study.to_csv(dump)
    out = study.as_dict()
    out["grid"] = {k: getattr(grid, k) for k in ("x_min", "x_max", "t_min", "t_max", "nx", "nt")}
    out["points_used"] = sum(not r.grid_limited for r in study.rows)
    return out


def cmd_symmetry(s) -> dict:
    from . import symmetry as sym

    p = _params(s)
    check = s["check"]
    if check == "witt":
        A = sym.witt_drift(p)
        nmax = s["nmax"]
        idx = range(-nmax, nmax + 1)
        degrees = range(0, 2 * nmax + 1)
        dev = max(sym.witt_commutator_check(n, k, degrees, A) for n in idx for k in idx)
        exact = sym.exact_drift(p) is not None
        limit = 0.0 if exact else 1e-12
        return {"check": "witt", "exact_arithmetic": exact, "max_deviation": float(dev),
                "pairs": len(idx) ** 2, "verdict": "pass" if dev <= limit else "fail"}
    if check == "variation":
        r = sym.richardson_study(p)
        ok = abs(r.slope - 2.0) <= 0.2
        return {"check": "variation", "scales": list(r.scales), "errors": list(r.errors),
                "slope": r.slope, "verdict": "pass" if ok else "fail"}
    if check == "rotation":
        rows = sym.rotation_study(s["alphas"], p)
    else:
        rows = sym.scale_study(s["lams"], p)
    ok = all(r.ratio <= s["budget"] for r in rows)
    # the residual ratios only mean something when the grid resolves exp(-Re(A z))
    h = 2.0 / 80
    return {"check": check, "rows": [r.as_dict() for r in rows],
            "drift_resolution": math.sqrt(drift_coefficient(p).abs2) * h,
            "verdict": "pass" if ok else "fail"}


def cmd_fit(s) -> dict:
    from .returns_fit import fit, load_series, log_returns

    if not s["input"]:
        raise UsageError("fit requires --input PATH")
    series = load_series(s["input"])
    fits = fit(log_returns(series), s["model"])
    out = {"n_prices": len(series), "fits": [f.as_dict() for f in fits]}
    if len(fits) == 2:
        out["preferred"] = max(fits, key=lambda f: f.log_likelihood).model
    return out


HANDLERS = {
    "info": cmd_info,
    "price": cmd_price,
    "solve": cmd_solve,
    "limit-study": cmd_limit_study,
    "symmetry": cmd_symmetry,
    "fit": cmd_fit,
}


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False)


def run(argv=None, stdout=None, stderr=None, env=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        old_err, sys.stderr = sys.stderr, stderr
        try:
            args = parser.parse_args(argv)
        finally:
            sys.stderr = old_err
        settings = resolve(args, env)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    handler = HANDLERS[args.command]
    kwargs = {"dump": args.dump} if args.command in ("solve", "limit-study") else {}
    body = {"command": args.command, "settings": settings}
    try:
        body["result"] = handler(settings, **kwargs)
    except UsageError as exc:
        print(f"rqf {args.command}: error: {exc}", file=stderr)
        return EXIT_USAGE
    except (RQFError, ValueError, OverflowError, ArithmeticError) as exc:
        body["error"] = {"type": type(exc).__name__, "message": str(exc)}
        print(dumps(body), file=stdout)
        print(f"rqf {args.command}: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_DOMAIN
    print(dumps(body), file=stdout)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
