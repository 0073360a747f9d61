"""Command-line front end.

Six subcommands: ``specfun`` evaluates the special functions on a grid,
``density`` builds the stationary-type densities by Mellin inversion,
``kernel`` computes transition-kernel values with error estimates,
``solve`` runs the spectral Cauchy solver from a named family or CSV
initial data, ``mc`` produces Monte Carlo estimates, and ``validate``
runs the check registry and prints a pass/fail table.

Exit codes: 0 success, 2 validation failure (including any numeric
error raised by the library), 1 usage error.

Options resolve in three layers: hard defaults, then a JSON config file
(path from ``--config`` or the REFSTABLE_CONFIG environment variable;
top-level keys apply everywhere, a section named after the subcommand
overrides them), then explicit flags.  ``--dump-config`` echoes the
resolved configuration and exits, so a run can be reproduced from its
own output.

Floating-point output: 17 significant digits in JSON (round-trip safe),
12 in CSV (readable).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional

import numpy as np

from .cauchy import NamedInitial, SolveRequest, solve
from .checks import check_names, run_checks
from .errors import NoDecayMetadata, RefStableError
from .heatkernel import KernelRequest, kernel, kernel_integral, kernel_series
from .mellin import density
from .numerics import DecayHint, Grid, GridFunction
from .specfun import AlphaParams, besselJ_alpha, calJ, g_alpha, hatJ
from .stablemc import MCConfig, config_hash, estimate_Ptf

__all__ = ["main"]

_REQUIRED = object()


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1; the stock class exits 2, which is reserved
    # here for validation failures
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


# --------------------------------------------------------------------------
# formatting
# --------------------------------------------------------------------------


def _g17(x) -> str:
    return format(float(x), ".17g")


def _g12(x) -> str:
    return format(float(x), ".12g")


def _to_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True or obj is False:
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return json.dumps(repr(x))
        return _g17(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        inner = ",\n".join(f'{pad}  {json.dumps(str(k))}: '
                           f'{_to_json(v, indent + 1)}'
                           for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [_to_json(v, indent + 1) for v in obj]
        flat = "[" + ", ".join(items) + "]"
        if len(flat) + len(pad) <= 79:
            return flat
        inner = ",\n".join(pad + "  " + it for it in items)
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(header: List[str], rows: List[List]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else _g12(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _emit(text: str, path: Optional[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


# --------------------------------------------------------------------------
# option plumbing
# --------------------------------------------------------------------------


def _floats(v) -> List[float]:
    if isinstance(v, (list, tuple, np.ndarray)):
        return [float(x) for x in v]
    return [float(p) for p in str(v).split(",") if p.strip()]


def _grid_spec(v) -> Grid:
    if isinstance(v, (list, tuple)):
        lo, hi, n = v
    else:
        parts = str(v).split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec must be lo:hi:n, got {v!r}")
        lo, hi, n = parts
    return Grid.linear(float(lo), float(hi), int(n))


def _load_config(ns) -> Dict:
    path = getattr(ns, "config", None) or os.environ.get("REFSTABLE_CONFIG")
    if not path:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    merged = {k: v for k, v in data.items() if not isinstance(v, dict)}
    section = data.get(ns.cmd)
    if isinstance(section, dict):
        merged.update(section)
    return merged


def _resolve(ns, cfg: Dict, defaults: Dict, parser: _Parser) -> Dict:
    out = {}
    for key, hard in defaults.items():
        v = getattr(ns, key, None)
        if v is None:
            v = cfg.get(key, hard)
        if v is _REQUIRED:
            parser.error(f"--{key.replace('_', '-')} is required "
                         f"(flag or config file)")
        out[key] = v
    return out


def _maybe_dump(ns, opts: Dict, cmd: str) -> bool:
    if not getattr(ns, "dump_config", False):
        return False
    payload = {"subcommand": cmd}
    payload.update({k: v for k, v in opts.items()})
    print(_to_json(payload))
    return True


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

_SPECFUN_DEFAULTS = dict(alpha=_REQUIRED, fn=_REQUIRED, x=None, grid=None,
                         k=0, format="json", output=None)


def _cmd_specfun(ns, cfg, parser) -> int:
    o = _resolve(ns, cfg, _SPECFUN_DEFAULTS, parser)
    if _maybe_dump(ns, o, "specfun"):
        return 0
    params = AlphaParams(float(o["alpha"]))
    if o["x"] is not None:
        xs = np.array(_floats(o["x"]))
    elif o["grid"] is not None:
        xs = _grid_spec(o["grid"]).points
    else:
        parser.error("specfun needs --x or --grid")
    k = int(o["k"])
    fn = o["fn"]
    if fn == "calJ":
        vals = np.atleast_1d(calJ(xs, params, k=k))
    elif fn == "hatJ":
        vals = np.atleast_1d(hatJ(xs, params, m=k))
    elif fn in ("J", "g"):
        if k != 0:
            parser.error(f"--k is not supported for --fn {fn}")
        f = besselJ_alpha if fn == "J" else g_alpha
        vals = np.atleast_1d(f(xs, params))
    else:
        parser.error(f"unknown function {fn!r}; choose from "
                     f"calJ, hatJ, J, g")
    if o["format"] == "csv":
        _emit(_csv(["x", "value"], [[x, v] for x, v in zip(xs, vals)]),
              o["output"])
    else:
        _emit(_to_json({"fn": fn, "alpha": params.alpha, "k": k,
                        "x": xs, "values": vals}), o["output"])
    return 0


_DENSITY_DEFAULTS = dict(alpha=_REQUIRED, which="lambda_X", grid=None,
                         tol=1e-9, format="csv", output=None)


def _cmd_density(ns, cfg, parser) -> int:
    o = _resolve(ns, cfg, _DENSITY_DEFAULTS, parser)
    if _maybe_dump(ns, o, "density"):
        return 0
    params = AlphaParams(float(o["alpha"]))
    if o["which"] not in ("lambda_alpha", "lambda_X", "lambda_G"):
        parser.error(f"unknown density {o['which']!r}")
    grid = _grid_spec(o["grid"]) if o["grid"] is not None \
        else Grid.logarithmic()
    dens = density(o["which"], params, grid=grid, tol=float(o["tol"]))
    ys = grid.points
    vals = dens(ys)
    if o["format"] == "json":
        _emit(_to_json({"density": o["which"], "alpha": params.alpha,
                        "y": ys, "values": vals}), o["output"])
    else:
        _emit(_csv(["y", "density"],
                   [[y, v] for y, v in zip(ys, vals)]), o["output"])
    return 0


_KERNEL_DEFAULTS = dict(alpha=_REQUIRED, t=_REQUIRED, x=_REQUIRED,
                        y=_REQUIRED, rep="auto", orders="0,0,0", tol=1e-10,
                        agree_tol=1e-6, format="csv", output=None)


def _cmd_kernel(ns, cfg, parser) -> int:
    o = _resolve(ns, cfg, _KERNEL_DEFAULTS, parser)
    if _maybe_dump(ns, o, "kernel"):
        return 0
    params = AlphaParams(float(o["alpha"]))
    orders = tuple(int(v) for v in _floats(o["orders"]))
    if len(orders) != 3:
        parser.error("--orders needs three integers k,p,m")
    tol = float(o["tol"])
    rows = []
    worst_gap = 0.0
    for t in _floats(o["t"]):
        for x in _floats(o["x"]):
            for y in _floats(o["y"]):
                if o["rep"] == "both":
                    if orders != (0, 0, 0):
                        parser.error("--rep both supports --orders 0,0,0 "
                                     "only (the series side carries no "
                                     "derivatives)")
                    vi = kernel_integral(t, x, y, params, tol=tol)
                    vs = kernel_series(t, x, y, params, tol=tol)
                    rows.append([t, x, y, vi.value, vi.error_estimate,
                                 "integral"])
                    rows.append([t, x, y, vs.value, vs.error_estimate,
                                 "series"])
                    worst_gap = max(worst_gap, abs(vi.value - vs.value))
                else:
                    req = KernelRequest(t=t, x=x, y=y, params=params,
                                        rep=o["rep"], orders=orders,
                                        tol=tol)
                    kv = kernel(req)
                    rows.append([t, x, y, kv.value, kv.error_estimate,
                                 kv.rep_used])
    header = ["t", "x", "y", "value", "error_estimate", "rep_used"]
    if o["format"] == "json":
        _emit(_to_json([dict(zip(header, r)) for r in rows]), o["output"])
    else:
        _emit(_csv(header, rows), o["output"])
    if o["rep"] == "both" and worst_gap > float(o["agree_tol"]):
        print(f"representation disagreement {worst_gap:.3e} exceeds "
              f"{float(o['agree_tol']):.1e}", file=sys.stderr)
        return 2
    return 0


_SOLVE_DEFAULTS = dict(alpha=_REQUIRED, times=_REQUIRED, grid="0:6:301",
                       family=None, q0=1.0, tau=1.0, kappa=None, beta=0.75,
                       initial_csv=None, f_class=None, eta=None,
                       decay_kind="stretched-exponential", decay_rate=None,
                       decay_power=1.0, route="auto", tol=1e-8,
                       format="csv", output=None)


def _read_samples(path: str):
    xs, fs = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                x, f = float(parts[0]), float(parts[1])
            except (ValueError, IndexError):
                continue  # header or junk line
            xs.append(x)
            fs.append(f)
    if len(xs) < 2:
        raise ValueError(f"no usable x,f(x) rows in {path}")
    order = np.argsort(xs)
    return np.array(xs)[order], np.array(fs)[order]


def _cmd_solve(ns, cfg, parser) -> int:
    o = _resolve(ns, cfg, _SOLVE_DEFAULTS, parser)
    if _maybe_dump(ns, o, "solve"):
        return 0
    params = AlphaParams(float(o["alpha"]))
    times = tuple(_floats(o["times"]))
    out_grid = _grid_spec(o["grid"])

    if (o["family"] is None) == (o["initial_csv"] is None):
        parser.error("solve needs exactly one of --family or --initial-csv")

    if o["family"] is not None:
        kappa = float(o["kappa"]) if o["kappa"] is not None else 1.5
        fam = NamedInitial(o["family"], q0=float(o["q0"]),
                           tau=float(o["tau"]), kappa=kappa,
                           beta=float(o["beta"]))
        req = SolveRequest(f=None, f_class=None, times=times,
                           output_grid=out_grid, route=o["route"],
                           family=fam, tol=float(o["tol"]))
    else:
        xs, fs = _read_samples(o["initial_csv"])
        if o["f_class"] not in ("weighted", "l2"):
            parser.error("CSV initial data needs --f-class weighted or "
                         "--f-class l2")
        if o["decay_rate"] is None:
            raise NoDecayMetadata(
                "CSV initial data carries no tail information; pass "
                "--decay-rate (and optionally --decay-kind, "
                "--decay-power) describing |f| beyond the samples")
        hint = DecayHint(o["decay_kind"], float(o["decay_rate"]),
                         float(o["decay_power"]))
        gf = GridFunction(Grid(xs, "linear"), fs, hint)
        if o["f_class"] == "weighted":
            from .operators import WeightedL2
            if o["kappa"] is None or o["eta"] is None:
                parser.error("--f-class weighted needs --kappa and --eta")
            cls = WeightedL2(kappa=float(o["kappa"]), eta=float(o["eta"]))
            cls.validate(params)
        else:
            from .operators import L2Plain
            cls = L2Plain()
        req = SolveRequest(f=gf, f_class=cls, times=times,
                           output_grid=out_grid, route=o["route"],
                           family=None, tol=float(o["tol"]))

    sols = solve(req, params)
    if o["format"] == "json":
        _emit(_to_json({"alpha": params.alpha, "times": list(times),
                        "x": out_grid.points,
                        "values": [s.values for s in sols]}), o["output"])
    else:
        rows = [[t, x, v] for t, s in zip(times, sols)
                for x, v in zip(out_grid.points, s.values)]
        _emit(_csv(["t", "x", "u"], rows), o["output"])
    return 0


_MC_DEFAULTS = dict(alpha=_REQUIRED, x0=_REQUIRED, t=_REQUIRED,
                    n_paths=10_000, n_steps=500, seed=0, statistic="eigen",
                    q0=1.0, tau=1.0, format="json", output=None)


def _cmd_mc(ns, cfg, parser) -> int:
    o = _resolve(ns, cfg, _MC_DEFAULTS, parser)
    if _maybe_dump(ns, o, "mc"):
        return 0
    params = AlphaParams(float(o["alpha"]))
    mc_cfg = MCConfig(n_paths=int(o["n_paths"]), n_steps=int(o["n_steps"]),
                      seed=int(o["seed"]), alpha=params)
    if o["statistic"] == "eigen":
        q0 = float(o["q0"])
        f = lambda v: calJ(q0 * v, params)  # noqa: E731
    elif o["statistic"] == "exp_alpha":
        tau = float(o["tau"])
        f = lambda v: np.exp(-tau * v ** params.alpha)  # noqa: E731
    else:
        parser.error(f"unknown statistic {o['statistic']!r}")
    est = estimate_Ptf(f, float(o["x0"]), float(o["t"]), mc_cfg)
    record = {"mean": est.mean, "stderr": est.stderr,
              "n_paths": est.n_paths, "config_hash": config_hash(mc_cfg)}
    if o["format"] == "csv":
        _emit(_csv(["mean", "stderr", "n_paths", "config_hash"],
                   [[record["mean"], record["stderr"],
                     str(record["n_paths"]), record["config_hash"]]]),
              o["output"])
    else:
        _emit(_to_json(record), o["output"])
    return 0


_VALIDATE_DEFAULTS = dict(alpha=1.5, quick=False, names=None, output=None,
                          format="text")


def _cmd_validate(ns, cfg, parser) -> int:
    o = _resolve(ns, cfg, _VALIDATE_DEFAULTS, parser)
    if _maybe_dump(ns, o, "validate"):
        return 0
    names = None
    if o["names"]:
        names = [n.strip() for n in str(o["names"]).split(",") if n.strip()]
        known = set(check_names(quick=bool(o["quick"])))
        bad = [n for n in names if n not in known]
        if bad:
            parser.error(f"unknown checks {bad}; available: "
                         f"{sorted(known)}")
    results = run_checks(alpha=float(o["alpha"]), quick=bool(o["quick"]),
                         names=names)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<34} {status:<5} {r.elapsed:7.2f}s  "
                     f"{r.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", o["output"])
    return 0 if n_pass == len(results) else 2


# --------------------------------------------------------------------------
# parser assembly
# --------------------------------------------------------------------------


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--alpha", type=float)
    common.add_argument("--config", help="JSON config file (also read "
                        "from REFSTABLE_CONFIG)")
    common.add_argument("--dump-config", action="store_true",
                        help="print the resolved configuration and exit")
    common.add_argument("--output", help="write to this path instead of "
                        "stdout")
    common.add_argument("--format", choices=["csv", "json", "text"])

    p = _Parser(prog="refstable",
                description="Spectral toolkit for the reflected "
                "one-sided stable semigroup")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    sp = sub.add_parser("specfun", parents=[common],
                        help="evaluate calJ / hatJ / J / g on a grid")
    sp.add_argument("--fn", choices=["calJ", "hatJ", "J", "g"])
    sp.add_argument("--x", help="comma-separated points")
    sp.add_argument("--grid", help="lo:hi:n")
    sp.add_argument("--k", type=int, help="derivative order")
    sp.set_defaults(func=_cmd_specfun)

    dp = sub.add_parser("density", parents=[common],
                        help="build lambda_alpha / lambda_X / lambda_G")
    dp.add_argument("--which",
                    choices=["lambda_alpha", "lambda_X", "lambda_G"])
    dp.add_argument("--grid", help="lo:hi:n (default: log grid)")
    dp.add_argument("--tol", type=float)
    dp.set_defaults(func=_cmd_density)

    kp = sub.add_parser("kernel", parents=[common],
                        help="transition kernel values with error columns")
    kp.add_argument("--t", help="comma-separated times")
    kp.add_argument("--x", help="comma-separated start points")
    kp.add_argument("--y", help="comma-separated end points")
    kp.add_argument("--rep", choices=["auto", "integral", "series", "both"])
    kp.add_argument("--orders", help="k,p,m derivative orders")
    kp.add_argument("--tol", type=float)
    kp.add_argument("--agree-tol", type=float, dest="agree_tol")
    kp.set_defaults(func=_cmd_kernel)

    vp = sub.add_parser("solve", parents=[common],
                        help="spectral Cauchy solver")
    vp.add_argument("--times", help="comma-separated output times")
    vp.add_argument("--grid", help="lo:hi:n output grid")
    vp.add_argument("--family", choices=["eigen", "exp_alpha",
                                         "exp_alphakappa", "exp_beta"])
    vp.add_argument("--q0", type=float)
    vp.add_argument("--tau", type=float)
    vp.add_argument("--kappa", type=float)
    vp.add_argument("--beta", type=float)
    vp.add_argument("--initial-csv", dest="initial_csv",
                    help="CSV samples x,f(x)")
    vp.add_argument("--f-class", dest="f_class",
                    choices=["weighted", "l2"])
    vp.add_argument("--eta", type=float)
    vp.add_argument("--decay-kind", dest="decay_kind",
                    choices=["power", "stretched-exponential"])
    vp.add_argument("--decay-rate", dest="decay_rate", type=float)
    vp.add_argument("--decay-power", dest="decay_power", type=float)
    vp.add_argument("--route", choices=["auto", "range_lambda",
                                        "e_alpha_kappa", "weighted",
                                        "dual"])
    vp.add_argument("--tol", type=float)
    vp.set_defaults(func=_cmd_solve)

    mp = sub.add_parser("mc", parents=[common],
                        help="Monte Carlo estimates from the pathwise "
                        "sampler")
    mp.add_argument("--x0", type=float)
    mp.add_argument("--t", type=float)
    mp.add_argument("--n-paths", dest="n_paths", type=int)
    mp.add_argument("--n-steps", dest="n_steps", type=int)
    mp.add_argument("--seed", type=int)
    mp.add_argument("--statistic", choices=["eigen", "exp_alpha"])
    mp.add_argument("--q0", type=float)
    mp.add_argument("--tau", type=float)
    mp.set_defaults(func=_cmd_mc)

    lp = sub.add_parser("validate", parents=[common],
                        help="run the check registry")
    lp.add_argument("--quick", action="store_true", default=None)
    lp.add_argument("--names", help="comma-separated subset of checks")
    lp.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if getattr(ns, "cmd", None) is None:
        parser.error("a subcommand is required "
                     "(specfun/density/kernel/solve/mc/validate)")
    try:
        cfg = _load_config(ns)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return ns.func(ns, cfg, parser)
    except RefStableError as exc:
        print(f"error [{type(exc).__module__}.{type(exc).__name__}]: "
              f"{exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
