"""Command-line interface.

Every subcommand accepts the global flags ``--seed``, ``--workers``,
``--out`` and ``--config FILE``.  For the single-run subcommands the
config is a flat YAML mapping of flag names (dashes or underscores) to
values; ``sweep`` and ``toric-scaling`` take the sweep schema documented in
:mod:`entropic.harness`.  Explicit flags always override the file.

Failures exit non-zero with ``{"error": ..., "message": ...}`` on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any

import numpy as np

from . import __version__, bkt, harness, ising, toric_static
from .kmc.scaling import lifetime_scaling_suite
from .parallel import pmap

EXIT_USAGE = 2
EXIT_FAILURE = 1


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", message)
        sys.exit(EXIT_USAGE)


def _emit_error(kind: str, message: str, **extra) -> None:
    payload = {"error": kind, "message": message}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload) + "\n")



def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


# flag name -> (type, default, help); ``None`` default means "model decides"
GLOBAL = {
    "seed": (int, 0, "master seed"),
    "workers": (int, 1, "worker processes (0 = all cores)"),
    "out": (str, "-", "output file ('-' for stdout)"),
    "config": (str, None, "YAML config file"),
}

COMMANDS: dict[str, dict[str, tuple]] = {
    "ising-scan": {
        "beta-min": (float, 1e-3, "smallest beta"),
        "beta-max": (float, 1e3, "largest beta"),
        "points": (int, 121, "log-spaced grid points"),
        "eps": (float, 1e-3, "flat-bath level spacing"),
        "J": (float, 50.0, "defect-bath level spacing"),
        "M": (int, 50, "bath states"),
        "jprime": (float, 0.0, "direct spin coupling J'"),
    },
    "toric-static": {
        "beta": (float, 1.0, "inverse temperature"),
        "eps": (float, None, "flat-bath spacing (default: plateau)"),
        "J": (float, None, "defect-bath spacing (default: plateau)"),
        "M": (int, 50, "bath states"),
        "L": (int, 8, "linear size"),
        "samples": (int, 100000, "Gibbs samples"),
    },
    "toric-kmc": {
        "L": (int, 4, "linear size"),
        "M": (int, 16, "bath states"),
        "beta": (float, 1.0, "inverse temperature"),
        "eps": (float, None, "flat-bath spacing (default: plateau)"),
        "J": (float, None, "defect-bath spacing (default: plateau)"),
        "gamma0": (float, 1.0, "bare rate"),
        "trajectories": (int, 100, "number of trajectories"),
        "t-max": (float, None, "censoring time (default 1e7/gamma0)"),
        "failure": (str, "vacuum", "failure rule: vacuum or decoded"),
    },
    "toric-scaling": {
        "L-grid": (_ints, None, "comma-separated L values"),
        "M-grid": (_ints, None, "comma-separated M values"),
        "trajectories": (int, None, "trajectories per point"),
        "failure": (str, None, "auto, vacuum or decoded"),
        "bootstrap": (int, 1000, "bootstrap replicates"),
    },
    "bkt-flow": {
        "beta": (float, 1.0, "inverse temperature"),
        "J": (float, 0.5, "stiffness Jxy"),
        "Ec": (float, 5.0, "vortex core energy"),
        "M": (int, 1, "bath states"),
        "ystar": (float, 1.0, "proliferation threshold"),
        "lmax": (float, 50.0, "maximum RG scale"),
        "samples": (int, 201, "evenly spaced output samples"),
    },
    "bkt-xi": {
        "beta-min": (float, 0.1, "smallest beta"),
        "beta-max": (float, 0.6, "largest beta"),
        "points": (int, 11, "linear grid points"),
        "J": (float, 1.0, "stiffness Jxy"),
        "Ec": (float, 8.0, "vortex core energy"),
        "M": (_ints, [1, 10, 100], "comma-separated M values"),
        "ystar": (float, 1.0, "proliferation threshold"),
        "lmax": (float, bkt.DEFAULT_L_MAX, "maximum RG scale"),
    },
    "bkt-crossover": {
        "L": (float, 1000.0, "system size"),
        "M": (int, 10, "bath states"),
        "J": (float, 1.0, "stiffness Jxy"),
        "Ec": (float, 8.0, "vortex core energy"),
        "ystar": (float, 1.0, "proliferation threshold"),
        "b-fit": (float, None, "non-universal b (default: fit on the M=1 flow)"),
    },
    "sweep": {
        "resume": (bool, False, "resume from <out>.manifest.json"),
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entropic", description="Entropic protection simulations.")
    parser.add_argument("--version", action="version", version=__version__)
    glob = argparse.ArgumentParser(add_help=False)
    for name, (typ, _, hlp) in GLOBAL.items():
        glob.add_argument(f"--{name}", type=typ, default=argparse.SUPPRESS, help=hlp)
    for name, (typ, _, hlp) in GLOBAL.items():
        parser.add_argument(f"--{name}", type=typ, default=argparse.SUPPRESS, help=hlp)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for cmd, flags in COMMANDS.items():
        sp = sub.add_parser(cmd, parents=[glob])
        for name, (typ, default, hlp) in flags.items():
            if typ is bool:
                sp.add_argument(f"--{name}", action="store_true", default=argparse.SUPPRESS, help=hlp)
            else:
                sp.add_argument(f"--{name}", type=typ, default=argparse.SUPPRESS,
                                help=f"{hlp} (default {default})", dest=name.replace("-", "_"))
    return parser


def _resolve(cmd: str, ns: argparse.Namespace) -> dict[str, Any]:
    """Defaults < config file < explicit flags."""
    explicit = {k: v for k, v in vars(ns).items() if k != "command"}
    opts = {k.replace("-", "_"): d for k, (_, d, _) in {**GLOBAL, **COMMANDS[cmd]}.items()}
    cfg_path = explicit.get("config")
    if cfg_path and cmd not in ("sweep", "toric-scaling"):
        cfg = harness.load_config(cfg_path)
        for k, v in cfg.items():
            key = k.replace("-", "_")
            if key not in opts:
                raise CliError(f"unknown config key {k!r} for {cmd}")
            opts[key] = v
    opts.update(explicit)
    return opts


def _write_rows(path, head, rows):
    harness.write_csv(path, head, [[harness._fmt(v) for v in r] for r in rows])


def _schema(command: str, params: dict, report: dict) -> dict:
    out = {"schema_version": harness.SCHEMA_VERSION, "command": command, "params": params}
    out.update(report)
    return out


def cmd_ising_scan(o):
    p = ising.ChainParams(1.0, o["eps"], o["J"], o["M"], o["jprime"])
    grid = ising.log_beta_grid(o["beta_min"], o["beta_max"], o["points"])
    rows = ising.xi_scan(p, grid)
    _write_rows(o["out"], ["inv_beta", "xi", "regime"], [tuple(r) for r in rows])


def _toric_params(o):
    kw = {k: o[k] for k in ("eps", "J") if o.get(k) is not None}
    return toric_static.ToricParams.plateau(M=o["M"], L=o["L"], gamma0=o.get("gamma0", 1.0),
                                            beta=o["beta"], **kw)


def cmd_toric_static(o):
    p = _toric_params(o)
    if o["samples"] < 1:
        raise CliError("samples must be >= 1")
    rep = toric_static.static_report(p, o["samples"], o["seed"])
    params = {"beta": p.beta, "eps": p.eps, "J": p.J, "M": p.M, "L": p.L,
              "samples": o["samples"], "seed": o["seed"]}
    harness.write_json(o["out"], _schema("toric-static", params, rep))


def cmd_toric_kmc(o):
    p = _toric_params(o)
    n = o["trajectories"]
    if n < 1:
        raise CliError("trajectories must be >= 1")
    if o["failure"] not in ("vacuum", "decoded"):
        raise CliError("failure must be 'vacuum' or 'decoded'")
    spec = harness.SweepSpec("toric-kmc", grids={}, trajectories=n, seed=o["seed"],
                             workers=o["workers"],
                             params={"beta": p.beta, "eps": p.eps, "J": p.J, "M": p.M, "L": p.L,
                                     "gamma0": p.gamma0},
                             options={"t_max": o["t_max"], "failure": o["failure"]})
    jobs = harness.build_jobs(spec)
    results = pmap(harness.run_job, jobs, o["workers"])
    head = harness.header(spec)
    keep = ["seed", "failure_time", "sector", "class", "censored", "n_cr", "n_dif", "n_ann"]
    idx = [head.index(c) for c in keep]
    harness.write_csv(o["out"], keep, [[r[i] for i in idx] for r in results])


def _sweep_spec(o, model=None) -> harness.SweepSpec:
    if not o.get("config"):
        raise CliError("--config FILE is required")
    cfg = harness.load_config(o["config"])
    if model is not None:
        cfg.setdefault("model", model)
        if cfg["model"] != model:
            raise CliError(f"config model must be {model!r}")
    explicit = {k: o[k] for k in ("seed", "workers") if k in o.get("_explicit", ())}
    out = o["out"] if "out" in o.get("_explicit", ()) else None
    return harness.spec_from_config(cfg, out=out, **explicit)


def cmd_sweep(o):
    spec = _sweep_spec(o)
    if spec.out in (None, "-"):
        spec.out = None
        head, rows = harness.run_sweep(spec)
        harness.write_csv("-", head, rows)
    else:
        harness.run_sweep(spec, resume=bool(o["resume"]))


def cmd_toric_scaling(o):
    if o.get("config"):
        spec = _sweep_spec(o, "toric-kmc")
        grids = spec.grids
        traj = spec.trajectories
        params = dict(harness.MODEL_PARAMS["toric-kmc"])
        params.update(spec.params)
        seed, workers = spec.seed, spec.workers
        failure = spec.options.get("failure", "auto")
        t_max = spec.options.get("t_max")
        out = spec.out if spec.out else o["out"]
    else:
        grids, traj, params = {}, 100, dict(harness.MODEL_PARAMS["toric-kmc"])
        seed, workers, failure, t_max, out = o["seed"], o["workers"], "auto", None, o["out"]
    L_grid = o["L_grid"] or grids.get("L") or [params["L"]]
    M_grid = o["M_grid"] or grids.get("M") or [params["M"]]
    traj = o["trajectories"] or traj
    failure = o["failure"] or failure
    template = harness.make_params("toric-kmc", {**params, "L": L_grid[0], "M": M_grid[0]})
    if params.get("eps") is None:
        # keep beta*eps*M deep in the plateau at the largest M
        template = toric_static.ToricParams.plateau(M=max(M_grid), L=L_grid[0], gamma0=template.gamma0,
                                                    beta=template.beta, J=template.J)
    rep = lifetime_scaling_suite(template, L_grid, M_grid, traj, master_seed=seed, failure=failure,
                                 t_max=t_max, bootstrap_n=o["bootstrap"], workers=workers)
    params = {"beta": template.beta, "eps": template.eps, "J": template.J, "gamma0": template.gamma0}
    harness.write_json(out, _schema("toric-scaling", params, rep))


def cmd_bkt_flow(o):
    p = bkt.BktParams(o["beta"], o["J"], o["Ec"], o["M"], o["ystar"])
    traj = bkt.integrate_flow(p, o["lmax"], dense_points=max(2, o["samples"]))
    _write_rows(o["out"], ["l", "K", "y"], zip(traj.l.tolist(), traj.K.tolist(), traj.y.tolist()))


def cmd_bkt_xi(o):
    Ms = o["M"] if isinstance(o["M"], list) else [int(o["M"])]
    betas = np.linspace(o["beta_min"], o["beta_max"], o["points"])
    rows = []
    for M in Ms:
        for beta in betas:
            p = bkt.BktParams(float(beta), o["J"], o["Ec"], int(M), o["ystar"])
            try:
                nu = bkt.nu_eff(p)
            except ValueError:
                nu = None
            rows.append((float(beta), int(M), bkt.correlation_length(p, o["lmax"]), nu))
    _write_rows(o["out"], ["beta", "M", "xi", "nu_eff"], rows)


def cmd_bkt_crossover(o):
    t = bkt.BktParams(1.0, o["J"], o["Ec"], o["M"], o["ystar"])
    b = o["b_fit"]
    fitted = None
    if b is None:
        # fit on the M=1 flow over the window between the M=1 and M crossings at this L
        lo = bkt.beta_at_xi(t, o["L"], o["M"])
        hi = bkt.beta_at_xi(t, o["L"], 1)
        betas = np.linspace(min(lo, hi), max(lo, hi), 8) if lo != hi else np.array([lo])
        b, ratios = bkt.fit_b(t, betas)
        fitted = {"betas": betas.tolist(), "ratios": ratios.tolist()}
    res = bkt.crossover_beta(t, o["L"], b, o["M"])
    rep = res.as_dict()
    if fitted:
        rep["b_fit_window"] = fitted
    params = {"Jxy": o["J"], "E_c": o["Ec"], "M": o["M"], "L": o["L"], "y_star": o["ystar"]}
    harness.write_json(o["out"], _schema("bkt-crossover", params, rep))


HANDLERS = {
    "ising-scan": cmd_ising_scan,
    "toric-static": cmd_toric_static,
    "toric-kmc": cmd_toric_kmc,
    "toric-scaling": cmd_toric_scaling,
    "bkt-flow": cmd_bkt_flow,
    "bkt-xi": cmd_bkt_xi,
    "bkt-crossover": cmd_bkt_crossover,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if not ns.command:
        _emit_error("UsageError", "a subcommand is required", commands=list(HANDLERS))
        return EXIT_USAGE
    try:
        opts = _resolve(ns.command, ns)
        opts["_explicit"] = set(vars(ns)) - {"command"}
        HANDLERS[ns.command](opts)
    except harness.SweepError as exc:
        _emit_error("SweepError", str(exc), invalid=[list(v) for v in exc.invalid])
        return EXIT_FAILURE
    except KeyboardInterrupt:
        _emit_error("Interrupted", "interrupted; partial results flushed where an output path was set")
        return 130
    except Exception as exc:  # every failure leaves as JSON, never a traceback
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_FAILURE
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
