"""Parameter sweeps: config loading, validation, deterministic parallel runs, CSV/JSON output.

Config schema (YAML; every section optional except ``model``)::

    model: toric-kmc            # ising | toric-static | toric-kmc | bkt
    params:                     # fixed values shared by every grid point
      beta: 1.0
      J: 50.0
    grids:                      # cartesian product, in the order written
      M: [8, 16, 32]
      L: [4]
    options:                    # model-specific knobs (see MODEL_OPTIONS)
      failure: vacuum
    execution:
      trajectories: 200         # jobs per grid point (ignored by ising/bkt)
      seed: 0
      workers: 1
    output:
      path: sweep.csv

Grid point ``i`` is the ``i``-th element of the product; job ``(i, j)``
draws its randomness from ``stream_seed(seed, i, j)``.  Rows are written
sorted by ``(point, trajectory)`` with floats in shortest round-trip
form, so the CSV is byte-identical for any worker count.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import yaml

from . import bkt, ising, toric_static
from .kmc.simulate import run_trajectory, stream_seed
from .parallel import resolve_workers

SCHEMA_VERSION = 1
MODELS = ("ising", "toric-static", "toric-kmc", "bkt")

# parameters each model accepts (fixed or gridded) and their defaults
MODEL_PARAMS: dict[str, dict[str, Any]] = {
    "ising": {"beta": 1.0, "eps": 1e-3, "J": 50.0, "M": 50, "Jprime": 0.0},
    "toric-static": {"beta": 1.0, "eps": None, "J": None, "M": 50, "L": 8},
    "toric-kmc": {"beta": 1.0, "eps": None, "J": None, "M": 16, "L": 4, "gamma0": 1.0},
    "bkt": {"beta": 1.0, "Jxy": 1.0, "E_c": 8.0, "M": 1, "y_star": 1.0, "a": 1.0},
}
MODEL_OPTIONS: dict[str, dict[str, Any]] = {
    "ising": {},
    "toric-static": {"samples": 10000},
    "toric-kmc": {"t_max": None, "failure": "vacuum", "check_interval": None,
                  "annihilation_correction": False},
    "bkt": {"l_max": bkt.DEFAULT_L_MAX},
}
_INT_PARAMS = {"M", "L"}


class SweepError(ValueError):
    """Invalid sweep specification; ``invalid`` lists ``(point_index, message)``."""

    def __init__(self, message, invalid=()):
        super().__init__(message)
        self.invalid = list(invalid)


@dataclass
class SweepSpec:
    model: str
    grids: dict[str, list] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)
    trajectories: int = 1
    seed: int = 0
    out: str | None = None
    workers: int = 1

    def resolved(self) -> dict:
        """Full parameter set (defaults filled in) as written to reports."""
        params = dict(MODEL_PARAMS[self.model])
        params.update(self.params)
        for k in self.grids:
            params.pop(k, None)
        options = dict(MODEL_OPTIONS[self.model])
        options.update(self.options)
        return {"model": self.model, "params": params, "grids": self.grids, "options": options,
                "trajectories": self.trajectories, "seed": self.seed}


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def load_config(path: str) -> dict:
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise SweepError(f"config {path!r} must be a mapping at top level")
    return cfg


def spec_from_config(cfg: dict, **overrides) -> SweepSpec:
    """Build a spec from a parsed config; non-``None`` ``overrides`` win."""
    known = {"model", "params", "grids", "options", "execution", "output"}
    unknown = set(cfg) - known
    if unknown:
        raise SweepError(f"unknown config sections: {sorted(unknown)}")
    ex = cfg.get("execution") or {}
    out = cfg.get("output") or {}
    kw = dict(
        model=cfg.get("model"),
        grids={k: _as_list(v) for k, v in (cfg.get("grids") or {}).items()},
        params=dict(cfg.get("params") or {}),
        options=dict(cfg.get("options") or {}),
        trajectories=ex.get("trajectories", 1),
        seed=ex.get("seed", 0),
        workers=ex.get("workers", 1),
        out=out.get("path"),
    )
    kw.update({k: v for k, v in overrides.items() if v is not None})
    spec = SweepSpec(**kw)
    validate(spec)
    return spec


def grid_points(spec: SweepSpec) -> list[dict]:
    keys = list(spec.grids)
    base = dict(MODEL_PARAMS[spec.model])
    base.update(spec.params)
    pts = []
    for combo in itertools.product(*(spec.grids[k] for k in keys)):
        d = dict(base)
        d.update(zip(keys, combo))
        pts.append(d)
    return pts


def _toric(d: dict) -> toric_static.ToricParams:
    kw = {k: d[k] for k in ("beta", "eps", "J") if d.get(k) is not None}
    M, L = d["M"], d["L"]
    return toric_static.ToricParams.plateau(M=M, L=L, gamma0=d.get("gamma0", 1.0), **kw)


def make_params(model: str, d: dict):
    """Model parameter object for one resolved grid point."""
    d = {k: (int(v) if k in _INT_PARAMS and isinstance(v, float) and v.is_integer() else v)
         for k, v in d.items()}
    if model == "ising":
        return ising.ChainParams(d["beta"], d["eps"], d["J"], d["M"], d.get("Jprime", 0.0))
    if model in ("toric-static", "toric-kmc"):
        return _toric(d)
    if model == "bkt":
        return bkt.BktParams(d["beta"], d["Jxy"], d["E_c"], d["M"], d.get("y_star", 1.0), d.get("a", 1.0))
    raise SweepError(f"unknown model {model!r}")


def validate(spec: SweepSpec) -> None:
    """Check the whole spec before anything runs; all bad points are reported at once."""
    if spec.model not in MODELS:
        raise SweepError(f"model must be one of {MODELS}, got {spec.model!r}")
    allowed = set(MODEL_PARAMS[spec.model])
    bad = (set(spec.grids) | set(spec.params)) - allowed
    if bad:
        raise SweepError(f"unknown parameters for {spec.model}: {sorted(bad)}")
    bad_opts = set(spec.options) - set(MODEL_OPTIONS[spec.model])
    if bad_opts:
        raise SweepError(f"unknown options for {spec.model}: {sorted(bad_opts)}")
    opts = spec.options
    if spec.model == "toric-kmc" and opts.get("failure", "vacuum") not in ("vacuum", "decoded"):
        raise SweepError("option failure must be 'vacuum' or 'decoded'")
    if spec.model == "toric-static" and not int(opts.get("samples", 1)) >= 1:
        raise SweepError("option samples must be >= 1")
    for k, v in spec.grids.items():
        if len(v) == 0:
            raise SweepError(f"grid {k!r} is empty")
    if isinstance(spec.trajectories, bool) or not isinstance(spec.trajectories, int) or spec.trajectories < 1:
        raise SweepError("trajectories must be an integer >= 1")
    if isinstance(spec.seed, bool) or not isinstance(spec.seed, int) or spec.seed < 0:
        raise SweepError("seed must be a non-negative integer")
    resolve_workers(spec.workers)
    invalid = []
    for i, d in enumerate(grid_points(spec)):
        try:
            make_params(spec.model, d)
        except (ValueError, TypeError, KeyError) as exc:
            invalid.append((i, f"{exc}"))
    if invalid:
        msg = "; ".join(f"point {i}: {m}" for i, m in invalid[:10])
        raise SweepError(f"{len(invalid)} invalid grid point(s): {msg}", invalid)


# --- jobs ------------------------------------------------------------------

@dataclass(frozen=True)
class Job:
    model: str
    point: int
    trajectory: int
    values: tuple  # sorted (name, value) pairs of the resolved point
    options: tuple
    seed: int


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _job_ising(p, opts, seed):
    xi = ising.correlation_length(p)
    regime = ising.classify_regime(p).regime.value if p.Jprime == 0 else ising.Regime.UNCLASSIFIED.value
    return {"inv_beta": 1.0 / p.beta, "xi": xi, "regime": regime}


def _job_toric_static(p, opts, seed):
    rep = toric_static.static_report(p, int(opts["samples"]), seed, areas=[])
    rep.pop("wilson_loop_table")
    return rep


def _job_toric_kmc(p, opts, seed):
    out = run_trajectory(p, seed, opts.get("t_max"), failure=opts.get("failure", "vacuum"),
                         check_interval=opts.get("check_interval"),
                         annihilation_correction=bool(opts.get("annihilation_correction", False)))
    return {"failure_time": out.failure_time, "sector": out.failure_sector,
            "class": out.homology_class, "censored": out.censored,
            "n_cr": out.n_cr, "n_dif": out.n_dif, "n_ann": out.n_ann}


def _job_bkt(p, opts, seed):
    traj = bkt.integrate_flow(p, float(opts.get("l_max", bkt.DEFAULT_L_MAX)))
    try:
        nu = bkt.nu_eff(p)
    except ValueError:
        nu = None
    xi = math.inf if traj.l_star is None else p.a * math.exp(traj.l_star)
    return {"K0": p.K0, "y_eff": p.y_eff, "l_star": traj.l_star, "xi": xi, "nu_eff": nu,
            "reason": traj.reason}


_RUNNERS: dict[str, Callable] = {
    "ising": _job_ising, "toric-static": _job_toric_static,
    "toric-kmc": _job_toric_kmc, "bkt": _job_bkt,
}
_RESULT_COLUMNS = {
    "ising": ["inv_beta", "xi", "regime"],
    "toric-static": ["stabilizer_expectation", "beta_eff", "defect_density_analytic",
                     "defect_density_conditional", "defect_density_empirical", "defect_density_stderr"],
    "toric-kmc": ["failure_time", "sector", "class", "censored", "n_cr", "n_dif", "n_ann"],
    "bkt": ["K0", "y_eff", "l_star", "xi", "nu_eff", "reason"],
}


def run_job(job: Job) -> list[str]:
    """Run one job and return its formatted CSV fields."""
    d = dict(job.values)
    p = make_params(job.model, d)
    if job.model in ("toric-static", "toric-kmc"):
        d.update(eps=p.eps, J=p.J)  # plateau defaults resolved
    res = _RUNNERS[job.model](p, dict(job.options), job.seed)
    fields = [str(job.point), str(job.trajectory), str(job.seed)]
    fields += [_fmt(d[k]) for k in sorted(d)]
    fields += [_fmt(res[c]) for c in _RESULT_COLUMNS[job.model]]
    return fields


def build_jobs(spec: SweepSpec) -> list[Job]:
    opts = dict(MODEL_OPTIONS[spec.model])
    opts.update(spec.options)
    opts_t = tuple(sorted(opts.items()))
    n_traj = 1 if spec.model in ("ising", "bkt") else spec.trajectories
    jobs = []
    for i, d in enumerate(grid_points(spec)):
        values = tuple(sorted(d.items()))
        for j in range(n_traj):
            jobs.append(Job(spec.model, i, j, values, opts_t, stream_seed(spec.seed, i, j)))
    return jobs


def header(spec: SweepSpec) -> list[str]:
    names = sorted(grid_points(spec)[0])
    return ["point", "trajectory", "seed"] + names + _RESULT_COLUMNS[spec.model]


def _csv_text(head, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    w.writerows(rows)
    return buf.getvalue()


def _manifest_path(out: str) -> str:
    return out + ".manifest.json"


def _partial_path(out: str) -> str:
    return out + ".partial.csv"


def _load_partial(spec: SweepSpec) -> dict[tuple[int, int], list[str]]:
    if not spec.out or not os.path.exists(_manifest_path(spec.out)):
        return {}
    with open(_manifest_path(spec.out)) as fh:
        man = json.load(fh)
    if man.get("spec") != spec.resolved():
        raise SweepError("resume manifest belongs to a different sweep spec")
    done = {}
    with open(_partial_path(spec.out), newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            done[(int(row[0]), int(row[1]))] = row
    return done


def _flush_partial(spec: SweepSpec, head, rows: dict) -> None:
    ordered = [rows[k] for k in sorted(rows)]
    with open(_partial_path(spec.out), "w", newline="") as fh:
        fh.write(_csv_text(head, ordered))
    man = {"schema_version": SCHEMA_VERSION, "spec": spec.resolved(),
           "completed": [list(k) for k in sorted(rows)], "partial": _partial_path(spec.out)}
    with open(_manifest_path(spec.out), "w") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)


def run_sweep(spec: SweepSpec, *, resume: bool = False) -> tuple[list[str], list[list[str]]]:
    """Execute every job of ``spec``; returns ``(header, rows)`` in canonical order.

    With ``spec.out`` set the CSV is written there together with
    ``<out>.meta.json`` (schema version, resolved parameters, row count).
    On ``KeyboardInterrupt`` the completed rows go to ``<out>.partial.csv``
    with a resume manifest ``<out>.manifest.json`` and the interrupt is
    re-raised; ``resume=True`` picks up from them.
    """
    from concurrent.futures import ProcessPoolExecutor

    validate(spec)
    jobs = build_jobs(spec)
    head = header(spec)
    done = _load_partial(spec) if resume else {}
    todo = [j for j in jobs if (j.point, j.trajectory) not in done]
    workers = resolve_workers(spec.workers)
    rows = dict(done)
    try:
        if workers == 1 or len(todo) <= 1:
            for job in todo:
                rows[(job.point, job.trajectory)] = run_job(job)
        else:
            chunk = max(1, len(todo) // (8 * workers))
            with ProcessPoolExecutor(max_workers=min(workers, len(todo))) as ex:
                for job, res in zip(todo, ex.map(run_job, todo, chunksize=chunk)):
                    rows[(job.point, job.trajectory)] = res
    except KeyboardInterrupt:
        if spec.out:
            _flush_partial(spec, head, rows)
        raise
    ordered = [rows[k] for k in sorted(rows)]
    if spec.out:
        write_csv(spec.out, head, ordered)
        write_json(spec.out + ".meta.json", {"schema_version": SCHEMA_VERSION, "resolved": spec.resolved(),
                                             "rows": len(ordered), "columns": head})
        for path in (_manifest_path(spec.out), _partial_path(spec.out)):
            if os.path.exists(path):
                os.remove(path)
    return head, ordered


def write_csv(path: str, head, rows) -> None:
    text = _csv_text(head, rows)
    if path == "-":
        import sys
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    if hasattr(o, "_asdict"):
        return o._asdict()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    # JSON has no inf/nan; encode them as strings
    if isinstance(o, float) and not math.isfinite(o):
        return "inf" if o > 0 else ("-inf" if o < 0 else "nan")
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if hasattr(o, "item") and not isinstance(o, (str, bytes)):
        return _clean(o.item())
    return o


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, default=_json_default) + "\n"


def write_json(path: str, report: dict) -> None:
    text = dumps(report)
    if path == "-":
        import sys
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def spec_dict(spec: SweepSpec) -> dict:
    return asdict(spec)
