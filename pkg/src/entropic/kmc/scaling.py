"""Lifetime and density scaling studies built on :mod:`entropic.kmc.simulate`."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import partial
from typing import Sequence

import numpy as np

from ..parallel import pmap
from ..stats import fit_power_law, summarize_lifetimes
from ..toric_static import ToricParams
from .simulate import run_trajectory, steady_state_density, stream_seed

MIN_TRAJECTORIES = 30


@dataclass(frozen=True)
class _Job:
    params: ToricParams
    seed: int
    failure: str
    t_max: float | None
    check_interval: float | None


def _run(job: _Job):
    out = run_trajectory(job.params, job.seed, job.t_max, failure=job.failure,
                         check_interval=job.check_interval)
    return out.failure_time, out.censored


def regime_of(L: int, M: int) -> str:
    """``defect-rare`` when M >= L^2, ``finite-density`` when L >= 4M, else ``crossover``."""
    if M >= L * L:
        return "defect-rare"
    if L >= 4 * M:
        return "finite-density"
    return "crossover"


def _fit(points, samples, bootstrap_n, seed):
    if len(points) < 3:
        return None
    try:
        return fit_power_law(points, bootstrap_n, samples=samples, rng=seed).as_dict()
    except ValueError as exc:
        return {"error": str(exc)}


def lifetime_scaling_suite(template: ToricParams, L_grid: Sequence[int], M_grid: Sequence[int],
                           trajectories: int, *, master_seed: int = 0, failure: str = "auto",
                           t_max: float | None = None, check_interval: float | None = None,
                           bootstrap_n: int = 1000, workers: int | None = 1) -> dict:
    """Mean logical lifetime on an ``L x M`` grid plus power-law fits.

    Every ``(L, M)`` point is simulated from ``template`` with ``L`` and ``M``
    replaced (plateau parameters keep their ``beta``, ``eps``, ``J``).
    Trajectory ``j`` of grid point ``i`` (row-major over ``L_grid`` then
    ``M_grid``) uses ``stream_seed(master_seed, i, j)``.

    ``failure="auto"`` uses the vacuum-return criterion at defect-rare points
    and the decoded criterion elsewhere.

    Returns a JSON-ready dict with per-point summaries, ``alpha_M`` fits (one
    per ``L``, lifetime versus ``M``) and ``alpha_L`` fits (one per ``M``),
    including a fit of lifetime against ``ln L / L^2``.  Bootstrap resamples
    trajectories within each point.  Points with fewer than
    ``MIN_TRAJECTORIES`` trajectories or any censoring are flagged.
    """
    if trajectories < 1:
        raise ValueError("trajectories must be >= 1")
    if failure not in ("auto", "vacuum", "decoded"):
        raise ValueError("failure must be 'auto', 'vacuum' or 'decoded'")
    L_grid = [int(v) for v in L_grid]
    M_grid = [int(v) for v in M_grid]
    if not L_grid or not M_grid:
        raise ValueError("grids must be non-empty")

    points = []
    jobs = []
    for i, (L, M) in enumerate((L, M) for L in L_grid for M in M_grid):
        p = replace(template, L=L, M=M)
        regime = regime_of(L, M)
        mode = failure if failure != "auto" else ("vacuum" if regime == "defect-rare" else "decoded")
        points.append({"index": i, "L": L, "M": M, "regime": regime, "failure": mode})
        jobs += [_Job(p, stream_seed(master_seed, i, j), mode, t_max, check_interval)
                 for j in range(trajectories)]

    results = pmap(_run, jobs, workers)
    warnings: list[str] = []
    samples = {}
    for k, pt in enumerate(points):
        chunk = results[k * trajectories:(k + 1) * trajectories]
        times = np.array([r[0] for r in chunk])
        cens = np.array([r[1] for r in chunk])
        summ = summarize_lifetimes(times, cens)
        pt.update(summ.as_dict())
        flags = []
        if trajectories < MIN_TRAJECTORIES:
            flags.append(f"only {trajectories} trajectories; CI not reliable")
        if summ.n_censored:
            flags.append(f"{summ.n_censored} censored trajectories; mean is a lower bound")
        pt["flags"] = flags
        warnings += [f"(L={pt['L']}, M={pt['M']}): {f}" for f in flags]
        samples[(pt["L"], pt["M"])] = times

    def value(L, M):
        return samples[(L, M)].mean()

    alpha_M = {}
    for L in L_grid:
        pts = [(M, value(L, M)) for M in M_grid]
        alpha_M[str(L)] = _fit(pts, [samples[(L, M)] for M in M_grid], bootstrap_n, master_seed)
    alpha_L = {}
    alpha_L_shape = {}
    for M in M_grid:
        pts = [(L, value(L, M)) for L in L_grid]
        smp = [samples[(L, M)] for L in L_grid]
        alpha_L[str(M)] = _fit(pts, smp, bootstrap_n, master_seed)
        shape_pts = [(math.log(L) / L**2, v) for L, v in pts]
        alpha_L_shape[str(M)] = _fit(shape_pts, smp, bootstrap_n, master_seed)

    return {
        "L_grid": L_grid,
        "M_grid": M_grid,
        "trajectories": trajectories,
        "master_seed": master_seed,
        "points": points,
        "alpha_M": alpha_M,
        "alpha_L": alpha_L,
        "alpha_L_vs_lnL_over_L2": alpha_L_shape,
        "targets": {"defect-rare": {"alpha_M": 2.0, "alpha_L_vs_lnL_over_L2": 1.0},
                    "finite-density": {"alpha_M": 3.0, "alpha_L": 0.0}},
        "warnings": warnings,
    }


def _density(args):
    p, seed, t_burn, t_meas = args
    return steady_state_density(p, seed, t_burn, t_meas)


def density_scaling(template: ToricParams, M_grid: Sequence[int], *, master_seed: int = 0,
                    replicas: int = 4, t_burn_units: float = 20.0, t_meas_units: float = 200.0,
                    bootstrap_n: int = 1000, workers: int | None = 1) -> dict:
    """Steady-state defect density versus ``M`` with a power-law fit.

    Burn-in and measurement windows are given in units of the slowest
    relaxation time ``max(1/gamma_dif, 1/gamma0)`` (``M/gamma0`` on the
    plateau).  Each ``M`` runs ``replicas`` independent windows.
    """
    from .rates import rate_table

    args = []
    for i, M in enumerate(M_grid):
        p = replace(template, M=int(M))
        r = rate_table(p)
        tau = max(1.0 / r.gamma_dif, 1.0 / r.gamma_ann)
        for j in range(replicas):
            args.append((p, stream_seed(master_seed, i, j), t_burn_units * tau, t_meas_units * tau))
    dens = pmap(_density, args, workers)
    rows = []
    samples = []
    for i, M in enumerate(M_grid):
        d = np.array(dens[i * replicas:(i + 1) * replicas])
        p = replace(template, M=int(M))
        r = rate_table(p)
        rows.append({"M": int(M), "density": float(d.mean()),
                     "stderr": float(d.std(ddof=1) / np.sqrt(len(d))) if len(d) > 1 else float("nan"),
                     "gamma_cr_over_gamma_ann": r.gamma_cr / r.gamma_ann})
        samples.append(d)
    fit = _fit([(row["M"], row["density"]) for row in rows],
               samples if replicas >= 2 else None, bootstrap_n, master_seed)
    return {"L": template.L, "points": rows, "alpha_M": fit, "target_alpha_M": -2.0}
