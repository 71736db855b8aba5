"""Compare the compiled and pure-Python KMC kernels.

Two workloads:

* ``events``: a fixed number of events at finite defect density
  (L=16, plateau M=8) without stopping on failure;
* ``lifetimes``: complete defect-rare trajectories (L=4, M=32).

Both kernels consume the same random stream, so the final states and
outcomes must agree exactly; the script checks that as well.

    python benchmarks/bench_kmc.py [--events N] [--trajectories N] [--json FILE]
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from entropic.kmc import backend
from entropic.kmc.rates import rate_table
from entropic.kmc.simulate import advance, make_bitgen, run_trajectory, stream_seed
from entropic.kmc.state import DefectState
from entropic.lattice import build
from entropic.toric_static import ToricParams


def bench_events(name: str, n_events: int, seed: int = 1):
    p = ToricParams.plateau(M=8, L=16)
    state = DefectState.vacuum(build(p.L))
    rates = rate_table(p)
    bg = make_bitgen(seed)
    t0 = time.perf_counter()
    advance(state, rates, bg, max_events=n_events, stop_on_failure=False, backend=name)
    dt = time.perf_counter() - t0
    return dt, (state.time, state.h.tolist(), state.ndef.tolist(), state.events.tolist())


def bench_lifetimes(name: str, n: int, seed: int = 2):
    p = ToricParams.plateau(M=32, L=4)
    t0 = time.perf_counter()
    outs = [run_trajectory(p, stream_seed(seed, 0, i), backend=name) for i in range(n)]
    dt = time.perf_counter() - t0
    events = sum(o.n_cr + o.n_dif + o.n_ann for o in outs)
    return dt, events, outs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=200_000)
    ap.add_argument("--trajectories", type=int, default=200)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)

    names = [n for n in ("compiled", "python") if n in backend.KERNELS]
    results = {}
    ref_state = ref_outs = None
    for name in names:
        dt_e, st = bench_events(name, args.events)
        dt_l, n_ev, outs = bench_lifetimes(name, args.trajectories)
        results[name] = {"events_per_s": args.events / dt_e, "events_wall_s": dt_e,
                         "trajectories_per_s": args.trajectories / dt_l,
                         "lifetime_events_per_s": n_ev / dt_l}
        if ref_state is None:
            ref_state, ref_outs = st, outs
        else:
            results[name]["identical_to_" + names[0]] = bool(st == ref_state and outs == ref_outs)

    print(f"{'backend':<10} {'events/s':>14} {'traj/s':>10} {'ev/s (lifetimes)':>18}")
    for name, r in results.items():
        print(f"{name:<10} {r['events_per_s']:>14.3g} {r['trajectories_per_s']:>10.3g} "
              f"{r['lifetime_events_per_s']:>18.3g}")
    if len(names) == 2:
        speedup = results["compiled"]["events_per_s"] / results["python"]["events_per_s"]
        print(f"speedup (compiled / python): {speedup:.1f}x; "
              f"identical trajectories: {results['python']['identical_to_compiled']}")
        results["speedup"] = speedup
    else:
        print("compiled kernel unavailable; only the Python fallback was timed")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2, default=lambda o: o.item() if isinstance(o, np.generic) else o)
    return results


if __name__ == "__main__":
    main()
