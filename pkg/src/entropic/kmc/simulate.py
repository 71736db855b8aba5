"""Trajectory-level drivers around the event kernels."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from ..lattice import Sector, build
from ..toric_static import ToricParams
from . import backend as _backend
from .decode import correction_homology
from .rates import EventType, RateTable, rate_table
from .state import DefectState

DEFAULT_T_MAX_UNITS = 1e7  # censoring cap in units of 1/gamma0
SECTOR_NAMES = ("X", "Z")


def stream_seed(master: int, *key: int) -> int:
    """64-bit seed of the stream addressed by ``key`` under ``master``.

    ``SeedSequence(master, spawn_key=key)`` hashes the pair, so streams for
    different keys are independent and adding keys never perturbs old ones.
    """
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def make_bitgen(seed: int) -> np.random.BitGenerator:
    """Counter-based Philox stream for one trajectory."""
    return np.random.Philox(np.random.SeedSequence(int(seed)))


class Event(NamedTuple):
    sector: Sector
    link: int
    kind: EventType
    time: float


@dataclass(frozen=True)
class TrajectoryOutcome:
    failure_time: float
    failure_sector: str   # "X", "Z", or "" when censored
    homology_class: int   # 2-bit label of the failing sector at failure
    n_cr: int
    n_dif: int
    n_ann: int
    seed: int
    censored: bool

    def as_row(self) -> dict:
        row = asdict(self)
        row["censored"] = int(self.censored)
        return row


def _rates_array(rates: RateTable) -> np.ndarray:
    return np.ascontiguousarray(rates.as_tuple(), dtype=np.float64)


def advance(state: DefectState, rates: RateTable, bitgen, t_stop: float = math.inf,
            max_events: int = 2**62, stop_on_failure: bool = True, backend: str | None = None):
    """Advance ``state`` in place; returns ``(status, failed_sector)``."""
    kernel = _backend.get(backend)
    g = state.geometry
    return kernel.advance(
        g.nbr, g.stab_links, g.seam, _rates_array(rates),
        state.occ, state.cls, state.bag, state.pos, state.count, state.ndef,
        state.h, state.events, state.clock, state.area, state.last,
        bitgen, float(t_stop), int(max_events), bool(stop_on_failure),
    )


def step(state: DefectState, rates: RateTable, bitgen, backend: str | None = None) -> tuple[Event, DefectState]:
    """Apply exactly one Gillespie event to ``state`` (in place)."""
    advance(state, rates, bitgen, max_events=1, stop_on_failure=False, backend=backend)
    s, link, c = (int(v) for v in state.last)
    return Event(Sector(s), link, EventType(c), state.time), state


def total_rate(state: DefectState, rates: RateTable) -> float:
    return float(np.sum(state.count @ np.asarray(rates.as_tuple())))


def _outcome(state, seed, failed, t_max):
    ev = state.events.sum(axis=0)
    n_cr, n_dif, n_ann = (int(v) for v in ev)
    if failed >= 0:
        return TrajectoryOutcome(state.time, SECTOR_NAMES[failed], int(state.h[failed]),
                                 n_cr, n_dif, n_ann, int(seed), False)
    return TrajectoryOutcome(float(t_max), "", 0, n_cr, n_dif, n_ann, int(seed), True)


def run_trajectory(p: ToricParams, seed: int, t_max: float | None = None, *,
                   failure: str = "vacuum", check_interval: float | None = None,
                   annihilation_correction: bool = False, backend: str | None = None,
                   debug: bool = False) -> TrajectoryOutcome:
    """Simulate from the vacuum until the first logical failure.

    ``failure="vacuum"``: a sector fails the first time it returns to the
    vacuum with non-trivial accumulated homology.

    ``failure="decoded"``: additionally, every ``check_interval`` (default
    ``1/gamma0``, one annihilation time) the defects of each sector are paired by
    :func:`~entropic.kmc.decode.correction_homology`; the sector fails if the
    error chain plus that correction winds the torus.  Needed at finite
    defect density, where the vacuum is essentially never revisited.

    Trajectories still running at ``t_max`` (default ``1e7/gamma0``) are
    returned with ``censored=True`` and ``failure_time=t_max``.
    """
    if failure not in ("vacuum", "decoded"):
        raise ValueError("failure must be 'vacuum' or 'decoded'")
    t_max = DEFAULT_T_MAX_UNITS / p.gamma0 if t_max is None else float(t_max)
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    rates = rate_table(p, annihilation_correction)
    state = DefectState.vacuum(build(p.L))
    bitgen = make_bitgen(seed)

    if debug:
        while True:
            status, failed = advance(state, rates, bitgen, t_stop=t_max, max_events=1, backend=backend)
            state.check_consistency()
            if status != _backend.default.MAX_EVENTS:
                return _outcome(state, seed, failed, t_max)
            if failure == "decoded":
                raise ValueError("debug stepping supports failure='vacuum' only")

    if failure == "vacuum":
        status, failed = advance(state, rates, bitgen, t_stop=t_max, backend=backend)
        return _outcome(state, seed, failed, t_max)

    dt = check_interval if check_interval is not None else 1.0 / p.gamma0
    if not dt > 0:
        raise ValueError("check_interval must be positive")
    L = p.L
    k = 0
    while True:
        k += 1
        t_check = min(k * dt, t_max)
        status, failed = advance(state, rates, bitgen, t_stop=t_check, backend=backend)
        if failed >= 0:
            return _outcome(state, seed, failed, t_max)
        for s in (0, 1):
            cls = int(state.h[s]) ^ correction_homology(state.defects(s), L)
            if cls:
                n_cr, n_dif, n_ann = (int(v) for v in state.events.sum(axis=0))
                return TrajectoryOutcome(t_check, SECTOR_NAMES[s], cls, n_cr, n_dif, n_ann, int(seed), False)
        if t_check >= t_max:
            return _outcome(state, seed, -1, t_max)


def run_trajectories(p: ToricParams, master_seed: int, n: int, point_index: int = 0,
                     **kw) -> list[TrajectoryOutcome]:
    """``n`` independent trajectories; trajectory ``i`` uses ``stream_seed(master, point, i)``."""
    return [run_trajectory(p, stream_seed(master_seed, point_index, i), **kw) for i in range(n)]


def steady_state_density(p: ToricParams, seed: int, t_burn: float, t_meas: float, *,
                         annihilation_correction: bool = False, backend: str | None = None) -> float:
    """Time-averaged defects per stabilizer after a burn-in.

    Plaquette and vertex sectors are statistically identical and are pooled.
    """
    if not (t_burn > 0 and t_meas > 0):
        raise ValueError("t_burn and t_meas must be positive")
    rates = rate_table(p, annihilation_correction)
    state = DefectState.vacuum(build(p.L))
    bitgen = make_bitgen(seed)
    advance(state, rates, bitgen, t_stop=t_burn, stop_on_failure=False, backend=backend)
    state.reset_area()
    advance(state, rates, bitgen, t_stop=t_burn + t_meas, stop_on_failure=False, backend=backend)
    return float(state.area.sum() / (2 * t_meas * p.L * p.L))
