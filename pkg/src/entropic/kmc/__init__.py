"""Kinetic Monte Carlo of the entropic toric code as a classical jump process."""
from .backend import BACKEND
from .exact import exact_lifetime_small, product_chain_lifetime, sector_chain
from .scaling import density_scaling, lifetime_scaling_suite
from .rates import EventType, LinkEvent, RateTable, classify_link_event, rate_table
from .simulate import (
    Event,
    TrajectoryOutcome,
    make_bitgen,
    run_trajectories,
    run_trajectory,
    steady_state_density,
    step,
    stream_seed,
)
from .state import DefectState

__all__ = [
    "BACKEND", "DefectState", "density_scaling", "lifetime_scaling_suite", "Event", "EventType", "LinkEvent", "RateTable",
    "TrajectoryOutcome", "classify_link_event", "exact_lifetime_small",
    "make_bitgen", "product_chain_lifetime", "rate_table", "run_trajectories",
    "run_trajectory", "sector_chain", "steady_state_density", "step", "stream_seed",
]
