"""Jump rates of the bath-filtered error processes."""
from __future__ import annotations

import enum
import math
from typing import NamedTuple

from ..ising import log_geometric_sum
from ..toric_static import ToricParams


class EventType(enum.IntEnum):
    """Per-link event class, keyed by how many adjacent stabilizers are violated."""

    CREATION = 0
    DIFFUSION = 1
    ANNIHILATION = 2


class LinkEvent(str, enum.Enum):
    CREATION = "Creation"
    DIFFUSION_TO_1 = "DiffusionTo1"
    DIFFUSION_TO_2 = "DiffusionTo2"
    ANNIHILATION = "Annihilation"


class RateTable(NamedTuple):
    gamma_cr: float
    gamma_dif: float
    gamma_ann: float

    def as_tuple(self):
        return (self.gamma_cr, self.gamma_dif, self.gamma_ann)


def ground_state_probabilities(p: ToricParams) -> tuple[float, float]:
    """Probability that a bath sits in level 0, for a satisfied and a violated stabilizer."""
    p_flat = math.exp(-log_geometric_sum(p.beta * p.eps, p.M))
    p_conf = math.exp(-log_geometric_sum(p.beta * p.J, p.M))
    return p_flat, p_conf


def rate_table(p: ToricParams, annihilation_correction: bool = False) -> RateTable:
    """Resonant rates per link.

    A flip is allowed only if the baths involved are already in the level the
    final configuration forces, so creation needs two flat baths in level 0,
    a hop needs one flat and one confined bath in level 0, and annihilation
    needs two confined baths in level 0.  The last factor is ~1 whenever
    ``beta*J >> 1`` and is dropped unless ``annihilation_correction`` is set.
    """
    p_flat, p_conf = ground_state_probabilities(p)
    g = p.gamma0
    ann = g * p_conf * p_conf if annihilation_correction else g
    return RateTable(g * p_flat * p_flat, g * p_conf * p_flat, ann)


def classify_link_event(occupied_1: bool, occupied_2: bool) -> LinkEvent:
    """Which jump operator a flip on a link between stabilizers 1 and 2 realizes."""
    if occupied_1 and occupied_2:
        return LinkEvent.ANNIHILATION
    if occupied_1:
        return LinkEvent.DIFFUSION_TO_2
    if occupied_2:
        return LinkEvent.DIFFUSION_TO_1
    return LinkEvent.CREATION
