import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropic.kmc.decode import correction_homology
from entropic.kmc.exact import (MAX_STATES, exact_lifetime_small, n_sector_states,
                                product_chain_lifetime, sector_chain, sector_mean_first_passage,
                                stationary_distribution)
from entropic.kmc.simulate import run_trajectories
from entropic.lattice import Sector, build
from entropic.stats import fit_power_law
from entropic.toric_static import ToricParams


def test_generator_rows_sum_to_zero():
    ch = sector_chain(ToricParams.plateau(M=4, L=2))
    assert len(ch.states) == n_sector_states(2) == 32
    assert np.allclose(ch.Q.sum(axis=1), 0.0, atol=1e-14)
    assert np.all(ch.Q - np.diag(np.diag(ch.Q)) >= 0)
    assert len(ch.absorbing) == 3


def test_stationary_distribution_unique():
    ch = sector_chain(ToricParams.plateau(M=4, L=2))
    assert np.linalg.matrix_rank(ch.Q) == len(ch.Q) - 1
    pi = stationary_distribution(ch)
    assert pi.sum() == pytest.approx(1.0)
    assert np.all(pi > -1e-12)
    assert np.allclose(pi @ ch.Q, 0.0, atol=1e-12)


@pytest.mark.parametrize("M", [1, 4, 16])
def test_lyapunov_matches_product_chain(M):
    p = ToricParams.plateau(M=M, L=2)
    assert exact_lifetime_small(p) == pytest.approx(product_chain_lifetime(p), rel=1e-9)


def test_sectors_are_equivalent():
    p = ToricParams.plateau(M=4, L=2)
    tx = sector_mean_first_passage(sector_chain(p, sector=Sector.X))
    tz = sector_mean_first_passage(sector_chain(p, sector=Sector.Z))
    assert tx == pytest.approx(tz, rel=1e-12)
    assert exact_lifetime_small(p) < tx  # min of two copies


def test_exact_small_matches_simulation():
    p = ToricParams.plateau(M=4, L=2)
    exact = exact_lifetime_small(p)
    times = np.array([o.failure_time for o in run_trajectories(p, 2, 3000)])
    se = times.std(ddof=1) / math.sqrt(len(times))
    assert abs(times.mean() - exact) < 3.5 * se


def test_exact_small_M_exponent():
    pts = [(M, exact_lifetime_small(ToricParams.plateau(M=M, L=2))) for M in (4, 8, 16)]
    rep = fit_power_law(pts, bootstrap_n=50)
    assert rep.exponent == pytest.approx(2.0, rel=0.2)


def test_state_cap():
    assert n_sector_states(5) > MAX_STATES
    with pytest.raises(ValueError):
        sector_chain(ToricParams.plateau(M=4, L=5))
    with pytest.raises(ValueError):
        exact_lifetime_small(ToricParams.plateau(M=4, L=2), sectors=3)


# --- decoder ----------------------------------------------------------------------

def _pair_links(lat, sector):
    pairs = lat.stabilizers_of_link(sector)
    return {frozenset((int(a), int(b))): link for link, (a, b) in enumerate(pairs)}


def _explicit_correction(lat, sector, a, b):
    """Chain joining a to b: short way along x, then along y, as the decoder does."""
    L = lat.L
    table = _pair_links(lat, sector)
    ax, ay = a % L, a // L
    bx, by = b % L, b // L

    def short(d):
        d %= L
        return d - L if d > L // 2 else d

    dx, dy = short(bx - ax), short(by - ay)
    chain, x, y = [], ax, ay
    for _ in range(abs(dx)):
        nx = (x + (1 if dx > 0 else -1)) % L
        chain.append(table[frozenset((y * L + x, y * L + nx))])
        x = nx
    for _ in range(abs(dy)):
        ny = (y + (1 if dy > 0 else -1)) % L
        chain.append(table[frozenset((y * L + x, ny * L + x))])
        y = ny
    return chain


@settings(max_examples=100)
@given(L=st.integers(3, 8), data=st.data())
def test_decoder_matches_explicit_chain(L, data):
    lat = build(L)
    a, b = data.draw(st.lists(st.integers(0, L * L - 1), min_size=2, max_size=2, unique=True))
    for sector in Sector:
        chain = _explicit_correction(lat, sector, a, b)
        assert lat.boundary(sector, chain) == {a, b}
        assert correction_homology([a, b], L) == lat.homology_of_chain(sector, chain)


def test_decoder_edge_cases():
    assert correction_homology([], 4) == 0
    with pytest.raises(ValueError):
        correction_homology([1, 2, 3], 4)
    # neighbours across the seam along x
    assert correction_homology([3, 0], 4) == 1
    assert correction_homology([0, 12], 4) == 2
