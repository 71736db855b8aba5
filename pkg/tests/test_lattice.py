import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entropic.lattice import Sector, build


@pytest.mark.parametrize("L, links", [(2, 8), (3, 18), (5, 50)])
def test_counts(L, links):
    lat = build(L)
    assert (lat.n_links, lat.n_vertices, lat.n_plaquettes) == (links, L * L, L * L)


@pytest.mark.parametrize("bad", [0, 1, -3])
def test_small_L_rejected(bad):
    with pytest.raises(ValueError):
        build(bad)


def test_non_integer_rejected():
    with pytest.raises(TypeError):
        build(2.5)


def test_out_of_range_indices():
    lat = build(3)
    for fn, n in [(lat.plaquettes_of_link, lat.n_links), (lat.vertices_of_link, lat.n_links),
                  (lat.links_of_plaquette, lat.n_plaquettes), (lat.links_of_vertex, lat.n_vertices)]:
        with pytest.raises(IndexError):
            fn(n)
        with pytest.raises(IndexError):
            fn(-1)


@pytest.mark.parametrize("L", range(2, 17))
def test_incidence_duality_exhaustive(L):
    lat = build(L)
    p_count = np.zeros(lat.n_plaquettes, int)
    v_count = np.zeros(lat.n_vertices, int)
    for l in range(lat.n_links):
        ps, vs = lat.plaquettes_of_link(l), lat.vertices_of_link(l)
        assert len(ps) == 2 and len(vs) == 2
        if L > 2:
            assert ps[0] != ps[1] and vs[0] != vs[1]
        for p in ps:
            assert l in lat.links_of_plaquette(p)
            p_count[p] += 1
        for v in vs:
            assert l in lat.links_of_vertex(v)
            v_count[v] += 1
    for p in range(lat.n_plaquettes):
        links = lat.links_of_plaquette(p)
        assert len(set(links)) == 4
        assert all(p in lat.plaquettes_of_link(l) for l in links)
    for v in range(lat.n_vertices):
        links = lat.links_of_vertex(v)
        assert len(set(links)) == 4
        assert all(v in lat.vertices_of_link(l) for l in links)
    assert p_count.sum() == 4 * L * L == v_count.sum()
    assert np.all(p_count == 4) and np.all(v_count == 4)


def test_L2_two_distinct_plaquettes_per_link():
    lat = build(2)
    for l in range(lat.n_links):
        a, b = lat.plaquettes_of_link(l)
        assert a != b


@pytest.mark.parametrize("L", [2, 3, 4, 7])
def test_cut_sizes(L):
    lat = build(L)
    for sector in Sector:
        for axis in (0, 1):
            assert len(lat.seam_links(sector, axis)) == L


def test_link_index_roundtrip():
    lat = build(5)
    for l in range(lat.n_links):
        assert lat.link_index(*lat.link_coords(l)) == l
    for s in range(25):
        assert lat.site_index(*lat.site_coords(s)) == s


def test_corner_convention():
    lat = build(4)
    # plaquette (1, 2) has bottom link (1,2,0) and right link (2,2,1)
    p = lat.site_index(1, 2)
    assert lat.link_index(1, 2, 0) in lat.links_of_plaquette(p)
    assert lat.link_index(2, 2, 1) in lat.links_of_plaquette(p)
    # vertex (1, 2) is the left end of horizontal link (1,2,0)
    assert lat.site_index(1, 2) in lat.vertices_of_link(lat.link_index(1, 2, 0))


def _contractible_loops(lat, sector):
    """Elementary contractible loops: stars (dual) for X, plaquette boundaries for Z."""
    return lat.vertex_links if sector is Sector.X else lat.plaquette_links


@given(L=st.integers(2, 9), sector=st.sampled_from(list(Sector)), data=st.data())
def test_contractible_loops_even_crossings(L, sector, data):
    lat = build(L)
    loops = _contractible_loops(lat, sector)
    pick = data.draw(st.lists(st.integers(0, L * L - 1), max_size=12))
    chain = [int(l) for k in pick for l in loops[k]]
    assert lat.boundary(sector, chain) == set()
    assert lat.homology_of_chain(sector, chain) == 0


@given(L=st.integers(2, 9), sector=st.sampled_from(list(Sector)), axis=st.integers(0, 1),
       offset=st.integers(0, 8), data=st.data())
def test_logical_representative_winds_once(L, sector, axis, offset, data):
    lat = build(L)
    rep = lat.logical_representative(sector, axis, offset % L)
    assert len(rep) == L
    assert lat.boundary(sector, rep) == set()
    assert lat.homology_of_chain(sector, rep) == 1 << axis
    # deforming by contractible loops keeps the class
    loops = _contractible_loops(lat, sector)
    pick = data.draw(st.lists(st.integers(0, L * L - 1), max_size=8))
    chain = rep + [int(l) for k in pick for l in loops[k]]
    assert lat.homology_of_chain(sector, chain) == 1 << axis
    # winding twice is trivial
    assert lat.homology_of_chain(sector, rep + rep) == 0


def test_lattice_is_immutable():
    lat = build(3)
    with pytest.raises(ValueError):
        lat.link_plaquettes[0, 0] = 1
    assert build(3) is lat
