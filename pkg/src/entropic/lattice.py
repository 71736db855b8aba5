"""Periodic L x L square lattice with toric-code incidence maps.

Index conventions (row-major, shared by every backend so that trajectories
can be replayed bit-for-bit):

* vertex ``(x, y)``     -> ``y * L + x``
* plaquette ``(x, y)``  -> ``y * L + x``; its corners are the vertices
  ``(x, y)``, ``(x+1, y)``, ``(x, y+1)``, ``(x+1, y+1)``
* link ``(x, y, o)``    -> ``2 * (y * L + x) + o`` where ``o = 0`` is the
  horizontal link ``(x, y) -> (x+1, y)`` and ``o = 1`` the vertical link
  ``(x, y) -> (x, y+1)``

Two error sectors live on the same links:

* ``Sector.X``: bit flips, detected by plaquette stabilizers.  Error chains
  are paths on the dual lattice.
* ``Sector.Z``: phase flips, detected by vertex stabilizers.  Error chains
  are paths on the direct lattice.

Homology is read off by two seams, at ``x = 0`` and ``y = 0``.  Bit 0 of a
homology label is the parity of crossings of the x-seam (winding in x), bit 1
the parity of crossings of the y-seam (winding in y).  The seam link sets are

* X sector: vertical links ``(0, y, 1)`` (x-seam), horizontal links
  ``(x, 0, 0)`` (y-seam); both are closed loops of the direct lattice.
* Z sector: horizontal links ``(L-1, y, 0)`` (x-seam), vertical links
  ``(x, L-1, 1)`` (y-seam); both are closed loops of the dual lattice.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class Sector(enum.IntEnum):
    X = 0
    Z = 1


def _check_index(i, n, what):
    if not 0 <= int(i) < n:
        raise IndexError(f"{what} index {i} out of range [0, {n})")
    return int(i)


@dataclass(frozen=True, eq=False)
class TorusLattice:
    """Immutable incidence tables of an L x L torus.

    Use :func:`build` rather than the constructor.  All arrays are read-only
    ``int32``/``uint8`` arrays and can be handed directly to the simulation
    kernels.

    Attributes
    ----------
    L : int
        Linear size.
    link_plaquettes : ndarray, shape (2L^2, 2)
    link_vertices : ndarray, shape (2L^2, 2)
    plaquette_links : ndarray, shape (L^2, 4)
    vertex_links : ndarray, shape (L^2, 4)
    seam_mask : ndarray, shape (2, 2L^2), uint8
        ``seam_mask[sector, link]`` has bit 0 set if the link lies on that
        sector's x-seam and bit 1 if it lies on its y-seam.
    """

    L: int
    link_plaquettes: np.ndarray = field(repr=False)
    link_vertices: np.ndarray = field(repr=False)
    plaquette_links: np.ndarray = field(repr=False)
    vertex_links: np.ndarray = field(repr=False)
    seam_mask: np.ndarray = field(repr=False)

    @property
    def n_links(self) -> int:
        return 2 * self.L * self.L

    @property
    def n_vertices(self) -> int:
        return self.L * self.L

    @property
    def n_plaquettes(self) -> int:
        return self.L * self.L

    @property
    def n_stabilizers(self) -> int:
        """Stabilizers per sector (plaquettes for X, vertices for Z)."""
        return self.L * self.L

    def link_index(self, x: int, y: int, o: int) -> int:
        L = self.L
        if o not in (0, 1):
            raise ValueError("orientation must be 0 (horizontal) or 1 (vertical)")
        return 2 * ((y % L) * L + (x % L)) + o

    def link_coords(self, link: int) -> tuple[int, int, int]:
        link = _check_index(link, self.n_links, "link")
        site, o = divmod(link, 2)
        y, x = divmod(site, self.L)
        return x, y, o

    def site_index(self, x: int, y: int) -> int:
        return (y % self.L) * self.L + (x % self.L)

    def site_coords(self, site: int) -> tuple[int, int]:
        site = _check_index(site, self.L * self.L, "site")
        y, x = divmod(site, self.L)
        return x, y

    # -- incidence -------------------------------------------------------
    def plaquettes_of_link(self, link: int) -> tuple[int, int]:
        link = _check_index(link, self.n_links, "link")
        a, b = self.link_plaquettes[link]
        return int(a), int(b)

    def vertices_of_link(self, link: int) -> tuple[int, int]:
        link = _check_index(link, self.n_links, "link")
        a, b = self.link_vertices[link]
        return int(a), int(b)

    def links_of_plaquette(self, plaquette: int) -> tuple[int, ...]:
        plaquette = _check_index(plaquette, self.n_plaquettes, "plaquette")
        return tuple(int(v) for v in self.plaquette_links[plaquette])

    def links_of_vertex(self, vertex: int) -> tuple[int, ...]:
        vertex = _check_index(vertex, self.n_vertices, "vertex")
        return tuple(int(v) for v in self.vertex_links[vertex])

    def stabilizers_of_link(self, sector: Sector) -> np.ndarray:
        """Link -> (stabilizer, stabilizer) table for one sector."""
        return self.link_plaquettes if Sector(sector) is Sector.X else self.link_vertices

    def links_of_stabilizer(self, sector: Sector) -> np.ndarray:
        return self.plaquette_links if Sector(sector) is Sector.X else self.vertex_links

    # -- homology --------------------------------------------------------
    def seam_links(self, sector: Sector, axis: int) -> np.ndarray:
        """Links on the x-seam (``axis=0``) or y-seam (``axis=1``)."""
        bit = 1 << axis
        return np.flatnonzero(self.seam_mask[Sector(sector)] & bit)

    def homology_of_chain(self, sector: Sector, links) -> int:
        """2-bit crossing parity of a set of flipped links (with multiplicity)."""
        mask = self.seam_mask[Sector(sector)]
        h = 0
        for link in links:
            h ^= int(mask[_check_index(link, self.n_links, "link")])
        return h

    def boundary(self, sector: Sector, links) -> set[int]:
        """Stabilizers violated by flipping ``links`` (mod 2)."""
        table = self.stabilizers_of_link(sector)
        out: set[int] = set()
        for link in links:
            for s in table[_check_index(link, self.n_links, "link")]:
                out ^= {int(s)}
        return out

    def logical_representative(self, sector: Sector, axis: int, offset: int = 0) -> list[int]:
        """A straight non-contractible loop winding once along ``axis``.

        The loop crosses the matching seam exactly once and never the other.
        """
        L = self.L
        sector = Sector(sector)
        if sector is Sector.X:
            # dual loop: winding in x crosses every vertical link of one row
            if axis == 0:
                return [self.link_index(x, offset, 1) for x in range(L)]
            return [self.link_index(offset, y, 0) for y in range(L)]
        if axis == 0:
            return [self.link_index(x, offset, 0) for x in range(L)]
        return [self.link_index(offset, y, 1) for y in range(L)]


def _make_readonly(*arrays):
    for a in arrays:
        a.setflags(write=False)


@lru_cache(maxsize=None)
def build(L: int) -> TorusLattice:
    """Build (and cache) the incidence tables of an ``L x L`` torus."""
    if isinstance(L, bool) or int(L) != L:
        raise TypeError("L must be an integer")
    L = int(L)
    if L < 2:
        raise ValueError("L must be >= 2 for the torus to carry non-contractible cycles")

    n_links = 2 * L * L
    link_plaquettes = np.empty((n_links, 2), dtype=np.int32)
    link_vertices = np.empty((n_links, 2), dtype=np.int32)
    plaquette_links = np.empty((L * L, 4), dtype=np.int32)
    vertex_links = np.empty((L * L, 4), dtype=np.int32)
    seam_mask = np.zeros((2, n_links), dtype=np.uint8)

    def site(x, y):
        return (y % L) * L + (x % L)

    def link(x, y, o):
        return 2 * site(x, y) + o

    for y in range(L):
        for x in range(L):
            h, v = link(x, y, 0), link(x, y, 1)
            link_plaquettes[h] = (site(x, y), site(x, y - 1))
            link_plaquettes[v] = (site(x, y), site(x - 1, y))
            link_vertices[h] = (site(x, y), site(x + 1, y))
            link_vertices[v] = (site(x, y), site(x, y + 1))
            # bottom, top, left, right
            plaquette_links[site(x, y)] = (h, link(x, y + 1, 0), v, link(x + 1, y, 1))
            # right, left, up, down
            vertex_links[site(x, y)] = (h, link(x - 1, y, 0), v, link(x, y - 1, 1))

    for k in range(L):
        seam_mask[Sector.X, link(0, k, 1)] |= 1
        seam_mask[Sector.X, link(k, 0, 0)] |= 2
        seam_mask[Sector.Z, link(L - 1, k, 0)] |= 1
        seam_mask[Sector.Z, link(k, L - 1, 1)] |= 2

    _make_readonly(link_plaquettes, link_vertices, plaquette_links, vertex_links, seam_mask)
    return TorusLattice(L, link_plaquettes, link_vertices, plaquette_links, vertex_links, seam_mask)
