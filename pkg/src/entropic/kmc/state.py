"""Mutable KMC state: defect occupations, per-class link bags, homology bits.

Every field is a plain numpy array so the compiled and pure-Python kernels
operate on exactly the same memory layout.  Sector index 0 is the plaquette
(X-error) sector, index 1 the vertex (Z-error) sector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lattice import Sector, TorusLattice
from .rates import LinkEvent, classify_link_event as _classify


@dataclass(frozen=True, eq=False)
class Geometry:
    """Kernel-ready incidence tables for both sectors."""

    lattice: TorusLattice
    nbr: np.ndarray         # int32 (2, n_links, 2): stabilizers touching each link
    stab_links: np.ndarray  # int32 (2, n_stab, 4)
    seam: np.ndarray        # uint8 (2, n_links)

    @classmethod
    def of(cls, lattice: TorusLattice) -> "Geometry":
        nbr = np.ascontiguousarray(np.stack([lattice.link_plaquettes, lattice.link_vertices]))
        stab = np.ascontiguousarray(np.stack([lattice.plaquette_links, lattice.vertex_links]))
        seam = np.ascontiguousarray(lattice.seam_mask)
        for a in (nbr, stab, seam):
            a.setflags(write=False)
        return cls(lattice, nbr, stab, seam)


class DefectState:
    """Defect configuration of both sectors plus bookkeeping caches.

    Attributes
    ----------
    occ : uint8 (2, n_stab)
        1 where a stabilizer is violated.
    cls : int8 (2, n_links)
        Event class of every link: number of violated neighbours (0, 1, 2).
    bag, pos, count : link sets per (sector, class) with O(1) insert/remove;
        ``bag[s, c, :count[s, c]]`` lists the members and ``pos[s, link]``
        is the link's slot in its bag.
    ndef : int64 (2,)
        Defects per sector.
    h : int64 (2,)
        Accumulated 2-bit homology parity of each sector's error chain.
    events : int64 (2, 3)
        Events applied so far, by sector and class.
    clock : float64 (2,)
        Current time and the pending next-event time (-1 if none drawn).
    area : float64 (2,)
        Time integral of ``ndef`` since the last :meth:`reset_area`.
    last : int64 (3,)
        Sector, link and class of the most recent event (-1 before any).
    """

    def __init__(self, geometry: Geometry):
        self.geometry = geometry
        lat = geometry.lattice
        n_links, n_stab = lat.n_links, lat.n_stabilizers
        self.occ = np.zeros((2, n_stab), dtype=np.uint8)
        self.cls = np.zeros((2, n_links), dtype=np.int8)
        self.bag = np.zeros((2, 3, n_links), dtype=np.int32)
        self.bag[:, 0, :] = np.arange(n_links, dtype=np.int32)
        self.pos = np.tile(np.arange(n_links, dtype=np.int32), (2, 1))
        self.count = np.zeros((2, 3), dtype=np.int64)
        self.count[:, 0] = n_links
        self.ndef = np.zeros(2, dtype=np.int64)
        self.h = np.zeros(2, dtype=np.int64)
        self.events = np.zeros((2, 3), dtype=np.int64)
        self.clock = np.array([0.0, -1.0])
        self.area = np.zeros(2)
        self.last = np.full(3, -1, dtype=np.int64)

    @classmethod
    def vacuum(cls, lattice: TorusLattice) -> "DefectState":
        return cls(Geometry.of(lattice))

    @classmethod
    def from_defects(cls, lattice: TorusLattice, plaquettes=(), vertices=()) -> "DefectState":
        state = cls.vacuum(lattice)
        for s, defects in ((0, plaquettes), (1, vertices)):
            defects = sorted(set(int(d) for d in defects))
            if len(defects) % 2:
                raise ValueError("defects come in pairs on the torus; got an odd count")
            state.occ[s, defects] = 1
        state.rebuild()
        return state

    @property
    def time(self) -> float:
        return float(self.clock[0])

    @property
    def lattice(self) -> TorusLattice:
        return self.geometry.lattice

    def defects(self, sector: Sector) -> np.ndarray:
        return np.flatnonzero(self.occ[Sector(sector)])

    def recount(self) -> tuple[np.ndarray, np.ndarray]:
        """Link classes and per-class counts recomputed from ``occ`` alone."""
        nbr = self.geometry.nbr
        cls = np.stack([self.occ[s][nbr[s, :, 0]] + self.occ[s][nbr[s, :, 1]] for s in (0, 1)]).astype(np.int8)
        counts = np.stack([np.bincount(cls[s], minlength=3) for s in (0, 1)]).astype(np.int64)
        return cls, counts

    def rebuild(self) -> None:
        """Recompute every cache from ``occ``; bag order becomes canonical."""
        cls, counts = self.recount()
        self.cls[:] = cls
        self.count[:] = counts
        for s in (0, 1):
            for c in range(3):
                members = np.flatnonzero(cls[s] == c).astype(np.int32)
                self.bag[s, c, : len(members)] = members
                self.pos[s, members] = np.arange(len(members), dtype=np.int32)
        self.ndef[:] = self.occ.sum(axis=1)
        self.clock[1] = -1.0

    def check_consistency(self) -> None:
        """Raise ``AssertionError`` if any cache disagrees with a recount."""
        cls, counts = self.recount()
        assert np.array_equal(cls, self.cls), "link classes out of sync"
        assert np.array_equal(counts, self.count), "class counts out of sync"
        assert np.array_equal(self.ndef, self.occ.sum(axis=1)), "defect counts out of sync"
        assert np.all(self.ndef % 2 == 0), "odd number of defects"
        for s in (0, 1):
            for c in range(3):
                members = self.bag[s, c, : self.count[s, c]]
                assert np.all(self.cls[s, members] == c), "bag holds a link of another class"
                assert np.array_equal(self.pos[s, members], np.arange(len(members))), "bag positions stale"

    def classify_link_event(self, link: int, sector: Sector) -> LinkEvent:
        s = Sector(sector)
        a, b = self.geometry.nbr[s, link]
        return _classify(bool(self.occ[s, a]), bool(self.occ[s, b]))

    def reset_area(self) -> None:
        self.area[:] = 0.0

    def copy(self) -> "DefectState":
        new = DefectState.__new__(DefectState)
        new.geometry = self.geometry
        for name in ("occ", "cls", "bag", "pos", "count", "ndef", "h", "events", "clock", "area", "last"):
            setattr(new, name, getattr(self, name).copy())
        return new
