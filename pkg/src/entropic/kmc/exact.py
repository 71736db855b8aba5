"""Exact mean logical lifetime on tiny tori by solving the jump-process generator.

One sector's state is ``(defect set, homology bits)``.  The defect set is a
bitmask over the ``L^2`` stabilizers with even popcount, so there are
``2**(L^2 - 1) * 4`` states.  Absorbing states are the vacuum with
non-trivial homology.  The two sectors evolve independently with the same
generator, so the time to the first failure in either sector is the minimum
of two i.i.d. first-passage times:

    E[min] = int_0^inf S(t)^2 dt,   S(t) = e_0^T exp(Q t) 1,

which equals ``X[0, 0]`` for the Lyapunov solution ``Q X + X Q^T = -1 1^T``
(``Q`` the transient block).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from ..lattice import Sector, build
from ..toric_static import ToricParams
from .rates import rate_table

MAX_STATES = 100_000


@dataclass(frozen=True)
class SectorChain:
    """Generator of one sector's jump process.

    ``states[i] = (mask, h)``; ``Q`` is the full generator (rows sum to 0),
    ``transient`` the indices of non-absorbing states and ``start`` the
    index of the trivial vacuum within ``transient``.
    """

    L: int
    states: list
    Q: np.ndarray
    transient: np.ndarray
    absorbing: np.ndarray
    start: int

    @property
    def Q_transient(self) -> np.ndarray:
        return self.Q[np.ix_(self.transient, self.transient)]


def n_sector_states(L: int) -> int:
    return 4 * 2 ** (L * L - 1)


def sector_chain(p: ToricParams, L: int | None = None, sector: Sector = Sector.X,
                 annihilation_correction: bool = False) -> SectorChain:
    L = p.L if L is None else int(L)
    n_states = n_sector_states(L)
    if n_states > MAX_STATES:
        raise ValueError(f"L={L} needs {n_states} states per sector (cap {MAX_STATES})")
    lat = build(L)
    rates = rate_table(p, annihilation_correction).as_tuple()
    pairs = lat.stabilizers_of_link(sector)
    seams = lat.seam_mask[Sector(sector)]
    link_masks = [(1 << int(a)) | (1 << int(b)) for a, b in pairs]

    masks = [m for m in range(1 << (L * L)) if bin(m).count("1") % 2 == 0]
    mask_index = {m: i for i, m in enumerate(masks)}
    states = [(m, hh) for m in masks for hh in range(4)]
    n = len(states)
    Q = np.zeros((n, n))
    for i, (m, hh) in enumerate(states):
        for lm, seam in zip(link_masks, seams):
            c = bin(m & lm).count("1")
            j = 4 * mask_index[m ^ lm] + (hh ^ int(seam))
            Q[i, j] += rates[c]
            Q[i, i] -= rates[c]
    absorbing = np.array([i for i, (m, hh) in enumerate(states) if m == 0 and hh != 0])
    transient = np.array([i for i in range(n) if i not in set(absorbing.tolist())])
    start = int(np.flatnonzero(transient == 0)[0])  # state (mask 0, h 0) is index 0
    return SectorChain(L, states, Q, transient, absorbing, start)


def sector_mean_first_passage(chain: SectorChain) -> float:
    """Mean time for one sector to fail, from the trivial vacuum."""
    A = chain.Q_transient
    m = np.linalg.solve(A, -np.ones(len(A)))
    return float(m[chain.start])


def exact_lifetime_small(p: ToricParams, L: int | None = None, sectors: int = 2,
                         annihilation_correction: bool = False) -> float:
    """Exact mean logical failure time from the vacuum.

    ``sectors=2`` matches :func:`~entropic.kmc.simulate.run_trajectory`
    (first failure in either sector); ``sectors=1`` is the single-sector
    first-passage time.
    """
    chain = sector_chain(p, L, annihilation_correction=annihilation_correction)
    if sectors == 1:
        return sector_mean_first_passage(chain)
    if sectors != 2:
        raise ValueError("sectors must be 1 or 2")
    A = chain.Q_transient
    X = scipy.linalg.solve_continuous_lyapunov(A, -np.ones_like(A))
    return float(X[chain.start, chain.start])


def product_chain_lifetime(p: ToricParams, L: int | None = None,
                           annihilation_correction: bool = False) -> float:
    """Same quantity as ``exact_lifetime_small(sectors=2)`` via the joint chain.

    Solves ``(Q (+) Q) m = -1`` on pairs of transient states; only practical
    for ``L = 2``.
    """
    chain = sector_chain(p, L, annihilation_correction=annihilation_correction)
    A = scipy.sparse.csr_matrix(chain.Q_transient)
    eye = scipy.sparse.identity(A.shape[0], format="csr")
    joint = (scipy.sparse.kron(A, eye) + scipy.sparse.kron(eye, A)).tocsc()
    m = scipy.sparse.linalg.spsolve(joint, -np.ones(joint.shape[0]))
    k = chain.start
    return float(m[k * A.shape[0] + k])


def stationary_distribution(chain: SectorChain) -> np.ndarray:
    """Stationary law of the full (non-absorbing) sector chain."""
    Q = chain.Q
    n = len(Q)
    # pi Q = 0 with sum(pi) = 1
    A = np.vstack([Q.T, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi
