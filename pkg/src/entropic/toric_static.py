"""Gibbs-state observables of the toric code with entropic stabilizer baths.

After the baths are traced out every stabilizer carries weight ``w_plus``
when satisfied and ``w_minus`` when violated, independently, except that on
the torus the product of all plaquettes (and of all vertices) is +1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ising import BathWeights, log_geometric_sum


@dataclass(frozen=True)
class ToricParams:
    """Parameters of the entropic toric code.

    ``gamma0`` is the bare error rate used by the kinetic simulation; it plays
    no role in equilibrium quantities.
    """

    beta: float
    eps: float
    J: float
    M: int
    L: int
    gamma0: float = 1.0

    def __post_init__(self):
        for name in ("beta", "eps", "J", "gamma0"):
            v = float(getattr(self, name))
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
            object.__setattr__(self, name, v)
        for name, lo in (("M", 1), ("L", 2)):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < lo:
                raise ValueError(f"{name} must be an integer >= {lo}, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def n_qubits(self) -> int:
        return 2 * self.L * self.L

    @classmethod
    def plateau(cls, M: int, L: int, gamma0: float = 1.0, **kw) -> "ToricParams":
        """Deep in the saturated plateau: ``beta*eps*M = 1e-6``, ``beta*J = 50``."""
        if isinstance(M, bool) or int(M) != M or M < 1:
            raise ValueError(f"M must be an integer >= 1, got {M!r}")
        beta = kw.pop("beta", 1.0)
        if not (float(beta) > 0 and math.isfinite(beta)):
            raise ValueError(f"beta must be positive and finite, got {beta}")
        eps = kw.pop("eps", 1e-6 / (beta * M))
        J = kw.pop("J", 50.0 / beta)
        return cls(beta=beta, eps=eps, J=J, M=M, L=L, gamma0=gamma0, **kw)


class StabilizerSample(NamedTuple):
    plaquettes: np.ndarray  # int8, +1 / -1
    vertices: np.ndarray


def bath_weights(p: ToricParams) -> BathWeights:
    return BathWeights(
        math.exp(log_geometric_sum(p.beta * p.eps, p.M)),
        math.exp(log_geometric_sum(p.beta * p.J, p.M)),
    )


def _log_ratio(p: ToricParams) -> float:
    return log_geometric_sum(p.beta * p.eps, p.M) - log_geometric_sum(p.beta * p.J, p.M)


def defect_probability(p: ToricParams) -> float:
    """Unconstrained probability ``w-/(w+ + w-)`` that a stabilizer is violated."""
    # 1 / (1 + lambda), evaluated without forming lambda
    return 0.5 * (1.0 - math.tanh(0.5 * _log_ratio(p)))


def stabilizer_expectation(p: ToricParams) -> float:
    """``<B_p> = (w+ - w-)/(w+ + w-)``; tends to ``(M-1)/(M+1)`` on the plateau."""
    return math.tanh(0.5 * _log_ratio(p))


def wilson_loop(p: ToricParams, area: int) -> float:
    """Wilson loop enclosing ``area`` plaquettes (the Gibbs state factorizes)."""
    area = int(area)
    if area < 0 or area > p.L * p.L:
        raise ValueError(f"area must lie in [0, L^2={p.L * p.L}], got {area}")
    if area == 0:
        return 1.0
    b = stabilizer_expectation(p)
    if b <= 0.0:
        return 0.0 if b == 0.0 else b**area
    return math.exp(area * math.log(b))


def beta_eff(p: ToricParams) -> float:
    """Effective inverse temperature of the equivalent standard toric code.

    Evaluated from the product formula; equal to ``0.5 * ln(w+/w-)``.
    """
    be, bj, M = p.beta * p.eps, p.beta * p.J, p.M
    num = math.log(-math.expm1(-be * M)) + math.log(-math.expm1(-bj))
    den = math.log(-math.expm1(-be)) + math.log(-math.expm1(-bj * M))
    return 0.5 * (num - den)


def bath_threshold(N: int) -> tuple[int, int]:
    """Smallest plateau bath size with ``sqrt(N) * exp(-beta_eff) <= 1``.

    On the plateau ``exp(-beta_eff) = M**-1/2``, so the condition is ``M >= N``.
    Returns ``(M, m)`` with ``m = ceil(log2 M)`` bath qubits.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    M = N
    m = (M - 1).bit_length()  # == ceil(log2 M) for integers
    return M, m


def conditional_defect_probability(p: ToricParams) -> float:
    """Exact single-stabilizer defect probability given even global parity.

    With ``n = L^2`` stabilizers per sector, unconstrained rate ``q`` and
    ``s = 1 - 2q``: ``P = q (1 - s**(n-1)) / (1 + s**n)``.
    """
    q = defect_probability(p)
    s = 1.0 - 2.0 * q
    n = p.L * p.L
    return q * (1.0 - s ** (n - 1)) / (1.0 + s**n)


def _sample_even_rows(rng, q, n, count, batch):
    out = np.empty((count, n), dtype=bool)
    filled = 0
    while filled < count:
        draw = rng.random((batch, n)) < q
        even = draw[(draw.sum(axis=1) & 1) == 0]
        take = min(len(even), count - filled)
        out[filled:filled + take] = even[:take]
        filled += take
    return out


def sample_stabilizers(p: ToricParams, rng: np.random.Generator, size: int | None = None):
    """Draw stabilizer eigenvalues from the Gibbs state.

    Each stabilizer is violated independently with probability
    :func:`defect_probability`; configurations with odd plaquette or vertex
    parity are rejected and redrawn (acceptance >= 1/2 per sector).  The
    resulting single-stabilizer marginal is
    :func:`conditional_defect_probability`.

    Returns one :class:`StabilizerSample`, or arrays of shape ``(size, L^2)``
    when ``size`` is given.
    """
    q = defect_probability(p)
    n = p.L * p.L
    count = 1 if size is None else int(size)
    batch = max(16, min(2 * count + 16, 1 << 16))
    plaq = _sample_even_rows(rng, q, n, count, batch)
    vert = _sample_even_rows(rng, q, n, count, batch)
    plaq = np.where(plaq, -1, 1).astype(np.int8)
    vert = np.where(vert, -1, 1).astype(np.int8)
    if size is None:
        return StabilizerSample(plaq[0], vert[0])
    return StabilizerSample(plaq, vert)


def static_report(p: ToricParams, samples: int, seed: int, areas=None) -> dict:
    """Everything the ``toric-static`` command emits."""
    rng = np.random.default_rng(seed)
    if areas is None:
        areas = sorted({0, 1, 4, 9, 16, 25, 50, 100} | {p.L * p.L})
        areas = [a for a in areas if a <= p.L * p.L]
    sample = sample_stabilizers(p, rng, size=samples)
    defects = np.concatenate([(sample.plaquettes < 0), (sample.vertices < 0)], axis=1)
    per_sample = defects.mean(axis=1)
    return {
        "stabilizer_expectation": stabilizer_expectation(p),
        "beta_eff": beta_eff(p),
        "defect_density_analytic": defect_probability(p),
        "defect_density_conditional": conditional_defect_probability(p),
        "defect_density_empirical": float(per_sample.mean()),
        "defect_density_stderr": float(per_sample.std(ddof=1) / math.sqrt(samples)) if samples > 1 else None,
        "wilson_loop_table": [{"area": a, "value": wilson_loop(p, a)} for a in areas],
    }
