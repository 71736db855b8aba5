"""Exact solution of the Ising chain coupled to local M-state baths.

Each bond carries a bath with levels ``n = 0 .. M-1``.  The level spacing is
``eps`` when the bond is satisfied and ``J`` when it holds a domain wall, so
tracing the bath out gives bond weights

    w_plus  = sum_n exp(-beta * eps * n)
    w_minus = sum_n exp(-beta * J * n)

An optional direct coupling ``Jprime`` multiplies them by ``exp(+-beta*Jprime)``.
Everything downstream (correlation length, finite-ring correlator) follows from
the 2x2 transfer matrix ``[[w+, w-], [w-, w+]]``.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple

import mpmath
import numpy as np

# Regime thresholds on the dimensionless ratios; "<<" and ">>" are read as a
# factor of ten.
SMALL = 0.1
LARGE = 10.0


def _positive_finite(name, value):
    value = float(value)
    if math.isnan(value):
        raise ValueError(f"{name} is NaN")
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value


@dataclass(frozen=True)
class ChainParams:
    beta: float
    eps: float
    J: float
    M: int
    Jprime: float = 0.0

    def __post_init__(self):
        for name in ("beta", "eps", "J"):
            object.__setattr__(self, name, _positive_finite(name, getattr(self, name)))
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")
        object.__setattr__(self, "M", int(self.M))
        jp = float(self.Jprime)
        if math.isnan(jp) or jp < 0 or not math.isfinite(jp):
            raise ValueError(f"Jprime must be finite and >= 0, got {self.Jprime}")
        object.__setattr__(self, "Jprime", jp)


class BathWeights(NamedTuple):
    w_plus: float
    w_minus: float


class Regime(str, enum.Enum):
    INVERSE_MELTING = "InverseMelting"
    SATURATED_PLATEAU = "SaturatedPlateau"
    BREAKDOWN = "Breakdown"
    UNCLASSIFIED = "Unclassified"


class RegimeLabel(NamedTuple):
    regime: Regime
    beta_eps: float
    beta_eps_M: float
    beta_J: float


def log_geometric_sum(x: float, M: int) -> float:
    """``log(sum_{n<M} exp(-x n))`` for ``x >= 0``, stable for any ``x * M``."""
    if x == 0.0:
        return math.log(M)
    # (1 - e^{-xM}) / (1 - e^{-x}) with both factors via expm1
    return math.log(-math.expm1(-x * M)) - math.log(-math.expm1(-x))


def bath_weights(p: ChainParams) -> BathWeights:
    """Per-bond bath partition sums, without the ``Jprime`` factor."""
    return BathWeights(
        math.exp(log_geometric_sum(p.beta * p.eps, p.M)),
        math.exp(log_geometric_sum(p.beta * p.J, p.M)),
    )


def log_lambda(p: ChainParams) -> float:
    return (
        log_geometric_sum(p.beta * p.eps, p.M)
        - log_geometric_sum(p.beta * p.J, p.M)
        + 2.0 * p.beta * p.Jprime
    )


def lambda_ratio(p: ChainParams) -> float:
    """``w+/w-`` times ``exp(2 beta Jprime)``; may overflow to ``inf``."""
    ll = log_lambda(p)
    return math.exp(ll) if ll < 709.0 else math.inf


def _xi_from_log_lambda(ll: float) -> float:
    if ll <= 0.0:
        return 0.0
    # 1 / ln((lam+1)/(lam-1)) == 1 / (2 atanh(1/lam))
    if ll > 700.0:
        # atanh(z) ~ z here, so xi ~ lam / 2
        return math.exp(ll - math.log(2.0)) if ll < 709.0 else math.inf
    return 1.0 / (2.0 * math.atanh(math.exp(-ll)))


def correlation_length(p: ChainParams) -> float:
    """Infinite-chain correlation length in lattice units; 0 when ``lambda <= 1``."""
    return _xi_from_log_lambda(log_lambda(p))


_DIRECT_SUM_MAX_M = 256


def _bond_ratio(p: ChainParams) -> float:
    """Eigenvalue ratio ``t = (w+ - w-)/(w+ + w-) = tanh(ln(lambda)/2)``.

    For moderate ``M`` the numerator is summed term by term as
    ``e^{-a n} (1 - e^{-(b-a) n - 2c})`` (``a = beta eps``, ``b = beta J``,
    ``c = beta J'``), which avoids the cancellation in ``ln w+ - ln w-`` when
    ``lambda`` is close to 1.
    """
    if p.M > _DIRECT_SUM_MAX_M:
        return math.tanh(0.5 * log_lambda(p))
    a, b, c2 = p.beta * p.eps, p.beta * p.J, 2.0 * p.beta * p.Jprime
    gap = p.beta * (p.J - p.eps)
    num = den = 0.0
    for n in range(p.M):
        fa = math.exp(-a * n)
        num -= fa * math.expm1(-gap * n - c2)
        den += fa + math.exp(-b * n - c2)
    return num / den


def finite_chain_correlator(p: ChainParams, L: int, r: int) -> float:
    """``<Z_i Z_{i+r}>`` on a periodic ring of ``L`` sites.

    Uses both transfer-matrix eigenvalues, so it is exact at any ``L``; as
    ``L -> inf`` it reduces to ``t**r`` with ``t = (w+ - w-)/(w+ + w-)``.
    """
    L, r = int(L), int(r)
    if L < 2:
        raise ValueError("ring length L must be >= 2")
    if not 0 <= r <= L:
        raise ValueError(f"separation r must lie in [0, L], got r={r}, L={L}")
    t = _bond_ratio(p)
    return (t**r + t ** (L - r)) / (1.0 + t**L)


BRUTE_FORCE_MAX_L = 12
BRUTE_FORCE_MAX_M = 6


def brute_force_correlator(p: ChainParams, L: int, r: int, dps: int = 40) -> float:
    """Boltzmann average over all ``2**L`` spin configurations of the ring.

    Independent of the transfer-matrix route: bath sums are explicit loops
    over the ``M`` levels and the arithmetic is done at ``dps`` decimal digits.
    """
    L, r = int(L), int(r)
    if not 2 <= L <= BRUTE_FORCE_MAX_L:
        raise ValueError(f"brute force supports 2 <= L <= {BRUTE_FORCE_MAX_L}")
    if p.M > BRUTE_FORCE_MAX_M:
        raise ValueError(f"brute force supports M <= {BRUTE_FORCE_MAX_M}")
    if not 0 <= r <= L:
        raise ValueError(f"separation r must lie in [0, L], got r={r}, L={L}")

    with mpmath.workdps(dps):
        beta = mpmath.mpf(p.beta)
        eps, J, Jp = mpmath.mpf(p.eps), mpmath.mpf(p.J), mpmath.mpf(p.Jprime)

        def bond_weight(aligned: bool):
            level = eps if aligned else J
            total = mpmath.mpf(0)
            for n in range(p.M):
                total += mpmath.exp(-beta * level * n)
            return total * mpmath.exp(beta * Jp if aligned else -beta * Jp)

        w_aligned, w_wall = bond_weight(True), bond_weight(False)
        Z = mpmath.mpf(0)
        corr = mpmath.mpf(0)
        for spins in itertools.product((1, -1), repeat=L):
            weight = mpmath.mpf(1)
            for i in range(L):
                weight *= w_aligned if spins[i] == spins[(i + 1) % L] else w_wall
            Z += weight
            corr += weight * spins[0] * spins[r % L]
        return float(corr / Z)


def classify_regime(p: ChainParams) -> RegimeLabel:
    if p.Jprime != 0.0:
        raise ValueError("regime classification is defined for Jprime = 0 only")
    be, bem, bj = p.beta * p.eps, p.beta * p.eps * p.M, p.beta * p.J
    if be <= SMALL and bem >= LARGE and bj >= LARGE:
        regime = Regime.INVERSE_MELTING
    elif bem <= SMALL and bj >= LARGE:
        regime = Regime.SATURATED_PLATEAU
    elif bj <= SMALL:
        regime = Regime.BREAKDOWN
    else:
        regime = Regime.UNCLASSIFIED
    return RegimeLabel(regime, be, bem, bj)


class ScanRow(NamedTuple):
    inv_beta: float
    xi: float
    regime: str


def xi_scan(template: ChainParams, beta_grid: Iterable[float]) -> list[ScanRow]:
    """Correlation length along a monotone grid of inverse temperatures."""
    betas = np.asarray(list(beta_grid), dtype=float)
    if betas.size > 1:
        d = np.diff(betas)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("beta_grid must be strictly monotone")
    rows = []
    for beta in betas:
        p = replace(template, beta=float(beta))
        label = classify_regime(p).regime.value if p.Jprime == 0.0 else Regime.UNCLASSIFIED.value
        rows.append(ScanRow(1.0 / float(beta), correlation_length(p), label))
    return rows


def log_beta_grid(beta_min: float, beta_max: float, points: int) -> np.ndarray:
    """Geometric grid, returned in order of increasing temperature."""
    if points < 1:
        raise ValueError("points must be >= 1")
    if not (0 < beta_min <= beta_max):
        raise ValueError("need 0 < beta_min <= beta_max")
    return np.geomspace(beta_max, beta_min, points)
