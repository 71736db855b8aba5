"""Kosterlitz–Thouless flow with an entropically suppressed vortex fugacity.

The flow is integrated in the variables ``u = 1/K`` and ``ln y``::

    du/dl    = 4 pi^3 y^2
    dlny/dl  = 2 - pi K

which keeps ``y > 0`` exactly.  The truncated system has the conserved
quantity ``H(u, y) = y^2 - g(u) / (2 pi^3)`` with ``g(u) = 2u - pi ln u``;
``g`` is minimal at ``u = pi/2`` so the separatrix through the fixed point
``(u, y) = (pi/2, 0)`` is ``H = -g(pi/2) / (2 pi^3)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.integrate
import scipy.optimize

K_CRIT = 2.0 / math.pi
NU_CAP = 1e6  # nu_eff beyond this is reported as divergent
DEFAULT_L_MAX = 200.0
_FOUR_PI3 = 4.0 * math.pi**3


class FlowError(RuntimeError):
    """Integrator failure; ``trajectory`` holds the samples obtained so far."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class BktParams:
    """Bare couplings of the vortex gas.

    ``K0 = beta * Jxy``, ``y0 = exp(-beta * E_c)`` and the flow starts from
    ``y0 / M``.  ``E_c = inf`` gives ``y0 = 0``.
    """

    beta: float
    Jxy: float
    E_c: float
    M: int = 1
    y_star: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        for name in ("beta", "Jxy", "y_star", "a"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not (isinstance(self.E_c, (int, float, np.floating, np.integer)) and self.E_c > 0) \
                or math.isnan(self.E_c):
            raise ValueError(f"E_c must be positive, got {self.E_c!r}")
        if isinstance(self.M, bool) or not isinstance(self.M, (int, np.integer)) or self.M < 1:
            raise ValueError(f"M must be an integer >= 1, got {self.M!r}")

    @classmethod
    def from_couplings(cls, K0: float, y0: float, M: int = 1, **kw) -> "BktParams":
        """Parameters with ``beta = 1`` and the given bare ``K0`` and ``y0``."""
        if not 0 <= y0 < 1:
            raise ValueError("y0 must lie in [0, 1)")
        E_c = math.inf if y0 == 0 else -math.log(y0)
        return cls(1.0, float(K0), E_c, M, **kw)

    @property
    def K0(self) -> float:
        return self.beta * self.Jxy

    @property
    def log_y0(self) -> float:
        return -self.beta * self.E_c

    @property
    def y0(self) -> float:
        return math.exp(self.log_y0)

    @property
    def log_y_eff(self) -> float:
        return self.log_y0 - math.log(self.M)

    @property
    def y_eff(self) -> float:
        return math.exp(self.log_y_eff)

    def with_(self, **kw) -> "BktParams":
        d = dict(beta=self.beta, Jxy=self.Jxy, E_c=self.E_c, M=self.M, y_star=self.y_star, a=self.a)
        d.update(kw)
        return BktParams(**d)


class RgTrajectory(NamedTuple):
    l: np.ndarray
    K: np.ndarray
    y: np.ndarray
    l_star: float | None
    reason: str  # "proliferated", "l_max", "zero-fugacity"


def _rhs(l, z):
    u, lny = z
    return (_FOUR_PI3 * math.exp(2.0 * lny), 2.0 - math.pi / u)


def integrate_flow(p: BktParams, l_max: float = DEFAULT_L_MAX, *, rtol: float = 1e-10,
                   atol: float = 1e-12, dense_points: int | None = None) -> RgTrajectory:
    """Integrate the flow from ``(K0, y0/M)`` with an adaptive RK4(5) scheme.

    Stops when ``y`` reaches ``p.y_star`` (``l_star`` is then the crossing
    scale, located by root finding on the dense output) or at ``l_max``.
    ``dense_points`` adds evenly spaced samples; otherwise the integrator's
    own steps are returned.
    """
    if not (l_max > 0 and math.isfinite(l_max)):
        raise ValueError("l_max must be positive and finite")
    if math.isinf(p.E_c):
        l = np.array([0.0, l_max])
        return RgTrajectory(l, np.full(2, p.K0), np.zeros(2), None, "zero-fugacity")

    log_ystar = math.log(p.y_star)

    def hit(l, z):
        return z[1] - log_ystar
    hit.terminal = True
    hit.direction = 1

    z0 = (1.0 / p.K0, p.log_y_eff)
    if z0[1] >= log_ystar:
        return RgTrajectory(np.array([0.0]), np.array([p.K0]), np.array([p.y_eff]), 0.0, "proliferated")
    t_eval = None if dense_points is None else np.linspace(0.0, l_max, dense_points)
    sol = scipy.integrate.solve_ivp(_rhs, (0.0, l_max), z0, method="RK45", rtol=rtol, atol=atol,
                                    events=hit, t_eval=t_eval)
    l = sol.t
    u, lny = sol.y
    if sol.status == 1 and len(sol.t_events[0]):
        l_star = float(sol.t_events[0][0])
        if t_eval is not None:
            l = np.append(l, l_star)
            zs = sol.y_events[0][0]
            u = np.append(u, zs[0])
            lny = np.append(lny, zs[1])
        traj = RgTrajectory(l, 1.0 / u, np.exp(lny), l_star, "proliferated")
        return traj
    traj = RgTrajectory(l, 1.0 / u, np.exp(lny), None, "l_max")
    if sol.status < 0:
        raise FlowError(f"flow integration failed: {sol.message}", traj)
    return traj


def correlation_length(p: BktParams, l_max: float = DEFAULT_L_MAX, **kw) -> float:
    """``a * exp(l_star)``, or ``math.inf`` if vortices never proliferate before ``l_max``."""
    traj = integrate_flow(p, l_max, **kw)
    if traj.l_star is None:
        return math.inf
    return p.a * math.exp(traj.l_star)


def log_correlation_length(p: BktParams, l_max: float = DEFAULT_L_MAX, **kw) -> float:
    """``ln(xi / a) = l_star`` (``inf`` on the ordered side); avoids overflow."""
    traj = integrate_flow(p, l_max, **kw)
    return math.inf if traj.l_star is None else traj.l_star


def nu_eff(p: BktParams | float) -> float:
    """``1 / (2 - pi K0)`` on the disordered side of the bare flow.

    Accepts a :class:`BktParams` or a bare ``K0``.  Raises ``ValueError`` for
    ``K0 >= 2/pi`` and when the result would exceed ``NU_CAP``.
    """
    K0 = p.K0 if isinstance(p, BktParams) else float(p)
    if not K0 >= 0:
        raise ValueError("K0 must be non-negative")
    gap = 2.0 - math.pi * K0
    if gap <= 0:
        raise ValueError(f"nu_eff undefined for K0 = {K0:.6g} >= 2/pi")
    nu = 1.0 / gap
    if nu > NU_CAP:
        raise ValueError(f"nu_eff diverges near K0 = 2/pi (would be {nu:.3g} > cap {NU_CAP:g})")
    return nu


# --- separatrix -----------------------------------------------------------

def _g(u):
    return 2.0 * u - math.pi * math.log(u)


def flows_to_order(K0: float, y: float) -> bool:
    """True if the truncated flow from ``(K0, y)`` ends on the fixed line ``y = 0``.

    Uses the conserved quantity: ordered iff ``K0 > 2/pi`` and
    ``2 pi^3 y^2 < g(1/K0) - g(pi/2)``.
    """
    u = 1.0 / K0
    if u >= math.pi / 2:
        return False
    return 2.0 * math.pi**3 * y * y < _g(u) - _g(math.pi / 2)


def _ordered_at(template: BktParams, beta: float, M: int) -> bool:
    q = template.with_(beta=beta, M=M)
    return flows_to_order(q.K0, q.y_eff)


def beta_bkt(template: BktParams, M: int = 1, *, beta_hi: float | None = None,
             xtol: float = 1e-13) -> float:
    """Inverse temperature where the bare point crosses the separatrix.

    Bisection in ``beta`` on the ordered/disordered classification of the
    start point ``(beta Jxy, exp(-beta E_c) / M)``; the classification uses
    the exact flow invariant.  Only the ``Jxy`` and ``E_c`` of ``template``
    matter.
    """
    lo = 0.5 * K_CRIT / template.Jxy  # K0 < 2/pi: always disordered
    hi = beta_hi if beta_hi is not None else 2.0 * K_CRIT / template.Jxy
    grow = 0
    while not _ordered_at(template, hi, M):
        hi *= 2.0
        grow += 1
        if grow > 60:
            raise ValueError("could not bracket the transition (no ordered phase found)")
    while hi - lo > xtol * hi:
        mid = 0.5 * (lo + hi)
        if _ordered_at(template, mid, M):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class CrossoverResult(NamedTuple):
    L: float
    M: int
    beta_bkt: float
    beta_c: float
    beta_c_estimate: float | None
    nu_eff: float | None
    b: float | None
    note: str

    def as_dict(self) -> dict:
        return self._asdict()


def beta_at_xi(template: BktParams, L: float, M: int | None = None, *, l_max: float | None = None,
               xtol: float = 1e-12) -> float:
    """Solve ``xi(beta) = L`` on the disordered side by bracketing root search."""
    M = template.M if M is None else int(M)
    if not L > template.a:
        raise ValueError("L must exceed the lattice constant a")
    target = math.log(L / template.a)
    l_max = max(DEFAULT_L_MAX, 4 * target) if l_max is None else l_max
    b_sep = beta_bkt(template, M)

    def f(beta):
        lx = log_correlation_length(template.with_(beta=beta, M=M), l_max)
        return (lx if math.isfinite(lx) else 10 * l_max) - target

    lo = 1e-6 * b_sep
    if f(lo) >= 0:
        raise ValueError("xi already exceeds L at the smallest beta; no bracket")
    hi = b_sep * (1 - 1e-14)
    if f(hi) <= 0:
        raise ValueError("xi stays below L up to the transition; increase l_max")
    return float(scipy.optimize.brentq(f, lo, hi, xtol=xtol * b_sep, rtol=4 * np.finfo(float).eps))


def crossover_estimate(beta_bkt_value: float, L: float, M: int, b: float, nu: float) -> float:
    """Closed-form ``beta_c`` from ``beta_BKT / beta_c = 1 + (b / (ln L - nu ln M))^2``."""
    denom = math.log(L) - nu * math.log(M)
    if denom <= 0:
        raise ValueError(f"ln L = {math.log(L):.4g} must exceed nu_eff ln M = {nu * math.log(M):.4g}")
    return beta_bkt_value / (1.0 + (b / denom) ** 2)


def crossover_beta(template: BktParams, L: float, b: float | None = None,
                   M: int | None = None) -> CrossoverResult:
    """Finite-size coherence crossover ``beta_c`` where ``xi = L``.

    ``beta_BKT`` is that of the bare (``M = 1``) flow.  When ``b`` is given
    the closed-form estimate is also returned, with ``nu_eff`` taken at the
    bare ``K0`` of the estimate itself (found self-consistently).  Validity
    problems are reported in ``note`` rather than raised.
    """
    M = template.M if M is None else int(M)
    bb = beta_bkt(template, 1)
    bc = beta_at_xi(template, L, M)
    est = nu = None
    note = ""
    if b is not None:
        if M == 1:
            est = crossover_estimate(bb, L, 1, b, 0.0)
        else:
            def resid(beta):
                nu_b = nu_eff(beta * template.Jxy)
                if math.log(L) <= nu_b * math.log(M):
                    return -beta  # outside the formula's domain the estimate collapses to 0
                return crossover_estimate(bb, L, M, b, nu_b) - beta
            hi = K_CRIT / template.Jxy * (1 - 1e-5)
            try:
                if math.log(L) <= 0.5 * math.log(M):
                    raise ValueError("ln L <= nu_eff ln M for every K0 (nu_eff >= 1/2)")
                if resid(hi) > 0:
                    raise ValueError("estimate reaches K0 = 2/pi where nu_eff is undefined")
                lo = 1e-9 * hi
                est = float(scipy.optimize.brentq(resid, lo, hi, xtol=1e-14))
                nu = nu_eff(est * template.Jxy)
            except ValueError as exc:
                note = f"closed-form estimate unavailable: {exc}"
                est = None
    return CrossoverResult(float(L), M, bb, bc, est, nu, b, note)


def fit_b(template: BktParams, betas) -> tuple[float, np.ndarray]:
    """Fit ``ln xi = b / sqrt(beta_BKT/beta - 1)`` on the ``M = 1`` flow.

    Returns ``b`` (least squares through the origin) and the per-point
    ratios ``ln xi * sqrt(beta_BKT/beta - 1)``.
    """
    bb = beta_bkt(template, 1)
    betas = np.asarray(betas, dtype=float)
    if np.any(betas >= bb) or np.any(betas <= 0):
        raise ValueError("fit betas must lie in (0, beta_BKT)")
    x = 1.0 / np.sqrt(bb / betas - 1.0)
    lx = np.array([log_correlation_length(template.with_(beta=float(be), M=1)) for be in betas])
    b = float(np.dot(x, lx) / np.dot(x, x))
    return b, lx / x


def vortex_kinetics(p: BktParams, D0: float) -> tuple[float, float]:
    """``(D_eff, gamma_slip_scale) = (D0/M, (y0/M) * D0/M)``; prefactors set to 1."""
    if not (math.isfinite(D0) and D0 > 0):
        raise ValueError("D0 must be positive and finite")
    D_eff = D0 / p.M
    return D_eff, p.y_eff * D_eff
