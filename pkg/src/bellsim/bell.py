"""CHSH assembly, multi-start angle optimization, and loss-threshold search.

A `Scenario` names one of the three state families (photon-number
polarization pairs, even coherent superpositions, displaced-thermal
mixtures), a loss placement, and which correlation engine to use:
`closed_form` for the fast reduced expressions, `oracle` for the term-by-term
pipelines they were validated against.  `optimize_chsh` maximizes |B| over
the four analyzer angles from a deterministic start grid, and
`threshold_eta2` finds the detector efficiency at which the optimized
violation disappears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from .catstates import correlation_ecs, correlation_ecs_closed
from .fockspace import LossPlacement, correlation_p, correlation_p_closed
from .numerics import bisect, minimize_simplex
from .thermal import ThermalParams, _assemble_correlation, _n_plus, _pattern_scalars, ets_correlation

TSIRELSON = 2.0 * math.sqrt(2.0)

_VIOLATION_MARGIN = 1e-9
_ETS_ORACLE_ORDER = 32
_DEFAULT_START_VALUES = (-0.375 * math.pi, -0.125 * math.pi, 0.125 * math.pi, 0.375 * math.pi)


@dataclass(frozen=True)
class AngleSet:
    """The four analyzer angles of one CHSH evaluation, in radians."""

    theta_a: float
    theta_b: float
    theta_a_prime: float
    theta_b_prime: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValueError(f"AngleSet.{name} must be a finite real, got {value!r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.theta_a, self.theta_b, self.theta_a_prime, self.theta_b_prime)

    def canonicalized(self) -> "AngleSet":
        """Fold every angle into [-pi/2, pi/2); the correlations have period pi."""

        def fold(t: float) -> float:
            return (t + 0.5 * math.pi) % math.pi - 0.5 * math.pi

        return AngleSet(*(fold(t) for t in self.as_tuple()))


@dataclass(frozen=True)
class Scenario:
    """One state family with its parameters, loss placement, and engine choice."""

    family: str
    loss: LossPlacement
    engine: str = "closed_form"
    n: int | None = None
    alpha: float | None = None
    V: float | None = None
    d: float | None = None

    def __post_init__(self):
        if self.engine not in ("closed_form", "oracle"):
            raise ValueError(f"Scenario: engine must be closed_form or oracle, got {self.engine!r}")
        if self.family == "polarization":
            if isinstance(self.n, bool) or not isinstance(self.n, int) or not 1 <= self.n <= 8:
                raise ValueError(f"Scenario: polarization needs integer n in [1, 8], got {self.n!r}")
        elif self.family == "ecs":
            if self.alpha is None or not 0.0 < self.alpha <= 4.0:
                raise ValueError(f"Scenario: ecs needs alpha in (0, 4], got {self.alpha!r}")
        elif self.family == "ets":
            if self.V is None or self.d is None:
                raise ValueError("Scenario: ets needs both V and d")
            ThermalParams(V=float(self.V), d=float(self.d))  # delegates range checks
        else:
            raise ValueError(f"Scenario: unknown family {self.family!r}")

    def thermal_params(self) -> ThermalParams:
        if self.family != "ets":
            raise ValueError(f"Scenario: no thermal parameters for family {self.family!r}")
        return ThermalParams(V=float(self.V), d=float(self.d))


@dataclass(frozen=True)
class BellResult:
    """Output of one |B| maximization."""

    b_max: float
    angles: AngleSet
    engine_used: str
    n_restarts: int
    converged: bool

    def __post_init__(self):
        if not 0.0 <= self.b_max <= TSIRELSON + 1e-6:
            raise ValueError(f"BellResult: b_max {self.b_max!r} outside [0, 2*sqrt(2)]")


class MonotonicityError(RuntimeError):
    """The pre-scan found b_max(eta2) decreasing past its last crossing of 2."""

    def __init__(self, prescan):
        self.prescan = tuple(prescan)
        points = ", ".join(f"({e:.2f}, {b:.6f})" for e, b in self.prescan)
        super().__init__(
            f"b_max(eta2) is not monotone past its last crossing of 2; pre-scan: {points}"
        )


def correlation_function(scenario: Scenario) -> Callable[[float, float], float]:
    """The correlation E(theta_a, theta_b) a scenario describes.

    For the thermal oracle engine the angle-independent quadrature scalars
    are computed once and reused across calls, since the optimizer evaluates
    thousands of angle pairs.
    """
    loss = scenario.loss
    if scenario.family == "polarization":
        n = scenario.n
        if scenario.engine == "closed_form":
            return lambda a, b: correlation_p_closed(n, a, b, loss)
        return lambda a, b: correlation_p(n, a, b, loss)
    if scenario.family == "ecs":
        alpha = float(scenario.alpha)
        if scenario.engine == "closed_form":
            return _product_closure(lambda a, b: correlation_ecs_closed(alpha, a, b, loss))
        return lambda a, b: correlation_ecs(alpha, a, b, loss)
    params = scenario.thermal_params()
    if scenario.engine == "closed_form":
        return _product_closure(lambda a, b: ets_correlation(a, b, params, loss))
    scal = _pattern_scalars(params, loss.eta_before, loss.eta_after, _ETS_ORACLE_ORDER)
    n_plus = _n_plus(params)

    def oracle(a: float, b: float) -> float:
        return _assemble_correlation(scal, n_plus, a, b).real

    return oracle


def _product_closure(correlation: Callable[[float, float], float]) -> Callable[[float, float], float]:
    """Hoist the two coefficients of a u cos2a cos2b + w sin2a sin2b correlation.

    Both coherent-superposition families have this form, with u and w built
    from angle-independent erf factors; reading them off once at (0, 0) and
    (pi/4, pi/4) keeps the per-call cost to four trig evaluations.
    """
    u = correlation(0.0, 0.0)
    w = correlation(0.25 * math.pi, 0.25 * math.pi)

    def fast(a: float, b: float) -> float:
        return u * math.cos(2.0 * a) * math.cos(2.0 * b) + w * math.sin(2.0 * a) * math.sin(2.0 * b)

    return fast


def chsh(correlation: Callable[[float, float], float], angles: AngleSet) -> float:
    """B = E(a,b) + E(a,b') + E(a',b) - E(a',b')."""
    a, b, ap, bp = angles.as_tuple()
    return correlation(a, b) + correlation(a, bp) + correlation(ap, b) - correlation(ap, bp)


def _wrap_objective(correlation: Callable[[float, float], float]) -> Callable:
    def b_of(point) -> float:
        try:
            return chsh(correlation, AngleSet(*point))
        except RecursionError:
            raise
        except Exception as exc:
            angles = tuple(float(v) for v in point)
            raise RuntimeError(f"correlation evaluation failed at angles {angles}: {exc}") from exc

    return b_of


def optimize_chsh(
    scenario: Scenario,
    start_grid: tuple[float, ...] = _DEFAULT_START_VALUES,
    refine_top: int = 8,
    correlation_fn: Callable[[float, float], float] | None = None,
) -> BellResult:
    """Maximize |B| over the four angles with multi-start simplex refinement.

    The start grid is the deterministic product of `start_grid` values on
    each of the four axes (4^4 = 256 points by default, the centers of the
    canonical angle cells).  The best `refine_top` starts are refined with
    Nelder-Mead for +B and, separately, for -B; the larger magnitude wins.
    `start_grid` exists so the restart-stability tests can run a disjoint
    grid; refinement tolerances are fixed.  `correlation_fn` overrides the
    scenario's own correlation (used by the sweep runner to evaluate the
    thermal oracle at a configured quadrature order).
    """
    correlation = correlation_fn if correlation_fn is not None else correlation_function(scenario)
    b_of = _wrap_objective(correlation)
    starts = [
        (a, b, ap, bp)
        for a in start_grid
        for b in start_grid
        for ap in start_grid
        for bp in start_grid
    ]
    graded = sorted(((b_of(s), s) for s in starts), key=lambda t: t[0])
    best_value = -1.0
    best_point = None
    best_converged = False
    n_restarts = 0
    for sign, ranked in ((1.0, graded[::-1]), (-1.0, graded)):
        for _, start in ranked[: min(refine_top, len(ranked))]:
            result = minimize_simplex(lambda x: -sign * b_of(x), list(start), tol=1e-10)
            n_restarts += 1
            magnitude = abs(result.value)
            if magnitude > best_value:
                best_value = magnitude
                best_point = result.point
                best_converged = result.converged
    angles = AngleSet(*(float(v) for v in best_point))
    if scenario.family == "polarization":
        angles = angles.canonicalized()
    return BellResult(
        b_max=float(best_value),
        angles=angles,
        engine_used=scenario.engine,
        n_restarts=n_restarts,
        converged=best_converged,
    )


def closed_form_bmax_p(n: int, eta: float) -> float:
    """Analytic |B|_max for the polarization family with detector loss only.

    With u = (1 - eta)^n the optimized Bell function is
    2 u^2 + 2 sqrt(2) (1 - u)^2: the u^2 background survives at the canonical
    angles while the interference term is extremized at -2 sqrt(2).
    """
    if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= 8:
        raise ValueError(f"closed_form_bmax_p: n must be an integer in [1, 8], got {n!r}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"closed_form_bmax_p: eta must lie in [0, 1], got {eta!r}")
    u = (1.0 - eta) ** n
    return 2.0 * u * u + 2.0 * math.sqrt(2.0) * (1.0 - u) ** 2


def closed_form_threshold_p(n: int) -> float:
    """Detector efficiency where the polarization violation disappears.

    Solving 2 u^2 + 2 sqrt(2) (1 - u)^2 = 2 for the nontrivial root gives
    u* = 3 - 2 sqrt(2), i.e. eta*(n) = 1 - (3 - 2 sqrt(2))^(1/n).
    """
    if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= 8:
        raise ValueError(f"closed_form_threshold_p: n must be an integer in [1, 8], got {n!r}")
    return 1.0 - (3.0 - 2.0 * math.sqrt(2.0)) ** (1.0 / n)


def product_form_bmax(correlation: Callable[[float, float], float]) -> float:
    """|B|_max for correlations of the form u cos2a cos2b + w sin2a sin2b.

    Both coherent-superposition families reduce to this form, whose CHSH
    optimum is 2 sqrt(u^2 + w^2) (attained with the primed angles mirrored).
    The two coefficients are read off at (0, 0) and (pi/4, pi/4).
    """
    u = correlation(0.0, 0.0)
    w = correlation(0.25 * math.pi, 0.25 * math.pi)
    return 2.0 * math.hypot(u, w)


def scenario_bmax(scenario: Scenario) -> float:
    """Optimized |B| for a scenario, via closed laws where they exist.

    The closed laws match `optimize_chsh` within 1e-6 (covered by tests);
    anything without a law runs the optimizer.
    """
    if scenario.engine == "closed_form":
        if scenario.family in ("ecs", "ets"):
            return product_form_bmax(correlation_function(scenario))
        if scenario.family == "polarization" and scenario.loss.eta_before == 1.0:
            return closed_form_bmax_p(scenario.n, scenario.loss.eta_after)
    return optimize_chsh(scenario).b_max


def threshold_eta2(
    scenario: Scenario,
    tol: float = 1e-4,
    bmax_fn: Callable[[float], float] | None = None,
) -> float | None:
    """Detector efficiency eta2 at which the optimized violation disappears.

    The scenario's eta_after is the free variable (its stored value is
    ignored).  An 11-point pre-scan locates the last crossing of 2: points at
    or below 2 + 1e-9 count as non-violating, b_max must be non-decreasing
    from the last non-violating point onward (MonotonicityError carrying the
    pre-scan otherwise), and the crossing interval is bisected to `tol`.

    Returns None when there is no violation even at eta2 = 1 - a result, not
    a failure.  `bmax_fn` overrides the b_max evaluation (testing seam).
    """
    if not 0.0 < tol <= 0.1:
        raise ValueError(f"threshold_eta2: tol must lie in (0, 0.1], got {tol!r}")
    if bmax_fn is None:
        base = scenario

        def bmax_fn(eta2: float) -> float:
            loss = LossPlacement(base.loss.eta_before, eta2)
            return scenario_bmax(replace(base, loss=loss))

    scan = [(k / 10.0, bmax_fn(k / 10.0)) for k in range(11)]
    if scan[-1][1] <= 2.0 + _VIOLATION_MARGIN:
        return None
    non_violating = [i for i, (_, b) in enumerate(scan) if b <= 2.0 + _VIOLATION_MARGIN]
    if not non_violating:
        raise ValueError(
            "threshold_eta2: the violation persists on the whole eta2 grid; "
            f"b_max(0) = {scan[0][1]!r} >= 2"
        )
    last = non_violating[-1]
    tail = scan[last:]
    for (_, b_lo), (_, b_hi) in zip(tail, tail[1:]):
        if b_hi < b_lo - _VIOLATION_MARGIN:
            raise MonotonicityError(scan)
    return bisect(lambda e2: bmax_fn(e2) - 2.0, scan[last][0], scan[last + 1][0], tol=tol)
