"""Runtime cross-validation: each closed form against its independent oracle.

Every check is named so failures point at a specific pairing.  The thermal
closed-form check is special-cased to WARN instead of FAIL: the transcribed
expression disagrees with the quadrature at finite displacement, the
quadrature is authoritative, and the check exists to print both values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bell import Scenario, TSIRELSON, optimize_chsh
from .catstates import correlation_ecs, dyad_loss, fock_oracle_ecs, joint_sign_probs, make_ecs
from .fockspace import LossPlacement, correlation_p, correlation_p_closed
from .numerics import erf_c, erfi_c, faddeeva
from .sweep import ConfigError
from .thermal import ThermalParams, cets_closed_form, cets_quadrature


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str          # PASS | WARN | FAIL
    detail: str


def _check_polarization_law():
    thetas = [-0.6, -0.2, 0.0, 0.3, 0.7]
    etas = [0.1, 0.3, 0.5, 0.7, 0.9]
    dev = 0.0
    for n in range(1, 5):
        for ta in thetas:
            for tb in thetas:
                for eta in etas:
                    loss = LossPlacement(1.0, eta)
                    dev = max(dev, abs(correlation_p(n, ta, tb, loss) - correlation_p_closed(n, ta, tb, loss)))
    return dev, 1e-10, "Fock pipeline vs reduced law, n <= 4 on a 5x5x5 grid"


def _check_ecs_oracle():
    probes = [
        (0.12, -0.47, LossPlacement(1.0, 1.0)),
        (0.30, 0.20, LossPlacement(1.0, 0.7)),
        (-0.25, 0.40, LossPlacement(0.8, 0.9)),
    ]
    dev = 0.0
    for alpha in (0.5, 1.0):
        for ta, tb, loss in probes:
            # 28 photons keeps the Poisson tail far below the 1e-6 check
            # tolerance and quarters the oracle's tensor size.
            oracle = fock_oracle_ecs(alpha, ta, tb, loss, n_max=28)
            dev = max(dev, abs(correlation_ecs(alpha, ta, tb, loss) - oracle))
    return dev, 1e-6, "coherent-dyad algebra vs truncated-Fock oracle, alpha in {0.5, 1}"


def _check_ets_closed_form():
    probes = [
        (0.10, 0.05, ThermalParams(V=10.0, d=5.0), 0.9, 32),
        (0.40, -0.30, ThermalParams(V=3.0, d=1.5), 0.8, 24),
    ]
    dev, worst = 0.0, None
    for ta, tb, params, eta, order in probes:
        closed = cets_closed_form(ta, tb, params, eta)
        quad = cets_quadrature(ta, tb, params, eta, order=order)
        if abs(closed - quad) > dev:
            dev, worst = abs(closed - quad), (ta, tb, params, eta, closed, quad)
    ta, tb, params, eta, closed, quad = worst
    detail = (
        f"closed={closed!r} quadrature={quad!r} at "
        f"(theta_a={ta}, theta_b={tb}, V={params.V}, d={params.d}, eta={eta}); "
        "the quadrature is authoritative"
    )
    return dev, 1e-3, detail


def _check_erf_identities():
    dev = max(
        abs(faddeeva(0.0) - 1.0),
        abs(erf_c(0.7) - math.erf(0.7)),
        abs(erfi_c(1j * 0.8) - 1j * math.erf(0.8)),
        abs(erf_c(0.3 - 0.4j) - erf_c(0.3 + 0.4j).conjugate()),
        abs(erfi_c(-(0.5 + 0.2j)) + erfi_c(0.5 + 0.2j)),
    )
    return dev, 1e-12, "Faddeeva/erf/erfi identities at fixed probes"


def _check_dyad_trace():
    state = make_ecs(1.2)
    dev = abs(state.trace() - 1.0)
    lossy = dyad_loss(dyad_loss(state, "a", 0.85), "b", 0.6)
    dev = max(dev, abs(lossy.trace() - 1.0))
    # Semigroup composition: losing 0.9 then 0.8 of the light equals one
    # channel at 0.72, term by term through the sign probabilities.
    twice = dyad_loss(dyad_loss(state, "a", 0.9), "a", 0.8)
    once = dyad_loss(state, "a", 0.72)
    for p, q in zip(joint_sign_probs(twice), joint_sign_probs(once)):
        dev = max(dev, abs(p - q))
    return dev, 1e-12, "trace preservation and loss-channel semigroup composition"


def _check_sign_probabilities():
    state = dyad_loss(make_ecs(1.0), "a", 0.75)
    probs = joint_sign_probs(state)
    dev = abs(sum(probs) - 1.0)
    for p in probs:
        dev = max(dev, max(0.0, -p), max(0.0, p - 1.0))
    return dev, 1e-9, "joint homodyne sign probabilities normalize"


def _check_tsirelson():
    result = optimize_chsh(Scenario("polarization", LossPlacement(1.0, 1.0), n=1))
    return abs(result.b_max - TSIRELSON), 1e-6, "lossless optimum saturates, never exceeds, 2*sqrt(2)"


_CHECKS = (
    ("polarization-law-vs-fock", _check_polarization_law, False),
    ("ecs-dyad-vs-fock", _check_ecs_oracle, False),
    ("ets-closed-vs-quadrature", _check_ets_closed_form, True),
    ("erf-identities", _check_erf_identities, False),
    ("dyad-trace-and-semigroup", _check_dyad_trace, False),
    ("sign-probability-normalization", _check_sign_probabilities, False),
    ("tsirelson-ceiling", _check_tsirelson, False),
)


def run_validate(corrupt: str | None = None) -> tuple[int, list[CheckResult]]:
    """Run every check; returns (exit_code, results).

    `corrupt` inflates the named check's measured deviation by 1.0 so the
    failure path can be exercised deliberately; it is a test hook, not a
    user feature.
    """
    names = [name for name, _, _ in _CHECKS]
    if corrupt is not None and corrupt not in names:
        raise ConfigError(f"unknown check {corrupt!r}; choices: {names}")
    results = []
    failed = False
    for name, fn, warn_only in _CHECKS:
        dev, tol, detail = fn()
        if corrupt == name:
            dev += 1.0
        if dev < tol:
            status = "PASS"
        elif warn_only:
            status = "WARN"
        else:
            status = "FAIL"
            failed = True
        results.append(CheckResult(name, status, f"max|dev| = {dev:.3e} (tol {tol:g}); {detail}"))
    return (3 if failed else 0), results
