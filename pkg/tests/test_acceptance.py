"""Acceptance panel: the headline results, one criterion per test.

Each test prints a single `criterion N: PASS/FAIL` line before asserting,
so the panel reads top to bottom in the captured output.  Three criteria
(4, 6, 7) currently fail: the faithful simulation produces thresholds
outside their target bands.  The failing values are stable, cross-checked
against independent oracles, and documented in the README; the tests are
left red rather than widened.
"""

import math
import time

from bellsim.bell import (
    Scenario,
    closed_form_threshold_p,
    scenario_bmax,
    threshold_eta2,
)
from bellsim.catstates import correlation_ecs, fock_oracle_ecs
from bellsim.fockspace import LossPlacement, correlation_p, correlation_p_closed
from bellsim.thermal import ThermalParams, cets_closed_form, cets_quadrature, gamma_to_eta
from bellsim.validate import run_validate


def _report(k: int, ok: bool, detail: str) -> None:
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})")


def _pol(n: int, eta1: float = 1.0) -> Scenario:
    return Scenario("polarization", LossPlacement(eta1, 1.0), n=n)


def _ecs(alpha: float, eta1: float = 1.0) -> Scenario:
    return Scenario("ecs", LossPlacement(eta1, 1.0), alpha=alpha)


def test_criterion_01_pol_threshold_n1():
    t0 = time.perf_counter()
    got = threshold_eta2(_pol(1))
    elapsed = time.perf_counter() - t0
    ok = got is not None and abs(got - 0.8284) <= 1e-3 and elapsed < 5.0
    _report(1, ok, f"threshold {got:.6f}, target 0.8284 +/- 1e-3, {elapsed:.2f} s")
    assert ok


def test_criterion_02_pol_threshold_n4():
    t0 = time.perf_counter()
    got = threshold_eta2(_pol(4))
    elapsed = time.perf_counter() - t0
    ok = got is not None and abs(got - 0.3564) <= 2e-3 and elapsed < 20.0
    _report(2, ok, f"threshold {got:.6f}, target 0.3564 +/- 2e-3, {elapsed:.2f} s")
    assert ok


def test_criterion_03_threshold_law():
    worst = 0.0
    for n in range(1, 5):
        got = threshold_eta2(_pol(n))
        worst = max(worst, abs(got - closed_form_threshold_p(n)))
    ok = worst <= 1e-3
    _report(3, ok, f"search vs 1-(3-2*sqrt(2))^(1/n), max|dev| = {worst:.2e}, tol 1e-3")
    assert ok


def test_criterion_04_ecs_threshold():
    t0 = time.perf_counter()
    got = threshold_eta2(_ecs(1.0))
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    # The faithful sign-binned homodyne readout puts this threshold at
    # 0.5144, just outside the target band; see the README acceptance notes.
    ok = got is not None and abs(got - 0.50) <= 0.01
    _report(4, ok, f"threshold {got:.6f}, target 0.50 +/- 0.01, {elapsed:.2f} s")
    assert ok


def test_criterion_05_family_comparison():
    pol_t = threshold_eta2(_pol(1))
    ecs_t = threshold_eta2(_ecs(1.0))
    ok = (
        pol_t is not None and ecs_t is not None
        and ecs_t < pol_t
        and abs(pol_t - 0.83) <= 0.01
        and abs(ecs_t - 0.50) <= 0.02
    )
    _report(5, ok, f"pol n=1 {pol_t:.4f} (band 0.83 +/- 0.01) vs ecs alpha=1 {ecs_t:.4f} (band 0.50 +/- 0.02)")
    assert ok


def test_criterion_06_pol_threshold_with_preloss():
    got = threshold_eta2(_pol(3, eta1=0.95))
    # Faithful value 0.5367.  Running the same search at eta1 = 0.95**2
    # = 0.9025 (5% amplitude damping instead of 5% energy loss) gives
    # 0.6108, inside the band; this implementation treats eta1 as energy
    # transmissivity throughout.  See the README acceptance notes.
    ok = got is not None and abs(got - 0.61) <= 0.01
    _report(6, ok, f"threshold {got:.6f}, target 0.61 +/- 0.01")
    assert ok


def test_criterion_07_ecs_threshold_with_preloss():
    t0 = time.perf_counter()
    got = threshold_eta2(_ecs(2.0, eta1=0.85))
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    # Faithful value 0.6991; with 15% pre-rotation loss the alpha=2 state's
    # interference term is suppressed by exp(-4(1-eta1)alpha^2) ~ 0.09, so a
    # 0.17 detector-side threshold is unreachable in this model; README.
    ok = got is not None and abs(got - 0.17) <= 0.015
    _report(7, ok, f"threshold {got:.6f}, target 0.17 +/- 0.015, {elapsed:.2f} s")
    assert ok


def test_criterion_08_oracle_equivalence():
    thetas = [-0.6, -0.2, 0.0, 0.3, 0.7]
    etas = [0.1, 0.3, 0.5, 0.7, 0.9]
    dev_pol = max(
        abs(correlation_p(n, ta, tb, LossPlacement(1.0, eta))
            - correlation_p_closed(n, ta, tb, LossPlacement(1.0, eta)))
        for n in range(1, 5) for ta in thetas for tb in thetas for eta in etas
    )
    dev_ecs = max(
        abs(correlation_ecs(alpha, ta, tb, loss) - fock_oracle_ecs(alpha, ta, tb, loss, n_max=28))
        for alpha in (0.5, 1.0)
        for ta, tb, loss in (
            (0.12, -0.47, LossPlacement(1.0, 1.0)),
            (0.30, 0.20, LossPlacement(1.0, 0.7)),
            (-0.25, 0.40, LossPlacement(0.8, 0.9)),
        )
    )
    params = ThermalParams(V=10.0, d=5.0)
    closed = cets_closed_form(0.1, 0.05, params, 0.9)
    quad = cets_quadrature(0.1, 0.05, params, 0.9, order=32)
    dev_ets = abs(closed - quad)
    if dev_ets < 1e-3:
        ets_note = f"ets closed vs quadrature {dev_ets:.2e}"
    else:
        # The transcribed closed expression disagrees at finite displacement;
        # the quadrature is the authority and the WARN is the documented
        # outcome (see validate and the README).
        ets_note = f"ets documented WARN: closed={closed!r} quadrature={quad!r}"
    ok = dev_pol < 1e-10 and dev_ecs < 1e-6
    _report(8, ok, f"pol {dev_pol:.2e} (tol 1e-10), ecs {dev_ecs:.2e} (tol 1e-6), {ets_note}")
    assert ok


def test_criterion_09_preloss_reverses_size_benefit():
    b1 = scenario_bmax(Scenario("polarization", LossPlacement(0.9, 1.0), n=1))
    b4 = scenario_bmax(Scenario("polarization", LossPlacement(0.9, 1.0), n=4))
    ok = b4 < b1
    _report(9, ok, f"eta1=0.9: b(n=4) = {b4:.7f} < b(n=1) = {b1:.7f}")
    assert ok


def test_criterion_10_decoherence_profile():
    def b_at(V, d, gt):
        loss = LossPlacement(gamma_to_eta(gt), 1.0)
        return scenario_bmax(Scenario("ets", loss, V=V, d=d))

    violates = b_at(10.0, 5.0, 0.005)
    delta = 0.02
    slope_d5 = (b_at(10.0, 5.0, 0.0) - b_at(10.0, 5.0, delta)) / delta
    slope_d10 = (b_at(10.0, 10.0, 0.0) - b_at(10.0, 10.0, delta)) / delta
    slope_coh = (b_at(1.001, 5.0, 0.0) - b_at(1.001, 5.0, delta)) / delta
    rel = abs(slope_d5 - slope_coh) / slope_coh
    ok = violates > 2.0 and slope_d10 > slope_d5 and rel <= 0.15
    _report(
        10, ok,
        f"b(V=10,d=5,gt=0.005) = {violates:.4f} > 2; slopes d10 {slope_d10:.3f} > d5 {slope_d5:.3f};"
        f" d5 vs coherent {slope_coh:.3f} within {rel:.1%}",
    )
    assert ok


def test_criterion_11_invariant_suite():
    code, results = run_validate()
    fails = [r.name for r in results if r.status == "FAIL"]
    ok = code == 0 and not fails
    _report(11, ok, f"{sum(r.status == 'PASS' for r in results)} checks pass, failures: {fails or 'none'}")
    assert ok
