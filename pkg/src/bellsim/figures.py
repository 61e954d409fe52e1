"""Builders for the named report datasets.

Each figure is a fixed parameter grid over one state family; `run_figure`
evaluates the optimized Bell maximum at every grid point and writes the
result as a commented CSV.  Grids are chosen so the quoted reference points
(eta = 0.356 for the four-photon curve, eta = 0.17 for the alpha = 2 curve)
fall on exact grid nodes, and all values are emitted with round-trip-stable
formatting so reruns are byte-identical.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .bell import Scenario, scenario_bmax
from .fockspace import LossPlacement
from .thermal import gamma_to_eta

# eta grids: the dense one (step 1/250) contains 0.356 exactly, the default
# one (step 1/100) contains 0.17 exactly.
_ETA_DENSE = [k / 250.0 for k in range(251)]
_ETA = [k / 100.0 for k in range(101)]
# Decoherence grids: the violation window closes within gamma*t of a few
# percent, so the curves stop at 0.2 and the surface at 0.1.
_GT_CURVE = [k / 500.0 for k in range(101)]
_GT_SURFACE = [k / 400.0 for k in range(41)]
_D_SURFACE = [0.5 + 9.5 * k / 40.0 for k in range(41)]


def _fig2a():
    note = "polarization pairs, loss at the detectors (eta1 = 1), n = 1..4"
    cols = ("n", "eta2", "b_max")
    pts = [
        ((n, eta), Scenario("polarization", LossPlacement(1.0, eta), n=n))
        for n in (1, 2, 3, 4)
        for eta in _ETA_DENSE
    ]
    return note, cols, pts


def _fig2b():
    note = "polarization pairs, loss before the rotation (eta2 = 1), n = 1..4"
    cols = ("n", "eta1", "b_max")
    pts = [
        ((n, eta), Scenario("polarization", LossPlacement(eta, 1.0), n=n))
        for n in (1, 2, 3, 4)
        for eta in _ETA
    ]
    return note, cols, pts


def _fig3():
    note = "entangled coherent states, loss at the detectors (eta1 = 1)"
    cols = ("alpha", "eta2", "b_max")
    pts = [
        ((alpha, eta), Scenario("ecs", LossPlacement(1.0, eta), alpha=alpha))
        for alpha in (0.5, 1.0, 1.5, 2.0)
        for eta in _ETA
    ]
    return note, cols, pts


def _fig4a():
    note = "entangled thermal states, V = 10 surface over (gamma_t, d)"
    cols = ("gamma_t", "d", "b_max")
    pts = [
        ((gt, d), Scenario("ets", LossPlacement(gamma_to_eta(gt), 1.0), V=10.0, d=d))
        for gt in _GT_SURFACE
        for d in _D_SURFACE
    ]
    return note, cols, pts


def _fig4b():
    note = "entangled thermal states, decoherence curves at (V, d) = (1.001, 5), (10, 5), (10, 10)"
    cols = ("V", "d", "gamma_t", "b_max")
    pts = [
        ((V, d, gt), Scenario("ets", LossPlacement(gamma_to_eta(gt), 1.0), V=V, d=d))
        for V, d in ((1.001, 5.0), (10.0, 5.0), (10.0, 10.0))
        for gt in _GT_CURVE
    ]
    return note, cols, pts


def _fig5a():
    note = "polarization pairs with eta1 = 0.95, detector sweep, n = 1..3"
    cols = ("n", "eta2", "b_max")
    pts = [
        ((n, eta), Scenario("polarization", LossPlacement(0.95, eta), n=n))
        for n in (1, 2, 3)
        for eta in _ETA
    ]
    return note, cols, pts


def _fig5b():
    note = "entangled coherent states with eta1 = 0.85, detector sweep"
    cols = ("alpha", "eta2", "b_max")
    pts = [
        ((alpha, eta), Scenario("ecs", LossPlacement(0.85, eta), alpha=alpha))
        for alpha in (1.0, 1.5, 2.0)
        for eta in _ETA
    ]
    return note, cols, pts


FIGURES = {
    "fig2a": _fig2a,
    "fig2b": _fig2b,
    "fig3": _fig3,
    "fig4a": _fig4a,
    "fig4b": _fig4b,
    "fig5a": _fig5a,
    "fig5b": _fig5b,
}


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".10g")


def write_delimited(path, comments, columns, rows) -> Path:
    """Write rows as comma-separated values with '#'-prefixed header lines.

    LF endings and shortest-stable float formatting keep reruns of the same
    grid byte-identical, so outputs can be diffed directly.
    """
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("# columns: " + ",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def resolve_jobs(jobs: int) -> int:
    if jobs < 0:
        raise ValueError(f"jobs must be >= 0, got {jobs}")
    return jobs if jobs > 0 else (os.cpu_count() or 1)


def evaluate_grid(scenarios, jobs: int = 0):
    """Map scenario_bmax over the grid, preserving grid order.

    Points are independent, so they dispatch to a process pool when more
    than one worker is requested; `map` returns results in submission order
    regardless of completion order.
    """
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(scenarios) < 2:
        return [scenario_bmax(s) for s in scenarios]
    chunk = max(1, len(scenarios) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(scenario_bmax, scenarios, chunksize=chunk))


def run_figure(name: str, out_path=None, jobs: int = 0) -> Path:
    """Compute one named dataset and write it next to the caller as CSV."""
    if name not in FIGURES:
        raise KeyError(f"unknown figure name {name!r}; choices: {sorted(FIGURES)}")
    note, cols, pts = FIGURES[name]()
    values = evaluate_grid([scen for _, scen in pts], jobs=jobs)
    rows = [prefix + (b,) for (prefix, _), b in zip(pts, values)]
    comments = [f"bellsim {name}: {note}"]
    return write_delimited(out_path or f"{name}.csv", comments, cols, rows)
