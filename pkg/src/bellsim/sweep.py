"""Parameter sweeps driven by INI config files.

A config names one scenario, the axes to sweep, and output options; the
runner evaluates the optimized Bell maximum on the cartesian grid with a
process pool and writes one CSV row per grid point, in grid order.  With
timing off (the default) reruns are byte-identical.
"""

from __future__ import annotations

import configparser
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .bell import _ETS_ORACLE_ORDER, Scenario, TSIRELSON, optimize_chsh
from .figures import resolve_jobs, write_delimited
from .fockspace import LossPlacement
from .thermal import _assemble_correlation, _n_plus, _pattern_scalars

_FAMILIES = {"pol": "polarization", "polarization": "polarization", "ecs": "ecs", "ets": "ets"}
_SWEEPABLE = ("eta1", "eta2", "alpha", "V", "d")
_SCENARIO_KEYS = {"family", "engine", "n", "alpha", "V", "d", "eta1", "eta2"}


class ConfigError(ValueError):
    """A config file problem: missing key, bad value, malformed section."""


@dataclass(frozen=True)
class AxisSpec:
    """One swept parameter: `steps` evenly spaced values from start to stop."""

    name: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.name not in _SWEEPABLE:
            raise ConfigError(f"axis {self.name!r} is not sweepable; choices: {_SWEEPABLE}")
        if not isinstance(self.steps, int) or isinstance(self.steps, bool) or self.steps < 2:
            raise ConfigError(f"axis {self.name!r}: steps must be an integer >= 2, got {self.steps!r}")
        for field in ("start", "stop"):
            if not math.isfinite(getattr(self, field)):
                raise ConfigError(f"axis {self.name!r}: {field} must be finite")

    def values(self) -> list[float]:
        last = self.steps - 1
        return [(self.start * (last - k) + self.stop * k) / last for k in range(self.steps)]


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, parsed and validated from one INI file."""

    scenario: dict
    grid: tuple[AxisSpec, ...]
    output_path: str
    command: str = "sweep"
    jobs: int = 0
    refine_top: int = 8
    quadrature_order: int = _ETS_ORACLE_ORDER
    timing: bool = False

    def __post_init__(self):
        if self.command not in ("sweep", "threshold", "figure", "validate"):
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command == "sweep" and not self.grid:
            raise ConfigError("a sweep needs at least one axis")
        if not (isinstance(self.refine_top, int) and 1 <= self.refine_top <= 64):
            raise ConfigError(f"refine_top must be in [1, 64], got {self.refine_top!r}")
        if not (isinstance(self.quadrature_order, int) and 8 <= self.quadrature_order <= 48):
            raise ConfigError(f"quadrature_order must be in [8, 48], got {self.quadrature_order!r}")


@dataclass(frozen=True)
class SweepRow:
    """One evaluated grid point, carrying the fully resolved scenario."""

    scenario: Scenario
    swept: tuple[float, ...]
    b_max: float
    angles: tuple[float, float, float, float]
    engine: str
    wall_time: float

    def __post_init__(self):
        if not 0.0 <= self.b_max <= TSIRELSON + 1e-6:
            raise ValueError(f"b_max {self.b_max!r} outside the Tsirelson range")


def _get(section, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"[{section.name}] is missing required key {key!r}")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key} = {raw!r}: {exc}") from None


def _to_bool(raw: str) -> bool:
    states = configparser.ConfigParser.BOOLEAN_STATES
    if raw.lower() not in states:
        raise ValueError(f"not a boolean (use one of {sorted(states)})")
    return states[raw.lower()]


def parse_config(path) -> RunConfig:
    """Read and validate one sweep config; all failures raise ConfigError."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep key case: V and d are case-sensitive
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from None

    if "scenario" not in parser:
        raise ConfigError("config needs a [scenario] section")
    scen = parser["scenario"]
    unknown = set(scen) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"[scenario] has unknown keys: {sorted(unknown)}")
    family_raw = _get(scen, "family", str, required=True)
    if family_raw not in _FAMILIES:
        raise ConfigError(f"[scenario] family must be one of {sorted(_FAMILIES)}, got {family_raw!r}")
    scenario = {
        "family": _FAMILIES[family_raw],
        "engine": _get(scen, "engine", str, default="closed_form"),
        "n": _get(scen, "n", int),
        "alpha": _get(scen, "alpha", float),
        "V": _get(scen, "V", float),
        "d": _get(scen, "d", float),
        "eta1": _get(scen, "eta1", float, default=1.0),
        "eta2": _get(scen, "eta2", float, default=1.0),
    }

    if "sweep" not in parser or "axes" not in parser["sweep"]:
        raise ConfigError("config needs a [sweep] section with an 'axes' key")
    axis_names = [a.strip() for a in parser["sweep"]["axes"].split(",") if a.strip()]
    if not axis_names:
        raise ConfigError("[sweep] axes must name at least one axis")
    axes = []
    for name in axis_names:
        section_name = f"axis.{name}"
        if section_name not in parser:
            raise ConfigError(f"axis {name!r} has no [{section_name}] section")
        sec = parser[section_name]
        axes.append(AxisSpec(
            name=name,
            start=_get(sec, "start", float, required=True),
            stop=_get(sec, "stop", float, required=True),
            steps=_get(sec, "steps", int, required=True),
        ))

    out = parser["output"] if "output" in parser else {}
    opts = parser["options"] if "options" in parser else {}
    timing_raw = out.get("timing", "off")
    try:
        timing = _to_bool(timing_raw)
    except ValueError as exc:
        raise ConfigError(f"[output] timing = {timing_raw!r}: {exc}") from None
    config = RunConfig(
        scenario=scenario,
        grid=tuple(axes),
        output_path=out.get("path", "sweep.csv"),
        timing=timing,
        jobs=_get(opts, "jobs", int, default=0) if opts else 0,
        refine_top=_get(opts, "refine_top", int, default=8) if opts else 8,
        quadrature_order=_get(opts, "quadrature_order", int, default=_ETS_ORACLE_ORDER) if opts else _ETS_ORACLE_ORDER,
    )
    # Surface parameter errors at parse time by building the first grid point.
    first = dict(zip(axis_names, (axis.values()[0] for axis in config.grid)))
    try:
        _scenario_at(config.scenario, first)
    except ValueError as exc:
        raise ConfigError(f"scenario rejects the first grid point: {exc}") from None
    return config


def _scenario_at(base: dict, point: dict) -> Scenario:
    merged = dict(base)
    merged.update(point)
    loss = LossPlacement(merged.pop("eta1"), merged.pop("eta2"))
    return Scenario(merged.pop("family"), loss, **merged)


def _eval_point(task) -> SweepRow:
    swept, scenario, refine_top, order = task
    t0 = time.perf_counter()
    if scenario.family == "ets" and scenario.engine == "oracle" and order != _ETS_ORACLE_ORDER:
        params = scenario.thermal_params()
        scal = _pattern_scalars(params, scenario.loss.eta_before, scenario.loss.eta_after, order)
        n_plus = _n_plus(params)
        corr = lambda a, b: _assemble_correlation(scal, n_plus, a, b).real
        result = optimize_chsh(scenario, refine_top=refine_top, correlation_fn=corr)
    else:
        result = optimize_chsh(scenario, refine_top=refine_top)
    return SweepRow(
        scenario=scenario,
        swept=swept,
        b_max=result.b_max,
        angles=result.angles.as_tuple(),
        engine=result.engine_used,
        wall_time=time.perf_counter() - t0,
    )


def run_sweep(config: RunConfig) -> Path:
    """Evaluate the grid and write the CSV; returns the output path."""
    names = [axis.name for axis in config.grid]
    grid = list(itertools.product(*(axis.values() for axis in config.grid)))
    tasks = [
        (pt, _scenario_at(config.scenario, dict(zip(names, pt))), config.refine_top, config.quadrature_order)
        for pt in grid
    ]
    jobs = resolve_jobs(config.jobs)
    if jobs == 1 or len(tasks) < 2:
        rows = [_eval_point(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_eval_point, tasks, chunksize=chunk))

    fixed = {k: v for k, v in sorted(config.scenario.items()) if v is not None and k not in names}
    comments = [
        "bellsim sweep: " + " ".join(f"{k}={v}" for k, v in fixed.items()),
        f"refine_top={config.refine_top} quadrature_order={config.quadrature_order}",
    ]
    columns = tuple(names) + ("b_max", "theta_a", "theta_b", "theta_a_prime", "theta_b_prime", "engine")
    if config.timing:
        columns += ("wall_time",)
    out_rows = []
    for row in rows:
        values = row.swept + (row.b_max,) + row.angles + (row.engine,)
        if config.timing:
            values += (row.wall_time,)
        out_rows.append(values)
    return write_delimited(config.output_path, comments, columns, out_rows)
