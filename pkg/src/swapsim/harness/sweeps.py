"""Parameter sweeps over the interference and swapping circuits.

A sweep is a declarative grid: a circuit kind, fixed parameters, up to
two axes, and a list of requested output columns.  Evaluation is pure
per point, so points parallelize across processes and a failed point
becomes an error cell instead of killing the run.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Mapping, Sequence

import numpy as np

from ..analysis import (
    fidelity_from_visibility,
    hom_visibility,
    key_rate_from_visibility,
    swap_visibility,
)
from ..errors import ConfigError, SwapSimError
from ..experiments import (
    InterferenceParams,
    SourceParams,
    build_hom_circuit,
    build_swap_circuit,
)
from .tables import render_table, write_table

#: Sweepable parameters and their closed domains (None = unbounded side).
#: ``mu`` is the equal-gain shorthand: it pins mu_a = mu_b = mu.
PARAMETER_DOMAINS: dict[str, tuple[float | None, float | None]] = {
    "mu": (0.0, None),
    "mu_a": (0.0, None),
    "mu_b": (0.0, None),
    "eta_ai": (0.0, 1.0),
    "eta_as": (0.0, 1.0),
    "eta_bs": (0.0, 1.0),
    "eta_bi": (0.0, 1.0),
    "zeta": (0.0, 1.0),
    "zeta_sq": (0.0, 1.0),
    "theta_a": (None, None),
    "theta_b": (None, None),
    "tau_c": (0.0, 1.0),
    "tau_a": (0.0, 1.0),
    "tau_b": (0.0, 1.0),
    "kappa": (1.0, None),
    "e_t": (0.0, 0.5),
}

#: Internal parameter name -> CSV column header.
PARAMETER_COLUMNS = {
    "mu": "mu",
    "mu_a": "mu_A",
    "mu_b": "mu_B",
    "eta_ai": "eta_Ai",
    "eta_as": "eta_As",
    "eta_bs": "eta_Bs",
    "eta_bi": "eta_Bi",
    "zeta_sq": "zeta_sq",
    "theta_a": "theta_A",
    "theta_b": "theta_B",
    "tau_c": "tau_C",
    "tau_a": "tau_A",
    "tau_b": "tau_B",
    "kappa": "kappa",
    "e_t": "e_t",
}

HOM_OUTPUTS = frozenset(
    {"V_HOM2", "V_HOM3A", "V_HOM3B", "V_HOM4", "P21", "P521", "P217", "P5217"}
)
SWAP_OUTPUTS = frozenset(
    {
        "V_swap",
        "fidelity",
        "R_over_Rs",
        "R_over_Rs_model",
        "P1467",
        "P1465",
        "P3467",
        "P3465",
        "P1287",
        "P1285",
        "P3287",
        "P3285",
    }
)

_HOM_ORDER_BY_OUTPUT = {
    "V_HOM2": "2",
    "V_HOM3A": "3A",
    "V_HOM3B": "3B",
    "V_HOM4": "4",
}


@dataclasses.dataclass(frozen=True)
class SweepAxis:
    """One swept parameter: an inclusive range and its spacing."""

    param: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.param not in PARAMETER_DOMAINS:
            raise ConfigError(f"unknown sweep parameter {self.param!r}")
        if self.points < 2:
            raise ConfigError(f"an axis needs at least 2 points, got {self.points}")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        lo, hi = PARAMETER_DOMAINS[self.param]
        for end in (self.start, self.stop):
            if lo is not None and end < lo or hi is not None and end > hi:
                raise ConfigError(
                    f"axis range for {self.param} leaves its domain"
                    f" [{lo}, {hi}]: {end}"
                )
        if self.spacing == "log" and (self.start <= 0.0 or self.stop <= 0.0):
            raise ConfigError("log spacing needs strictly positive endpoints")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """Everything needed to reproduce one sweep, seed included."""

    kind: str
    fixed: Mapping[str, float] = dataclasses.field(default_factory=dict)
    axes: tuple[SweepAxis, ...] = ()
    outputs: tuple[str, ...] = ()
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fixed", dict(self.fixed))
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.kind not in ("hom", "swap"):
            raise ConfigError(f"sweep kind must be 'hom' or 'swap', got {self.kind!r}")
        if len(self.axes) > 2:
            raise ConfigError("sweeps support at most two axes")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not self.outputs:
            raise ConfigError("a sweep needs at least one requested output")
        allowed = HOM_OUTPUTS if self.kind == "hom" else SWAP_OUTPUTS
        for out in self.outputs:
            if out not in allowed:
                raise ConfigError(
                    f"output {out!r} is not available for kind {self.kind!r}"
                )
        names = [ax.param for ax in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError("sweep axes must use distinct parameters")
        for name in names:
            if name in self.fixed:
                raise ConfigError(f"parameter {name!r} is both fixed and swept")
        for name, value in self.fixed.items():
            if name not in PARAMETER_DOMAINS:
                raise ConfigError(f"unknown fixed parameter {name!r}")
            lo, hi = PARAMETER_DOMAINS[name]
            if lo is not None and value < lo or hi is not None and value > hi:
                raise ConfigError(
                    f"fixed parameter {name}={value} leaves its domain [{lo}, {hi}]"
                )
        everything = set(self.fixed) | set(names)
        if "zeta" in everything and "zeta_sq" in everything:
            raise ConfigError("give zeta or zeta_sq, not both")
        if "mu" in everything:
            if everything & {"mu_a", "mu_b"}:
                raise ConfigError("give mu or (mu_a, mu_b), not both")
        elif "mu_a" not in everything or "mu_b" not in everything:
            raise ConfigError("both mu_a and mu_b must be fixed or swept")

    def grid(self) -> list[dict[str, float]]:
        points = [dict(self.fixed)]
        for axis in self.axes:
            expanded = []
            for base in points:
                for value in axis.values():
                    row = dict(base)
                    row[axis.param] = float(value)
                    expanded.append(row)
            points = expanded
        return points

    def parameter_columns(self) -> list[str]:
        ordered: list[str] = [ax.param for ax in self.axes]
        ordered += sorted(k for k in self.fixed if k not in ordered)
        # Report the squared overlap regardless of how it was given.
        return ["zeta_sq" if p == "zeta" else p for p in ordered]


@dataclasses.dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def render_csv(self) -> str:
        return render_table(self.columns, self.rows)

    def write_csv(self, path):
        return write_table(path, self.columns, self.rows)

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def _interference_from(params: Mapping[str, float]) -> InterferenceParams:
    if "zeta_sq" in params:
        zeta = math.sqrt(params["zeta_sq"])
    else:
        zeta = params.get("zeta", 1.0)
    kwargs = {"zeta": zeta}
    for key in ("theta_a", "theta_b", "tau_a", "tau_b", "tau_c"):
        if key in params:
            kwargs[key] = params[key]
    return InterferenceParams(**kwargs)


def _source_from(params: Mapping[str, float]) -> SourceParams:
    if "mu" in params:
        kwargs = {"mu_a": params["mu"], "mu_b": params["mu"]}
    else:
        kwargs = {"mu_a": params["mu_a"], "mu_b": params["mu_b"]}
    for key in ("eta_ai", "eta_as", "eta_bs", "eta_bi"):
        if key in params:
            kwargs[key] = params[key]
    return SourceParams(**kwargs)


def output_columns(outputs: Sequence[str]) -> list[str]:
    """Expand requested outputs into CSV columns (V_swap carries V_err)."""
    columns: list[str] = []
    for out in outputs:
        columns.append(out)
        if out == "V_swap":
            columns.append("V_err")
    return columns


def evaluate_point(task: tuple) -> tuple:
    """One grid point -> output cells plus an error message cell.

    Module-level (and fed a plain tuple) so process pools can pickle it.
    Returns values aligned with ``output_columns(outputs)`` and the
    error string last; on failure every value cell is empty.
    """
    kind, params, outputs = task
    columns = output_columns(outputs)
    try:
        src = _source_from(params)
        intf = _interference_from(params)
        cells: dict[str, float] = {}
        if kind == "hom":
            patterns = [o for o in outputs if o.startswith("P")]
            if patterns:
                probs = build_hom_circuit(src, intf).all_pattern_probabilities()
                for name in patterns:
                    cells[name] = probs[name]
            for out in outputs:
                if out in _HOM_ORDER_BY_OUTPUT:
                    cells[out] = hom_visibility(
                        _HOM_ORDER_BY_OUTPUT[out], src, intf
                    ).value
        else:
            patterns = [o for o in outputs if o.startswith("P")]
            if patterns:
                probs = build_swap_circuit(src, intf).all_pattern_probabilities()
                for name in patterns:
                    cells[name] = probs[name]
            needs_vis = {"V_swap", "fidelity", "R_over_Rs", "R_over_Rs_model"}
            if needs_vis & set(outputs):
                vis = swap_visibility(src, intf)
                cells["V_swap"] = vis.value
                cells["V_err"] = vis.uncertainty
                if "fidelity" in outputs:
                    cells["fidelity"] = fidelity_from_visibility(vis.value)
                if "R_over_Rs" in outputs:
                    cells["R_over_Rs"] = key_rate_from_visibility(
                        vis.value,
                        kappa=params.get("kappa", 1.0),
                        e_t=params.get("e_t", 0.0),
                    ).key_fraction
                if "R_over_Rs_model" in outputs:
                    cells["R_over_Rs_model"] = key_rate_from_visibility(
                        vis.value
                    ).key_fraction
        return tuple(cells.get(c, "") for c in columns) + ("",)
    except (SwapSimError, ValueError, KeyError) as exc:
        return ("",) * len(columns) + (f"{type(exc).__name__}: {exc}",)


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the grid, one row per point, in grid order.

    With ``spec.workers > 1`` the points run in a process pool; the
    output is identical to the serial run row for row.
    """
    points = spec.grid()
    tasks = [(spec.kind, point, spec.outputs) for point in points]
    if spec.workers > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (4 * spec.workers))
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            outcomes = list(pool.map(evaluate_point, tasks, chunksize=chunk))
    else:
        outcomes = [evaluate_point(task) for task in tasks]

    param_names = spec.parameter_columns()
    columns = tuple(
        [PARAMETER_COLUMNS[p] for p in param_names]
        + output_columns(spec.outputs)
        + ["error"]
    )
    rows = []
    for point, outcome in zip(points, outcomes):
        lead = []
        for name in param_names:
            if name == "zeta_sq" and "zeta_sq" not in point:
                lead.append(point["zeta"] ** 2)
            else:
                lead.append(point[name])
        rows.append(tuple(lead) + outcome)
    return SweepResult(spec, columns, tuple(rows))
