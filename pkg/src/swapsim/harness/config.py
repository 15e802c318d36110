"""Run configuration parsing.

One TOML file describes a run: physical parameters, optional sweep,
tag-simulation settings, coincidence windows, and QKD/inference inputs.
The schema is versioned and strict — an unknown key is an error, not a
silent no-op, because a silently ignored typo ruins reproducibility.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Any, Mapping, Optional

try:
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as _toml

from ..errors import ConfigError
from ..experiments import CLOCK_RATE_HZ, InterferenceParams, SourceParams
from .sweeps import SweepAxis, SweepSpec

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version",
    "circuit",
    "source",
    "interference",
    "sweep",
    "timetags",
    "coincidence",
    "qkd",
    "infer",
}
_SOURCE_KEYS = {"mu_a", "mu_b", "eta_ai", "eta_as", "eta_bs", "eta_bi"}
_INTERFERENCE_KEYS = {"zeta", "zeta_sq", "theta_a", "theta_b", "tau_a", "tau_b", "tau_c"}
_SWEEP_KEYS = {"kind", "outputs", "workers", "seed", "axis", "fixed"}
_AXIS_KEYS = {"param", "start", "stop", "points", "spacing"}
_TAG_KEYS = {"duration_s", "clock_hz", "jitter_ps", "seed"}
_COINC_KEYS = {"width_ps", "windows", "delays", "pattern"}
_QKD_KEYS = {"kappa", "e_t", "sigma_e_t", "e_p", "sigma_e_p"}
_INFER_KEYS = {"kind", "measured", "sigma"}

CIRCUIT_KINDS = ("hom", "swap", "pair")


@dataclasses.dataclass(frozen=True)
class TagSettings:
    duration_s: float = 1.0
    clock_hz: float = CLOCK_RATE_HZ
    jitter_ps: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ConfigError("timetags.duration_s must be positive")
        if self.clock_hz <= 0:
            raise ConfigError("timetags.clock_hz must be positive")
        if self.jitter_ps < 0:
            raise ConfigError("timetags.jitter_ps must be non-negative")


@dataclasses.dataclass(frozen=True)
class CoincidenceSettings:
    """Window overrides for counting; anything omitted uses bin defaults."""

    width_ps: float = 100.0
    windows: Mapping[str, tuple] = dataclasses.field(default_factory=dict)
    delays: Mapping[str, float] = dataclasses.field(default_factory=dict)
    pattern: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(
            self,
            "windows",
            {
                det: tuple((float(c), float(w)) for (c, w) in wins)
                for det, wins in dict(self.windows).items()
            },
        )
        object.__setattr__(self, "delays", dict(self.delays))
        if self.width_ps <= 0:
            raise ConfigError("coincidence.width_ps must be positive")


@dataclasses.dataclass(frozen=True)
class QkdSettings:
    kappa: float = 1.0
    e_t: float = 0.0
    sigma_e_t: float = 0.0
    e_p: Optional[float] = None
    sigma_e_p: float = 0.0


@dataclasses.dataclass(frozen=True)
class InferSettings:
    kind: str
    measured: float
    sigma: float = 0.0


@dataclasses.dataclass(frozen=True)
class RunConfig:
    circuit: str = "hom"
    source: Optional[SourceParams] = None
    interference: InterferenceParams = InterferenceParams()
    sweep: Optional[SweepSpec] = None
    timetags: TagSettings = TagSettings()
    coincidence: CoincidenceSettings = CoincidenceSettings()
    qkd: QkdSettings = QkdSettings()
    infer: Optional[InferSettings] = None


def _reject_unknown(table: Mapping[str, Any], allowed: set, where: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _number(table: Mapping[str, Any], key: str, where: str) -> float:
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ConfigError(f"{where}.{key} must be finite")
    return float(value)


def _integer(table: Mapping[str, Any], key: str, where: str) -> int:
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {value!r}")
    return value


def _source_from_table(table: Mapping[str, Any]) -> SourceParams:
    _reject_unknown(table, _SOURCE_KEYS, "[source]")
    for key in ("mu_a", "mu_b"):
        if key not in table:
            raise ConfigError(f"[source] needs {key}")
    return SourceParams(**{k: _number(table, k, "source") for k in table})


def _interference_from_table(table: Mapping[str, Any]) -> InterferenceParams:
    _reject_unknown(table, _INTERFERENCE_KEYS, "[interference]")
    if "zeta" in table and "zeta_sq" in table:
        raise ConfigError("[interference] takes zeta or zeta_sq, not both")
    kwargs = {k: _number(table, k, "interference") for k in table}
    if "zeta_sq" in kwargs:
        z2 = kwargs.pop("zeta_sq")
        if z2 < 0:
            raise ConfigError("interference.zeta_sq must be non-negative")
        kwargs["zeta"] = math.sqrt(z2)
    return InterferenceParams(**kwargs)


def _sweep_from_table(
    table: Mapping[str, Any],
    source: Optional[SourceParams],
    interference: InterferenceParams,
) -> SweepSpec:
    _reject_unknown(table, _SWEEP_KEYS, "[sweep]")
    if "kind" not in table or "outputs" not in table:
        raise ConfigError("[sweep] needs kind and outputs")
    kind = table["kind"]
    outputs = table["outputs"]
    if not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs):
        raise ConfigError("sweep.outputs must be a list of column names")
    axes = []
    for i, axis_table in enumerate(table.get("axis", [])):
        where = f"[[sweep.axis]] #{i + 1}"
        _reject_unknown(axis_table, _AXIS_KEYS, where)
        for key in ("param", "start", "stop", "points"):
            if key not in axis_table:
                raise ConfigError(f"{where} needs {key}")
        axes.append(
            SweepAxis(
                param=axis_table["param"],
                start=_number(axis_table, "start", where),
                stop=_number(axis_table, "stop", where),
                points=_integer(axis_table, "points", where),
                spacing=axis_table.get("spacing", "linear"),
            )
        )
    swept = {ax.param for ax in axes}

    # Fixed values come from [source]/[interference] (minus swept params),
    # plus any explicit [sweep.fixed] overrides such as kappa.
    fixed: dict[str, float] = {}
    if source is not None:
        for key in _SOURCE_KEYS:
            fixed[key] = getattr(source, key)
    fixed["zeta"] = interference.zeta
    for key in ("theta_a", "theta_b", "tau_a", "tau_b", "tau_c"):
        fixed[key] = getattr(interference, key)
    extra = table.get("fixed", {})
    for key in extra:
        fixed[key] = _number(extra, key, "sweep.fixed")
    if "zeta_sq" in fixed:
        fixed.pop("zeta", None)
    if "mu" in fixed:
        fixed.pop("mu_a", None)
        fixed.pop("mu_b", None)
    for param in swept:
        fixed.pop(param, None)
        if param == "zeta_sq":
            fixed.pop("zeta", None)
        if param == "zeta":
            fixed.pop("zeta_sq", None)
        if param == "mu":
            fixed.pop("mu_a", None)
            fixed.pop("mu_b", None)
    if "mu" in swept or "mu" in fixed:
        fixed.pop("mu_a", None)
        fixed.pop("mu_b", None)
    return SweepSpec(
        kind=kind,
        fixed=fixed,
        axes=tuple(axes),
        outputs=tuple(outputs),
        workers=_integer(table, "workers", "sweep") if "workers" in table else 1,
        seed=_integer(table, "seed", "sweep") if "seed" in table else 0,
    )


def _tags_from_table(table: Mapping[str, Any]) -> TagSettings:
    _reject_unknown(table, _TAG_KEYS, "[timetags]")
    kwargs: dict[str, Any] = {}
    for key in ("duration_s", "clock_hz", "jitter_ps"):
        if key in table:
            kwargs[key] = _number(table, key, "timetags")
    if "seed" in table:
        kwargs["seed"] = _integer(table, "seed", "timetags")
    return TagSettings(**kwargs)


def _coincidence_from_table(table: Mapping[str, Any]) -> CoincidenceSettings:
    _reject_unknown(table, _COINC_KEYS, "[coincidence]")
    kwargs: dict[str, Any] = {}
    if "width_ps" in table:
        kwargs["width_ps"] = _number(table, "width_ps", "coincidence")
    if "windows" in table:
        windows = table["windows"]
        if not isinstance(windows, dict):
            raise ConfigError("coincidence.windows must be a table")
        parsed = {}
        for det, wins in windows.items():
            if not isinstance(wins, list):
                raise ConfigError(
                    f"coincidence.windows.{det} must be a list of [center, width]"
                )
            try:
                parsed[det] = tuple((float(c), float(w)) for (c, w) in wins)
            except (TypeError, ValueError) as exc:
                raise ConfigError(
                    f"coincidence.windows.{det} must hold [center, width] pairs"
                ) from exc
        kwargs["windows"] = parsed
    if "delays" in table:
        delays = table["delays"]
        if not isinstance(delays, dict):
            raise ConfigError("coincidence.delays must be a table")
        kwargs["delays"] = {
            det: _number(delays, det, "coincidence.delays") for det in delays
        }
    if "pattern" in table:
        if not isinstance(table["pattern"], str):
            raise ConfigError("coincidence.pattern must be a pattern name")
        kwargs["pattern"] = table["pattern"]
    return CoincidenceSettings(**kwargs)


def _qkd_from_table(table: Mapping[str, Any]) -> QkdSettings:
    _reject_unknown(table, _QKD_KEYS, "[qkd]")
    return QkdSettings(**{k: _number(table, k, "qkd") for k in table})


def _infer_from_table(table: Mapping[str, Any]) -> InferSettings:
    _reject_unknown(table, _INFER_KEYS, "[infer]")
    for key in ("kind", "measured"):
        if key not in table:
            raise ConfigError(f"[infer] needs {key}")
    if not isinstance(table["kind"], str):
        raise ConfigError("infer.kind must be a visibility kind name")
    return InferSettings(
        kind=table["kind"],
        measured=_number(table, "measured", "infer"),
        sigma=_number(table, "sigma", "infer") if "sigma" in table else 0.0,
    )


def parse_config(text: str, origin: str = "<config>") -> RunConfig:
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{origin} is not valid TOML: {exc}") from exc
    _reject_unknown(data, _TOP_KEYS, origin)
    if "schema_version" not in data:
        raise ConfigError(f"{origin} is missing schema_version")
    if data["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"{origin} has schema_version {data['schema_version']!r};"
            f" this build reads version {SCHEMA_VERSION}"
        )
    circuit = data.get("circuit", "hom")
    if circuit not in CIRCUIT_KINDS:
        raise ConfigError(f"circuit must be one of {CIRCUIT_KINDS}, got {circuit!r}")
    source = _source_from_table(data["source"]) if "source" in data else None
    interference = (
        _interference_from_table(data["interference"])
        if "interference" in data
        else InterferenceParams()
    )
    return RunConfig(
        circuit=circuit,
        source=source,
        interference=interference,
        sweep=(
            _sweep_from_table(data["sweep"], source, interference)
            if "sweep" in data
            else None
        ),
        timetags=_tags_from_table(data.get("timetags", {})),
        coincidence=_coincidence_from_table(data.get("coincidence", {})),
        qkd=_qkd_from_table(data.get("qkd", {})),
        infer=_infer_from_table(data["infer"]) if "infer" in data else None,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, origin=str(path))
