"""Clock-synchronous time-tag synthesis and coincidence counting.

Each clock cycle is an independent draw from the circuit's exact
click-assignment distribution.  Sampling is chunked over cycle ranges
with a counter-based generator keyed by ``(seed, chunk)``, so the same
seed reproduces the same record no matter how the chunks are scheduled,
and a counts-only run sees exactly the outcome totals a full tag run
would have produced.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from ..detection import ClickPattern, pattern_distribution
from ..errors import CapacityError, ConfigError
from ..experiments import CLOCK_RATE_HZ, GATE_PERIOD_PS, CircuitModel

#: Cycles drawn per RNG chunk.  Part of the stream definition: changing it
#: re-shuffles which outcomes land in which cycles for a given seed.
CHUNK_CYCLES = 1 << 24

#: Refuse to materialize tag records larger than this (use
#: :func:`simulate_pattern_counts` for long integrations instead).
MAX_STREAM_TAGS = 20_000_000


@dataclasses.dataclass(frozen=True)
class TimeTagStream:
    """One detector channel's record: integer picosecond arrival times."""

    detector: str
    tags: np.ndarray
    clock_period_ps: int = GATE_PERIOD_PS
    duration_ps: int = 0

    def __post_init__(self):
        tags = np.asarray(self.tags, dtype=np.int64)
        object.__setattr__(self, "tags", tags)
        if tags.ndim != 1:
            raise ConfigError("tags must be a flat sequence")
        if self.clock_period_ps <= 0:
            raise ConfigError("clock period must be positive")
        if tags.size:
            if np.any(np.diff(tags) <= 0):
                raise ConfigError(
                    f"tags for {self.detector} must be strictly increasing"
                )
            if tags[0] < 0 or tags[-1] >= self.duration_ps:
                raise ConfigError(
                    f"tags for {self.detector} fall outside [0, duration)"
                )

    def __len__(self) -> int:
        return int(self.tags.size)


@dataclasses.dataclass(frozen=True)
class CoincidenceConfig:
    """Window placement and pattern definitions for the counting logic.

    ``windows`` maps a detector to one ``(center_ps, width_ps)`` window
    per monitored time bin; a tag is accepted if it lands inside any of
    them (measured circularly, so a window at the gate edge still catches
    jittered tags from the neighbouring cycle).  ``delays`` holds the
    electrical offset of multiplexed channels and is subtracted before
    windowing.
    """

    windows: Mapping[str, tuple]
    patterns: Mapping[str, ClickPattern] = dataclasses.field(default_factory=dict)
    delays: Mapping[str, float] = dataclasses.field(default_factory=dict)
    clock_period_ps: int = GATE_PERIOD_PS

    def __post_init__(self):
        object.__setattr__(
            self,
            "windows",
            {
                det: tuple((float(c), float(w)) for (c, w) in wins)
                for det, wins in dict(self.windows).items()
            },
        )
        object.__setattr__(self, "patterns", dict(self.patterns))
        object.__setattr__(self, "delays", dict(self.delays))
        period = self.clock_period_ps
        if period <= 0:
            raise ConfigError("clock period must be positive")
        for det, wins in self.windows.items():
            if not wins:
                raise ConfigError(f"detector {det} has an empty window list")
            for center, width in wins:
                if not (0.0 < width <= period):
                    raise ConfigError(
                        f"window width for {det} must lie in (0, {period}]: {width}"
                    )
                if not (0.0 <= center < period) or not math.isfinite(center):
                    raise ConfigError(
                        f"window center for {det} must lie in [0, {period}): {center}"
                    )
            for i in range(len(wins)):
                for j in range(i + 1, len(wins)):
                    ci, wi = wins[i]
                    cj, wj = wins[j]
                    gap = abs(((ci - cj + period / 2) % period) - period / 2)
                    if gap < (wi + wj) / 2:
                        raise ConfigError(
                            f"windows for {det} overlap: {wins[i]} and {wins[j]}"
                        )
        for det, delay in self.delays.items():
            if not math.isfinite(delay):
                raise ConfigError(f"delay for {det} must be finite")


def default_coincidence_config(
    circuit: CircuitModel, width_ps: float = 100.0
) -> CoincidenceConfig:
    """One window per detector, centered on its modeled bin offset."""
    return CoincidenceConfig(
        windows={
            name: ((float(offset), float(width_ps)),)
            for name, offset in circuit.detector_bin_ps.items()
        },
        patterns=dict(circuit.patterns),
    )


def _period_ps(clock_hz: float) -> int:
    if clock_hz <= 0:
        raise ConfigError("clock rate must be positive")
    period = 1e12 / clock_hz
    if abs(period - round(period)) > 1e-6:
        raise ConfigError(
            f"clock rate {clock_hz} Hz has a non-integer period in ps"
        )
    return int(round(period))


def _outcome_probabilities(circuit: CircuitModel):
    """Detector order, the 2**k outcome law, and per-detector click odds."""
    order = tuple(sorted(circuit.detectors))
    dist = pattern_distribution(circuit.final_state(), circuit.detectors)
    probs = np.zeros(1 << len(order))
    for clicked, p in dist.items():
        mask = 0
        for i, name in enumerate(order):
            if name in clicked:
                mask |= 1 << i
        probs[mask] = max(p, 0.0)
    probs /= probs.sum()
    probs[0] = 1.0 - probs[1:].sum()
    per_detector = np.zeros(len(order))
    for i in range(len(order)):
        sel = (np.arange(probs.size) >> i) & 1
        per_detector[i] = probs[sel == 1].sum()
    return order, probs, per_detector


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, chunk]))


def _distinct_cycles(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """m distinct uniform cycle indices out of n, in exchangeable order."""
    if m == 0:
        return np.empty(0, dtype=np.int64)
    if m * m >= n:
        return rng.permutation(n)[:m].astype(np.int64)
    draw = rng.integers(0, n, size=m, dtype=np.int64)
    while np.unique(draw).size != m:
        draw = rng.integers(0, n, size=m, dtype=np.int64)
    return draw


def _cycle_count(duration_s: float, clock_hz: float) -> int:
    cycles = int(round(duration_s * clock_hz))
    if cycles < 1:
        raise ConfigError("duration must cover at least one clock cycle")
    return cycles


@dataclasses.dataclass(frozen=True)
class OutcomeCounts:
    """Per-outcome cycle totals from a counts-only simulation run."""

    detectors: tuple[str, ...]
    counts: np.ndarray
    cycles: int
    clock_period_ps: int

    def pattern_count(self, pattern: ClickPattern) -> int:
        need = veto = 0
        for i, name in enumerate(self.detectors):
            if name in pattern.must_click:
                need |= 1 << i
            if name in pattern.must_not_click:
                veto |= 1 << i
        masks = np.arange(self.counts.size)
        keep = ((masks & need) == need) & ((masks & veto) == 0)
        return int(self.counts[keep].sum())

    def singles_counts(self) -> dict[str, int]:
        masks = np.arange(self.counts.size)
        return {
            name: int(self.counts[(masks >> i) & 1 == 1].sum())
            for i, name in enumerate(self.detectors)
        }


def simulate_pattern_counts(
    circuit: CircuitModel,
    duration_s: float,
    clock_hz: float = CLOCK_RATE_HZ,
    seed: int = 0,
    chunk_cycles: int = CHUNK_CYCLES,
) -> OutcomeCounts:
    """Outcome totals over a run, without materializing any tags.

    Shares the chunked stream of :func:`simulate_timetags`: with equal
    seed, clock and chunking, the totals here equal exactly what counting
    the synthesized tags would give.
    """
    period = _period_ps(clock_hz)
    cycles = _cycle_count(duration_s, clock_hz)
    order, probs, _ = _outcome_probabilities(circuit)
    totals = np.zeros(probs.size, dtype=np.int64)
    for chunk, start in enumerate(range(0, cycles, chunk_cycles)):
        n = min(chunk_cycles, cycles - start)
        totals += _chunk_rng(seed, chunk).multinomial(n, probs)
    return OutcomeCounts(order, totals, cycles, period)


def simulate_timetags(
    circuit: CircuitModel,
    duration_s: float,
    clock_hz: float = CLOCK_RATE_HZ,
    seed: int = 0,
    jitter_ps: float = 0.0,
    chunk_cycles: int = CHUNK_CYCLES,
    max_tags: int = MAX_STREAM_TAGS,
) -> dict[str, TimeTagStream]:
    """Synthesize one tag record per detector for a seeded run.

    Every cycle draws a full click assignment from the circuit's outcome
    law; a clicking detector emits one tag at its bin offset plus
    optional Gaussian jitter.
    """
    if jitter_ps < 0:
        raise ConfigError("jitter must be non-negative")
    period = _period_ps(clock_hz)
    cycles = _cycle_count(duration_s, clock_hz)
    duration_ps = cycles * period
    order, probs, per_detector = _outcome_probabilities(circuit)
    expected = cycles * per_detector.sum()
    if expected + 6.0 * math.sqrt(expected) + 16.0 > max_tags:
        raise CapacityError(
            f"run would produce ~{expected:.3g} tags"
            f" (limit {max_tags}); simulate counts instead"
        )

    offsets = np.array([circuit.detector_bin_ps[name] for name in order], dtype=np.int64)
    pieces: dict[str, list[np.ndarray]] = {name: [] for name in order}
    for chunk, start in enumerate(range(0, cycles, chunk_cycles)):
        n = min(chunk_cycles, cycles - start)
        rng = _chunk_rng(seed, chunk)
        counts = rng.multinomial(n, probs)
        clicking = np.nonzero(counts[1:])[0] + 1
        total = int(counts[clicking].sum())
        if total == 0:
            continue
        chosen = _distinct_cycles(rng, n, total)
        base = np.int64(start)
        cursor = 0
        raw: dict[str, list[np.ndarray]] = {name: [] for name in order}
        for mask in clicking:
            cyc = chosen[cursor : cursor + counts[mask]]
            cursor += int(counts[mask])
            for i, name in enumerate(order):
                if mask >> i & 1:
                    raw[name].append((base + cyc) * period + offsets[i])
        for name in order:
            if not raw[name]:
                continue
            tags = np.concatenate(raw[name])
            if jitter_ps > 0.0:
                tags = tags + np.rint(
                    rng.normal(0.0, jitter_ps, size=tags.size)
                ).astype(np.int64)
            pieces[name].append(tags)

    streams = {}
    for name in order:
        if pieces[name]:
            tags = np.unique(np.concatenate(pieces[name]))
            tags = tags[(tags >= 0) & (tags < duration_ps)]
        else:
            tags = np.empty(0, dtype=np.int64)
        streams[name] = TimeTagStream(name, tags, period, duration_ps)
    return streams


def _in_window_cycles(
    stream: TimeTagStream, windows, delay: float, period: int
) -> np.ndarray:
    """Cycle indices whose tag lands in one of the detector's windows."""
    t = stream.tags.astype(np.float64) - delay
    hits = []
    for center, width in windows:
        k = np.rint((t - center) / period)
        inside = np.abs(t - (k * period + center)) <= width / 2.0
        hits.append(k[inside].astype(np.int64))
    if not hits:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(hits))


def count_coincidences(
    streams: Union[Mapping[str, TimeTagStream], Iterable[TimeTagStream]],
    config: CoincidenceConfig,
    pattern: Union[str, ClickPattern],
) -> tuple[int, float]:
    """Cycles satisfying the pattern, with the Poisson error sqrt(N)."""
    if not isinstance(streams, Mapping):
        streams = {s.detector: s for s in streams}
    if isinstance(pattern, str):
        if pattern not in config.patterns:
            raise ConfigError(
                f"unknown pattern {pattern!r}; configured:"
                f" {sorted(config.patterns)}"
            )
        pattern = config.patterns[pattern]
    period = config.clock_period_ps
    for s in streams.values():
        if s.clock_period_ps != period:
            raise ConfigError(
                "streams and coincidence config disagree on the clock period"
            )

    def cycles_for(name: str) -> np.ndarray:
        if name not in streams:
            return np.empty(0, dtype=np.int64)
        if name not in config.windows:
            raise ConfigError(f"no window configured for detector {name}")
        return _in_window_cycles(
            streams[name],
            config.windows[name],
            config.delays.get(name, 0.0),
            period,
        )

    result: np.ndarray | None = None
    for name in sorted(pattern.must_click):
        got = cycles_for(name)
        result = got if result is None else np.intersect1d(result, got)
        if result.size == 0:
            break
    if result is None:
        raise ConfigError("pattern has no must-click detectors")
    if result.size:
        for name in sorted(pattern.must_not_click):
            result = np.setdiff1d(result, cycles_for(name))
            if result.size == 0:
                break
    count = int(result.size)
    return count, math.sqrt(count)


def write_tag_csv(path, streams: Mapping[str, TimeTagStream]):
    """Two-column record (detector, tag_ps), grouped by detector name."""
    from .tables import write_table

    rows = []
    for name in sorted(streams):
        for tag in streams[name].tags:
            rows.append((name, int(tag)))
    return write_table(path, ("detector", "tag_ps"), rows)


def read_tag_csv(
    path, clock_period_ps: int = GATE_PERIOD_PS, duration_ps: int | None = None
) -> dict[str, TimeTagStream]:
    """Rebuild per-detector streams from :func:`write_tag_csv` output."""
    import csv

    grouped: dict[str, list[int]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["detector", "tag_ps"]:
            raise ConfigError(f"{path} is not a tag record (header {header})")
        for row in reader:
            if len(row) != 2:
                raise ConfigError(f"malformed tag row {row!r}")
            grouped.setdefault(row[0], []).append(int(row[1]))
    if duration_ps is None:
        latest = max((max(tags) for tags in grouped.values() if tags), default=0)
        duration_ps = (latest // clock_period_ps + 1) * clock_period_ps
    return {
        name: TimeTagStream(
            name, np.unique(np.asarray(tags, dtype=np.int64)), clock_period_ps, duration_ps
        )
        for name, tags in sorted(grouped.items())
    }
