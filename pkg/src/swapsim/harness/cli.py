"""Command line front end.

Every command reads an optional TOML config, writes its artifacts into a
fresh numbered run directory under ``--out``, seals a manifest there,
and prints the artifact paths.  Exit codes: 0 success, 2 configuration
error, 3 numerical-domain error, 4 capacity error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from ..analysis import (
    ent_visibility,
    fidelity_from_visibility,
    infer_zeta,
    secret_key_fraction,
)
from ..errors import (
    CapacityError,
    ConfigError,
    NumericalDomainError,
    SwapSimError,
)
from ..experiments import (
    HOM_OPERATING_POINT,
    SWAP_OPERATING_POINT,
    CircuitModel,
    InterferenceParams,
    SourceParams,
    build_hom_circuit,
    build_pair_visibility_circuit,
    build_swap_circuit,
    delay_to_indistinguishability,
)
from .config import RunConfig, load_config
from .figures import available_figures, reproduce_figure
from .manifest import RunRecorder, new_run_dir
from .sweeps import SweepAxis, SweepSpec, run_sweep
from .tables import render_table
from .timetags import (
    CoincidenceConfig,
    count_coincidences,
    default_coincidence_config,
    read_tag_csv,
    simulate_timetags,
    write_tag_csv,
    _period_ps,
)


def _load(args) -> RunConfig:
    if args.config is None:
        return RunConfig()
    return load_config(args.config)


def _source_or_default(cfg: RunConfig, default: SourceParams) -> SourceParams:
    return cfg.source if cfg.source is not None else default


def _build_circuit(cfg: RunConfig, src: SourceParams) -> CircuitModel:
    intf = cfg.interference
    if cfg.circuit == "hom":
        return build_hom_circuit(src, intf)
    if cfg.circuit == "swap":
        return build_swap_circuit(src, intf)
    return build_pair_visibility_circuit(
        src.mu_a,
        src.eta_as,
        src.eta_ai,
        intf.tau_a,
        intf.tau_b,
        theta=intf.theta_a,
        theta_b=intf.theta_b,
    )


def _recorder(args, label: str, seed: int | None = None) -> RunRecorder:
    run_dir = new_run_dir(args.out, label)
    return RunRecorder(run_dir, command=label, seed=seed)


def _emit(recorder: RunRecorder, name: str, columns, rows) -> None:
    target = recorder.path_for(name)
    target.write_text(render_table(columns, rows), encoding="ascii", newline="\n")
    recorder.add(target)


def _finish(recorder: RunRecorder) -> int:
    recorder.finish()
    for path in recorder._artifacts:
        print(path)
    return 0


def _seed(args, cfg: RunConfig) -> int:
    if args.seed is not None:
        return args.seed
    if cfg.timetags.seed is not None:
        return cfg.timetags.seed
    return 0


def _cmd_hom_dip(args) -> int:
    cfg = _load(args)
    src = _source_or_default(cfg, HOM_OPERATING_POINT)
    recorder = _recorder(args, "hom-dip")
    recorder.params.update(
        {
            "mu_a": src.mu_a,
            "mu_b": src.mu_b,
            "span_ps": args.span_ps,
            "sigma_ps": args.sigma_ps,
            "points": args.points,
        }
    )
    delays = np.linspace(-args.span_ps, args.span_ps, args.points)
    rows = []
    for delay in delays:
        zeta = delay_to_indistinguishability(float(delay), args.sigma_ps)
        intf = InterferenceParams(
            zeta=zeta,
            tau_c=cfg.interference.tau_c,
            tau_a=cfg.interference.tau_a,
            tau_b=cfg.interference.tau_b,
        )
        prob = build_hom_circuit(src, intf).pattern_probability("P5217")
        rows.append((float(delay), zeta**2, prob))
    _emit(recorder, "hom-dip.csv", ("delay_ps", "zeta_sq", "P5217"), rows)
    return _finish(recorder)


def _run_config_sweep(args, expected_kind: str, label: str) -> int:
    cfg = _load(args)
    if cfg.sweep is None:
        raise ConfigError(f"{label} needs a [sweep] section in the config")
    spec = cfg.sweep
    if spec.kind != expected_kind:
        raise ConfigError(
            f"{label} runs kind {expected_kind!r}; config says {spec.kind!r}"
        )
    if args.workers is not None:
        spec = SweepSpec(
            kind=spec.kind,
            fixed=spec.fixed,
            axes=spec.axes,
            outputs=spec.outputs,
            workers=args.workers,
            seed=spec.seed,
        )
    recorder = _recorder(args, label, seed=spec.seed)
    recorder.params.update({f"fixed.{k}": v for k, v in sorted(spec.fixed.items())})
    for axis in spec.axes:
        recorder.params[f"axis.{axis.param}"] = (
            f"{axis.start}..{axis.stop}/{axis.points} {axis.spacing}"
        )
    result = run_sweep(spec)
    target = recorder.path_for("sweep.csv")
    result.write_csv(target)
    recorder.add(target)
    return _finish(recorder)


def _cmd_hom_sweep(args) -> int:
    return _run_config_sweep(args, "hom", "hom-sweep")


def _cmd_swap_sweep(args) -> int:
    return _run_config_sweep(args, "swap", "swap-sweep")


def _cmd_swap_fringe(args) -> int:
    cfg = _load(args)
    src = _source_or_default(cfg, SWAP_OPERATING_POINT)
    intf = cfg.interference
    fixed = {
        "mu_a": src.mu_a,
        "mu_b": src.mu_b,
        "eta_ai": src.eta_ai,
        "eta_as": src.eta_as,
        "eta_bs": src.eta_bs,
        "eta_bi": src.eta_bi,
        "zeta": intf.zeta,
        "theta_b": intf.theta_b,
        "tau_a": intf.tau_a,
        "tau_b": intf.tau_b,
        "tau_c": intf.tau_c,
    }
    spec = SweepSpec(
        kind="swap",
        fixed=fixed,
        axes=(SweepAxis("theta_a", 0.0, 2.0 * math.pi, args.points),),
        outputs=(
            "P1467",
            "P1465",
            "P3467",
            "P3465",
            "P1287",
            "P1285",
            "P3287",
            "P3285",
        ),
        workers=args.workers or 1,
    )
    recorder = _recorder(args, "swap-fringe")
    recorder.params.update({k: v for k, v in sorted(fixed.items())})
    result = run_sweep(spec)
    target = recorder.path_for("swap-fringe.csv")
    result.write_csv(target)
    recorder.add(target)
    return _finish(recorder)


def _cmd_ent_visibility(args) -> int:
    cfg = _load(args)
    src = _source_or_default(cfg, HOM_OPERATING_POINT)
    intf = cfg.interference
    vis = ent_visibility(src.mu_a, src.eta_as, src.eta_ai, intf.tau_a, intf.tau_b)
    fid = fidelity_from_visibility(vis.value)
    recorder = _recorder(args, "ent-visibility")
    _emit(
        recorder,
        "ent-visibility.csv",
        ("mu", "eta_signal", "eta_idler", "tau_A", "tau_B", "V_ent", "fidelity"),
        [(src.mu_a, src.eta_as, src.eta_ai, intf.tau_a, intf.tau_b, vis.value, fid)],
    )
    print(f"V_ent = {vis.value:.6f}, fidelity = {fid:.6f}")
    return _finish(recorder)


def _cmd_qkd_budget(args) -> int:
    cfg = _load(args)
    qkd = cfg.qkd
    if qkd.e_p is None:
        raise ConfigError("qkd-budget needs e_p in the [qkd] config section")
    budget = secret_key_fraction(
        qkd.kappa, qkd.e_t, qkd.e_p, qkd.sigma_e_t, qkd.sigma_e_p
    )
    recorder = _recorder(args, "qkd-budget")
    _emit(
        recorder,
        "qkd-budget.csv",
        (
            "kappa",
            "e_t",
            "sigma_e_t",
            "e_p",
            "sigma_e_p",
            "key_fraction",
            "key_fraction_raw",
            "uncertainty_plus",
            "uncertainty_minus",
        ),
        [
            (
                qkd.kappa,
                qkd.e_t,
                qkd.sigma_e_t,
                qkd.e_p,
                qkd.sigma_e_p,
                budget.key_fraction,
                budget.key_fraction_raw,
                budget.uncertainty_plus,
                budget.uncertainty_minus,
            )
        ],
    )
    print(
        f"key fraction = {budget.key_fraction:.4f}"
        f" +{budget.uncertainty_plus:.4f} -{budget.uncertainty_minus:.4f}"
    )
    return _finish(recorder)


def _cmd_infer_zeta(args) -> int:
    cfg = _load(args)
    if cfg.infer is None:
        raise ConfigError("infer-zeta needs an [infer] section in the config")
    default = SWAP_OPERATING_POINT if cfg.infer.kind == "SWAP" else HOM_OPERATING_POINT
    src = _source_or_default(cfg, default)
    z2, z2_err = infer_zeta(cfg.infer.measured, cfg.infer.sigma, cfg.infer.kind, src)
    recorder = _recorder(args, "infer-zeta")
    _emit(
        recorder,
        "infer-zeta.csv",
        ("kind", "measured", "sigma", "zeta_sq", "zeta_sq_err"),
        [(cfg.infer.kind, cfg.infer.measured, cfg.infer.sigma, z2, z2_err)],
    )
    print(f"zeta_sq = {z2:.4f} +- {z2_err:.4f}")
    return _finish(recorder)


def _cmd_simulate_tags(args) -> int:
    cfg = _load(args)
    default = SWAP_OPERATING_POINT if cfg.circuit == "swap" else HOM_OPERATING_POINT
    src = _source_or_default(cfg, default)
    circuit = _build_circuit(cfg, src)
    seed = _seed(args, cfg)
    tags = cfg.timetags
    streams = simulate_timetags(
        circuit,
        duration_s=tags.duration_s,
        clock_hz=tags.clock_hz,
        seed=seed,
        jitter_ps=tags.jitter_ps,
    )
    recorder = _recorder(args, "simulate-tags", seed=seed)
    recorder.params.update(
        {
            "circuit": cfg.circuit,
            "duration_s": tags.duration_s,
            "clock_hz": tags.clock_hz,
            "jitter_ps": tags.jitter_ps,
        }
    )
    target = recorder.path_for("tags.csv")
    write_tag_csv(target, streams)
    recorder.add(target)
    for name in sorted(streams):
        print(f"{name}: {len(streams[name])} tags")
    return _finish(recorder)


def _cmd_count(args) -> int:
    cfg = _load(args)
    default = SWAP_OPERATING_POINT if cfg.circuit == "swap" else HOM_OPERATING_POINT
    src = _source_or_default(cfg, default)
    circuit = _build_circuit(cfg, src)
    period = _period_ps(cfg.timetags.clock_hz)
    streams = read_tag_csv(args.tags, clock_period_ps=period)
    base = default_coincidence_config(circuit, width_ps=cfg.coincidence.width_ps)
    windows = dict(base.windows)
    windows.update(cfg.coincidence.windows)
    coincidence = CoincidenceConfig(
        windows=windows,
        patterns=base.patterns,
        delays=cfg.coincidence.delays,
        clock_period_ps=period,
    )
    wanted = args.pattern or cfg.coincidence.pattern
    names = [wanted] if wanted else sorted(coincidence.patterns)
    rows = []
    for name in names:
        count, sigma = count_coincidences(streams, coincidence, name)
        rows.append((name, count, sigma))
        print(f"{name}: {count} +- {sigma:.1f}")
    recorder = _recorder(args, "count")
    recorder.params["tags"] = str(args.tags)
    _emit(recorder, "counts.csv", ("pattern", "count", "sigma"), rows)
    return _finish(recorder)


def _cmd_reproduce(args) -> int:
    paths = reproduce_figure(args.figure, args.out, workers=args.workers or 1)
    for path in paths:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapsim",
        description="Simulate and analyze time-bin interference and swapping experiments.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", default="runs", help="output root (default: runs)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed override")
    common.add_argument(
        "--workers", type=int, default=None, help="parallel worker count"
    )
    common.add_argument(
        "--format",
        choices=("csv",),
        default="csv",
        help="artifact format (csv only)",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "hom-dip", parents=[common], help="fourfold dip vs relative delay"
    )
    p.add_argument("--span-ps", type=float, default=150.0)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--sigma-ps", type=float, default=25.0)
    p.set_defaults(func=_cmd_hom_dip)

    p = sub.add_parser(
        "hom-sweep", parents=[common], help="run the configured interference sweep"
    )
    p.set_defaults(func=_cmd_hom_sweep)

    p = sub.add_parser(
        "swap-fringe", parents=[common], help="coincidences vs analysis phase"
    )
    p.add_argument("--points", type=int, default=73)
    p.set_defaults(func=_cmd_swap_fringe)

    p = sub.add_parser(
        "swap-sweep", parents=[common], help="run the configured swapping sweep"
    )
    p.set_defaults(func=_cmd_swap_sweep)

    p = sub.add_parser(
        "ent-visibility", parents=[common], help="pair-source fringe visibility"
    )
    p.set_defaults(func=_cmd_ent_visibility)

    p = sub.add_parser(
        "qkd-budget", parents=[common], help="secret-key fraction from error rates"
    )
    p.set_defaults(func=_cmd_qkd_budget)

    p = sub.add_parser(
        "infer-zeta", parents=[common], help="overlap from a measured visibility"
    )
    p.set_defaults(func=_cmd_infer_zeta)

    p = sub.add_parser(
        "simulate-tags", parents=[common], help="synthesize detector time tags"
    )
    p.set_defaults(func=_cmd_simulate_tags)

    p = sub.add_parser(
        "count", parents=[common], help="coincidence counts from a tag record"
    )
    p.add_argument("--tags", required=True, help="tag CSV from simulate-tags")
    p.add_argument("--pattern", help="count a single named pattern")
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser(
        "reproduce", parents=[common], help="emit the data behind a model figure"
    )
    p.add_argument("figure", help="one of: " + ", ".join(available_figures()))
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 4
    except NumericalDomainError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SwapSimError as exc:  # pragma: no cover - base-class fallback
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
