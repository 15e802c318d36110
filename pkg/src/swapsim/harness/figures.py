"""Named model curves, reproducible as CSV artifacts.

Each figure is a recipe: one or more sweeps at pinned parameters whose
tables are the data behind a model curve.  ``reproduce_figure`` runs the
recipe into a fresh run directory and seals a manifest, so two runs of
the same figure are directly diffable.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Callable

from ..errors import ConfigError
from ..experiments import (
    HOM_OPERATING_POINT,
    SWAP_OPERATING_POINT,
    SourceParams,
    source_sweep_mu_a,
    source_sweep_mu_b,
)
from .manifest import RunRecorder, new_run_dir
from .sweeps import SweepAxis, SweepSpec, run_sweep


def _source_fixed(src: SourceParams) -> dict[str, float]:
    return {
        "mu_a": src.mu_a,
        "mu_b": src.mu_b,
        "eta_ai": src.eta_ai,
        "eta_as": src.eta_as,
        "eta_bs": src.eta_bs,
        "eta_bi": src.eta_bi,
    }


def _hom_vs_mu() -> list[tuple[str, SweepSpec]]:
    spec = SweepSpec(
        kind="hom",
        axes=(SweepAxis("mu", 1e-4, 0.3, 65, "log"),),
        outputs=("V_HOM2", "V_HOM3A", "V_HOM3B", "V_HOM4"),
    )
    return [("hom-vs-mu", spec)]


def _hom_vs_zeta() -> list[tuple[str, SweepSpec]]:
    spec = SweepSpec(
        kind="hom",
        fixed=_source_fixed(HOM_OPERATING_POINT),
        axes=(SweepAxis("zeta_sq", 0.0, 1.0, 101),),
        outputs=("V_HOM2", "V_HOM3A", "V_HOM3B", "V_HOM4"),
    )
    return [("hom-vs-zeta", spec)]


def _hom_2d() -> list[tuple[str, SweepSpec]]:
    spec = SweepSpec(
        kind="hom",
        axes=(
            SweepAxis("mu_a", 1e-3, 0.1, 21, "log"),
            SweepAxis("mu_b", 1e-3, 0.1, 21, "log"),
        ),
        outputs=("V_HOM4",),
    )
    return [("hom-2d", spec)]


def _swap_vs_mu() -> list[tuple[str, SweepSpec]]:
    base_a = _source_fixed(source_sweep_mu_a(0.0))
    base_a.pop("mu_a")
    base_a["zeta_sq"] = 0.69
    base_b = _source_fixed(source_sweep_mu_b(0.0))
    base_b.pop("mu_b")
    base_b["zeta_sq"] = 0.64
    spec_a = SweepSpec(
        kind="swap",
        fixed=base_a,
        axes=(SweepAxis("mu_a", 0.005, 0.45, 90),),
        outputs=("V_swap",),
    )
    spec_b = SweepSpec(
        kind="swap",
        fixed=base_b,
        axes=(SweepAxis("mu_b", 0.005, 0.45, 90),),
        outputs=("V_swap",),
    )
    return [("swap-vs-mu-a", spec_a), ("swap-vs-mu-b", spec_b)]


def _swap_vs_zeta() -> list[tuple[str, SweepSpec]]:
    spec = SweepSpec(
        kind="swap",
        fixed=_source_fixed(SWAP_OPERATING_POINT),
        axes=(SweepAxis("zeta_sq", 0.0, 1.0, 101),),
        outputs=("V_swap", "fidelity"),
    )
    return [("swap-vs-zeta", spec)]


def _skr_vs_zeta() -> list[tuple[str, SweepSpec]]:
    fixed = _source_fixed(SWAP_OPERATING_POINT)
    fixed["kappa"] = 1.22
    fixed["e_t"] = 0.011
    spec = SweepSpec(
        kind="swap",
        fixed=fixed,
        axes=(SweepAxis("zeta_sq", 0.0, 1.0, 101),),
        outputs=("V_swap", "R_over_Rs", "R_over_Rs_model"),
    )
    return [("skr-vs-zeta", spec)]


@dataclasses.dataclass(frozen=True)
class FigureRecipe:
    name: str
    description: str
    build: Callable[[], list[tuple[str, SweepSpec]]]


FIGURES: dict[str, FigureRecipe] = {
    recipe.name: recipe
    for recipe in (
        FigureRecipe(
            "hom-vs-mu",
            "Interference visibilities of every order vs equal mean pair"
            " number, lossless and fully indistinguishable.",
            _hom_vs_mu,
        ),
        FigureRecipe(
            "hom-vs-zeta",
            "Interference visibilities vs squared overlap at the measured"
            " interference operating point.",
            _hom_vs_zeta,
        ),
        FigureRecipe(
            "hom-2d",
            "Fourfold interference visibility over the (mu_A, mu_B) plane,"
            " lossless and fully indistinguishable.",
            _hom_2d,
        ),
        FigureRecipe(
            "swap-vs-mu",
            "Swapping visibility vs one source's mean pair number at the"
            " two pump-sweep operating points.",
            _swap_vs_mu,
        ),
        FigureRecipe(
            "swap-vs-zeta",
            "Swapping visibility and fidelity vs squared overlap at the"
            " swapping operating point.",
            _swap_vs_zeta,
        ),
        FigureRecipe(
            "skr-vs-zeta",
            "Normalized secret-key rate vs squared overlap at the swapping"
            " operating point (measured error budget and error-free model).",
            _skr_vs_zeta,
        ),
    )
}


def available_figures() -> list[str]:
    return sorted(FIGURES)


def reproduce_figure(name: str, out_root, workers: int = 1) -> list[Path]:
    """Run a registered figure's sweeps into a new run directory.

    Returns the written artifact paths (the manifest is alongside them).
    """
    if name not in FIGURES:
        raise ConfigError(
            f"unknown figure {name!r}; available: {', '.join(available_figures())}"
        )
    recipe = FIGURES[name]
    run_dir = new_run_dir(out_root, name)
    recorder = RunRecorder(run_dir, command=f"reproduce {name}")
    recorder.params["figure"] = name
    recorder.params["description"] = recipe.description
    written: list[Path] = []
    for stem, spec in recipe.build():
        if workers != 1:
            spec = dataclasses.replace(spec, workers=workers)
        result = run_sweep(spec)
        target = recorder.path_for(f"{stem}.csv")
        result.write_csv(target)
        recorder.add(target)
        written.append(target)
    recorder.finish()
    return written
