"""Append-only run directories with a hash manifest.

Every CLI invocation that produces artifacts gets a fresh numbered
directory under the output root.  Files are only ever created, never
rewritten, and the manifest records the parameters, seed and a sha256
per artifact so a run can be verified byte-for-byte later.
"""

from __future__ import annotations

import dataclasses
import datetime
import re
from pathlib import Path

from ..errors import ConfigError
from .tables import fmt_value, sha256_file

MANIFEST_NAME = "manifest.txt"

_RUN_DIR_RE = re.compile(r"^(?P<label>.+)-(?P<index>\d{4})$")


def new_run_dir(root, label: str) -> Path:
    """Create ``root/<label>-NNNN`` with the next free sequence number."""
    if not re.fullmatch(r"[a-z0-9][a-z0-9-]*", label):
        raise ConfigError(f"run label must be a simple slug, got {label!r}")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    taken = 0
    for entry in root.iterdir():
        m = _RUN_DIR_RE.match(entry.name)
        if m and m.group("label") == label:
            taken = max(taken, int(m.group("index")))
    for index in range(taken + 1, taken + 1002):
        candidate = root / f"{label}-{index:04d}"
        try:
            candidate.mkdir()
        except FileExistsError:
            continue
        return candidate
    raise ConfigError(f"could not allocate a run directory under {root}")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _scalar(value) -> str:
    if isinstance(value, str):
        return _quote(value)
    return fmt_value(value)


@dataclasses.dataclass
class RunRecorder:
    """Collects artifacts for one run directory, then seals the manifest."""

    directory: Path
    command: str
    seed: int | None = None
    params: dict = dataclasses.field(default_factory=dict)
    _artifacts: list[Path] = dataclasses.field(default_factory=list)

    def path_for(self, name: str) -> Path:
        if "/" in name or name.startswith("."):
            raise ConfigError(f"artifact name must be a plain filename: {name!r}")
        target = Path(self.directory) / name
        if target.exists():
            raise ConfigError(f"refusing to overwrite existing artifact {target}")
        return target

    def add(self, path: Path) -> Path:
        self._artifacts.append(Path(path))
        return Path(path)

    def write_text(self, name: str, text: str) -> Path:
        target = self.path_for(name)
        target.write_text(text, encoding="ascii", newline="\n")
        return self.add(target)

    def finish(self) -> Path:
        """Write the manifest; the run directory is complete afterwards."""
        lines = [
            f"schema_version = 1",
            f"command = {_quote(self.command)}",
            "created_utc = "
            + _quote(
                datetime.datetime.now(datetime.timezone.utc).strftime(
                    "%Y-%m-%dT%H:%M:%SZ"
                )
            ),
        ]
        if self.seed is not None:
            lines.append(f"seed = {self.seed}")
        if self.params:
            lines.append("")
            lines.append("[params]")
            for key in sorted(self.params):
                lines.append(f"{key} = {_scalar(self.params[key])}")
        lines.append("")
        lines.append("[artifacts]")
        for path in self._artifacts:
            lines.append(f"{_quote(path.name)} = {_quote('sha256:' + sha256_file(path))}")
        target = Path(self.directory) / MANIFEST_NAME
        if target.exists():
            raise ConfigError(f"run at {self.directory} already has a manifest")
        target.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
        return target
