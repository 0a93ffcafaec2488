"""Run manifests and delimited-output helpers.

Every CLI run writes ``manifest.txt`` recording the package version, the
subcommand and its arguments, the fully-resolved configuration, the root
seed, wall-clock interval, and a SHA-256 digest of each output file.  The
config and args sections are round-trippable: feeding them back into the
same subcommand regenerates every CSV byte-for-byte.
"""

import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

MANIFEST_NAME = "manifest.txt"

_FLOAT_FMT = "%.17g"


def fmt_value(value) -> str:
    """Canonical CSV cell: floats at 17 significant digits, booleans lowercase."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _FLOAT_FMT % value
    return str(value)


def write_csv(path, header: str, rows) -> Path:
    """Write a delimited table; each row is an iterable of cell values."""
    path = Path(path)
    lines = [header]
    lines.extend(",".join(fmt_value(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    version: str
    seed: int
    config_items: list  # (key, value) pairs reproducing the settings
    arg_items: list  # (key, value) pairs of subcommand arguments
    started: str = ""
    finished: str = ""
    outputs: list = None  # (filename, sha256) pairs

    def __post_init__(self):
        if not self.started:
            self.started = _now()
        if self.outputs is None:
            self.outputs = []

    def add_output(self, path) -> None:
        path = Path(path)
        self.outputs.append((path.name, sha256_file(path)))

    def finalize(self) -> None:
        self.finished = _now()

    def write(self, out_dir) -> Path:
        lines = [
            f"version = {self.version}",
            f"command = {self.command}",
            f"seed = {self.seed}",
            f"started = {self.started}",
            f"finished = {self.finished or _now()}",
            "",
            "[config]",
        ]
        lines.extend(f"{k} = {v}" for k, v in self.config_items)
        lines.append("")
        lines.append("[args]")
        lines.extend(f"{k} = {v}" for k, v in self.arg_items)
        lines.append("")
        lines.append("[outputs]")
        lines.extend(f"{name} sha256={digest}" for name, digest in self.outputs)
        path = Path(out_dir) / MANIFEST_NAME
        path.write_text("\n".join(lines) + "\n")
        return path


def read_manifest(path) -> dict:
    """Parse a manifest back into header fields plus config/args/outputs maps."""
    header: dict = {"config": {}, "args": {}, "outputs": {}}
    section = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line in ("[config]", "[args]", "[outputs]"):
            section = line[1:-1]
            continue
        if section == "outputs":
            name, _, digest = line.partition(" sha256=")
            header["outputs"][name.strip()] = digest.strip()
        elif "=" in line:
            key, _, value = line.partition("=")
            target = header[section] if section else header
            target[key.strip()] = value.strip()
    return header
