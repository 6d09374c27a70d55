"""Flat ``key = value`` run configuration."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .kernel import ExcitationKernel, kernel_from_config
from .marks import MarkDistribution, mark_from_config
from .process import ProcessParams

KNOWN_KEYS = {
    "nu",
    "kernel.kind", "kernel.weights", "kernel.a", "kernel.r", "kernel.p", "kernel.K",
    "mark.kind", "mark.c", "mark.beta", "mark.shape", "mark.scale", "mark.values", "mark.probs",
}


@dataclass(frozen=True)
class RunConfig:
    nu: float
    kernel: ExcitationKernel
    marks: MarkDistribution

    def params(self, require_stable: bool = True) -> ProcessParams:
        return ProcessParams(self.nu, self.kernel, self.marks, require_stable=require_stable)

    def dump(self) -> str:
        lines = [f"nu = {self.nu!r}"]
        lines += [f"{k} = {v}" for k, v in self.kernel.config_items().items()]
        lines += [f"{k} = {v}" for k, v in self.marks.config_items().items()]
        return "\n".join(lines) + "\n"


def parse_entries(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        entries[key] = value
    return entries


def parse_config(text: str) -> RunConfig:
    entries = parse_entries(text)
    if "nu" not in entries:
        raise ConfigError("missing required key nu")
    try:
        nu = float(entries["nu"])
    except ValueError:
        raise ConfigError(f"nu: expected a number, got {entries['nu']!r}") from None
    if not nu > 0:
        raise ConfigError(f"nu must be positive, got {nu!r}")
    return RunConfig(nu, kernel_from_config(entries), mark_from_config(entries))


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
