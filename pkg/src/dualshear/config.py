"""Key-value run configuration with a stable content hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    N: int = 128
    coarse_log2: int = 1
    K: int = 4
    K_g: int = 4
    J: int | None = None
    P: int | None = None
    jmax: int | None = None
    gram_tol: float = 1e-3
    support_threshold: float = 1e-6
    seed: int = 0

    def hash(self) -> str:
        text = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def system(self):
        from .system import DualizableSystem

        return DualizableSystem.build(self.N, self.coarse_log2, self.K, self.K_g,
                                      jmax=self.jmax, J=self.J, P=self.P)


_TYPES = {f.name: f.type for f in fields(Config)}


def _convert(key: str, text: str):
    kind = _TYPES[key]
    if text.lower() in ("none", "") and "None" in kind:
        return None
    if kind.startswith("int"):
        return int(text)
    return float(text)


def parse_config(text: str) -> Config:
    """``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(key, val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return Config(**values)


def load_config(path) -> Config:
    if path is None:
        return Config()
    return parse_config(Path(path).read_text())


def format_config(cfg: Config) -> str:
    return "".join(f"{k} = {v}\n" for k, v in asdict(cfg).items())
