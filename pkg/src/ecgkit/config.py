"""Pipeline configuration: one TOML file, sections per stage, unknown keys rejected."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .exceptions import ConfigError
from .perturb import PerturbationConfig
from .preprocess import PreprocessConfig
from .render import RenderConfig

THREADS_ENV = "ECGKIT_THREADS"


def _strict(cls, data: dict, section: str):
    if not isinstance(data, dict):
        raise ConfigError(f"[{section}] must be a table")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


@dataclass(frozen=True)
class SymbolicConfig:
    merges: int = 5000
    id_offset: int = 0

    def __post_init__(self):
        if self.merges < 0 or self.id_offset < 0:
            raise ConfigError("merges and id_offset must be >= 0")


@dataclass(frozen=True)
class AssembleConfig:
    template: str = "llama32"
    T: int = 1024
    mode: str = "latent"
    min_signal: int = 500

    def __post_init__(self):
        from .assemble import TEMPLATES

        if self.template not in TEMPLATES:
            raise ConfigError(f"template must be one of {sorted(TEMPLATES)}")
        if self.mode not in ("latent", "tokenized"):
            raise ConfigError("mode must be 'latent' or 'tokenized'")
        if self.T < 1 or self.min_signal < 0:
            raise ConfigError("T must be >= 1 and min_signal >= 0")


@dataclass(frozen=True)
class EvalConfig:
    alpha: float = 0.05

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class PathsConfig:
    input: str | None = None
    output: str | None = None
    conversations: str | None = None


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    threads: int | None = None
    paths: PathsConfig = field(default_factory=PathsConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    symbolic: SymbolicConfig = field(default_factory=SymbolicConfig)
    render: RenderConfig = field(default_factory=RenderConfig)
    perturb: PerturbationConfig = field(default_factory=PerturbationConfig)
    assemble: AssembleConfig = field(default_factory=AssembleConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    _SECTIONS = {
        "paths": PathsConfig,
        "preprocess": PreprocessConfig,
        "symbolic": SymbolicConfig,
        "render": RenderConfig,
        "perturb": PerturbationConfig,
        "assemble": AssembleConfig,
        "eval": EvalConfig,
    }

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "PipelineConfig":
        allowed = set(cls._SECTIONS) | {"seed", "threads"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        threads = data.get("threads")
        if threads is not None and (not isinstance(threads, int) or threads < 1):
            raise ConfigError("threads must be a positive integer")
        kwargs = {"seed": seed, "threads": threads}
        for name, kind in cls._SECTIONS.items():
            section = dict(data.get(name, {}))
            if name == "perturb":
                section.setdefault("seed", seed)
            if name == "paths" and base_dir is not None:
                section = {k: str((base_dir / v).resolve()) if isinstance(v, str) else v
                           for k, v in section.items()}
            kwargs[name] = _strict(kind, section, name)
        return cls(**kwargs)

    def validate_paths(self) -> None:
        """Inputs must exist and outputs must have an existing parent."""
        p = self.paths
        for name in ("input", "conversations"):
            value = getattr(p, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"[paths] {name} does not exist: {value}")
        if p.output is not None and not Path(p.output).resolve().parent.exists():
            raise ConfigError(f"[paths] output parent directory missing: {p.output}")


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return PipelineConfig.from_dict(data, base_dir=path.resolve().parent)


def resolve_threads(flag: int | None, cfg: PipelineConfig) -> int:
    """Flag, then the environment, then the config file, then 1."""
    if flag is not None:
        n = flag
    elif os.environ.get(THREADS_ENV):
        try:
            n = int(os.environ[THREADS_ENV])
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from None
    elif cfg.threads is not None:
        n = cfg.threads
    else:
        n = 1
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n
