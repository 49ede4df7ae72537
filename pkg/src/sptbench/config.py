"""Global configuration: one JSON file, strict keys, flag overrides upstream.

Unknown keys are rejected rather than ignored so a typo cannot silently fall
back to a default mid-experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .detector import DetectorHandle
from .errors import ConfigError
from .sandbox import ExecLimits, SandboxConfig

_MIB = 1024 * 1024

# Parse-only check: compiles the file without executing the program body.
DEFAULT_VALIDITY_CMD = (
    "python3",
    "-S",
    "-E",
    "-c",
    "import ast,sys; ast.parse(open(sys.argv[1]).read())",
    "{file}",
)
DEFAULT_INTERPRETER_CMD = ("python3", "-S", "-E", "{file}")


@dataclass(frozen=True)
class SearchDefaults:
    beam_size: int = 5
    iterations: int = 10
    dedup: bool = True
    track_global_best: bool = True
    brute_force_cap: int = 10_000


@dataclass(frozen=True)
class ChatDefaults:
    mode: str = "replay"
    model_id: str = "gemini-2.5-pro"
    design_temperature: float = 0.1
    implement_temperature: float = 0.8
    max_output_tokens: int = 4096
    endpoint: str | None = None
    cassette_path: str | None = None
    api_key_env: str | None = None


@dataclass(frozen=True)
class Paths:
    registry_dir: str = "registry"
    corpus_dir: str = "corpus"
    reports_dir: str = "reports"


@dataclass(frozen=True)
class GlobalConfig:
    seed: int = 0
    sandbox: SandboxConfig = field(
        default_factory=lambda: SandboxConfig(
            interpreter_cmd=DEFAULT_INTERPRETER_CMD,
            validity_cmd=DEFAULT_VALIDITY_CMD,
        )
    )
    detector: DetectorHandle = field(default_factory=lambda: DetectorHandle(kind="lexical"))
    chat: ChatDefaults = field(default_factory=ChatDefaults)
    search: SearchDefaults = field(default_factory=SearchDefaults)
    paths: Paths = field(default_factory=Paths)
    apply_limits: ExecLimits = field(
        default_factory=lambda: ExecLimits(
            wall_time_ms=10_000, memory_bytes=512 * _MIB, max_output_bytes=8 * _MIB
        )
    )


def _take(block: dict, allowed: dict[str, object], where: str) -> dict:
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    merged = dict(allowed)
    merged.update(block)
    return merged


def _limits_from(block: dict, where: str, defaults: ExecLimits) -> ExecLimits:
    vals = _take(
        block,
        {
            "wall_time_ms": defaults.wall_time_ms,
            "memory_bytes": defaults.memory_bytes,
            "max_output_bytes": defaults.max_output_bytes,
        },
        where,
    )
    try:
        return ExecLimits(**{k: int(v) for k, v in vals.items()})
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str | Path | None) -> GlobalConfig:
    """Read the config file; a missing path means all defaults."""
    if path is None:
        return GlobalConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config root must be an object")
    top = _take(
        raw,
        {
            "seed": 0,
            "sandbox": {},
            "detector": {},
            "chat": {},
            "search": {},
            "paths": {},
            "apply": {},
        },
        "config",
    )

    sb = _take(
        top["sandbox"],
        {
            "interpreter_cmd": list(DEFAULT_INTERPRETER_CMD),
            "validity_cmd": list(DEFAULT_VALIDITY_CMD),
            "limits": {},
            "max_workers": 0,
            "source_filename": "prog.py",
        },
        "config.sandbox",
    )
    sandbox = SandboxConfig(
        interpreter_cmd=tuple(sb["interpreter_cmd"]),
        validity_cmd=tuple(sb["validity_cmd"]),
        limits=_limits_from(sb["limits"], "config.sandbox.limits", ExecLimits()),
        max_workers=int(sb["max_workers"]),
        source_filename=str(sb["source_filename"]),
    )

    det = _take(
        top["detector"],
        {"kind": "lexical", "endpoint": None, "timeout_ms": 10_000, "batch_size": 32},
        "config.detector",
    )
    detector = DetectorHandle(
        kind=det["kind"],
        endpoint=det["endpoint"],
        timeout_ms=int(det["timeout_ms"]),
        batch_size=int(det["batch_size"]),
    )

    ch = _take(
        top["chat"],
        {
            "mode": ChatDefaults.mode,
            "model_id": ChatDefaults.model_id,
            "design_temperature": ChatDefaults.design_temperature,
            "implement_temperature": ChatDefaults.implement_temperature,
            "max_output_tokens": ChatDefaults.max_output_tokens,
            "endpoint": None,
            "cassette_path": None,
            "api_key_env": None,
        },
        "config.chat",
    )
    chat = ChatDefaults(
        mode=ch["mode"],
        model_id=ch["model_id"],
        design_temperature=float(ch["design_temperature"]),
        implement_temperature=float(ch["implement_temperature"]),
        max_output_tokens=int(ch["max_output_tokens"]),
        endpoint=ch["endpoint"],
        cassette_path=ch["cassette_path"],
        api_key_env=ch["api_key_env"],
    )

    se = _take(
        top["search"],
        {
            "beam_size": SearchDefaults.beam_size,
            "iterations": SearchDefaults.iterations,
            "dedup": SearchDefaults.dedup,
            "track_global_best": SearchDefaults.track_global_best,
            "brute_force_cap": SearchDefaults.brute_force_cap,
        },
        "config.search",
    )
    search = SearchDefaults(
        beam_size=int(se["beam_size"]),
        iterations=int(se["iterations"]),
        dedup=bool(se["dedup"]),
        track_global_best=bool(se["track_global_best"]),
        brute_force_cap=int(se["brute_force_cap"]),
    )

    pa = _take(
        top["paths"],
        {"registry_dir": Paths.registry_dir, "corpus_dir": Paths.corpus_dir, "reports_dir": Paths.reports_dir},
        "config.paths",
    )
    paths = Paths(
        registry_dir=str(pa["registry_dir"]),
        corpus_dir=str(pa["corpus_dir"]),
        reports_dir=str(pa["reports_dir"]),
    )

    apply_limits = _limits_from(
        top["apply"],
        "config.apply",
        ExecLimits(wall_time_ms=10_000, memory_bytes=512 * _MIB, max_output_bytes=8 * _MIB),
    )

    return GlobalConfig(
        seed=int(top["seed"]),
        sandbox=sandbox,
        detector=detector,
        chat=chat,
        search=search,
        paths=paths,
        apply_limits=apply_limits,
    )
