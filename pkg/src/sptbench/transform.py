"""Executable program transformers: apply, evaluate, reward, and augmentation.

A transformer is an external executable that reads one program on stdin and
writes the rewritten program to stdout, exiting 0. Anything else (nonzero
exit, timeout, syntactically invalid output) is classified on the outcome.
Byte-identical output counts as identity, never as a transformation.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from filelock import FileLock

from .corpus import CodePair, PairDataset, Problem, Program, UnitTest
from .detector import Scorer
from .errors import DomainError, RegistryError
from .sandbox import (
    STATUS_NONZERO,
    STATUS_OK,
    STATUS_SPAWN_FAILURE,
    STATUS_TIMEOUT,
    STATUS_TRUNCATED,
    ExecLimits,
    SandboxConfig,
    check_equivalent,
    check_valid,
    run_process,
)
from .seeds import derive_seed, source_digest

KIND_EXTERNAL = "external"

APPLY_TRANSFORMED = "transformed"
APPLY_IDENTITY = "identity"
APPLY_INVALID = "invalid_output"
APPLY_CRASHED = "crashed"
APPLY_TIMEOUT = "timeout"

DEFAULT_APPLY_LIMITS = ExecLimits(wall_time_ms=10_000, memory_bytes=512 * 1024 * 1024, max_output_bytes=8 * 1024 * 1024)

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Transformer:
    transformer_id: str
    name: str
    description: str
    entry: tuple[str, ...]
    kind: str = KIND_EXTERNAL
    provenance: dict = field(default_factory=lambda: {"manual": True})
    root_dir: str | None = None  # directory the entry's {dir} placeholder resolves to

    def argv(self) -> list[str]:
        out = []
        for part in self.entry:
            if "{dir}" in part:
                if self.root_dir is None:
                    raise RegistryError(
                        f"transformer {self.transformer_id!r} uses {{dir}} without a root directory"
                    )
                part = part.replace("{dir}", self.root_dir)
            out.append(part)
        return out


@dataclass(frozen=True)
class TransformerSet:
    set_id: str
    members: tuple[Transformer, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise DomainError("transformer set must be non-empty")
        ids = [t.transformer_id for t in self.members]
        if len(set(ids)) != len(ids):
            raise DomainError(f"duplicate transformer_id in set {self.set_id!r}")


@dataclass
class ApplyOutcome:
    status: str
    output_source: str | None
    wall_time_ms: float


@dataclass
class ProgramEvaluation:
    program_id: str
    applied: bool
    equivalent: bool
    distance: float


@dataclass
class TransformerEvaluation:
    transformer_id: str
    n: int
    correct_and_applicable: int
    mean_reward: float
    per_program: list[ProgramEvaluation]


# --- registry -----------------------------------------------------------

def load_transformer(directory: str | Path) -> Transformer:
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise RegistryError(f"no {MANIFEST_NAME} in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RegistryError(f"unreadable manifest in {directory}: {exc}") from exc
    try:
        t = Transformer(
            transformer_id=manifest["transformer_id"],
            name=manifest["name"],
            description=manifest["description"],
            entry=tuple(manifest["entry"]),
            kind=manifest.get("kind", KIND_EXTERNAL),
            provenance=manifest.get("provenance", {"manual": True}),
            root_dir=str(directory.resolve()),
        )
    except (KeyError, TypeError) as exc:
        raise RegistryError(f"manifest in {directory} missing field: {exc}") from exc
    for part in t.entry:
        if "{dir}" in part:
            artifact = Path(part.replace("{dir}", str(directory.resolve())))
            if not artifact.exists():
                raise RegistryError(
                    f"transformer {t.transformer_id!r}: artifact {artifact} missing"
                )
    return t


def load_registry(registry_dir: str | Path) -> dict[str, Transformer]:
    """Load every transformer directory under registry_dir, keyed by id."""
    registry_dir = Path(registry_dir)
    if not registry_dir.is_dir():
        raise RegistryError(f"registry directory {registry_dir} does not exist")
    out: dict[str, Transformer] = {}
    for child in sorted(registry_dir.iterdir()):
        if not child.is_dir() or not (child / MANIFEST_NAME).exists():
            continue
        t = load_transformer(child)
        if t.transformer_id in out:
            raise RegistryError(f"duplicate transformer_id {t.transformer_id!r} in registry")
        out[t.transformer_id] = t
    return out


def write_transformer(
    registry_dir: str | Path,
    transformer_id: str,
    name: str,
    description: str,
    script_text: str,
    provenance: dict,
    script_name: str = "transform.py",
    entry_prefix: Sequence[str] = ("python3", "-S", "-E"),
) -> Transformer:
    """Persist a transformer as a registry directory; exclusive via lock file."""
    registry_dir = Path(registry_dir)
    registry_dir.mkdir(parents=True, exist_ok=True)
    with FileLock(str(registry_dir / ".registry.lock")):
        target = registry_dir / transformer_id
        if target.exists():
            raise RegistryError(f"transformer {transformer_id!r} already registered")
        target.mkdir()
        (target / script_name).write_text(script_text, encoding="utf-8")
        manifest = {
            "transformer_id": transformer_id,
            "name": name,
            "description": description,
            "kind": KIND_EXTERNAL,
            "entry": [*entry_prefix, "{dir}/" + script_name],
            "provenance": provenance,
        }
        (target / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return load_transformer(target)


# --- application --------------------------------------------------------

def apply(
    t: Transformer,
    source: str,
    sandbox_cfg: SandboxConfig,
    limits: ExecLimits = DEFAULT_APPLY_LIMITS,
    seed: int | None = None,
) -> ApplyOutcome:
    """Run one transformer on one program and classify the outcome.

    Identity is decided on raw bytes before validity is consulted, so an
    identity transformer never costs a validity check.
    """
    env = dict(os.environ)
    if seed is not None:
        env["SPT_SEED"] = str(seed)
    result = run_process(
        t.argv(),
        source.encode("utf-8"),
        wall_time_ms=limits.wall_time_ms,
        max_output_bytes=limits.max_output_bytes,
        memory_bytes=limits.memory_bytes,
        env=env,
    )
    if result.status == STATUS_TIMEOUT:
        return ApplyOutcome(APPLY_TIMEOUT, None, result.wall_time_ms)
    if result.status in (STATUS_NONZERO, STATUS_SPAWN_FAILURE):
        return ApplyOutcome(APPLY_CRASHED, None, result.wall_time_ms)
    if result.status == STATUS_TRUNCATED:
        return ApplyOutcome(APPLY_INVALID, None, result.wall_time_ms)
    assert result.status == STATUS_OK
    try:
        output = result.stdout.decode("utf-8")
    except UnicodeDecodeError:
        return ApplyOutcome(APPLY_INVALID, None, result.wall_time_ms)
    if output == source:
        return ApplyOutcome(APPLY_IDENTITY, output, result.wall_time_ms)
    if not check_valid(output, sandbox_cfg):
        return ApplyOutcome(APPLY_INVALID, None, result.wall_time_ms)
    return ApplyOutcome(APPLY_TRANSFORMED, output, result.wall_time_ms)


class EvalContext:
    """Shared caches for apply/equivalence over one run.

    Apply results are memoized on (transformer_id, source digest, seed), which
    is sound because transformers are seeded through SPT_SEED; equivalence
    verdicts on (problem key, source digest).
    """

    def __init__(
        self,
        sandbox_cfg: SandboxConfig,
        apply_limits: ExecLimits = DEFAULT_APPLY_LIMITS,
        seed: int | None = None,
    ) -> None:
        self.sandbox_cfg = sandbox_cfg
        self.apply_limits = apply_limits
        self.seed = seed
        self._apply_cache: dict[tuple[str, str, int | None], ApplyOutcome] = {}
        self._equiv_cache: dict[tuple[str, str], bool] = {}
        self.apply_calls = 0
        self.equiv_calls = 0

    def apply(self, t: Transformer, source: str) -> ApplyOutcome:
        key = (t.transformer_id, source_digest(source), self.seed)
        hit = self._apply_cache.get(key)
        if hit is None:
            self.apply_calls += 1
            hit = apply(t, source, self.sandbox_cfg, self.apply_limits, seed=self.seed)
            self._apply_cache[key] = hit
        return hit

    def equivalent(self, source: str, tests: Sequence[UnitTest], tests_key: str) -> bool:
        key = (tests_key, source_digest(source))
        hit = self._equiv_cache.get(key)
        if hit is None:
            self.equiv_calls += 1
            verdict = check_equivalent(source, tests, self.sandbox_cfg.limits, self.sandbox_cfg)
            hit = verdict.equivalent == 1
            self._equiv_cache[key] = hit
        return hit


# --- evaluation / reward ------------------------------------------------

def evaluate_transformer(
    t: Transformer,
    programs_with_tests: Sequence[tuple[Program, Sequence[UnitTest]]],
    ctx: EvalContext,
    detector: Scorer | None = None,
) -> TransformerEvaluation:
    """Apply t to each program; count transformed-and-equivalent outcomes.

    With a detector, per-program distance is L(x, T(x)) and mean_reward is the
    mean of A*L terms; without one, distances and reward are reported as 0.
    """
    if not programs_with_tests:
        raise DomainError("evaluation needs at least one program")
    per_program: list[ProgramEvaluation] = []
    total = 0.0
    for prog, tests in programs_with_tests:
        outcome = ctx.apply(t, prog.source_text)
        applied = outcome.status == APPLY_TRANSFORMED
        equivalent = False
        distance = 0.0
        if applied:
            assert outcome.output_source is not None
            equivalent = ctx.equivalent(outcome.output_source, tests, prog.problem_id)
            if equivalent and detector is not None:
                distance = detector.distance(prog.source_text, outcome.output_source)
        per_program.append(
            ProgramEvaluation(
                program_id=prog.program_id,
                applied=applied,
                equivalent=equivalent,
                distance=distance,
            )
        )
        if applied and equivalent:
            total += distance
    n = len(per_program)
    return TransformerEvaluation(
        transformer_id=t.transformer_id,
        n=n,
        correct_and_applicable=sum(1 for e in per_program if e.applied and e.equivalent),
        mean_reward=total / n,
        per_program=per_program,
    )


def reward(
    t: Transformer,
    validation: Sequence[tuple[Program, Sequence[UnitTest]]],
    detector: Scorer,
    ctx: EvalContext,
) -> float:
    """Mean over validation programs of A(x, T(x)) * L(x, T(x))."""
    return evaluate_transformer(t, validation, ctx, detector).mean_reward


def best_of_n(
    candidates: Sequence[Transformer],
    validation: Sequence[tuple[Program, Sequence[UnitTest]]],
    detector: Scorer,
    ctx: EvalContext,
) -> tuple[Transformer, list[TransformerEvaluation]]:
    """Pick the highest-reward candidate; ties go to the lowest index."""
    if not candidates:
        raise DomainError("best_of_n needs at least one candidate")
    table = [evaluate_transformer(t, validation, ctx, detector) for t in candidates]
    best_idx = 0
    for i in range(1, len(table)):
        if table[i].mean_reward > table[best_idx].mean_reward:
            best_idx = i
    return candidates[best_idx], table


def per_program_applicability(
    tset: TransformerSet,
    programs_with_tests: Sequence[tuple[Program, Sequence[UnitTest]]],
    ctx: EvalContext,
) -> list[dict]:
    """Per program, how many set members are transformed-and-equivalent on it."""
    counts = {prog.program_id: 0 for prog, _ in programs_with_tests}
    for t in tset.members:
        evaluation = evaluate_transformer(t, programs_with_tests, ctx)
        for entry in evaluation.per_program:
            if entry.applied and entry.equivalent:
                counts[entry.program_id] += 1
    return [
        {"program_id": prog.program_id, "applicable_count": counts[prog.program_id]}
        for prog, _ in programs_with_tests
    ]


# --- dataset augmentation -------------------------------------------------

@dataclass
class AugmentResult:
    dataset: PairDataset
    new_programs: list[Program]
    attempts: int  # pairs that drew below p and tried a transformer
    replaced: int
    per_transformer: dict[str, int]


def augment_dataset(
    dataset: PairDataset,
    tset: TransformerSet,
    p: float,
    seed: int,
    problems: Sequence[Problem],
    ctx: EvalContext,
) -> AugmentResult:
    """Probabilistically rewrite one side of each pair with a random member.

    Each pair draws independently from a seed derived from (seed, pair index),
    so insertion order elsewhere cannot perturb outcomes. A side is replaced
    only when the transformer output is both a real change and equivalent
    under the side's problem tests; otherwise the pair passes through as-is.
    Labels never change.
    """
    if not (0.0 <= p <= 1.0):
        raise DomainError("p must lie in [0,1]")
    by_id = {}
    tests_by_problem: dict[str, list[UnitTest]] = {}
    for prob in problems:
        tests_by_problem[prob.problem_id] = prob.tests
        for sol in prob.solutions:
            by_id[sol.program_id] = sol
    new_pairs: list[CodePair] = []
    new_programs: list[Program] = []
    attempts = 0
    replaced = 0
    per_transformer = {t.transformer_id: 0 for t in tset.members}
    for i, pair in enumerate(dataset.pairs):
        rng = random.Random(derive_seed(seed, f"augment:{i}"))
        if rng.random() >= p:
            new_pairs.append(pair)
            continue
        attempts += 1
        t = tset.members[rng.randrange(len(tset.members))]
        side = rng.randrange(2)  # 0 = a, 1 = b
        victim_id = pair.a if side == 0 else pair.b
        victim = by_id.get(victim_id)
        if victim is None:
            new_pairs.append(pair)
            continue
        outcome = ctx.apply(t, victim.source_text)
        if outcome.status != APPLY_TRANSFORMED:
            new_pairs.append(pair)
            continue
        assert outcome.output_source is not None
        tests = tests_by_problem.get(victim.problem_id, [])
        if not tests or not ctx.equivalent(outcome.output_source, tests, victim.problem_id):
            new_pairs.append(pair)
            continue
        new_prog = Program.make(f"{victim_id}~aug{i}", victim.problem_id, outcome.output_source)
        new_programs.append(new_prog)
        replaced += 1
        per_transformer[t.transformer_id] += 1
        if side == 0:
            new_pairs.append(CodePair(a=new_prog.program_id, b=pair.b, label=pair.label))
        else:
            new_pairs.append(CodePair(a=pair.a, b=new_prog.program_id, label=pair.label))
    out = PairDataset(
        split=dataset.split,
        pairs=new_pairs,
        seed=dataset.seed,
        provenance={
            **dataset.provenance,
            "augmented": {
                "p": p,
                "seed": seed,
                "set": tset.set_id,
                "attempts": attempts,
                "replaced": replaced,
                "replaced_per_transformer": dict(per_transformer),
            },
        },
    )
    return AugmentResult(
        dataset=out,
        new_programs=new_programs,
        attempts=attempts,
        replaced=replaced,
        per_transformer=per_transformer,
    )
