"""Problem/solution corpora: ingestion, judge filtering, splits, and pair sets.

A corpus is a JSONL file of problems, each carrying unit tests and candidate
solutions. Solutions are kept only if they pass every test of their problem.
Filtered corpora are split into disjoint problem sets and expanded into
balanced clone / non-clone program pairs for detector training and scoring.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BoundsError, CorpusConflictError, CorpusFormatError, DomainError
from .sandbox import SandboxConfig, check_equivalent
from .seeds import derive_seed, source_digest

CLONE = "clone"
NONCLONE = "nonclone"


@dataclass(frozen=True)
class UnitTest:
    stdin_text: bytes
    expected_stdout: bytes
    time_limit_ms: int

    def __post_init__(self) -> None:
        if self.time_limit_ms <= 0:
            raise DomainError("time_limit_ms must be positive")


@dataclass(frozen=True)
class Program:
    program_id: str
    problem_id: str
    source_text: str
    source_hash: str

    @classmethod
    def make(cls, program_id: str, problem_id: str, source_text: str) -> "Program":
        return cls(program_id, problem_id, source_text, source_digest(source_text))


@dataclass
class Problem:
    problem_id: str
    tests: list[UnitTest]
    solutions: list[Program] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.tests:
            raise DomainError(f"problem {self.problem_id!r} has no tests")
        for sol in self.solutions:
            if sol.problem_id != self.problem_id:
                raise DomainError(
                    f"solution {sol.program_id!r} belongs to {sol.problem_id!r},"
                    f" not {self.problem_id!r}"
                )


@dataclass(frozen=True)
class CodePair:
    a: str  # program_id
    b: str
    label: str  # CLONE | NONCLONE


@dataclass
class PairDataset:
    split: str
    pairs: list[CodePair]
    seed: int
    provenance: dict = field(default_factory=dict)


@dataclass
class FilterReport:
    kept_problems: int
    dropped_problems: int
    kept_solutions: int
    dropped_solutions: int


def load_corpus(path: str | Path) -> list[Problem]:
    """Parse a JSONL corpus file into Problems, assigning source hashes."""
    problems: list[Problem] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            try:
                problems.append(_problem_from_record(record))
            except (KeyError, TypeError, DomainError) as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
            pid = problems[-1].problem_id
            if pid in seen_ids:
                raise CorpusConflictError(f"{path}:{lineno}: duplicate problem_id {pid!r}")
            seen_ids.add(pid)
    return problems


def _problem_from_record(record: dict) -> Problem:
    pid = record["problem_id"]
    if not isinstance(pid, str) or not pid:
        raise DomainError("problem_id must be a non-empty string")
    tests_raw = record["tests"]
    if not tests_raw:
        raise DomainError("problem has no tests")
    tests = [
        UnitTest(
            stdin_text=t["stdin"].encode("utf-8"),
            expected_stdout=t["expected_stdout"].encode("utf-8"),
            time_limit_ms=int(t["time_limit_ms"]),
        )
        for t in tests_raw
    ]
    solutions: list[Program] = []
    seen_prog: set[str] = set()
    for s in record.get("solutions", []):
        prog = Program.make(s["program_id"], pid, s["source"])
        if prog.program_id in seen_prog:
            raise DomainError(f"duplicate program_id {prog.program_id!r}")
        seen_prog.add(prog.program_id)
        solutions.append(prog)
    return Problem(problem_id=pid, tests=tests, solutions=solutions)


def save_corpus(problems: Sequence[Problem], path: str | Path) -> None:
    """Write problems back out in the same JSONL shape load_corpus reads."""
    with open(path, "w", encoding="utf-8") as f:
        for prob in problems:
            record = {
                "problem_id": prob.problem_id,
                "tests": [
                    {
                        "stdin": t.stdin_text.decode("utf-8"),
                        "expected_stdout": t.expected_stdout.decode("utf-8"),
                        "time_limit_ms": t.time_limit_ms,
                    }
                    for t in prob.tests
                ],
                "solutions": [
                    {"program_id": s.program_id, "source": s.source_text}
                    for s in prob.solutions
                ],
            }
            f.write(json.dumps(record, sort_keys=True) + "\n")


def filter_passing_solutions(
    problems: Sequence[Problem], sandbox_cfg: SandboxConfig
) -> tuple[list[Problem], FilterReport]:
    """Keep only solutions that pass all of their problem's tests.

    Problems left with no passing solution are dropped. Output is ordered by
    problem_id regardless of input order so reruns line up.
    """
    kept: list[Problem] = []
    dropped_problems = 0
    kept_solutions = 0
    dropped_solutions = 0
    for prob in sorted(problems, key=lambda p: p.problem_id):
        passing = []
        for sol in prob.solutions:
            verdict = check_equivalent(sol.source_text, prob.tests, sandbox_cfg.limits, sandbox_cfg)
            if verdict.equivalent == 1:
                passing.append(sol)
            else:
                dropped_solutions += 1
        kept_solutions += len(passing)
        if passing:
            kept.append(Problem(prob.problem_id, list(prob.tests), passing))
        else:
            dropped_problems += 1
    report = FilterReport(
        kept_problems=len(kept),
        dropped_problems=dropped_problems,
        kept_solutions=kept_solutions,
        dropped_solutions=dropped_solutions,
    )
    return kept, report


def split_problems(
    problems: Sequence[Problem], counts: tuple[int, int, int], seed: int
) -> tuple[list[Problem], list[Problem], list[Problem]]:
    """Deterministically partition problems into train/validation/test."""
    n_train, n_val, n_test = counts
    if min(counts) < 0:
        raise BoundsError("split counts must be non-negative")
    if n_train + n_val + n_test > len(problems):
        raise BoundsError(
            f"requested {n_train + n_val + n_test} problems but only {len(problems)} available"
        )
    by_id = {p.problem_id: p for p in problems}
    ids = sorted(by_id)
    rng = random.Random(derive_seed(seed, "split"))
    rng.shuffle(ids)
    cut1, cut2 = n_train, n_train + n_val
    picks = (ids[:cut1], ids[cut1:cut2], ids[cut2 : cut2 + n_test])
    return tuple([by_id[i] for i in sorted(chunk)] for chunk in picks)  # type: ignore[return-value]


def build_pairs(
    problems: Sequence[Problem],
    pairs_per_problem: int,
    seed: int,
    split: str = "train",
) -> PairDataset:
    """Sample balanced clone / non-clone pairs from one split's problems.

    Clone pairs come from same-problem solution pairs, capped per problem at
    pairs_per_problem (or at C(s,2) when fewer exist). An equal number of
    non-clone pairs is drawn uniformly over cross-problem program pairs.
    Pairs are canonically unordered: (min(id), max(id)).
    """
    if pairs_per_problem <= 0:
        raise BoundsError("pairs_per_problem must be positive")
    clone_pairs: list[CodePair] = []
    for prob in sorted(problems, key=lambda p: p.problem_id):
        ids = sorted(s.program_id for s in prob.solutions)
        candidates = list(itertools.combinations(ids, 2))
        rng = random.Random(derive_seed(seed, f"clone:{prob.problem_id}"))
        if len(candidates) > pairs_per_problem:
            candidates = rng.sample(candidates, pairs_per_problem)
        for a, b in sorted(candidates):
            clone_pairs.append(CodePair(a=min(a, b), b=max(a, b), label=CLONE))
    if not clone_pairs:
        raise DomainError("no clone pairs available")

    prog_to_problem = {
        s.program_id: p.problem_id for p in problems for s in p.solutions
    }
    all_ids = sorted(prog_to_problem)
    n_needed = len(clone_pairs)
    rng = random.Random(derive_seed(seed, "nonclone"))
    nonclone_keys: set[tuple[str, str]] = set()
    cross_total = _cross_problem_pair_count(problems)
    if cross_total < n_needed:
        raise DomainError(
            f"cannot draw {n_needed} non-clone pairs; only {cross_total} cross-problem pairs exist"
        )
    if cross_total <= 4 * n_needed:
        # small pool: enumerate and sample exactly
        pool = [
            (a, b)
            for a, b in itertools.combinations(all_ids, 2)
            if prog_to_problem[a] != prog_to_problem[b]
        ]
        nonclone_keys.update(rng.sample(pool, n_needed))
    else:
        while len(nonclone_keys) < n_needed:
            a, b = rng.sample(all_ids, 2)
            if prog_to_problem[a] == prog_to_problem[b]:
                continue
            nonclone_keys.add((min(a, b), max(a, b)))
    nonclone_pairs = [CodePair(a=a, b=b, label=NONCLONE) for a, b in sorted(nonclone_keys)]

    return PairDataset(
        split=split,
        pairs=clone_pairs + nonclone_pairs,
        seed=seed,
        provenance={
            "pairs_per_problem": pairs_per_problem,
            "n_problems": len(problems),
            "n_clone": len(clone_pairs),
            "n_nonclone": len(nonclone_pairs),
        },
    )


def _cross_problem_pair_count(problems: Sequence[Problem]) -> int:
    sizes = [len(p.solutions) for p in problems]
    total = sum(sizes)
    all_pairs = total * (total - 1) // 2
    within = sum(s * (s - 1) // 2 for s in sizes)
    return all_pairs - within


def save_pairs(dataset: PairDataset, path: str | Path) -> None:
    """Write pairs as JSONL plus a sidecar .manifest.json next to it."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for pair in dataset.pairs:
            f.write(json.dumps({"a": pair.a, "b": pair.b, "label": pair.label}) + "\n")
    manifest = {
        "split": dataset.split,
        "seed": dataset.seed,
        "counts": {
            "clone": sum(1 for p in dataset.pairs if p.label == CLONE),
            "nonclone": sum(1 for p in dataset.pairs if p.label == NONCLONE),
        },
        "provenance": dataset.provenance,
    }
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_pairs(path: str | Path) -> PairDataset:
    path = Path(path)
    pairs: list[CodePair] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pairs.append(CodePair(a=rec["a"], b=rec["b"], label=rec["label"]))
            except (json.JSONDecodeError, KeyError) as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    split, seed, provenance = "train", 0, {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        split = manifest.get("split", split)
        seed = manifest.get("seed", seed)
        provenance = manifest.get("provenance", {})
    return PairDataset(split=split, pairs=pairs, seed=seed, provenance=provenance)


def programs_by_id(problems: Iterable[Problem]) -> dict[str, Program]:
    out: dict[str, Program] = {}
    for prob in problems:
        for sol in prob.solutions:
            if sol.program_id in out:
                raise CorpusConflictError(f"duplicate program_id {sol.program_id!r} across corpus")
            out[sol.program_id] = sol
    return out
