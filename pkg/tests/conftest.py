from __future__ import annotations

from pathlib import Path

import pytest

from sptbench.config import GlobalConfig
from sptbench.corpus import Program, UnitTest, load_corpus
from sptbench.detector import DetectorHandle, Scorer
from sptbench.toys import materialize_toys
from sptbench.transform import EvalContext, Transformer, TransformerSet

FIXTURES = Path(__file__).parent / "fixtures"

# Small stdin->stdout subject programs used by search/metric tests. All pass
# their own tests; u_-prefixed names make the mangle_u toy applicable.
TOY_PROGRAMS: list[tuple[str, str, list[tuple[bytes, bytes]]]] = [
    ("tp1", "u_n = int(input())\nprint(u_n * 2)\n", [(b"3\n", b"6\n"), (b"10\n", b"20\n")]),
    (
        "tp2",
        "u_a, u_b = map(int, input().split())\nprint(u_a + u_b)\n",
        [(b"1 2\n", b"3\n"), (b"5 7\n", b"12\n")],
    ),
    ("tp3", "u_s = input()\nprint(u_s[::-1])\n", [(b"abc\n", b"cba\n"), (b"hello\n", b"olleh\n")]),
    (
        "tp4",
        "u_x = int(input())\nif u_x % 2 == 0:\n    print('even')\nelse:\n    print('odd')\n",
        [(b"4\n", b"even\n"), (b"7\n", b"odd\n")],
    ),
]


def make_program(pid: str, source: str) -> Program:
    return Program.make(pid, f"prob-{pid}", source)


def make_tests(pairs: list[tuple[bytes, bytes]], time_limit_ms: int = 2000) -> list[UnitTest]:
    return [UnitTest(stdin_text=i, expected_stdout=o, time_limit_ms=time_limit_ms) for i, o in pairs]


@pytest.fixture(scope="session")
def global_cfg() -> GlobalConfig:
    return GlobalConfig()


@pytest.fixture(scope="session")
def sandbox_cfg(global_cfg):
    return global_cfg.sandbox


@pytest.fixture(scope="session")
def toy_registry(tmp_path_factory) -> dict[str, Transformer]:
    return materialize_toys(tmp_path_factory.mktemp("toyreg"))


@pytest.fixture(scope="session")
def ctx(global_cfg) -> EvalContext:
    # one shared cache for the whole session: toys are deterministic, so
    # identical (transformer, source, seed) applications are interchangeable
    return EvalContext(global_cfg.sandbox, global_cfg.apply_limits, seed=1)


@pytest.fixture(scope="session")
def scorer() -> Scorer:
    return Scorer(DetectorHandle(kind="lexical"))


@pytest.fixture(scope="session")
def search_programs() -> list[tuple[Program, list[UnitTest]]]:
    return [
        (make_program(pid, src), make_tests(tests)) for pid, src, tests in TOY_PROGRAMS
    ]


@pytest.fixture(scope="session")
def fixture_corpus_path() -> Path:
    return FIXTURES / "corpus6.jsonl"


@pytest.fixture(scope="session")
def fixture_problems(fixture_corpus_path):
    return load_corpus(fixture_corpus_path)


def toyset(registry: dict[str, Transformer], *names: str, set_id: str = "toys") -> TransformerSet:
    return TransformerSet(set_id=set_id, members=tuple(registry[n] for n in names))
