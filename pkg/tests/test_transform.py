from __future__ import annotations

import pytest

from _oracles import jaccard_m, judge
from conftest import TOY_PROGRAMS, make_program, make_tests, toyset
from sptbench.corpus import CLONE, CodePair, PairDataset, Problem
from sptbench.errors import DomainError, RegistryError
from sptbench.sandbox import ExecLimits
from sptbench.transform import (
    APPLY_CRASHED,
    APPLY_IDENTITY,
    APPLY_INVALID,
    APPLY_TIMEOUT,
    APPLY_TRANSFORMED,
    EvalContext,
    Transformer,
    TransformerSet,
    apply,
    augment_dataset,
    best_of_n,
    evaluate_transformer,
    load_registry,
    load_transformer,
    per_program_applicability,
    reward,
    write_transformer,
)

SRC = TOY_PROGRAMS[0][1]  # doubler with u_ names


# --- registry ---------------------------------------------------------------

def test_write_then_load_round_trip(tmp_path):
    written = write_transformer(
        tmp_path,
        transformer_id="t-demo",
        name="Demo",
        description="does nothing interesting",
        script_text="import sys\nsys.stdout.write(sys.stdin.read())\n",
        provenance={"origin": "test"},
    )
    loaded = load_transformer(tmp_path / "t-demo")
    assert loaded.transformer_id == written.transformer_id
    assert loaded.entry == written.entry
    assert loaded.provenance.get("origin") == "test"
    registry = load_registry(tmp_path)
    assert set(registry) == {"t-demo"}


def test_write_duplicate_id_rejected(tmp_path):
    write_transformer(tmp_path, transformer_id="t1", name="a", description="d", script_text="x = 1\n", provenance={})
    with pytest.raises(RegistryError):
        write_transformer(tmp_path, transformer_id="t1", name="a", description="d", script_text="x = 2\n", provenance={})


def test_load_transformer_missing_script(tmp_path):
    write_transformer(tmp_path, transformer_id="t1", name="a", description="d", script_text="x = 1\n", provenance={})
    (tmp_path / "t1" / "transform.py").unlink()
    with pytest.raises(RegistryError):
        load_transformer(tmp_path / "t1")


def test_argv_requires_root_for_dir_entries():
    t = Transformer(
        transformer_id="x",
        name="x",
        description="",
        entry=("python3", "{dir}/transform.py"),
        provenance={},
        root_dir=None,
    )
    with pytest.raises(RegistryError):
        t.argv()


def test_transformer_set_rejects_duplicates(toy_registry):
    with pytest.raises(DomainError):
        TransformerSet(set_id="bad", members=(toy_registry["identity"], toy_registry["identity"]))
    with pytest.raises(DomainError):
        TransformerSet(set_id="empty", members=())


# --- apply classification -----------------------------------------------------

def test_apply_statuses(toy_registry, sandbox_cfg):
    cases = {
        "identity": APPLY_IDENTITY,
        "pad_alpha": APPLY_TRANSFORMED,
        "breaker": APPLY_TRANSFORMED,  # output is valid python; behavior is the judge's problem
        "crasher": APPLY_CRASHED,
        "invalid_out": APPLY_INVALID,
    }
    for name, expected in cases.items():
        outcome = apply(toy_registry[name], SRC, sandbox_cfg)
        assert outcome.status == expected, name
        if expected == APPLY_TRANSFORMED:
            assert outcome.output_source is not None
            assert outcome.output_source != SRC
        if expected in (APPLY_CRASHED, APPLY_INVALID):
            assert outcome.output_source is None


def test_apply_timeout(toy_registry, sandbox_cfg):
    limits = ExecLimits(wall_time_ms=300, memory_bytes=256 * 1024 * 1024, max_output_bytes=1024)
    outcome = apply(toy_registry["sleeper"], SRC, sandbox_cfg, limits)
    assert outcome.status == APPLY_TIMEOUT


def test_apply_is_repeatable_under_fixed_seed(tmp_path, sandbox_cfg):
    script = (
        "import os, sys\n"
        "text = sys.stdin.read()\n"
        "sys.stdout.write(text + '# seed ' + os.environ.get('SPT_SEED', 'none') + '\\n')\n"
    )
    t = write_transformer(tmp_path, transformer_id="seeded", name="s", description="", script_text=script, provenance={})
    one = apply(t, SRC, sandbox_cfg, seed=5)
    two = apply(t, SRC, sandbox_cfg, seed=5)
    other = apply(t, SRC, sandbox_cfg, seed=6)
    assert one.status == APPLY_TRANSFORMED
    assert one.output_source == two.output_source
    assert one.output_source != other.output_source
    assert "# seed 5" in one.output_source


def test_pads_stack_and_count(toy_registry, sandbox_cfg):
    # pad_alpha numbers its markers by counting prior ones
    once = apply(toy_registry["pad_alpha"], SRC, sandbox_cfg).output_source
    twice = apply(toy_registry["pad_alpha"], once, sandbox_cfg).output_source
    assert once.endswith("# alpha1\n")
    assert twice.endswith("# alpha1\n# alpha2\n")


# --- context caching -----------------------------------------------------------

def test_eval_context_caches_applies(toy_registry, sandbox_cfg):
    local = EvalContext(sandbox_cfg, seed=3)
    t = toy_registry["pad_alpha"]
    a = local.apply(t, SRC)
    b = local.apply(t, SRC)
    assert local.apply_calls == 1
    assert a is b
    local.apply(t, SRC + "# more\n")
    assert local.apply_calls == 2


def test_eval_context_caches_equivalence(toy_registry, sandbox_cfg):
    local = EvalContext(sandbox_cfg, seed=3)
    tests = make_tests([(b"3\n", b"6\n")])
    assert local.equivalent(SRC, tests, "prob-tp1")
    assert local.equivalent(SRC, tests, "prob-tp1")
    assert local.equiv_calls == 1


# --- evaluation and reward ------------------------------------------------------

def test_evaluate_transformer_counts(search_programs, toy_registry, ctx, scorer):
    ev = evaluate_transformer(toy_registry["pad_alpha"], search_programs, ctx, scorer)
    assert ev.n == 4
    assert ev.correct_and_applicable == 4
    for entry in ev.per_program:
        assert entry.applied and entry.equivalent
        assert entry.distance > 0.0


def test_evaluate_breaker_applies_but_never_equivalent(search_programs, toy_registry, ctx, scorer):
    ev = evaluate_transformer(toy_registry["breaker"], search_programs, ctx, scorer)
    assert ev.correct_and_applicable == 0
    assert ev.mean_reward == 0.0
    assert all(e.applied and not e.equivalent for e in ev.per_program)


def test_evaluate_identity_never_applies(search_programs, toy_registry, ctx, scorer):
    ev = evaluate_transformer(toy_registry["identity"], search_programs, ctx, scorer)
    assert ev.correct_and_applicable == 0
    assert ev.mean_reward == 0.0


def test_evaluate_rejects_empty(toy_registry, ctx):
    with pytest.raises(DomainError):
        evaluate_transformer(toy_registry["identity"], [], ctx)


def test_reward_matches_hand_computation(search_programs, toy_registry, ctx, scorer, sandbox_cfg):
    t = toy_registry["pad_alpha"]
    got = reward(t, search_programs, scorer, ctx)
    total = 0.0
    for prog, tests in search_programs:
        out = ctx.apply(t, prog.source_text).output_source
        assert judge(out, [(tt.stdin_text, tt.expected_stdout) for tt in tests])
        total += 1.0 - jaccard_m(prog.source_text, out)
    assert got == pytest.approx(total / len(search_programs), abs=1e-12)


def test_best_of_n_argmax_and_tie_break(search_programs, toy_registry, ctx, scorer):
    # pad_alpha and pad_beta add one fresh token each: identical rewards.
    # The tie must go to the earlier index; identity trails at zero.
    candidates = [toy_registry["pad_beta"], toy_registry["pad_alpha"], toy_registry["identity"]]
    winner, table = best_of_n(candidates, search_programs, scorer, ctx)
    assert table[0].mean_reward == pytest.approx(table[1].mean_reward)
    assert table[0].mean_reward > 0.0
    assert winner.transformer_id == "pad_beta"
    assert table[2].mean_reward == 0.0
    with pytest.raises(DomainError):
        best_of_n([], search_programs, scorer, ctx)


def test_per_program_applicability(search_programs, toy_registry, ctx):
    tset = toyset(toy_registry, "pad_alpha", "mangle_u", "breaker", "identity")
    rows = per_program_applicability(tset, search_programs, ctx)
    by_id = {r["program_id"]: r for r in rows}
    # every program takes pad_alpha and mangle_u (all use u_ names); breaker
    # and identity never count
    for pid in ("tp1", "tp2", "tp3", "tp4"):
        assert by_id[pid]["applicable_count"] == 2


# --- augmentation ----------------------------------------------------------------

def _toy_dataset(n_pairs: int) -> tuple[PairDataset, list[Problem]]:
    problems = []
    ids = []
    for pid, src, tests in TOY_PROGRAMS:
        prog = make_program(pid, src)
        problems.append(
            Problem(problem_id=prog.problem_id, tests=make_tests(tests), solutions=[prog])
        )
        ids.append(prog.program_id)
    pairs = [
        CodePair(a=ids[i % len(ids)], b=ids[(i + 1) % len(ids)], label=CLONE)
        for i in range(n_pairs)
    ]
    return PairDataset(split="train", pairs=pairs, seed=0), problems


def test_augment_p_zero_is_identity(toy_registry, ctx):
    ds, problems = _toy_dataset(12)
    tset = toyset(toy_registry, "pad_alpha", "mangle_u")
    res = augment_dataset(ds, tset, 0.0, seed=4, problems=problems, ctx=ctx)
    assert res.replaced == 0
    assert res.attempts == 0
    assert res.dataset.pairs == ds.pairs
    assert res.dataset.provenance["augmented"]["p"] == 0.0


def test_augment_deterministic_and_labeled(toy_registry, ctx):
    ds, problems = _toy_dataset(20)
    tset = toyset(toy_registry, "pad_alpha", "mangle_u")
    one = augment_dataset(ds, tset, 0.5, seed=4, problems=problems, ctx=ctx)
    two = augment_dataset(ds, tset, 0.5, seed=4, problems=problems, ctx=ctx)
    assert one.dataset.pairs == two.dataset.pairs
    assert one.replaced == two.replaced > 0
    assert [p.label for p in one.dataset.pairs] == [p.label for p in ds.pairs]
    other = augment_dataset(ds, tset, 0.5, seed=5, problems=problems, ctx=ctx)
    assert one.dataset.pairs != other.dataset.pairs


def test_augment_replaces_exactly_one_side_with_equivalent_code(toy_registry, ctx, sandbox_cfg):
    ds, problems = _toy_dataset(20)
    tests_by_problem = {p.problem_id: p.tests for p in problems}
    sources = {s.program_id: s for p in problems for s in p.solutions}
    tset = toyset(toy_registry, "pad_alpha", "mangle_u")
    res = augment_dataset(ds, tset, 0.7, seed=11, problems=problems, ctx=ctx)
    new_by_id = {p.program_id: p for p in res.new_programs}
    changed = 0
    for before, after in zip(ds.pairs, res.dataset.pairs):
        if before == after:
            continue
        changed += 1
        # exactly one side differs and it points at a recorded new program
        assert (after.a == before.a) != (after.b == before.b)
        fresh_id = after.a if after.a != before.a else after.b
        assert "~aug" in fresh_id
        fresh = new_by_id[fresh_id]
        origin = sources[fresh_id.split("~aug")[0]]
        assert fresh.source_text != origin.source_text
        assert judge(
            fresh.source_text,
            [(t.stdin_text, t.expected_stdout) for t in tests_by_problem[fresh.problem_id]],
        )
    assert changed == res.replaced
    assert sum(res.per_transformer.values()) == res.replaced


def test_augment_rejects_bad_probability(toy_registry, ctx):
    ds, problems = _toy_dataset(2)
    tset = toyset(toy_registry, "pad_alpha")
    with pytest.raises(DomainError):
        augment_dataset(ds, tset, 1.5, seed=0, problems=problems, ctx=ctx)


def test_augment_skips_inapplicable_draws(toy_registry, ctx):
    # identity never transforms, so attempts happen but nothing is replaced
    ds, problems = _toy_dataset(10)
    tset = toyset(toy_registry, "identity")
    res = augment_dataset(ds, tset, 1.0, seed=2, problems=problems, ctx=ctx)
    assert res.attempts == 10
    assert res.replaced == 0
    assert res.dataset.pairs == ds.pairs
