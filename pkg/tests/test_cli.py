from __future__ import annotations

import json
from pathlib import Path

import pytest

from conftest import FIXTURES
from sptbench.cli import main
from sptbench.corpus import load_corpus, load_pairs


@pytest.fixture()
def toys_dir(toy_registry) -> Path:
    any_toy = next(iter(toy_registry.values()))
    return Path(any_toy.root_dir).parent


@pytest.fixture()
def cli_env(tmp_path, toys_dir):
    """Config file wired to the toy registry and a scratch reports dir."""
    config = {
        "seed": 7,
        "paths": {
            "registry_dir": str(toys_dir),
            "reports_dir": str(tmp_path / "reports"),
        },
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return {"config": path, "tmp": tmp_path, "reports": tmp_path / "reports"}


def _only_run_dir(reports: Path, command: str) -> Path:
    runs = sorted((reports / command).iterdir())
    assert len(runs) >= 1
    return runs[-1]


CORPUS = str(FIXTURES / "corpus6.jsonl")


# --- exit codes ----------------------------------------------------------------

def test_missing_corpus_is_usage_error(cli_env):
    code = main(
        ["spt", "eval", "--config", str(cli_env["config"]), "--corpus", "/nope.jsonl"]
    )
    assert code == 2


def test_unknown_config_key_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"seeed": 1}))
    code = main(["corpus", "filter", "--config", str(bad), "--input", CORPUS, "--output", str(tmp_path / "o")])
    assert code == 2


def test_unknown_transformer_is_usage_error(cli_env):
    code = main(
        [
            "spt", "eval", "--config", str(cli_env["config"]),
            "--corpus", CORPUS, "--transformers", "does_not_exist",
        ]
    )
    assert code == 2


def test_bad_splits_value_is_usage_error(cli_env, tmp_path):
    code = main(
        [
            "corpus", "build", "--config", str(cli_env["config"]),
            "--input", CORPUS, "--out-dir", str(tmp_path / "x"),
            "--splits", "a,b,c",
        ]
    )
    assert code == 2


def test_overdrawn_split_is_usage_error(cli_env, tmp_path):
    code = main(
        [
            "corpus", "build", "--config", str(cli_env["config"]),
            "--input", CORPUS, "--out-dir", str(tmp_path / "x"),
            "--splits", "50,1,1", "--skip-filter",
        ]
    )
    assert code == 2


def test_missing_cassette_is_runtime_failure(tmp_path, cli_env):
    config = {
        "seed": 7,
        "chat": {"mode": "replay", "cassette_path": str(tmp_path / "absent.jsonl")},
        "paths": {
            "registry_dir": str(tmp_path / "reg"),
            "reports_dir": str(tmp_path / "reports"),
        },
    }
    path = tmp_path / "chat.json"
    path.write_text(json.dumps(config))
    code = main(
        ["spt", "forge", "--config", str(path), "--corpus", CORPUS, "--count", "1", "--n", "1"]
    )
    assert code == 3


def test_unreachable_detector_is_runtime_failure(cli_env, tmp_path):
    config = json.loads(cli_env["config"].read_text())
    config["detector"] = {"kind": "embedding_service", "endpoint": "http://127.0.0.1:9"}
    path = tmp_path / "det.json"
    path.write_text(json.dumps(config))
    code = main(
        [
            "search", "run", "--config", str(path), "--corpus", CORPUS,
            "--transformers", "pad_alpha", "--iters", "1", "--program-ids", "dbl_a",
        ]
    )
    assert code == 3


# --- corpus commands --------------------------------------------------------------

def test_corpus_filter_writes_report(cli_env, tmp_path, capsys):
    out = tmp_path / "filtered.jsonl"
    code = main(
        ["corpus", "filter", "--config", str(cli_env["config"]), "--input", CORPUS, "--output", str(out)]
    )
    assert code == 0
    kept = load_corpus(out)
    assert sum(len(p.solutions) for p in kept) == 18
    payload = json.loads(out.with_suffix(".filter.json").read_text())
    assert payload["dropped_solutions"] == 6
    assert payload["kept_problems"] == 6
    assert "dropped_solutions" in capsys.readouterr().out


def test_corpus_build_end_to_end(cli_env, tmp_path):
    out_dir = tmp_path / "built"
    code = main(
        [
            "corpus", "build", "--config", str(cli_env["config"]),
            "--input", CORPUS, "--out-dir", str(out_dir),
            "--splits", "4,2,0", "--pairs-per-problem", "3",
        ]
    )
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["seed"] == 7
    names = {"train": 4, "validation": 2, "test": 0}
    all_ids: list[str] = []
    for split, expect_n in names.items():
        entry = manifest["splits"][split]
        assert entry["n_problems"] == expect_n
        all_ids.extend(entry["problem_ids"])
        problems = load_corpus(out_dir / f"problems_{split}.jsonl")
        assert len(problems) == expect_n
        # the filter ran: failing solutions are gone
        assert all(not s.program_id.endswith("_bad") for p in problems for s in p.solutions)
        if split == "test":
            assert not (out_dir / "pairs_test.jsonl").exists()
            continue
        pairs = load_pairs(out_dir / f"pairs_{split}.jsonl")
        clones = [p for p in pairs.pairs if p.label == "clone"]
        nonclones = [p for p in pairs.pairs if p.label == "nonclone"]
        # 3 passing solutions per problem cap clone pairs at C(3,2) = 3
        assert len(clones) == len(nonclones) == 3 * expect_n
    assert sorted(all_ids) == ["add2", "dbl", "mx3", "par", "rev", "vow"]


def test_corpus_build_single_problem_split_fails_cleanly(cli_env, tmp_path):
    # the test split holds one problem: non-clone pairs are impossible
    out_dir = tmp_path / "built"
    code = main(
        [
            "corpus", "build", "--config", str(cli_env["config"]),
            "--input", CORPUS, "--out-dir", str(out_dir),
            "--splits", "3,2,1", "--pairs-per-problem", "3", "--skip-filter",
        ]
    )
    assert code == 2


def test_corpus_build_deterministic(cli_env, tmp_path):
    args = [
        "corpus", "build", "--config", str(cli_env["config"]),
        "--input", CORPUS, "--splits", "4,2,0", "--pairs-per-problem", "2",
        "--skip-filter",
    ]
    assert main(args + ["--out-dir", str(tmp_path / "one")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "two")]) == 0
    for name in ("problems_train.jsonl", "pairs_train.jsonl", "problems_validation.jsonl",
                 "pairs_validation.jsonl", "manifest.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_corpus_build_seed_flag_overrides_config(cli_env, tmp_path):
    args = [
        "corpus", "build", "--config", str(cli_env["config"]),
        "--input", CORPUS, "--splits", "4,2,0", "--pairs-per-problem", "2",
        "--skip-filter",
    ]
    assert main(args + ["--out-dir", str(tmp_path / "s1"), "--seed", "101"]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "s2"), "--seed", "101"]) == 0
    m1 = json.loads((tmp_path / "s1" / "manifest.json").read_text())
    m2 = json.loads((tmp_path / "s2" / "manifest.json").read_text())
    assert m1 == m2
    assert m1["seed"] == 101


# --- spt eval -----------------------------------------------------------------------

def test_spt_eval_table_and_json_twin(cli_env, capsys):
    code = main(
        [
            "spt", "eval", "--config", str(cli_env["config"]),
            "--corpus", CORPUS, "--transformers", "pad_alpha,breaker,identity",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    run_dir = _only_run_dir(cli_env["reports"], "spt-eval")
    payload = json.loads((run_dir / "evaluation.json").read_text())
    by_id = {row["transformer"]: row for row in payload["table"]}
    # 24 programs; the 6 intentionally failing solutions can never count
    assert by_id["pad_alpha"]["n"] == 24
    assert by_id["pad_alpha"]["correct_and_applicable"] == 18
    assert by_id["breaker"]["correct_and_applicable"] == 0
    assert by_id["identity"]["correct_and_applicable"] == 0
    for row in payload["table"]:
        assert str(row["correct_and_applicable"]) in out
    per_t = {e["transformer_id"]: e for e in payload["per_transformer"]}
    assert len(per_t["pad_alpha"]["per_program"]) == 24
    counts = {r["program_id"]: r["applicable_count"] for r in payload["per_program_applicability"]}
    assert counts["dbl_a"] == 1  # pad_alpha only; breaker and identity never count
    assert counts["dbl_bad"] == 0


# --- search commands ------------------------------------------------------------------

def test_search_run_writes_reports(cli_env, capsys):
    code = main(
        [
            "search", "run", "--config", str(cli_env["config"]),
            "--corpus", CORPUS, "--transformers", "pad_alpha,mangle_u",
            "--program-ids", "dbl_a,rev_a", "--iters", "2", "--beam", "3",
        ]
    )
    assert code == 0
    run_dir = _only_run_dir(cli_env["reports"], "search-run")
    summary = json.loads((run_dir / "summary.json").read_text())
    assert {r["program"] for r in summary["rows"]} == {"dbl_a", "rev_a"}
    for row in summary["rows"]:
        report = json.loads((run_dir / f"{row['program']}.search.json").read_text())
        assert report["best"]["distance"] == row["best_distance"]
        assert report["best"]["distance"] > 0.0
    mean = sum(r["best_distance"] for r in summary["rows"]) / 2
    assert summary["mean_best_distance"] == pytest.approx(mean)
    assert "best distance:" in capsys.readouterr().out


def test_search_brute_and_reports(cli_env):
    code = main(
        [
            "search", "brute", "--config", str(cli_env["config"]),
            "--corpus", CORPUS, "--transformers", "pad_alpha,mangle_u",
            "--program-ids", "dbl_a", "--k-max", "2",
        ]
    )
    assert code == 0
    run_dir = _only_run_dir(cli_env["reports"], "search-brute")
    payload = json.loads((run_dir / "dbl_a.brute.json").read_text())
    assert payload["distance"] > 0.0
    assert 1 <= len(payload["sequence"]) <= 2


def test_search_diversity_sizes(cli_env):
    # size 2 would be degenerate (singleton leave-one-out sets), so start at 3
    code = main(
        [
            "search", "diversity", "--config", str(cli_env["config"]),
            "--corpus", CORPUS, "--transformers", "pad_alpha,pad_beta,pad_gamma,mangle_u",
            "--program-ids", "dbl_a", "--k", "2", "--sizes", "3,4",
        ]
    )
    assert code == 0
    run_dir = _only_run_dir(cli_env["reports"], "search-diversity")
    for size in (3, 4):
        payload = json.loads((run_dir / f"diversity_{size}.json").read_text())
        assert payload["mean_diversity"] >= 1.0 - 1e-12
        assert payload["per_program"][0]["program_id"] == "dbl_a"


def test_search_diversity_size_too_big(cli_env):
    code = main(
        [
            "search", "diversity", "--config", str(cli_env["config"]),
            "--corpus", CORPUS, "--transformers", "pad_alpha,pad_beta",
            "--program-ids", "dbl_a", "--k", "1", "--sizes", "5",
        ]
    )
    assert code == 2


def test_search_bound_defined_and_undefined(cli_env):
    code = main(
        [
            "search", "bound", "--config", str(cli_env["config"]),
            "--corpus", CORPUS, "--transformers", "pad_alpha,pad_beta,mangle_u",
            "--program-ids", "dbl_a", "--k", "3",
        ]
    )
    assert code == 0
    run_dir = _only_run_dir(cli_env["reports"], "search-bound")
    payload = json.loads((run_dir / "dbl_a.bound.json").read_text())
    assert payload["bound_value"] is not None
    assert payload["holds"] in (True, False)

    code = main(
        [
            "search", "bound", "--config", str(cli_env["config"]),
            "--corpus", CORPUS, "--transformers", "pad_alpha,pad_beta",
            "--program-ids", "dbl_a", "--k", "1",
        ]
    )
    assert code == 0
    run_dir = _only_run_dir(cli_env["reports"], "search-bound")
    payload = json.loads((run_dir / "dbl_a.bound.json").read_text())
    assert payload["bound_value"] is None
    assert payload["holds"] is None


# --- augment -----------------------------------------------------------------------

@pytest.fixture()
def built_pairs(cli_env, tmp_path) -> Path:
    out_dir = tmp_path / "forpairs"
    code = main(
        [
            "corpus", "build", "--config", str(cli_env["config"]),
            "--input", CORPUS, "--out-dir", str(out_dir),
            "--splits", "6,0,0", "--pairs-per-problem", "3",
        ]
    )
    assert code == 0
    return out_dir


def test_augment_prob_zero_changes_nothing(cli_env, built_pairs, tmp_path):
    out = tmp_path / "aug0.jsonl"
    code = main(
        [
            "augment", "--config", str(cli_env["config"]),
            "--corpus", str(built_pairs / "problems_train.jsonl"),
            "--pairs", str(built_pairs / "pairs_train.jsonl"),
            "--prob", "0.0", "--out", str(out),
            "--transformers", "pad_alpha,mangle_u",
        ]
    )
    assert code == 0
    before = load_pairs(built_pairs / "pairs_train.jsonl")
    after = load_pairs(out)
    assert after.pairs == before.pairs
    assert out.with_suffix(".programs.jsonl").read_text() == ""


def test_augment_full_probability_replaces_every_pair(cli_env, built_pairs, tmp_path, capsys):
    out = tmp_path / "aug1.jsonl"
    code = main(
        [
            "augment", "--config", str(cli_env["config"]),
            "--corpus", str(built_pairs / "problems_train.jsonl"),
            "--pairs", str(built_pairs / "pairs_train.jsonl"),
            "--prob", "1.0", "--out", str(out),
            "--transformers", "pad_alpha",
        ]
    )
    assert code == 0
    before = load_pairs(built_pairs / "pairs_train.jsonl")
    after = load_pairs(out)
    assert len(after.pairs) == len(before.pairs)
    changed = sum(1 for b, a in zip(before.pairs, after.pairs) if b != a)
    assert changed == len(before.pairs)  # every victim takes the padder
    records = [
        json.loads(l) for l in out.with_suffix(".programs.jsonl").read_text().splitlines()
    ]
    assert len(records) == changed
    assert all("~aug" in r["program_id"] for r in records)
    assert "replaced:" in capsys.readouterr().out


def test_augment_deterministic_output(cli_env, built_pairs, tmp_path):
    args = [
        "augment", "--config", str(cli_env["config"]),
        "--corpus", str(built_pairs / "problems_train.jsonl"),
        "--pairs", str(built_pairs / "pairs_train.jsonl"),
        "--prob", "0.5",
        "--transformers", "pad_alpha,mangle_u",
    ]
    one, two = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(args + ["--out", str(one)]) == 0
    assert main(args + ["--out", str(two)]) == 0
    assert one.read_bytes() == two.read_bytes()
    assert one.with_suffix(".programs.jsonl").read_bytes() == two.with_suffix(
        ".programs.jsonl"
    ).read_bytes()


def test_augment_bad_probability(cli_env, built_pairs, tmp_path):
    code = main(
        [
            "augment", "--config", str(cli_env["config"]),
            "--corpus", str(built_pairs / "problems_train.jsonl"),
            "--pairs", str(built_pairs / "pairs_train.jsonl"),
            "--prob", "1.5", "--out", str(tmp_path / "x.jsonl"),
            "--transformers", "pad_alpha",
        ]
    )
    assert code == 2


# --- forge replay ----------------------------------------------------------------------

def _forge_config(tmp_path: Path, registry: Path) -> Path:
    config = {
        "seed": 7,
        "chat": {
            "mode": "replay",
            "model_id": "stub-chat-1",
            "cassette_path": str(FIXTURES / "cassettes" / "forge.jsonl"),
        },
        "paths": {"registry_dir": str(registry), "reports_dir": str(tmp_path / "reports")},
    }
    path = tmp_path / f"forge-{registry.name}.json"
    path.write_text(json.dumps(config))
    return path


def test_forge_replay_is_deterministic(tmp_path):
    reg_one, reg_two = tmp_path / "r1", tmp_path / "r2"
    for reg in (reg_one, reg_two):
        code = main(
            [
                "spt", "forge", "--config", str(_forge_config(tmp_path, reg)),
                "--corpus", CORPUS, "--count", "2", "--n", "3",
                "--validation-sample", "4",
            ]
        )
        assert code == 0
    ids = sorted(p.name for p in reg_one.iterdir() if p.is_dir())
    assert ids == ["checked_marker-247b5bc0", "comment_tagging-239670d1"]
    assert ids == sorted(p.name for p in reg_two.iterdir() if p.is_dir())
    for tid in ids:
        for name in ("manifest.json", "transform.py", "candidates.json"):
            assert (reg_one / tid / name).read_bytes() == (reg_two / tid / name).read_bytes()
