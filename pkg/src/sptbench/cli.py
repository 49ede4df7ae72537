"""Command-line front end over the corpus / transform / search / forge stack.

Every subcommand reads one JSON config file (flags win over config values),
prints a plain-text table, and writes a JSON twin of the same numbers under
the reports directory. Exit codes: 0 success, 2 usage or configuration
problem, 3 runtime or environment failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import statistics
import sys
import time
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from . import forge as forge_mod
from . import search as search_mod
from . import transform as transform_mod
from .config import GlobalConfig, load_config
from .detector import Scorer
from .errors import RuntimeFailure, UsageError
from .seeds import derive_seed
from .transform import EvalContext, TransformerSet


def _load_cfg(args: argparse.Namespace) -> GlobalConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = GlobalConfig(
            seed=args.seed,
            sandbox=cfg.sandbox,
            detector=cfg.detector,
            chat=cfg.chat,
            search=cfg.search,
            paths=cfg.paths,
            apply_limits=cfg.apply_limits,
        )
    return cfg


def _ctx(cfg: GlobalConfig) -> EvalContext:
    return EvalContext(
        sandbox_cfg=cfg.sandbox,
        apply_limits=cfg.apply_limits,
        seed=derive_seed(cfg.seed, "apply"),
    )


def _run_dir(cfg: GlobalConfig, command: str) -> Path:
    digest = hashlib.sha256(repr(cfg).encode("utf-8")).hexdigest()[:8]
    run_id = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime()) + "-" + digest
    out = Path(cfg.paths.reports_dir) / command / run_id
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} {path} does not exist")
    return p


def _load_problems(path: str) -> list[corpus_mod.Problem]:
    return corpus_mod.load_corpus(_require_file(path, "corpus file"))


def _programs_with_tests(
    problems: Sequence[corpus_mod.Problem],
) -> list[tuple[corpus_mod.Program, list[corpus_mod.UnitTest]]]:
    out = []
    for prob in sorted(problems, key=lambda p: p.problem_id):
        for sol in sorted(prob.solutions, key=lambda s: s.program_id):
            out.append((sol, prob.tests))
    return out


def _sample(items: list, n: int | None, seed: int, purpose: str) -> list:
    if n is None or n >= len(items):
        return list(items)
    import random

    rng = random.Random(derive_seed(seed, purpose))
    return rng.sample(items, n)


def _registry_set(cfg: GlobalConfig, ids_csv: str | None, registry_dir: str | None) -> TransformerSet:
    reg_dir = registry_dir or cfg.paths.registry_dir
    registry = transform_mod.load_registry(reg_dir)
    if ids_csv:
        wanted = [s for s in ids_csv.split(",") if s]
        missing = [w for w in wanted if w not in registry]
        if missing:
            raise UsageError(f"transformer(s) not in registry: {', '.join(missing)}")
        members = tuple(registry[w] for w in wanted)
    else:
        members = tuple(registry[k] for k in sorted(registry))
    if not members:
        raise UsageError(f"no transformers found in registry {reg_dir}")
    return TransformerSet(set_id="registry", members=members)


def _print_table(rows: list[dict], columns: list[str]) -> None:
    if not rows:
        print("(no rows)")
        return
    widths = {c: max(len(c), *(len(_fmt(r.get(c))) for r in rows)) for c in columns}
    header = "  ".join(c.ljust(widths[c]) for c in columns)
    print(header)
    print("-" * len(header))
    for r in rows:
        print("  ".join(_fmt(r.get(c)).ljust(widths[c]) for c in columns))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --- corpus ---------------------------------------------------------------

def cmd_corpus_build(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    problems = _load_problems(args.input)
    if not args.skip_filter:
        problems, freport = corpus_mod.filter_passing_solutions(problems, cfg.sandbox)
        print(
            f"filter: kept {freport.kept_problems} problems / {freport.kept_solutions} solutions, "
            f"dropped {freport.dropped_problems} problems / {freport.dropped_solutions} solutions"
        )
    try:
        counts = tuple(int(x) for x in args.splits.split(","))
    except ValueError as exc:
        raise UsageError(f"bad --splits value {args.splits!r}") from exc
    if len(counts) != 3:
        raise UsageError("--splits needs three comma-separated counts")
    train, val, test = corpus_mod.split_problems(problems, counts, cfg.seed)  # type: ignore[arg-type]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"seed": cfg.seed, "pairs_per_problem": args.pairs_per_problem, "splits": {}}
    for split_name, split_problems in (("train", train), ("validation", val), ("test", test)):
        corpus_mod.save_corpus(split_problems, out_dir / f"problems_{split_name}.jsonl")
        entry = {
            "n_problems": len(split_problems),
            "problem_ids": [p.problem_id for p in split_problems],
        }
        if split_problems:
            dataset = corpus_mod.build_pairs(
                split_problems, args.pairs_per_problem, cfg.seed, split=split_name
            )
            corpus_mod.save_pairs(dataset, out_dir / f"pairs_{split_name}.jsonl")
            entry["n_clone"] = dataset.provenance["n_clone"]
            entry["n_nonclone"] = dataset.provenance["n_nonclone"]
        manifest["splits"][split_name] = entry
    _write_json(out_dir / "manifest.json", manifest)
    rows = [
        {"split": name, **{k: v for k, v in manifest["splits"][name].items() if k != "problem_ids"}}
        for name in ("train", "validation", "test")
    ]
    _print_table(rows, ["split", "n_problems", "n_clone", "n_nonclone"])
    return 0


def cmd_corpus_filter(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    problems = _load_problems(args.input)
    kept, report = corpus_mod.filter_passing_solutions(problems, cfg.sandbox)
    corpus_mod.save_corpus(kept, args.output)
    payload = {
        "kept_problems": report.kept_problems,
        "dropped_problems": report.dropped_problems,
        "kept_solutions": report.kept_solutions,
        "dropped_solutions": report.dropped_solutions,
    }
    _print_table([payload], list(payload))
    _write_json(Path(args.output).with_suffix(".filter.json"), payload)
    return 0


# --- spt ------------------------------------------------------------------

def cmd_spt_eval(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    tset = _registry_set(cfg, args.transformers, args.registry)
    problems = _load_problems(args.corpus)
    pwt = _sample(_programs_with_tests(problems), args.sample, cfg.seed, "spt-eval-sample")
    if not pwt:
        raise UsageError("corpus has no programs to evaluate")
    ctx = _ctx(cfg)
    rows = []
    evaluations = []
    for t in tset.members:
        ev = transform_mod.evaluate_transformer(t, pwt, ctx)
        evaluations.append(ev)
        rows.append(
            {
                "transformer": t.transformer_id,
                "n": ev.n,
                "correct_and_applicable": ev.correct_and_applicable,
            }
        )
    applicability = transform_mod.per_program_applicability(tset, pwt, ctx)
    _print_table(rows, ["transformer", "n", "correct_and_applicable"])
    run_dir = _run_dir(cfg, "spt-eval")
    _write_json(
        run_dir / "evaluation.json",
        {
            "table": rows,
            "per_program_applicability": applicability,
            "per_transformer": [
                {
                    "transformer_id": ev.transformer_id,
                    "n": ev.n,
                    "correct_and_applicable": ev.correct_and_applicable,
                    "mean_reward": ev.mean_reward,
                    "per_program": [
                        {
                            "program_id": e.program_id,
                            "applied": e.applied,
                            "equivalent": e.equivalent,
                            "distance": e.distance,
                        }
                        for e in ev.per_program
                    ],
                }
                for ev in evaluations
            ],
        },
    )
    print(f"report: {run_dir / 'evaluation.json'}")
    return 0


def _chat_client(cfg: GlobalConfig, temperature: float) -> forge_mod.ChatClient:
    return forge_mod.ChatClient(
        forge_mod.ChatClientConfig(
            mode=cfg.chat.mode,
            model_id=cfg.chat.model_id,
            temperature=temperature,
            max_output_tokens=cfg.chat.max_output_tokens,
            endpoint=cfg.chat.endpoint,
            cassette_path=cfg.chat.cassette_path,
            api_key_env=cfg.chat.api_key_env,
        )
    )


def _example_programs(
    problems: Sequence[corpus_mod.Problem], seed: int, exclude_problems: set[str] = frozenset()
) -> list[corpus_mod.Program]:
    pool = [
        sol
        for prob in sorted(problems, key=lambda p: p.problem_id)
        if prob.problem_id not in exclude_problems
        for sol in sorted(prob.solutions, key=lambda s: s.program_id)
    ]
    if len(pool) < 5:
        raise UsageError("need at least 5 example programs outside the validation problems")
    return _sample(pool, 5, seed, "forge-examples")


def _load_designs(path: str) -> list[forge_mod.SptDesign]:
    raw = json.loads(_require_file(path, "design file").read_text(encoding="utf-8"))
    return [
        forge_mod.SptDesign(
            design_id=d["design_id"],
            name=d["name"],
            description=d["description"],
            example_program_ids=d.get("example_program_ids", []),
            prior_designs=d.get("prior_designs", []),
        )
        for d in raw
    ]


def _dump_designs(designs: Sequence[forge_mod.SptDesign]) -> list[dict]:
    return [
        {
            "design_id": d.design_id,
            "name": d.name,
            "description": d.description,
            "example_program_ids": d.example_program_ids,
            "prior_designs": d.prior_designs,
        }
        for d in designs
    ]


def cmd_spt_design(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    problems = _load_problems(args.corpus)
    examples = _example_programs(problems, cfg.seed)
    existing = _load_designs(args.existing) if args.existing else []
    client = _chat_client(cfg, cfg.chat.design_temperature)
    designs = forge_mod.design_spts(client, examples, existing, args.count)
    _write_json(Path(args.out), _dump_designs(designs))
    _print_table(
        [{"design_id": d.design_id, "name": d.name} for d in designs],
        ["design_id", "name"],
    )
    return 0


def cmd_spt_implement(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    designs = _load_designs(args.design_file)
    if args.design_id:
        designs = [d for d in designs if d.design_id == args.design_id]
        if not designs:
            raise UsageError(f"design {args.design_id!r} not found in {args.design_file}")
    design = designs[0]
    client = _chat_client(cfg, cfg.chat.implement_temperature)
    candidates = forge_mod.implement_spt(client, design, args.n)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for cand in candidates:
        (out_dir / f"{design.design_id}-c{cand.candidate_index}.py").write_text(
            cand.source, encoding="utf-8"
        )
    print(f"wrote {len(candidates)} candidates to {out_dir}")
    return 0


def cmd_spt_forge(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    problems = _load_problems(args.corpus)
    pwt = _programs_with_tests(problems)
    validation = _sample(pwt, args.validation_sample, cfg.seed, "forge-validation")
    if not validation:
        raise UsageError("corpus has no validation programs")
    val_problems = {prog.problem_id for prog, _ in validation}
    examples = _example_programs(problems, cfg.seed, exclude_problems=val_problems)
    existing = _load_designs(args.existing) if args.existing else []
    design_client = _chat_client(cfg, cfg.chat.design_temperature)
    implement_client = _chat_client(cfg, cfg.chat.implement_temperature)
    designs = forge_mod.design_spts(design_client, examples, existing, args.count)
    scorer = Scorer(cfg.detector)
    ctx = _ctx(cfg)
    rows = []
    for design in designs:
        registered = forge_mod.forge_transformer(
            implement_client,
            design,
            args.n,
            validation,
            scorer,
            ctx,
            cfg.paths.registry_dir,
        )
        rows.append(
            {
                "transformer": registered.transformer_id,
                "design": design.name,
                "candidates": args.n,
            }
        )
    _print_table(rows, ["transformer", "design", "candidates"])
    run_dir = _run_dir(cfg, "spt-forge")
    _write_json(run_dir / "forged.json", {"designs": _dump_designs(designs), "registered": rows})
    return 0


# --- search ---------------------------------------------------------------

def _search_config(cfg: GlobalConfig, args: argparse.Namespace) -> search_mod.SearchConfig:
    return search_mod.SearchConfig(
        beam_size=args.beam if args.beam is not None else cfg.search.beam_size,
        iterations=args.iters if args.iters is not None else cfg.search.iterations,
        dedup=cfg.search.dedup and not args.no_dedup,
        seed=cfg.seed,
        track_global_best=cfg.search.track_global_best and not args.final_beam_best,
        brute_force_cap=cfg.search.brute_force_cap,
    )


def _select_programs(
    problems: Sequence[corpus_mod.Problem], args: argparse.Namespace, seed: int
) -> list[tuple[corpus_mod.Program, list[corpus_mod.UnitTest]]]:
    pwt = _programs_with_tests(problems)
    if getattr(args, "program_ids", None):
        wanted = set(args.program_ids.split(","))
        chosen = [(p, t) for p, t in pwt if p.program_id in wanted]
        missing = wanted - {p.program_id for p, _ in chosen}
        if missing:
            raise UsageError(f"program id(s) not in corpus: {', '.join(sorted(missing))}")
        return chosen
    return _sample(pwt, getattr(args, "sample", None), seed, "search-sample")


def cmd_search_run(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    tset = _registry_set(cfg, args.transformers, args.registry)
    problems = _load_problems(args.corpus)
    selected = _select_programs(problems, args, cfg.seed)
    if not selected:
        raise UsageError("no programs selected")
    scfg = _search_config(cfg, args)
    scorer = Scorer(cfg.detector)
    ctx = _ctx(cfg)
    run_dir = _run_dir(cfg, "search-run")
    rows = []
    distances = []
    for prog, tests in selected:
        report = search_mod.compose_search(prog, tests, tset, scorer, scfg, ctx)
        search_mod.save_report(report, run_dir / f"{prog.program_id}.search.json")
        rows.append(
            {
                "program": prog.program_id,
                "best_distance": report.best.distance,
                "sequence_len": len(report.best.sequence),
                "terminated_early": report.terminated_early,
            }
        )
        distances.append(report.best.distance)
    _print_table(rows, ["program", "best_distance", "sequence_len", "terminated_early"])
    mean = statistics.mean(distances)
    std = statistics.stdev(distances) if len(distances) > 1 else 0.0
    print(f"best distance: {mean:.6f} +/- {std:.6f} over {len(distances)} programs")
    _write_json(
        run_dir / "summary.json",
        {"rows": rows, "mean_best_distance": mean, "stddev_best_distance": std},
    )
    print(f"reports: {run_dir}")
    return 0


def cmd_search_brute(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    tset = _registry_set(cfg, args.transformers, args.registry)
    problems = _load_problems(args.corpus)
    selected = _select_programs(problems, args, cfg.seed)
    if not selected:
        raise UsageError("no programs selected")
    scorer = Scorer(cfg.detector)
    ctx = _ctx(cfg)
    run_dir = _run_dir(cfg, "search-brute")
    rows = []
    for prog, tests in selected:
        best = search_mod.brute_force_search(
            prog, tests, tset, scorer, ctx, k_max=args.k_max, cap=cfg.search.brute_force_cap
        )
        _write_json(run_dir / f"{prog.program_id}.brute.json", best.to_dict())
        rows.append(
            {
                "program": prog.program_id,
                "best_distance": best.distance,
                "sequence": "+".join(best.sequence) or "(original)",
            }
        )
    _print_table(rows, ["program", "best_distance", "sequence"])
    print(f"reports: {run_dir}")
    return 0


def cmd_search_diversity(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    tset = _registry_set(cfg, args.transformers, args.registry)
    problems = _load_problems(args.corpus)
    selected = _select_programs(problems, args, cfg.seed)
    if not selected:
        raise UsageError("no programs selected")
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else [len(tset.members)]
    scorer = Scorer(cfg.detector)
    ctx = _ctx(cfg)
    scfg = _search_config(cfg, args)
    run_dir = _run_dir(cfg, "search-diversity")
    rows = []
    for size in sizes:
        if size > len(tset.members):
            raise UsageError(f"size {size} exceeds the {len(tset.members)} available transformers")
        subset = TransformerSet(set_id=f"{tset.set_id}[:{size}]", members=tset.members[:size])
        per_program = []
        for prog, tests in selected:
            report = search_mod.diversity(prog, tests, subset, args.k, scorer, ctx, scfg)
            per_program.append({"program_id": prog.program_id, **report.to_dict()})
        mean_div = statistics.mean(r["diversity"] for r in per_program)
        rows.append({"size": size, "k": args.k, "mean_diversity": mean_div})
        _write_json(
            run_dir / f"diversity_{size}.json",
            {"size": size, "k": args.k, "mean_diversity": mean_div, "per_program": per_program},
        )
    _print_table(rows, ["size", "k", "mean_diversity"])
    print(f"reports: {run_dir}")
    return 0


def cmd_search_bound(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    tset = _registry_set(cfg, args.transformers, args.registry)
    problems = _load_problems(args.corpus)
    selected = _select_programs(problems, args, cfg.seed)
    if not selected:
        raise UsageError("no programs selected")
    scorer = Scorer(cfg.detector)
    ctx = _ctx(cfg)
    scfg = _search_config(cfg, args)
    run_dir = _run_dir(cfg, "search-bound")
    rows = []
    for prog, tests in selected:
        report = search_mod.diversity_bound_report(prog, tests, tset, args.k, scorer, ctx, scfg)
        _write_json(run_dir / f"{prog.program_id}.bound.json", report.to_dict())
        rows.append(
            {
                "program": prog.program_id,
                "bound": report.bound_value if report.bound_value is not None else "undefined",
                "observed": report.observed_strength,
                "holds": report.holds if report.holds is not None else "n/a",
            }
        )
    _print_table(rows, ["program", "bound", "observed", "holds"])
    print(f"reports: {run_dir}")
    return 0


# --- augment ----------------------------------------------------------------

def cmd_augment(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    tset = _registry_set(cfg, args.transformers, args.registry)
    problems = _load_problems(args.corpus)
    dataset = corpus_mod.load_pairs(_require_file(args.pairs, "pair dataset"))
    if not (0.0 <= args.prob <= 1.0):
        raise UsageError("--prob must lie in [0,1]")
    ctx = _ctx(cfg)
    result = transform_mod.augment_dataset(dataset, tset, args.prob, cfg.seed, problems, ctx)
    corpus_mod.save_pairs(result.dataset, args.out)
    programs_path = Path(args.out).with_suffix(".programs.jsonl")
    with open(programs_path, "w", encoding="utf-8") as f:
        for prog in result.new_programs:
            f.write(
                json.dumps(
                    {
                        "program_id": prog.program_id,
                        "problem_id": prog.problem_id,
                        "source": prog.source_text,
                    }
                )
                + "\n"
            )
    rows = [
        {"transformer": tid, "replaced": n}
        for tid, n in sorted(result.per_transformer.items())
    ]
    _print_table(rows, ["transformer", "replaced"])
    print(
        f"pairs: {len(result.dataset.pairs)}, attempts: {result.attempts}, "
        f"replaced: {result.replaced}"
    )
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sptbench",
        description="Workbench for semantics-preserving transformations against clone detectors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="path to the JSON config file")
        p.add_argument("--seed", type=int, default=None, help="root seed (overrides config)")

    def search_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--registry", default=None, help="transformer registry directory")
        p.add_argument("--transformers", default=None, help="comma-separated transformer ids")
        p.add_argument("--beam", type=int, default=None)
        p.add_argument("--iters", type=int, default=None)
        p.add_argument("--no-dedup", action="store_true")
        p.add_argument("--final-beam-best", action="store_true",
                       help="report the final beam's best instead of the global best")

    corpus_p = sub.add_parser("corpus", help="corpus ingestion and pair construction")
    corpus_sub = corpus_p.add_subparsers(dest="subcommand", required=True)
    p = corpus_sub.add_parser("build", help="filter, split, and build pair datasets")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--splits", default="1500,250,250")
    p.add_argument("--pairs-per-problem", type=int, default=250)
    p.add_argument("--skip-filter", action="store_true")
    p.set_defaults(func=cmd_corpus_build)
    p = corpus_sub.add_parser("filter", help="keep only solutions passing their tests")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_corpus_filter)

    spt_p = sub.add_parser("spt", help="transformer evaluation and forging")
    spt_sub = spt_p.add_subparsers(dest="subcommand", required=True)
    p = spt_sub.add_parser("eval", help="correct+applicable counts over a corpus")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--registry", default=None)
    p.add_argument("--transformers", default=None)
    p.add_argument("--sample", type=int, default=None)
    p.set_defaults(func=cmd_spt_eval)
    p = spt_sub.add_parser("design", help="generate transformation designs")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--existing", default=None, help="JSON file of prior designs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spt_design)
    p = spt_sub.add_parser("implement", help="sample implementation candidates for a design")
    common(p)
    p.add_argument("--design-file", required=True)
    p.add_argument("--design-id", default=None)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spt_implement)
    p = spt_sub.add_parser("forge", help="design, implement, select, and register")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--validation-sample", type=int, default=4)
    p.add_argument("--existing", default=None)
    p.set_defaults(func=cmd_spt_forge)

    search_p = sub.add_parser("search", help="composition search and set metrics")
    search_sub = search_p.add_subparsers(dest="subcommand", required=True)
    p = search_sub.add_parser("run", help="beam search per program")
    common(p)
    search_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--program-ids", default=None)
    p.add_argument("--sample", type=int, default=None)
    p.set_defaults(func=cmd_search_run)
    p = search_sub.add_parser("brute", help="exhaustive search on small instances")
    common(p)
    search_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--program-ids", default=None)
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--k-max", type=int, required=True)
    p.set_defaults(func=cmd_search_brute)
    p = search_sub.add_parser("diversity", help="k-step diversity over subset sizes")
    common(p)
    search_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--program-ids", default=None)
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sizes", default=None, help="comma-separated subset sizes")
    p.set_defaults(func=cmd_search_diversity)
    p = search_sub.add_parser("bound", help="greedy diversity-product bound report")
    common(p)
    search_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--program-ids", default=None)
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_search_bound)

    p = sub.add_parser("augment", help="probabilistically transform one side of each pair")
    common(p)
    p.add_argument("--registry", default=None)
    p.add_argument("--transformers", default=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--prob", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
