"""Composition search, k-step diameter, diversity, and the bound report.

compose_search runs the expansion / filtering / selection loop: every
transformer is applied to every beam candidate, outputs must be real changes
that stay syntactically valid and behaviorally equivalent, and the B
candidates most distant from the original (per the detector) survive to the
next iteration. Brute-force twins of the search and of the diameter estimate
serve as oracles on small instances; they refuse anything over the
sequence-count cap rather than silently running forever.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import Program, UnitTest
from .detector import Scorer
from .errors import CapExceededError, DegenerateSetError, DomainError
from .seeds import source_digest
from .transform import APPLY_TRANSFORMED, EvalContext, Transformer, TransformerSet

METHOD_BRUTE = "brute_force"
METHOD_COUPLED = "coupled_beam"


@dataclass(frozen=True)
class SearchConfig:
    beam_size: int = 5
    iterations: int = 10
    dedup: bool = True
    seed: int = 0
    track_global_best: bool = True
    brute_force_cap: int = 10_000

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise DomainError("beam_size must be >= 1")
        if self.iterations < 0:
            raise DomainError("iterations must be >= 0")


@dataclass(frozen=True)
class Candidate:
    source: str
    sequence: tuple[str, ...]  # transformer ids, first applied first
    distance: float
    iteration_found: int
    source_hash: str

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "sequence": list(self.sequence),
            "distance": self.distance,
            "iteration_found": self.iteration_found,
            "source_hash": self.source_hash,
        }


@dataclass
class IterationRecord:
    beam: list[Candidate]
    expanded_count: int
    filtered_count: int
    wall_time_ms: float
    candidate_times_ms: list[float]
    best_so_far_distance: float


@dataclass
class SearchReport:
    original_program_id: str
    config: SearchConfig
    per_iteration: list[IterationRecord]
    best: Candidate
    final_beam_best: Candidate
    terminated_early: bool

    def to_dict(self, with_timing: bool = True) -> dict:
        out = {
            "original_program_id": self.original_program_id,
            "config": {
                "beam_size": self.config.beam_size,
                "iterations": self.config.iterations,
                "dedup": self.config.dedup,
                "seed": self.config.seed,
                "track_global_best": self.config.track_global_best,
                "brute_force_cap": self.config.brute_force_cap,
            },
            "per_iteration": [
                {
                    "beam": [c.to_dict() for c in rec.beam],
                    "expanded_count": rec.expanded_count,
                    "filtered_count": rec.filtered_count,
                    "best_so_far_distance": rec.best_so_far_distance,
                    **(
                        {
                            "wall_time_ms": rec.wall_time_ms,
                            "candidate_times_ms": rec.candidate_times_ms,
                        }
                        if with_timing
                        else {}
                    ),
                }
                for rec in self.per_iteration
            ],
            "best": self.best.to_dict(),
            "final_beam_best": self.final_beam_best.to_dict(),
            "terminated_early": self.terminated_early,
        }
        return out


def _original_candidate(x: Program) -> Candidate:
    return Candidate(
        source=x.source_text,
        sequence=(),
        distance=0.0,
        iteration_found=0,
        source_hash=x.source_hash,
    )


def _sort_key(c: Candidate) -> tuple:
    return (-c.distance, c.source_hash, c.sequence)


def compose_search(
    x: Program,
    tests: Sequence[UnitTest],
    tset: TransformerSet,
    scorer: Scorer,
    config: SearchConfig,
    ctx: EvalContext,
) -> SearchReport:
    """Beam search for the composition most distant from x under the detector.

    The original program is the distance-0 fallback; `best` is the global
    best over all beams when track_global_best is on, otherwise the top of
    the final beam.
    """
    original = _original_candidate(x)
    beam: list[Candidate] = [original]
    seen: set[str] = {x.source_hash}
    per_iteration: list[IterationRecord] = []
    best_global = original
    terminated_early = False

    for iteration in range(1, config.iterations + 1):
        iter_start = time.perf_counter()
        pool: list[Candidate] = []
        candidate_times: list[float] = []
        expanded = 0
        for cand in beam:
            for t in tset.members:
                t0 = time.perf_counter()
                expanded += 1
                accepted: Candidate | None = None
                outcome = ctx.apply(t, cand.source)
                if outcome.status == APPLY_TRANSFORMED:
                    assert outcome.output_source is not None
                    out_src = outcome.output_source
                    if ctx.equivalent(out_src, tests, x.problem_id):
                        h = source_digest(out_src)
                        if not config.dedup or h not in seen:
                            if config.dedup:
                                seen.add(h)
                            accepted = Candidate(
                                source=out_src,
                                sequence=cand.sequence + (t.transformer_id,),
                                distance=scorer.distance(x.source_text, out_src),
                                iteration_found=iteration,
                                source_hash=h,
                            )
                candidate_times.append((time.perf_counter() - t0) * 1000.0)
                if accepted is not None:
                    pool.append(accepted)
        filtered = len(pool)
        if not pool:
            terminated_early = True
            per_iteration.append(
                IterationRecord(
                    beam=[],
                    expanded_count=expanded,
                    filtered_count=0,
                    wall_time_ms=(time.perf_counter() - iter_start) * 1000.0,
                    candidate_times_ms=candidate_times,
                    best_so_far_distance=best_global.distance,
                )
            )
            break
        pool.sort(key=_sort_key)
        beam = pool[: config.beam_size]
        if beam[0].distance > best_global.distance:
            best_global = beam[0]
        per_iteration.append(
            IterationRecord(
                beam=list(beam),
                expanded_count=expanded,
                filtered_count=filtered,
                wall_time_ms=(time.perf_counter() - iter_start) * 1000.0,
                candidate_times_ms=candidate_times,
                best_so_far_distance=best_global.distance,
            )
        )

    final_beam_best = beam[0] if beam and beam[0].sequence else original
    best = best_global if config.track_global_best else final_beam_best
    return SearchReport(
        original_program_id=x.program_id,
        config=config,
        per_iteration=per_iteration,
        best=best,
        final_beam_best=final_beam_best,
        terminated_early=terminated_early,
    )


def brute_force_search(
    x: Program,
    tests: Sequence[UnitTest],
    tset: TransformerSet,
    scorer: Scorer,
    ctx: EvalContext,
    k_max: int,
    cap: int = 10_000,
) -> Candidate:
    """Exhaustive argmax over all transformer sequences of length 1..k_max.

    Branches die as soon as a prefix fails to apply or to stay equivalent.
    Refuses instances where |set|^k_max exceeds the cap.
    """
    size = len(tset.members) ** k_max
    if size > cap:
        raise CapExceededError(
            f"brute force would enumerate ~{size} sequences (cap {cap})"
        )
    best = _original_candidate(x)

    def walk(source: str, sequence: tuple[str, ...]) -> None:
        nonlocal best
        if len(sequence) >= k_max:
            return
        for t in tset.members:
            outcome = ctx.apply(t, source)
            if outcome.status != APPLY_TRANSFORMED:
                continue
            assert outcome.output_source is not None
            out_src = outcome.output_source
            if not ctx.equivalent(out_src, tests, x.problem_id):
                continue
            cand = Candidate(
                source=out_src,
                sequence=sequence + (t.transformer_id,),
                distance=scorer.distance(x.source_text, out_src),
                iteration_found=len(sequence) + 1,
                source_hash=source_digest(out_src),
            )
            if cand.distance > best.distance:
                best = cand
            walk(out_src, cand.sequence)

    walk(x.source_text, ())
    return best


# --- diameter / diversity -------------------------------------------------

@dataclass
class DiameterEstimate:
    diameter: float
    witness: tuple[str, str] | None
    method: str


def _expansions(
    source: str,
    tset: TransformerSet,
    tests: Sequence[UnitTest],
    tests_key: str,
    ctx: EvalContext,
    memo: dict[str, list[str]],
) -> list[str]:
    """Valid one-step outputs of every member on source, deduped by content."""
    h = source_digest(source)
    hit = memo.get(h)
    if hit is not None:
        return hit
    out: list[str] = []
    seen: set[str] = set()
    for t in tset.members:
        outcome = ctx.apply(t, source)
        if outcome.status != APPLY_TRANSFORMED:
            continue
        assert outcome.output_source is not None
        o = outcome.output_source
        if not ctx.equivalent(o, tests, tests_key):
            continue
        oh = source_digest(o)
        if oh not in seen:
            seen.add(oh)
            out.append(o)
    memo[h] = out
    return out


def estimate_diameter(
    x: Program,
    tests: Sequence[UnitTest],
    tset: TransformerSet,
    k: int,
    scorer: Scorer,
    ctx: EvalContext,
    config: SearchConfig,
    method: str | None = None,
) -> DiameterEstimate:
    """Max detector distance between outputs of two exactly-k sequences.

    Brute force enumerates the reachable exactly-k output set (level-by-level
    with content dedup, sound for deterministic transformers) when |set|^k
    fits the cap; otherwise a beam over candidate pairs is used, which never
    overestimates because every surviving pair is a genuine pair of exactly-k
    outputs.
    """
    if k < 1:
        raise DomainError("diameter needs k >= 1")
    if method is None:
        method = (
            METHOD_BRUTE
            if len(tset.members) ** k <= config.brute_force_cap
            else METHOD_COUPLED
        )
    memo: dict[str, list[str]] = {}
    if method == METHOD_BRUTE:
        level: list[str] = [x.source_text]
        for _ in range(k):
            nxt: dict[str, str] = {}
            for src in level:
                for o in _expansions(src, tset, tests, x.problem_id, ctx, memo):
                    nxt.setdefault(source_digest(o), o)
            level = list(nxt.values())
            if not level:
                return DiameterEstimate(0.0, None, method)
        if len(level) < 2:
            return DiameterEstimate(0.0, None, method)
        best = 0.0
        witness: tuple[str, str] | None = None
        for u, v in itertools.combinations(sorted(level, key=source_digest), 2):
            d = scorer.distance(u, v)
            if d > best:
                best = d
                witness = (u, v)
        return DiameterEstimate(best, witness, method)

    # coupled-pair beam
    beam: list[tuple[str, str, float]] = [(x.source_text, x.source_text, 0.0)]
    for _ in range(k):
        pool: dict[tuple[str, str], tuple[str, str]] = {}
        for u, v, _d in beam:
            exp_u = _expansions(u, tset, tests, x.problem_id, ctx, memo)
            exp_v = _expansions(v, tset, tests, x.problem_id, ctx, memo)
            for nu in exp_u:
                for nv in exp_v:
                    hu, hv = source_digest(nu), source_digest(nv)
                    key = (hu, hv) if hu <= hv else (hv, hu)
                    pool.setdefault(key, (nu, nv) if hu <= hv else (nv, nu))
        if not pool:
            return DiameterEstimate(0.0, None, method)
        scored = [
            (u, v, scorer.distance(u, v)) for (u, v) in pool.values()
        ]
        scored.sort(key=lambda it: (-it[2], source_digest(it[0]), source_digest(it[1])))
        beam = scored[: config.beam_size]
    u, v, d = beam[0]
    return DiameterEstimate(d, (u, v) if d > 0.0 else None, method)


@dataclass
class DiversityReport:
    set_id: str
    k: int
    diameter: float
    leave_one_out: list[dict]
    diversity: float
    method: str

    def to_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "k": self.k,
            "diameter": self.diameter,
            "leave_one_out": self.leave_one_out,
            "diversity": self.diversity,
            "method": self.method,
        }


def _subset(tset: TransformerSet, members: Sequence[Transformer], tag: str) -> TransformerSet:
    return TransformerSet(set_id=f"{tset.set_id}-{tag}", members=tuple(members))


def diversity(
    x: Program,
    tests: Sequence[UnitTest],
    tset: TransformerSet,
    k: int,
    scorer: Scorer,
    ctx: EvalContext,
    config: SearchConfig,
) -> DiversityReport:
    """Full-set diameter over the mean of leave-one-out diameters.

    One estimation method is chosen from the full set's size and reused for
    every subset so the ratio compares like with like.
    """
    if len(tset.members) < 2:
        raise DomainError("diversity undefined for singleton sets")
    method = (
        METHOD_BRUTE
        if len(tset.members) ** k <= config.brute_force_cap
        else METHOD_COUPLED
    )
    full = estimate_diameter(x, tests, tset, k, scorer, ctx, config, method=method)
    loo: list[dict] = []
    for t in tset.members:
        rest = [m for m in tset.members if m.transformer_id != t.transformer_id]
        est = estimate_diameter(
            x, tests, _subset(tset, rest, t.transformer_id), k, scorer, ctx, config, method=method
        )
        loo.append({"removed_transformer_id": t.transformer_id, "diameter": est.diameter})
    mean = sum(e["diameter"] for e in loo) / len(loo)
    if mean == 0.0:
        raise DegenerateSetError(
            "all leave-one-out diameters are zero; diversity denominator vanishes"
        )
    return DiversityReport(
        set_id=tset.set_id,
        k=k,
        diameter=full.diameter,
        leave_one_out=loo,
        diversity=full.diameter / mean,
        method=method,
    )


@dataclass
class BoundReport:
    set_id: str
    k: int
    greedy_sets: list[dict]  # {added_transformer_id, diameter_after, members}
    per_step: list[dict]  # {members, diversity: float|None, degenerate: bool}
    bound_value: float | None
    observed_strength: float
    observed_method: str
    holds: bool | None

    def to_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "k": self.k,
            "greedy_sets": self.greedy_sets,
            "per_step": self.per_step,
            "bound_value": self.bound_value,
            "observed_strength": self.observed_strength,
            "observed_method": self.observed_method,
            "holds": self.holds,
        }


def diversity_bound_report(
    x: Program,
    tests: Sequence[UnitTest],
    tset: TransformerSet,
    k: int,
    scorer: Scorer,
    ctx: EvalContext,
    config: SearchConfig,
) -> BoundReport:
    """Greedy-chain diversity product vs the observed best distance.

    The chain starts empty and adds, at each step, the member whose inclusion
    maximizes the k-step diameter (ties to the smallest id). Diversity terms
    are computed for chain sets of size >= 2; terms whose denominator
    vanishes (deterministic singletons make the first one vanish always) are
    flagged degenerate and excluded from the product. The report states both
    sides; it never asserts the inequality.
    """
    if len(tset.members) < 2:
        raise DomainError("bound report needs at least 2 transformers")
    if k < 1:
        raise DomainError("bound report needs k >= 1")
    method = (
        METHOD_BRUTE
        if len(tset.members) ** k <= config.brute_force_cap
        else METHOD_COUPLED
    )
    by_id = {t.transformer_id: t for t in tset.members}
    chain_len = min(max(k, 2), len(tset.members))
    chosen: list[Transformer] = []
    greedy_sets: list[dict] = []
    for _ in range(chain_len):
        best_id: str | None = None
        best_diam = -1.0
        for tid in sorted(set(by_id) - {t.transformer_id for t in chosen}):
            trial = _subset(tset, chosen + [by_id[tid]], f"trial:{tid}")
            est = estimate_diameter(x, tests, trial, k, scorer, ctx, config, method=method)
            if est.diameter > best_diam:
                best_diam = est.diameter
                best_id = tid
        assert best_id is not None
        chosen.append(by_id[best_id])
        greedy_sets.append(
            {
                "added_transformer_id": best_id,
                "diameter_after": best_diam,
                "members": [t.transformer_id for t in chosen],
            }
        )

    per_step: list[dict] = []
    product: float | None = None
    for i in range(len(chosen)):
        members = chosen[: i + 1]
        if len(members) < 2:
            continue
        sub = _subset(tset, members, f"chain:{i + 1}")
        full = estimate_diameter(x, tests, sub, k, scorer, ctx, config, method=method)
        loo_vals = []
        for t in members:
            rest = [m for m in members if m.transformer_id != t.transformer_id]
            est = estimate_diameter(
                x, tests, _subset(tset, rest, t.transformer_id), k, scorer, ctx, config, method=method
            )
            loo_vals.append(est.diameter)
        mean = sum(loo_vals) / len(loo_vals)
        if mean == 0.0:
            per_step.append(
                {
                    "members": [t.transformer_id for t in members],
                    "diversity": None,
                    "degenerate": True,
                }
            )
            continue
        value = full.diameter / mean
        per_step.append(
            {
                "members": [t.transformer_id for t in members],
                "diversity": value,
                "degenerate": False,
            }
        )
        product = value if product is None else product * value

    if len(tset.members) ** k <= config.brute_force_cap:
        observed = brute_force_search(
            x, tests, tset, scorer, ctx, k_max=k, cap=config.brute_force_cap
        ).distance
        observed_method = METHOD_BRUTE
    else:
        run_cfg = SearchConfig(
            beam_size=config.beam_size,
            iterations=k,
            dedup=config.dedup,
            seed=config.seed,
            track_global_best=True,
            brute_force_cap=config.brute_force_cap,
        )
        observed = compose_search(x, tests, tset, scorer, run_cfg, ctx).best.distance
        observed_method = "beam_search"
    holds = (observed <= product) if product is not None else None
    return BoundReport(
        set_id=tset.set_id,
        k=k,
        greedy_sets=greedy_sets,
        per_step=per_step,
        bound_value=product,
        observed_strength=observed,
        observed_method=observed_method,
        holds=holds,
    )


def save_report(obj, path: str | Path, with_timing: bool = True) -> None:
    """Serialize any report bearing to_dict to pretty JSON."""
    if isinstance(obj, SearchReport):
        payload = obj.to_dict(with_timing=with_timing)
    else:
        payload = obj.to_dict()
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
