"""LLM-backed transformer forging: design prompts, implementation sampling,
Best-of-N selection, and registration.

The chat client speaks one minimal wire format and runs in three modes:
live (network), record (network + append to a cassette), and replay
(cassette only, guaranteed offline). Cassette entries are keyed by a digest
of (model, temperature, prompt); repeated identical requests replay in
first-recorded order, repeating the final entry once exhausted, which is what
lets one recorded session serve n-sample loops of any n.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import requests

from .corpus import Program, UnitTest
from .detector import Scorer
from .errors import (
    CassetteMissError,
    ConfigError,
    DesignParseError,
    DomainError,
    TransportError,
)
from .transform import (
    EvalContext,
    Transformer,
    TransformerEvaluation,
    best_of_n,
    write_transformer,
)

MODE_LIVE = "live"
MODE_RECORD = "record"
MODE_REPLAY = "replay"

DESIGN_PROMPT_TEMPLATE = """You are a python programming language expert. Your goal is to design new semantic preserving transformations.
I will give you 5 python programs and you have to suggest a transformation that can be applied to all the 5 programs.
Give an exact description of the transformation such that it can be used to implement the transformation.
The output format should be:
- Transformation Name: <name>
- Description: <description>

The transformation should be distinct from the list of following transformations:
{transformation_list}

PROGRAMS:
{programs}
"""

IMPLEMENT_PROMPT_TEMPLATE = """Write a python program that takes in a string (from std input) that represents another python program, mutates it according to the following transformation and prints the result (do not print anything else).
Transformation: {transformation description}
- the obfuscator should ensure that the program is still valid python code
- the obfuscator should be semantic preserving
- remember to input the entire program which can include multiple lines
"""

_RETRIES = 2
_BACKOFF_BASE_S = 0.2
_DESIGN_PARSE_RETRIES = 3

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_+-]*\n(.*?)```", re.DOTALL)
_NAME_RE = re.compile(r"^\s*(?:[-*•]\s*)?Transformation Name:\s*(.+?)\s*$")
_DESC_RE = re.compile(r"^\s*(?:[-*•]\s*)?Description:\s*(.*?)\s*$")
_LABEL_RE = re.compile(r"^\s*(?:[-*•]\s*)?[A-Z][A-Za-z_ ]{0,40}:\s")


@dataclass(frozen=True)
class ChatClientConfig:
    mode: str
    model_id: str
    temperature: float
    max_output_tokens: int = 4096
    endpoint: str | None = None
    cassette_path: str | None = None
    api_key_env: str | None = None

    def __post_init__(self) -> None:
        if self.mode not in (MODE_LIVE, MODE_RECORD, MODE_REPLAY):
            raise ConfigError(f"unknown chat mode {self.mode!r}")
        if self.mode in (MODE_RECORD, MODE_REPLAY) and not self.cassette_path:
            raise ConfigError(f"{self.mode} mode requires cassette_path")
        if self.mode in (MODE_LIVE, MODE_RECORD) and not (self.endpoint and self.api_key_env):
            raise ConfigError(f"{self.mode} mode requires endpoint and api_key_env")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ConfigError("max_output_tokens must be positive")


def request_digest(model_id: str, temperature: float, prompt: str) -> str:
    payload = json.dumps(
        {"model": model_id, "prompt": prompt, "temperature": temperature},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ChatClient:
    """One chat session; replay cursors advance per request digest."""

    def __init__(self, config: ChatClientConfig) -> None:
        self.config = config
        self._replay: dict[str, list[str]] = {}
        self._cursor: dict[str, int] = {}
        if config.mode == MODE_REPLAY:
            self._load_cassette()

    def _load_cassette(self) -> None:
        path = Path(self.config.cassette_path or "")
        if not path.exists():
            raise CassetteMissError(f"cassette {path} does not exist")
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                    self._replay.setdefault(entry["digest"], []).append(entry["response"])
                except (json.JSONDecodeError, KeyError) as exc:
                    raise CassetteMissError(f"{path}:{lineno}: bad cassette entry: {exc}") from exc

    def chat(self, prompt: str) -> str:
        digest = request_digest(self.config.model_id, self.config.temperature, prompt)
        if self.config.mode == MODE_REPLAY:
            responses = self._replay.get(digest)
            if not responses:
                raise CassetteMissError(f"no cassette entry for digest {digest}")
            i = self._cursor.get(digest, 0)
            # repeat the last recorded response once the queue runs dry
            response = responses[min(i, len(responses) - 1)]
            self._cursor[digest] = i + 1
            return response
        response = self._live_call(prompt)
        if self.config.mode == MODE_RECORD:
            entry = {
                "digest": digest,
                "model": self.config.model_id,
                "temperature": self.config.temperature,
                "prompt": prompt,
                "response": response,
            }
            with open(self.config.cassette_path or "", "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, ensure_ascii=False) + "\n")
        return response

    def _live_call(self, prompt: str) -> str:
        assert self.config.api_key_env is not None
        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise ConfigError(f"environment variable {self.config.api_key_env} is not set")
        body = {
            "model": self.config.model_id,
            "temperature": self.config.temperature,
            "max_output_tokens": self.config.max_output_tokens,
            "prompt": prompt,
        }
        headers = {"Authorization": f"Bearer {key}"}
        last_exc: Exception | None = None
        for attempt in range(_RETRIES + 1):
            if attempt:
                time.sleep(_BACKOFF_BASE_S * (2 ** (attempt - 1)))
            try:
                resp = requests.post(
                    str(self.config.endpoint),
                    json=body,
                    headers=headers,
                    timeout=120,
                )
            except requests.RequestException as exc:
                last_exc = exc
                continue
            if resp.status_code >= 500:
                last_exc = TransportError(f"chat endpoint returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise TransportError(
                    f"chat endpoint returned {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()["text"]
            except (ValueError, KeyError) as exc:
                raise TransportError("chat response missing 'text'") from exc
        raise TransportError(f"chat failed after {_RETRIES + 1} attempts: {last_exc}") from last_exc


@dataclass
class SptDesign:
    design_id: str
    name: str
    description: str
    example_program_ids: list[str] = field(default_factory=list)
    prior_designs: list[str] = field(default_factory=list)


@dataclass
class ImplementationCandidate:
    design_id: str
    candidate_index: int
    source: str
    evaluation: TransformerEvaluation | None = None


def render_transformation_list(entries: Sequence[tuple[str, str]]) -> str:
    """One '- name: description' line per known transformation."""
    if not entries:
        return "(none)"
    return "\n".join(f"- {name}: {description}" for name, description in entries)


def render_programs(programs: Sequence[Program]) -> str:
    return "\n\n".join(
        f"Program {i}:\n{p.source_text}" for i, p in enumerate(programs, start=1)
    )


def render_design_prompt(existing: Sequence[tuple[str, str]], programs: Sequence[Program]) -> str:
    # .replace, never str.format: program sources may contain braces
    return DESIGN_PROMPT_TEMPLATE.replace(
        "{transformation_list}", render_transformation_list(existing)
    ).replace("{programs}", render_programs(programs))


def render_implement_prompt(description: str) -> str:
    return IMPLEMENT_PROMPT_TEMPLATE.replace("{transformation description}", description)


def parse_design_response(text: str) -> tuple[str, str]:
    """Pull (name, description) out of a design response.

    The name comes from the first 'Transformation Name:' line; the
    description starts at the first later 'Description:' line and runs until
    the next labeled line or end of text.
    """
    lines = text.split("\n")
    name: str | None = None
    name_idx = -1
    for i, line in enumerate(lines):
        m = _NAME_RE.match(line)
        if m:
            name = m.group(1).strip().strip("`").strip()
            name_idx = i
            break
    if not name:
        raise DesignParseError("no 'Transformation Name:' line found", text)
    desc_parts: list[str] = []
    started = False
    for line in lines[name_idx + 1 :]:
        if not started:
            m = _DESC_RE.match(line)
            if m:
                started = True
                first = m.group(1).strip()
                if first:
                    desc_parts.append(first)
            continue
        if _LABEL_RE.match(line):
            break
        desc_parts.append(line)
    if not started:
        raise DesignParseError("no 'Description:' line found after the name", text)
    description = "\n".join(desc_parts).strip()
    if not description:
        raise DesignParseError("empty description", text)
    return name, description


def _design_id(name: str, description: str) -> str:
    return "dsg-" + hashlib.sha256(f"{name}\n{description}".encode("utf-8")).hexdigest()[:12]


def design_spts(
    client: ChatClient,
    example_programs: Sequence[Program],
    existing: Sequence[SptDesign],
    count: int,
    parse_retries: int = _DESIGN_PARSE_RETRIES,
) -> list[SptDesign]:
    """Generate `count` new designs, feeding each back into the next prompt.

    A response that fails to parse, or that repeats a known name
    (case-insensitive), is retried with the identical prompt; retries are
    shared across both failure kinds.
    """
    if len(example_programs) != 5:
        raise DomainError(f"design prompt takes exactly 5 example programs, got {len(example_programs)}")
    if count < 1:
        raise DomainError("count must be >= 1")
    known: list[tuple[str, str]] = [(d.name, d.description) for d in existing]
    known_names = {d.name.lower() for d in existing}
    out: list[SptDesign] = []
    for _ in range(count):
        prompt = render_design_prompt(known, example_programs)
        last_error: DesignParseError | None = None
        design: SptDesign | None = None
        for _attempt in range(parse_retries + 1):
            raw = client.chat(prompt)
            try:
                name, description = parse_design_response(raw)
            except DesignParseError as exc:
                last_error = exc
                continue
            if name.lower() in known_names:
                last_error = DesignParseError(f"duplicate design name {name!r}", raw)
                continue
            design = SptDesign(
                design_id=_design_id(name, description),
                name=name,
                description=description,
                example_program_ids=[p.program_id for p in example_programs],
                prior_designs=[n for n, _ in known],
            )
            break
        if design is None:
            assert last_error is not None
            raise last_error
        known.append((design.name, design.description))
        known_names.add(design.name.lower())
        out.append(design)
    return out


def extract_program(response: str) -> str:
    """First fenced code block if any, else the whole response, trimmed."""
    m = _FENCE_RE.search(response)
    body = m.group(1) if m else response
    body = body.strip("\n")
    return body + "\n" if body else ""


def implement_spt(client: ChatClient, design: SptDesign, n: int) -> list[ImplementationCandidate]:
    """Sample n candidate implementations of one design."""
    if n < 1:
        raise DomainError("n must be >= 1")
    prompt = render_implement_prompt(design.description)
    out: list[ImplementationCandidate] = []
    for i in range(n):
        response = client.chat(prompt)
        out.append(
            ImplementationCandidate(
                design_id=design.design_id,
                candidate_index=i,
                source=extract_program(response),
            )
        )
    return out


def _slug(name: str) -> str:
    s = re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
    return s or "unnamed"


def forge_transformer(
    client: ChatClient,
    design: SptDesign,
    n: int,
    validation: Sequence[tuple[Program, Sequence[UnitTest]]],
    scorer: Scorer,
    ctx: EvalContext,
    registry_dir: str | Path,
    entry_prefix: Sequence[str] = ("python3", "-S", "-E"),
) -> Transformer:
    """Implement, score by Best-of-N, and register the winning candidate.

    A winner with reward 0 is still registered, flagged in its provenance;
    there is no rejection rule, only the warning.
    """
    if not validation:
        raise DomainError("forge needs a non-empty validation set")
    candidates = implement_spt(client, design, n)
    with tempfile.TemporaryDirectory(prefix="spt-forge-") as staging:
        wrapped: list[Transformer] = []
        for cand in candidates:
            cdir = Path(staging) / f"c{cand.candidate_index}"
            cdir.mkdir()
            (cdir / "transform.py").write_text(cand.source, encoding="utf-8")
            wrapped.append(
                Transformer(
                    transformer_id=f"{design.design_id}-c{cand.candidate_index}",
                    name=design.name,
                    description=design.description,
                    entry=(*entry_prefix, "{dir}/transform.py"),
                    provenance={"staging": True},
                    root_dir=str(cdir),
                )
            )
        winner_t, table = best_of_n(wrapped, validation, scorer, ctx)
        winner_idx = next(
            i for i, w in enumerate(wrapped) if w.transformer_id == winner_t.transformer_id
        )
        winner = candidates[winner_idx]
        for cand, ev in zip(candidates, table):
            cand.evaluation = ev
        provenance = {
            "forged": {
                "model_id": client.config.model_id,
                "design_id": design.design_id,
                "temperature": client.config.temperature,
                "candidate_index": winner.candidate_index,
            }
        }
        if table[winner_idx].mean_reward == 0.0:
            provenance["zero_reward_warning"] = True
        transformer_id = f"{_slug(design.name)}-{design.design_id[4:12]}"
        registered = write_transformer(
            registry_dir,
            transformer_id=transformer_id,
            name=design.name,
            description=design.description,
            script_text=winner.source,
            provenance=provenance,
            entry_prefix=entry_prefix,
        )
    table_payload = [
        {
            "candidate_index": c.candidate_index,
            "source": c.source,
            "mean_reward": c.evaluation.mean_reward if c.evaluation else None,
            "correct_and_applicable": c.evaluation.correct_and_applicable if c.evaluation else None,
            "n": c.evaluation.n if c.evaluation else None,
        }
        for c in candidates
    ]
    candidates_path = Path(registry_dir) / transformer_id / "candidates.json"
    candidates_path.write_text(
        json.dumps(table_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return registered
