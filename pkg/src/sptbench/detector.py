"""Clone-detector scoring: similarity m in [0,1] and distance l = 1 - m.

Three backends share one interface: a local lexical baseline (token-set
Jaccard), a remote embedding service (cosine clamped to [0,1]), and a remote
pair-scoring service (reported clone probability). Remote calls retry twice
with exponential backoff, then raise; search loops must fail loudly rather
than silently skew scores.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass, field
from typing import Sequence

import requests

from .errors import ConfigError, DetectorProtocolError, DetectorScoringError
from .seeds import source_digest

KIND_LEXICAL = "lexical"
KIND_EMBEDDING = "embedding_service"
KIND_PAIR = "pair_service"

_RETRIES = 2  # attempts beyond the first
_BACKOFF_BASE_S = 0.2

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+")


@dataclass(frozen=True)
class DetectorHandle:
    kind: str
    endpoint: str | None = None
    timeout_ms: int = 10_000
    batch_size: int = 32

    def __post_init__(self) -> None:
        if self.kind not in (KIND_LEXICAL, KIND_EMBEDDING, KIND_PAIR):
            raise ConfigError(f"unknown detector kind {self.kind!r}")
        if (self.endpoint is not None) != (self.kind != KIND_LEXICAL):
            raise ConfigError("endpoint is required for remote kinds and forbidden for lexical")
        if self.timeout_ms <= 0 or self.batch_size <= 0:
            raise ConfigError("timeout_ms and batch_size must be positive")


@dataclass(frozen=True)
class ScorePair:
    m: float
    l: float


def _make_score(m: float) -> ScorePair:
    m = float(m)
    if not (0.0 <= m <= 1.0):
        raise DetectorProtocolError(f"similarity {m} outside [0,1]")
    return ScorePair(m=m, l=1.0 - m)


def token_set(source: str) -> frozenset[str]:
    return frozenset(_TOKEN_RE.findall(source))


def _lexical_m(x: str, y: str) -> float:
    tx, ty = token_set(x), token_set(y)
    if not tx and not ty:
        return 1.0
    union = len(tx | ty)
    return len(tx & ty) / union


def _post_json(url: str, body: dict, timeout_ms: int) -> dict:
    last_exc: Exception | None = None
    for attempt in range(_RETRIES + 1):
        if attempt:
            time.sleep(_BACKOFF_BASE_S * (2 ** (attempt - 1)))
        try:
            resp = requests.post(url, json=body, timeout=timeout_ms / 1000.0)
        except requests.RequestException as exc:
            last_exc = exc
            continue
        if resp.status_code >= 500:
            last_exc = DetectorScoringError(f"{url} returned {resp.status_code}")
            continue
        if resp.status_code != 200:
            raise DetectorScoringError(f"{url} returned {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise DetectorProtocolError(f"{url} returned non-JSON body") from exc
    raise DetectorScoringError(
        f"{url} failed after {_RETRIES + 1} attempts: {last_exc}"
    ) from last_exc


def _embed(handle: DetectorHandle, texts: Sequence[str]) -> list[list[float]]:
    payload = _post_json(f"{handle.endpoint}/embed", {"texts": list(texts)}, handle.timeout_ms)
    try:
        vectors = payload["vectors"]
    except (KeyError, TypeError) as exc:
        raise DetectorProtocolError("embed response missing 'vectors'") from exc
    if len(vectors) != len(texts):
        raise DetectorProtocolError(
            f"embed returned {len(vectors)} vectors for {len(texts)} texts"
        )
    dims = {len(v) for v in vectors}
    if len(dims) > 1:
        raise DetectorProtocolError("embed vectors have mixed dimensions")
    return [[float(c) for c in v] for v in vectors]


def _cosine(u: Sequence[float], v: Sequence[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def _pair_scores(handle: DetectorHandle, pairs: Sequence[tuple[str, str]]) -> list[float]:
    body = {"pairs": [{"a": a, "b": b} for a, b in pairs]}
    payload = _post_json(f"{handle.endpoint}/score", body, handle.timeout_ms)
    try:
        probs = payload["clone_probability"]
    except (KeyError, TypeError) as exc:
        raise DetectorProtocolError("score response missing 'clone_probability'") from exc
    if len(probs) != len(pairs):
        raise DetectorProtocolError(
            f"score returned {len(probs)} values for {len(pairs)} pairs"
        )
    return [float(p) for p in probs]


def score_batch(handle: DetectorHandle, pairs: Sequence[tuple[str, str]]) -> list[ScorePair]:
    """Score many pairs; element-wise identical to sequential score() calls."""
    if not pairs:
        return []
    if handle.kind == KIND_LEXICAL:
        return [_make_score(_lexical_m(a, b)) for a, b in pairs]
    out: list[ScorePair] = []
    for start in range(0, len(pairs), handle.batch_size):
        chunk = pairs[start : start + handle.batch_size]
        if handle.kind == KIND_EMBEDDING:
            # embed each side; dedup within the chunk to spare the service
            texts: list[str] = []
            index: dict[str, int] = {}
            for a, b in chunk:
                for t in (a, b):
                    if t not in index:
                        index[t] = len(texts)
                        texts.append(t)
            vectors = _embed(handle, texts)
            for a, b in chunk:
                cos = _cosine(vectors[index[a]], vectors[index[b]])
                out.append(_make_score(max(0.0, cos)))
        else:
            for p in _pair_scores(handle, list(chunk)):
                out.append(_make_score(p))
    return out


def score(handle: DetectorHandle, x: str, y: str) -> ScorePair:
    return score_batch(handle, [(x, y)])[0]


def classify(handle: DetectorHandle, x: str, y: str, threshold: float) -> str:
    """Binary decision: clone iff m >= threshold (boundary inclusive)."""
    if not (0.0 <= threshold <= 1.0):
        raise ConfigError("threshold must lie in [0,1]")
    return "clone" if score(handle, x, y).m >= threshold else "nonclone"


@dataclass
class Scorer:
    """Memoizing front end over one handle for hot loops.

    Keys are content digests, ordered; the lexical backend is symmetric so its
    keys are canonicalized. Sound for deterministic backends; remote services
    are assumed stable within one run.
    """

    handle: DetectorHandle
    _cache: dict[tuple[str, str], ScorePair] = field(default_factory=dict)
    calls: int = 0  # backend invocations actually made

    def _key(self, x: str, y: str) -> tuple[str, str]:
        hx, hy = source_digest(x), source_digest(y)
        if self.handle.kind == KIND_LEXICAL and hx > hy:
            hx, hy = hy, hx
        return (hx, hy)

    def score(self, x: str, y: str) -> ScorePair:
        key = self._key(x, y)
        hit = self._cache.get(key)
        if hit is None:
            self.calls += 1
            hit = score(self.handle, x, y)
            self._cache[key] = hit
        return hit

    def distance(self, x: str, y: str) -> float:
        return self.score(x, y).l
