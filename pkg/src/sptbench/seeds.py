"""Deterministic seed derivation and content hashing.

One root seed per run; every randomized stage derives its own sub-seed by
hashing (root, purpose label), so streams stay independent and insertion of a
new stage never perturbs existing ones.
"""

from __future__ import annotations

import hashlib


def derive_seed(root: int, label: str) -> int:
    """Derive a 64-bit sub-seed from a root seed and a purpose label."""
    digest = hashlib.blake2b(f"{root}:{label}".encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


def source_digest(text: str) -> str:
    """Content digest of program source; deterministic function of the text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
