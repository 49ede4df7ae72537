"""Workbench for semantic-preserving program transformations (SPTs).

Builds clone-detection pair datasets from judged program corpora, applies and
composes executable source-to-source transformers against pluggable clone
detectors, forges new transformers through an LLM pipeline with reward-based
selection, and measures transformation-set diameter and diversity.
"""

__version__ = "0.1.0"
