"""Bundled toy transformers for offline search/metric exercises.

These are deliberately tiny stdin->stdout scripts with fully predictable
behavior: comment padders whose outputs depend only on the multiset of
applications, a one-shot textual identifier mangler, an identity, and a few
misbehaving specimens (crash, invalid output, equivalence breaker, sleeper)
for outcome-classification tests. materialize_toys writes any subset as
registry directories so every consumer goes through the normal manifest path.
"""

from __future__ import annotations

from pathlib import Path

from .transform import Transformer, load_transformer, write_transformer

_IDENTITY = """\
import sys

sys.stdout.write(sys.stdin.read())
"""

# Each padder appends one numbered marker comment; the count scans only its
# own family, so padders of different families commute.
_PAD_TEMPLATE = """\
import re
import sys

text = sys.stdin.read()
n = len(re.findall(r"(?m)^# {family}\\d+$", text))
if text and not text.endswith("\\n"):
    text += "\\n"
sys.stdout.write(text + "# {family}%d\\n" % (n + 1))
"""

# Counts markers of every family, so it does not commute with the others.
_PAD_ANY = """\
import re
import sys

text = sys.stdin.read()
n = len(re.findall(r"(?m)^# \\w+\\d+$", text))
if text and not text.endswith("\\n"):
    text += "\\n"
sys.stdout.write(text + "# pad%d\\n" % (n + 1))
"""

# One-shot rename: u_<name> becomes w_<name> everywhere. Second application
# finds nothing and emits the input unchanged (identity status upstream).
_MANGLE_U = """\
import re
import sys

text = sys.stdin.read()
sys.stdout.write(re.sub(r"\\bu_(\\w+)", r"w_\\1", text))
"""

_BREAKER = """\
import sys

text = sys.stdin.read()
if text and not text.endswith("\\n"):
    text += "\\n"
sys.stdout.write(text + "print('extra')\\n")
"""

_CRASHER = """\
import sys

sys.stdin.read()
sys.exit(3)
"""

_INVALID_OUT = """\
import sys

text = sys.stdin.read()
if text and not text.endswith("\\n"):
    text += "\\n"
sys.stdout.write(text + "def (:\\n")
"""

_SLEEPER = """\
import sys
import time

sys.stdin.read()
time.sleep(600)
"""

TOY_SCRIPTS: dict[str, tuple[str, str]] = {
    "identity": ("copies input to output unchanged", _IDENTITY),
    "pad_alpha": ("appends a numbered alpha marker comment", _PAD_TEMPLATE.replace("{family}", "alpha")),
    "pad_beta": ("appends a numbered beta marker comment", _PAD_TEMPLATE.replace("{family}", "beta")),
    "pad_gamma": ("appends a numbered gamma marker comment", _PAD_TEMPLATE.replace("{family}", "gamma")),
    "pad_any": ("appends a marker counting all existing markers", _PAD_ANY),
    "mangle_u": ("renames u_-prefixed identifiers to w_-prefixed ones", _MANGLE_U),
    "breaker": ("appends an extra print, changing behavior", _BREAKER),
    "crasher": ("always exits nonzero", _CRASHER),
    "invalid_out": ("appends an unparseable line", _INVALID_OUT),
    "sleeper": ("never finishes within sane limits", _SLEEPER),
}


def materialize_toys(
    target_dir: str | Path, names: list[str] | None = None
) -> dict[str, Transformer]:
    """Write the named toys (default: all) as registry directories."""
    target_dir = Path(target_dir)
    chosen = list(TOY_SCRIPTS) if names is None else names
    out: dict[str, Transformer] = {}
    for name in chosen:
        description, script = TOY_SCRIPTS[name]
        existing = target_dir / name
        if (existing / "manifest.json").exists():
            out[name] = load_transformer(existing)
            continue
        out[name] = write_transformer(
            target_dir,
            transformer_id=name,
            name=name,
            description=description,
            script_text=script,
            provenance={"manual": True, "toy": True},
        )
    return out
