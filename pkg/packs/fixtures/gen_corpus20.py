"""Regenerate corpus20.jsonl, the pack's 20-program fixture corpus.

Each problem carries one solution and its unit tests. The programs are
written to exercise the pack members: range loops with break/continue/else
and negative steps, two-branch conditionals and conditional expressions,
single and chained comparisons, user-defined functions, and one program with
no user identifiers at all. Run from this directory:

    python3 gen_corpus20.py
"""

from __future__ import annotations

import json
from pathlib import Path

# (problem_id, source, [(stdin, expected_stdout)])
PROGRAMS: list[tuple[str, str, list[tuple[str, str]]]] = [
    (
        "p01_sum_two",
        "a, b = map(int, input().split())\nprint(a + b)\n",
        [("3 4\n", "7\n"), ("10 -2\n", "8\n")],
    ),
    (
        "p02_sum_range",
        "n = int(input())\ntotal = 0\nfor i in range(n):\n    total += i\nprint(total)\n",
        [("5\n", "10\n"), ("1\n", "0\n")],
    ),
    (
        "p03_first_square",
        "n = int(input())\nans = -1\nfor i in range(n):\n    if i * i >= n:\n"
        "        ans = i\n        break\nprint(ans)\n",
        [("5\n", "3\n"), ("2\n", "-1\n")],
    ),
    (
        "p04_even_sum",
        "n = int(input())\ns = 0\nfor i in range(n):\n    if i % 2 == 1:\n"
        "        continue\n    s += i\nprint(s)\n",
        [("5\n", "6\n"), ("1\n", "0\n")],
    ),
    (
        "p05_search_else",
        "target = int(input())\nfor i in range(5):\n    if i == target:\n"
        "        print('found')\n        break\nelse:\n    print('missing')\n",
        [("3\n", "found\n"), ("9\n", "missing\n")],
    ),
    (
        "p06_countdown",
        "n = int(input())\nfor i in range(n, 0, -1):\n    print(i)\n",
        [("3\n", "3\n2\n1\n"), ("1\n", "1\n")],
    ),
    (
        "p07_partial_sum",
        "a, b = map(int, input().split())\ns = 0\nfor i in range(a, b):\n    s += i\nprint(s)\n",
        [("2 5\n", "9\n"), ("0 3\n", "3\n")],
    ),
    (
        "p08_parity",
        "n = int(input())\nif n % 2 == 0:\n    print('even')\nelse:\n    print('odd')\n",
        [("4\n", "even\n"), ("7\n", "odd\n")],
    ),
    (
        "p09_grade",
        "score = int(input())\nif score >= 90:\n    grade = 'A'\nelif score >= 70:\n"
        "    grade = 'B'\nelif score >= 50:\n    grade = 'C'\nelse:\n    grade = 'D'\nprint(grade)\n",
        [("95\n", "A\n"), ("60\n", "C\n")],
    ),
    (
        "p10_collatz",
        "n = int(input())\nsteps = 0\nwhile n != 1:\n    n = n // 2 if n % 2 == 0 else 3 * n + 1\n"
        "    steps += 1\nprint(steps)\n",
        [("6\n", "8\n"), ("1\n", "0\n")],
    ),
    (
        "p11_smaller",
        "def smaller(x, y):\n    return x if x < y else y\n\na, b = map(int, input().split())\n"
        "print(smaller(a, b))\n",
        [("3 9\n", "3\n"), ("8 2\n", "2\n")],
    ),
    (
        "p12_compose",
        "def double(x):\n    return x * 2\n\ndef bump(x):\n    return x + 1\n\n"
        "n = int(input())\nprint(double(bump(n)))\n",
        [("3\n", "8\n"), ("0\n", "2\n")],
    ),
    (
        "p13_reverse",
        "text = input()\nprint(text[::-1])\n",
        [("abc\n", "cba\n"), ("hi\n", "ih\n")],
    ),
    (
        "p14_scan_append",
        "xs = list(map(int, input().split()))\nfor i in range(len(xs)):\n"
        "    xs.append(xs[i] * 2)\nprint(*xs)\n",
        [("1 2\n", "1 2 2 4\n"), ("7\n", "7 14\n")],
    ),
    (
        "p15_clamp",
        "lo, hi, x = map(int, input().split())\nif x < lo:\n    x = lo\nif x > hi:\n"
        "    x = hi\nprint(x)\n",
        [("0 10 99\n", "10\n"), ("0 10 -5\n", "0\n")],
    ),
    (
        "p16_abs",
        "n = int(input())\nprint(n if n >= 0 else -n)\n",
        [("-4\n", "4\n"), ("3\n", "3\n")],
    ),
    (
        "p17_banner",
        "print('hello')\nprint(1 + 2)\n",
        [("", "hello\n3\n")],
    ),
    (
        "p18_increasing",
        "a, b, c = map(int, input().split())\nif a < b < c:\n    print('inc')\nelse:\n    print('no')\n",
        [("1 2 3\n", "inc\n"), ("3 2 1\n", "no\n")],
    ),
    (
        "p19_vowels",
        "word = input()\ncount = 0\nfor ch in word:\n    if ch in 'aeiou':\n"
        "        count += 1\nprint(count)\n",
        [("banana\n", "3\n"), ("xyz\n", "0\n")],
    ),
    (
        "p20_grid",
        "n = int(input())\ntotal = 0\nfor i in range(n):\n    for j in range(n):\n"
        "        if j > i:\n            break\n        if (i + j) % 2 == 1:\n"
        "            continue\n        total += 1\nprint(total)\n",
        [("3\n", "4\n"), ("1\n", "1\n")],
    ),
]


def main() -> None:
    out = Path(__file__).parent / "corpus20.jsonl"
    with open(out, "w", encoding="utf-8") as f:
        for pid, source, tests in PROGRAMS:
            record = {
                "problem_id": pid,
                "tests": [
                    {"stdin": i, "expected_stdout": o, "time_limit_ms": 2000}
                    for i, o in tests
                ],
                "solutions": [{"program_id": f"{pid}_s1", "source": source}],
            }
            f.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"wrote {len(PROGRAMS)} problems to {out}")


if __name__ == "__main__":
    main()
