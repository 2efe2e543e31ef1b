"""A synthetic corpus with a known mix of valid and broken files."""

from __future__ import annotations

import random
from collections import Counter
from pathlib import Path

from fuzzing import rich_program, structured_program

BROKEN = {
    "SyntaxError": ["def f(:\n    pass\n", "x = = 1\n", "print 'hello'\n", "class :\n"],
    "IndentationError": ["def f():\nreturn 1\n", "if x:\n    a = 1\n      b = 2\n"],
    "TabError": ["if x:\n\ty = 1\n        z = 2\n"],
    "ReturnOutsideFunction": ["x = 1\nreturn x\n", "for i in y:\n    return i\n"],
    "BreakOutsideLoop": ["if x:\n    break\n", "def f():\n    break\n"],
    "ContinueOutsideLoop": ["continue\n", "while x:\n    def g():\n        continue\n"],
}


def build(root: Path, count: int, seed: int = 0, broken_share: float = 0.2) -> Counter:
    """Write ``count`` files under ``root``; returns the expected status counts."""
    rng = random.Random(seed)
    expected: Counter = Counter()
    kinds = sorted(BROKEN)
    for i in range(count):
        sub = root / f"part{i % 7}"
        sub.mkdir(parents=True, exist_ok=True)
        if rng.random() < broken_share:
            status = kinds[i % len(kinds)]
            source = rng.choice(BROKEN[status])
        else:
            status = "Success"
            if rng.random() < 0.5:
                source = structured_program(rng.randrange(1 << 30))[0]
            else:
                source = rich_program(rng.randrange(1 << 30))
        (sub / f"file{i:05d}.py").write_text(source, encoding="utf-8")
        expected[status] += 1
    return expected
