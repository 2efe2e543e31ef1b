"""Source snippets shared by the test modules."""

LOOP_FN = """def fn1():
  x = 0
  for i in range(5):
    x += i
  return x
"""

GOLDEN = {
    "fn1": "def fn1(a, b):\n    return a + b\n",
    "fn2": "def fn2(a, b):\n    c = a\n    if a > b:\n        c -= b\n    return c\n",
    "fn3": (
        "def fn3(a, b):\n    c = a\n    if a > b:\n        c -= b\n        c += 1\n"
        "        c += 2\n        c += 3\n    else:\n        c += b\n    return c\n"
    ),
    "fn4": "def fn4(i):\n    count = 0\n    for i in range(i):\n        count += 1\n    return count\n",
    "fn5": (
        "def fn5(i):\n    count = 0\n    for _ in range(i):\n        if count > 5:\n"
        "            break\n        count += 1\n    return count\n"
    ),
    "fn6": "def fn6():\n    count = 0\n    while count < 10:\n        count += 1\n    return count\n",
    "fn7": (
        "def fn7():\n    try:\n        raise ValueError('N/A')\n    except ValueError as e:\n"
        "        del e\n    return\n"
    ),
    "fn8": "def fn8(a):\n    a += 1\n",
}

# The "Statement" column, one entry per statement-level node.
GOLDEN_STATEMENTS = {
    "fn1": ["a, b ← args", "return a + b", "<exit>"],
    "fn2": ["a, b ← args", "c = a", "a > b", "c -= b", "return c", "<exit>"],
    "fn3": ["a, b ← args", "c = a", "a > b", "c -= b", "c += 1", "c += 2", "c += 3",
            "c += b", "return c", "<exit>"],
    "fn4": ["i ← args", "count = 0", "range(i)", "i ← iter", "count += 1", "return count",
            "<exit>"],
    "fn5": ["i ← args", "count = 0", "range(i)", "_ ← iter", "count > 5", "count += 1",
            "return count", "<exit>"],
    "fn6": ["count = 0", "count < 10", "count += 1", "return count", "<exit>"],
    "fn7": ["raise ValueError('N/A')", "ValueError", "e ← exception", "del e", "return",
            "<exit>"],
    "fn8": ["a ← args", "a += 1", "<exit>"],
}
