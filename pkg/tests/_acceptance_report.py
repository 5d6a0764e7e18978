"""Shared registry for acceptance-criterion result lines.

test_acceptance.py appends one line per criterion; conftest.py prints the
collected lines in the terminal summary so they are visible whether or not
the individual tests passed.
"""

LINES: list[str] = []


def record(line: str) -> None:
    LINES.append(line)
