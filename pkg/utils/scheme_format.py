"""
Text formats for censoring schemes
Comma lists (`0,4,1,0,0`) for machines, run-length `a^b` notation for people
"""

import re
from typing import List, Sequence


# One token of a scheme: a value, optionally repeated (`0^5`)
TOKEN_PATTERN = re.compile(r"^(\d+)(?:\s*\^\s*(\d+))?$")


def parse_removals(text: str) -> List[int]:
    """
    Parse removal counts from text

    Args:
        text: Comma separated counts; accepts the run-length form as well,
            e.g. "0,4,1,0,0", "(0, 4, 1, 0, 0)" or "(0^5, 20, 0^4)"

    Returns:
        List of removal counts
    """
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]

    if not body.strip():
        raise ValueError("Empty scheme text")

    removals = []
    for token in body.split(","):
        token = token.strip()
        if match := TOKEN_PATTERN.match(token):
            value, repeat = match.groups()
            count = int(repeat) if repeat is not None else 1
            if count < 1:
                raise ValueError(f"Repeat count must be positive in {token!r}")
            removals.extend([int(value)] * count)
        else:
            raise ValueError(f"Cannot parse scheme token {token!r}")

    return removals


def format_removals(removals: Sequence[int]) -> str:
    """Comma list used in CSV and JSON records"""
    return ",".join(str(int(r)) for r in removals)


def format_run_length(removals: Sequence[int]) -> str:
    """
    Human readable form where `a^b` means a repeated b times

    Example:
        (0, 0, 0, 0, 0, 20, 0, 0, 0, 0) -> "(0^5, 20, 0^4)"
    """
    parts = []
    i = 0
    while i < len(removals):
        value = int(removals[i])
        j = i
        while j + 1 < len(removals) and int(removals[j + 1]) == value:
            j += 1
        run = j - i + 1
        parts.append(f"{value}^{run}" if run > 1 else str(value))
        i = j + 1
    return "(" + ", ".join(parts) + ")"
