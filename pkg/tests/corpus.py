"""Named fixture codes and seeded random corpora shared by several test modules."""

from __future__ import annotations

import numpy as np

from sparsicode.code import (
    BinaryCode,
    cut_code,
    cycle_edges,
    identity_code,
    linear_code,
    random_code,
    staircase_code,
    str_to_word,
)
from sparsicode.csp import CspInstance, predicate_catalog, satisfiability_code


def _s(*words: str) -> BinaryCode:
    return BinaryCode.from_strings(words)


def fixture_codes() -> dict[str, BinaryCode]:
    out = {
        "triangle-pairs": _s("110", "011", "101"),
        "identity-4": identity_code(4),
        "identity-6": identity_code(6),
        "staircase-5": staircase_code(5),
        "staircase-8": staircase_code(8),
        "cut-cycle-4": cut_code(4, cycle_edges(4)),
        "cut-cycle-6": cut_code(6, cycle_edges(6)),
        "cut-k4": cut_code(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
        "hamming-7-4": linear_code([str_to_word(g) for g in ("1000110", "0100101", "0010011", "0001111")], 7),
        "repetition-5": _s("00000", "11111"),
        "weight-two-5": BinaryCode(5, frozenset(a | b for a in (1, 2, 4, 8, 16) for b in (1, 2, 4, 8, 16) if a != b)),
        "eq-triangle": satisfiability_code(CspInstance(3, ((0, 1), (1, 2), (0, 2))), predicate_catalog("eq")),
        # unit vectors padded with a shared always-on coordinate
        "units-with-tail-4": _s("10001", "01001", "00101", "00011"),
        # NRD 2, yet one coordinate carries a valid 0.5-sparsifier
        "heavy-tail-3": _s("101", "011", "001"),
        "empty-word-only": BinaryCode(4, frozenset({0})),
    }
    rng = np.random.Generator(np.random.PCG64(20240601))
    for k in range(6):
        m = int(rng.integers(4, 11))
        out[f"random-{k}"] = random_code(m, int(rng.integers(2, 24)), rng)
    return out


def random_corpus(count: int, seed: int, max_length: int = 10, max_size: int = 64) -> list[BinaryCode]:
    """Seeded random codes with varied length, size and density."""
    rng = np.random.Generator(np.random.PCG64(seed))
    codes = []
    for _ in range(count):
        m = int(rng.integers(1, max_length + 1))
        size = int(rng.integers(1, min(max_size, 2**m) + 1))
        density = float(rng.uniform(0.1, 0.9))
        codes.append(random_code(m, size, rng, density))
    return codes
