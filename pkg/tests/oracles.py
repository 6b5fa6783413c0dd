"""Independent brute-force reference implementations used by the tests.

Everything here works straight from the definitions, on lists of bit
tuples, and shares no code with the package beyond data conversion.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def bits(code) -> list[tuple[int, ...]]:
    """Codewords as tuples of 0/1 with index = coordinate."""
    return [tuple((w >> i) & 1 for i in range(code.length)) for w in code.codewords]


def nrd_brute(code) -> int:
    words = bits(code)
    m = code.length
    for k in range(m, 0, -1):
        for idx in itertools.combinations(range(m), k):
            patterns = {tuple(c[i] for i in idx) for c in words}
            if all(tuple(int(j == i) for j in idx) in patterns for i in idx):
                return k
    return 0


def chain_brute(code) -> int:
    """Longest ordered coordinate list a_1..a_l where each a_i has a codeword
    equal to 1 at a_i and 0 at a_1..a_(i-1)."""
    words = bits(code)
    m = code.length
    best = 0

    def extend(prefix: list[int]) -> None:
        nonlocal best
        best = max(best, len(prefix))
        for a in range(m):
            if a in prefix:
                continue
            if any(c[a] == 1 and all(c[b] == 0 for b in prefix) for c in words):
                extend(prefix + [a])

    extend([])
    return best


def vc_brute(code) -> int:
    words = bits(code)
    m = code.length
    for k in range(m, 0, -1):
        for idx in itertools.combinations(range(m), k):
            if len({tuple(c[i] for i in idx) for c in words}) == 2**k:
                return k
    return 0


def or_closure_brute(code) -> set[int]:
    out = {0} | set(code.codewords)
    while True:
        new = {a | b for a in out for b in out} - out
        if not new:
            return out
        out |= new


def support_brute(words) -> set[int]:
    out = set()
    for w in words:
        i = 0
        while w:
            if w & 1:
                out.add(i)
            w >>= 1
            i += 1
    return out


def sat_brute(n: int, d: int, clauses, relation) -> set[tuple[int, ...]]:
    """Assignments satisfying every clause."""
    rel = set(relation)
    return {
        s for s in itertools.product(range(d), repeat=n) if all(tuple(s[x] for x in y) in rel for y in clauses)
    }


def nonredundant_brute(n: int, d: int, clauses, relation) -> bool:
    """Every clause can be dropped to gain a solution."""
    full = sat_brute(n, d, clauses, relation)
    for k in range(len(clauses)):
        rest = [y for j, y in enumerate(clauses) if j != k]
        if sat_brute(n, d, rest, relation) == full:
            return False
    return True


def csp_nrd_brute(n: int, d: int, r: int, relation) -> int:
    """Largest non-redundant clause set, by trying every subset of X^r."""
    clauses = list(itertools.product(range(n), repeat=r))
    assignments = list(itertools.product(range(d), repeat=n))
    rel = set(relation)
    viol = [frozenset(k for k, y in enumerate(clauses) if tuple(s[x] for x in y) not in rel) for s in assignments]
    best = 0
    for size in range(1, len(clauses) + 1):
        found = False
        for sub in itertools.combinations(range(len(clauses)), size):
            sset = set(sub)
            if all(any(v & sset == {k} for v in viol) for k in sub):
                found = True
                break
        if not found:
            break
        best = size
    return best


def csp_chain_brute(n: int, d: int, r: int, relation) -> int:
    """Longest chain of instances with strictly growing solution sets, plus one."""
    clauses = list(itertools.product(range(n), repeat=r))
    rel = set(relation)
    assignments = list(itertools.product(range(d), repeat=n))
    sat_of_clause = [frozenset(s for s in assignments if tuple(s[x] for x in y) in rel) for y in clauses]
    sets = set()
    for mask in range(1 << len(clauses)):
        acc = frozenset(assignments)
        for k in range(len(clauses)):
            if mask >> k & 1:
                acc &= sat_of_clause[k]
        sets.add(acc)
    ordered = sorted(sets, key=len)
    longest = {}
    for s in ordered:
        longest[s] = 1 + max((longest[t] for t in longest if t < s), default=0)
    return max(longest.values())


def sparsifier_ok(code, weights: dict[int, float], eps: float, base: dict[int, float] | None = None) -> bool:
    for w in code.codewords:
        target = sum(1.0 if base is None else base.get(i, 0.0) for i in range(code.length) if w >> i & 1)
        got = sum(v for i, v in weights.items() if w >> i & 1)
        if target == 0:
            if got != 0:
                return False
        elif not (1 - eps) * target * (1 - 1e-9) <= got <= (1 + eps) * target * (1 + 1e-9):
            return False
    return True


def rank_mod_p(rows, p: int) -> int:
    a = [list(int(x) % p for x in r) for r in rows]
    rank = 0
    cols = len(a[0]) if a else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][c], p - 2, p)
        a[rank] = [x * inv % p for x in a[rank]]
        for i in range(len(a)):
            if i != rank and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def zero_sum_triples_brute(vectors, independent, p: int) -> int:
    """Ordered triples of distinct positions summing to zero with a position in ``independent``."""
    ind = set(independent)
    v = [np.asarray(x) % p for x in vectors]
    count = 0
    for a, b, c in itertools.permutations(range(len(v)), 3):
        if (a in ind or b in ind or c in ind) and not ((v[a] + v[b] + v[c]) % p).any():
            count += 1
    return count


def entropy_bits(probs) -> float:
    return float(sum(-q * math.log2(q) for q in probs if q > 0))
