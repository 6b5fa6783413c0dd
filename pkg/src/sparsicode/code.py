"""Boolean codes and their combinatorial parameters.

A codeword of length ``m`` is stored as a Python ``int`` whose bit ``i`` is
coordinate ``i``.  The textual form puts coordinate 0 first, so the string
``"100"`` is the integer 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._budget import DEFAULT_EXACT_CAP, Budget, BudgetExceeded, InvalidInput, make_budget

IndexSet = tuple[int, ...]


# ---------------------------------------------------------------------------
# bit helpers


def word_to_str(word: int, length: int) -> str:
    return "".join("1" if (word >> i) & 1 else "0" for i in range(length))


def str_to_word(text: str) -> int:
    word = 0
    for i, ch in enumerate(text):
        if ch == "1":
            word |= 1 << i
        elif ch != "0":
            raise InvalidInput(f"codeword {text!r} contains a character other than 0/1")
    return word


def bits_of(word: int) -> list[int]:
    """Coordinates set in ``word``, ascending."""
    out = []
    while word:
        low = word & -word
        out.append(low.bit_length() - 1)
        word ^= low
    return out


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def pack_rows(matrix: np.ndarray) -> list[int]:
    """Pack each row of a 0/1 matrix into an int (column ``k`` becomes bit ``k``)."""
    matrix = np.asarray(matrix, dtype=bool)
    if matrix.ndim != 2:
        raise InvalidInput("pack_rows expects a 2-d array")
    if matrix.shape[1] == 0:
        return [0] * matrix.shape[0]
    packed = np.packbits(matrix, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def unpack_words(words: Sequence[int], length: int) -> np.ndarray:
    """Inverse of :func:`pack_rows`; returns a ``(len(words), length)`` uint8 array."""
    nbytes = max(1, (length + 7) // 8)
    out = np.zeros((len(words), length), dtype=np.uint8)
    for r, w in enumerate(words):
        raw = np.frombuffer(w.to_bytes(nbytes, "little"), dtype=np.uint8)
        out[r] = np.unpackbits(raw, bitorder="little")[:length]
    return out


def as_index_set(indices: Iterable[int], length: int) -> IndexSet:
    out = tuple(sorted(set(int(i) for i in indices)))
    for i in out:
        if i < 0 or i >= length:
            raise InvalidInput(f"index {i} outside [0, {length})")
    return out


# ---------------------------------------------------------------------------
# core types


@dataclass(frozen=True)
class BinaryCode:
    """A set of length-``length`` bit-vectors (set semantics)."""

    length: int
    codewords: frozenset[int]

    def __post_init__(self) -> None:
        if not isinstance(self.length, (int, np.integer)) or self.length < 0:
            raise InvalidInput(f"code length must be a nonnegative integer, got {self.length!r}")
        object.__setattr__(self, "length", int(self.length))
        words = frozenset(int(w) for w in self.codewords)
        limit = 1 << self.length
        for w in words:
            if w < 0 or w >= limit:
                raise InvalidInput(f"codeword {w} does not fit in {self.length} bits")
        object.__setattr__(self, "codewords", words)

    @classmethod
    def from_strings(cls, words: Iterable[str], length: int | None = None) -> BinaryCode:
        words = list(words)
        if length is None:
            if not words:
                raise InvalidInput("length is required for an empty code")
            length = len(words[0])
        for w in words:
            if len(w) != length:
                raise InvalidInput(f"codeword {w!r} has length {len(w)}, expected {length}")
        return cls(length, frozenset(str_to_word(w) for w in words))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> BinaryCode:
        matrix = np.asarray(matrix)
        return cls(matrix.shape[1], frozenset(pack_rows(matrix != 0)))

    @cached_property
    def words(self) -> tuple[int, ...]:
        """Codewords in lexicographic order of their bit-strings."""
        return tuple(sorted(self.codewords, key=lambda w: word_to_str(w, self.length)))

    def to_strings(self) -> list[str]:
        return [word_to_str(w, self.length) for w in self.words]

    def matrix(self) -> np.ndarray:
        return unpack_words(self.words, self.length)

    def __len__(self) -> int:
        return len(self.codewords)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, str):
            return len(item) == self.length and str_to_word(item) in self.codewords
        return item in self.codewords

    def nonzero_words(self) -> tuple[int, ...]:
        return tuple(w for w in self.words if w)

    def restrict_weight(self, d: float) -> BinaryCode:
        """The subcode of codewords with Hamming weight at most ``d``."""
        return BinaryCode(self.length, frozenset(w for w in self.codewords if w.bit_count() <= d))

    def __repr__(self) -> str:
        shown = self.to_strings()
        if len(shown) > 8:
            shown = shown[:8] + ["..."]
        return f"BinaryCode(length={self.length}, size={len(self)}, codewords={shown})"


@dataclass(frozen=True)
class NonRedundancyWitness:
    """``witnesses[k]`` is a codeword equal to the unit vector at ``indices[k]`` on ``indices``."""

    indices: IndexSet
    witnesses: tuple[int, ...]

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.indices, self.witnesses))

    def verify(self, code: BinaryCode) -> bool:
        if len(self.indices) != len(self.witnesses):
            return False
        if len(set(self.indices)) != len(self.indices):
            return False
        if any(i < 0 or i >= code.length for i in self.indices):
            return False
        mask = mask_of(self.indices)
        return all(
            w in code.codewords and (w & mask) == (1 << i)
            for i, w in zip(self.indices, self.witnesses)
        )


@dataclass(frozen=True)
class Chain:
    """Coordinates ``a(1..l)`` and codewords ``c(1..l)`` forming a unit upper-triangular pattern."""

    coords: tuple[int, ...]
    witnesses: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.coords)

    def verify(self, code: BinaryCode) -> bool:
        if len(self.coords) != len(self.witnesses):
            return False
        if len(set(self.coords)) != len(self.coords) or len(set(self.witnesses)) != len(self.witnesses):
            return False
        if any(a < 0 or a >= code.length for a in self.coords):
            return False
        earlier = 0
        for a, c in zip(self.coords, self.witnesses):
            if c not in code.codewords or not (c >> a) & 1 or c & earlier:
                return False
            earlier |= 1 << a
        return True


class NrdResult(NamedTuple):
    value: int
    witness: NonRedundancyWitness


class ChainResult(NamedTuple):
    value: int
    witness: Chain


# ---------------------------------------------------------------------------
# elementary operations


def puncture(code: BinaryCode, keep: Iterable[int]) -> BinaryCode:
    """Restrict every codeword to ``keep`` (in ascending order)."""
    keep = as_index_set(keep, code.length)
    out = set()
    for w in code.codewords:
        v = 0
        for k, i in enumerate(keep):
            if (w >> i) & 1:
                v |= 1 << k
        out.add(v)
    return BinaryCode(len(keep), frozenset(out))


def support_mask(code: BinaryCode) -> int:
    mask = 0
    for w in code.codewords:
        mask |= w
    return mask


def support(code: BinaryCode) -> IndexSet:
    return tuple(bits_of(support_mask(code)))


def low_weight_support(code: BinaryCode, d: float) -> IndexSet:
    """Union of supports of the codewords of weight at most ``d``."""
    if d < 0:
        raise InvalidInput("d must be nonnegative")
    mask = 0
    for w in code.codewords:
        if w.bit_count() <= d:
            mask |= w
    return tuple(bits_of(mask))


def minimal_hitting_set(code: BinaryCode, order: Sequence[int] | None = None) -> IndexSet:
    """An inclusion-minimal set of coordinates meeting every nonzero codeword.

    Starts from the whole support and drops coordinates one at a time, in
    ``order`` (default: descending), whenever the rest still hits everything.
    """
    words = [w for w in code.codewords if w]
    current = support_mask(code)
    if order is None:
        order = sorted(bits_of(current), reverse=True)
    for i in order:
        if not (current >> i) & 1:
            continue
        trial = current & ~(1 << i)
        if all(w & trial for w in words):
            current = trial
    return tuple(bits_of(current))


def is_nonredundant_set(code: BinaryCode, indices: Iterable[int]) -> NonRedundancyWitness | None:
    """Witness that every unit pattern on ``indices`` occurs in ``code``, or ``None``."""
    idx = as_index_set(indices, code.length)
    mask = mask_of(idx)
    found: dict[int, int] = {}
    for w in code.words:
        part = w & mask
        if part and part & (part - 1) == 0:
            i = part.bit_length() - 1
            found.setdefault(i, w)
    if len(found) < len(idx):
        return None
    return NonRedundancyWitness(idx, tuple(found[i] for i in idx))


def _columns(words: Sequence[int], coords: Iterable[int]) -> dict[int, int]:
    """Column masks: bit ``r`` of ``col[j]`` says ``words[r]`` has a 1 at ``j``."""
    col = {j: 0 for j in coords}
    for r, w in enumerate(words):
        for j in bits_of(w):
            if j in col:
                col[j] |= 1 << r
    return col


def _check_cap(code: BinaryCode, cap: int | None, what: str) -> None:
    supp = support_mask(code).bit_count()
    if cap is not None and supp > cap:
        raise BudgetExceeded(f"{what}: support size {supp} exceeds the exact-search cap {cap}")


# ---------------------------------------------------------------------------
# exact searches


def nrd_exact(
    code: BinaryCode, budget: Budget | None = None, cap: int | None = DEFAULT_EXACT_CAP
) -> NrdResult:
    """Largest non-redundant coordinate set, by branch and bound.

    Coordinates with identical columns can never both belong to a
    non-redundant set, so only one representative per column is searched.
    A minimal hitting set seeds the incumbent.
    """
    _check_cap(code, cap, "nrd_exact")
    budget = make_budget(budget, "nrd_exact")
    words = code.nonzero_words()
    if not words:
        return NrdResult(0, NonRedundancyWitness((), ()))
    col = _columns(words, bits_of(support_mask(code)))
    reps: dict[int, int] = {}
    for j in sorted(col):
        reps.setdefault(col[j], j)
    # visit coordinates hit by few codewords first: they fail early
    cands = sorted(reps.values(), key=lambda j: (col[j].bit_count(), j))

    best_idx: list[int] = list(minimal_hitting_set(code))
    best_len = len(best_idx)

    chosen: list[int] = []

    def dfs(z: int, wit: list[int], cands: list[int]) -> None:
        nonlocal best_idx, best_len
        budget.tick()
        if len(chosen) > best_len:
            best_len = len(chosen)
            best_idx = list(chosen)
        room = min(len(cands), z.bit_count())
        if len(chosen) + room <= best_len:
            return
        for pos, j in enumerate(cands):
            if len(chosen) + min(len(cands) - pos, z.bit_count()) <= best_len:
                return
            cj = col[j]
            wj = z & cj
            new_z = z & ~cj
            new_wit = [w & ~cj for w in wit]
            new_wit.append(wj)
            rest = [
                k
                for k in cands[pos + 1 :]
                if col[k] & new_z and all(w & ~col[k] for w in new_wit)
            ]
            chosen.append(j)
            dfs(new_z, new_wit, rest)
            chosen.pop()

    full = (1 << len(words)) - 1
    dfs(full, [], cands)
    witness = is_nonredundant_set(code, best_idx)
    assert witness is not None, "internal error: incumbent is not non-redundant"
    return NrdResult(best_len, witness)


def nrd_lower_bound(code: BinaryCode, tries: int = 4, seed: int = 0) -> int:
    """Size of the largest of a few minimal hitting sets (each is non-redundant)."""
    best = len(minimal_hitting_set(code))
    supp = list(support(code))
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        order = [supp[k] for k in rng.permutation(len(supp))]
        best = max(best, len(minimal_hitting_set(code, order)))
    return best


def nrd_upper_bound(code: BinaryCode) -> int:
    """Cheap bound: each index of a non-redundant set needs its own support coordinate and codeword."""
    return min(support_mask(code).bit_count(), len(code.nonzero_words()))


def nrd_value(code: BinaryCode, cap: int | None = DEFAULT_EXACT_CAP) -> tuple[int, bool]:
    """``(value, exact)``: exact NRD when the search fits, else the cheap upper bound."""
    try:
        return nrd_exact(code, cap=cap).value, True
    except BudgetExceeded:
        return nrd_upper_bound(code), False


def chain_length_exact(
    code: BinaryCode, budget: Budget | None = None, cap: int | None = DEFAULT_EXACT_CAP
) -> ChainResult:
    """Longest chain, by memoised search over the set of still-alive codewords.

    Picking coordinate ``a`` with witness ``c`` leaves exactly the codewords
    that vanish at ``a``; the state is that surviving set.
    """
    _check_cap(code, cap, "chain_length_exact")
    budget = make_budget(budget, "chain_length_exact")
    words = code.nonzero_words()
    if not words:
        return ChainResult(0, Chain((), ()))
    col = _columns(words, bits_of(support_mask(code)))
    coords = sorted(col)
    memo: dict[int, tuple[int, int]] = {}

    def f(mask: int) -> int:
        if mask == 0:
            return 0
        hit = memo.get(mask)
        if hit is not None:
            return hit[0]
        budget.tick()
        best, best_j = 0, -1
        ub = mask.bit_count()
        seen = set()
        for j in coords:
            cj = col[j] & mask
            if not cj:
                continue
            rem = mask & ~cj
            if rem in seen:
                continue
            seen.add(rem)
            if 1 + rem.bit_count() <= best:
                continue
            val = 1 + f(rem)
            if val > best:
                best, best_j = val, j
                if best == ub:
                    break
        memo[mask] = (best, best_j)
        return best

    full = (1 << len(words)) - 1
    value = f(full)
    a_seq, c_seq = [], []
    mask = full
    while mask and memo.get(mask, (0, -1))[0] > 0:
        j = memo[mask][1]
        hit = col[j] & mask
        r = (hit & -hit).bit_length() - 1
        a_seq.append(j)
        c_seq.append(words[r])
        mask &= ~col[j]
    chain = Chain(tuple(a_seq), tuple(c_seq))
    assert len(chain) == value and chain.verify(code)
    return ChainResult(value, chain)


def or_closure(code: BinaryCode, max_size: int = 1 << 20) -> BinaryCode:
    """Smallest OR-closed superset of ``code`` containing the zero word."""
    gens = sorted(set(code.codewords) - {0})
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x | g
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > max_size:
                        raise BudgetExceeded(f"or_closure: more than {max_size} codewords")
        frontier = nxt
    return BinaryCode(code.length, frozenset(seen))


def shattered_set(code: BinaryCode, budget: Budget | None = None) -> IndexSet:
    """A largest coordinate set on which ``code`` realizes every pattern."""
    budget = make_budget(budget, "vc_dimension")
    words = code.words
    n = len(words)
    if n <= 1:
        return ()
    m = code.length
    col = _columns(words, range(m))
    max_dim = (n).bit_length() - 1  # 2^k <= |C|
    best: list[int] = []
    chosen: list[int] = []

    def dfs(start: int, classes: list[int]) -> None:
        nonlocal best
        budget.tick()
        if len(chosen) > len(best):
            best = list(chosen)
        if len(chosen) >= max_dim:
            return
        for j in range(start, m):
            if len(chosen) + (m - j) <= len(best):
                return
            cj = col[j]
            new = []
            for k in classes:
                a, b = k & cj, k & ~cj
                if not a or not b:
                    break
                new.append(a)
                new.append(b)
            else:
                chosen.append(j)
                dfs(j + 1, new)
                chosen.pop()

    dfs(0, [(1 << n) - 1])
    return tuple(best)


def vc_dimension(code: BinaryCode, budget: Budget | None = None) -> int:
    return len(shattered_set(code, budget))


# ---------------------------------------------------------------------------
# code families


def identity_code(k: int) -> BinaryCode:
    return BinaryCode(k, frozenset(1 << i for i in range(k)))


def staircase_code(m: int) -> BinaryCode:
    """Prefix code ``{1^k 0^(m-k) : 1 <= k <= m}``; NRD 1, chain length m."""
    return BinaryCode(m, frozenset((1 << k) - 1 for k in range(1, m + 1)))


def staircase_chain(m: int) -> Chain:
    """The full-length chain of :func:`staircase_code`, heaviest prefix first."""
    return Chain(tuple(range(m - 1, -1, -1)), tuple((1 << k) - 1 for k in range(m, 0, -1)))


def linear_code(generators: Sequence[int], length: int, max_size: int = 1 << 20) -> BinaryCode:
    """GF(2) span of the given generator words."""
    basis: list[int] = []
    for g in generators:
        for b in basis:
            g = min(g, g ^ b)
        if g:
            basis.append(g)
    if (1 << len(basis)) > max_size:
        raise BudgetExceeded(f"linear_code: 2^{len(basis)} codewords exceed {max_size}")
    words = [0]
    for b in basis:
        words += [w ^ b for w in words]
    return BinaryCode(length, frozenset(words))


def gf2_rank(words: Sequence[int]) -> int:
    basis: list[int] = []
    for g in words:
        for b in basis:
            g = min(g, g ^ b)
        if g:
            basis.append(g)
    return len(basis)


def random_code(m: int, size: int, rng: np.random.Generator, density: float = 0.5) -> BinaryCode:
    """``size`` independent random words (fewer after set collapse)."""
    mat = rng.random((size, m)) < density
    return BinaryCode(m, frozenset(pack_rows(mat)))


def random_linear_code(k: int, m: int, rng: np.random.Generator) -> BinaryCode:
    gens = pack_rows(rng.random((k, m)) < 0.5)
    return linear_code(gens, m)


def cut_code(n_vertices: int, edges: Sequence[tuple[int, int]]) -> BinaryCode:
    """Cut patterns of a graph: coordinate ``e`` is 1 when edge ``e`` crosses the cut."""
    if n_vertices < 1:
        raise InvalidInput("a graph needs at least one vertex")
    if n_vertices > 26:
        raise BudgetExceeded("cut_code enumerates 2^(n-1) cuts; n > 26 refused")
    for u, v in edges:
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise InvalidInput(f"edge {(u, v)} out of range")
    n = n_vertices
    idx = np.arange(1 << (n - 1), dtype=np.int64)
    sides = ((idx[:, None] >> np.arange(n - 1)) & 1).astype(bool)
    sides = np.concatenate([np.zeros((len(idx), 1), dtype=bool), sides], axis=1)
    if not edges:
        return BinaryCode(0, frozenset({0}))
    e = np.asarray(edges, dtype=np.int64)
    crossing = sides[:, e[:, 0]] != sides[:, e[:, 1]]
    return BinaryCode(len(edges), frozenset(pack_rows(crossing)))


def cycle_edges(n: int) -> list[tuple[int, int]]:
    return [(i, (i + 1) % n) for i in range(n)]


def random_graph_edges(n: int, n_edges: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if n_edges > len(pairs):
        raise InvalidInput("more edges requested than vertex pairs")
    pick = rng.choice(len(pairs), size=n_edges, replace=False)
    return [pairs[k] for k in sorted(pick)]
