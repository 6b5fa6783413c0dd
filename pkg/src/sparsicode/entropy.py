"""Distributions over codewords, entropy amplification under OR, the
cover/sparse minimax dichotomy, sparse removal and random decomposition."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix, hstack

from ._budget import BudgetExceeded, InvalidInput, SolverError, SparsicodeError
from .code import BinaryCode, IndexSet, nrd_value, puncture

PROB_TOL = 1e-9
STRATEGY_TOL = 1e-7
GAP_TOL = 1e-6
GOLDEN = (3.0 - math.sqrt(5.0)) / 2.0


# ---------------------------------------------------------------------------
# distributions


def _clean_atoms(atoms: Mapping[int, float], what: str) -> dict[int, float]:
    out: dict[int, float] = {}
    total = 0.0
    for k, p in atoms.items():
        p = float(p)
        if not math.isfinite(p) or p < -PROB_TOL:
            raise InvalidInput(f"{what}: probability {p} is not a nonnegative real")
        if p > 0:
            out[int(k)] = p
            total += p
    if abs(total - 1.0) > PROB_TOL:
        raise InvalidInput(f"{what}: probabilities sum to {total}, not 1")
    return out


@dataclass(frozen=True, eq=False)
class CodeDistribution:
    """Probability distribution over codewords of length ``length``."""

    length: int
    atoms: Mapping[int, float]

    def __post_init__(self) -> None:
        atoms = _clean_atoms(self.atoms, "CodeDistribution")
        limit = 1 << self.length
        for w in atoms:
            if w < 0 or w >= limit:
                raise InvalidInput(f"codeword {w} does not fit in {self.length} bits")
        object.__setattr__(self, "atoms", atoms)

    def marginals(self) -> np.ndarray:
        """``E[c_i]`` for each coordinate ``i``."""
        out = np.zeros(self.length)
        for w, p in self.atoms.items():
            i = 0
            while w:
                if w & 1:
                    out[i] += p
                w >>= 1
                i += 1
        return out

    def max_marginal(self) -> float:
        return float(self.marginals().max()) if self.length else 0.0


@dataclass(frozen=True, eq=False)
class CoordinateDistribution:
    """Probability distribution over coordinates ``0..length-1``."""

    length: int
    atoms: Mapping[int, float]

    def __post_init__(self) -> None:
        atoms = _clean_atoms(self.atoms, "CoordinateDistribution")
        for i in atoms:
            if i < 0 or i >= self.length:
                raise InvalidInput(f"coordinate {i} outside [0, {self.length})")
        object.__setattr__(self, "atoms", atoms)

    def vector(self) -> np.ndarray:
        out = np.zeros(self.length)
        for i, p in self.atoms.items():
            out[i] = p
        return out

    def mass(self, word: int) -> float:
        """Probability that a drawn coordinate lies in the support of ``word``."""
        return sum(p for i, p in self.atoms.items() if (word >> i) & 1)


def uniform_code_distribution(code: BinaryCode) -> CodeDistribution:
    n = len(code)
    return CodeDistribution(code.length, {w: 1.0 / n for w in code.words})


def binary_entropy(x: float) -> float:
    if not (-1e-12 <= x <= 1 + 1e-12) or math.isnan(x):
        raise InvalidInput(f"binary entropy is defined on [0, 1], got {x}")
    x = min(max(x, 0.0), 1.0)
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def distribution_entropy(dist: CodeDistribution | CoordinateDistribution) -> float:
    return float(sum(-p * math.log2(p) for p in dist.atoms.values() if p > 0))


# ---------------------------------------------------------------------------
# OR powers


def _or_convolve(a: Mapping[int, float], b: Mapping[int, float]) -> dict[int, float]:
    out: dict[int, float] = defaultdict(float)
    for x, px in a.items():
        for y, py in b.items():
            out[x | y] += px * py
    return dict(out)


def _or_power_zeta(dist: CodeDistribution, n: int) -> dict[int, float]:
    """OR of ``n`` iid draws via the subset-sum transform on ``{0,1}^m``."""
    m = dist.length
    f = np.zeros(1 << m)
    for w, p in dist.atoms.items():
        f[w] += p
    idx = np.arange(1 << m)
    for i in range(m):
        has = (idx >> i) & 1 == 1
        f[has] += f[idx[has] ^ (1 << i)]
    f = f**n
    for i in range(m):
        has = (idx >> i) & 1 == 1
        f[has] -= f[idx[has] ^ (1 << i)]
    return {int(w): float(p) for w, p in enumerate(f) if p > 1e-15}


def or_power_distribution(
    dist: CodeDistribution, n: int, max_pairs: int = 50_000_000
) -> CodeDistribution:
    """Exact law of the coordinatewise OR of ``n`` independent draws from ``dist``."""
    if n < 1:
        raise InvalidInput("N must be a positive integer")
    support = len(dist.atoms)
    if support * support > max_pairs:
        if dist.length > 20:
            raise BudgetExceeded("or_power_distribution: support too large for pairwise convolution")
        atoms = _or_power_zeta(dist, n)
        total = sum(atoms.values())
        return CodeDistribution(dist.length, {w: p / total for w, p in atoms.items()})
    if n & (n - 1) == 0:
        acc = dict(dist.atoms)
        for _ in range(n.bit_length() - 1):
            if len(acc) ** 2 > max_pairs:
                raise BudgetExceeded("or_power_distribution: intermediate support too large")
            acc = _or_convolve(acc, acc)
    else:
        acc = dict(dist.atoms)
        for _ in range(n - 1):
            if len(acc) * support > max_pairs:
                raise BudgetExceeded("or_power_distribution: intermediate support too large")
            acc = _or_convolve(acc, dist.atoms)
    total = sum(acc.values())
    return CodeDistribution(dist.length, {w: p / total for w, p in acc.items()})


class SawinCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    p: float


def sawin_eligible(p: float, n: int) -> bool:
    return 1.0 - (1.0 - p) ** (n / 2.0) <= GOLDEN + 1e-12


def check_sawin_bound(dist: CodeDistribution, n: int) -> SawinCheck:
    """Compare ``H(OR of n draws)`` with ``H(D) h(1-(1-p)^n) / h(p)``.

    ``p`` is the largest coordinate mean of ``dist``; ``n`` must be a power
    of two and ``p`` small enough that ``1-(1-p)^(n/2)`` stays below
    ``(3-sqrt 5)/2``.
    """
    if n < 1 or n & (n - 1):
        raise InvalidInput(f"N must be a power of two, got {n}")
    p = dist.max_marginal()
    if not sawin_eligible(p, n):
        raise InvalidInput(
            f"precondition violated: p = {p!r} gives 1-(1-p)^(N/2) = "
            f"{1.0 - (1.0 - p) ** (n / 2.0)!r} > (3-sqrt5)/2"
        )
    h_a = distribution_entropy(dist)
    lhs = distribution_entropy(or_power_distribution(dist, n))
    hp = binary_entropy(p)
    rhs = 0.0 if hp == 0.0 else h_a * binary_entropy(1.0 - (1.0 - p) ** n) / hp
    return SawinCheck(lhs, rhs, lhs >= rhs - 1e-9, p)


# ---------------------------------------------------------------------------
# the cover / sparse game


@dataclass(frozen=True, eq=False)
class DichotomyResult:
    """Outcome of the coordinate-covering game on a code.

    Exactly one of ``cover`` and ``sparse`` is set.  ``game_value`` is the
    midpoint of the certified interval ``[value_low, value_high]``.
    """

    theta: float
    game_value: float
    value_low: float
    value_high: float
    cover: CoordinateDistribution | None = None
    sparse: CodeDistribution | None = None

    @property
    def kind(self) -> str:
        return "cover" if self.cover is not None else "sparse"

    @property
    def duality_gap(self) -> float:
        return self.value_high - self.value_low


def _normalise(x: np.ndarray) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    s = x.sum()
    if s <= 0:
        raise SolverError("LP returned an all-zero strategy")
    return x / s


def _solve_game(mat: csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Optimal mixed strategies for the row minimiser and column maximiser."""
    n, m = mat.shape
    # row player: min eta s.t. A^T P <= eta, sum P = 1
    c = np.zeros(n + 1)
    c[-1] = 1.0
    a_ub = hstack([mat.T.tocsr(), csr_matrix(-np.ones((m, 1)))]).tocsr()
    a_eq = csr_matrix(np.concatenate([np.ones(n), [0.0]])[None, :])
    bounds = [(0, None)] * n + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverError(f"row LP failed: {res.message}")
    p = _normalise(res.x[:n])
    # column player: max eta s.t. A Q >= eta, sum Q = 1
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_ub = hstack([-mat, csr_matrix(np.ones((n, 1)))]).tocsr()
    a_eq = csr_matrix(np.concatenate([np.ones(m), [0.0]])[None, :])
    bounds = [(0, None)] * m + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverError(f"column LP failed: {res.message}")
    q = _normalise(res.x[:m])
    return p, q


def solve_cover_or_sparse(code: BinaryCode, theta: float) -> DichotomyResult:
    """Return a ``theta``-cover of ``code`` if one exists, else a ``theta``-sparse distribution.

    A cover is a distribution on coordinates giving every codeword support
    mass at least ``1/theta``; a sparse distribution on codewords keeps every
    coordinate mean at most ``1/theta``.  Both optimal strategies are solved
    for, so the returned one carries a duality certificate.
    """
    if not theta >= 1.0:
        raise InvalidInput(f"theta must be >= 1, got {theta}")
    m = code.length
    if m < 1:
        raise InvalidInput("the covering game needs at least one coordinate")
    target = 1.0 / theta
    words = code.words
    if not words:
        cover = CoordinateDistribution(m, {i: 1.0 / m for i in range(m)})
        return DichotomyResult(theta, 1.0, 1.0, 1.0, cover=cover)
    if words == (0,):
        return DichotomyResult(theta, 0.0, 0.0, 0.0, sparse=CodeDistribution(m, {0: 1.0}))

    mat = csr_matrix(code.matrix().astype(float))
    p, q = _solve_game(mat)
    high = float((mat.T @ p).max())
    low = float((mat @ q).min())
    if high - low > GAP_TOL:
        raise SolverError(f"duality gap {high - low:.3g} exceeds {GAP_TOL}")
    mid = 0.5 * (high + low)
    if low >= target - 1e-9:
        cover = CoordinateDistribution(m, {i: float(v) for i, v in enumerate(q) if v > 0})
        if min(cover.mass(w) for w in words) < target - STRATEGY_TOL:
            raise SolverError("cover strategy failed re-verification")
        return DichotomyResult(theta, mid, low, high, cover=cover)
    sparse = CodeDistribution(m, {w: float(v) for w, v in zip(words, p) if v > 0})
    if sparse.max_marginal() > target + STRATEGY_TOL:
        raise SolverError("sparse strategy failed re-verification")
    return DichotomyResult(theta, mid, low, high, sparse=sparse)


def sparse_entropy_bound(nrd: int, m: int, theta: float) -> float:
    """Entropy bound ``3 log2(3 theta)/theta * NRD * log2(m+1)`` for theta-sparse distributions."""
    return 3.0 * math.log2(3.0 * theta) / theta * nrd * math.log2(m + 1)


@dataclass(frozen=True, eq=False)
class SparseRemoval:
    """``removed`` is the set S; ``cover`` is a theta-cover of the rest."""

    removed: frozenset[int]
    cover: CoordinateDistribution
    mixture: CodeDistribution | None
    rounds: int

    def __iter__(self):
        return iter((self.removed, self.cover))


def sparse_removal(code: BinaryCode, theta: float) -> SparseRemoval:
    """Peel off a small set S so that ``code`` minus S has a theta-cover.

    Keeps a mixture of theta-sparse distributions whose maximisers are
    exactly S; every round mixes in a fresh sparse distribution on the
    uncovered remainder with the largest weight that keeps S the argmax
    set, then adds the newly tied codewords to S.
    """
    m = code.length
    words = list(code.words)
    index = {w: k for k, w in enumerate(words)}
    first = solve_cover_or_sparse(code, theta)
    if first.cover is not None:
        return SparseRemoval(frozenset(), first.cover, None, 1)

    nu = np.array([first.sparse.atoms.get(w, 0.0) for w in words])
    top = nu.max()
    in_s = nu >= top * (1 - 1e-12) - 1e-15
    rounds = 1
    while True:
        rest = [w for k, w in enumerate(words) if not in_s[k]]
        res = solve_cover_or_sparse(BinaryCode(m, frozenset(rest)), theta)
        rounds += 1
        if res.cover is not None:
            removed = frozenset(w for k, w in enumerate(words) if in_s[k])
            mixture = CodeDistribution(m, {w: float(v) for w, v in zip(words, nu) if v > 0})
            return SparseRemoval(removed, res.cover, mixture, rounds)
        mu = np.zeros(len(words))
        for w, v in res.sparse.atoms.items():
            mu[index[w]] = v
        p = nu.max()
        rest_idx = np.flatnonzero(~in_s)
        gap = p - nu[rest_idx]
        qc = gap / (gap + mu[rest_idx])
        q = float(qc.min())
        nu = (1.0 - q) * nu + q * mu
        nu /= nu.sum()
        in_s[rest_idx[qc <= q * (1 + 1e-9) + 1e-15]] = True


# ---------------------------------------------------------------------------
# decomposition


@dataclass(frozen=True)
class DecompositionStep:
    step: int
    theta: float
    removed: int
    coordinate: int | None
    potential: float


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Coordinates ``indices`` whose removal leaves few distinct low-weight patterns.

    ``residual`` is the weight-at-most-``d`` subcode punctured to the
    complement of ``indices``.
    """

    indices: IndexSet
    removed_counts: tuple[int, ...]
    residual: BinaryCode
    d: float
    lam: float
    seed: int
    nrd: int
    case: str
    attempts: int
    trace: tuple[DecompositionStep, ...] = field(default=())

    def index_bound(self, m: int) -> float:
        return 2.0 * self.lam * self.nrd * math.log2(4 * m)

    def log2_residual_bound(self, m: int) -> float:
        return math.log2(m) + 3.0 * self.d * math.log2(2 * m) ** 2 / self.lam


class DecompositionFailed(SparsicodeError):
    def __init__(self, message: str, best: list[DecompositionStep] | None = None):
        super().__init__(message)
        self.best = best or []


MAX_DECOMPOSE_ATTEMPTS = 20


def _potential(words: list[int], alive: set[int], keep_mask: int) -> float:
    return float(sum(2.0 ** (words[k] & keep_mask).bit_count() for k in alive))


def decompose(
    code: BinaryCode,
    d: float,
    lam: float,
    seed: int = 0,
    nrd: int | None = None,
    max_attempts: int = MAX_DECOMPOSE_ATTEMPTS,
) -> Decomposition:
    """Find coordinates I such that the weight-at-most-``d`` codewords have few patterns off I.

    ``nrd`` may be any upper bound on the non-redundancy of ``code``; by
    default it is computed exactly when the exact search fits its cap and
    replaced by a cheap upper bound otherwise.
    """
    if d <= 0:
        raise InvalidInput("d must be positive")
    if lam < 1:
        raise InvalidInput("lambda must be >= 1")
    m = code.length
    low = code.restrict_weight(d)
    if nrd is None:
        nrd = nrd_value(code)[0]
    base = dict(d=d, lam=lam, seed=seed, nrd=nrd)

    if d >= lam * nrd:
        return Decomposition((), (), low, case="empty", attempts=0, **base)
    limit = 2.0 * lam * nrd * math.log2(4 * m)
    if m <= limit:
        return Decomposition(tuple(range(m)), (), puncture(low, ()), case="full", attempts=0, **base)

    theta = lam * nrd / d
    words = list(low.words)
    full_mask = (1 << m) - 1
    log_bound = math.log2(m) + 3.0 * d * math.log2(2 * m) ** 2 / lam
    best_trace: list[DecompositionStep] = []
    for attempt in range(max_attempts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, attempt]))
        alive = set(range(len(words)))
        chosen: list[int] = []
        keep_mask = full_mask
        counts: list[int] = []
        trace = [DecompositionStep(0, theta, 0, None, _potential(words, alive, keep_mask))]
        ok = True
        while alive:
            if len(chosen) + 1 > limit:
                ok = False
                break
            keep = [i for i in range(m) if (keep_mask >> i) & 1]
            groups: dict[int, list[int]] = defaultdict(list)
            for k in alive:
                v = 0
                for pos, i in enumerate(keep):
                    if (words[k] >> i) & 1:
                        v |= 1 << pos
                groups[v].append(k)
            sub = BinaryCode(len(keep), frozenset(groups))
            if not keep:
                removed = frozenset(groups)
                cover = None
            else:
                removed, cover = sparse_removal(sub, theta)
            counts.append(len(removed))
            for v in removed:
                alive.difference_update(groups[v])
            coord = None
            if alive:
                probs = cover.vector()
                pos = int(rng.choice(len(probs), p=probs / probs.sum()))
                coord = keep[pos]
                chosen.append(coord)
                keep_mask &= ~(1 << coord)
            trace.append(
                DecompositionStep(len(trace), theta, len(removed), coord, _potential(words, alive, keep_mask))
            )
        if len(trace) > len(best_trace):
            best_trace = trace
        if not ok:
            continue
        keep = [i for i in range(m) if (keep_mask >> i) & 1]
        residual = puncture(low, keep)
        if len(residual) > 0 and math.log2(len(residual)) > log_bound + 1e-9:
            continue
        return Decomposition(
            tuple(sorted(chosen)),
            tuple(counts),
            residual,
            case="loop",
            attempts=attempt + 1,
            trace=tuple(trace),
            **base,
        )
    raise DecompositionFailed(
        f"decompose: no successful attempt out of {max_attempts} (step limit {limit:.1f})", best_trace
    )
