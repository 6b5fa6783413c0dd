"""Sparsifier construction and verification for Boolean codes.

All constructors re-verify their output against every codeword before
returning, so a returned weight map is always valid; only its size is
subject to chance.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from ._budget import BudgetExceeded, InvalidInput, VerificationFailure
from .code import (
    BinaryCode,
    Chain,
    bits_of,
    low_weight_support,
    nrd_value,
    puncture,
    support,
    support_mask,
    unpack_words,
)
from .entropy import decompose

RATIO_RTOL = 1e-9
LP_RTOL = 1e-6
MAX_SUBSAMPLE_RETRIES = 64
MAX_REPLICATED_LENGTH = 1 << 20


@dataclass(frozen=True, eq=False)
class WeightMap:
    """Nonnegative coordinate weights; zero entries are not stored."""

    length: int
    weights: Mapping[int, float]

    def __post_init__(self) -> None:
        clean: dict[int, float] = {}
        for i, v in self.weights.items():
            i, v = int(i), float(v)
            if i < 0 or i >= self.length:
                raise InvalidInput(f"weight index {i} outside [0, {self.length})")
            if not math.isfinite(v) or v < 0:
                raise InvalidInput(f"weight {v} at {i} is not a nonnegative real")
            if v > 0:
                clean[i] = v
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    @classmethod
    def ones(cls, length: int, indices: Iterable[int] | None = None) -> WeightMap:
        idx = range(length) if indices is None else indices
        return cls(length, {i: 1.0 for i in idx})

    @classmethod
    def from_vector(cls, vec: Sequence[float]) -> WeightMap:
        return cls(len(vec), {i: float(v) for i, v in enumerate(vec) if v > 0})

    def support(self) -> tuple[int, ...]:
        return tuple(self.weights)

    def vector(self) -> np.ndarray:
        out = np.zeros(self.length)
        for i, v in self.weights.items():
            out[i] = v
        return out

    def scaled(self, alpha: float) -> WeightMap:
        return WeightMap(self.length, {i: alpha * v for i, v in self.weights.items()})

    def dot(self, word: int) -> float:
        return float(sum(v for i, v in self.weights.items() if (word >> i) & 1))

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class SparsifyReport:
    valid: bool
    worst_ratio_low: float
    worst_ratio_high: float
    offending_codeword: int | None
    support_size: int
    eps: float
    length: int


def verify_sparsifier(
    code: BinaryCode,
    w: WeightMap,
    eps: float,
    base: WeightMap | None = None,
    jobs: int = 1,
    rtol: float = RATIO_RTOL,
) -> SparsifyReport:
    """Check ``(1-eps)<base,c> <= <w,c> <= (1+eps)<base,c>`` for every codeword.

    Codewords with zero base weight must get exactly zero.  Ratios are
    compared with a relative slack ``rtol`` (default 1e-9) to absorb rounding.
    """
    if w.length != code.length or (base is not None and base.length != code.length):
        raise InvalidInput("weight map length does not match the code length")
    if not 0 < eps < 1:
        raise InvalidInput(f"eps must lie in (0, 1), got {eps}")
    words = code.words
    wv = w.vector()
    bv = np.ones(code.length) if base is None else base.vector()
    if words:
        chunks = [words[k : k + 2048] for k in range(0, len(words), 2048)]

        def run(chunk):
            mat = unpack_words(chunk, code.length).astype(float)
            return mat @ wv, mat @ bv

        if jobs > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                parts = list(pool.map(run, chunks))
        else:
            parts = [run(c) for c in chunks]
        vals = np.concatenate([p[0] for p in parts])
        targ = np.concatenate([p[1] for p in parts])
    else:
        vals = targ = np.zeros(0)
    pos = targ > 0
    bad = np.zeros(len(words), dtype=bool)
    bad[~pos] = vals[~pos] != 0
    lo = (1 - eps) * targ * (1 - rtol)
    hi = (1 + eps) * targ * (1 + rtol)
    bad[pos] = (vals[pos] < lo[pos]) | (vals[pos] > hi[pos])
    ratios = vals[pos] / targ[pos]
    offending = int(words[int(np.argmax(bad))]) if bad.any() else None
    return SparsifyReport(
        valid=not bad.any(),
        worst_ratio_low=float(ratios.min()) if ratios.size else 1.0,
        worst_ratio_high=float(ratios.max()) if ratios.size else 1.0,
        offending_codeword=offending,
        support_size=len(w),
        eps=eps,
        length=code.length,
    )


# ---------------------------------------------------------------------------
# size bounds


def simple_support_bound(nrd: int, size: int, m: int, eps: float) -> float:
    return min(m, 36.0 * nrd * math.log2(4 * size) * math.log2(2 * m) ** 3 / eps**2)


def entropy_support_bound(nrd: int, m: int, eps: float) -> float:
    return min(m, 800.0 * nrd * math.log2(4 * m) ** 6 / eps**2)


WEIGHTED_BOUND_CONSTANT = 4.0e7


def weighted_support_bound(nrd: int, m: int, eps: float, ratio: float) -> float:
    """``min(m, K (2 + ln(ratio)/(3 ln m)) NRD log2^6(4m) / eps^2)`` with ``K = 4e7``.

    The factor in parentheses counts weight buckets; each bucket pays the
    entropy bound at half the accuracy through a repetition code.
    """
    buckets = 2.0 + (math.log(ratio) / (3.0 * math.log(m)) if m > 1 else 0.0)
    return min(m, WEIGHTED_BOUND_CONSTANT * buckets * nrd * math.log2(4 * m) ** 6 / eps**2)


# ---------------------------------------------------------------------------
# subsampling step shared by the two recursive constructions


def _subsample(
    mat: np.ndarray,
    keep: np.ndarray,
    pool: np.ndarray,
    eps0: float,
    rng: np.random.Generator,
    retries: int,
) -> tuple[np.ndarray | None, int]:
    """Draw S from ``pool`` at rate 1/3 until ``keep`` plus 3x S approximates every weight.

    Returns the chosen mask (or ``None`` when every retry failed) and the
    number of draws used.
    """
    m = mat.shape[1]
    ham = mat.sum(axis=1)
    ham_keep = mat[:, keep].sum(axis=1)
    for attempt in range(1, retries + 1):
        pick = pool & (rng.random(m) < 1.0 / 3.0)
        if pick.sum() > m / 2:
            continue
        est = ham_keep + 3.0 * mat[:, pick].sum(axis=1)
        if np.all(est >= (1 - eps0) * ham) and np.all(est <= (1 + eps0) * ham):
            return pick, attempt
    return None, retries


def _ones_on_support(code: BinaryCode) -> dict[int, float]:
    return {i: 1.0 for i in support(code)}


def _finish(code: BinaryCode, weights: dict[int, float], eps: float, trace: list | None) -> WeightMap:
    wm = WeightMap(code.length, weights)
    report = verify_sparsifier(code, wm, eps)
    if not report.valid:
        if trace is not None:
            trace.append({"level": "final", "outcome": "verification failed; identity fallback"})
        wm = WeightMap(code.length, _ones_on_support(code))
        if not verify_sparsifier(code, wm, eps).valid:
            raise VerificationFailure("identity weights failed verification")
    return wm


# ---------------------------------------------------------------------------
# simple sparsifier


def simple_sparsifier(
    code: BinaryCode,
    eps: float,
    seed: int = 0,
    *,
    base_case: int = 36,
    d0_factor: float = 9.0,
    retries: int = MAX_SUBSAMPLE_RETRIES,
    trace: list | None = None,
) -> WeightMap:
    """Sparsifier with support ``O(NRD log|C| log^3 m / eps^2)``.

    Each level keeps the coordinates touched by low-weight codewords, keeps
    a third of the remaining coordinates with weight 3, and recurses on the
    kept third at a slightly smaller accuracy.  ``base_case`` and
    ``d0_factor`` default to the constants of the size guarantee; smaller
    values make the recursion bite on small inputs.
    """
    if not 0 < eps < 1:
        raise InvalidInput(f"eps must lie in (0, 1), got {eps}")
    rng = np.random.default_rng(seed)
    floor = eps / 4.0

    def level(sub: BinaryCode, e: float, depth: int) -> dict[int, float]:
        m = sub.length
        info = {"level": depth, "m": m, "size": len(sub), "eps": e}
        if trace is not None:
            trace.append(info)
        if support_mask(sub) == 0:
            info["outcome"] = "zero code"
            return {}
        if m <= base_case or e <= floor:
            info["outcome"] = "identity"
            return _ones_on_support(sub)
        eps0 = e / (2.0 * math.log2(2 * m))
        d0 = d0_factor * math.log2(4 * len(sub)) / eps0**2
        info.update(eps0=eps0, d0=d0)
        keep_idx = low_weight_support(sub, d0)
        keep = np.zeros(m, dtype=bool)
        keep[list(keep_idx)] = True
        smask = support_mask(sub)
        pool = np.array([bool((smask >> i) & 1) for i in range(m)]) & ~keep
        if not pool.any():
            info["outcome"] = "identity (nothing to subsample)"
            return _ones_on_support(sub)
        mat = sub.matrix().astype(np.int64)
        pick, used = _subsample(mat, keep, pool, eps0, rng, retries)
        info["draws"] = used
        if pick is None:
            info["outcome"] = "identity (retries exhausted)"
            return _ones_on_support(sub)
        chosen = np.flatnonzero(pick).tolist()
        info.update(kept=len(keep_idx), sampled=len(chosen), outcome="recurse")
        inner = level(puncture(sub, chosen), e - 2 * eps0, depth + 1)
        out = {int(i): 1.0 for i in keep_idx}
        for k, v in inner.items():
            out[chosen[k]] = 3.0 * v
        return out

    return _finish(code, level(code, eps, 0), eps, trace)


# ---------------------------------------------------------------------------
# entropy sparsifier


def entropy_parameters(m: int, eps: float, lam_scale: float = 400.0) -> tuple[float, float, float]:
    """``(eps0, lambda, d0)`` for one level on a code of length ``m``."""
    eps0 = eps / (2.0 * math.log2(4 * m))
    lam = lam_scale * math.log2(4 * m) ** 5 / eps**2
    d0 = 2.0 * lam * math.log2(4 * m)
    return eps0, lam, d0


def entropy_level_shrinks(m: int, eps: float, base_case: int = 800, lam_scale: float = 400.0) -> bool:
    """Whether a level of :func:`entropy_sparsifier` can drop any coordinate."""
    if m <= base_case:
        return False
    return entropy_parameters(m, eps, lam_scale)[2] < m


def entropy_sparsifier(
    code: BinaryCode,
    eps: float,
    seed: int = 0,
    *,
    nrd: int | None = None,
    base_case: int = 800,
    lam_scale: float = 400.0,
    retries: int = MAX_SUBSAMPLE_RETRIES,
    trace: list | None = None,
) -> WeightMap:
    """Sparsifier with support ``O(NRD log^6 m / eps^2)``.

    Codewords are split into weight bands; the low band's support is kept
    outright and each heavier band contributes the coordinates found by
    :func:`decompose`.  The rest is subsampled at rate 1/3 and the
    construction recurses.  ``nrd`` may be any upper bound on the
    non-redundancy; by default the exact value is used when it fits the
    exact-search cap and a cheap upper bound otherwise.
    """
    if not 0 < eps < 1:
        raise InvalidInput(f"eps must lie in (0, 1), got {eps}")
    rng = np.random.default_rng(seed)
    floor = eps / 4.0
    if nrd is None and entropy_level_shrinks(code.length, eps, base_case, lam_scale):
        nrd = nrd_value(code)[0]

    def level(sub: BinaryCode, e: float, depth: int) -> dict[int, float]:
        m = sub.length
        info = {"level": depth, "m": m, "size": len(sub), "eps": e}
        if trace is not None:
            trace.append(info)
        if support_mask(sub) == 0:
            info["outcome"] = "zero code"
            return {}
        if m <= base_case or e <= floor:
            info["outcome"] = "identity"
            return _ones_on_support(sub)
        eps0, lam, d0 = entropy_parameters(m, e, lam_scale)
        info.update(eps0=eps0, lam=lam, d0=d0)
        if d0 >= m:
            info["outcome"] = "identity (d0 >= m)"
            return _ones_on_support(sub)
        keep_set = set(low_weight_support(sub, d0))
        ell = math.ceil(math.log2(m / d0))
        for j in range(1, ell + 1):
            lo, hi = d0 * 2 ** (j - 1), d0 * 2**j
            band = BinaryCode(m, frozenset(w for w in sub.codewords if lo < w.bit_count() <= hi))
            if len(band) == 0:
                continue
            dec = decompose(band, hi, lam, seed=int(rng.integers(2**62)), nrd=nrd)
            keep_set.update(dec.indices)
        keep = np.zeros(m, dtype=bool)
        keep[sorted(keep_set)] = True
        smask = support_mask(sub)
        pool = np.array([bool((smask >> i) & 1) for i in range(m)]) & ~keep
        if not pool.any():
            info["outcome"] = "identity (nothing to subsample)"
            return _ones_on_support(sub)
        mat = sub.matrix().astype(np.int64)
        pick, used = _subsample(mat, keep, pool, eps0, rng, retries)
        info["draws"] = used
        if pick is None:
            info["outcome"] = "identity (retries exhausted)"
            return _ones_on_support(sub)
        chosen = np.flatnonzero(pick).tolist()
        info.update(kept=len(keep_set), sampled=len(chosen), outcome="recurse")
        inner = level(puncture(sub, chosen), e - 2 * eps0, depth + 1)
        out = {int(i): 1.0 for i in keep_set}
        for k, v in inner.items():
            out[chosen[k]] = 3.0 * v
        return out

    if support_mask(code) != 0 and nrd is not None and nrd == 0:
        raise InvalidInput("nrd = 0 is only valid for the zero code")
    return _finish(code, level(code, eps, 0), eps, trace)


# ---------------------------------------------------------------------------
# weighted sparsifier


def _fold_counts(zeta: np.ndarray, eps: float) -> tuple[np.ndarray, float]:
    unit = eps * zeta.min() / 2.0
    return np.floor(zeta / unit).astype(np.int64), unit


def repetition_sparsifier(
    code: BinaryCode,
    zeta: WeightMap,
    eps: float,
    seed: int = 0,
    *,
    nrd: int | None = None,
    trace: list | None = None,
    **entropy_kwargs,
) -> WeightMap:
    """Weighted sparsifier through a repetition code.

    Coordinate ``i`` is copied ``floor(2 zeta_i / (eps min zeta))`` times,
    the unweighted sparsifier runs on the copies at ``eps/2``, and the
    copies' weights are summed back, scaled by ``eps min zeta / 2``.
    """
    m = code.length
    zv = zeta.vector()
    if (zv <= 0).any():
        raise InvalidInput("zeta must be positive on every coordinate")
    smask = support_mask(code)
    if smask == 0:
        return WeightMap(m, {})
    if eps <= 1.0 / m:
        return WeightMap(m, {i: zv[i] for i in bits_of(smask)})
    counts, unit = _fold_counts(zv, eps)
    total = int(counts.sum())
    if total > 2 * m**6:
        raise InvalidInput(f"replicated length {total} exceeds 2 m^6 = {2 * m**6}")
    info = {"m": m, "replicated_length": total, "eps": eps}
    if trace is not None:
        trace.append(info)
    base_case = entropy_kwargs.get("base_case", 800)
    lam_scale = entropy_kwargs.get("lam_scale", 400.0)
    if not entropy_level_shrinks(total, eps / 2.0, base_case, lam_scale):
        # the unweighted sparsifier would return all-ones on the copies
        info["outcome"] = "identity on copies (not materialised)"
        return WeightMap(m, {i: unit * counts[i] for i in bits_of(smask)})
    if total > MAX_REPLICATED_LENGTH:
        raise BudgetExceeded(f"replicated length {total} exceeds {MAX_REPLICATED_LENGTH}")
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    blocks = [((1 << int(counts[i])) - 1) << int(offsets[i]) for i in range(m)]
    rep_words = set()
    for w in code.codewords:
        v = 0
        for i in bits_of(w):
            v |= blocks[i]
        rep_words.add(v)
    rep = BinaryCode(total, frozenset(rep_words))
    if nrd is None:
        nrd = nrd_value(code)[0]
    inner = entropy_sparsifier(rep, eps / 2.0, seed, nrd=nrd, **entropy_kwargs)
    info["outcome"] = "materialised"
    folded = np.zeros(m)
    owner = np.repeat(np.arange(m), counts)
    for j, v in inner.weights.items():
        folded[owner[j]] += v
    return WeightMap(m, {i: unit * folded[i] for i in range(m) if folded[i] > 0})


def weight_buckets(zeta: WeightMap) -> np.ndarray:
    """``floor(ln zeta_i / (3 ln m))`` per coordinate."""
    m = zeta.length
    zv = zeta.vector()
    return np.floor(np.log(zv) / (3.0 * math.log(m))).astype(np.int64)


def weighted_sparsifier(
    code: BinaryCode,
    zeta: WeightMap,
    eps: float,
    seed: int = 0,
    *,
    trace: list | None = None,
    **entropy_kwargs,
) -> WeightMap:
    """Sparsifier for the weighted norm ``<zeta, c>``.

    Coordinates are grouped by the order of magnitude of their weight (in
    powers of ``m^3``).  A codeword's type is the heaviest group it touches;
    each group is sparsified, at ``eps/2``, only for the codewords of its own
    type and of the next type up, whose remaining mass is negligible.
    """
    if not 0 < eps < 1:
        raise InvalidInput(f"eps must lie in (0, 1), got {eps}")
    m = code.length
    if zeta.length != m or len(zeta) != m:
        raise InvalidInput("zeta must be positive on every coordinate")
    if eps <= 2.0 / m:
        if trace is not None:
            trace.append({"outcome": "eps <= 2/m: returning zeta"})
        return zeta
    t_of = weight_buckets(zeta)
    types: dict[int, int] = {}
    for w in code.codewords:
        if w:
            types[w] = int(max(t_of[i] for i in bits_of(w)))
    rng = np.random.default_rng(seed)
    out: dict[int, float] = {}
    for t in sorted(set(t_of.tolist())):
        coords = [i for i in range(m) if t_of[i] == t]
        members = [w for w, ty in types.items() if ty in (t, t + 1)]
        sub = puncture(BinaryCode(m, frozenset(members)), coords)
        sub_zeta = WeightMap(len(coords), {k: zeta.weights[i] for k, i in enumerate(coords)})
        info = {"bucket": t, "coords": len(coords), "codewords": len(sub)}
        if trace is not None:
            trace.append(info)
        part = repetition_sparsifier(
            sub, sub_zeta, eps / 2.0, seed=int(rng.integers(2**62)), trace=trace, **entropy_kwargs
        )
        for k, v in part.weights.items():
            out[coords[k]] = v
    wm = WeightMap(m, out)
    if not verify_sparsifier(code, wm, eps, base=zeta).valid:
        if trace is not None:
            trace.append({"outcome": "verification failed; returning zeta"})
        return zeta
    return wm


def chain_adversarial_weights(code: BinaryCode, chain: Chain, eps: float) -> WeightMap:
    """Weights ``lam^(l+1-i)`` on the chain coordinates (``lam = 4/(1-eps)``), ``1/m`` elsewhere.

    Under these weights every valid sparsifier must keep all chain coordinates.
    """
    if not chain.verify(code):
        raise InvalidInput("chain is not valid for this code")
    if not 0 < eps < 1:
        raise InvalidInput(f"eps must lie in (0, 1), got {eps}")
    m = code.length
    lam = 4.0 / (1.0 - eps)
    ell = len(chain)
    weights = {i: 1.0 / m for i in range(m)}
    for k, a in enumerate(chain.coords, start=1):
        weights[a] = lam ** (ell + 1 - k)
    return WeightMap(m, weights)


# ---------------------------------------------------------------------------
# exhaustive lower bounds


def has_sparsifier_on(
    code: BinaryCode, coords: Sequence[int], eps: float, base: WeightMap | None = None
) -> WeightMap | None:
    """A sparsifier supported inside ``coords`` if the LP finds one, else ``None``.

    The returned weights are valid up to a relative slack of 1e-6.
    """
    m = code.length
    bv = np.ones(m) if base is None else base.vector()
    words = code.nonzero_words()
    coords = list(coords)
    mat = unpack_words(words, m).astype(float) if words else np.zeros((0, m))
    targ = mat @ bv
    # codewords with zero target force their coordinates to weight zero
    banned = mat[targ == 0].any(axis=0) if (targ == 0).any() else np.zeros(m, dtype=bool)
    free = [j for j in coords if not banned[j]]
    rows = targ > 0
    a = mat[rows][:, free]
    t = targ[rows]
    if a.shape[0] == 0:
        return WeightMap(m, {})
    if not free:
        return None
    a_ub = np.vstack([a, -a])
    b_ub = np.concatenate([(1 + eps) * t, -(1 - eps) * t])
    res = linprog(np.zeros(len(free)), A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * len(free), method="highs")
    if res.status != 0:
        return None
    wm = WeightMap(m, {j: float(v) for j, v in zip(free, res.x) if v > 1e-12})
    # HiGHS works to a feasibility tolerance, so accept points valid to 1e-6 relative
    if not verify_sparsifier(code, wm, eps, base, rtol=LP_RTOL).valid:
        return None
    return wm


def min_sparsifier_support(
    code: BinaryCode, eps: float, base: WeightMap | None = None, max_length: int = 12
) -> tuple[int, WeightMap]:
    """Smallest support of a valid sparsifier, by exhaustive search over supports."""
    m = code.length
    if m > max_length:
        raise BudgetExceeded(f"exhaustive support search refused for m = {m} > {max_length}")
    for k in range(0, m + 1):
        for coords in itertools.combinations(range(m), k):
            wm = has_sparsifier_on(code, coords, eps, base)
            if wm is not None:
                return k, wm
    raise VerificationFailure("no valid sparsifier found, not even the identity")


def no_sparsifier_below(
    code: BinaryCode, k: int, eps: float, base: WeightMap | None = None, max_length: int = 12
) -> bool:
    """True when no valid sparsifier has support of size less than ``k``."""
    m = code.length
    if m > max_length:
        raise BudgetExceeded(f"exhaustive support search refused for m = {m} > {max_length}")
    if k <= 0:
        return True
    size = min(k - 1, m)
    return all(
        has_sparsifier_on(code, coords, eps, base) is None
        for coords in itertools.combinations(range(m), size)
    )
