"""Zero-sum vector ensembles over Z/p and their link to 3LIN* instances.

An ensemble is a list of vectors in (Z/p)^d, a list of ordered index
triples summing to zero, and one linear functional per triple that
vanishes on all three vectors of its own triple and on no other triple.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import gfp
from ._budget import InvalidInput, VerificationFailure
from .csp import CspInstance, is_conditionally_nonredundant, predicate_catalog


@dataclass(frozen=True)
class Ensemble:
    p: int
    dim: int
    vectors: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int, int], ...]
    functionals: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.p < 2:
            raise InvalidInput("modulus must be at least 2")
        vecs = tuple(tuple(int(a) % self.p for a in v) for v in self.vectors)
        funcs = tuple(tuple(int(a) % self.p for a in z) for z in self.functionals)
        edges = tuple(tuple(int(i) for i in e) for e in self.edges)
        if any(len(v) != self.dim for v in vecs) or any(len(z) != self.dim for z in funcs):
            raise InvalidInput(f"vectors and functionals must have dimension {self.dim}")
        if len(funcs) != len(edges):
            raise InvalidInput("need exactly one functional per edge")
        for e in edges:
            if len(e) != 3 or any(i < 0 or i >= len(vecs) for i in e):
                raise InvalidInput(f"edge {e} is not a triple of vector indices")
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "functionals", funcs)
        object.__setattr__(self, "edges", edges)

    def vector_array(self) -> np.ndarray:
        return np.asarray(self.vectors, dtype=np.int64).reshape(len(self.vectors), self.dim)

    def functional_array(self) -> np.ndarray:
        return np.asarray(self.functionals, dtype=np.int64).reshape(len(self.functionals), self.dim)

    def evaluations(self) -> np.ndarray:
        """``phi_e(v)`` for every edge ``e`` (rows) and vector ``v`` (columns)."""
        return (self.functional_array() @ self.vector_array().T) % self.p


class EnsembleCheck(NamedTuple):
    valid: bool
    kind: str | None
    edge: int | None
    other: int | None

    def __bool__(self) -> bool:
        return self.valid


def verify_ensemble(ens: Ensemble) -> EnsembleCheck:
    """Check the zero-sum property and that ``phi_e`` kills triple ``e'`` exactly when ``e' = e``."""
    if not ens.edges:
        return EnsembleCheck(True, None, None, None)
    vec = ens.vector_array()
    edges = np.asarray(ens.edges, dtype=np.int64)
    sums = (vec[edges[:, 0]] + vec[edges[:, 1]] + vec[edges[:, 2]]) % ens.p
    bad = np.flatnonzero(sums.any(axis=1))
    if bad.size:
        return EnsembleCheck(False, "nonzero-sum", int(bad[0]), None)
    phi = ens.evaluations()
    kills = (phi[:, edges[:, 0]] == 0) & (phi[:, edges[:, 1]] == 0) & (phi[:, edges[:, 2]] == 0)
    diag = np.diag(kills)
    if not diag.all():
        e = int(np.flatnonzero(~diag)[0])
        return EnsembleCheck(False, "own-triple-not-killed", e, e)
    np.fill_diagonal(kills, False)
    if kills.any():
        e, f = np.argwhere(kills)[0]
        return EnsembleCheck(False, "other-triple-killed", int(e), int(f))
    return EnsembleCheck(True, None, None, None)


def zero_sum_elements(q: int) -> tuple[int, int, int]:
    """Nonzero ``g1, g2, g3`` in Z/q with ``g1 + g2 + g3 = 0``."""
    if q < 3:
        raise InvalidInput("the group needs at least three elements")
    return 1, 1, q - 2


def construct_3lin(p: int, t: int) -> Ensemble:
    """Ensemble with ``3t^2`` vectors and ``t^3`` triples in dimension ``3t + 2``.

    Coordinates ``0..t-1``, ``t..2t-1`` and ``2t..3t-1`` form three index
    blocks; coordinates ``3t`` and ``3t+1`` are shared.  Each triple
    ``(i1, i2, i3)`` with one index per block contributes the edge
    ``(u[i1,i2], v[i2,i3], w[i1,i3])`` and the functional summing the
    coordinates ``i1, i2, i3, 3t, 3t+1``.
    """
    if t < 1:
        raise InvalidInput("t must be a positive integer")
    g1, g2, g3 = zero_sum_elements(p)
    d = 3 * t + 2
    a, b = 3 * t, 3 * t + 1
    blk1 = range(t)
    blk2 = range(t, 2 * t)
    blk3 = range(2 * t, 3 * t)

    def vec(entries: dict[int, int]) -> tuple[int, ...]:
        out = [0] * d
        for k, val in entries.items():
            out[k] = (out[k] + val) % p
        return tuple(out)

    vectors: list[tuple[int, ...]] = []
    u_idx, v_idx, w_idx = {}, {}, {}
    for i1, i2 in itertools.product(blk1, blk2):
        u_idx[i1, i2] = len(vectors)
        vectors.append(vec({i1: g1, i2: g2, a: g3}))
    for i2, i3 in itertools.product(blk2, blk3):
        v_idx[i2, i3] = len(vectors)
        vectors.append(vec({i2: -g2, i3: -g3, b: -g1}))
    for i1, i3 in itertools.product(blk1, blk3):
        w_idx[i1, i3] = len(vectors)
        vectors.append(vec({i1: -g1, i3: g3, a: -g3, b: g1}))
    edges, funcs = [], []
    for i1, i2, i3 in itertools.product(blk1, blk2, blk3):
        edges.append((u_idx[i1, i2], v_idx[i2, i3], w_idx[i1, i3]))
        funcs.append(vec({i1: 1, i2: 1, i3: 1, a: 1, b: 1}))
    return Ensemble(p, d, tuple(vectors), tuple(edges), tuple(funcs))


def ensemble_to_instance(ens: Ensemble) -> tuple[CspInstance, tuple[tuple[int, ...], ...]]:
    """Variables are vectors and clauses are triples; clause ``e`` gets the assignment ``x -> phi_e(v_x)``."""
    check = verify_ensemble(ens)
    if not check:
        raise InvalidInput(f"not a valid ensemble: {check.kind} at edge {check.edge}")
    inst = CspInstance(len(ens.vectors), ens.edges)
    if not ens.edges:
        return inst, ()
    phi = ens.evaluations()
    return inst, tuple(tuple(int(a) for a in row) for row in phi)


def _linear_system(inst: CspInstance, p: int) -> np.ndarray:
    mat = np.zeros((len(inst.clauses), inst.n), dtype=np.int64)
    for r, y in enumerate(inst.clauses):
        for x in y:
            mat[r, x] += 1
    return mat % p


def instance_to_ensemble(
    inst: CspInstance, p: int, witnesses: Sequence[Sequence[int]]
) -> Ensemble:
    """Build an ensemble from a conditionally non-redundant 3LIN*_p instance.

    The solutions of the linear relaxation form a subspace ``H``; with
    ``h_1..h_d`` its reduced-echelon basis, variable ``x`` becomes the
    vector ``(h_1[x], ..., h_d[x])`` and clause ``y`` gets the coordinates
    of its witness in that basis.  Variables mapping to the same vector
    are merged; the shortfall is made up with fresh unit vectors in extra
    coordinates so that the ensemble keeps one vector per variable.
    """
    gfp._check_prime(p)
    if inst.clauses and inst.arity != 3:
        raise InvalidInput("3LIN instances have arity 3")
    star = predicate_catalog("3lin*", p=p)
    full = predicate_catalog("3lin", p=p)
    cert = is_conditionally_nonredundant(inst, star, full, witnesses=list(witnesses))
    if not cert.holds:
        raise VerificationFailure(f"witness for clause {cert.failing_clause} does not certify conditional non-redundancy")
    if not inst.clauses:
        return Ensemble(p, 0, (), (), ())
    basis = gfp.kernel(_linear_system(inst, p), p, ncols=inst.n)
    d = basis.shape[0]
    columns = [tuple(int(a) for a in basis[:, x]) for x in range(inst.n)]
    index: dict[tuple[int, ...], int] = {}
    var_to_vec = []
    for col in columns:
        var_to_vec.append(index.setdefault(col, len(index)))
    funcs = []
    for s in witnesses:
        coeffs = gfp.solve(basis.T, np.asarray(s, dtype=np.int64), p)
        if coeffs is None:
            raise VerificationFailure("witness assignment lies outside the relaxation's solution space")
        funcs.append(tuple(int(a) for a in coeffs))
    vectors = list(index)
    pad = inst.n - len(vectors)
    if pad:
        vectors = [v + (0,) * pad for v in vectors]
        for k in range(pad):
            extra = [0] * (d + pad)
            extra[d + k] = 1
            vectors.append(tuple(extra))
        funcs = [z + (0,) * pad for z in funcs]
        d += pad
    edges = tuple(tuple(var_to_vec[x] for x in y) for y in inst.clauses)
    ens = Ensemble(p, d, tuple(vectors), edges, tuple(funcs))
    check = verify_ensemble(ens)
    if not check:
        raise VerificationFailure(f"constructed ensemble is invalid: {check.kind} at edge {check.edge}")
    return ens


def polynomial_bound(dim_u: int, p: int) -> int:
    """``C(dim_u + 2p - 2, 2p - 2)``: cap on the triples lying inside a subspace of dimension ``dim_u``."""
    if dim_u < 0 or p < 1:
        raise InvalidInput("dimension must be nonnegative and p positive")
    return math.comb(dim_u + 2 * p - 2, 2 * p - 2)


def span_dimension(vectors, p: int) -> int:
    v = np.asarray(vectors, dtype=np.int64)
    if v.size == 0:
        return 0
    return gfp.rank(v, p)


class TripleCount(NamedTuple):
    count: int
    bound: float
    holds: bool


def triple_count_check(vectors, independent: Sequence[int], p: int) -> TripleCount:
    """Zero-sum triples touching an independent subset, against ``6|V| log2 |V|``.

    ``independent`` lists positions in ``vectors``.  Triples are unordered
    sets of three distinct positions; the count is multiplied by six to
    count ordered triples.
    """
    v = np.asarray(vectors, dtype=np.int64) % p
    if v.ndim != 2:
        raise InvalidInput("vectors must be a 2-d array")
    n = v.shape[0]
    ind = sorted({int(i) for i in independent})
    if any(i < 0 or i >= n for i in ind):
        raise InvalidInput("independent positions out of range")
    if ind and not gfp.is_independent(v[ind], p):
        raise InvalidInput("the claimed independent subset is linearly dependent")
    bound = 6 * n * math.log2(n) if n > 1 else 0.0
    if not ind:
        return TripleCount(0, bound, True)
    in_i = np.zeros(n, dtype=bool)
    in_i[ind] = True
    where: dict[tuple[int, ...], list[int]] = {}
    keys = [tuple(row) for row in v.tolist()]
    for k, key in enumerate(keys):
        where.setdefault(key, []).append(k)
    count = 0
    for a in range(n):
        for b in range(a + 1, n):
            need = tuple(((-v[a] - v[b]) % p).tolist())
            for c in where.get(need, ()):
                if c > b and (in_i[a] or in_i[b] or in_i[c]):
                    count += 1
    return TripleCount(6 * count, bound, 6 * count <= bound)


def greedy_independent(vectors, p: int) -> list[int]:
    """Positions of a maximal independent subset, scanning in order."""
    chosen: list[int] = []
    v = np.asarray(vectors, dtype=np.int64)
    for k in range(v.shape[0]):
        if gfp.is_independent(v[chosen + [k]], p):
            chosen.append(k)
    return chosen


class DegeneracyCheck(NamedTuple):
    min_degree: int
    bound: float
    holds: bool
    rank: int
    independent: tuple[int, ...]


def degeneracy_check(ens: Ensemble) -> DegeneracyCheck:
    """Some vector lies in few triples.

    With ``I`` a maximal independent subset and ``U`` the span of the
    vectors, the smallest vertex degree must be at most
    ``max(3 * polynomial_bound(dim U) / |V|, 6 (|V| / |I|) log2 |V|)``.
    """
    n = len(ens.vectors)
    if n == 0:
        return DegeneracyCheck(0, 0.0, True, 0, ())
    deg = np.zeros(n, dtype=np.int64)
    for e in ens.edges:
        for x in e:
            deg[x] += 1
    ind = greedy_independent(ens.vector_array(), ens.p)
    rank = len(ind)
    poly = polynomial_bound(rank, ens.p)
    second = 6 * (n / rank) * math.log2(n) if rank and n > 1 else 0.0
    bound = max(3 * poly / n, second)
    low = int(deg.min())
    return DegeneracyCheck(low, bound, low <= bound, rank, tuple(ind))
