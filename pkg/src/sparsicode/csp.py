"""Predicates, CSP instances and their satisfiability codes.

An instance ``(n, clauses)`` of ``CSP(R)`` compiles to the code whose
coordinates are clauses and whose codewords are the satisfaction patterns
of all ``|D|^n`` assignments.  Assignments are enumerated in lexicographic
order with variable 0 most significant.
"""

from __future__ import annotations

import ast
import itertools
import operator
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import gfp
from ._budget import BudgetExceeded, InvalidInput
from .code import BinaryCode, Chain, chain_length_exact, nrd_exact, pack_rows

DEFAULT_ASSIGNMENT_BITS = 24
DEFAULT_CLAUSE_CAP = 64


# ---------------------------------------------------------------------------
# predicates


@dataclass(frozen=True)
class Predicate:
    """A relation ``R`` contained in ``D^r`` with ``D = {0..domain_size-1}``."""

    domain_size: int
    arity: int
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self) -> None:
        if self.domain_size < 1 or self.arity < 0:
            raise InvalidInput("domain size must be >= 1 and arity >= 0")
        clean = set()
        for t in self.tuples:
            t = tuple(int(a) for a in t)
            if len(t) != self.arity:
                raise InvalidInput(f"tuple {t} does not have arity {self.arity}")
            if any(a < 0 or a >= self.domain_size for a in t):
                raise InvalidInput(f"tuple {t} leaves the domain 0..{self.domain_size - 1}")
            clean.add(t)
        object.__setattr__(self, "tuples", frozenset(clean))

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def is_nontrivial(self) -> bool:
        return 0 < len(self.tuples) < self.domain_size**self.arity

    def table(self) -> np.ndarray:
        """Membership indexed by the base-``|D|`` value of a tuple (first entry most significant)."""
        out = np.zeros(self.domain_size**self.arity, dtype=bool)
        for t in self.tuples:
            out[_flat(t, self.domain_size)] = True
        return out

    def __contains__(self, item: object) -> bool:
        return tuple(item) in self.tuples  # type: ignore[arg-type]

    def __len__(self) -> int:
        return len(self.tuples)


def _flat(t: Sequence[int], d: int) -> int:
    v = 0
    for a in t:
        v = v * d + a
    return v


def all_tuples(d: int, r: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(d), repeat=r)


def complement(pred: Predicate) -> Predicate:
    rest = frozenset(t for t in all_tuples(pred.domain_size, pred.arity) if t not in pred.tuples)
    return Predicate(pred.domain_size, pred.arity, rest)


_ARITH = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Pow: operator.pow,
    ast.Mod: operator.mod,
}


def compile_polynomial(expr: str, arity: int) -> Callable[[Sequence[int]], int]:
    """Integer polynomial in ``x1..xr`` from a string, evaluated without ``eval``."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise InvalidInput(f"cannot parse polynomial {expr!r}") from exc

    def check(node: ast.AST) -> None:
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp) and type(node.op) in _ARITH:
            check(node.left)
            check(node.right)
            if isinstance(node.op, ast.Pow) and not (
                isinstance(node.right, ast.Constant) and isinstance(node.right.value, int) and 0 <= node.right.value <= 64
            ):
                raise InvalidInput("exponents must be integer literals in [0, 64]")
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            check(node.operand)
        elif isinstance(node, ast.Constant) and isinstance(node.value, int):
            pass
        elif isinstance(node, ast.Name) and node.id.startswith("x") and node.id[1:].isdigit():
            if not 1 <= int(node.id[1:]) <= arity:
                raise InvalidInput(f"variable {node.id} outside x1..x{arity}")
        else:
            raise InvalidInput(f"unsupported syntax in polynomial: {ast.dump(node)[:40]}")

    check(tree)

    def ev(node: ast.AST, x: Sequence[int]) -> int:
        if isinstance(node, ast.Expression):
            return ev(node.body, x)
        if isinstance(node, ast.BinOp):
            return _ARITH[type(node.op)](ev(node.left, x), ev(node.right, x))
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand, x)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant):
            return node.value
        return x[int(node.id[1:]) - 1]

    return lambda x: ev(tree, x)


def _zero_sum(p: int) -> frozenset[tuple[int, int, int]]:
    return frozenset(t for t in all_tuples(p, 3) if sum(t) % p == 0)


def extended_bck(p: int = 3, g: tuple[int, int, int] | None = None) -> Predicate:
    """The eight patterns the 3LIN* ensemble functionals produce, for group elements ``g``.

    With ``g = (1, 1, 1)`` over Z/3 this is BCK together with ``210`` and ``000``.
    """
    g1, g2, g3 = g if g is not None else (1, 1, p - 2)
    if (g1 + g2 + g3) % p != 0 or 0 in (g1 % p, g2 % p, g3 % p):
        raise InvalidInput("g1, g2, g3 must be nonzero and sum to zero")
    raw = [
        (0, 0, 0),
        (0, g3, -g3),
        (-g1, 0, g1),
        (-g1, g3, g1 - g3),
        (-g2, -g1, -g3),
        (-g2, g2, 0),
        (g3, -g1, g1 - g3),
        (g3, g2, g1),
    ]
    return Predicate(p, 3, frozenset(tuple(a % p for a in t) for t in raw))


def predicate_catalog(name: str, **params) -> Predicate:
    """Named predicate families.

    ``or`` (r, d), ``and`` (k), ``nae`` (r), ``cut``, ``eq`` (d), ``3lin`` (p),
    ``3lin*`` (p), ``bck``, ``bck+``, ``bck-extended`` (p, g1, g2, g3),
    ``lin`` (k, m, S), ``poly`` / ``poly*`` (p, r, f).
    """
    key = name.strip().lower()

    def need(k, default=None):
        if k in params:
            return params[k]
        if default is None:
            raise InvalidInput(f"predicate {name!r} needs parameter {k!r}")
        return default

    def positive(v, what):
        v = int(v)
        if v < 1:
            raise InvalidInput(f"{what} must be a positive integer")
        return v

    if key == "or":
        r = positive(need("r", 2), "r")
        d = positive(need("d", 2), "d")
        return Predicate(d, r, frozenset(t for t in all_tuples(d, r) if any(t)))
    if key == "and":
        k = positive(need("k", 2), "k")
        return Predicate(2, k, frozenset({(1,) * k}))
    if key == "nae":
        r = positive(need("r", 3), "r")
        return Predicate(2, r, frozenset(t for t in all_tuples(2, r) if 0 < sum(t) < r))
    if key == "cut":
        return Predicate(2, 2, frozenset({(0, 1), (1, 0)}))
    if key == "eq":
        d = positive(need("d", 2), "d")
        return Predicate(d, 2, frozenset((a, a) for a in range(d)))
    if key in ("3lin", "3lin*"):
        p = positive(need("p"), "p")
        tup = _zero_sum(p)
        if key == "3lin*":
            tup = tup - {(0, 0, 0)}
        return Predicate(p, 3, tup)
    if key == "bck":
        return Predicate(3, 3, frozenset({(1, 1, 1), (2, 2, 2), (0, 1, 2), (1, 2, 0), (2, 0, 1)}))
    if key == "bck+":
        return Predicate(3, 3, frozenset({(0, 0, 0), (1, 1, 1), (2, 2, 2), (0, 1, 2), (1, 2, 0), (2, 0, 1)}))
    if key == "bck-extended":
        p = positive(need("p", 3), "p")
        if p < 3:
            raise InvalidInput("bck-extended needs p >= 3")
        g = None
        if any(k in params for k in ("g1", "g2", "g3")):
            g = (int(need("g1")), int(need("g2")), int(need("g3")))
        return extended_bck(p, g)
    if key == "lin":
        k = positive(need("k"), "k")
        mod = positive(need("m"), "m")
        s = need("S")
        s = {int(v) % mod for v in (s if isinstance(s, (list, tuple, set, frozenset)) else [s])}
        if not s or len(s) >= mod:
            raise InvalidInput("S must be a nonempty proper subset of residues")
        return Predicate(2, k, frozenset(t for t in all_tuples(2, k) if sum(t) % mod in s))
    if key in ("poly", "poly*"):
        p = positive(need("p"), "p")
        r = positive(need("r"), "r")
        f = need("f")
        if isinstance(f, str):
            f = compile_polynomial(f, r)
        tup = frozenset(t for t in all_tuples(p, r) if f(t) % p == 0)
        if key == "poly*":
            tup = tup - {(0,) * r}
        return Predicate(p, r, tup)
    raise InvalidInput(f"unknown predicate family {name!r}")


def parse_predicate_name(spec: str) -> Predicate:
    """Parse catalog strings such as ``3lin*:p=3`` or ``lin:k=5,m=6,S=0|1``."""
    name, _, rest = spec.partition(":")
    params: dict[str, object] = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise InvalidInput(f"malformed parameter {item!r} in {spec!r}")
            key, val = key.strip(), val.strip()
            if key == "S":
                params[key] = [int(v) for v in val.split("|") if v != ""]
            elif key == "f":
                params[key] = val
            else:
                try:
                    params[key] = int(val)
                except ValueError as exc:
                    raise InvalidInput(f"parameter {key} must be an integer, got {val!r}") from exc
    return predicate_catalog(name, **params)


# ---------------------------------------------------------------------------
# gadgets


def gadget_project(pred: Predicate, pi: Sequence[int]) -> Predicate:
    """``{(a_pi(1), ..., a_pi(s)) : a in R}``."""
    pi = [int(k) for k in pi]
    if any(k < 0 or k >= pred.arity for k in pi):
        raise InvalidInput("projection indices must lie in [0, arity)")
    return Predicate(pred.domain_size, len(pi), frozenset(tuple(t[k] for k in pi) for t in pred.tuples))


def gadget_restrict(pred: Predicate, maps: Sequence[Sequence[int]]) -> Predicate:
    """``{a in E^r : (f_1(a_1), ..., f_r(a_r)) in R}`` for maps ``f_k : E -> D`` given as lists."""
    if len(maps) != pred.arity:
        raise InvalidInput("need one map per argument position")
    sizes = {len(f) for f in maps}
    if len(sizes) != 1:
        raise InvalidInput("all maps must share the same source domain")
    e = sizes.pop()
    for f in maps:
        if any(v < 0 or v >= pred.domain_size for v in f):
            raise InvalidInput("map values must lie in the predicate's domain")
    out = frozenset(
        a for a in all_tuples(e, pred.arity) if tuple(maps[k][a[k]] for k in range(pred.arity)) in pred.tuples
    )
    return Predicate(e, pred.arity, out)


def _compatible(p: Predicate, q: Predicate) -> None:
    if p.domain_size != q.domain_size or p.arity != q.arity:
        raise InvalidInput("predicates must share domain and arity")


def gadget_conjoin(p: Predicate, q: Predicate) -> Predicate:
    _compatible(p, q)
    return Predicate(p.domain_size, p.arity, p.tuples & q.tuples)


def gadget_disjoin(p: Predicate, q: Predicate) -> Predicate:
    _compatible(p, q)
    return Predicate(p.domain_size, p.arity, p.tuples | q.tuples)


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class CspInstance:
    n: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidInput("variable count must be nonnegative")
        clauses = tuple(tuple(int(x) for x in y) for y in self.clauses)
        for y in clauses:
            if any(x < 0 or x >= self.n for x in y):
                raise InvalidInput(f"clause {y} uses a variable outside 0..{self.n - 1}")
        if len({len(y) for y in clauses}) > 1:
            raise InvalidInput("all clauses must have the same arity")
        object.__setattr__(self, "clauses", clauses)

    @property
    def arity(self) -> int | None:
        return len(self.clauses[0]) if self.clauses else None

    def subinstance(self, keep: Iterable[int]) -> CspInstance:
        return CspInstance(self.n, tuple(self.clauses[k] for k in keep))


def full_instance(n: int, r: int) -> CspInstance:
    """All ``n^r`` clauses, lexicographic."""
    return CspInstance(n, tuple(itertools.product(range(n), repeat=r)))


def deduplicate_variables(inst: CspInstance) -> CspInstance:
    """Give each argument position its own copy of every variable: ``x -> (x, k)``."""
    r = inst.arity or 0
    return CspInstance(inst.n * r, tuple(tuple(x * r + k for k, x in enumerate(y)) for y in inst.clauses))


def enumerate_assignments(n: int, d: int, max_bits: float = DEFAULT_ASSIGNMENT_BITS) -> np.ndarray:
    """All ``d^n`` assignments as rows, lexicographic with variable 0 most significant."""
    if d < 1:
        raise InvalidInput("domain must be nonempty")
    if n * np.log2(d) > max_bits + 1e-9:
        raise BudgetExceeded(f"{d}^{n} assignments exceed the 2^{max_bits} enumeration budget")
    total = d**n
    idx = np.arange(total, dtype=np.int64)
    out = np.zeros((total, n), dtype=np.int64)
    for k in range(n - 1, -1, -1):
        out[:, k] = idx % d
        idx //= d
    return out


def _check_arity(inst: CspInstance, pred: Predicate) -> None:
    if inst.clauses and inst.arity != pred.arity:
        raise InvalidInput(f"clause arity {inst.arity} differs from predicate arity {pred.arity}")


def clause_values(assignments: np.ndarray, inst: CspInstance, d: int) -> np.ndarray:
    """Flat base-``d`` index of ``sigma(y)`` for every assignment and clause."""
    if not inst.clauses:
        return np.zeros((assignments.shape[0], 0), dtype=np.int64)
    cl = np.asarray(inst.clauses, dtype=np.int64)
    out = np.zeros((assignments.shape[0], len(inst.clauses)), dtype=np.int64)
    for k in range(cl.shape[1]):
        out = out * d + assignments[:, cl[:, k]]
    return out


def satisfaction_matrix(
    inst: CspInstance, pred: Predicate, assignments: np.ndarray | None = None
) -> np.ndarray:
    """Boolean matrix: row = assignment, column = clause, entry = clause satisfied."""
    _check_arity(inst, pred)
    if assignments is None:
        assignments = enumerate_assignments(inst.n, pred.domain_size)
    return pred.table()[clause_values(assignments, inst, pred.domain_size)]


def satisfiability_code(inst: CspInstance, pred: Predicate) -> BinaryCode:
    """Code of length ``|Y|`` whose codewords are satisfaction patterns of all assignments."""
    sat = satisfaction_matrix(inst, pred)
    return BinaryCode(len(inst.clauses), frozenset(pack_rows(sat)))


def sat_set(inst: CspInstance, pred: Predicate, assignments: np.ndarray | None = None) -> np.ndarray:
    """Boolean vector over assignments: satisfies every clause."""
    return satisfaction_matrix(inst, pred, assignments).all(axis=1)


# ---------------------------------------------------------------------------
# non-redundancy and chains of predicates


class CspNrdResult(NamedTuple):
    value: int
    instance: CspInstance
    witnesses: tuple[tuple[int, ...], ...]


class CspChainResult(NamedTuple):
    value: int
    clauses: tuple[tuple[int, ...], ...]
    assignments: tuple[tuple[int, ...], ...]


def _falsifying_code(pred: Predicate, n: int, cap: int | None):
    full = full_instance(n, pred.arity)
    if cap is not None and len(full.clauses) > cap:
        raise BudgetExceeded(f"{len(full.clauses)} candidate clauses exceed the cap {cap}")
    assignments = enumerate_assignments(n, pred.domain_size)
    viol = ~satisfaction_matrix(full, pred, assignments)
    words = pack_rows(viol)
    return full, assignments, viol, words


def csp_nrd(pred: Predicate, n: int, cap: int | None = DEFAULT_CLAUSE_CAP) -> CspNrdResult:
    """Largest non-redundant instance of ``CSP(pred)`` on ``n`` variables.

    A clause set is non-redundant when each clause has an assignment that
    violates it and satisfies all the others; equivalently, it is a
    non-redundant coordinate set of the code of violation patterns over all
    ``n^r`` clauses.
    """
    full, assignments, viol, words = _falsifying_code(pred, n, cap)
    code = BinaryCode(len(full.clauses), frozenset(words))
    res = nrd_exact(code, cap=None)
    chosen = res.witness.indices
    witnesses = []
    for i, w in zip(chosen, res.witness.witnesses):
        row = words.index(w)
        witnesses.append(tuple(int(v) for v in assignments[row]))
    return CspNrdResult(res.value, full.subinstance(chosen), tuple(witnesses))


def csp_chain_length(pred: Predicate, n: int, cap: int | None = DEFAULT_CLAUSE_CAP) -> CspChainResult:
    """Longest chain of instances with strictly growing solution sets.

    Equals one plus the chain length of the violation-pattern code; the
    witness lists clauses ``y_i`` and assignments ``sigma_i`` with
    ``sigma_i`` satisfying ``y_1..y_(i-1)`` and violating ``y_i``.
    """
    full, assignments, viol, words = _falsifying_code(pred, n, cap)
    code = BinaryCode(len(full.clauses), frozenset(words))
    res = chain_length_exact(code, cap=None)
    clauses = tuple(full.clauses[a] for a in res.witness.coords)
    sigmas = tuple(tuple(int(v) for v in assignments[words.index(c)]) for c in res.witness.witnesses)
    return CspChainResult(res.value + 1, clauses, sigmas)


def verify_chain_witness(pred: Predicate, result: CspChainResult) -> bool:
    for i, (y, s) in enumerate(zip(result.clauses, result.assignments)):
        if tuple(s[x] for x in y) in pred.tuples:
            return False
        if any(tuple(s[x] for x in result.clauses[j]) not in pred.tuples for j in range(i)):
            return False
    return len(result.clauses) == result.value - 1


def is_nonredundant_instance(
    inst: CspInstance, pred: Predicate, witnesses: Sequence[Sequence[int]] | None = None
) -> bool:
    """Every clause has an assignment violating it alone."""
    _check_arity(inst, pred)
    if witnesses is not None:
        if len(witnesses) != len(inst.clauses):
            return False
        for k, s in enumerate(witnesses):
            vals = [tuple(s[x] for x in y) in pred.tuples for y in inst.clauses]
            if vals[k] or not all(v for j, v in enumerate(vals) if j != k):
                return False
        return True
    sat = satisfaction_matrix(inst, pred)
    unsat = (~sat).sum(axis=1)
    return all(bool(((~sat[:, k]) & (unsat == 1)).any()) for k in range(len(inst.clauses)))


class ConditionalCheck(NamedTuple):
    holds: bool
    witnesses: dict[int, tuple[int, ...]]
    failing_clause: int | None


def is_conditionally_nonredundant(
    inst: CspInstance,
    p: Predicate,
    q: Predicate,
    witnesses: Mapping[int, Sequence[int]] | Sequence[Sequence[int]] | None = None,
) -> ConditionalCheck:
    """Each clause ``y`` needs ``sigma_y`` with ``sigma_y(y)`` in Q minus P and every other clause in P.

    Supplied witnesses are checked directly; otherwise all assignments are
    enumerated.
    """
    if p.domain_size != q.domain_size or p.arity != q.arity:
        raise InvalidInput("P and Q must share domain and arity")
    if not p.tuples <= q.tuples:
        raise InvalidInput("P must be contained in Q")
    _check_arity(inst, p)
    diff = q.tuples - p.tuples
    m = len(inst.clauses)
    if witnesses is not None:
        wmap = dict(witnesses) if isinstance(witnesses, Mapping) else dict(enumerate(witnesses))
        found: dict[int, tuple[int, ...]] = {}
        for k, y in enumerate(inst.clauses):
            s = wmap.get(k)
            if s is None or len(s) != inst.n:
                return ConditionalCheck(False, found, k)
            if tuple(s[x] for x in y) not in diff:
                return ConditionalCheck(False, found, k)
            for j, y2 in enumerate(inst.clauses):
                if j != k and tuple(s[x] for x in y2) not in p.tuples:
                    return ConditionalCheck(False, found, k)
            found[k] = tuple(int(v) for v in s)
        return ConditionalCheck(True, found, None)
    if m == 0:
        return ConditionalCheck(True, {}, None)
    assignments = enumerate_assignments(inst.n, p.domain_size)
    vals = clause_values(assignments, inst, p.domain_size)
    in_p = p.table()[vals]
    in_diff = Predicate(p.domain_size, p.arity, diff).table()[vals]
    count_p = in_p.sum(axis=1)
    found = {}
    for k in range(m):
        rows = np.flatnonzero(in_diff[:, k] & (count_p == m - 1))
        if rows.size == 0:
            return ConditionalCheck(False, found, k)
        found[k] = tuple(int(v) for v in assignments[rows[0]])
    return ConditionalCheck(True, found, None)


# ---------------------------------------------------------------------------
# kernelization


def _is_3lin_star(pred: Predicate) -> int | None:
    p = pred.domain_size
    if pred.arity != 3 or p < 2:
        return None
    if any(p % k == 0 for k in range(2, int(p**0.5) + 1)):
        return None
    return p if pred.tuples == _zero_sum(p) - {(0, 0, 0)} else None


def _linear_system(n: int, clauses: Sequence[tuple[int, ...]], p: int) -> np.ndarray:
    mat = np.zeros((len(clauses), n), dtype=np.int64)
    for r, y in enumerate(clauses):
        for x in y:
            mat[r, x] += 1
    return mat % p


def kernelize(
    inst: CspInstance, pred: Predicate, mode: str = "exact", max_bits: float = DEFAULT_ASSIGNMENT_BITS
) -> CspInstance:
    """Drop clauses, in clause order, whose removal leaves the solution set unchanged.

    ``exact`` enumerates every assignment.  ``structured`` is available for
    3LIN* over a prime field: the solutions of the remaining clauses lie in
    the kernel of their linear system, so only that subspace is searched for
    an assignment violating the tested clause alone.  Both return a
    sub-instance with the same solution set and no removable clause.
    """
    _check_arity(inst, pred)
    if mode == "exact":
        sat = satisfaction_matrix(inst, pred, enumerate_assignments(inst.n, pred.domain_size, max_bits))
        kept = list(range(len(inst.clauses)))
        changed = True
        while changed:
            changed = False
            unsat = (~sat[:, kept]).sum(axis=1)
            for k in list(kept):
                if not ((~sat[:, k]) & (unsat == 1)).any():
                    kept.remove(k)
                    unsat -= ~sat[:, k]
                    changed = True
        return inst.subinstance(kept)
    if mode == "structured":
        p = _is_3lin_star(pred)
        if p is None:
            raise InvalidInput("structured kernelization needs 3LIN* over a prime field")
        kept = list(range(len(inst.clauses)))
        changed = True
        while changed:
            changed = False
            for k in list(kept):
                others = [inst.clauses[j] for j in kept if j != k]
                basis = gfp.kernel(_linear_system(inst.n, others, p), p, ncols=inst.n)
                if basis.shape[0] * np.log2(p) > max_bits + 1e-9:
                    raise BudgetExceeded("solution space of the linear relaxation is too large")
                space = gfp.span_elements(basis, p) if basis.shape[0] else np.zeros((1, inst.n), dtype=np.int64)
                if others:
                    ok = ~(np.stack([space[:, list(y)] for y in others], axis=1) == 0).all(axis=2)
                    ok = ok.all(axis=1)
                else:
                    ok = np.ones(space.shape[0], dtype=bool)
                y = list(inst.clauses[k])
                vals = space[:, y]
                bad = ((vals.sum(axis=1) % p) != 0) | (vals == 0).all(axis=1)
                if not (ok & bad).any():
                    kept.remove(k)
                    changed = True
        return inst.subinstance(kept)
    raise InvalidInput(f"unknown kernelization mode {mode!r}")


# ---------------------------------------------------------------------------
# group codes


@dataclass(frozen=True)
class GroupCode:
    """Subgroup of ``G^m`` generated by ``generators``, ``G`` a product of cyclic groups.

    Each generator is a length-``m`` sequence of group elements; an element
    is an int when there is one modulus and a tuple of ints otherwise.
    """

    moduli: tuple[int, ...]
    m: int
    generators: tuple

    def __post_init__(self) -> None:
        moduli = tuple(int(q) for q in self.moduli)
        if not moduli or any(q < 1 for q in moduli):
            raise InvalidInput("moduli must be positive integers")
        object.__setattr__(self, "moduli", moduli)
        gens = []
        for g in self.generators:
            if len(g) != self.m:
                raise InvalidInput(f"generator {g} does not have {self.m} coordinates")
            flat = []
            for e in g:
                comps = (e,) if isinstance(e, (int, np.integer)) else tuple(e)
                if len(comps) != len(moduli):
                    raise InvalidInput(f"element {e} does not match moduli {moduli}")
                flat.extend(int(c) % q for c, q in zip(comps, moduli))
            gens.append(tuple(flat))
        object.__setattr__(self, "generators", tuple(gens))


def subgroup_elements(gc: GroupCode, max_size: int = 1 << 16) -> list[tuple[int, ...]]:
    """Closure of the generators under addition (flattened coordinates)."""
    k = len(gc.moduli)
    mods = gc.moduli * gc.m
    zero = (0,) * (k * gc.m)
    seen = {zero}
    order = [zero]
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gc.generators:
                y = tuple((a + b) % q for a, b, q in zip(x, g, mods))
                if y not in seen:
                    seen.add(y)
                    order.append(y)
                    nxt.append(y)
                    if len(seen) > max_size:
                        raise BudgetExceeded(f"subgroup has more than {max_size} elements")
        frontier = nxt
    return order


def _pattern(elem: Sequence[int], m: int, k: int) -> int:
    w = 0
    for i in range(m):
        if any(elem[i * k : (i + 1) * k]):
            w |= 1 << i
    return w


def group_code(gc: GroupCode, max_size: int = 1 << 16) -> BinaryCode:
    """Non-identity pattern ``(1[h_i != 0])_i`` of every element of the generated subgroup."""
    k = len(gc.moduli)
    return BinaryCode(gc.m, frozenset(_pattern(h, gc.m, k) for h in subgroup_elements(gc, max_size)))


def group_code_from_table(
    table: Sequence[Sequence[int]], m: int, generators: Sequence[Sequence[int]], max_size: int = 1 << 16
) -> tuple[BinaryCode, int]:
    """Pattern code of a subgroup of ``G^m`` for a group given by its multiplication table.

    Returns the code and the subgroup order.
    """
    t = np.asarray(table, dtype=np.int64)
    size = t.shape[0]
    if t.shape != (size, size) or t.min() < 0 or t.max() >= size:
        raise InvalidInput("multiplication table must be square with entries in range")
    ident = [e for e in range(size) if (t[e] == np.arange(size)).all() and (t[:, e] == np.arange(size)).all()]
    if not ident:
        raise InvalidInput("multiplication table has no identity")
    e = ident[0]
    gens = [tuple(int(a) for a in g) for g in generators]
    for g in gens:
        if len(g) != m or any(a < 0 or a >= size for a in g):
            raise InvalidInput("generators must be m-tuples of group elements")
    start = (e,) * m
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple(int(t[a, b]) for a, b in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > max_size:
                        raise BudgetExceeded(f"subgroup has more than {max_size} elements")
        frontier = nxt
    words = frozenset(sum(1 << i for i, a in enumerate(h) if a != e) for h in seen)
    return BinaryCode(m, words), len(seen)


def random_group_code(rng: np.random.Generator, max_order: int = 1024) -> tuple[GroupCode, int]:
    """Random product-of-cyclic group code whose subgroup has at most ``max_order`` elements."""
    while True:
        k = int(rng.integers(1, 3))
        moduli = tuple(int(q) for q in rng.integers(2, 7, size=k))
        m = int(rng.integers(2, 9))
        ngen = int(rng.integers(1, 4))
        gens = []
        for _ in range(ngen):
            coords = []
            for _ in range(m):
                if rng.random() < 0.35:
                    coords.append(tuple(0 for _ in moduli))
                else:
                    coords.append(tuple(int(rng.integers(0, q)) for q in moduli))
            gens.append(tuple(c[0] if k == 1 else c for c in coords))
        gc = GroupCode(moduli, m, tuple(gens))
        try:
            order = len(subgroup_elements(gc, max_order))
        except BudgetExceeded:
            continue
        return gc, order
