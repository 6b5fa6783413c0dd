from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import csp_chain_brute, csp_nrd_brute, nonredundant_brute, nrd_brute, sat_brute
from sparsicode import BudgetExceeded, InvalidInput
from sparsicode.code import BinaryCode, chain_length_exact, nrd_exact
from sparsicode.csp import (
    CspInstance,
    GroupCode,
    Predicate,
    all_tuples,
    compile_polynomial,
    complement,
    csp_chain_length,
    csp_nrd,
    deduplicate_variables,
    enumerate_assignments,
    extended_bck,
    full_instance,
    gadget_conjoin,
    gadget_disjoin,
    gadget_project,
    gadget_restrict,
    group_code,
    group_code_from_table,
    is_conditionally_nonredundant,
    is_nonredundant_instance,
    kernelize,
    parse_predicate_name,
    predicate_catalog,
    random_group_code,
    sat_set,
    satisfiability_code,
    subgroup_elements,
    verify_chain_witness,
)

EQ = predicate_catalog("eq")
CUT = predicate_catalog("cut")
LIN3 = predicate_catalog("3lin", p=3)
LIN3S = predicate_catalog("3lin*", p=3)


def _tuples(*s: str) -> frozenset:
    return frozenset(tuple(int(ch) for ch in t) for t in s)


def _binary_predicates():
    """All 16 Boolean relations of arity 2."""
    pairs = list(all_tuples(2, 2))
    for mask in range(16):
        yield Predicate(2, 2, frozenset(p for k, p in enumerate(pairs) if mask >> k & 1))


# catalog


def test_catalog_examples():
    assert predicate_catalog("and", k=2).tuples == {(1, 1)}
    assert len(LIN3S) == 8 and (0, 0, 0) not in LIN3S
    assert predicate_catalog("bck").tuples == _tuples("111", "222", "012", "120", "201")
    assert predicate_catalog("bck+").tuples == _tuples("000", "111", "222", "012", "120", "201")
    assert predicate_catalog("or", r=3).tuples == frozenset(all_tuples(2, 3)) - {(0, 0, 0)}
    assert predicate_catalog("nae", r=3).tuples == frozenset(all_tuples(2, 3)) - {(0, 0, 0), (1, 1, 1)}
    assert CUT.tuples == _tuples("01", "10")


def test_lin_and_poly_families():
    lin = parse_predicate_name("lin:k=5,m=6,S=0|1")
    assert all(sum(t) % 6 in (0, 1) for t in lin.tuples)
    assert len(lin) == 1 + 5  # weights 0 and 1
    poly = parse_predicate_name("poly:p=3,r=3,f=(x1+x2+x3)*(x1+x2+x3-1)")
    assert len(poly) == 18
    star = parse_predicate_name("poly*:p=3,r=3,f=(x1+x2+x3)*(x1+x2+x3-1)")
    assert star.tuples == poly.tuples - {(0, 0, 0)}


def test_bad_catalog_requests():
    for bad in ("nope", "lin:k=3,m=2,S=0|1", "3lin", "poly:p=3,r=2,f=__import__('os')"):
        with pytest.raises(InvalidInput):
            parse_predicate_name(bad)
    with pytest.raises(InvalidInput):
        compile_polynomial("x3", 2)
    with pytest.raises(InvalidInput):
        Predicate(2, 2, frozenset({(0, 2)}))


def test_complement_examples():
    and2 = predicate_catalog("and", k=2)
    assert complement(and2).tuples == _tuples("00", "01", "10")
    assert complement(complement(LIN3)) == LIN3
    assert complement(predicate_catalog("or", r=2)).tuples == {(0, 0)}


def test_nontrivial():
    assert EQ.is_nontrivial()
    assert not Predicate(2, 1, frozenset({(0,), (1,)})).is_nontrivial()


# satisfiability code


def test_compile_examples():
    inst = CspInstance(2, ((0, 1),))
    assert satisfiability_code(inst, predicate_catalog("or", r=2)).to_strings() == ["0", "1"]
    assert satisfiability_code(CspInstance(2, ()), EQ).codewords == frozenset({0})
    tri = CspInstance(3, ((0, 1), (1, 2), (0, 2)))
    assert satisfiability_code(tri, EQ).to_strings() == ["001", "010", "100", "111"]


def test_assignment_order_and_budget():
    a = enumerate_assignments(2, 3)
    assert a[:4].tolist() == [[0, 0], [0, 1], [0, 2], [1, 0]]
    with pytest.raises(BudgetExceeded):
        enumerate_assignments(30, 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_sat_set_matches_brute(n, data):
    clauses = data.draw(st.lists(st.tuples(*[st.integers(0, n - 1)] * 2), max_size=6))
    inst = CspInstance(n, tuple(clauses))
    pred = data.draw(st.sampled_from(list(_binary_predicates())))
    got = {tuple(s) for s, ok in zip(enumerate_assignments(n, 2).tolist(), sat_set(inst, pred)) if ok}
    assert got == sat_brute(n, 2, clauses, pred.tuples)


def test_arity_mismatch_rejected():
    with pytest.raises(InvalidInput):
        satisfiability_code(CspInstance(3, ((0, 1, 2),)), EQ)
    with pytest.raises(InvalidInput):
        CspInstance(2, ((0, 5),))


# NRD and chain length of predicates


def test_csp_nrd_examples():
    res = csp_nrd(EQ, 3)
    assert res.value == 2
    assert is_nonredundant_instance(res.instance, EQ, res.witnesses)
    assert csp_nrd(Predicate(2, 1, frozenset({(1,)})), 3).value == 3
    assert csp_nrd(CUT, 3).value == 3


@pytest.mark.parametrize("pred", list(_binary_predicates()), ids=lambda p: "".join(map(str, sorted(p.tuples))))
def test_csp_nrd_matches_subset_brute_force(pred):
    res = csp_nrd(pred, 3)
    assert res.value == csp_nrd_brute(3, 2, 2, pred.tuples)
    assert nonredundant_brute(3, 2, list(res.instance.clauses), pred.tuples)


@pytest.mark.parametrize("pred", list(_binary_predicates())[1:15], ids=str)
def test_csp_chain_matches_brute_force(pred):
    res = csp_chain_length(pred, 3)
    assert res.value == csp_chain_brute(3, 2, 2, pred.tuples)
    assert verify_chain_witness(pred, res)
    assert res.value - 1 >= csp_nrd(pred, 3).value


def test_chain_of_trivial_predicate():
    full = Predicate(2, 2, frozenset(all_tuples(2, 2)))
    assert csp_chain_length(full, 3).value == 1


def test_chain_of_eq():
    assert csp_chain_length(EQ, 3).value - 1 >= 2


def test_code_view_of_chain_length():
    # longest chain over all satisfiability codes of instances equals CL(complement form) - 1
    for pred in [EQ, CUT, predicate_catalog("and", k=2)]:
        best = 0
        clauses = list(all_tuples(3, 2))
        for mask in range(1, 1 << len(clauses)):
            inst = CspInstance(3, tuple(c for k, c in enumerate(clauses) if mask >> k & 1))
            best = max(best, chain_length_exact(satisfiability_code(inst, pred)).value)
        assert best == csp_chain_length(complement(pred), 3).value - 1


def test_satisfiability_code_nrd_bounded_by_csp_nrd():
    # every instance, n = 3, r = 2, Boolean domain, with equality attained
    clauses = list(all_tuples(3, 2))
    for pred in list(_binary_predicates())[1:15]:
        target = csp_nrd(complement(pred), 3).value
        best = 0
        for mask in range(1, 1 << len(clauses)):
            inst = CspInstance(3, tuple(c for k, c in enumerate(clauses) if mask >> k & 1))
            v = nrd_exact(satisfiability_code(inst, pred), cap=None).value
            assert v <= target
            best = max(best, v)
        assert best == target


def test_csp_nrd_cap():
    with pytest.raises(BudgetExceeded):
        csp_nrd(LIN3S, 5, cap=64)


# conditional non-redundancy


def test_conditional_examples():
    assert is_conditionally_nonredundant(CspInstance(4, ()), LIN3S, LIN3).holds
    shared = CspInstance(4, ((0, 1, 2), (0, 1, 3)))
    assert not is_conditionally_nonredundant(shared, LIN3S, LIN3).holds


def test_conditional_requires_containment():
    with pytest.raises(InvalidInput):
        is_conditionally_nonredundant(CspInstance(3, ()), LIN3, LIN3S)


def test_conditional_witness_check_matches_search():
    inst = CspInstance(5, ((0, 1, 2), (2, 3, 4)))
    res = is_conditionally_nonredundant(inst, LIN3S, LIN3)
    assert res.holds
    assert is_conditionally_nonredundant(inst, LIN3S, LIN3, res.witnesses).holds
    bad = dict(res.witnesses)
    bad[0] = (1, 1, 1, 0, 0)
    assert not is_conditionally_nonredundant(inst, LIN3S, LIN3, bad).holds


def _distinct_clauses(n: int) -> tuple:
    return tuple(itertools.combinations(range(n), 3))


def _conditional_nrd_brute(n: int) -> int:
    clauses = _distinct_clauses(n)
    best = 0
    for mask in range(1, 1 << len(clauses)):
        sub = tuple(c for k, c in enumerate(clauses) if mask >> k & 1)
        if len(sub) > best and is_conditionally_nonredundant(CspInstance(n, sub), LIN3S, LIN3).holds:
            best = len(sub)
    return best


@pytest.mark.parametrize("n", [3, 4, 5])
def test_triangle_inequality_for_3lin_star(n):
    # NRD(P|Q) <= NRD(P) <= NRD(P|Q) + NRD(Q), all over clauses on distinct sorted variables
    inst = CspInstance(n, _distinct_clauses(n))
    cond = _conditional_nrd_brute(n)
    full = nrd_exact(satisfiability_code(inst, complement(LIN3S)), cap=None).value
    lin = nrd_exact(satisfiability_code(inst, complement(LIN3)), cap=None).value
    assert cond <= full <= cond + lin


# gadgets


def test_gadget_examples():
    assert gadget_project(LIN3S, [0, 1, 2]) == LIN3S
    bck = predicate_catalog("bck")
    swap = [1, 0, 2]
    inverse_cycle = [2, 0, 1]
    cycle = [1, 2, 0]
    footnote = _tuples("001", "020", "122", "202", "210")
    assert gadget_restrict(bck, [swap, inverse_cycle, swap]).tuples == footnote
    back = gadget_restrict(Predicate(3, 3, footnote), [swap, cycle, swap])
    assert back.tuples == bck.tuples
    and1 = predicate_catalog("and", k=1)
    assert gadget_conjoin(and1, and1).tuples == {(1,)}
    assert gadget_disjoin(and1, complement(and1)).tuples == {(0,), (1,)}


def test_gadget_incompatibility():
    with pytest.raises(InvalidInput):
        gadget_conjoin(EQ, LIN3)
    with pytest.raises(InvalidInput):
        gadget_project(EQ, [2])
    with pytest.raises(InvalidInput):
        gadget_restrict(EQ, [[0, 1]])


def test_projection_transfers_witness_instances():
    # a non-redundant instance of the projection lifts to one of the source by padding clauses
    src = predicate_catalog("nae", r=3)
    proj = gadget_project(src, [0, 1])
    res = csp_nrd(proj, 3)
    lifted = CspInstance(4, tuple(y + (3,) for y in res.instance.clauses))
    # pad variable fixed to a value that keeps projection semantics
    assert csp_nrd(src, 4, cap=None).value >= res.value
    assert len(lifted.clauses) == res.value


def test_restriction_nrd_not_larger_than_source():
    bck = predicate_catalog("bck")
    res = gadget_restrict(bck, [[1, 0, 2], [2, 0, 1], [1, 0, 2]])
    assert csp_nrd(res, 2, cap=None).value <= csp_nrd(bck, 2, cap=None).value


def test_deduplicate_variables():
    inst = CspInstance(2, ((0, 0), (0, 1)))
    out = deduplicate_variables(inst)
    assert out.n == 4 and out.clauses == ((0, 1), (0, 3))


# kernelization


def test_kernelize_examples():
    dup = CspInstance(2, ((0, 1), (0, 1)))
    assert kernelize(dup, EQ).clauses == ((0, 1),)
    tri = CspInstance(3, ((0, 1), (1, 2), (0, 2)))
    assert len(kernelize(tri, EQ).clauses) == 2


def test_shared_pair_is_removable_only_in_relaxed_sense():
    # exactly, both clauses can matter; under the 3LIN relaxation the pair shares two variables
    inst = CspInstance(4, ((0, 1, 2), (0, 1, 3)))
    assert len(kernelize(inst, LIN3S).clauses) == 2
    assert not is_conditionally_nonredundant(inst, LIN3S, LIN3).holds


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 6), st.data())
def test_kernelize_exact_and_structured_agree_on_sat(n, data):
    clauses = data.draw(st.lists(st.tuples(*[st.integers(0, n - 1)] * 3), min_size=1, max_size=8))
    inst = CspInstance(n, tuple(clauses))
    want = sat_brute(n, 3, clauses, LIN3S.tuples)
    for mode in ("exact", "structured"):
        out = kernelize(inst, LIN3S, mode=mode)
        assert sat_brute(n, 3, list(out.clauses), LIN3S.tuples) == want
        assert set(out.clauses) <= set(clauses)
        for k in range(len(out.clauses)):
            rest = [y for j, y in enumerate(out.clauses) if j != k]
            assert sat_brute(n, 3, rest, LIN3S.tuples) != want


def test_structured_mode_requires_3lin_star():
    with pytest.raises(InvalidInput):
        kernelize(CspInstance(2, ((0, 1),)), EQ, mode="structured")


# group codes


def test_group_code_examples():
    gc = GroupCode((2,), 3, ((1, 1, 0), (0, 1, 1)))
    code = group_code(gc)
    assert code.to_strings() == ["000", "011", "101", "110"]
    assert nrd_exact(code).value == 2
    assert group_code(GroupCode((3,), 4, ())).codewords == frozenset({0})
    assert group_code(GroupCode((4,), 2, ((2, 1),))).to_strings() == ["00", "01", "11"]


def test_group_code_product_and_table():
    gc = GroupCode((2, 3), 2, (((1, 0), (0, 1)),))
    assert len(subgroup_elements(gc)) == 6
    z3 = [[(a + b) % 3 for b in range(3)] for a in range(3)]
    code, order = group_code_from_table(z3, 2, [(1, 2)])
    assert order == 3 and code.to_strings() == ["00", "11"]


def test_group_code_from_nonabelian_table():
    perms = list(itertools.permutations(range(3)))
    idx = {p: k for k, p in enumerate(perms)}
    table = [[idx[tuple(a[b[i]] for i in range(3))] for b in perms] for a in perms]
    code, order = group_code_from_table(table, 2, [(1, 3), (3, 0)])
    assert 36 % order == 0 and len(code) <= order
    assert nrd_exact(code).value <= np.log2(order)


@pytest.mark.parametrize("seed", range(10))
def test_group_code_bounds(seed):
    gc, order = random_group_code(np.random.default_rng(seed), max_order=256)
    code = group_code(gc)
    assert nrd_brute(code) <= np.log2(order) + 1e-9
    assert chain_length_exact(code).value <= np.log2(order) + 1e-9


def test_extended_bck_contains_bck():
    ext = extended_bck()
    assert predicate_catalog("bck").tuples | {(2, 1, 0), (0, 0, 0)} == ext.tuples
    with pytest.raises(InvalidInput):
        extended_bck(5, (1, 1, 1))


def test_full_instance_size():
    assert len(full_instance(3, 2).clauses) == 9


def test_nonredundant_instance_detection():
    assert not is_nonredundant_instance(CspInstance(3, ((0, 1), (1, 2), (0, 2))), EQ)
    assert is_nonredundant_instance(CspInstance(3, ((0, 1), (1, 2))), EQ)
    assert isinstance(satisfiability_code(CspInstance(1, ((0, 0),)), EQ), BinaryCode)
