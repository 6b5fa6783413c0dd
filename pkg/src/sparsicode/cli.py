"""Command-line interface: ``sparsicode <command> [options]``.

Exit status: 0 success, 1 invalid input, 2 budget exhausted, 3 a produced
or supplied sparsifier/ensemble failed verification.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from . import __version__
from . import io as jio
from ._budget import BudgetExceeded, InvalidInput, SparsicodeError, VerificationFailure
from .code import (
    BinaryCode,
    chain_length_exact,
    minimal_hitting_set,
    nrd_exact,
    nrd_upper_bound,
    or_closure,
    random_code,
    shattered_set,
    staircase_code,
)
from .csp import (
    GroupCode,
    csp_chain_length,
    csp_nrd,
    group_code,
    kernelize,
    parse_predicate_name,
    random_group_code,
    satisfiability_code,
)
from .ensemble import construct_3lin, ensemble_to_instance, verify_ensemble
from .entropy import DecompositionFailed
from .sparsify import (
    WeightMap,
    entropy_sparsifier,
    simple_sparsifier,
    verify_sparsifier,
    weighted_sparsifier,
)

RNG_NAME = "numpy.PCG64"
EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3


def _meta(seed: int | None = None) -> dict:
    out = {"tool": "sparsicode", "version": __version__}
    if seed is not None:
        out.update(rng=RNG_NAME, seed=seed)
    return out


def _eps(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _load_code(path: str) -> BinaryCode:
    return jio.code_from_json(jio.load_json(path))


def _load_predicate(spec: str):
    """A catalog name such as ``3lin*:p=3`` or a path to predicate JSON."""
    if spec.endswith(".json"):
        return jio.predicate_from_json(jio.load_json(spec))
    return parse_predicate_name(spec)


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.replace(";", ",").split(",") if v.strip()]


# ---------------------------------------------------------------------------
# command handlers: each returns (payload, exit status)


def cmd_nrd(a):
    code = _load_code(a.code)
    try:
        res = nrd_exact(code, cap=a.cap)
    except BudgetExceeded:
        if not a.allow_bound:
            raise
        return {"nrd": None, "upper_bound": nrd_upper_bound(code), "exact": False}, EXIT_BUDGET
    return {"nrd": res.value, "exact": True, "witness": jio.nrd_witness_to_json(res.witness, code.length)}, EXIT_OK


def cmd_cl(a):
    code = _load_code(a.code)
    res = chain_length_exact(code, cap=a.cap)
    return {"cl": res.value, "chain": jio.chain_to_json(res.witness, code.length)}, EXIT_OK


def cmd_vc(a):
    code = _load_code(a.code)
    s = shattered_set(code)
    return {"vc": len(s), "shattered": list(s)}, EXIT_OK


def cmd_or_closure(a):
    code = _load_code(a.code)
    return jio.code_to_json(or_closure(code, max_size=a.max_size)), EXIT_OK


def cmd_hitting_set(a):
    code = _load_code(a.code)
    h = minimal_hitting_set(code)
    return {"indices": list(h), "size": len(h)}, EXIT_OK


def _tuning(a) -> dict:
    out = {}
    for key in ("base_case", "lam_scale", "d0_factor"):
        val = getattr(a, key, None)
        if val is not None:
            out[key] = val
    return out


def cmd_sparsify(a):
    code = _load_code(a.code)
    trace: list = []
    tune = _tuning(a)
    if a.method == "simple":
        tune.pop("lam_scale", None)
        w = simple_sparsifier(code, a.eps, a.seed, trace=trace, **tune)
    else:
        tune.pop("d0_factor", None)
        w = entropy_sparsifier(code, a.eps, a.seed, trace=trace, **tune)
    rep = verify_sparsifier(code, w, a.eps, jobs=a.jobs)
    payload = {
        "method": a.method,
        "eps": a.eps,
        "weights": jio.weights_to_json(w),
        "report": jio.report_to_json(rep),
        "meta": _meta(a.seed),
    }
    if a.trace:
        payload["trace"] = trace
    return payload, EXIT_OK if rep.valid else EXIT_VERIFY


def cmd_wsparsify(a):
    code = _load_code(a.code)
    zeta = jio.weights_from_json(jio.load_json(a.weights))
    tune = _tuning(a)
    tune.pop("d0_factor", None)
    w = weighted_sparsifier(code, zeta, a.eps, a.seed, **tune)
    rep = verify_sparsifier(code, w, a.eps, base=zeta, jobs=a.jobs)
    payload = {
        "eps": a.eps,
        "weights": jio.weights_to_json(w),
        "report": jio.report_to_json(rep),
        "meta": _meta(a.seed),
    }
    return payload, EXIT_OK if rep.valid else EXIT_VERIFY


def cmd_verify(a):
    code = _load_code(a.code)
    data = jio.load_json(a.weights)
    if isinstance(data, dict) and "weights" in data and isinstance(data["weights"], dict) and "length" in data["weights"]:
        data = data["weights"]  # accept a sparsify output file directly
    w = jio.weights_from_json(data)
    base = jio.weights_from_json(jio.load_json(a.base)) if a.base else None
    rep = verify_sparsifier(code, w, a.eps, base=base, jobs=a.jobs)
    return jio.report_to_json(rep), EXIT_OK if rep.valid else EXIT_VERIFY


def cmd_csp_nrd(a):
    pred = _load_predicate(a.predicate)
    res = csp_nrd(pred, a.n, cap=a.cap)
    return {
        "nrd": res.value,
        "instance": jio.instance_to_json(res.instance),
        "witnesses": [list(s) for s in res.witnesses],
    }, EXIT_OK


def cmd_csp_cl(a):
    pred = _load_predicate(a.predicate)
    res = csp_chain_length(pred, a.n, cap=a.cap)
    return {
        "cl": res.value,
        "clauses": [list(y) for y in res.clauses],
        "assignments": [list(s) for s in res.assignments],
    }, EXIT_OK


def cmd_compile(a):
    inst = jio.instance_from_json(jio.load_json(a.instance))
    pred = _load_predicate(a.predicate)
    return jio.code_to_json(satisfiability_code(inst, pred)), EXIT_OK


def cmd_kernelize(a):
    inst = jio.instance_from_json(jio.load_json(a.instance))
    pred = _load_predicate(a.predicate)
    out = kernelize(inst, pred, mode=a.mode)
    payload = jio.instance_to_json(out)
    payload["removed"] = len(inst.clauses) - len(out.clauses)
    return payload, EXIT_OK


def cmd_gen(a):
    kind = a.kind
    if kind == "3lin-instance":
        inst, wit = ensemble_to_instance(construct_3lin(a.p, a.t))
        payload = jio.instance_to_json(inst)
        payload["predicate"] = f"3lin*:p={a.p}"
        payload["witnesses"] = [list(s) for s in wit]
        return payload, EXIT_OK
    if kind == "ensemble":
        return jio.ensemble_to_json(construct_3lin(a.p, a.t)), EXIT_OK
    if kind == "chain-code":
        return jio.code_to_json(staircase_code(a.m)), EXIT_OK
    if kind == "random-code":
        rng = np.random.Generator(np.random.PCG64(a.seed))
        payload = jio.code_to_json(random_code(a.m, a.size, rng, a.density))
        payload["meta"] = _meta(a.seed)
        return payload, EXIT_OK
    if kind == "group-code":
        if a.generators:
            gens = tuple(tuple(_ints(g)) for g in a.generators)
            gc = GroupCode(tuple(_ints(a.moduli)), a.m, gens)
            meta = _meta()
        else:
            gc, _ = random_group_code(np.random.Generator(np.random.PCG64(a.seed)))
            meta = _meta(a.seed)
        payload = jio.code_to_json(group_code(gc))
        payload["group"] = {"moduli": list(gc.moduli), "m": gc.m, "generators": [list(g) for g in gc.generators]}
        payload["meta"] = meta
        return payload, EXIT_OK
    if kind == "predicate":
        if not a.name:
            raise InvalidInput("gen predicate needs --name")
        return jio.predicate_to_json(parse_predicate_name(a.name)), EXIT_OK
    raise InvalidInput(f"unknown generator {kind!r}")


def cmd_ensemble_verify(a):
    ens = jio.ensemble_from_json(jio.load_json(a.ensemble))
    check = verify_ensemble(ens)
    payload = {
        "valid": check.valid,
        "violation": None if check.valid else {"kind": check.kind, "edge": check.edge, "other": check.other},
        "vectors": len(ens.vectors),
        "edges": len(ens.edges),
        "dim": ens.dim,
    }
    return payload, EXIT_OK if check.valid else EXIT_VERIFY


BENCH_COLUMNS = ["m", "size", "nrd", "cl", "support_simple", "support_entropy", "valid", "runtime"]


def _bench_row(m: int, size: int, seed: int, eps: float, tune: dict, timing: bool) -> dict:
    rng = np.random.Generator(np.random.PCG64(seed))
    code = random_code(m, size, rng)
    t0 = time.perf_counter()
    nrd = nrd_exact(code).value
    cl = chain_length_exact(code).value
    simple_kw = {k: v for k, v in tune.items() if k != "lam_scale"}
    ent_kw = {k: v for k, v in tune.items() if k != "d0_factor"}
    ws = simple_sparsifier(code, eps, seed, **simple_kw)
    we = entropy_sparsifier(code, eps, seed, nrd=nrd, **ent_kw)
    ok = verify_sparsifier(code, ws, eps).valid and verify_sparsifier(code, we, eps).valid
    elapsed = time.perf_counter() - t0
    return {
        "m": m,
        "size": len(code),
        "nrd": nrd,
        "cl": cl,
        "support_simple": len(ws),
        "support_entropy": len(we),
        "valid": int(ok),
        "runtime": f"{elapsed:.4f}" if timing else "",
    }


def cmd_bench(a):
    lengths = _ints(a.lengths)
    jobs_list = []
    seeds = np.random.SeedSequence(a.seed).spawn(len(lengths) * a.reps)
    k = 0
    for m in lengths:
        for _ in range(a.reps):
            jobs_list.append((m, min(a.size, 1 << m), int(seeds[k].generate_state(1, np.uint64)[0])))
            k += 1
    tune = _tuning(a)
    run = lambda job: _bench_row(job[0], job[1], job[2], a.eps, tune, not a.no_timing)  # noqa: E731
    if a.jobs > 1:
        with ThreadPoolExecutor(max_workers=a.jobs) as pool:
            rows = list(pool.map(run, jobs_list))
    else:
        rows = [run(j) for j in jobs_list]
    buf = _stdio.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    ok = all(r["valid"] for r in rows)
    return buf.getvalue(), EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sparsicode", description="Code and CSP sparsification toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--out", "-o", help="write output here instead of stdout")
        return p

    def tuning(p):
        g = p.add_argument_group("recursion constants (defaults follow the size guarantees)")
        g.add_argument("--base-case", type=int, dest="base_case")
        g.add_argument("--lam-scale", type=float, dest="lam_scale")
        g.add_argument("--d0-factor", type=float, dest="d0_factor")

    p = add("nrd", cmd_nrd, "non-redundancy of a code with a witness")
    p.add_argument("--code", required=True)
    p.add_argument("--cap", type=int, default=64, help="refuse exact search above this support size")
    p.add_argument("--allow-bound", action="store_true", help="report an upper bound when the budget runs out")

    p = add("cl", cmd_cl, "chain length of a code with a witness chain")
    p.add_argument("--code", required=True)
    p.add_argument("--cap", type=int, default=64)

    p = add("vc", cmd_vc, "VC dimension of a code")
    p.add_argument("--code", required=True)

    p = add("or-closure", cmd_or_closure, "closure of a code under coordinatewise OR")
    p.add_argument("--code", required=True)
    p.add_argument("--max-size", type=int, default=1 << 20)

    p = add("hitting-set", cmd_hitting_set, "inclusion-minimal set of coordinates meeting every nonzero codeword")
    p.add_argument("--code", required=True)

    p = add("sparsify", cmd_sparsify, "build and verify an eps-sparsifier")
    p.add_argument("--code", required=True)
    p.add_argument("--eps", type=_eps, required=True)
    p.add_argument("--method", choices=["simple", "entropy"], default="entropy")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trace", action="store_true", help="include the recursion trace")
    tuning(p)

    p = add("wsparsify", cmd_wsparsify, "sparsify a weighted code")
    p.add_argument("--code", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--eps", type=_eps, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--jobs", type=int, default=1)
    tuning(p)

    p = add("verify", cmd_verify, "check a weight map against a code")
    p.add_argument("--code", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--eps", type=_eps, required=True)
    p.add_argument("--base", help="weights of the norm being approximated (default all ones)")
    p.add_argument("--jobs", type=int, default=1)

    for name, fn, text in (
        ("csp-nrd", cmd_csp_nrd, "non-redundancy of a predicate on n variables"),
        ("csp-cl", cmd_csp_cl, "chain length of a predicate on n variables"),
    ):
        p = add(name, fn, text)
        p.add_argument("--predicate", required=True, help="catalog name like 3lin*:p=3, or predicate JSON")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--cap", type=int, default=64, help="maximum number of candidate clauses")

    p = add("compile", cmd_compile, "satisfiability code of an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--predicate", required=True)

    p = add("kernelize", cmd_kernelize, "sub-instance with the same solutions and no removable clause")
    p.add_argument("--instance", required=True)
    p.add_argument("--predicate", required=True)
    p.add_argument("--mode", choices=["exact", "structured"], default="exact")

    p = add("gen", cmd_gen, "generate fixtures")
    p.add_argument(
        "kind", choices=["3lin-instance", "ensemble", "chain-code", "random-code", "group-code", "predicate"]
    )
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--moduli", default="2")
    p.add_argument("--generators", nargs="*", help="comma-separated flattened generators")
    p.add_argument("--name", help="catalog predicate name")

    p = add("ensemble-verify", cmd_ensemble_verify, "check the ensemble invariants")
    p.add_argument("--ensemble", required=True)

    p = add("bench", cmd_bench, "sparsifier sizes against NRD and CL on random codes (CSV)")
    p.add_argument("--lengths", default="6,8,10")
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--reps", type=int, default=2)
    p.add_argument("--eps", type=_eps, default=0.5)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="leave the runtime column empty for reproducible output")
    tuning(p)
    return ap


def _emit(payload, out: str | None) -> None:
    text = payload if isinstance(payload, str) else jio.dumps(payload)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, status = args.func(args)
    except VerificationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (BudgetExceeded, DecompositionFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SparsicodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(payload, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
