"""JSON encodings of the library's value types.

Bit-strings put coordinate 0 leftmost.  All ``*_to_json`` functions return
plain dicts; :func:`dumps` renders them deterministically.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from typing import Any, Iterable, Mapping

from ._budget import InvalidInput
from .code import BinaryCode, Chain, NonRedundancyWitness, str_to_word, word_to_str
from .csp import CspInstance, Predicate
from .ensemble import Ensemble
from .entropy import CodeDistribution, CoordinateDistribution, Decomposition, DecompositionStep
from .sparsify import SparsifyReport, WeightMap


def dumps(obj: Any) -> str:
    """Compact, key-sorted JSON with a trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _plain(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _require(data: Mapping, *keys: str, what: str) -> None:
    if not isinstance(data, Mapping):
        raise InvalidInput(f"{what} JSON must be an object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise InvalidInput(f"{what} JSON is missing {', '.join(missing)}")


# codes and witnesses


def code_to_json(code: BinaryCode) -> dict:
    return {"length": code.length, "codewords": code.to_strings()}


def code_from_json(data: Mapping) -> BinaryCode:
    _require(data, "codewords", what="code")
    words = data["codewords"]
    if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
        raise InvalidInput("codewords must be a list of bit-strings")
    length = data.get("length")
    if length is None:
        if not words:
            raise InvalidInput("an empty code needs an explicit length")
        length = len(words[0])
    return BinaryCode.from_strings(words, int(length))


def nrd_witness_to_json(w: NonRedundancyWitness, length: int) -> dict:
    return {
        "indices": list(w.indices),
        "codewords": [word_to_str(c, length) for c in w.witnesses],
    }


def nrd_witness_from_json(data: Mapping) -> NonRedundancyWitness:
    _require(data, "indices", "codewords", what="witness")
    return NonRedundancyWitness(
        tuple(int(i) for i in data["indices"]), tuple(str_to_word(s) for s in data["codewords"])
    )


def chain_to_json(chain: Chain, length: int) -> dict:
    return {"coords": list(chain.coords), "codewords": [word_to_str(c, length) for c in chain.witnesses]}


def chain_from_json(data: Mapping) -> Chain:
    _require(data, "coords", "codewords", what="chain")
    return Chain(tuple(int(i) for i in data["coords"]), tuple(str_to_word(s) for s in data["codewords"]))


# weights and reports


def weights_to_json(w: WeightMap) -> dict:
    return {"length": w.length, "weights": {str(i): v for i, v in w.weights.items()}}


def weights_from_json(data: Mapping) -> WeightMap:
    _require(data, "length", "weights", what="weight map")
    raw = data["weights"]
    if isinstance(raw, list):
        return WeightMap.from_vector([float(v) for v in raw])
    try:
        return WeightMap(int(data["length"]), {int(k): float(v) for k, v in raw.items()})
    except (TypeError, ValueError, AttributeError) as exc:
        raise InvalidInput(f"malformed weight map: {exc}") from exc


def report_to_json(r: SparsifyReport) -> dict:
    out = asdict(r)
    out["offending_codeword"] = None if r.offending_codeword is None else word_to_str(r.offending_codeword, r.length)
    return out


# distributions


def code_distribution_to_json(d: CodeDistribution) -> dict:
    return {
        "length": d.length,
        "atoms": [[word_to_str(w, d.length), p] for w, p in sorted(d.atoms.items())],
    }


def code_distribution_from_json(data: Mapping) -> CodeDistribution:
    _require(data, "length", "atoms", what="distribution")
    return CodeDistribution(int(data["length"]), {str_to_word(w): float(p) for w, p in data["atoms"]})


def coordinate_distribution_to_json(d: CoordinateDistribution) -> dict:
    return {"length": d.length, "atoms": [[i, p] for i, p in sorted(d.atoms.items())]}


def coordinate_distribution_from_json(data: Mapping) -> CoordinateDistribution:
    _require(data, "length", "atoms", what="distribution")
    return CoordinateDistribution(int(data["length"]), {int(i): float(p) for i, p in data["atoms"]})


def decomposition_to_json(dec: Decomposition) -> dict:
    return {
        "indices": list(dec.indices),
        "case": dec.case,
        "d": dec.d,
        "lambda": dec.lam,
        "nrd": dec.nrd,
        "seed": dec.seed,
        "attempts": dec.attempts,
        "removed_counts": list(dec.removed_counts),
        "residual": code_to_json(dec.residual),
    }


def trace_to_jsonl(steps: Iterable[DecompositionStep]) -> str:
    """One JSON object per line: step, theta, removed count, sampled coordinate, potential."""
    return "".join(json.dumps(asdict(s), sort_keys=True) + "\n" for s in steps)


# predicates, instances, ensembles


def predicate_to_json(pred: Predicate) -> dict:
    return {"domain": pred.domain_size, "arity": pred.arity, "tuples": [list(t) for t in pred.sorted_tuples()]}


def predicate_from_json(data: Mapping) -> Predicate:
    _require(data, "domain", "arity", "tuples", what="predicate")
    return Predicate(int(data["domain"]), int(data["arity"]), frozenset(tuple(t) for t in data["tuples"]))


def instance_to_json(inst: CspInstance) -> dict:
    return {"n": inst.n, "clauses": [list(y) for y in inst.clauses]}


def instance_from_json(data: Mapping) -> CspInstance:
    _require(data, "n", "clauses", what="instance")
    return CspInstance(int(data["n"]), tuple(tuple(y) for y in data["clauses"]))


def ensemble_to_json(ens: Ensemble) -> dict:
    return {
        "p": ens.p,
        "dim": ens.dim,
        "vectors": [list(v) for v in ens.vectors],
        "edges": [list(e) for e in ens.edges],
        "functionals": [list(z) for z in ens.functionals],
    }


def ensemble_from_json(data: Mapping) -> Ensemble:
    _require(data, "p", "dim", "vectors", "edges", "functionals", what="ensemble")
    return Ensemble(
        int(data["p"]),
        int(data["dim"]),
        tuple(tuple(v) for v in data["vectors"]),
        tuple(tuple(e) for e in data["edges"]),
        tuple(tuple(z) for z in data["functionals"]),
    )


def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from exc
