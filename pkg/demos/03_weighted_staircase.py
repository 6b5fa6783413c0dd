"""Weighted codes can need every coordinate.

The staircase code has NRD 1, yet under geometrically growing weights every
coordinate must keep its weight: dropping one breaks the approximation of the
word that first switches it on.

Run: python demos/03_weighted_staircase.py
"""

from __future__ import annotations

from sparsicode.code import staircase_chain, staircase_code
from sparsicode.sparsify import (
    chain_adversarial_weights,
    min_sparsifier_support,
    verify_sparsifier,
    weighted_sparsifier,
)

for m in (3, 5, 7):
    code = staircase_code(m)
    zeta = chain_adversarial_weights(code, staircase_chain(m), 0.5)
    w = weighted_sparsifier(code, zeta, 0.5, seed=m)
    k, _ = min_sparsifier_support(code, 0.5, base=zeta)
    print(f"m = {m}: weights {[round(v) for v in zeta.vector()]}")
    print(f"  sparsifier support {len(w)} (valid {verify_sparsifier(code, w, 0.5, base=zeta).valid}), "
          f"smallest possible {k}")
