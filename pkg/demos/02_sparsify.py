"""Building and checking sparsifiers.

With the default constants both recursions stop at once on desk-sized codes and
return the full support.  Shrinking the constants lets the recursion actually
subsample; the three-block code below (NRD 3, 30000 coordinates) keeps enough
mass in every block for the sampled weights to stay accurate.

Run: python demos/02_sparsify.py
"""

from __future__ import annotations

import numpy as np

from sparsicode import BinaryCode
from sparsicode.code import cut_code, random_graph_edges
from sparsicode.sparsify import entropy_sparsifier, simple_sparsifier, verify_sparsifier

rng = np.random.default_rng(0)
graph = cut_code(16, random_graph_edges(16, 50, rng))
w = entropy_sparsifier(graph, 0.5, seed=1)
print(f"cut code of a 16-vertex graph: m = {graph.length}, support {len(w)}, "
      f"valid = {verify_sparsifier(graph, w, 0.5).valid}")

m = 30000
blocks = np.random.default_rng(7).integers(0, 3, size=m)
masks = [sum(1 << i for i in np.flatnonzero(blocks == b).tolist()) for b in range(3)]
code = BinaryCode(m, frozenset(sum(masks[b] for b in range(3) if k >> b & 1) for k in range(8)))

trace: list = []
w = simple_sparsifier(code, 0.9, seed=3, base_case=8, d0_factor=0.1, trace=trace)
print(f"three blocks, simple recursion with small constants: support {len(w)} of {m}, "
      f"valid = {verify_sparsifier(code, w, 0.9).valid}")
print("  levels:", [t["outcome"] for t in trace])

w = entropy_sparsifier(code, 0.9, seed=3, base_case=8, lam_scale=1e-4, nrd=3)
print(f"three blocks, entropy recursion with small constants: support {len(w)} of {m}, "
      f"valid = {verify_sparsifier(code, w, 0.9).valid}")
