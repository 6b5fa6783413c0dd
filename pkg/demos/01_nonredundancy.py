"""Non-redundancy, chain length and the OR-closure on a few small codes.

Run: python demos/01_nonredundancy.py
"""

from __future__ import annotations

from sparsicode import BinaryCode
from sparsicode.code import chain_length_exact, nrd_exact, or_closure, staircase_code, vc_dimension

codes = {
    "pairs of three": BinaryCode.from_strings(["110", "011", "101"]),
    "staircase m=6": staircase_code(6),
    "units + shared tail": BinaryCode.from_strings(["10001", "01001", "00101", "00011"]),
}

for name, code in codes.items():
    nrd = nrd_exact(code)
    cl = chain_length_exact(code)
    print(f"{name}: |C| = {len(code)}, m = {code.length}")
    print(f"  NRD = {nrd.value} on coordinates {nrd.witness.indices}")
    print(f"  VC of the OR-closure = {vc_dimension(or_closure(code))}")
    print(f"  chain length = {cl.value}, chain order {cl.witness.coords}")

# The staircase has a single non-redundant coordinate but a chain through every one,
# which is why weighted sparsification can be forced up to m coordinates.
