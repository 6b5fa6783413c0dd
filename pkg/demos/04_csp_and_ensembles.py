"""From predicates to codes, and the 3LIN* ensemble construction.

Run: python demos/04_csp_and_ensembles.py
"""

from __future__ import annotations

from sparsicode.csp import CspInstance, csp_nrd, kernelize, predicate_catalog, satisfiability_code
from sparsicode.ensemble import construct_3lin, degeneracy_check, ensemble_to_instance, verify_ensemble

eq = predicate_catalog("eq")
triangle = CspInstance(3, ((0, 1), (1, 2), (0, 2)))
print("EQ on a triangle compiles to", satisfiability_code(triangle, eq).to_strings())
print("  kernel keeps", kernelize(triangle, eq).clauses)
print("  NRD of EQ on 3 variables:", csp_nrd(eq, 3).value)

for t in (1, 2, 3):
    ens = construct_3lin(3, t)
    inst, _ = ensemble_to_instance(ens)
    deg = degeneracy_check(ens)
    print(f"t = {t}: {len(ens.vectors)} vectors in dimension {ens.dim}, {len(ens.edges)} triples, "
          f"valid {verify_ensemble(ens).valid}; instance with {inst.n} variables and "
          f"{len(inst.clauses)} clauses; min degree {deg.min_degree} <= {deg.bound:.1f}")
