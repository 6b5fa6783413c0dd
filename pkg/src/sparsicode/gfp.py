"""Dense linear algebra over the prime field F_p."""

from __future__ import annotations

import numpy as np

from ._budget import InvalidInput


def _check_prime(p: int) -> None:
    if p < 2 or any(p % k == 0 for k in range(2, int(p**0.5) + 1)):
        raise InvalidInput(f"{p} is not prime")


def rref(mat, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form mod ``p`` and the pivot columns."""
    _check_prime(p)
    a = np.array(mat, dtype=np.int64) % p
    if a.ndim != 2:
        raise InvalidInput("rref expects a 2-d array")
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        others = np.flatnonzero(a[:, c])
        for k in others:
            if k != r:
                a[k] = (a[k] - a[k, c] * a[r]) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank(mat, p: int) -> int:
    a = np.asarray(mat)
    if a.size == 0:
        return 0
    return len(rref(a, p)[1])


def kernel(mat, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of ``{x : mat x = 0}``, one vector per free column."""
    a = np.asarray(mat, dtype=np.int64)
    if a.size == 0:
        n = ncols if ncols is not None else (a.shape[1] if a.ndim == 2 else 0)
        return np.eye(n, dtype=np.int64)
    red, pivots = rref(a, p)
    n = red.shape[1]
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for r, c in enumerate(pivots):
            basis[k, c] = (-red[r, f]) % p
    return basis


def solve(mat, rhs, p: int) -> np.ndarray | None:
    """One solution of ``mat x = rhs`` mod ``p``, or ``None``."""
    a = np.asarray(mat, dtype=np.int64) % p
    b = np.asarray(rhs, dtype=np.int64).reshape(-1, 1) % p
    rows, cols = a.shape
    red, pivots = rref(np.hstack([a, b]), p)
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = red[r, cols]
    return x


def is_independent(vectors, p: int) -> bool:
    v = np.asarray(vectors, dtype=np.int64)
    if v.size == 0:
        return True
    return rank(v, p) == v.shape[0]


def span_elements(basis, p: int, limit: int = 1 << 22) -> np.ndarray:
    """All ``p^k`` combinations of the ``k`` basis rows."""
    b = np.asarray(basis, dtype=np.int64)
    k = b.shape[0]
    if p**k > limit:
        raise InvalidInput(f"span of dimension {k} over F_{p} exceeds {limit} elements")
    coeffs = np.array(np.meshgrid(*[np.arange(p)] * k, indexing="ij")).reshape(k, -1).T if k else np.zeros((1, 0), dtype=np.int64)
    return (coeffs @ b) % p if k else np.zeros((1, b.shape[1] if b.ndim == 2 else 0), dtype=np.int64)
