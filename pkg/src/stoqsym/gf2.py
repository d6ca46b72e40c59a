"""GF(2) linear algebra on integer bitmasks.

A mask is an int whose bit i is coordinate i.  Used for generator ranks,
coset reduction of hypercube components, and sign-constraint solving.
"""

from __future__ import annotations

from typing import Iterable, Optional


def echelon_basis(vectors: Iterable[int]) -> list[int]:
    """Reduced row-echelon basis of the span, sorted by descending pivot bit.

    Every basis vector has a distinct leading (highest) bit and that bit is
    clear in all other basis vectors.
    """
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            if v & (1 << (b.bit_length() - 1)):
                v ^= b
        if v == 0:
            continue
        # clear the new pivot from existing rows, keep list sorted
        pivot = 1 << (v.bit_length() - 1)
        basis = [b ^ v if b & pivot else b for b in basis]
        basis.append(v)
        basis.sort(key=lambda b: -b)
    return basis


def rank(vectors: Iterable[int]) -> int:
    return len(echelon_basis(vectors))


def reduce_mask(x: int, basis: Iterable[int]) -> int:
    """Canonical coset representative of x modulo span(basis)."""
    for b in basis:
        if x & (1 << (b.bit_length() - 1)):
            x ^= b
    return x


def in_span(x: int, basis: Iterable[int]) -> bool:
    return reduce_mask(x, basis) == 0


def solve_parity(
    rows: list[int], rhs: list[int], n: int
) -> Optional[tuple[int, list[int]]]:
    """Solve popcount(c & rows[i]) mod 2 == rhs[i] for c over n bits.

    Returns (particular solution, nullspace basis) or None when inconsistent.
    """
    work = list(zip(rows, rhs))
    pivots: list[tuple[int, int, int]] = []  # (pivot_bit, row, rhs)
    for row, r in work:
        for pb, prow, pr in pivots:
            if row & (1 << pb):
                row ^= prow
                r ^= pr
        if row == 0:
            if r:
                return None
            continue
        pb = row.bit_length() - 1
        pivots = [
            (qb, qrow ^ row, qr ^ r) if qrow & (1 << pb) else (qb, qrow, qr)
            for qb, qrow, qr in pivots
        ]
        pivots.append((pb, row, r))
    c = 0
    for pb, row, r in pivots:
        if ((c & row).bit_count() & 1) != r:
            c ^= 1 << pb
    pivot_bits = {pb for pb, _, _ in pivots}
    null_basis = []
    for j in range(n):
        if j in pivot_bits:
            continue
        v = 1 << j
        for pb, row, _ in pivots:
            if (v & row).bit_count() & 1:
                v ^= 1 << pb
        null_basis.append(v)
    return c, null_basis
