"""Pure-Python equitable-refinement kernel.

Fallback twin of the compiled kernel in _refine.pyx; both must produce
byte-identical (colors, ncolors, trace) for the same graph and input
coloring.  A vertex signature is the flat integer sequence

    [color(v)] + for each relation r in (bidirected, out, in):
        [len(pairs)] + [c1, k1, c2, k2, ...]

with (neighbor color, count) pairs sorted by color.  Signatures are packed
as big-endian uint32 bytes; new colors are the ranks of the sorted distinct
keys.  Rounds repeat until the partition stops splitting.  The trace is an
FNV-1a 64-bit hash over the sorted keys and their multiplicities of every
splitting round, then the final color count; it is invariant under vertex
relabeling.
"""

from __future__ import annotations

import struct

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

BACKEND = "python"


class KernelGraph:
    """Adjacency under three relations, index-addressed."""

    __slots__ = ("n", "adj")

    def __init__(self, n: int, heads, flats):
        self.n = n
        self.adj = [
            [flat[heads_r[v] : heads_r[v + 1]] for v in range(n)]
            for heads_r, flat in zip(heads, flats)
        ]


def make_graph(n: int, heads, flats) -> KernelGraph:
    return KernelGraph(n, heads, flats)


def _mix(h: int, data: bytes) -> int:
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


def refine(g: KernelGraph, colors: list[int]) -> tuple[list[int], int, int]:
    n = g.n
    if n == 0:
        return [], 0, _mix(FNV_OFFSET, struct.pack(">I", 0))
    distinct = sorted(set(colors))
    remap = {c: i for i, c in enumerate(distinct)}
    colors = [remap[c] for c in colors]
    ncolors = len(distinct)
    trace = FNV_OFFSET
    adj = g.adj
    while ncolors < n:
        keys = []
        for v in range(n):
            sig = [colors[v]]
            for rel in range(3):
                nbr = adj[rel][v]
                if nbr:
                    cs = sorted(colors[w] for w in nbr)
                    pairs = []
                    prev = cs[0]
                    cnt = 1
                    for c in cs[1:]:
                        if c == prev:
                            cnt += 1
                        else:
                            pairs.append((prev, cnt))
                            prev = c
                            cnt = 1
                    pairs.append((prev, cnt))
                    sig.append(len(pairs))
                    for c, k in pairs:
                        sig.append(c)
                        sig.append(k)
                else:
                    sig.append(0)
            keys.append(struct.pack(">%dI" % len(sig), *sig))
        counts: dict[bytes, int] = {}
        for key in keys:
            counts[key] = counts.get(key, 0) + 1
        if len(counts) == ncolors:
            break
        ranks = {}
        for i, key in enumerate(sorted(counts)):
            ranks[key] = i
            trace = _mix(trace, key)
            trace = _mix(trace, struct.pack(">I", counts[key]))
        colors = [ranks[k] for k in keys]
        ncolors = len(counts)
    trace = _mix(trace, struct.pack(">I", ncolors))
    return colors, ncolors, trace
