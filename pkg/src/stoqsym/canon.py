"""Canonical labeling, isomorphism and automorphism generators for colored
directed graphs.

The engine is classic individualization-refinement: refine the color
partition to its coarsest equitable refinement, individualize one vertex of
the first smallest non-singleton cell, recurse, and pick the canonical leaf
as the minimum of (per-level refinement traces, labeled-graph bytes) over
all leaves.  Automorphisms are harvested whenever two leaves carry the same
labeled graph, and they prune sibling branches along the first search path:
siblings in one orbit of the already-found automorphisms that fix the path
prefix lead to mirror-image subtrees.  Harvested generators form a
stabilizer chain along the first path, so they generate the full
color-preserving automorphism group.

Certificates are header (color table with multiplicities) plus the
canonical labeled-graph bytes: equal certificate if and only if the graphs
are isomorphic by a color-preserving, direction-preserving bijection.

The refinement inner loop lives in a compiled kernel when available;
set STOQSYM_PURE=1 to force the pure-Python twin.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .termgraph import ColoredDigraph, TermVertex

if os.environ.get("STOQSYM_PURE"):
    from . import _refine_py as _kernel
else:
    try:
        from . import _refine as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _refine_py as _kernel

BACKEND = _kernel.BACKEND

_BIG = 1 << 30


def kernel_backend() -> str:
    """Name of the active refinement kernel ('compiled' or 'python')."""
    return BACKEND


@dataclass(frozen=True)
class Certificate:
    """Relabeling-invariant fingerprint; equality decides isomorphism."""

    data: bytes


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _color_key(color: tuple[str, Optional[Fraction]]):
    kind, value = color
    return (kind, value is not None, value if value is not None else Fraction(0))


def _color_token(color: tuple[str, Optional[Fraction]]) -> bytes:
    kind, value = color
    tail = b"-" if value is None else f"{value.numerator}/{value.denominator}".encode()
    return kind.encode() + b":" + tail


class IndexedGraph:
    """Flat integer view of a colored digraph, order-canonical by content.

    Vertices are sorted by (kind, label); colors are interned as the rank of
    (kind, value) among the sorted distinct colors.  Edges are split into a
    bidirected relation and a strictly directed one (plus its reverse) so
    the refinement kernel can tell them apart.
    """

    def __init__(self, vertices, colors, bi_pairs, out_pairs, header: bytes):
        self.vertices = vertices
        self.n = len(vertices)
        self.init_colors = colors
        self.bi_pairs = sorted(bi_pairs)
        self.out_pairs = sorted(out_pairs)
        self.bi_set = set(self.bi_pairs)
        self.out_set = set(self.out_pairs)
        self.header = header
        heads, flats = _adjacency(self.n, self.bi_pairs, self.out_pairs)
        self.kernel_graph = _kernel.make_graph(self.n, heads, flats)

    @classmethod
    def from_graph(cls, graph: ColoredDigraph) -> "IndexedGraph":
        vertices = graph.sorted_vertices()
        index = {v: i for i, v in enumerate(vertices)}
        table = sorted({v.color for v in vertices}, key=_color_key)
        color_id = {c: i for i, c in enumerate(table)}
        colors = [color_id[v.color] for v in vertices]
        bi_pairs = []
        out_pairs = []
        for a, b in graph.edges:
            ia, ib = index[a], index[b]
            if (b, a) in graph.edges:
                if ia < ib:
                    bi_pairs.append((ia, ib))
            else:
                out_pairs.append((ia, ib))
        counts = [0] * len(table)
        for c in colors:
            counts[c] += 1
        header = b";".join(
            _color_token(c) + b"*%d" % counts[i] for i, c in enumerate(table)
        )
        return cls(vertices, colors, bi_pairs, out_pairs, header)

    def verify_automorphism(self, perm: list[int]) -> bool:
        if sorted(perm) != list(range(self.n)):
            return False
        if any(self.init_colors[perm[v]] != self.init_colors[v] for v in range(self.n)):
            return False
        for a, b in self.bi_pairs:
            pa, pb = perm[a], perm[b]
            if (min(pa, pb), max(pa, pb)) not in self.bi_set:
                return False
        for a, b in self.out_pairs:
            if (perm[a], perm[b]) not in self.out_set:
                return False
        return True


def _adjacency(n, bi_pairs, out_pairs):
    lists = [[[] for _ in range(n)] for _ in range(3)]
    for a, b in bi_pairs:
        lists[0][a].append(b)
        lists[0][b].append(a)
    for a, b in out_pairs:
        lists[1][a].append(b)
        lists[2][b].append(a)
    heads = []
    flats = []
    for rel in range(3):
        head = [0] * (n + 1)
        flat = []
        for v in range(n):
            flat.extend(lists[rel][v])
            head[v + 1] = len(flat)
        heads.append(head)
        flats.append(flat)
    return heads, flats


def _labeled_bytes(ig: IndexedGraph, labels: list[int]) -> bytes:
    out = bytearray()
    out += ig.n.to_bytes(4, "big")
    bi = sorted(
        (min(labels[a], labels[b]), max(labels[a], labels[b])) for a, b in ig.bi_pairs
    )
    di = sorted((labels[a], labels[b]) for a, b in ig.out_pairs)
    out += len(bi).to_bytes(4, "big")
    for a, b in bi:
        out += a.to_bytes(4, "big") + b.to_bytes(4, "big")
    out += len(di).to_bytes(4, "big")
    for a, b in di:
        out += a.to_bytes(4, "big") + b.to_bytes(4, "big")
    return bytes(out)


def _individualize(colors: list[int], v: int) -> list[int]:
    cv = colors[v]
    return [
        c + 1 if (c > cv or (c == cv and w != v)) else c
        for w, c in enumerate(colors)
    ]


@dataclass
class CanonResult:
    certificate: Certificate
    labels: list[int]              # vertex index -> canonical position
    generators: list[list[int]]    # vertex permutations generating Aut
    leaf_count: int
    node_count: int


class _Search:
    def __init__(self, ig: IndexedGraph):
        self.ig = ig
        self.n = ig.n
        self.first_traces: Optional[tuple[int, ...]] = None
        self.first_bytes: Optional[bytes] = None
        self.first_labels: Optional[list[int]] = None
        self.best_traces: list[int] = []
        self.best_bytes: Optional[bytes] = None
        self.best_labels: Optional[list[int]] = None
        self.generators: list[list[int]] = []
        self.first_path: list[int] = []
        self.level_orbits: list[_UnionFind] = []
        self.cur_path: list[int] = []
        self.traces: list[int] = []
        self.leaf_count = 0
        self.node_count = 0

    def run(self) -> CanonResult:
        if self.n == 0:
            empty = _labeled_bytes(self.ig, [])
            return CanonResult(Certificate(self.ig.header + b"|" + empty), [], [], 1, 1)
        colors, ncolors, trace = _kernel.refine(self.ig.kernel_graph, self.ig.init_colors)
        self.traces.append(trace)
        self._node(colors, ncolors, True)
        assert self.best_bytes is not None and self.best_labels is not None
        cert = Certificate(self.ig.header + b"|" + self.best_bytes)
        return CanonResult(
            cert, self.best_labels, self.generators, self.leaf_count, self.node_count
        )

    # -- search tree -------------------------------------------------------

    def _node(self, colors: list[int], ncolors: int, on_first: bool) -> int:
        """DFS node; returns a backjump depth (< current) or _BIG."""
        self.node_count += 1
        depth = len(self.cur_path)
        if ncolors == self.n:
            return self._leaf(colors)

        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min((cnt, c) for c, cnt in counts.items() if cnt > 1)[1]
        members = [v for v in range(self.n) if colors[v] == target]

        if on_first:
            assert len(self.level_orbits) == depth
            self.level_orbits.append(_UnionFind(self.n))
            self.first_path.append(members[0])

        explored: list[int] = []
        first_child = True
        for v in members:
            if on_first and explored:
                uf = self.level_orbits[depth]
                roots = {uf.find(w) for w in explored}
                if uf.find(v) in roots:
                    continue
            child_colors, nc, tr = _kernel.refine(
                self.ig.kernel_graph, _individualize(colors, v)
            )
            self.traces.append(tr)
            prune = False
            if self.first_traces is not None:
                d = len(self.traces)
                first_ok = (
                    d <= len(self.first_traces)
                    and tuple(self.traces) == self.first_traces[:d]
                )
                if not first_ok and self._best_rel() > 0:
                    prune = True
            if prune:
                self.traces.pop()
                continue
            self.cur_path.append(v)
            jump = self._node(child_colors, nc, on_first and first_child)
            self.cur_path.pop()
            self.traces.pop()
            explored.append(v)
            first_child = False
            if jump < depth:
                return jump
        return _BIG

    def _best_rel(self) -> int:
        """Lexicographic relation of the current trace path to the best path."""
        best = self.best_traces
        for i, t in enumerate(self.traces):
            if i >= len(best):
                return 1
            if t != best[i]:
                return -1 if t < best[i] else 1
        return 0

    def _leaf(self, labels: list[int]) -> int:
        self.leaf_count += 1
        data = _labeled_bytes(self.ig, labels)
        if self.first_traces is None:
            self.first_traces = tuple(self.traces)
            self.first_bytes = data
            self.first_labels = list(labels)
            self.best_traces = list(self.traces)
            self.best_bytes = data
            self.best_labels = list(labels)
            return _BIG

        if tuple(self.traces) == self.first_traces and data == self.first_bytes:
            sigma = self._leaf_perm(self.first_labels, labels)
            if any(sigma[v] != v for v in range(self.n)):
                self._add_generator(sigma)
                return self._fork_depth()
            return _BIG

        rel = self._best_rel()
        if rel < 0 or (rel == 0 and data < self.best_bytes):
            self.best_traces = list(self.traces)
            self.best_bytes = data
            self.best_labels = list(labels)
        elif rel == 0 and data == self.best_bytes:
            sigma = self._leaf_perm(self.best_labels, labels)
            self._add_generator(sigma)
        return _BIG

    def _leaf_perm(self, ref_labels: list[int], labels: list[int]) -> list[int]:
        """Automorphism mapping the reference leaf's base to the current one."""
        inv = [0] * self.n
        for v, p in enumerate(labels):
            inv[p] = v
        return [inv[ref_labels[v]] for v in range(self.n)]

    def _add_generator(self, sigma: list[int]):
        if all(sigma[v] == v for v in range(self.n)):
            return
        if not self.ig.verify_automorphism(sigma):
            raise AssertionError("harvested permutation fails verification")
        self.generators.append(sigma)
        fixed = 0
        for bp in self.first_path:
            if sigma[bp] != bp:
                break
            fixed += 1
        for level in range(min(fixed, len(self.level_orbits) - 1) + 1):
            uf = self.level_orbits[level]
            for v in range(self.n):
                if sigma[v] != v:
                    uf.union(v, sigma[v])

    def _fork_depth(self) -> int:
        for i, v in enumerate(self.cur_path):
            if i >= len(self.first_path) or self.first_path[i] != v:
                return i
        return len(self.cur_path)


def _indexed_cached(graph: ColoredDigraph) -> IndexedGraph:
    cached = getattr(graph, "_indexed_cache", None)
    if cached is None:
        cached = IndexedGraph.from_graph(graph)
        graph._indexed_cache = cached
    return cached


def canonical_result(graph: ColoredDigraph) -> CanonResult:
    """Canonicalize with a per-graph cache."""
    cached = getattr(graph, "_canon_cache", None)
    if cached is None:
        cached = _Search(_indexed_cached(graph)).run()
        graph._canon_cache = cached
    return cached


def canonical_certificate(graph: ColoredDigraph) -> Certificate:
    return canonical_result(graph).certificate


def isomorphic(g1: ColoredDigraph, g2: ColoredDigraph):
    """Color/direction/edge-preserving bijection between vertex sets, or None.

    Decided by certificate equality; the returned mapping is rebuilt from the
    two canonical labelings and verified edge-by-edge before returning.
    """
    r1 = canonical_result(g1)
    r2 = canonical_result(g2)
    if r1.certificate != r2.certificate:
        return None
    ig1 = _indexed_cached(g1)
    ig2 = _indexed_cached(g2)
    inv2 = [0] * ig2.n
    for v, p in enumerate(r2.labels):
        inv2[p] = v
    mapping = {
        ig1.vertices[v]: ig2.vertices[inv2[r1.labels[v]]] for v in range(ig1.n)
    }
    _verify_mapping(g1, g2, mapping)
    return mapping


def _verify_mapping(g1: ColoredDigraph, g2: ColoredDigraph, mapping):
    if set(mapping) != g1.vertices or set(mapping.values()) != g2.vertices:
        raise AssertionError("mapping is not a bijection between the vertex sets")
    for v, w in mapping.items():
        if v.color != w.color:
            raise AssertionError("mapping does not preserve colors")
    image = {(mapping[a], mapping[b]) for a, b in g1.edges}
    if image != g2.edges:
        raise AssertionError("mapping does not preserve edges")


def automorphism_generators(graph: ColoredDigraph) -> list[dict]:
    """Generating set of the color-preserving automorphism group, as vertex
    bijections; identity omitted."""
    result = canonical_result(graph)
    ig = _indexed_cached(graph)
    out = []
    for sigma in result.generators:
        out.append({ig.vertices[v]: ig.vertices[sigma[v]] for v in range(ig.n)})
    return out
