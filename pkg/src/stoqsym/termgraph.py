"""Colored directed gadget graph encoding a Hamiltonian's terms.

Each qubit contributes a pair of signed literal vertices.  Each X term
contributes a generator vertex joined to both literals of every support
qubit; each Y term contributes weight-generator vertices (one per support
assignment where the edge-weight phase is negative) wired with directed
edges literal -> weight-generator -> negated literal, all tied to one
weight-cluster vertex; each Z term contributes clause vertices (one per
support assignment whose parity matches the coefficient sign) tied to one
clause-cluster vertex.  Basis states are marked by an assignment star over
one literal per qubit.  Isomorphism of two assignment-marked copies decides
whether the two basis states are related by a weight-preserving symmetry,
and the construction is invertible: the Hamiltonian can be decoded back
from the gadget structure.

Colors are (kind, exact rational) pairs; generator color is alpha_b, the
weight-cluster color is max(alpha) + |beta_b| and the clause-cluster color
is max(alpha) + max|beta| + |kappa_b|, so equal color means equal
coefficient within a kind.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import GadgetStructureError
from .model import Hamiltonian, Mask, dot, hw, render_support
from .hypercube import phase_sign

LITERAL = "literal"
GENERATOR = "generator"
WEIGHT_GENERATOR = "weight-generator"
WEIGHT_CLUSTER = "weight-cluster"
CLAUSE = "clause"
CLAUSE_CLUSTER = "clause-cluster"
PAIR = "literal-pair"
ASSIGNMENT = "assignment"

# Deterministic vertex ordering; the assignment kind sorts last so that an
# attached assignment always lands at the end of the indexed vertex list.
KIND_ORDER = {
    LITERAL: 0,
    GENERATOR: 1,
    WEIGHT_GENERATOR: 2,
    WEIGHT_CLUSTER: 3,
    CLAUSE: 4,
    CLAUSE_CLUSTER: 5,
    PAIR: 6,
    ASSIGNMENT: 7,
}


@dataclass(frozen=True, order=True)
class TermVertex:
    """Graph node identified by (kind, label); colored by (kind, value)."""

    kind: str
    label: tuple
    value: Optional[Fraction] = None

    @property
    def color(self) -> tuple[str, Optional[Fraction]]:
        return (self.kind, self.value)

    def sort_key(self):
        return (KIND_ORDER.get(self.kind, 99), self.kind, self.label)


def literal(sign: int, qubit: int) -> TermVertex:
    """Signed literal; sign is +1 or -1."""
    return TermVertex(LITERAL, (sign, qubit))


class ColoredDigraph:
    """Vertex set plus ordered edge pairs; an undirected edge is stored as
    both orientations.  Value semantics: building operations return new
    graphs."""

    def __init__(self, vertices: Iterable[TermVertex], edges: Iterable[tuple[TermVertex, TermVertex]]):
        self.vertices = frozenset(vertices)
        self.edges = frozenset(edges)
        for a, b in self.edges:
            if a not in self.vertices or b not in self.vertices:
                raise ValueError("edge endpoint not in vertex set")
            if a == b:
                raise ValueError("self-loops are not used by any gadget")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ColoredDigraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertices, self.edges))

    def with_added(self, vertices, edges) -> "ColoredDigraph":
        return ColoredDigraph(self.vertices | set(vertices), self.edges | set(edges))

    def sorted_vertices(self) -> list[TermVertex]:
        return sorted(self.vertices, key=TermVertex.sort_key)


def _bidirected(a: TermVertex, b: TermVertex):
    return [(a, b), (b, a)]


def support_patterns(b: Mask, n: int) -> list[Mask]:
    """All assignments restricted to the support of b, as submasks of b."""
    bits = [i for i in range(n) if (b >> i) & 1]
    out = []
    for sel in range(1 << len(bits)):
        mask = 0
        for j, i in enumerate(bits):
            if (sel >> j) & 1:
                mask |= 1 << i
        out.append(mask)
    return sorted(out)


def _pattern_literals(b: Mask, pattern: Mask, n: int) -> list[TermVertex]:
    """One signed literal per support qubit; bit set in pattern means negated."""
    return [
        literal(-1 if (pattern >> i) & 1 else 1, i) for i in range(n) if (b >> i) & 1
    ]


def weight_generator_patterns(ham: Hamiltonian, b: Mask) -> list[Mask]:
    """Support assignments where the Y phase makes the edge weight deficient
    (phase * beta < 0); empty exactly when beta_b == 0."""
    beta = ham.beta.get(b, Fraction(0))
    if beta == 0:
        return []
    return [p for p in support_patterns(b, ham.n) if phase_sign(b, p) * beta < 0]


def clause_patterns(ham: Hamiltonian, b: Mask) -> list[Mask]:
    """Support assignments satisfying the Z term: (-1)^(b.b') == sign(kappa_b)."""
    kappa = ham.kappa.get(b, Fraction(0))
    if kappa == 0:
        return []
    want = 1 if kappa > 0 else -1
    return [
        p for p in support_patterns(b, ham.n) if (-1 if dot(b, p) % 2 else 1) == want
    ]


def build_shared(ham: Hamiltonian) -> ColoredDigraph:
    """Assignment-free gadget graph: 2n literals plus one gadget per term.

    Rejects invalid Hamiltonians (the gadget colors would be meaningless).
    """
    from .model import validate_stoquastic

    report = validate_stoquastic(ham)
    if not report.ok:
        raise ValueError(f"invalid Hamiltonian: {report.violations}")

    n = ham.n
    vertices: list[TermVertex] = []
    edges: list[tuple[TermVertex, TermVertex]] = []
    for i in range(n):
        vertices.append(literal(1, i))
        vertices.append(literal(-1, i))

    max_alpha = ham.max_alpha()
    max_beta = ham.max_abs_beta()

    for b, alpha in sorted(ham.alpha.items()):
        if alpha == 0:
            continue
        gen = TermVertex(GENERATOR, (b,), alpha)
        vertices.append(gen)
        for i in range(n):
            if (b >> i) & 1:
                edges += _bidirected(literal(1, i), gen)
                edges += _bidirected(gen, literal(-1, i))

    for b, beta in sorted(ham.beta.items()):
        if beta == 0:
            continue
        cluster = TermVertex(WEIGHT_CLUSTER, (b,), max_alpha + abs(beta))
        vertices.append(cluster)
        patterns = weight_generator_patterns(ham, b)
        assert len(patterns) == 1 << (hw(b) - 1)
        for p in patterns:
            wgen = TermVertex(WEIGHT_GENERATOR, (b, p))
            vertices.append(wgen)
            for lit in _pattern_literals(b, p, n):
                neg = literal(-lit.label[0], lit.label[1])
                edges.append((lit, wgen))
                edges.append((wgen, neg))
            edges += _bidirected(wgen, cluster)

    for b, kappa in sorted(ham.kappa.items()):
        if kappa == 0:
            continue
        cluster = TermVertex(CLAUSE_CLUSTER, (b,), max_alpha + max_beta + abs(kappa))
        vertices.append(cluster)
        patterns = clause_patterns(ham, b)
        assert len(patterns) == 1 << (hw(b) - 1)
        for p in patterns:
            clause = TermVertex(CLAUSE, (b, p))
            vertices.append(clause)
            for lit in _pattern_literals(b, p, n):
                edges += _bidirected(clause, lit)
            edges += _bidirected(clause, cluster)

    return ColoredDigraph(vertices, edges)


def assignment_literals(u: Mask, n: int) -> list[TermVertex]:
    """The n literals marking basis state u: qubit i contributes the negated
    literal exactly when bit i of u is set."""
    return [literal(-1 if (u >> i) & 1 else 1, i) for i in range(n)]


def literal_count(graph: ColoredDigraph) -> int:
    """Number of qubits, read back from the literal vertices."""
    return sum(1 for v in graph.vertices if v.kind == LITERAL) // 2


def attach_assignment(shared: ColoredDigraph, u: Mask, n: Optional[int] = None) -> ColoredDigraph:
    """Shared graph plus the assignment star for basis state u."""
    if n is None:
        n = literal_count(shared)
    a = TermVertex(ASSIGNMENT, (u,))
    edges = []
    for lit in assignment_literals(u, n):
        edges += _bidirected(lit, a)
    return shared.with_added([a], edges)


def attach_literal_pairs(shared: ColoredDigraph, n: int) -> ColoredDigraph:
    """Shared graph plus one pairing vertex per qubit joining its +- literals.

    Restricts automorphisms to those mapping literal pairs to literal pairs,
    which is the subgroup whose action transfers to basis states; any
    assignment-to-assignment isomorphism of the unpaired graph can be
    repaired into this subgroup, so equivalence classes are unchanged.
    """
    vertices = []
    edges = []
    for i in range(n):
        p = TermVertex(PAIR, (i,))
        vertices.append(p)
        edges += _bidirected(p, literal(1, i))
        edges += _bidirected(p, literal(-1, i))
    return shared.with_added(vertices, edges)


def vertex_count_formula(ham: Hamiltonian) -> int:
    """Predicted shared-graph size: 2n literals, one vertex per generator,
    cluster+satisfying-assignment vertices per Y and Z term."""
    total = 2 * ham.n
    total += sum(1 for v in ham.alpha.values() if v != 0)
    for b, v in ham.beta.items():
        if v != 0:
            total += (1 << (hw(b) - 1)) + 1
    for b, v in ham.kappa.items():
        if v != 0:
            total += (1 << (hw(b) - 1)) + 1
    return total


def reconstruct_hamiltonian(shared: ColoredDigraph, n: int) -> Hamiltonian:
    """Decode the gadget structure back into coefficient maps.

    Supports are read from literal adjacency, magnitudes from cluster and
    generator colors, and signs from the pattern membership of the
    weight-generator and clause sets.
    """
    by_kind: dict[str, list[TermVertex]] = {}
    for v in shared.vertices:
        by_kind.setdefault(v.kind, []).append(v)

    literals = by_kind.get(LITERAL, [])
    if len(literals) != 2 * n or {v.label for v in literals} != {
        (s, i) for s in (1, -1) for i in range(n)
    }:
        raise GadgetStructureError(f"expected the 2n signed literals for n={n}")

    touching: dict[TermVertex, set[TermVertex]] = {v: set() for v in shared.vertices}
    for a, b in shared.edges:
        touching[a].add(b)
        touching[b].add(a)

    def support_of(vertex: TermVertex) -> Mask:
        mask = 0
        for nb in touching[vertex]:
            if nb.kind == LITERAL:
                mask |= 1 << nb.label[1]
        return mask

    ham = Hamiltonian(n=n)

    max_alpha = Fraction(0)
    for gen in by_kind.get(GENERATOR, []):
        (b,) = gen.label
        if gen.value is None or gen.value <= 0:
            raise GadgetStructureError("generator vertex without positive color")
        if support_of(gen) != b:
            raise GadgetStructureError("generator adjacency disagrees with its label")
        if b in ham.alpha:
            raise GadgetStructureError("duplicate generator gadget")
        ham.alpha[b] = gen.value
        max_alpha = max(max_alpha, gen.value)

    wg_by_term: dict[Mask, list[TermVertex]] = {}
    for wg in by_kind.get(WEIGHT_GENERATOR, []):
        wg_by_term.setdefault(wg.label[0], []).append(wg)
    max_beta = Fraction(0)
    cluster_beta: dict[Mask, Fraction] = {}
    for cluster in by_kind.get(WEIGHT_CLUSTER, []):
        (b,) = cluster.label
        if cluster.value is None:
            raise GadgetStructureError("weight cluster without color")
        magnitude = cluster.value - max_alpha
        if magnitude <= 0:
            raise GadgetStructureError("weight cluster color below the alpha ceiling")
        cluster_beta[b] = magnitude
        max_beta = max(max_beta, magnitude)
    for b, magnitude in cluster_beta.items():
        members = wg_by_term.get(b, [])
        if not members:
            raise GadgetStructureError("dangling weight cluster")
        if len(members) != 1 << (hw(b) - 1):
            raise GadgetStructureError("wrong number of weight generators")
        pattern = members[0].label[1]
        # phase * beta < 0 on every member pattern fixes the sign
        sign = -phase_sign(b, pattern)
        ham.beta[b] = sign * magnitude
        if (1 << (hw(b) - 1)) != len(
            weight_generator_patterns(ham, b)
        ) or sorted(m.label[1] for m in members) != weight_generator_patterns(ham, b):
            raise GadgetStructureError("weight generator patterns are inconsistent")

    clause_by_term: dict[Mask, list[TermVertex]] = {}
    for cl in by_kind.get(CLAUSE, []):
        clause_by_term.setdefault(cl.label[0], []).append(cl)
    for cluster in by_kind.get(CLAUSE_CLUSTER, []):
        (b,) = cluster.label
        if cluster.value is None:
            raise GadgetStructureError("clause cluster without color")
        magnitude = cluster.value - max_alpha - max_beta
        if magnitude <= 0:
            raise GadgetStructureError("clause cluster color below the alpha+beta ceiling")
        members = clause_by_term.get(b, [])
        if not members:
            raise GadgetStructureError("dangling clause cluster")
        if len(members) != 1 << (hw(b) - 1):
            raise GadgetStructureError("wrong number of clauses")
        pattern = members[0].label[1]
        sign = -1 if dot(b, pattern) % 2 else 1
        ham.kappa[b] = sign * magnitude
        if sorted(m.label[1] for m in members) != clause_patterns(ham, b):
            raise GadgetStructureError("clause patterns are inconsistent")

    rebuilt = build_shared(ham)
    if rebuilt != shared:
        raise GadgetStructureError("decoded Hamiltonian does not rebuild the input graph")
    return ham
