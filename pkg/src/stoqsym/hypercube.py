"""Implicit weighted hypercube graph of a Hamiltonian.

Vertices are the 2**n basis masks plus one boundary vertex; the graph is
never materialized.  Interior edges join x and x^b for each edge generator b
and carry weight alpha_b + phase * beta_b, where the phase is +-1 because Y
coefficients live on even-size supports only.  The boundary edge weight at x
collects the diagonal Z contribution sum_b (-1)^(b.x) kappa_b.
"""

from __future__ import annotations

from fractions import Fraction

from .model import Hamiltonian, Mask, dot, hw, edge_generators

#: Boundary vertex sentinel for export paths; algorithms treat the boundary
#: through boundary_weight() instead of adjacency.
INFINITY = "inf"


def phase_sign(b: Mask, bprime: Mask) -> int:
    """+-1 value of i**(2 b.b' - |b|) for even |b|, in integer arithmetic."""
    exponent = 2 * dot(b, bprime) - hw(b)
    if exponent % 2 != 0:
        raise ValueError("phase defined only for even-size supports")
    return -1 if (exponent // 2) % 2 else 1


def edge_weight(ham: Hamiltonian, bprime: Mask, b: Mask) -> Fraction:
    """Weight of the edge {x, x^b} at x = bprime; zero when b generates no edge."""
    alpha = ham.alpha.get(b, Fraction(0))
    if alpha == 0:
        return Fraction(0)
    beta = ham.beta.get(b, Fraction(0))
    if beta == 0:
        return alpha
    return alpha + phase_sign(b, bprime) * beta


def boundary_weight(ham: Hamiltonian, bprime: Mask) -> Fraction:
    total = Fraction(0)
    for b, kappa in ham.kappa.items():
        total += -kappa if dot(b, bprime) % 2 else kappa
    return total


def neighbors(ham: Hamiltonian, u: Mask) -> list[tuple[Mask, Fraction]]:
    """Weighted interior neighbors of u, in generator order; zero-weight
    cancellations (alpha_b == |beta_b| with adverse phase) drop the edge."""
    out = []
    for b in edge_generators(ham):
        w = edge_weight(ham, u, b)
        if w != 0:
            out.append((u ^ b, w))
    return out


def has_cancellation(ham: Hamiltonian) -> bool:
    """True when some generator can produce a zero-weight edge, in which case
    a component may be smaller than the full XOR coset."""
    return any(
        v != 0 and abs(ham.beta.get(b, Fraction(0))) == v for b, v in ham.alpha.items()
    )


def component_of(ham: Hamiltonian, seed: Mask, cap: int = 1 << 22) -> frozenset[Mask]:
    """Explicit interior component of the seed (BFS over nonzero edges).

    Only needed when has_cancellation(); otherwise the component is the
    XOR coset of the generator span and has 2**rank vertices.
    """
    seen = {seed}
    frontier = [seed]
    while frontier:
        nxt = []
        for u in frontier:
            for v, _ in neighbors(ham, u):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if len(seen) > cap:
            raise MemoryError(f"component exceeds cap {cap}")
        frontier = nxt
    return frozenset(seen)
