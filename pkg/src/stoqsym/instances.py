"""Instance generators: the shipped worked example, Hamming-symmetric
families, and seeded random stoquastic operators for property suites."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .model import Hamiltonian, Mask, hw
from .oracle import SimpleGraph, simple_graph

H010_TEXT = """# three-qubit worked example: transverse field with one flipped potential
n 3
X 100 1
X 010 1
X 001 1
Z 100 1
Z 010 -1
Z 001 1
"""


def h010() -> Hamiltonian:
    from .model import parse_hamiltonian

    return parse_hamiltonian(H010_TEXT)


def hamming_symmetric(n: int, base: Mask = 0) -> Hamiltonian:
    """-sum X_i + sum (-1)^(base_i) Z_i; classes are Hamming shells around
    the base string."""
    ham = Hamiltonian(n=n)
    for i in range(n):
        b = 1 << i
        ham.alpha[b] = Fraction(1)
        ham.kappa[b] = Fraction(-1 if (base >> i) & 1 else 1)
    return ham


def _dyadic(rng: np.random.Generator, scale: int = 8) -> Fraction:
    return Fraction(int(rng.integers(1, 2 * scale)), scale)


def random_stoquastic(
    rng: np.random.Generator,
    n: int | None = None,
    k: int = 3,
    n_range: tuple[int, int] = (2, 8),
    extra_terms: tuple[int, int] = (1, 5),
    connected: bool = True,
    p_y: float = 0.35,
    p_z: float = 0.7,
) -> Hamiltonian:
    """Seeded random valid instance with dyadic coefficients.

    With connected=True every single-qubit X term is present, so the
    hypercube is one component and the dense ground state is unique.
    Y magnitudes are strictly below the matching X coefficient, which rules
    out zero-weight edge cancellations.
    """
    if n is None:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
    ham = Hamiltonian(n=n)
    if connected:
        for i in range(n):
            ham.alpha[1 << i] = _dyadic(rng)
    else:
        count = int(rng.integers(1, n + 1))
        picks = rng.choice(n, size=count, replace=False)
        for i in sorted(int(x) for x in picks):
            ham.alpha[1 << i] = _dyadic(rng)
    n_extra = int(rng.integers(extra_terms[0], extra_terms[1] + 1))
    for _ in range(n_extra):
        size = int(rng.integers(1, min(k, n) + 1))
        qubits = rng.choice(n, size=size, replace=False)
        b = 0
        for q in qubits:
            b |= 1 << int(q)
        roll = rng.random()
        if roll < 0.45:
            ham.alpha.setdefault(b, _dyadic(rng))
        else:
            sign = -1 if rng.random() < 0.5 else 1
            ham.kappa.setdefault(b, sign * _dyadic(rng))
    for b, alpha in list(ham.alpha.items()):
        if hw(b) % 2 == 0 and rng.random() < p_y and b not in ham.beta:
            # strict |beta| < alpha: no exact cancellation
            num = int(rng.integers(1, 16))
            sign = -1 if rng.random() < 0.5 else 1
            ham.beta[b] = sign * alpha * Fraction(num, 16)
    if not ham.kappa and rng.random() < p_z:
        i = int(rng.integers(0, n))
        sign = -1 if rng.random() < 0.5 else 1
        ham.kappa[1 << i] = sign * _dyadic(rng)
    return ham


def random_graph(rng: np.random.Generator, nv: int, p: float = 0.5) -> SimpleGraph:
    edges = []
    for a in range(nv):
        for b in range(a + 1, nv):
            if rng.random() < p:
                edges.append((a, b))
    return simple_graph(nv, edges)


def permuted_copy(rng: np.random.Generator, graph: SimpleGraph) -> SimpleGraph:
    nv, edges = graph
    perm = list(rng.permutation(nv))
    return simple_graph(nv, [(int(perm[a]), int(perm[b])) for a, b in edges])
