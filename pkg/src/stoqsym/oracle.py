"""Independent ground truth at desk scale.

Dense diagonalization, brute-force equivalence classes, the ground-state
weighted edge-expansion (Cheeger) ratio, the sin-theta fidelity bound for
perturbed operators, and the graph-pair reduction that encodes graph
isomorphism as basis-state equivalence.  Everything here is deliberately
independent of the certificate pipeline so the two can check each other.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import gf2
from .errors import CapExceededError, InternalInconsistencyError
from .hypercube import boundary_weight, component_of, has_cancellation
from .model import Hamiltonian, Mask, dot, hw, edge_generators
from .effective import EffectiveGraph, _resolver_for
from .termgraph import build_shared


@dataclass
class DenseOperator:
    n: int
    matrix: np.ndarray
    ham: Hamiltonian

    @property
    def dim(self) -> int:
        return 1 << self.n


def dense_entry_exact(ham: Hamiltonian, x: Mask, y: Mask) -> Fraction:
    """Exact matrix element <x|H|y>."""
    if x == y:
        return boundary_weight(ham, x)
    b = x ^ y
    alpha = ham.alpha.get(b, Fraction(0))
    beta = ham.beta.get(b, Fraction(0))
    if beta == 0:
        return -alpha
    sign = -1 if ((dot(b, x) + hw(b) // 2) % 2) else 1
    return -(alpha + sign * beta)


def dense_hamiltonian(ham: Hamiltonian, cap: int = 12) -> DenseOperator:
    """Full 2^n matrix; X/Y weights off the diagonal, Z potential on it."""
    if ham.n > cap:
        raise CapExceededError(f"n={ham.n} exceeds dense cap {cap}")
    n = ham.n
    dim = 1 << n
    idx = np.arange(dim, dtype=np.uint64)
    m = np.zeros((dim, dim))
    diag = np.zeros(dim)
    for b, kappa in ham.kappa.items():
        parity = np.bitwise_count(idx & np.uint64(b)).astype(np.int64) & 1
        diag += float(kappa) * (1.0 - 2.0 * parity)
    m[np.arange(dim), np.arange(dim)] = diag
    supports = set(ham.alpha) | set(ham.beta)
    for b in sorted(supports):
        alpha = float(ham.alpha.get(b, Fraction(0)))
        beta = float(ham.beta.get(b, Fraction(0)))
        if alpha == 0.0 and beta == 0.0:
            continue
        if beta != 0.0:
            parity = (
                np.bitwise_count(idx & np.uint64(b)).astype(np.int64) + hw(b) // 2
            ) & 1
            w = alpha + beta * (1.0 - 2.0 * parity)
        else:
            w = np.full(dim, alpha)
        rows = np.arange(dim)
        m[rows, rows ^ b] = -w
    return DenseOperator(n=n, matrix=m, ham=ham)


def exact_ground(op: DenseOperator) -> tuple[float, np.ndarray, float]:
    """(lambda0, ground vector, lambda1) by a dense symmetric eigensolve."""
    if op.dim > 4096:
        raise CapExceededError(f"dimension {op.dim} exceeds 4096")
    vals, vecs = np.linalg.eigh(op.matrix)
    phi = vecs[:, 0]
    if phi.sum() < 0:
        phi = -phi
    lam0 = float(vals[0])
    lam1 = float(vals[1]) if op.dim > 1 else lam0
    residual = float(np.max(np.abs(op.matrix @ phi - lam0 * phi)))
    scale = max(1.0, float(np.max(np.abs(op.matrix)))) if op.dim else 1.0
    if residual > 1e-10 * scale:
        raise InternalInconsistencyError(f"eigensolver residual {residual:.2e}")
    return lam0, phi, lam1


# -- brute-force equivalence classes -----------------------------------------


def _interned_weight_matrix(ham: Hamiltonian) -> np.ndarray:
    """(2^n + 1)-square matrix of exact-weight ids; last index is the
    boundary vertex."""
    n = ham.n
    dim = 1 << n
    ids: dict[Fraction, int] = {}

    def intern(v: Fraction) -> int:
        if v not in ids:
            ids[v] = len(ids)
        return ids[v]

    w = np.zeros((dim + 1, dim + 1), dtype=np.int64)
    zero = intern(Fraction(0))
    w[:, :] = zero
    for x in range(dim):
        for y in range(x + 1, dim):
            val = -dense_entry_exact(ham, x, y)
            if val != 0:
                w[x, y] = w[y, x] = intern(val)
        bw = boundary_weight(ham, x)
        w[x, dim] = w[dim, x] = intern(bw)
    return w


def brute_force_classes(
    ham: Hamiltonian, mode: str = "full"
) -> list[frozenset[Mask]]:
    """Orbit partition of basis states under weight-preserving symmetries.

    mode='full' (n <= 3): every vertex bijection fixing the boundary vertex
    is tested, so the result is the exact partition.  mode='signed'
    (n <= 8): only maps x -> permute(x) ^ c are tested; every such map is a
    genuine symmetry, so the result is a partition that the true one
    refines or equals (a consistency witness, not ground truth).
    """
    if mode == "full":
        return _classes_full(ham)
    if mode == "signed":
        return _classes_signed(ham)
    raise ValueError(f"unknown mode {mode!r}")


def _classes_full(ham: Hamiltonian) -> list[frozenset[Mask]]:
    n = ham.n
    if n > 3:
        raise CapExceededError("full permutation search is capped at n=3")
    dim = 1 << n
    w = _interned_weight_matrix(ham)
    perms = np.array(list(itertools.permutations(range(dim))), dtype=np.int64)
    boundary_col = np.full((len(perms), 1), dim, dtype=np.int64)
    p = np.concatenate([perms, boundary_col], axis=1)
    mapped = w[p[:, :, None], p[:, None, :]]
    valid = (mapped == w[None, :, :]).all(axis=(1, 2))
    parent = list(range(dim))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for perm in perms[valid]:
        for x in range(dim):
            ra, rb = find(x), find(int(perm[x]))
            if ra != rb:
                parent[rb] = ra
    groups: dict[int, set[Mask]] = {}
    for x in range(dim):
        groups.setdefault(find(x), set()).add(x)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def _apply_qubit_perm(x: Mask, perm: Sequence[int]) -> Mask:
    y = 0
    for i, p in enumerate(perm):
        if (x >> i) & 1:
            y |= 1 << p
    return y


def _classes_signed(ham: Hamiltonian) -> list[frozenset[Mask]]:
    n = ham.n
    if n > 8:
        raise CapExceededError("signed permutation search is capped at n=8")
    dim = 1 << n
    alpha = {b: v for b, v in ham.alpha.items() if v != 0}
    beta = {b: v for b, v in ham.beta.items() if v != 0}
    kappa = {b: v for b, v in ham.kappa.items() if v != 0}
    maps: list[tuple[Sequence[int], Mask]] = []
    null_done = False
    for perm in itertools.permutations(range(n)):
        pa = {_apply_qubit_perm(b, perm): v for b, v in alpha.items()}
        if pa != alpha:
            continue
        rows: list[int] = []
        rhs: list[int] = []
        consistent = True
        for table in (beta, kappa):
            mapped = {_apply_qubit_perm(b, perm): v for b, v in table.items()}
            if {b: abs(v) for b, v in mapped.items()} != {
                b: abs(v) for b, v in table.items()
            }:
                consistent = False
                break
            for b, v in mapped.items():
                rows.append(b)
                rhs.append(0 if v == table[b] else 1)
        if not consistent:
            continue
        solved = gf2.solve_parity(rows, rhs, n)
        if solved is None:
            continue
        particular, null_basis = solved
        maps.append((perm, particular))
        if not null_done:
            identity = tuple(range(n))
            for d in null_basis:
                maps.append((identity, d))
            null_done = True
    parent = list(range(dim))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for perm, c in maps:
        for x in range(dim):
            y = _apply_qubit_perm(x, perm) ^ c
            ra, rb = find(x), find(y)
            if ra != rb:
                parent[rb] = ra
    groups: dict[int, set[Mask]] = {}
    for x in range(dim):
        groups.setdefault(find(x), set()).add(x)
    return sorted((frozenset(g) for g in groups.values()), key=min)


# -- end-to-end verification ---------------------------------------------------


@dataclass
class VerifyDiagnostics:
    energy_error: float
    total_variation: float
    amplitude_spread: float
    component_size: int

    def passes(self, energy_tol=1e-9, tv_tol=1e-8, spread_tol=1e-9) -> bool:
        return (
            self.energy_error <= energy_tol
            and self.total_variation <= tv_tol
            and self.amplitude_spread <= spread_tol
        )


def verify_effective(
    ham: Hamiltonian,
    eg: EffectiveGraph,
    energy: float,
    probabilities: Sequence[float],
    dense_cap: int = 10,
) -> VerifyDiagnostics:
    """Compare a pipeline result against a dense solve of the seed component.

    Membership of every component basis state is decided by certificate
    lookup against the reported representatives; masses, the ground energy
    and within-class amplitude spread come from the dense Perron vector.
    """
    if ham.n > dense_cap:
        raise CapExceededError(f"n={ham.n} exceeds dense cap {dense_cap}")
    seed = eg.seed_vertex
    if has_cancellation(ham):
        members = sorted(component_of(ham, seed))
    else:
        basis = gf2.echelon_basis(edge_generators(ham))
        members = sorted(
            seed ^ _xor_all(sub) for sub in itertools.product(*[[0, b] for b in basis])
        )
    if len(members) != eg.component_size:
        raise InternalInconsistencyError("component enumeration mismatch")
    full = dense_hamiltonian(ham, cap=dense_cap)
    sub = full.matrix[np.ix_(members, members)]
    vals, vecs = np.linalg.eigh(sub)
    phi = vecs[:, 0]
    if phi.sum() < 0:
        phi = -phi
    lam0 = float(vals[0])
    resolver = _resolver_for(build_shared(ham))
    rep_index = {resolver.certificate(r): i for i, r in enumerate(eg.reps)}
    masses = np.zeros(len(eg.reps))
    amp_lo = [math.inf] * len(eg.reps)
    amp_hi = [-math.inf] * len(eg.reps)
    for pos, x in enumerate(members):
        i = rep_index.get(resolver.certificate(x))
        if i is None:
            raise InternalInconsistencyError(
                "component vertex matches no representative"
            )
        a = abs(float(phi[pos]))
        masses[i] += a * a
        amp_lo[i] = min(amp_lo[i], a)
        amp_hi[i] = max(amp_hi[i], a)
    tv = 0.5 * float(np.abs(masses - np.array(probabilities)).sum())
    spread = max(hi - lo for hi, lo in zip(amp_hi, amp_lo))
    return VerifyDiagnostics(
        energy_error=abs(energy - lam0),
        total_variation=tv,
        amplitude_spread=spread,
        component_size=len(members),
    )


def _xor_all(values: Iterable[Mask]) -> Mask:
    out = 0
    for v in values:
        out ^= v
    return out


# -- spectral-gap and perturbation checks --------------------------------------


def cheeger_ratio(op: DenseOperator, phi: np.ndarray, subset: Iterable[Mask]) -> float:
    """Ground-state weighted edge-expansion ratio of a vertex subset.

    Numerator: sum over cut pairs of (-H_uv) phi_u phi_v with exact matrix
    elements; denominator: the smaller of the two mass sides.  Twice the
    minimum over subsets upper-bounds the spectral gap.
    """
    dim = op.dim
    s = sorted(set(subset))
    if not s or len(s) >= dim:
        raise ValueError("subset must be nonempty and proper")
    inside = np.zeros(dim, dtype=bool)
    inside[s] = True
    num = 0.0
    ham = op.ham
    supports = set(ham.alpha) | set(ham.beta)
    for u in s:
        for b in supports:
            v = u ^ b
            if not inside[v]:
                w = -dense_entry_exact(ham, u, v)
                if w != 0:
                    num += float(w) * float(phi[u]) * float(phi[v])
    mass_in = float((phi[inside] ** 2).sum())
    mass_out = float((phi[~inside] ** 2).sum())
    return num / min(mass_in, mass_out)


@dataclass
class PerturbationReport:
    tan2: float
    fidelity_lower_bound: float
    exact_fidelity: float
    gap: float
    expectation: float
    applicable: bool


def perturbation_bound(
    ham: Hamiltonian, delta: Hamiltonian, dense_cap: int = 10
) -> PerturbationReport:
    """Sin-theta fidelity bound ingredients plus the exact fidelity.

    tan2 = |<delta>_ground| / (gap - <delta>_ground); the ground-state
    fidelity of the perturbed operator is bounded below by
    1 - (pi^2/4) tan2^2.  Inapplicable (reported, not raised) when the gap
    condition gap > <delta> fails.
    """
    if ham.n != delta.n:
        raise ValueError("operator and perturbation act on different qubit counts")
    if ham.n > dense_cap:
        raise CapExceededError(f"n={ham.n} exceeds dense cap {dense_cap}")
    base = dense_hamiltonian(ham, cap=dense_cap)
    lam0, phi, lam1 = exact_ground(base)
    gap = lam1 - lam0
    dmat = dense_hamiltonian(delta, cap=dense_cap).matrix
    expectation = float(phi @ (dmat @ phi))
    applicable = gap > expectation
    if applicable and gap - expectation > 0:
        tan2 = abs(expectation) / (gap - expectation)
    else:
        tan2 = math.inf
    perturbed = DenseOperator(ham.n, base.matrix + dmat, ham)
    vals, vecs = np.linalg.eigh(perturbed.matrix)
    phi_d = vecs[:, 0]
    exact_fidelity = float(phi @ phi_d) ** 2
    lower = 1.0 - (math.pi**2 / 4.0) * tan2 * tan2 if applicable else -math.inf
    return PerturbationReport(
        tan2=tan2,
        fidelity_lower_bound=lower,
        exact_fidelity=exact_fidelity,
        gap=gap,
        expectation=expectation,
        applicable=applicable,
    )


# -- graph-isomorphism reduction ------------------------------------------------

SimpleGraph = tuple[int, frozenset[tuple[int, int]]]


def simple_graph(nv: int, edges: Iterable[tuple[int, int]]) -> SimpleGraph:
    norm = set()
    for a, b in edges:
        if a == b or not (0 <= a < nv and 0 <= b < nv):
            raise ValueError(f"bad edge ({a},{b})")
        norm.add((min(a, b), max(a, b)))
    return (nv, frozenset(norm))


def gi_reduction(s1: SimpleGraph, s2: SimpleGraph) -> tuple[Hamiltonian, Mask, Mask]:
    """ZZ-coupling Hamiltonian whose two distinguished basis states are
    equivalent exactly when the graphs are isomorphic.

    Uniform single-qubit Z anchors pin every literal sign: without them,
    flipping all qubits of a connected component (in particular all qubits
    at once) preserves every two-qubit clause gadget and maps the first
    distinguished assignment onto the second, making the pair equivalent
    regardless of the graphs.  With the anchors, an equivalence must be a
    pure qubit permutation carrying one vertex block onto the other, which
    is exactly a graph isomorphism.
    """
    n1, e1 = s1
    n2, e2 = s2
    n = n1 + n2
    ham = Hamiltonian(n=n)
    for i in range(n):
        ham.kappa[1 << i] = Fraction(1)
    for a, b in sorted(e1):
        ham.kappa[(1 << a) | (1 << b)] = Fraction(1)
    for a, b in sorted(e2):
        ham.kappa[(1 << (n1 + a)) | (1 << (n1 + b))] = Fraction(1)
    u1 = (1 << n1) - 1
    u2 = ((1 << n2) - 1) << n1
    return ham, u1, u2


def naive_isomorphic(s1: SimpleGraph, s2: SimpleGraph) -> bool:
    """Backtracking isomorphism search on simple graphs (oracle-grade)."""
    n1, e1 = s1
    n2, e2 = s2
    if n1 != n2 or len(e1) != len(e2):
        return False
    adj1 = [set() for _ in range(n1)]
    adj2 = [set() for _ in range(n2)]
    for a, b in e1:
        adj1[a].add(b)
        adj1[b].add(a)
    for a, b in e2:
        adj2[a].add(b)
        adj2[b].add(a)
    if sorted(len(s) for s in adj1) != sorted(len(s) for s in adj2):
        return False
    mapping: dict[int, int] = {}
    used = [False] * n2

    def extend(i: int) -> bool:
        if i == n1:
            return True
        for j in range(n2):
            if used[j] or len(adj2[j]) != len(adj1[i]):
                continue
            ok = True
            for prev, pj in mapping.items():
                if (prev in adj1[i]) != (pj in adj2[j]):
                    ok = False
                    break
            if ok:
                mapping[i] = j
                used[j] = True
                if extend(i + 1):
                    return True
                del mapping[i]
                used[j] = False
        return False

    return extend(0)
