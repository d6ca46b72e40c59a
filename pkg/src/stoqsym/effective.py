"""Effective-subspace pipeline: representative discovery, reduced operator,
ground state and measurement sampling.

A depth-first traversal of the implicit hypercube collects one
representative per equivalence class reachable from the seed, deciding
equivalence through gadget-graph certificates with a certificate ->
representative cache (one canonicalization per distinct vertex).  The class
weight matrix accumulates edge weights by representative; class sizes follow
from detailed balance along a spanning tree, normalized by the component
size; the reduced operator's Perron vector is found by power iteration on a
similarity-symmetrized, Gershgorin-shifted matrix.  Samples draw a class by
its ground-state mass and emit a member through the automorphism orbit of
the representative.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import gf2
from .canon import CanonResult, Certificate, IndexedGraph, _Search
from .errors import ConvergenceError, InternalInconsistencyError
from .hypercube import boundary_weight, component_of, has_cancellation, neighbors
from .model import Hamiltonian, Mask, edge_generators, generator_rank, render_support
from .termgraph import (
    ASSIGNMENT,
    LITERAL,
    ColoredDigraph,
    TermVertex,
    attach_literal_pairs,
    build_shared,
    literal_count,
)


class ClassResolver:
    """Certificate machinery for one shared gadget graph.

    Computes the certificate of the assignment-marked graph for any basis
    state without materializing the marked graph, caching one canonical
    result per distinct state.  Thread-safe; prefetch() warms the cache in
    parallel.
    """

    def __init__(self, shared: ColoredDigraph):
        if any(v.kind == ASSIGNMENT for v in shared.vertices):
            raise ValueError("resolver expects the assignment-free shared graph")
        self.shared = shared
        self.n = literal_count(shared)
        base = shared.sorted_vertices()
        index = {v: i for i, v in enumerate(base)}
        from .canon import _color_key, _color_token

        table = sorted({v.color for v in base} | {(ASSIGNMENT, None)}, key=_color_key)
        color_id = {c: i for i, c in enumerate(table)}
        self._base_vertices = base
        self._base_colors = [color_id[v.color] for v in base]
        self._asg_color = color_id[(ASSIGNMENT, None)]
        self._lit_index = {
            v.label: index[v] for v in base if v.kind == LITERAL
        }  # (sign, qubit) -> vertex index
        bi, out = [], []
        for a, b in shared.edges:
            ia, ib = index[a], index[b]
            if (b, a) in shared.edges:
                if ia < ib:
                    bi.append((ia, ib))
            else:
                out.append((ia, ib))
        self._base_bi = bi
        self._base_out = out
        counts = [0] * len(table)
        for c in self._base_colors:
            counts[c] += 1
        counts[self._asg_color] += 1
        self._header = b";".join(
            _color_token(c) + b"*%d" % counts[i] for i, c in enumerate(table)
        )
        self._cache: dict[Mask, CanonResult] = {}
        self._lock = threading.Lock()

    def _indexed(self, u: Mask) -> IndexedGraph:
        n_base = len(self._base_vertices)
        vertices = self._base_vertices + [TermVertex(ASSIGNMENT, (u,))]
        colors = self._base_colors + [self._asg_color]
        bi = list(self._base_bi)
        for i in range(self.n):
            sign = -1 if (u >> i) & 1 else 1
            bi.append((self._lit_index[(sign, i)], n_base))
        return IndexedGraph(vertices, colors, bi, list(self._base_out), self._header)

    def result(self, u: Mask) -> CanonResult:
        with self._lock:
            cached = self._cache.get(u)
        if cached is not None:
            return cached
        computed = _Search(self._indexed(u)).run()
        with self._lock:
            return self._cache.setdefault(u, computed)

    def certificate(self, u: Mask) -> Certificate:
        return self.result(u).certificate

    def prefetch(self, masks: Sequence[Mask], executor: Optional[ThreadPoolExecutor]):
        if executor is None:
            return
        with self._lock:
            missing = sorted(set(masks) - set(self._cache))
        if missing:
            list(executor.map(self.result, missing))

    def cached_count(self) -> int:
        return len(self._cache)


def _resolver_for(shared: ColoredDigraph) -> ClassResolver:
    cached = getattr(shared, "_resolver_cache", None)
    if cached is None:
        cached = ClassResolver(shared)
        shared._resolver_cache = cached
    return cached


def find_representative(
    u: Mask, reps: Sequence[Mask], shared: ColoredDigraph
) -> Optional[Mask]:
    """First member of reps whose marked gadget graph is isomorphic to u's."""
    resolver = _resolver_for(shared)
    cert = resolver.certificate(u)
    for v in reps:
        if resolver.certificate(v) == cert:
            return v
    return None


@dataclass(frozen=True)
class EffectiveGraph:
    reps: tuple[Mask, ...]
    omega: tuple[tuple[Fraction, ...], ...]
    boundary: tuple[Fraction, ...]
    class_sizes: tuple[int, ...]
    component_size: int
    seed_vertex: Mask
    visited_count: int
    n: int


@dataclass
class GroundSolution:
    energy: float
    amplitudes: tuple[float, ...]
    residual: float
    iterations: int
    gap: float
    degenerate: bool


@dataclass
class ComponentResult:
    """Frozen pipeline output for one hypercube component."""

    effective: EffectiveGraph
    ground: GroundSolution
    probabilities: tuple[float, ...]
    orbits: tuple[tuple[Mask, ...], ...]  # class members within the component
    orbit_complete: bool


@dataclass
class SampleReport:
    n: int
    shots: int
    seed: int
    shot_reps: np.ndarray
    shot_members: np.ndarray
    components: list[ComponentResult]
    member_uniformity: str  # "exact" | "approximate"

    @property
    def probabilities(self) -> dict[str, float]:
        """Per-class probabilities conditioned on the discovered components,
        keyed by representative bitstring."""
        weight_total = sum(
            c.effective.component_size for c in self.components
        )
        out: dict[str, float] = {}
        for comp in self.components:
            w = comp.effective.component_size / weight_total
            for rep, p in zip(comp.effective.reps, comp.probabilities):
                out[render_support(rep, self.n)] = out.get(
                    render_support(rep, self.n), 0.0
                ) + w * p
        return out

    def shot_pairs(self):
        for r, m in zip(self.shot_reps, self.shot_members):
            yield int(r), int(m)


class Pipeline:
    """Shared state for repeated traversals of one Hamiltonian."""

    def __init__(self, ham: Hamiltonian, threads: int = 1):
        self.ham = ham
        self.n = ham.n
        self.shared = build_shared(ham)
        self.resolver = _resolver_for(self.shared)
        self.generators = edge_generators(ham)
        self.rank = generator_rank(self.generators)
        self.basis = gf2.echelon_basis(self.generators)
        self.cancellation = has_cancellation(ham)
        self.threads = max(1, threads)
        self._executor = (
            ThreadPoolExecutor(max_workers=self.threads) if self.threads > 1 else None
        )

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=False)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def component_size(self, seed: Mask) -> int:
        if not self.cancellation:
            return 1 << self.rank
        return len(component_of(self.ham, seed))

    def component_members(self, seed: Mask) -> Optional[frozenset[Mask]]:
        """Explicit member set, only materialized in the cancellation case."""
        if not self.cancellation:
            return None
        return component_of(self.ham, seed)

    def in_component(self, x: Mask, seed: Mask, members: Optional[frozenset[Mask]]) -> bool:
        if members is not None:
            return x in members
        return gf2.in_span(x ^ seed, self.basis)

    def effective_vertices(self, seed: Mask) -> tuple[list[Mask], int]:
        """Alg. 1 traversal; returns (representatives, distinct visited)."""
        resolver = self.resolver
        visited = {seed}
        reps = [seed]
        cert_to_rep = {resolver.certificate(seed): seed}
        nbrs = [v for v, _ in neighbors(self.ham, seed)]
        self.resolver.prefetch(nbrs, self._executor)
        frames = [(nbrs, 0)]
        while frames:
            nbrs, i = frames[-1]
            if i == len(nbrs):
                frames.pop()
                continue
            frames[-1] = (nbrs, i + 1)
            v = nbrs[i]
            visited.add(v)
            cert = resolver.certificate(v)
            if cert in cert_to_rep:
                continue
            cert_to_rep[cert] = v
            reps.append(v)
            child_nbrs = [w for w, _ in neighbors(self.ham, v)]
            self.resolver.prefetch(child_nbrs, self._executor)
            frames.append((child_nbrs, 0))
        return reps, len(visited)

    def effective_graph(self, seed: Mask) -> EffectiveGraph:
        reps, visited = self.effective_vertices(seed)
        resolver = self.resolver
        cert_to_index = {resolver.certificate(v): i for i, v in enumerate(reps)}
        m = len(reps)
        omega = [[Fraction(0)] * m for _ in range(m)]
        for i, u in enumerate(reps):
            for v, w in neighbors(self.ham, u):
                j = cert_to_index.get(resolver.certificate(v))
                if j is None:
                    raise InternalInconsistencyError(
                        "neighbor of a representative has no representative"
                    )
                omega[i][j] += w
        boundary = tuple(boundary_weight(self.ham, u) for u in reps)
        comp_size = self.component_size(seed)
        sizes = _class_sizes(omega, comp_size)
        return EffectiveGraph(
            reps=tuple(reps),
            omega=tuple(tuple(row) for row in omega),
            boundary=boundary,
            class_sizes=sizes,
            component_size=comp_size,
            seed_vertex=seed,
            visited_count=visited,
            n=self.n,
        )


def _class_sizes(omega, component_size: int) -> tuple[int, ...]:
    """Relative class sizes from detailed balance, scaled to the component.

    size[child]/size[parent] = omega[parent][child]/omega[child][parent]
    along any spanning tree; the scaled sizes must come out as positive
    integers or the run is inconsistent.
    """
    m = len(omega)
    rel = [None] * m
    rel[0] = Fraction(1)
    queue = [0]
    while queue:
        i = queue.pop()
        for j in range(m):
            if rel[j] is None and omega[i][j] != 0:
                if omega[j][i] == 0:
                    raise InternalInconsistencyError(
                        "one-sided class adjacency violates detailed balance"
                    )
                rel[j] = rel[i] * omega[i][j] / omega[j][i]
                queue.append(j)
    if any(r is None for r in rel):
        raise InternalInconsistencyError("class graph is not connected")
    total = sum(rel)
    scale = Fraction(component_size) / total
    sizes = []
    for r in rel:
        s = r * scale
        if s.denominator != 1 or s <= 0:
            raise InternalInconsistencyError(
                f"class sizes are not positive integers: {[str(x * scale) for x in rel]}"
            )
        sizes.append(int(s))
    return tuple(sizes)


def find_effective_vertices(
    ham: Hamiltonian,
    seed: Optional[Mask] = None,
    rng: Optional[np.random.Generator] = None,
    threads: int = 1,
) -> list[Mask]:
    pipe = Pipeline(ham, threads=threads)
    if seed is None:
        seed = int(rng.integers(0, 1 << ham.n))
    reps, _ = pipe.effective_vertices(seed)
    return reps


def find_effective_graph(
    ham: Hamiltonian,
    seed: Optional[Mask] = None,
    rng: Optional[np.random.Generator] = None,
    threads: int = 1,
) -> EffectiveGraph:
    pipe = Pipeline(ham, threads=threads)
    if seed is None:
        seed = int(rng.integers(0, 1 << ham.n))
    return pipe.effective_graph(seed)


def class_sizes(eg: EffectiveGraph) -> tuple[int, ...]:
    return _class_sizes([list(row) for row in eg.omega], eg.component_size)


def effective_hamiltonian(eg: EffectiveGraph) -> list[list[Fraction]]:
    """Reduced operator: minus the class weight matrix off the diagonal;
    on it, the boundary weight less the within-class weight Omega[u][u]
    (the class-summed eigenvector relation folds intra-class edges into
    the diagonal; they vanish in instances whose classes are independent
    sets, but not in general)."""
    m = len(eg.reps)
    out = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        out[i][i] = eg.boundary[i] - eg.omega[i][i]
        for j in range(m):
            if i != j:
                out[i][j] = -eg.omega[i][j]
    return out


def _symmetrized(hprime, sizes) -> tuple[np.ndarray, np.ndarray]:
    """Similarity transform D^(1/2) H' D^(-1/2); symmetric by detailed
    balance, computed in the explicitly symmetric geometric-mean form."""
    m = len(hprime)
    s = np.zeros((m, m))
    for i in range(m):
        s[i, i] = float(hprime[i][i])
        for j in range(i + 1, m):
            w = float(hprime[i][j]) * float(hprime[j][i])
            val = -math.sqrt(w) if w > 0 else 0.0
            s[i, j] = val
            s[j, i] = val
    d = np.sqrt(np.array([float(x) for x in sizes]))
    return s, d


def ground_state(
    hprime,
    sizes,
    tol: float = 1e-12,
    max_iter: int = 10**6,
) -> GroundSolution:
    """Perron ground pair of the reduced operator by shifted power iteration.

    Runs on B = cI - D^(1/2) H' D^(-1/2) with the Gershgorin shift
    c = max_u (H'[u][u] + sum_v |H'[u][v]|); B is entrywise nonnegative, so
    iteration from a positive vector converges monotonically to the Perron
    vector.  The residual contract is on H' itself:
    ||H' x - energy x||_inf <= tol * ||H'||_inf.  A second run from a
    different positive start flags degeneracy instead of resolving it.
    """
    m = len(hprime)
    hfloat = np.array([[float(x) for x in row] for row in hprime])
    if m == 1:
        return GroundSolution(
            energy=hfloat[0, 0],
            amplitudes=(1.0 / math.sqrt(float(sizes[0])),),
            residual=0.0,
            iterations=0,
            gap=0.0,
            degenerate=False,
        )
    s, d = _symmetrized(hprime, sizes)
    c = max(
        float(hprime[i][i]) + sum(abs(float(hprime[i][j])) for j in range(m) if j != i)
        for i in range(m)
    )
    b = c * np.eye(m) - s
    norm_h = max(np.abs(hfloat).sum(axis=1))
    target = tol * max(norm_h, 1e-300)

    def run(start: np.ndarray):
        x = start / np.linalg.norm(start)
        best = (np.inf, 0.0, x, 0)
        for it in range(1, max_iter + 1):
            y = b @ x
            ny = np.linalg.norm(y)
            if ny == 0.0:
                # a nonnegative matrix annihilating a positive vector is zero
                return c, x, 0.0, it
            x = y / ny
            mu = float(x @ (b @ x))
            lam = c - mu
            phi = x / d
            residual = float(np.max(np.abs(hfloat @ phi - lam * phi)))
            if residual < best[0]:
                best = (residual, lam, x.copy(), it)
            if residual <= target:
                return lam, x, residual, it
        raise ConvergenceError("power iteration did not converge", best[0], max_iter)

    ones = np.ones(m)
    lam0, psi, residual, iterations = run(ones)
    alt = 1.0 + 0.5 * np.cos(np.arange(m) + 1.0)
    lam0_alt, _, _, _ = run(alt)
    degenerate = bool(abs(lam0 - lam0_alt) > 100 * max(target, 1e-13))

    # second eigenvalue by deflation, for gap reporting only
    lam1 = lam0
    if m > 1:
        x = np.ones(m) + np.linspace(0.0, 1.0, m)
        x -= (psi @ x) * psi
        nx = np.linalg.norm(x)
        if nx > 1e-12:
            x /= nx
            mu1 = 0.0
            for _ in range(min(max_iter, 20000)):
                y = b @ x - (c - lam0) * (psi @ x) * psi
                ny = np.linalg.norm(y)
                if ny == 0.0:
                    break
                x_next = y / ny
                mu_next = float(x_next @ (b @ x_next - (c - lam0) * (psi @ x_next) * psi))
                if abs(mu_next - mu1) <= 1e-12 * max(1.0, abs(mu_next)):
                    x = x_next
                    mu1 = mu_next
                    break
                x = x_next
                mu1 = mu_next
            lam1 = c - mu1
    phi = psi / d
    if np.min(phi) <= 0:
        degenerate = True
        phi = np.abs(phi)
    weights = np.array([float(x) for x in sizes])
    phi /= math.sqrt(float(weights @ (phi * phi)))
    return GroundSolution(
        energy=lam0,
        amplitudes=tuple(float(x) for x in phi),
        residual=residual,
        iterations=iterations,
        gap=max(lam1 - lam0, 0.0),
        degenerate=degenerate,
    )


def class_distribution(gs: GroundSolution, sizes) -> tuple[float, ...]:
    mass = [s * a * a for s, a in zip(sizes, gs.amplitudes)]
    total = sum(mass)
    return tuple(x / total for x in mass)


# -- automorphism orbits ----------------------------------------------------


@dataclass(frozen=True)
class SignedPermutation:
    """Basis-state map x -> permute(x) ^ flips induced by a literal
    symmetry: bit i of the input lands on bit perm[i], then flips apply."""

    perm: tuple[int, ...]
    flips: Mask

    def apply(self, x: Mask) -> Mask:
        y = 0
        for i, p in enumerate(self.perm):
            if (x >> i) & 1:
                y |= 1 << p
        return y ^ self.flips


def induced_generators(shared: ColoredDigraph) -> list[SignedPermutation]:
    """Signed qubit permutations induced by the pair-preserving automorphism
    group of the shared graph (computed on the pairing-augmented copy)."""
    from .canon import automorphism_generators

    n = literal_count(shared)
    paired = attach_literal_pairs(shared, n)
    out = []
    seen = set()
    for g in automorphism_generators(paired):
        perm = [0] * n
        flips = 0
        for i in range(n):
            image = g[TermVertex(LITERAL, (1, i))]
            sign, j = image.label
            neg_image = g[TermVertex(LITERAL, (-1, i))]
            if neg_image.label != (-sign, j):
                raise InternalInconsistencyError(
                    "pairing-augmented automorphism is not literal-pair preserving"
                )
            perm[i] = j
            if sign < 0:
                flips |= 1 << j
        sp = SignedPermutation(tuple(perm), flips)
        key = (sp.perm, sp.flips)
        if key not in seen and (sp.perm != tuple(range(n)) or sp.flips != 0):
            seen.add(key)
            out.append(sp)
    return out


def orbit_members(
    u: Mask, gens: Sequence[SignedPermutation], cap: int
) -> tuple[frozenset[Mask], bool]:
    """Closure of {u} under the induced maps, halted at cap.

    Returns (members, complete).  When complete, the set is the full
    equivalence class of u.
    """
    seen = {u}
    frontier = [u]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = g.apply(x)
                if y not in seen:
                    if len(seen) >= cap:
                        return frozenset(seen), False
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen), True


# -- sampling ----------------------------------------------------------------


def _component_pipeline(
    pipe: Pipeline, seed: Mask, tol: float, max_iter: int, orbit_cap: int,
    gens: list[SignedPermutation],
) -> ComponentResult:
    eg = pipe.effective_graph(seed)
    gs = ground_state(effective_hamiltonian(eg), eg.class_sizes, tol, max_iter)
    probs = class_distribution(gs, eg.class_sizes)
    members = pipe.component_members(seed)
    orbits = []
    complete_all = True
    for rep, size in zip(eg.reps, eg.class_sizes):
        orbit, complete = orbit_members(rep, gens, orbit_cap)
        in_comp = tuple(sorted(x for x in orbit if pipe.in_component(x, seed, members)))
        if complete:
            if len(in_comp) != size:
                raise InternalInconsistencyError(
                    f"orbit size {len(in_comp)} != class size {size}"
                )
        else:
            complete_all = False
        orbits.append(in_comp)
    return ComponentResult(
        effective=eg,
        ground=gs,
        probabilities=probs,
        orbits=tuple(orbits),
        orbit_complete=complete_all,
    )


def sample(
    ham: Hamiltonian,
    shots: int,
    rng: np.random.Generator,
    seed_value: int = 0,
    tol: float = 1e-12,
    max_iter: int = 10**6,
    orbit_cap: int = 1 << 20,
    threads: int = 1,
) -> SampleReport:
    """Seeded measurement sampling.

    Each shot draws a uniform basis state, which selects its hypercube
    component with probability proportional to the component size; the
    component's pipeline result is computed once and reused; a class is
    drawn by its ground-state mass and a member of the class within the
    component is emitted uniformly (via the enumerated orbit) or by a
    flagged random generator walk when the orbit exceeds the cap.
    """
    pipe = Pipeline(ham, threads=threads)
    n = ham.n
    gens = induced_generators(pipe.shared)
    if shots:
        seeds = rng.integers(0, 1 << n, size=shots, dtype=np.uint64)
    else:
        # probability table only: analyze the component of a single draw
        seeds = rng.integers(0, 1 << n, size=1, dtype=np.uint64)
    # group shots by component
    if not pipe.cancellation:
        keys = seeds.copy()
        for b in pipe.basis:
            lead = b.bit_length() - 1
            sel = ((keys >> np.uint64(lead)) & np.uint64(1)).astype(bool)
            keys[sel] ^= np.uint64(b)
    else:
        comp_of = {}
        keys = np.zeros_like(seeds)
        for idx, s in enumerate(seeds):
            s = int(s)
            if s not in comp_of:
                members = component_of(ham, s)
                lo = min(members)
                for x in members:
                    comp_of[x] = lo
            keys[idx] = comp_of[s]

    shot_reps = np.zeros(shots, dtype=np.uint64)
    shot_members = np.zeros(shots, dtype=np.uint64)
    components: dict[int, ComponentResult] = {}
    order: list[int] = []
    uniform = True
    uniq, first_idx = np.unique(keys, return_index=True)
    for k, fi in sorted(zip(uniq.tolist(), first_idx.tolist()), key=lambda t: t[1]):
        comp = _component_pipeline(pipe, int(seeds[fi]), tol, max_iter, orbit_cap, gens)
        components[k] = comp
        order.append(k)
        uniform = uniform and comp.orbit_complete
    if not shots:
        keys = keys[:0]
    for k in order:
        comp = components[k]
        idx = np.nonzero(keys == np.uint64(k))[0]
        probs = np.array(comp.probabilities)
        probs = probs / probs.sum()
        draws = rng.choice(len(comp.effective.reps), size=len(idx), p=probs)
        shot_reps[idx] = [comp.effective.reps[j] for j in draws]
        for j in range(len(comp.effective.reps)):
            sel = idx[draws == j]
            if len(sel) == 0:
                continue
            orbit = comp.orbits[j]
            if comp.orbit_complete or len(orbit) == comp.effective.class_sizes[j]:
                picks = rng.integers(0, len(orbit), size=len(sel))
                shot_members[sel] = [orbit[p] for p in picks]
            else:
                members = pipe.component_members(int(comp.effective.seed_vertex))
                walk_len = 8 * max(1, len(gens)) + 16
                for s_i in sel:
                    x = comp.effective.reps[j]
                    for _ in range(walk_len):
                        g = gens[int(rng.integers(0, len(gens)))]
                        y = g.apply(x)
                        if pipe.in_component(
                            y, int(comp.effective.seed_vertex), members
                        ):
                            x = y
                    shot_members[s_i] = x
    pipe.close()
    return SampleReport(
        n=n,
        shots=shots,
        seed=seed_value,
        shot_reps=shot_reps,
        shot_members=shot_members,
        components=[components[k] for k in order],
        member_uniformity="exact" if uniform else "approximate",
    )
