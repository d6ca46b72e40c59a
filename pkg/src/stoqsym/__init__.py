"""Symmetry discovery and effective-subspace sampling for k-local
stoquastic Hamiltonians, with exact brute-force oracles at desk scale."""

from .model import (
    Hamiltonian,
    ValidationReport,
    edge_generators,
    generator_rank,
    parse_hamiltonian,
    serialize_hamiltonian,
    validate_stoquastic,
)
from .hypercube import boundary_weight, edge_weight, neighbors
from .termgraph import (
    ColoredDigraph,
    TermVertex,
    attach_assignment,
    build_shared,
    reconstruct_hamiltonian,
)
from .canon import (
    Certificate,
    automorphism_generators,
    canonical_certificate,
    isomorphic,
    kernel_backend,
)
from .effective import (
    EffectiveGraph,
    GroundSolution,
    SampleReport,
    class_distribution,
    class_sizes,
    effective_hamiltonian,
    find_effective_graph,
    find_effective_vertices,
    find_representative,
    ground_state,
    induced_generators,
    orbit_members,
    sample,
)

__version__ = "0.1.0"

__all__ = [
    "Hamiltonian",
    "ValidationReport",
    "parse_hamiltonian",
    "serialize_hamiltonian",
    "validate_stoquastic",
    "edge_generators",
    "generator_rank",
    "edge_weight",
    "boundary_weight",
    "neighbors",
    "ColoredDigraph",
    "TermVertex",
    "build_shared",
    "attach_assignment",
    "reconstruct_hamiltonian",
    "Certificate",
    "canonical_certificate",
    "isomorphic",
    "automorphism_generators",
    "kernel_backend",
    "EffectiveGraph",
    "GroundSolution",
    "SampleReport",
    "find_representative",
    "find_effective_vertices",
    "find_effective_graph",
    "class_sizes",
    "effective_hamiltonian",
    "ground_state",
    "class_distribution",
    "induced_generators",
    "orbit_members",
    "sample",
]
