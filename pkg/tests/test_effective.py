import math
from fractions import Fraction

import numpy as np
import pytest

from stoqsym.effective import (
    Pipeline,
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
from stoqsym.errors import ConvergenceError
from stoqsym.model import Hamiltonian, parse_hamiltonian
from stoqsym.termgraph import build_shared
from stoqsym.instances import H010_TEXT, hamming_symmetric, random_stoquastic

ONE = Fraction(1)


@pytest.fixture(scope="module")
def h010():
    return parse_hamiltonian(H010_TEXT)


@pytest.fixture(scope="module")
def h010_effective(h010):
    return find_effective_graph(h010, seed=0b001)


def test_find_representative_examples(h010):
    shared = build_shared(h010)
    # state 001 matches representative 100
    assert find_representative(0b100, [0b001, 0b000], shared) == 0b001
    # reflexivity
    assert find_representative(0b010, [0b001, 0b000, 0b010], shared) == 0b010
    # state 110 matches representative 000
    assert find_representative(0b011, [0b001, 0b000, 0b010], shared) == 0b000
    # no representative
    assert find_representative(0b010, [0b001], shared) is None


def test_effective_vertices_worked_example(h010):
    reps = find_effective_vertices(h010, seed=0b001)
    assert reps == [0b001, 0b000, 0b010, 0b101]  # 100, 000, 010, 101


def test_effective_vertices_random_seed_draw():
    ham = hamming_symmetric(4)
    rng = np.random.Generator(np.random.Philox(3))
    reps = find_effective_vertices(ham, rng=rng)
    assert len(reps) == 5


def test_effective_vertices_single_qubit():
    ham = Hamiltonian(n=1, alpha={1: ONE})
    assert len(find_effective_vertices(ham, seed=0)) == 1


def test_hamming_vertices_and_sizes():
    # oracle: signed-permutation brute force gives the shell partition
    from stoqsym.oracle import brute_force_classes

    ham = hamming_symmetric(5)
    shells = brute_force_classes(ham, "signed")
    assert sorted(len(c) for c in shells) == [1, 1, 5, 5, 10, 10]
    eg = find_effective_graph(ham, seed=0)
    assert len(eg.reps) == 6
    assert sorted(eg.class_sizes) == [1, 1, 5, 5, 10, 10]


def test_worked_example_matrices(h010_effective):
    eg = h010_effective
    assert [[float(x) for x in row] for row in eg.omega] == [
        [0, 2, 0, 1],
        [2, 0, 1, 0],
        [0, 3, 0, 0],
        [3, 0, 0, 0],
    ]
    assert [float(b) for b in eg.boundary] == [-1, 1, 3, -3]
    assert eg.class_sizes == (3, 3, 1, 1)
    assert eg.component_size == 8
    hp = effective_hamiltonian(eg)
    assert [[float(x) for x in row] for row in hp] == [
        [-1, -2, 0, -1],
        [-2, 1, -1, 0],
        [0, -3, 3, 0],
        [-3, 0, 0, -3],
    ]


def test_class_sizes_recompute(h010_effective):
    assert class_sizes(h010_effective) == h010_effective.class_sizes


def test_single_class_sizes():
    ham = Hamiltonian(n=3, alpha={0b001: ONE, 0b010: ONE, 0b100: ONE})
    eg = find_effective_graph(ham, seed=0)
    assert eg.reps == (0,)
    assert eg.class_sizes == (8,)
    assert eg.omega[0][0] == 3  # all edges are intra-class


def test_detailed_balance_random():
    rng = np.random.Generator(np.random.Philox(4))
    for _ in range(40):
        ham = random_stoquastic(rng, n_range=(2, 8))
        eg = find_effective_graph(ham, seed=int(rng.integers(0, 1 << ham.n)))
        m = len(eg.reps)
        for i in range(m):
            for j in range(m):
                assert (
                    eg.class_sizes[i] * eg.omega[i][j]
                    == eg.class_sizes[j] * eg.omega[j][i]
                )
                assert eg.omega[i][j] >= 0
                assert (eg.omega[i][j] > 0) == (eg.omega[j][i] > 0)
        assert sum(eg.class_sizes) == eg.component_size


def test_symmetrized_conjugate_is_symmetric():
    rng = np.random.Generator(np.random.Philox(5))
    for _ in range(20):
        ham = random_stoquastic(rng, n_range=(2, 7))
        eg = find_effective_graph(ham, seed=int(rng.integers(0, 1 << ham.n)))
        hp = np.array(
            [[float(x) for x in row] for row in effective_hamiltonian(eg)]
        )
        d = np.sqrt(np.array([float(s) for s in eg.class_sizes]))
        conj = np.diag(d) @ hp @ np.diag(1.0 / d)
        assert np.max(np.abs(conj - conj.T)) < 1e-9


def test_ground_state_worked_example(h010_effective):
    gs = ground_state(effective_hamiltonian(h010_effective), h010_effective.class_sizes)
    assert abs(gs.energy - (-3 * math.sqrt(2))) < 1e-9
    expected = np.array(
        [3 + 2 * math.sqrt(2), 1 + math.sqrt(2), 1, 7 + 5 * math.sqrt(2)]
    )
    phi = np.array(gs.amplitudes)
    cos = float(phi @ expected) / (
        np.linalg.norm(phi) * np.linalg.norm(expected)
    )
    assert 1 - cos < 1e-9
    assert min(gs.amplitudes) > 0
    assert not gs.degenerate
    # normalization: sum sizes * phi^2 == 1
    mass = sum(s * a * a for s, a in zip(h010_effective.class_sizes, gs.amplitudes))
    assert abs(mass - 1) < 1e-12


def test_ground_state_one_by_one():
    gs = ground_state([[Fraction(5)]], (1,))
    assert gs.energy == 5.0 and gs.amplitudes == (1.0,)


def test_ground_state_nonconvergence():
    ham = parse_hamiltonian(H010_TEXT)
    eg = find_effective_graph(ham, seed=0b001)
    with pytest.raises(ConvergenceError):
        ground_state(effective_hamiltonian(eg), eg.class_sizes, tol=1e-14, max_iter=3)


def test_class_distribution_worked_example(h010_effective):
    gs = ground_state(effective_hamiltonian(h010_effective), h010_effective.class_sizes)
    probs = class_distribution(gs, h010_effective.class_sizes)
    published = (0.32, 0.055, 0.003, 0.622)
    for got, want in zip(probs, published):
        assert abs(got - want) < 5e-4
    assert abs(sum(probs) - 1) < 1e-12


def test_class_distribution_single_class():
    ham = Hamiltonian(n=2, alpha={0b01: ONE, 0b10: ONE})
    eg = find_effective_graph(ham, seed=0)
    gs = ground_state(effective_hamiltonian(eg), eg.class_sizes)
    assert class_distribution(gs, eg.class_sizes) == (1.0,)


def test_seed_independence(h010):
    rng = np.random.Generator(np.random.Philox(6))
    reference = None
    for _ in range(20):
        seed = int(rng.integers(0, 8))
        eg = find_effective_graph(h010, seed=seed)
        gs = ground_state(effective_hamiltonian(eg), eg.class_sizes)
        probs = class_distribution(gs, eg.class_sizes)
        summary = (
            len(eg.reps),
            tuple(sorted(eg.class_sizes)),
            round(gs.energy, 10),
            tuple(sorted(round(p, 9) for p in probs)),
        )
        if reference is None:
            reference = summary
        assert summary == reference


def test_visited_bound(h010):
    eg = find_effective_graph(h010, seed=0b001)
    delta = 3
    assert eg.visited_count <= delta * len(eg.reps) ** 2 + 1


def test_orbit_members_identity_only():
    gens = induced_generators(build_shared(Hamiltonian(n=2, kappa={0b01: ONE, 0b10: Fraction(2)})))
    members, complete = orbit_members(0b01, gens, 16)
    assert complete and members == frozenset({0b01})


def test_orbit_members_hamming_shell():
    ham = hamming_symmetric(5)
    gens = induced_generators(build_shared(ham))
    members, complete = orbit_members(0b00011, gens, 64)
    assert complete and len(members) == 10
    assert all(x.bit_count() == 2 for x in members)


def test_orbit_cap_flags_partial():
    ham = hamming_symmetric(5)
    gens = induced_generators(build_shared(ham))
    members, complete = orbit_members(0b00011, gens, 4)
    assert not complete and len(members) >= 4


def test_threads_do_not_change_result(h010):
    a = Pipeline(h010, threads=1).effective_graph(0b001)
    b = Pipeline(h010, threads=4).effective_graph(0b001)
    assert a == b


def test_sample_deterministic(h010):
    r1 = sample(h010, 500, np.random.Generator(np.random.Philox(9)), seed_value=9)
    r2 = sample(h010, 500, np.random.Generator(np.random.Philox(9)), seed_value=9)
    assert np.array_equal(r1.shot_reps, r2.shot_reps)
    assert np.array_equal(r1.shot_members, r2.shot_members)


def test_sample_members_belong_to_drawn_class(h010):
    report = sample(h010, 300, np.random.Generator(np.random.Philox(10)))
    shared = build_shared(h010)
    for rep, member in report.shot_pairs():
        assert find_representative(member, [rep], shared) == rep


def test_sample_potential_only_returns_seed():
    # single global class, no generators: every shot returns its own seed
    ham = Hamiltonian(n=3, kappa={0b111: ONE})
    rng = np.random.Generator(np.random.Philox(11))
    report = sample(ham, 64, rng)
    probe = np.random.Generator(np.random.Philox(11))
    seeds = probe.integers(0, 8, size=64, dtype=np.uint64)
    assert np.array_equal(report.shot_members, seeds)
    assert report.member_uniformity == "exact"


def test_sample_zero_shots_reports_table(h010):
    report = sample(h010, 0, np.random.Generator(np.random.Philox(12)))
    assert report.shots == 0 and len(report.shot_reps) == 0
    assert len(report.components) == 1
    assert abs(sum(report.probabilities.values()) - 1) < 1e-9


def test_sample_disconnected_components():
    # two components (rank 1 of 2 qubits); coverage weights proportional
    ham = Hamiltonian(n=2, alpha={0b01: ONE}, kappa={0b10: ONE})
    report = sample(ham, 4000, np.random.Generator(np.random.Philox(13)))
    assert len(report.components) == 2
    for comp in report.components:
        assert comp.effective.component_size == 2
    assert abs(sum(report.probabilities.values()) - 1) < 1e-9


def test_sample_cancellation_component():
    ham = Hamiltonian(n=2, alpha={0b11: ONE}, beta={0b11: ONE})
    report = sample(ham, 500, np.random.Generator(np.random.Philox(14)))
    for comp in report.components:
        assert comp.effective.component_size in (1, 2)
    for rep, member in report.shot_pairs():
        pass  # iteration itself checks arrays are consistent lengths
