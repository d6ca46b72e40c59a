import math
from fractions import Fraction

import numpy as np
import pytest

from stoqsym.errors import CapExceededError
from stoqsym.model import Hamiltonian, parse_hamiltonian
from stoqsym.effective import (
    Pipeline,
    class_distribution,
    effective_hamiltonian,
    find_representative,
    ground_state,
)
from stoqsym.oracle import (
    brute_force_classes,
    cheeger_ratio,
    dense_entry_exact,
    dense_hamiltonian,
    exact_ground,
    gi_reduction,
    naive_isomorphic,
    perturbation_bound,
    simple_graph,
    verify_effective,
)
from stoqsym.termgraph import build_shared
from stoqsym.instances import (
    H010_TEXT,
    hamming_symmetric,
    permuted_copy,
    random_graph,
    random_stoquastic,
)

ONE = Fraction(1)


def test_dense_single_flip():
    ham = Hamiltonian(n=1, alpha={1: ONE})
    m = dense_hamiltonian(ham).matrix
    assert m.tolist() == [[0.0, -1.0], [-1.0, 0.0]]


def test_dense_worked_example_is_unit_hypercube():
    ham = parse_hamiltonian(H010_TEXT)
    m = dense_hamiltonian(ham).matrix
    for x in range(8):
        for y in range(8):
            if x == y or (x ^ y).bit_count() == 1:
                continue
            assert m[x, y] == 0.0
    assert all(m[x, x ^ b] == -1.0 for x in range(8) for b in (1, 2, 4))


def test_dense_matches_exact_entries():
    rng = np.random.Generator(np.random.Philox(31))
    for _ in range(25):
        ham = random_stoquastic(rng, n_range=(2, 7))
        m = dense_hamiltonian(ham).matrix
        dim = 1 << ham.n
        for _ in range(30):
            x = int(rng.integers(0, dim))
            y = int(rng.integers(0, dim))
            assert m[x, y] == float(dense_entry_exact(ham, x, y))


def test_dense_cap():
    with pytest.raises(CapExceededError):
        dense_hamiltonian(hamming_symmetric(13))


def test_exact_ground_single_qubit():
    ham = Hamiltonian(n=1, alpha={1: ONE})
    lam0, phi, lam1 = exact_ground(dense_hamiltonian(ham))
    assert abs(lam0 + 1) < 1e-12 and abs(lam1 - 1) < 1e-12
    assert np.allclose(np.abs(phi), 1 / math.sqrt(2))


def test_exact_ground_worked_example():
    ham = parse_hamiltonian(H010_TEXT)
    lam0, phi, lam1 = exact_ground(dense_hamiltonian(ham))
    assert abs(lam0 + 3 * math.sqrt(2)) < 1e-10
    assert lam0 <= lam1


def test_brute_force_full_worked_example():
    ham = parse_hamiltonian(H010_TEXT)
    classes = brute_force_classes(ham, "full")
    assert sorted(sorted(c) for c in classes) == [
        [0b000, 0b011, 0b110],
        [0b001, 0b100, 0b111],
        [0b010],
        [0b101],
    ]


def test_brute_force_singletons():
    ham = Hamiltonian(n=2, kappa={0b01: ONE, 0b10: Fraction(5)})
    classes = brute_force_classes(ham, "full")
    assert all(len(c) == 1 for c in classes)


def test_brute_force_hamming_shells():
    ham = hamming_symmetric(3)
    classes = brute_force_classes(ham, "signed")
    shells = sorted(sorted(c) for c in classes)
    assert shells == [[0], [1, 2, 4], [3, 5, 6], [7]]
    assert brute_force_classes(ham, "full") == brute_force_classes(ham, "signed")


def test_brute_force_caps():
    with pytest.raises(CapExceededError):
        brute_force_classes(hamming_symmetric(4), "full")
    with pytest.raises(CapExceededError):
        brute_force_classes(hamming_symmetric(9), "signed")


def test_signed_classes_refine_certificate_classes():
    # signed orbits always sit inside certificate classes
    rng = np.random.Generator(np.random.Philox(32))
    from stoqsym.effective import _resolver_for

    for _ in range(15):
        ham = random_stoquastic(rng, n_range=(2, 6))
        resolver = _resolver_for(build_shared(ham))
        for cls in brute_force_classes(ham, "signed"):
            certs = {resolver.certificate(x) for x in cls}
            assert len(certs) == 1


def test_verify_effective_worked_example():
    ham = parse_hamiltonian(H010_TEXT)
    eg = Pipeline(ham).effective_graph(0b001)
    gs = ground_state(effective_hamiltonian(eg), eg.class_sizes)
    diag = verify_effective(ham, eg, gs.energy, class_distribution(gs, eg.class_sizes))
    assert diag.energy_error < 1e-9
    assert diag.total_variation < 1e-9
    assert diag.amplitude_spread < 1e-9
    assert diag.passes()


def test_verify_effective_trivial():
    ham = Hamiltonian(n=1, alpha={1: ONE})
    eg = Pipeline(ham).effective_graph(0)
    gs = ground_state(effective_hamiltonian(eg), eg.class_sizes)
    diag = verify_effective(ham, eg, gs.energy, class_distribution(gs, eg.class_sizes))
    assert diag.energy_error < 1e-12 and diag.total_variation < 1e-12


def test_cheeger_single_qubit_equality():
    ham = Hamiltonian(n=1, alpha={1: ONE})
    op = dense_hamiltonian(ham)
    lam0, phi, lam1 = exact_ground(op)
    h = cheeger_ratio(op, phi, [0])
    assert abs(h - 1.0) < 1e-12
    assert abs((lam1 - lam0) - 2 * h) < 1e-12


def test_cheeger_class_subset():
    ham = parse_hamiltonian(H010_TEXT)
    op = dense_hamiltonian(ham)
    lam0, phi, lam1 = exact_ground(op)
    h = cheeger_ratio(op, phi, [0b000, 0b011, 0b110])
    assert h > 0
    assert lam1 - lam0 <= 2 * h + 1e-9


def test_cheeger_rejects_trivial_subsets():
    ham = Hamiltonian(n=1, alpha={1: ONE})
    op = dense_hamiltonian(ham)
    _, phi, _ = exact_ground(op)
    with pytest.raises(ValueError):
        cheeger_ratio(op, phi, [])
    with pytest.raises(ValueError):
        cheeger_ratio(op, phi, [0, 1])


def test_cheeger_random_family():
    rng = np.random.Generator(np.random.Philox(33))
    for _ in range(10):
        ham = random_stoquastic(rng, n_range=(2, 6))
        op = dense_hamiltonian(ham)
        lam0, phi, lam1 = exact_ground(op)
        gap = lam1 - lam0
        dim = 1 << ham.n
        for _ in range(20):
            size = int(rng.integers(1, dim))
            subset = [int(x) for x in rng.choice(dim, size=size, replace=False)]
            assert gap <= 2 * cheeger_ratio(op, phi, subset) + 1e-9


def test_perturbation_zero():
    ham = parse_hamiltonian(H010_TEXT)
    rep = perturbation_bound(ham, Hamiltonian(n=3))
    assert rep.tan2 == 0.0
    assert rep.fidelity_lower_bound == 1.0
    assert abs(rep.exact_fidelity - 1.0) < 1e-12


def test_perturbation_single_z_term():
    ham = parse_hamiltonian(H010_TEXT)
    delta = Hamiltonian(n=3, kappa={0b001: Fraction(1, 1000)})
    rep = perturbation_bound(ham, delta)
    assert rep.applicable
    assert rep.exact_fidelity >= rep.fidelity_lower_bound


def test_perturbation_gap_condition():
    # expectation of the perturbation exceeds the gap: bound inapplicable
    ham = Hamiltonian(n=1, alpha={1: ONE})
    delta = Hamiltonian(n=1, alpha={1: Fraction(-3)})  # +3X, expectation 3 > gap 2
    rep = perturbation_bound(ham, delta)
    assert not rep.applicable


def test_gi_reduction_shapes():
    tri = simple_graph(3, [(0, 1), (1, 2), (0, 2)])
    path = simple_graph(3, [(0, 1), (1, 2)])
    ham, u1, u2 = gi_reduction(tri, path)
    assert ham.n == 6
    assert u1 == 0b000111 and u2 == 0b111000
    assert naive_isomorphic(tri, tri) and not naive_isomorphic(tri, path)


def test_gi_reduction_agreement():
    rng = np.random.Generator(np.random.Philox(34))
    for _ in range(40):
        nv = int(rng.integers(2, 6))
        g1 = random_graph(rng, nv, 0.5)
        g2 = permuted_copy(rng, g1) if rng.random() < 0.5 else random_graph(rng, nv, 0.5)
        ham, u1, u2 = gi_reduction(g1, g2)
        equivalent = find_representative(u1, [u2], build_shared(ham)) is not None
        assert equivalent == naive_isomorphic(g1, g2)


def test_certificate_partition_matches_full_brute_force():
    # full-permutation oracle equals the certificate partition at n <= 3
    rng = np.random.Generator(np.random.Philox(35))
    from stoqsym.effective import _resolver_for

    for _ in range(25):
        ham = random_stoquastic(rng, n=3, extra_terms=(1, 3))
        resolver = _resolver_for(build_shared(ham))
        groups = {}
        for x in range(8):
            groups.setdefault(resolver.certificate(x), set()).add(x)
        ours = sorted(sorted(c) for c in groups.values())
        brute = sorted(sorted(c) for c in brute_force_classes(ham, "full"))
        assert ours == brute
