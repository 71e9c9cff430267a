"""Exact solver: basis enumeration, Hamiltonian structure, propagation."""

import math

import numpy as np
import pytest

from blockadesim.constants import HBAR
from blockadesim.errors import (
    BasisMismatchError,
    GeometryError,
    InputFileError,
    InvalidParameterError,
    SizeCapError,
)
from blockadesim.exact import (
    AtomPositions,
    HamiltonianSpec,
    QuantumState,
    build_hamiltonian,
    evolve,
    full_basis,
    ground_state,
    restricted_basis,
    rydberg_number,
    w_state_fidelity,
)

OMEGA = 2 * math.pi * 1e6  # generic 1 MHz drive for unit tests
C6 = 1.6274841951863897e-60


def cluster(rng, m, scale):
    return AtomPositions(rng.standard_normal((m, 3)) * scale)


def polygon(m, circumradius):
    """Regular m-gon in the xy plane; every pair closer than the diameter."""
    angles = 2 * np.pi * np.arange(m) / m
    coords = np.zeros((m, 3))
    coords[:, 0] = circumradius * np.cos(angles)
    coords[:, 1] = circumradius * np.sin(angles)
    return AtomPositions(coords)


def distance_for_interaction(v_over_omega, omega=OMEGA):
    """Separation at which the pair shift equals v_over_omega * hbar * omega."""
    return (C6 / (HBAR * v_over_omega * omega)) ** (1.0 / 6.0)


def brute_force_independent_sets(positions, radius):
    """Reference enumeration by scanning all 2**M masks."""
    m = len(positions)
    dist = positions.pairwise_distances()
    blocked = [
        (i, j) for i in range(m) for j in range(i + 1, m) if dist[i, j] < radius
    ]
    keep = []
    for mask in range(2**m):
        if all(not ((mask >> i) & 1 and (mask >> j) & 1) for i, j in blocked):
            keep.append(mask)
    return np.array(keep, dtype=np.int64)


# --- positions ---------------------------------------------------------------


def test_positions_shape_validation():
    with pytest.raises(GeometryError):
        AtomPositions(np.zeros((3, 2)))


def test_positions_reject_nonfinite():
    with pytest.raises(GeometryError):
        AtomPositions(np.array([[0.0, 0.0, np.inf]]))


def test_positions_reject_coincident_atoms():
    with pytest.raises(GeometryError, match="coincident"):
        AtomPositions(np.array([[0.0, 0.0, 0.0], [1e-6, 0, 0], [0.0, 0.0, 0.0]]))


def test_positions_file_round_trip(tmp_path):
    path = tmp_path / "atoms.txt"
    path.write_text(
        "# three atoms on a line\n"
        "0 0 0\n"
        "\n"
        "1e-6 0 0   # inline comment\n"
        "2e-6\t0\t0\n"
    )
    positions = AtomPositions.from_text(str(path))
    assert len(positions) == 3
    assert positions.coords[2, 0] == 2e-6


def test_positions_file_wrong_column_count(tmp_path):
    path = tmp_path / "atoms.txt"
    path.write_text("0 0 0\n1e-6 0\n")
    with pytest.raises(InputFileError, match="line 2"):
        AtomPositions.from_text(str(path))


def test_positions_file_bad_number(tmp_path):
    path = tmp_path / "atoms.txt"
    path.write_text("0 0 0\n1e-6 zero 0\n")
    with pytest.raises(InputFileError, match="line 2"):
        AtomPositions.from_text(str(path))


def test_positions_file_empty(tmp_path):
    path = tmp_path / "atoms.txt"
    path.write_text("# nothing here\n")
    with pytest.raises(InputFileError, match="no atom"):
        AtomPositions.from_text(str(path))


def test_positions_file_missing(tmp_path):
    with pytest.raises(InputFileError):
        AtomPositions.from_text(str(tmp_path / "nope.txt"))


# --- basis enumeration ---------------------------------------------------------


def test_full_basis_is_ascending_range():
    basis = full_basis(4)
    assert basis.n_states == 16
    assert np.array_equal(basis.states, np.arange(16))
    assert basis.states[0] == 0  # vacuum first


def test_full_basis_cap():
    with pytest.raises(SizeCapError):
        full_basis(15)
    full_basis(15, max_atoms=15)  # cap is adjustable


def test_restricted_fully_blockaded_cluster():
    positions = polygon(3, 1e-7)
    basis = restricted_basis(positions, 1e-5)
    assert np.array_equal(basis.states, [0, 1, 2, 4])


def test_restricted_chain_nearest_neighbor():
    # four atoms in a line, radius between first and second neighbor
    positions = AtomPositions(np.array([[k * 1e-6, 0, 0] for k in range(4)]))
    basis = restricted_basis(positions, 1.5e-6)
    expected = brute_force_independent_sets(positions, 1.5e-6)
    assert np.array_equal(basis.states, expected)
    assert basis.n_states == 8


def test_restricted_matches_brute_force_random(rng):
    positions = cluster(rng, 10, 1e-6)
    dist = positions.pairwise_distances()
    radius = float(np.median(dist[dist > 0]))
    basis = restricted_basis(positions, radius)
    assert np.array_equal(basis.states, brute_force_independent_sets(positions, radius))


def test_restricted_radius_below_minimum_distance_gives_full(rng):
    positions = cluster(rng, 6, 1e-6)
    dist = positions.pairwise_distances()
    d_min = dist[dist > 0].min()
    basis = restricted_basis(positions, 0.99 * d_min)
    assert basis.n_states == 64


def test_restricted_radius_above_all_distances_gives_single_excitation(rng):
    positions = cluster(rng, 7, 1e-6)
    basis = restricted_basis(positions, 1.0)
    assert basis.n_states == 8  # vacuum plus 7 singles


def test_restricted_cap(rng):
    positions = cluster(rng, 25, 1e-6)
    with pytest.raises(SizeCapError):
        restricted_basis(positions, 1.0)


def test_basis_equality(rng):
    positions = cluster(rng, 5, 1e-6)
    assert restricted_basis(positions, 1e-6) == restricted_basis(positions, 1e-6)
    assert full_basis(5) != restricted_basis(positions, 0.0)


# --- Hamiltonian matrix --------------------------------------------------------


def test_pair_hamiltonian_elements():
    d = 2e-6
    positions = AtomPositions(np.array([[0, 0, 0], [d, 0, 0]]))
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(2))
    dense = h.matrix.toarray()
    # states 0b00, 0b01, 0b10, 0b11
    assert dense[3, 3] == pytest.approx(C6 / (HBAR * d**6), rel=1e-12)
    assert dense[0, 0] == 0.0
    for a, b in [(0, 1), (0, 2), (1, 3), (2, 3)]:
        assert dense[a, b] == pytest.approx(OMEGA / 2, rel=1e-15)
        assert dense[b, a] == pytest.approx(OMEGA / 2, rel=1e-15)
    assert dense[0, 3] == 0.0  # no double flips


def test_detuning_counts_excitations():
    d = 2e-6
    delta = 2 * math.pi * 5e4
    positions = AtomPositions(np.array([[0, 0, 0], [d, 0, 0]]))
    h = build_hamiltonian(
        HamiltonianSpec(positions, OMEGA, C6, detuning=delta), full_basis(2)
    )
    dense = h.matrix.toarray()
    assert dense[1, 1] == pytest.approx(delta, rel=1e-12)
    assert dense[2, 2] == pytest.approx(delta, rel=1e-12)
    assert dense[3, 3] == pytest.approx(2 * delta + C6 / (HBAR * d**6), rel=1e-12)


def test_hamiltonian_is_hermitian(rng):
    positions = cluster(rng, 5, 2e-6)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(5))
    asym = (h.matrix - h.matrix.T).toarray()
    assert np.abs(asym).max() == 0.0
    phi = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    psi = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    lhs = np.vdot(phi, h.apply(psi))
    rhs = np.conj(np.vdot(psi, h.apply(phi)))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_restricted_couplings_stay_in_basis(rng):
    positions = cluster(rng, 6, 5e-7)
    dist = positions.pairwise_distances()
    radius = float(np.median(dist[dist > 0]))
    basis = restricted_basis(positions, radius)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), basis)
    # row sums of the flip part: each state couples only to basis members
    coo = h.matrix.tocoo()
    offdiag = coo.row != coo.col
    assert np.all(np.isin(basis.states[coo.col[offdiag]], basis.states))
    assert np.all(coo.data[offdiag] == OMEGA / 2)


def test_geometry_basis_mismatch(rng):
    positions = cluster(rng, 4, 1e-6)
    with pytest.raises(BasisMismatchError):
        build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(5))


# --- propagation ---------------------------------------------------------------


def test_single_atom_rabi_oscillation():
    positions = AtomPositions(np.zeros((1, 3)))
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, 0.0), full_basis(1))
    t = np.linspace(0.0, 5 * 2 * np.pi / OMEGA, 600)
    states = evolve(h, ground_state(h.basis), t)
    n_r = np.array([rydberg_number(s) for s in states])
    assert np.abs(n_r - np.sin(OMEGA * t / 2) ** 2).max() < 1e-12


def test_noninteracting_atoms_factorize(rng):
    positions = cluster(rng, 3, 1e-6)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, 0.0), full_basis(3))
    t = np.linspace(0.0, 2 * 2 * np.pi / OMEGA, 300)
    states = evolve(h, ground_state(h.basis), t)
    n_r = np.array([rydberg_number(s) for s in states])
    assert np.abs(n_r - 3 * np.sin(OMEGA * t / 2) ** 2).max() < 1e-12


def test_two_blockaded_atoms_oscillate_at_sqrt2(rng):
    d = distance_for_interaction(1e4)
    positions = AtomPositions(np.array([[0, 0, 0], [d, 0, 0]]))
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(2))
    t = np.linspace(0.0, 2 * np.pi / (math.sqrt(2) * OMEGA), 400)[1:]
    states = evolve(h, ground_state(h.basis), t)
    n_r = np.array([rydberg_number(s) for s in states])
    ideal = np.sin(math.sqrt(2) * OMEGA * t / 2) ** 2
    assert np.abs(n_r - ideal).max() < 0.01
    assert n_r.max() <= 1.02


def test_sparse_and_dense_routes_agree(rng):
    positions = cluster(rng, 6, 1.5e-6)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(6))
    t = np.linspace(0.0, 2 * np.pi / OMEGA, 40)
    psi0 = ground_state(h.basis)
    dense = evolve(h, psi0, t)
    sparse = evolve(h, psi0, t, dense_cutoff=0)
    diff = max(
        np.abs(a.amplitudes - b.amplitudes).max() for a, b in zip(dense, sparse)
    )
    assert diff < 1e-8


def test_grid_refinement_leaves_values_unchanged(rng):
    positions = cluster(rng, 4, 1.5e-6)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(4))
    coarse = np.linspace(0.0, 2 * np.pi / OMEGA, 33)
    fine = np.linspace(0.0, 2 * np.pi / OMEGA, 65)  # midpoints inserted
    psi0 = ground_state(h.basis)
    on_coarse = [rydberg_number(s) for s in evolve(h, psi0, coarse, dense_cutoff=0)]
    on_fine = [rydberg_number(s) for s in evolve(h, psi0, fine, dense_cutoff=0)]
    assert np.abs(np.array(on_coarse) - np.array(on_fine)[::2]).max() < 1e-8


def test_norm_conserved_along_trajectory(rng):
    positions = cluster(rng, 5, 1.5e-6)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(5))
    t = np.linspace(0.0, 2 * np.pi / OMEGA, 200)
    for route in (full_basis(5).n_states + 1, 0):  # dense, then sparse
        states = evolve(h, ground_state(h.basis), t, dense_cutoff=route)
        drift = max(abs(s.norm() - 1.0) for s in states)
        assert drift < 1e-9


def test_restricted_matches_full_when_strongly_blockaded(rng):
    # mixed geometry: some pairs inside the restriction radius, some out
    radius = distance_for_interaction(100.0)
    positions = cluster(rng, 6, radius)
    h_full = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(6))
    h_rest = build_hamiltonian(
        HamiltonianSpec(positions, OMEGA, C6), restricted_basis(positions, radius)
    )
    assert h_rest.dim < h_full.dim
    t = np.linspace(0.0, 2 * np.pi / OMEGA, 120)
    n_full = np.array(
        [rydberg_number(s) for s in evolve(h_full, ground_state(h_full.basis), t)]
    )
    n_rest = np.array(
        [rydberg_number(s) for s in evolve(h_rest, ground_state(h_rest.basis), t)]
    )
    assert np.abs(n_full - n_rest).max() < 0.01 * n_full.max()


def test_blockade_only_suppresses(rng):
    # interacting expectation never exceeds the independent-atom value on
    # the rising half period
    for _ in range(5):
        m = int(rng.integers(2, 9))
        positions = cluster(rng, m, 4.76e-6 * float(rng.uniform(0.3, 2.0)))
        h = build_hamiltonian(
            HamiltonianSpec(positions, OMEGA, C6), full_basis(m)
        )
        t = np.linspace(0.0, np.pi / OMEGA, 150)[1:]
        n_r = np.array(
            [rydberg_number(s) for s in evolve(h, ground_state(h.basis), t)]
        )
        assert np.all(n_r <= m * np.sin(OMEGA * t / 2) ** 2 + 1e-9)


def test_evolve_validates_grid(rng):
    positions = cluster(rng, 2, 1e-6)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(2))
    psi0 = ground_state(h.basis)
    with pytest.raises(InvalidParameterError):
        evolve(h, psi0, np.array([0.0, 2.0, 1.0]))
    with pytest.raises(InvalidParameterError):
        evolve(h, psi0, np.array([-1.0, 0.0]))
    with pytest.raises(InvalidParameterError):
        evolve(h, psi0, np.array([]))


def test_evolve_rejects_basis_mismatch(rng):
    positions = cluster(rng, 3, 1e-6)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(3))
    other = ground_state(restricted_basis(positions, 1.0))
    with pytest.raises(BasisMismatchError):
        evolve(h, other, np.array([0.0, 1e-7]))


def test_quantum_state_requires_normalization():
    basis = full_basis(2)
    with pytest.raises(InvalidParameterError):
        QuantumState(np.array([0.5, 0.0, 0.0, 0.0]), basis)


# --- observables ----------------------------------------------------------------


def test_rydberg_number_of_ground_state():
    assert rydberg_number(ground_state(full_basis(3))) == 0.0


def test_rydberg_number_counts_excitations():
    basis = full_basis(2)
    amps = np.zeros(4, dtype=complex)
    amps[3] = 1.0  # both atoms excited
    assert rydberg_number(QuantumState(amps, basis)) == pytest.approx(2.0)


def test_w_state_has_unit_fidelity_and_single_excitation():
    basis = full_basis(4)
    amps = np.zeros(16, dtype=complex)
    amps[basis.singles] = 0.5  # 1/sqrt(4)
    w = QuantumState(amps, basis)
    assert w_state_fidelity(w) == pytest.approx(1.0, rel=1e-12)
    assert rydberg_number(w) == pytest.approx(1.0, rel=1e-12)


def test_w_fidelity_of_ground_state_is_zero():
    assert w_state_fidelity(ground_state(full_basis(3))) == 0.0


def test_blockaded_pi_pulse_lands_on_w_state(rng):
    m = 5
    radius = distance_for_interaction(1e3)
    positions = polygon(m, radius / 2)
    h = build_hamiltonian(HamiltonianSpec(positions, OMEGA, C6), full_basis(m))
    t_pi = np.pi / (math.sqrt(m) * OMEGA)
    state = evolve(h, ground_state(h.basis), np.array([t_pi]))[0]
    assert w_state_fidelity(state) > 0.99
