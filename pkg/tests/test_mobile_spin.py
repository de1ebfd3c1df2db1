import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kickspin.core_linalg import angular_distance, canonical_phase, unitarity_defect
from kickspin.errors import InvalidArgument
from kickspin.kicked_spin import DEFAULT_MODEL, build_floquet
from kickspin.mobile_spin import (
    GridSpec,
    LabState,
    MovingFrameState,
    apply_lab_floquet,
    build_lab_floquet,
    build_moving_frame_floquet,
    compare_frames,
    eigenphases,
    frame_transform,
    inverse_frame_transform,
    match_phases,
    moving_frame_kinetic,
    quasienergy_phase_factor,
)


def random_state(grid, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.normal(size=(2, grid.n_points)) + 1j * rng.normal(size=(2, grid.n_points))
    return LabState(grid, v / np.linalg.norm(v))


def site_phases(grid):
    # per-site 2x2 eigensolve with numpy as the oracle
    out = []
    for r in grid.positions:
        out.extend(-np.angle(np.linalg.eigvals(build_floquet(DEFAULT_MODEL, r))))
    return np.array(out)


@pytest.mark.parametrize("n", [4, 12, 512])
def test_grid_validation(n):
    with pytest.raises(InvalidArgument):
        GridSpec(n)


def test_grid_rejects_bad_mass_and_period():
    with pytest.raises(InvalidArgument):
        GridSpec(16, mass=0.0)
    with pytest.raises(InvalidArgument):
        GridSpec(16, period=-1.0)


def test_lab_operator_unitary():
    assert unitarity_defect(build_lab_floquet(GridSpec(8))) < 1e-10


def test_heavy_mass_gives_site_spectrum():
    grid = GridSpec(16, mass=1e12)
    got = eigenphases(build_lab_floquet(grid))
    assert match_phases(got, canonical_phase(site_phases(grid))) < 1e-9
    want = np.concatenate([g / 2 + s * np.pi / 2 for s in (-1, 1) for g in [grid.positions]])
    assert match_phases(got, canonical_phase(want)) < 1e-9


def test_free_particle_spectrum():
    grid = GridSpec(16, mass=0.7)
    got = eigenphases(build_lab_floquet(grid, spin_factor=False))
    free = canonical_phase(grid.kinetic_phases())
    assert match_phases(got, np.concatenate([free, free])) < 1e-10


@settings(max_examples=5)
@given(st.integers(0, 2**31))
def test_split_step_matches_dense(seed):
    grid = GridSpec(64)
    state = random_state(grid, seed)
    dense = build_lab_floquet(grid) @ state.flat()
    split = apply_lab_floquet(grid, state)
    assert np.linalg.norm(split.flat() - dense) < 1e-10
    assert abs(split.norm() - 1) < 1e-12


def test_split_step_heavy_mass_is_pointwise_kick():
    grid = GridSpec(16, mass=1e12)
    state = random_state(grid, 3)
    out = apply_lab_floquet(grid, state).values
    site = np.array([build_floquet(DEFAULT_MODEL, r) @ state.values[:, j] for j, r in enumerate(grid.positions)]).T
    assert np.allclose(out, site, atol=1e-9)


def test_split_step_grid_mismatch():
    with pytest.raises(InvalidArgument):
        apply_lab_floquet(GridSpec(16), random_state(GridSpec(32), 0))


def test_frame_round_trip_and_labels():
    grid = GridSpec(32)
    state = random_state(grid, 9)
    back = inverse_frame_transform(grid, frame_transform(grid, state))
    assert np.allclose(back.values, state.values, atol=1e-12)

    f = np.exp(1j * grid.positions)
    c, s = np.cos(grid.positions / 4), np.sin(grid.positions / 4)
    moving = frame_transform(grid, LabState(grid, np.array([c, s]) * f))
    assert moving.boundary == "antiperiodic_4pi"
    assert np.allclose(moving.values[0], 0, atol=1e-12)
    assert np.allclose(moving.values[1], f, atol=1e-12)


def test_constant_state_profiles():
    grid = GridSpec(16)
    moving = frame_transform(grid, LabState(grid, np.array([np.ones(16), np.zeros(16)])))
    assert np.allclose(moving.values[0], np.sin(grid.positions / 4))
    assert np.allclose(moving.values[1], np.cos(grid.positions / 4))


def test_twist_consistency():
    grid = GridSpec(32)
    half = grid.n_points // 2
    # a lab state that repeats after 2 pi
    first = random_state(grid, 21).values[:, :half]
    psi = frame_transform(grid, LabState(grid, np.concatenate([first, first], axis=1))).values
    twist = np.array([[0, 1], [-1, 0]])
    assert np.allclose(psi[:, half:], twist @ psi[:, :half], atol=1e-10)


def test_frame_needs_four_pi():
    grid = GridSpec(16, period=2 * np.pi)
    with pytest.raises(InvalidArgument):
        frame_transform(grid, random_state(grid, 0))
    with pytest.raises(InvalidArgument):
        build_moving_frame_floquet(grid)


def test_moving_state_boundary_validated():
    with pytest.raises(InvalidArgument):
        MovingFrameState(GridSpec(8), np.zeros((2, 8)), "periodic")


def test_quasienergy_factor_determinant():
    grid = GridSpec(16)
    d = np.diag(quasienergy_phase_factor(grid))
    n = grid.n_points
    assert np.allclose(d[:n] * d[n:], np.exp(-1j * grid.positions))
    spin_det = np.prod([np.linalg.det(build_floquet(DEFAULT_MODEL, r)) for r in grid.positions])
    assert abs(np.prod(d) - spin_det) < 1e-10


@pytest.mark.parametrize("mode", ["spectral", "conjugated"])
def test_moving_operators_unitary(mode):
    assert unitarity_defect(build_moving_frame_floquet(GridSpec(16), mode)) < 1e-10


@pytest.mark.parametrize("n", [16, 32])
def test_exact_equivalence(n):
    grid = GridSpec(n)
    assert compare_frames(grid, "spectral").matching_distance < 1e-8
    assert compare_frames(grid, "conjugated").matching_distance < 1e-10


def test_spectral_equals_conjugated_entrywise():
    grid = GridSpec(16, mass=0.5)
    a = build_moving_frame_floquet(grid, "spectral")
    b = build_moving_frame_floquet(grid, "conjugated")
    assert np.max(np.abs(a - b)) < 1e-12


def test_heavy_mass_moving_spectrum():
    grid = GridSpec(16, mass=1e12)
    got = eigenphases(build_moving_frame_floquet(grid, "spectral"))
    assert match_phases(got, -np.angle(np.diag(quasienergy_phase_factor(grid)))) < 1e-9


def test_misaligned_window_is_flagged():
    cmp = compare_frames(GridSpec(16), "spectral", "misaligned")
    assert cmp.flagged and cmp.matching_distance > 1e-3
    with pytest.raises(InvalidArgument):
        moving_frame_kinetic(GridSpec(16), "sideways")


def test_single_exponential_differs():
    cmp = compare_frames(GridSpec(16), "spectral", form="single_exponential")
    assert cmp.matching_distance > 1e-3


def test_mass_enters_only_through_kinetic_phases():
    # k = n / 2 on this grid, so 1/mass -> 1/mass + 16 pi shifts every k^2 / 2 mass by n^2 * 2 pi
    a = GridSpec(16, mass=1.0)
    b = GridSpec(16, mass=1.0 / (1.0 + 16 * np.pi))
    c = GridSpec(16, mass=2.0)
    assert np.allclose(np.exp(-1j * a.kinetic_phases()), np.exp(-1j * b.kinetic_phases()))
    pa, pb, pc = (eigenphases(build_lab_floquet(g)) for g in (a, b, c))
    assert match_phases(pa, pb) < 1e-9
    assert match_phases(pa, pc) > 1e-6


def test_match_phases():
    assert match_phases([np.pi - 1e-3, 0.0], [0.0, -np.pi + 1e-3]) == pytest.approx(2e-3)
    with pytest.raises(InvalidArgument):
        match_phases([0.0], [0.0, 1.0])
    assert angular_distance(0.0, 2 * np.pi) < 1e-15
