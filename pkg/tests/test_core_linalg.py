import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kickspin.core_linalg import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    angular_distance,
    canonical_phase,
    dft,
    eig2_unitary,
    exp_i_hermitian2,
    is_hermitian,
    is_unitary,
    jacobi_hermitian,
    pauli_components,
    pauli_exp,
    unitary_eigensystem,
)
from kickspin.errors import InvalidArgument

from conftest import random_unitary

finite = st.floats(-50, 50, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


def series_expm(m, terms=60):
    out = np.eye(len(m), dtype=complex)
    term = np.eye(len(m), dtype=complex)
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


def naive_dft(x):
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x / math.sqrt(n)


@given(finite)
def test_canonical_phase_range(x):
    y = canonical_phase(x)
    assert -math.pi <= y < math.pi
    assert abs(np.exp(1j * y) - np.exp(1j * x)) < 1e-9


def test_canonical_phase_boundary():
    assert canonical_phase(math.pi) == -math.pi
    assert canonical_phase(-math.pi) == -math.pi


def test_angular_distance_wraps():
    assert angular_distance(math.pi - 0.1, -math.pi + 0.1) == pytest.approx(0.2)


def test_pauli_exp_y_quarter_turn_matches_series():
    got = pauli_exp((0, 1, 0), math.pi / 2)
    assert np.allclose(got, series_expm(-0.5j * math.pi * SIGMA_Y), atol=1e-14)
    assert np.allclose(got, -1j * SIGMA_Y, atol=1e-15)


@given(st.floats(-10, 10), st.sampled_from([SIGMA_X, SIGMA_Y, SIGMA_Z]))
def test_pauli_exp_against_series(angle, sigma):
    axis = [np.real(np.trace(sigma @ s)) / 2 for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
    assert np.allclose(pauli_exp(axis, angle), series_expm(-1j * angle * sigma), atol=1e-12)


def test_pauli_exp_rejects_non_unit_axis():
    with pytest.raises(InvalidArgument):
        pauli_exp((1, 1, 0), 0.3)


@given(seeds, st.floats(-3, 3))
def test_exp_i_hermitian2(seed, t):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = (z + z.conj().T) / 2
    assert np.allclose(exp_i_hermitian2(h, t), series_expm(1j * t * h, 80), atol=1e-11)
    a = pauli_components(h)
    assert np.allclose(a[0] * np.eye(2) + a[1] * SIGMA_X + a[2] * SIGMA_Y + a[3] * SIGMA_Z, h)


@given(seeds)
def test_eig2_unitary_reconstructs(seed):
    u = random_unitary(np.random.default_rng(seed), 2)
    phases, vecs = eig2_unitary(u)
    assert np.allclose(u @ vecs, vecs * np.exp(-1j * phases), atol=1e-12)


@given(seeds, st.integers(1, 24))
def test_jacobi_against_constructed_spectrum(seed, n):
    rng = np.random.default_rng(seed)
    q = random_unitary(rng, n)
    vals = np.sort(rng.uniform(-5, 5, n))
    m = q @ np.diag(vals) @ q.conj().T
    eig = jacobi_hermitian((m + m.conj().T) / 2)
    assert np.allclose(eig.values, vals, atol=1e-11)
    assert np.allclose(m @ eig.vectors, eig.vectors * eig.values, atol=1e-10)
    assert is_unitary(eig.vectors, 1e-11)


def test_jacobi_degenerate_and_diagonal():
    eig = jacobi_hermitian(np.diag([2.0, 2.0, -1.0]).astype(complex))
    assert np.allclose(eig.values, [-1, 2, 2])
    eig = jacobi_hermitian(np.zeros((3, 3)))
    assert np.allclose(eig.values, 0)


def test_jacobi_rejects_non_hermitian():
    with pytest.raises(InvalidArgument):
        jacobi_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


@given(seeds, st.integers(1, 20))
def test_unitary_eigensystem_recovers_phases(seed, n):
    rng = np.random.default_rng(seed)
    q = random_unitary(rng, n)
    phases = np.sort(rng.uniform(-math.pi, math.pi, n))
    u = q @ np.diag(np.exp(-1j * phases)) @ q.conj().T
    eig = unitary_eigensystem(u)
    assert np.max(angular_distance(np.sort(eig.values), phases)) < 1e-10
    assert np.allclose(u @ eig.vectors, eig.vectors * np.exp(-1j * eig.values), atol=1e-9)


def test_unitary_eigensystem_degenerate_cluster(rng):
    q = random_unitary(rng, 6)
    phases = np.array([0.3, 0.3, 0.3, -2.0, -2.0, 1.0])
    u = q @ np.diag(np.exp(-1j * phases)) @ q.conj().T
    eig = unitary_eigensystem(u)
    assert np.allclose(np.sort(eig.values), np.sort(phases), atol=1e-10)
    assert np.allclose(u @ eig.vectors, eig.vectors * np.exp(-1j * eig.values), atol=1e-9)


def test_unitary_eigensystem_rejects_non_unitary():
    with pytest.raises(InvalidArgument):
        unitary_eigensystem(np.diag([1.0, 2.0]))


def test_structure_predicates():
    assert is_hermitian(SIGMA_Y) and is_unitary(SIGMA_Y)
    assert not is_hermitian(1j * SIGMA_X)


@given(seeds, st.sampled_from([1, 2, 3, 8, 16, 31]))
def test_dft_matches_direct_sum(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert np.allclose(dft(x), naive_dft(x), atol=1e-12)
    assert np.allclose(dft(dft(x), inverse=True), x, atol=1e-12)
    assert np.linalg.norm(dft(x)) == pytest.approx(np.linalg.norm(x))
