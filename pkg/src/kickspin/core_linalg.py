"""Dense complex linear algebra used by every other module.

Conventions
-----------
* A unitary eigenvalue is written ``exp(-1j * E)``; the eigenphase ``E`` is
  reported in ``[-pi, pi)``.
* 2x2 matrices ("Mat2C") and dense operators ("DenseMat") are plain complex
  ``numpy`` arrays; predicates below check their structure.
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from numba import njit

from .errors import InvalidArgument, NumericFailure

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

STRUCTURE_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-13
DEGENERACY_GAP = 1e-8
UNITARY_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class EigenPairSet:
    """Eigenvalues (Hermitian input) or eigenphases (unitary input).

    ``vectors[:, k]`` is the eigenvector belonging to ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def eigenphases(self) -> np.ndarray:
        return self.values

    def __len__(self):
        return len(self.values)


def canonical_phase(x):
    """Fold angles into ``[-pi, pi)``."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    # mod can round up to exactly pi
    y = np.where(y >= np.pi, y - 2 * np.pi, y)
    return float(y) if np.ndim(y) == 0 else y


def angular_distance(a, b):
    """Distance between angles on the circle, in ``[0, pi]``."""
    return np.abs(canonical_phase(np.asarray(a) - np.asarray(b)))


def as_dense(m, name="matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidArgument(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument(f"{name} has non-finite entries")
    return a


def hermiticity_defect(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T)))


def unitarity_defect(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def is_hermitian(m, tol=STRUCTURE_TOL) -> bool:
    return hermiticity_defect(m) <= tol


def is_unitary(m, tol=STRUCTURE_TOL) -> bool:
    return unitarity_defect(m) <= tol


def dagger(m):
    return np.asarray(m).conj().T


# --------------------------------------------------------------------------
# 2x2 routines


def pauli_exp(axis, angle: float) -> np.ndarray:
    """``cos(angle) I - i sin(angle) (axis . sigma)``, i.e. ``exp(-i angle axis.sigma)``.

    Callers wanting a rotation by ``theta`` pass ``angle = theta / 2``.
    """
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise InvalidArgument("axis must be a finite real 3-vector")
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise InvalidArgument(f"axis must have unit norm, got {np.linalg.norm(n)!r}")
    if not np.isfinite(angle):
        raise InvalidArgument("angle must be finite")
    gen = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return np.cos(angle) * SIGMA_0 - 1j * np.sin(angle) * gen


def pauli_components(m) -> np.ndarray:
    """Coefficients ``(a0, ax, ay, az)`` with ``m = a0 I + a . sigma``."""
    m = np.asarray(m, dtype=complex)
    return np.array([np.trace(m) / 2] + [np.trace(m @ s) / 2 for s in PAULI])


def exp_i_hermitian2(h, t: float = 1.0) -> np.ndarray:
    """``exp(+i t h)`` for a Hermitian 2x2 ``h`` via its Pauli decomposition."""
    a = pauli_components(h).real
    norm = float(np.linalg.norm(a[1:]))
    phase = np.exp(1j * a[0] * t)
    if norm == 0.0:
        return phase * SIGMA_0
    return phase * pauli_exp(a[1:] / norm, -norm * t)


def eig2_unitary(u):
    """Closed-form eigensystem of a 2x2 unitary.

    Returns ``(phases, vectors)`` with ``u @ vectors[:, k] = exp(-i phases[k]) vectors[:, k]``,
    unit-norm vectors and phases in ``[-pi, pi)`` (unsorted).
    """
    u = np.asarray(u, dtype=complex)
    tr = u[0, 0] + u[1, 1]
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    root = np.sqrt(tr * tr - 4 * det)
    zs = ((tr + root) / 2, (tr - root) / 2)
    if abs(zs[0] - zs[1]) < 1e-14 and abs(u[0, 1]) + abs(u[1, 0]) < 1e-14:
        z = u[0, 0]
        vecs = np.eye(2, dtype=complex)
        zs = (z, z)
    else:
        cols = []
        for z in zs:
            c1 = np.array([u[0, 1], z - u[0, 0]])
            c2 = np.array([z - u[1, 1], u[1, 0]])
            c = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
            cols.append(c / np.linalg.norm(c))
        vecs = np.column_stack(cols)
    # |z| = 1 for unitary u; only the argument is kept
    phases = np.array([canonical_phase(-np.angle(z)) for z in zs])
    return phases, vecs


# --------------------------------------------------------------------------
# Hermitian eigensolver


@njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j].real ** 2 + a[i, j].imag ** 2
    return np.sqrt(acc)


@njit(cache=True)
def _jacobi_sweep(a, vt):
    """One cyclic-by-row sweep of complex Jacobi rotations, in place.

    Only rows are rotated (contiguous in C order); Hermiticity supplies the
    columns. ``vt`` holds the eigenvector matrix transposed.
    """
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            mag = abs(apq)
            if mag < 1e-300:
                continue
            e = apq / mag
            ec = e.conjugate()
            theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
            if theta >= 0.0:
                t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
            else:
                t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            app = a[p, p].real - t * mag
            aqq = a[q, q].real + t * mag
            # J = [[c, s], [-s e*, c e*]] on (p, q); rows of J^H A J off the block
            for k in range(n):
                apk = a[p, k]
                aqk = a[q, k]
                a[p, k] = c * apk - s * e * aqk
                a[q, k] = s * apk + c * e * aqk
            for k in range(n):
                a[k, p] = a[p, k].conjugate()
                a[k, q] = a[q, k].conjugate()
            a[p, p] = app
            a[q, q] = aqq
            a[p, q] = 0.0
            a[q, p] = 0.0
            for k in range(n):
                vpk = vt[p, k]
                vqk = vt[q, k]
                vt[p, k] = c * vpk - s * ec * vqk
                vt[q, k] = s * vpk + c * ec * vqk


def jacobi_hermitian(m, max_sweeps: int = JACOBI_MAX_SWEEPS, rel_tol: float = JACOBI_REL_TOL) -> EigenPairSet:
    """Cyclic complex Jacobi eigensolver for a Hermitian matrix.

    Iteration stops when the off-diagonal Frobenius norm falls below
    ``rel_tol * ||m||_F``. If rounding keeps it from getting there, it stops
    once a sweep no longer reduces it and the remainder is below
    ``1e-11 ||m||_F``. Eigenvalues are returned in ascending order.
    """
    a = as_dense(m)
    if hermiticity_defect(a) > 1e-10 * max(1.0, float(np.linalg.norm(a))):
        raise InvalidArgument("jacobi_hermitian needs a Hermitian matrix")
    n = a.shape[0]
    a = np.ascontiguousarray((a + a.conj().T) / 2)
    scale = float(np.linalg.norm(a))
    vt = np.eye(n, dtype=complex)
    if n == 1 or scale == 0.0:
        return EigenPairSet(np.real(np.diag(a)).copy(), vt)

    target = rel_tol * scale
    off = _off_norm(a)
    for _ in range(max_sweeps):
        if off <= target:
            break
        _jacobi_sweep(a, vt)
        new_off = _off_norm(a)
        if new_off >= off and new_off <= 1e-11 * scale:
            off = new_off
            break
        off = new_off
    if off > target and off > 1e-11 * scale:
        raise NumericFailure(
            f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})"
        )

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return EigenPairSet(w[order], np.ascontiguousarray(vt.T[:, order]))


# --------------------------------------------------------------------------
# Unitary eigensolver


def _degenerate_blocks(values, gap):
    blocks, start = [], 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k] - values[k - 1] >= gap:
            blocks.append((start, k))
            start = k
    return blocks


def unitary_eigensystem(u, unitary_tol: float = 1e-10) -> EigenPairSet:
    """Eigenphases and eigenvectors of a unitary matrix.

    ``C = (u + u^H)/2`` and ``S = (u - u^H)/2i`` commute; ``C`` is diagonalised
    first, then ``S`` inside every cluster of ``C`` eigenvalues closer than
    ``DEGENERACY_GAP``. Each joint eigenvector gives ``E = atan2(-s, c)``.
    Results are sorted by ascending eigenphase.
    """
    u = as_dense(u)
    if unitarity_defect(u) > unitary_tol:
        raise InvalidArgument(f"input is not unitary (defect {unitarity_defect(u):.2e})")
    cmat = (u + u.conj().T) / 2
    smat = (u - u.conj().T) / 2j
    ce = jacobi_hermitian(cmat)
    vecs = ce.vectors.copy()
    for lo, hi in _degenerate_blocks(ce.values, DEGENERACY_GAP):
        if hi - lo < 2:
            continue
        block = vecs[:, lo:hi]
        sb = block.conj().T @ smat @ block
        se = jacobi_hermitian((sb + sb.conj().T) / 2)
        vecs[:, lo:hi] = block @ se.vectors

    cv = np.einsum("ik,ij,jk->k", vecs.conj(), cmat, vecs).real
    sv = np.einsum("ik,ij,jk->k", vecs.conj(), smat, vecs).real
    phases = canonical_phase(np.arctan2(-sv, cv))
    phases = np.atleast_1d(phases)

    resid = np.linalg.norm(u @ vecs - vecs * np.exp(-1j * phases)[None, :], axis=0)
    if resid.size and float(resid.max()) > UNITARY_RESIDUAL_TOL:
        raise NumericFailure(f"joint diagonalisation residual {resid.max():.2e} too large")
    order = np.argsort(phases, kind="stable")
    return EigenPairSet(phases[order], vecs[:, order])


# --------------------------------------------------------------------------
# Fourier transform


def dft(x, inverse: bool = False, axis: int = -1) -> np.ndarray:
    """Unitary DFT, ``X_k = N^{-1/2} sum_n x_n exp(-2 pi i k n / N)``.

    ``inverse=True`` uses the ``+`` sign. Works along ``axis`` of an array.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0 or x.shape[axis] < 1:
        raise InvalidArgument("dft needs at least one sample")
    if inverse:
        return np.fft.ifft(x, axis=axis, norm="ortho")
    return np.fft.fft(x, axis=axis, norm="ortho")
