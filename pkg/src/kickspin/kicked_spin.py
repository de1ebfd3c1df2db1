"""Kicked spin-1/2: one-period Floquet operator, quasienergy branches and their anholonomy.

The model's Floquet operator is ``U(lam) = U0 @ exp(-i lam |v><v|)`` where
``U0 = exp(-i theta n.sigma)`` is the free part and ``|v>`` the kick direction.
The default model has ``theta = pi/2``, ``n = z`` and ``|v>`` the
``sigma_y = -1`` eigenvector, so ``exp(-i lam |v><v|) = exp(-i (lam/2)(1 - sigma_y))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_linalg import (
    SIGMA_0,
    canonical_phase,
    eig2_unitary,
    pauli_exp,
    unitarity_defect,
)
from .errors import ContinuationFailure, InvalidArgument, UnsupportedModel

AMBIGUITY_MARGIN = 0.1
MAX_STEP_ENERGY = np.pi / 4
TIE_TOL = 1e-12


def _sigma_y_minus():
    return np.array([1.0, -1.0j]) / np.sqrt(2.0)


@dataclass(frozen=True)
class KickedSpinModel:
    """Free rotation ``exp(-i free_half_angle free_axis.sigma)`` followed by a kick.

    ``kick_rank1=True`` kicks with the projector ``lam |v><v|``; ``False``
    uses the traceless generator ``lam (|v><v| - 1/2)`` for contrast.
    """

    free_half_angle: float = np.pi / 2
    kick_direction: tuple = field(default_factory=lambda: tuple(_sigma_y_minus()))
    kick_rank1: bool = True
    free_axis: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        v = np.asarray(self.kick_direction, dtype=complex)
        if v.shape != (2,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise InvalidArgument("kick_direction must be a unit 2-vector")
        object.__setattr__(self, "kick_direction", tuple(complex(x) for x in v))
        object.__setattr__(self, "free_axis", tuple(float(x) for x in self.free_axis))

    @property
    def v(self) -> np.ndarray:
        return np.asarray(self.kick_direction, dtype=complex)

    @property
    def projector(self) -> np.ndarray:
        v = self.v
        return np.outer(v, v.conj())

    def free_unitary(self) -> np.ndarray:
        return pauli_exp(self.free_axis, self.free_half_angle)

    @property
    def is_default_model(self) -> bool:
        # the kick direction only matters up to a global phase
        return (
            self.kick_rank1
            and abs(self.free_half_angle - np.pi / 2) < 1e-15
            and np.allclose(self.free_axis, (0.0, 0.0, 1.0), atol=1e-15)
            and abs(abs(np.vdot(_sigma_y_minus(), self.v)) - 1.0) < 1e-12
        )


DEFAULT_MODEL = KickedSpinModel()


def random_rank1_model(rng: np.random.Generator) -> KickedSpinModel:
    """A rank-1 model with random free rotation and kick direction."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    axis = rng.normal(size=3)
    return KickedSpinModel(
        free_half_angle=float(rng.uniform(0.2, np.pi - 0.2)),
        kick_direction=tuple(v / np.linalg.norm(v)),
        free_axis=tuple(axis / np.linalg.norm(axis)),
    )


def build_floquet(model: KickedSpinModel, lam: float) -> np.ndarray:
    """One-period spin Floquet operator ``U0 @ (I + (exp(-i lam) - 1) |v><v|)``."""
    proj = model.projector
    kick = SIGMA_0 + (np.exp(-1j * lam) - 1.0) * proj
    if not model.kick_rank1:
        kick = kick * np.exp(0.5j * lam)
    return model.free_unitary() @ kick


def build_floquet_literal(lam: float) -> np.ndarray:
    """The default model written literally as two Pauli exponentials."""
    z_part = pauli_exp((0.0, 0.0, 1.0), np.pi / 2)
    # exp(-i lam/2 (1 - sigma_y)) = exp(-i lam/2) exp(+i lam/2 sigma_y)
    kick = np.exp(-0.5j * lam) * pauli_exp((0.0, 1.0, 0.0), -lam / 2)
    return z_part @ kick


def gauge_fix(vec) -> np.ndarray:
    """Rephase so the largest-magnitude component is real positive.

    Ties (equal magnitude within 1e-12) go to the lower index.
    """
    v = np.asarray(vec, dtype=complex)
    mags = np.abs(v)
    k = int(np.argmax(mags >= mags.max() - TIE_TOL))
    return v * (abs(v[k]) / v[k])


def quasi_eigensystem(u):
    """Eigenphases (descending, in ``[-pi, pi)``) and gauge-fixed eigenvectors of a 2x2 unitary.

    Returns ``(phases, vectors)`` with ``vectors[:, k]`` belonging to ``phases[k]``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise InvalidArgument("quasi_eigensystem expects a 2x2 matrix")
    if unitarity_defect(u) > 1e-10:
        raise InvalidArgument("quasi_eigensystem expects a unitary matrix")
    phases, vecs = eig2_unitary(u)
    order = np.argsort(-phases, kind="stable")
    phases = phases[order]
    vecs = np.column_stack([gauge_fix(vecs[:, k]) for k in order])
    return phases, vecs


def analytic_branches(lam: float, model: KickedSpinModel = DEFAULT_MODEL):
    """Closed-form branches of the default model.

    ``E0 = lam/2 - pi/2``, ``E1 = lam/2 + pi/2`` (unwrapped) with the
    right-handed real frame ``vec0 = (sin lam/4, -cos lam/4)``,
    ``vec1 = (cos lam/4, sin lam/4)``.
    """
    if not model.is_default_model:
        raise UnsupportedModel("closed-form branches exist only for the default model")
    c, s = np.cos(lam / 4), np.sin(lam / 4)
    vec0 = np.array([s, -c], dtype=complex)
    vec1 = np.array([c, s], dtype=complex)
    return lam / 2 - np.pi / 2, lam / 2 + np.pi / 2, vec0, vec1


def analytic_frame(lam) -> np.ndarray:
    """Columns ``(vec0, vec1)`` of the closed-form frame, vectorised over ``lam``.

    Shape ``(..., 2, 2)``; equals ``exp(-i sigma_y lam/4) @ [[0, 1], [-1, 0]]``.
    """
    lam = np.asarray(lam, dtype=float)
    c, s = np.cos(lam / 4), np.sin(lam / 4)
    frame = np.empty(lam.shape + (2, 2), dtype=complex)
    frame[..., 0, 0] = s
    frame[..., 1, 0] = -c
    frame[..., 0, 1] = c
    frame[..., 1, 1] = s
    return frame


@dataclass
class QuasiBranch:
    label: int
    lambdas: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray  # shape (len(lambdas), 2)


@dataclass(frozen=True)
class CyclePermutation:
    """Where each branch ends up after a sweep.

    ``mapping[s]`` is the initial label whose vector branch ``s`` ends on;
    ``branch_signs[s]`` is the sign of that overlap and ``overlaps[s]`` its full
    complex value.
    """

    mapping: tuple
    branch_signs: tuple
    overlaps: tuple = (1.0, 1.0)

    def matrix(self) -> np.ndarray:
        """``M[t, s] = <init_t | final_s>`` restricted to the matched entries."""
        m = np.zeros((2, 2), dtype=complex)
        for s, t in enumerate(self.mapping):
            m[t, s] = self.overlaps[s]
        return m

    def sign_matrix(self) -> np.ndarray:
        m = np.zeros((2, 2))
        for s, t in enumerate(self.mapping):
            m[t, s] = self.branch_signs[s]
        return m

    @property
    def is_swap(self) -> bool:
        return tuple(self.mapping) == (1, 0)

    def then(self, other: "CyclePermutation") -> "CyclePermutation":
        """Composite of this sweep followed by ``other``."""
        total = other.matrix() @ self.matrix()
        mapping = tuple(int(np.argmax(np.abs(total[:, s]))) for s in range(2))
        overlaps = tuple(complex(total[mapping[s], s]) for s in range(2))
        signs = tuple(float(np.sign(o.real)) for o in overlaps)
        return CyclePermutation(mapping, signs, overlaps)


@dataclass
class Continuation:
    branches: tuple
    permutation: CyclePermutation
    min_overlap: float

    @property
    def max_overlap_defect(self) -> float:
        return 1.0 - self.min_overlap


def _unwrap_to(prev: float, phase: float) -> float:
    return phase + 2 * np.pi * np.round((prev - phase) / (2 * np.pi))


def track_branches(model: KickedSpinModel, lambdas) -> Continuation:
    """Follow both branches through the given parameter values.

    Branch 0 is the lower canonical eigenphase at ``lambdas[0]``. Labels are
    carried by maximal overlap, vectors are parallel transported and energies
    unwrapped.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or lambdas.size < 1:
        raise InvalidArgument("need at least one parameter value")
    n = lambdas.size
    energies = np.empty((2, n))
    vectors = np.empty((2, n, 2), dtype=complex)

    phases, vecs = quasi_eigensystem(build_floquet(model, lambdas[0]))
    order = np.argsort(phases, kind="stable")
    for s in range(2):
        energies[s, 0] = phases[order[s]]
        vectors[s, 0] = vecs[:, order[s]]

    min_overlap = 1.0
    for k in range(1, n):
        lam = lambdas[k]
        phases, vecs = quasi_eigensystem(build_floquet(model, lam))
        ov = np.abs(vectors[:, k - 1].conj() @ vecs)  # ov[s, j] = |<prev_s|new_j>|
        if abs(ov[0, 0] - ov[0, 1]) < AMBIGUITY_MARGIN:
            raise ContinuationFailure(f"ambiguous branch matching at lambda={lam:.6g}", lam=lam)
        pick = (0, 1) if ov[0, 0] > ov[0, 1] else (1, 0)
        for s in range(2):
            j = pick[s]
            w = vecs[:, j]
            inner = np.vdot(vectors[s, k - 1], w)
            w = w * (abs(inner) / inner).conjugate()
            vectors[s, k] = w
            min_overlap = min(min_overlap, abs(inner))
            e = _unwrap_to(energies[s, k - 1], phases[j])
            if abs(e - energies[s, k - 1]) >= MAX_STEP_ENERGY:
                raise ContinuationFailure(
                    f"quasienergy moved by {abs(e - energies[s, k - 1]):.3g} in one step at lambda={lam:.6g}",
                    lam=lam,
                )
            energies[s, k] = e

    # inner[t, s] = <init_t | final_s>; pick the better of the two bijections
    inner = vectors[:, 0].conj() @ vectors[:, -1].T
    mag = np.abs(inner)
    mapping = [0, 1] if mag[0, 0] + mag[1, 1] >= mag[1, 0] + mag[0, 1] else [1, 0]
    overlaps = [complex(inner[mapping[s], s]) for s in range(2)]
    signs = [float(np.sign(o.real)) or 1.0 for o in overlaps]

    branches = tuple(
        QuasiBranch(s, lambdas.copy(), energies[s].copy(), vectors[s].copy()) for s in range(2)
    )
    return Continuation(branches, CyclePermutation(tuple(mapping), tuple(signs), tuple(overlaps)), min_overlap)


def continue_branches(model: KickedSpinModel, lambda_start: float, lambda_end: float, steps: int):
    """Continue the branch pair over ``steps`` equal steps; returns ``(branches, permutation)``."""
    if steps < 1:
        raise InvalidArgument("steps must be positive")
    lambdas = np.linspace(lambda_start, lambda_end, steps + 1)
    cont = track_branches(model, lambdas)
    return cont.branches, cont.permutation


def refined_path(points, max_step: float = 2 * np.pi / 256) -> tuple:
    """Insert points so no step exceeds ``max_step``.

    Returns ``(path, index)`` where ``path[index[k]] == points[k]``.
    """
    points = np.asarray(points, dtype=float)
    path = [points[0]]
    index = [0]
    for a, b in zip(points[:-1], points[1:]):
        sub = max(1, int(np.ceil(abs(b - a) / max_step)))
        path.extend(a + (b - a) * np.arange(1, sub + 1) / sub)
        index.append(len(path) - 1)
    return np.asarray(path), np.asarray(index)


def spin_factor_check(model: KickedSpinModel, lam: float) -> dict:
    """Determinant, trace and unitarity of ``build_floquet`` at ``lam``."""
    u = build_floquet(model, lam)
    return {
        "det": complex(np.linalg.det(u)),
        "trace": complex(np.trace(u)),
        "unitarity_defect": unitarity_defect(u),
        "eigenphase_sum": float(canonical_phase(np.sum(quasi_eigensystem(u)[0]))),
    }


__all__ = [
    "KickedSpinModel",
    "DEFAULT_MODEL",
    "QuasiBranch",
    "CyclePermutation",
    "Continuation",
    "build_floquet",
    "build_floquet_literal",
    "quasi_eigensystem",
    "gauge_fix",
    "analytic_branches",
    "analytic_frame",
    "track_branches",
    "continue_branches",
    "refined_path",
    "random_rank1_model",
]
