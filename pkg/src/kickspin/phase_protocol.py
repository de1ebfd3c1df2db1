"""Stepwise parameter cycles: accumulated dynamical phase and coherence of superpositions.

The kick period ``T`` rescales quasienergies: a kick at parameter ``lam``
multiplies branch ``s`` by ``exp(-i E_s(lam) T)``. For ``T = 1`` this is the
spin Floquet operator itself.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_linalg import canonical_phase
from .errors import InvalidArgument, NoSolution, UnsupportedModel
from .kicked_spin import (
    KickedSpinModel,
    analytic_frame,
    build_floquet,
    refined_path,
    track_branches,
)

MAX_KICKS = 10**6
PHASE_TOL = 1e-9
REFINE_STEP = 2 * np.pi / 256


@dataclass(frozen=True)
class KickProtocol:
    """``lambda_schedule[m]`` is the parameter in effect for kick ``m + 1``."""

    num_kicks: int
    period: float
    lambda_schedule: np.ndarray
    cycles: int = 1

    def __post_init__(self):
        if self.num_kicks < 1:
            raise InvalidArgument("num_kicks must be at least 1")
        if self.cycles < 0:
            raise InvalidArgument("cycles must be non-negative")
        if not self.period > 0:
            raise InvalidArgument("period must be positive")
        object.__setattr__(self, "lambda_schedule", np.asarray(self.lambda_schedule, dtype=float))

    @classmethod
    def uniform(cls, num_kicks, period=1.0, cycles=1, step_before_kick=True):
        """Uniform steps of ``2 pi / num_kicks``.

        With ``step_before_kick`` the kick at ``t = mT`` already sees the
        stepped value ``lam_m = 2 pi m / M``; otherwise it sees ``lam_{m-1}``.
        """
        m = np.arange(1, num_kicks * cycles + 1)
        if not step_before_kick:
            m = m - 1
        return cls(num_kicks, float(period), 2 * np.pi * m / num_kicks, cycles)

    @property
    def total_kicks(self) -> int:
        return len(self.lambda_schedule)

    @property
    def velocity(self) -> float:
        """Parameter velocity ``2 pi / (M T)`` of the uniform schedule."""
        return 2 * np.pi / (self.num_kicks * self.period)


@dataclass
class CycleResult:
    final_amplitudes: np.ndarray  # transported eigenbasis
    fidelity_vs_adiabatic: float
    relative_phase: float
    norm_defect: float
    initial_basis_amplitudes: np.ndarray
    predicted_amplitudes: np.ndarray
    infidelity: float = 0.0


def _schedule_track(model, protocol):
    """Branch continuation from ``lam = 0`` through every scheduled value and the cycle end."""
    end = 2 * np.pi * protocol.cycles
    points = np.concatenate([[0.0], protocol.lambda_schedule, [end]])
    path, index = refined_path(points, REFINE_STEP)
    cont = track_branches(model, path)
    return cont, index[1:-1], index[-1]


def branch_energies_on_schedule(model, protocol):
    """Unwrapped ``(E_0, E_1)`` at each scheduled parameter value, shape ``(2, M)``."""
    if protocol.total_kicks == 0:
        return np.zeros((2, 0))
    cont, idx, _ = _schedule_track(model, protocol)
    return np.array([cont.branches[s].energies[idx] for s in range(2)])


def dynamical_phase_difference(protocol: KickProtocol, model: KickedSpinModel) -> float:
    """``sum_m (E_1(lam_m) - E_0(lam_m)) T`` from continued, unwrapped branches."""
    if protocol.total_kicks == 0:
        return 0.0
    e = branch_energies_on_schedule(model, protocol)
    return float(np.sum(e[1] - e[0]) * protocol.period)


def _constant_gap(model, samples=1024):
    cont = track_branches(model, np.linspace(0.0, 2 * np.pi, samples + 1))
    gap = cont.branches[1].energies - cont.branches[0].energies
    if np.max(np.abs(gap - gap[0])) < 1e-12:
        return float(np.mean(gap))
    return None


def _distance_to_2pi_multiple(phase):
    return abs(canonical_phase(phase))


def choose_num_kicks(model: KickedSpinModel, period: float, m_min: int = 1, max_kicks: int = MAX_KICKS) -> int:
    """Smallest ``M >= m_min`` whose one-cycle phase difference is a multiple of ``2 pi``.

    When the quasienergy gap is constant along the cycle the phase is
    ``M * gap * T`` and each candidate costs O(1); otherwise every candidate
    runs a full continuation.
    """
    if m_min < 1:
        raise InvalidArgument("m_min must be at least 1")
    gap = _constant_gap(model)
    for m in range(m_min, max_kicks + 1):
        if gap is not None:
            phase = m * gap * period
        else:
            phase = dynamical_phase_difference(KickProtocol.uniform(m, period), model)
        if _distance_to_2pi_multiple(phase) < PHASE_TOL:
            return m
    raise NoSolution(f"no kick count in [{m_min}, {max_kicks}] closes the phase")


def _require_default(model):
    if not model.is_default_model:
        raise UnsupportedModel("closed-form cycle map exists only for the default model")


def predicted_cycle_map(model: KickedSpinModel, protocol: KickProtocol) -> np.ndarray:
    """Ideal adiabatic map on amplitudes in the ``lam = 0`` eigenbasis.

    ``holonomy @ diag(exp(-i Theta_0), exp(-i Theta_1))`` with
    ``Theta_s = sum_m E_s(lam_m) T`` from the closed-form energies and the
    holonomy from the closed-form frame.
    """
    _require_default(model)
    lam = protocol.lambda_schedule
    theta0 = float(np.sum(lam / 2 - np.pi / 2) * protocol.period)
    theta1 = float(np.sum(lam / 2 + np.pi / 2) * protocol.period)
    # the continuation starts from the gauge-fixed pair (0, 1), (1, 0) = (-vec0, vec1)
    flip = np.diag([-1.0, 1.0])
    start = analytic_frame(0.0) @ flip
    end = analytic_frame(2 * np.pi * protocol.cycles) @ flip
    holonomy = start.conj().T @ end
    return holonomy @ np.diag(np.exp(-1j * np.array([theta0, theta1])))


def _kick(model, lam, period, frame, energies):
    if period == 1.0:
        return build_floquet(model, lam)
    return frame @ np.diag(np.exp(-1j * energies * period)) @ frame.conj().T


def simulate_cycle(model: KickedSpinModel, protocol: KickProtocol, initial) -> CycleResult:
    """Kick a state through the schedule and compare with the adiabatic prediction.

    ``initial`` holds amplitudes on the ``lam = 0`` branch eigenvectors. The
    final state is decomposed on the transported branch vectors (which already
    carry the holonomy signs), so the relative phase ``arg(b_1/b_0) - arg(a_1/a_0)``
    is purely dynamical plus diabatic corrections. It is ``nan`` when either
    amplitude vanishes.
    """
    a = np.asarray(initial, dtype=complex)
    if a.shape != (2,) or abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise InvalidArgument("initial amplitudes must be a normalised pair")
    cont, idx, end_idx = _schedule_track(model, protocol)
    start_frame = np.column_stack([b.vectors[0] for b in cont.branches])
    end_frame = np.column_stack([b.vectors[end_idx] for b in cont.branches])

    psi = start_frame @ a
    for k, lam in zip(idx, protocol.lambda_schedule):
        if protocol.period == 1.0:
            psi = build_floquet(model, lam) @ psi
        else:
            frame = np.column_stack([b.vectors[k] for b in cont.branches])
            energies = np.array([b.energies[k] for b in cont.branches])
            psi = _kick(model, lam, protocol.period, frame, energies) @ psi

    norm_defect = abs(float(np.linalg.norm(psi)) - 1.0)
    b = end_frame.conj().T @ psi
    c = start_frame.conj().T @ psi

    if model.is_default_model:
        predicted = predicted_cycle_map(model, protocol) @ a
    else:
        theta = np.array([np.sum(br.energies[idx]) for br in cont.branches]) * protocol.period
        holonomy = start_frame.conj().T @ end_frame
        predicted = holonomy @ (np.exp(-1j * theta) * a)
    # leakage onto the complement of the prediction, computed directly so it
    # is not lost to cancellation in 1 - |<p|c>|^2
    p = predicted / np.linalg.norm(predicted)
    c_unit = c / np.linalg.norm(c)
    leak = float(abs(p[0] * c_unit[1] - p[1] * c_unit[0]) ** 2)
    fidelity = float(abs(np.vdot(p, c_unit)) ** 2)

    if min(abs(a[0]), abs(a[1]), abs(b[0]), abs(b[1])) < 1e-300:
        rel = float("nan")
    else:
        rel = float(canonical_phase(np.angle(b[1] / b[0]) - np.angle(a[1] / a[0])))
    return CycleResult(b, min(fidelity, 1.0), rel, norm_defect, c, predicted, leak)


def coherence_table(model, kick_counts=(64, 128, 256, 512), period=1.0, initial=None):
    """Relative phase and fidelity of an equal superposition over several kick counts."""
    if initial is None:
        initial = np.array([1.0, 1.0]) / np.sqrt(2.0)
    rows = []
    for m in kick_counts:
        res = simulate_cycle(model, KickProtocol.uniform(m, period), initial)
        rows.append(
            {
                "M": int(m),
                "relative_phase": res.relative_phase,
                "abs_relative_phase": abs(res.relative_phase),
                "fidelity": res.fidelity_vs_adiabatic,
                "infidelity": res.infidelity,
                "norm_defect": res.norm_defect,
            }
        )
    return rows
