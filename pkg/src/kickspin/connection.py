"""Mead-Berry connection ``A_ss'(r) = <phi_s(r)| i d/dr phi_s'(r)>`` of the kicked spin.

Three gauges are supported for the eigenvector phases:

``real_gauge``
    largest component real positive, with the pair oriented so that
    ``Re det[phi_0, phi_1] > 0`` (for the default model this is the real,
    right-handed frame);
``parallel_transport``
    neighbours phase-aligned to the base vectors, so the diagonal vanishes;
``kick_component_real``
    ``<v|phi_s>`` real and non-negative, ``|v>`` being the kick direction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_linalg import SIGMA_Y, angular_distance, exp_i_hermitian2, unitarity_defect
from .errors import ContinuationFailure, DegenerateBranch, InvalidArgument, UnsupportedModel
from .kicked_spin import (
    DEFAULT_MODEL,
    KickedSpinModel,
    build_floquet,
    quasi_eigensystem,
    refined_path,
    track_branches,
)

GAUGES = ("real_gauge", "parallel_transport", "kick_component_real")
DEGENERACY_GUARD = 1e-3
SINGULAR_KICK_OVERLAP = 1e-8
ANALYTIC_CONNECTION = SIGMA_Y / 4


class GaugeSingular(Exception):
    """The kick-component gauge is undefined where ``<v|phi_s> = 0``."""


@dataclass
class ConnectionSample:
    r: float
    a: np.ndarray
    gauge_tag: str
    antihermitian_residual: float = 0.0
    raw: np.ndarray | None = field(default=None, repr=False)
    frame: np.ndarray | None = field(default=None, repr=False)


@dataclass
class WilsonLoop:
    path: tuple
    w: np.ndarray


@dataclass
class DiagonalReport:
    gauge: str
    max_abs_diagonal: float
    max_abs_offdiagonal: float
    min_abs_offdiagonal: float
    samples_used: int
    singular_samples: list


def connection_analytic(r: float, model: KickedSpinModel = DEFAULT_MODEL) -> ConnectionSample:
    """Closed-form connection of the default model: ``sigma_y / 4`` for every ``r``."""
    if not model.is_default_model:
        raise UnsupportedModel("closed-form connection exists only for the default model")
    return ConnectionSample(float(r), ANALYTIC_CONNECTION.copy(), "real_gauge")


# --------------------------------------------------------------------------
# eigenframes


def _check_gauge(gauge):
    if gauge not in GAUGES:
        raise InvalidArgument(f"unknown gauge {gauge!r}; expected one of {GAUGES}")


def _raw_frame(model, r, reference):
    """Eigenvectors at ``r`` ordered to match ``reference`` columns, plus the gap."""
    phases, vecs = quasi_eigensystem(build_floquet(model, r))
    gap = float(angular_distance(phases[0], phases[1]))
    ov = np.abs(reference.conj().T @ vecs)
    if abs(ov[0, 0] - ov[0, 1]) < 0.1:
        raise ContinuationFailure(f"cannot align eigenvectors at r={r:.6g}", lam=r)
    if ov[0, 1] > ov[0, 0]:
        vecs = vecs[:, ::-1]
    return vecs, gap


def branch_frame(model: KickedSpinModel, r: float) -> np.ndarray:
    """Eigenvector columns at ``r`` labelled by continuation from ``r = 0``."""
    path, _ = refined_path([0.0, float(r)], max_step=2 * np.pi / 256)
    cont = track_branches(model, path)
    return np.column_stack([cont.branches[s].vectors[-1] for s in range(2)])


def _apply_gauge(frame, model, gauge, reference=None):
    """Fix the phases of ``frame`` columns according to ``gauge``.

    With a ``reference`` frame (a nearby point in the same gauge) only the
    choice the rule leaves free is matched to it: the sign for the
    component-based rules, the full phase for parallel transport.
    """
    out = np.empty_like(frame)
    for s in range(2):
        vec = frame[:, s]
        if gauge == "parallel_transport":
            if reference is None:
                k = int(np.argmax(np.abs(vec) >= np.abs(vec).max() - 1e-12))
                vec = vec * (abs(vec[k]) / vec[k])
            else:
                inner = np.vdot(reference[:, s], vec)
                vec = vec * (abs(inner) / inner).conjugate()
        elif gauge == "real_gauge":
            if reference is None:
                k = int(np.argmax(np.abs(vec) >= np.abs(vec).max() - 1e-12))
            else:
                k = int(np.argmax(np.abs(reference[:, s])))
            vec = vec * (abs(vec[k]) / vec[k])
            if reference is not None and np.vdot(reference[:, s], vec).real < 0:
                vec = -vec
        else:
            kv = np.vdot(model.v, vec)
            if abs(kv) < SINGULAR_KICK_OVERLAP:
                raise GaugeSingular(f"<v|phi_{s}> vanishes")
            vec = vec * (abs(kv) / kv)
        out[:, s] = vec
    if reference is None and gauge != "kick_component_real":
        if np.linalg.det(out).real < 0:
            out[:, 0] = -out[:, 0]
    return out


def gauged_frame(model, r, gauge="real_gauge", reference=None):
    """Eigenframe at ``r`` in ``gauge``; ``reference`` supplies labels and continuity."""
    _check_gauge(gauge)
    if reference is None:
        base = branch_frame(model, r)
    else:
        base, _ = _raw_frame(model, r, reference)
    return _apply_gauge(base, model, gauge, reference)


# --------------------------------------------------------------------------
# finite differences


def connection_fd(
    model: KickedSpinModel,
    r: float,
    h: float = 1e-4,
    gauge: str = "real_gauge",
    reference: np.ndarray | None = None,
) -> ConnectionSample:
    """Central-difference estimate ``<phi_s(r)| i (phi_s'(r+h) - phi_s'(r-h)) / 2h>``.

    The returned matrix is Hermitised; ``antihermitian_residual`` is the max
    entry of ``(A - A^H)/2`` before that step. Raises ``GaugeSingular`` (a
    plain exception, not an error exit) when the kick-component gauge is
    undefined at ``r``.
    """
    _check_gauge(gauge)
    if not (1e-6 <= h <= 1e-2):
        raise InvalidArgument(f"step h={h!r} outside [1e-6, 1e-2]")
    if reference is None:
        raw = branch_frame(model, r)
    else:
        raw, _ = _raw_frame(model, r, reference)
    phases, _ = quasi_eigensystem(build_floquet(model, r))
    if angular_distance(phases[0], phases[1]) < DEGENERACY_GUARD:
        raise DegenerateBranch(f"branches nearly degenerate at r={r:.6g}")

    base = _apply_gauge(raw, model, gauge, reference)
    plus, _ = _raw_frame(model, r + h, base)
    minus, _ = _raw_frame(model, r - h, base)
    plus = _apply_gauge(plus, model, gauge, base)
    minus = _apply_gauge(minus, model, gauge, base)

    deriv = (plus - minus) / (2 * h)
    a_raw = 1j * (base.conj().T @ deriv)
    anti = (a_raw - a_raw.conj().T) / 2
    a = (a_raw + a_raw.conj().T) / 2
    if gauge == "parallel_transport":
        a[0, 0] = 0.0
        a[1, 1] = 0.0
    return ConnectionSample(float(r), a, gauge, float(np.max(np.abs(anti))), a_raw, base)


def rank1_diagonal_check(model: KickedSpinModel, r_samples, gauge: str, h: float = 1e-4) -> DiagonalReport:
    """Largest diagonal connection entry over ``r_samples`` in the given gauge."""
    _check_gauge(gauge)
    if not model.kick_rank1:
        raise UnsupportedModel("diagonal check is defined for rank-1 kicks")
    diag, off, singular = [], [], []
    for r in r_samples:
        try:
            sample = connection_fd(model, float(r), h, gauge)
        except GaugeSingular:
            singular.append(float(r))
            continue
        diag.append(np.max(np.abs(np.diag(sample.a))))
        off.append(abs(sample.a[0, 1]))
    return DiagonalReport(
        gauge=gauge,
        max_abs_diagonal=float(max(diag)) if diag else float("nan"),
        max_abs_offdiagonal=float(max(off)) if off else float("nan"),
        min_abs_offdiagonal=float(min(off)) if off else float("nan"),
        samples_used=len(diag),
        singular_samples=singular,
    )


def connection_samples(model, r_start, r_end, steps, h=1e-4, gauge="real_gauge"):
    """Connection at the midpoints of ``steps`` equal subintervals, in a gauge kept smooth along the path."""
    dr = (r_end - r_start) / steps
    samples = []
    reference = gauged_frame(model, r_start + 0.5 * dr, gauge) if steps else None
    for k in range(steps):
        r = r_start + (k + 0.5) * dr
        sample = connection_fd(model, r, h, gauge, reference=reference)
        samples.append(sample)
        reference = sample.frame
    return samples


def wilson_loop(
    model: KickedSpinModel,
    r_start: float,
    r_end: float,
    steps: int,
    h: float = 1e-4,
    gauge: str = "real_gauge",
) -> WilsonLoop:
    """Path-ordered product ``prod_k exp(i A(r_k) dr)``, left to right in increasing ``r``.

    ``A`` is sampled at step midpoints. At least 256 steps per ``2 pi`` of path.
    """
    if r_end == r_start:
        return WilsonLoop((r_start, r_end, steps), np.eye(2, dtype=complex))
    if steps < 1 or steps < 256 * abs(r_end - r_start) / (2 * np.pi) - 1e-9:
        raise InvalidArgument("wilson_loop needs at least 256 steps per 2*pi of path")
    dr = (r_end - r_start) / steps
    w = np.eye(2, dtype=complex)
    for sample in connection_samples(model, r_start, r_end, steps, h, gauge):
        w = w @ exp_i_hermitian2(sample.a, dr)
    if unitarity_defect(w) > 1e-8:
        raise ContinuationFailure("Wilson loop lost unitarity")
    return WilsonLoop((r_start, r_end, steps), w)
