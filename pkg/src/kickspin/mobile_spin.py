"""Kicked spin moving on a ring: lab-frame and moving-frame Floquet operators on a grid.

Lab frame: ``U = exp(-i P^2 / 2 mass) S`` where ``S`` multiplies the spinor at
``R_j`` by the 2x2 spin Floquet operator with coupling ``R_j``.

Moving frame: ``Psi(R) = Omega(R) psi(R)`` with ``Omega`` the closed-form
eigenframe of the spin factor. Since ``Omega(R + 4 pi) = -Omega(R)``, moving
frame fields on ``L = 4 pi`` are antiperiodic and expand in half-integer modes
``k = 2 pi (n + 1/2) / L``. The moving-frame operator is
``exp(-i (P - A)^2 / 2 mass) exp(-i E(R))``.

Dense operators use component-major ordering: index ``c * N + j`` for spin (or
branch) component ``c`` at site ``j``; states are ``(2, N)`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .connection import connection_analytic
from .core_linalg import (
    angular_distance,
    dft,
    jacobi_hermitian,
    unitarity_defect,
    unitary_eigensystem,
)
from .errors import InvalidArgument, WindowError
from .kicked_spin import DEFAULT_MODEL, analytic_frame, build_floquet

FOUR_PI = 4 * np.pi
MAX_POINTS = 256
EXACT_MATCH_TOL = 1e-8
BOUNDARIES = ("antiperiodic_4pi", "twisted_2pi")


@dataclass(frozen=True)
class GridSpec:
    n_points: int = 64
    period: float = FOUR_PI
    mass: float = 1.0

    def __post_init__(self):
        n = self.n_points
        if n < 8 or n & (n - 1):
            raise InvalidArgument(f"n_points must be a power of two >= 8, got {n}")
        if n > MAX_POINTS:
            raise InvalidArgument(f"n_points capped at {MAX_POINTS} for dense operators")
        if not self.period > 0:
            raise InvalidArgument("period must be positive")
        if not self.mass > 0:
            raise InvalidArgument("mass must be positive")

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.n_points) * self.period / self.n_points

    @property
    def mode_indices(self) -> np.ndarray:
        """Integer ``n`` of each DFT bin in the window ``[-N/2, N/2)``."""
        return np.rint(np.fft.fftfreq(self.n_points) * self.n_points).astype(int)

    @property
    def momenta(self) -> np.ndarray:
        return 2 * np.pi * self.mode_indices / self.period

    def kinetic_phases(self) -> np.ndarray:
        return self.momenta**2 / (2 * self.mass)

    @property
    def dim(self) -> int:
        return 2 * self.n_points

    def require_frame_period(self):
        if abs(self.period - FOUR_PI) > 1e-12 * FOUR_PI:
            raise InvalidArgument("the moving frame needs period L = 4 pi")


@dataclass
class LabState:
    grid: GridSpec
    values: np.ndarray  # (2, N) spin components

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (2, self.grid.n_points):
            raise InvalidArgument(f"state shape {self.values.shape} does not match the grid")

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass
class MovingFrameState:
    grid: GridSpec
    values: np.ndarray  # (2, N) branch components
    boundary: str = "antiperiodic_4pi"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.boundary not in BOUNDARIES:
            raise InvalidArgument(f"unknown boundary {self.boundary!r}")

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass
class SpectrumComparison:
    lab_phases: np.ndarray
    moving_phases: np.ndarray
    matching_distance: float
    mode: str = "spectral"
    window: str = "aligned"

    @property
    def flagged(self) -> bool:
        return not self.matching_distance < EXACT_MATCH_TOL


# --------------------------------------------------------------------------
# lab frame


def dft_matrix(n: int) -> np.ndarray:
    """``F`` with ``F @ x == dft(x)``."""
    return dft(np.eye(n), axis=0)


def spin_factors(grid: GridSpec, model=DEFAULT_MODEL) -> np.ndarray:
    """The 2x2 spin Floquet operator at every site, shape ``(N, 2, 2)``."""
    return np.array([build_floquet(model, r) for r in grid.positions])


def _blocks_to_dense(site_blocks: np.ndarray) -> np.ndarray:
    """Position-diagonal operator from per-site 2x2 blocks."""
    n = site_blocks.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    j = np.arange(n)
    for c in range(2):
        for d in range(2):
            out[c * n + j, d * n + j] = site_blocks[:, c, d]
    return out


def kinetic_operator(grid: GridSpec) -> np.ndarray:
    """``exp(-i P^2 / 2 mass)`` on one component, dense ``N x N``."""
    f = dft_matrix(grid.n_points)
    return f.conj().T @ (np.exp(-1j * grid.kinetic_phases())[:, None] * f)


def build_lab_floquet(grid: GridSpec, spin_factor: bool = True, model=DEFAULT_MODEL) -> np.ndarray:
    """Dense ``2N x 2N`` lab-frame Floquet operator; ``spin_factor=False`` drops the spin bracket."""
    kin1 = kinetic_operator(grid)
    kin = np.zeros((grid.dim, grid.dim), dtype=complex)
    n = grid.n_points
    kin[:n, :n] = kin1
    kin[n:, n:] = kin1
    if not spin_factor:
        return kin
    return kin @ _blocks_to_dense(spin_factors(grid, model))


def apply_lab_floquet(grid: GridSpec, state: LabState, model=DEFAULT_MODEL) -> LabState:
    """Split-step application of the lab Floquet operator: spin kick, then kinetic phases."""
    if not isinstance(state, LabState) or state.grid != grid:
        raise InvalidArgument("state lives on a different grid")
    kicked = np.einsum("jcd,dj->cj", spin_factors(grid, model), state.values)
    spectrum = dft(kicked, axis=1) * np.exp(-1j * grid.kinetic_phases())[None, :]
    return LabState(grid, dft(spectrum, inverse=True, axis=1))


# --------------------------------------------------------------------------
# moving frame


def frame_matrices(grid: GridSpec) -> np.ndarray:
    """Closed-form eigenframe ``Omega(R_j)``, shape ``(N, 2, 2)``; columns are branches."""
    return analytic_frame(grid.positions)


def frame_operator(grid: GridSpec) -> np.ndarray:
    grid.require_frame_period()
    return _blocks_to_dense(frame_matrices(grid))


def frame_transform(grid: GridSpec, state: LabState) -> MovingFrameState:
    """``psi_s(R_j) = <phi_s(R_j), Psi(R_j)>``."""
    grid.require_frame_period()
    if state.grid != grid:
        raise InvalidArgument("state lives on a different grid")
    omega = frame_matrices(grid)
    psi = np.einsum("jcs,cj->sj", omega.conj(), state.values)
    return MovingFrameState(grid, psi, "antiperiodic_4pi")


def inverse_frame_transform(grid: GridSpec, state: MovingFrameState) -> LabState:
    grid.require_frame_period()
    omega = frame_matrices(grid)
    return LabState(grid, np.einsum("jcs,sj->cj", omega, state.values))


def _antiperiodic_window_offsets(grid, shifts, window):
    """Lowest mode index ``n'`` of each channel's window of antiperiodic modes.

    Aligned windows are the images of the lab window ``[-N/2, N/2)`` under
    the momentum shift ``k' = k_lab + a_c``; that image must consist of
    half-integer modes, otherwise the two frames cannot match exactly.
    """
    if window not in ("aligned", "misaligned"):
        raise InvalidArgument(f"unknown window choice {window!r}")
    lo = -grid.n_points // 2
    offsets = []
    for a in shifts:
        x = grid.period * a / (2 * np.pi) - 0.5
        if abs(x - round(x)) > 1e-9:
            raise WindowError(f"shift {a} does not map lab modes onto antiperiodic modes")
        offsets.append(lo + int(round(x)))
    if window == "misaligned":
        # a common window would hide the defect: k^2 is even at the Nyquist mode
        offsets = offsets[::-1]
    return offsets


def _antiperiodic_momenta(grid, lo):
    """Momentum of each DFT bin when bin ``b`` carries antiperiodic mode ``n' = b (mod N)`` in ``[lo, lo + N)``."""
    n = grid.n_points
    idx = lo + np.mod(np.arange(n) - lo, n)
    return 2 * np.pi * (idx + 0.5) / grid.period


def _channel_operator(grid, diag_of_k):
    """Dense ``N x N`` operator diagonal in antiperiodic modes with entries ``diag_of_k``."""
    n = grid.n_points
    f = dft_matrix(n)
    # exp(-i pi R / L) turns the antiperiodic mode n' into the periodic bin n'
    twist = np.exp(-1j * np.pi * grid.positions / grid.period)
    g = f * twist[None, :]
    return g.conj().T @ (diag_of_k[:, None] * g)


def moving_frame_kinetic(grid: GridSpec, window: str = "aligned", generator: bool = False) -> np.ndarray:
    """``exp(-i (P - A)^2 / 2 mass)`` in branch space (or ``(P - A)^2 / 2 mass`` itself).

    ``A`` is the constant branch-space connection; its eigenchannels decouple
    and each sees the kinetic term on its own shifted window of modes.
    """
    grid.require_frame_period()
    conn = connection_analytic(0.0).a
    eig = jacobi_hermitian(conn)
    shifts = eig.values
    offsets = _antiperiodic_window_offsets(grid, shifts, window)
    n = grid.n_points
    out = np.zeros((grid.dim, grid.dim), dtype=complex)
    for a, lo, e in zip(shifts, offsets, eig.vectors.T):
        k = _antiperiodic_momenta(grid, lo)
        energy = (k - a) ** 2 / (2 * grid.mass)
        block = _channel_operator(grid, energy if generator else np.exp(-1j * energy))
        proj = np.outer(e, e.conj())
        for s in range(2):
            for t in range(2):
                out[s * n : (s + 1) * n, t * n : (t + 1) * n] += proj[s, t] * block
    return out


def quasienergy_phase_factor(grid: GridSpec) -> np.ndarray:
    """Position-diagonal ``exp(-i E_s(R_j))`` with ``E_{0,1} = R/2 -/+ pi/2``.

    Built from the phases ``exp(-i R/2)`` and ``exp(+/- i pi/2)``; the linear
    function ``E(R)`` is never formed.
    """
    half = np.exp(-0.5j * grid.positions)
    return np.diag(np.concatenate([1j * half, -1j * half]))


def build_moving_frame_floquet(
    grid: GridSpec,
    mode: str = "spectral",
    window: str = "aligned",
    form: str = "product",
) -> np.ndarray:
    """Moving-frame Floquet operator.

    ``mode="conjugated"`` returns ``Omega^H U_lab Omega``; ``mode="spectral"``
    assembles the kinetic factor from the connection and the quasienergy
    factor independently. ``form="single_exponential"`` (spectral only) gives
    ``exp(-i[(P - A)^2 / 2 mass + E])`` with ``E`` sampled on ``[0, L)``,
    which is not equivalent to the lab operator and exists for comparison.
    """
    grid.require_frame_period()
    if mode == "conjugated":
        omega = frame_operator(grid)
        return omega.conj().T @ build_lab_floquet(grid) @ omega
    if mode != "spectral":
        raise InvalidArgument(f"unknown mode {mode!r}")
    if form == "product":
        return moving_frame_kinetic(grid, window) @ quasienergy_phase_factor(grid)
    if form == "single_exponential":
        r = grid.positions
        energy = np.concatenate([r / 2 - np.pi / 2, r / 2 + np.pi / 2])
        gen = moving_frame_kinetic(grid, window, generator=True) + np.diag(energy)
        eig = jacobi_hermitian((gen + gen.conj().T) / 2)
        return eig.vectors @ (np.exp(-1j * eig.values)[:, None] * eig.vectors.conj().T)
    raise InvalidArgument(f"unknown form {form!r}")


# --------------------------------------------------------------------------
# spectra


def eigenphases(u) -> np.ndarray:
    return unitary_eigensystem(u).values


def match_phases(a, b) -> float:
    """Largest angular distance in the minimal-total-cost pairing of two phase lists."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidArgument("phase lists differ in length")
    cost = angular_distance(a[:, None], b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if len(rows) else 0.0


def compare_frames(grid: GridSpec, mode: str = "spectral", window: str = "aligned", form: str = "product") -> SpectrumComparison:
    """Eigenphases of the lab and moving-frame operators and their matching distance."""
    lab = eigenphases(build_lab_floquet(grid))
    moving = eigenphases(build_moving_frame_floquet(grid, mode, window, form))
    return SpectrumComparison(lab, moving, match_phases(lab, moving), mode, window)


def operator_report(grid: GridSpec) -> dict:
    """Unitarity defects of the assembled operators."""
    return {
        "lab": unitarity_defect(build_lab_floquet(grid)),
        "conjugated": unitarity_defect(build_moving_frame_floquet(grid, "conjugated")),
        "spectral": unitarity_defect(build_moving_frame_floquet(grid, "spectral")),
    }
