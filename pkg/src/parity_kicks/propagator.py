"""Unitary propagators for the linear amplitude dynamics.

In the frame rotating at omega0 the coherent amplitudes ``v = (alpha, beta_1..beta_K)``
obey ``dv/dt = -i M v`` with the real symmetric arrowhead matrix

    M[0, k] = M[k, 0] = g_k,   M[k, k] = omega_k - omega0,   M[0, 0] = 0.

A parity kick flips the sign of the system-bath coupling, which is the same as
conjugating with ``P = diag(-1, 1, ..., 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import BathSpec, KickSchedule, ParameterError

UNITARITY_TOL = 1e-10
DRIFT_TOL = 1e-8
HERMITIAN_TOL = 1e-12


class IntegrityError(RuntimeError):
    """Numerical integrity breach: broken unitarity or a failed decomposition."""


def _parity_signs(n: int) -> np.ndarray:
    p = np.ones(n)
    p[0] = -1.0
    return p


def unitarity_error(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class CouplingMatrix:
    """Generator of the amplitude dynamics plus its cached eigendecompositions.

    Both coupling signs are decomposed independently so the kick-reversed
    propagator does not rely on the parity identity it is tested against.
    """

    matrix: np.ndarray
    _eig: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise IntegrityError(f"coupling matrix must be square, got {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * scale:
            raise IntegrityError("coupling matrix is not Hermitian")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def signed(self, sign: int) -> np.ndarray:
        """The generator with the system row/column scaled by ``sign`` (+1, 0 or -1)."""
        m = np.array(self.matrix)
        m[0, 1:] *= sign
        m[1:, 0] *= sign
        return m

    def eig(self, sign: int = 1) -> tuple[np.ndarray, np.ndarray]:
        if sign not in self._eig:
            try:
                self._eig[sign] = np.linalg.eigh(self.signed(sign))
            except np.linalg.LinAlgError as exc:
                raise IntegrityError(f"eigendecomposition failed: {exc}") from exc
        return self._eig[sign]


@dataclass(frozen=True)
class Propagator:
    """Immutable unitary on the amplitude vector; validated on construction."""

    matrix: np.ndarray
    elapsed: float = 0.0

    def __post_init__(self) -> None:
        u = np.array(self.matrix, dtype=complex)
        err = unitarity_error(u)
        col0 = abs(float(np.sum(np.abs(u[:, 0]) ** 2)) - 1.0)
        if err > UNITARITY_TOL or col0 > UNITARITY_TOL:
            raise IntegrityError(
                f"propagator not unitary: |U^H U - I|_max = {err:.3e}, column-0 norm error {col0:.3e}"
            )
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "Propagator") -> "Propagator":
        return Propagator(self.matrix @ other.matrix, self.elapsed + other.elapsed)


def identity(dim: int) -> Propagator:
    return Propagator(np.eye(dim, dtype=complex), 0.0)


def build_coupling_matrix(bath: BathSpec) -> CouplingMatrix:
    K = bath.n_modes
    m = np.zeros((K + 1, K + 1))
    m[0, 1:] = bath.g
    m[1:, 0] = bath.g
    m[np.arange(1, K + 1), np.arange(1, K + 1)] = bath.detunings
    return CouplingMatrix(m)


def _exp_matrix(M: CouplingMatrix, t: float, coupling_sign: int) -> np.ndarray:
    lam, vecs = M.eig(coupling_sign)
    return (vecs * np.exp(-1j * lam * t)) @ vecs.conj().T


def free_propagator(M: CouplingMatrix, t: float, coupling_sign: int = 1) -> Propagator:
    """``exp(-i M t)`` with the coupling sign set by ``coupling_sign``."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    if coupling_sign not in (1, -1):
        raise ParameterError(f"coupling_sign must be +1 or -1, got {coupling_sign}")
    if t == 0:
        return identity(M.dim)
    return Propagator(_exp_matrix(M, t, coupling_sign), float(t))


def pulse_propagator(bath: BathSpec, tau0: float) -> Propagator:
    """Free bath evolution during a pulse; the system-bath coupling is switched off."""
    if tau0 < 0:
        raise ParameterError(f"tau0 must be >= 0, got {tau0}")
    phases = np.concatenate(([1.0 + 0j], np.exp(-1j * bath.detunings * tau0)))
    return Propagator(np.diag(phases), float(tau0))


def kick_cycle(M: CouplingMatrix, bath: BathSpec, T: float, tau0: float = 0.0) -> Propagator:
    """One cycle ``F(tau0) A(-g, T) F(tau0) A(+g, T)`` (rightmost acts first)."""
    if not T > 0:
        raise ParameterError(f"kick interval T must be > 0, got {T}")
    F = pulse_propagator(bath, tau0)
    forward = free_propagator(M, T, +1)
    reverse = free_propagator(M, T, -1)
    return F @ reverse @ F @ forward


def stroboscopic_propagator(
    cycle: Propagator,
    n_cycles: int,
    check_every: int = 50,
    drift_tol: float = DRIFT_TOL,
) -> Propagator:
    """``cycle ** n_cycles`` by repeated multiplication.

    Unitarity drift is checked every ``check_every`` products and never
    corrected; exceeding ``drift_tol`` raises IntegrityError.
    """
    if n_cycles < 0 or int(n_cycles) != n_cycles:
        raise ParameterError(f"n_cycles must be a non-negative integer, got {n_cycles}")
    n_cycles = int(n_cycles)
    if n_cycles == 0:
        return identity(cycle.dim)
    c = cycle.matrix
    u = np.array(c)
    for i in range(2, n_cycles + 1):
        u = c @ u
        if i % check_every == 0:
            drift = unitarity_error(u)
            if drift > drift_tol:
                raise IntegrityError(f"unitarity drift {drift:.3e} after {i} cycles")
    return Propagator(u, cycle.elapsed * n_cycles)


def parity_conjugate(U: Propagator) -> Propagator:
    """``P U P`` with ``P = diag(-1, 1, ..., 1)``."""
    p = _parity_signs(U.dim)
    return Propagator(p[:, None] * U.matrix * p[None, :], U.elapsed)


def snap_time(t: float, cycle_time: float) -> tuple[int, float]:
    """Largest stroboscopic grid time ``N * cycle_time <= t``."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    if not cycle_time > 0:
        raise ParameterError(f"cycle_time must be > 0, got {cycle_time}")
    n = math.floor(t / cycle_time * (1 + 1e-12))
    return n, n * cycle_time


def _cycle_segments(T: float, tau0: float) -> list[tuple[int, float]]:
    # (coupling sign, duration); sign 0 marks a pulse with the coupling off
    return [(1, T), (0, tau0), (-1, T), (0, tau0)]


def partial_cycle(M: CouplingMatrix, bath: BathSpec, T: float, tau0: float, r: float) -> Propagator:
    """Evolution over the first ``r`` time units of a kick cycle.

    Mid-cycle states are expressed in the toggling frame used by the cycle
    formula: after an odd number of kicks the true system amplitude is the
    negative of the returned one. ``|alpha|``, ``eta`` and the cat's reduced
    state are unaffected.
    """
    u = identity(M.dim)
    remaining = r
    for sign, length in _cycle_segments(T, tau0):
        if remaining <= 0:
            break
        step = min(length, remaining)
        if step > 0:
            if sign == 0:
                u = pulse_propagator(bath, step) @ u
            else:
                u = free_propagator(M, step, sign) @ u
        remaining -= length
    return u


def kicked_propagator(
    M: CouplingMatrix,
    bath: BathSpec,
    T: float,
    tau0: float,
    t: float,
    cycle: Propagator | None = None,
) -> Propagator:
    """Kicked evolution up to an arbitrary time ``t``: whole cycles, then a partial one."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    cycle_time = 2.0 * T + 2.0 * tau0
    n, t_grid = snap_time(t, cycle_time)
    r = max(0.0, t - t_grid)
    if n == 0:
        return partial_cycle(M, bath, T, tau0, r)
    if cycle is None:
        cycle = kick_cycle(M, bath, T, tau0)
    u = stroboscopic_propagator(cycle, n)
    if r > 0:
        u = partial_cycle(M, bath, T, tau0, r) @ u
    return u


# ---------------------------------------------------------------------------
# independent check: fixed-step RK4 on dv/dt = -i M(sigma(t)) v


def _rk4(gen: np.ndarray, v: np.ndarray, length: float, h_max: float) -> np.ndarray:
    n = max(1, math.ceil(length / h_max * (1 - 1e-12)))
    h = length / n
    a = -1j * gen
    for _ in range(n):
        k1 = a @ v
        k2 = a @ (v + 0.5 * h * k1)
        k3 = a @ (v + 0.5 * h * k2)
        k4 = a @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def ode_oracle(
    M: CouplingMatrix,
    alpha0: complex,
    schedule: KickSchedule | None = None,
    t: float | None = None,
    h: float | None = None,
    omega_c: float | None = None,
) -> np.ndarray:
    """Integrate the amplitude equations directly, without any matrix exponential.

    With a ``schedule`` the coupling sign follows the kick square wave (zero
    during pulses) and ``t`` defaults to the schedule duration; ``t`` may also
    stop mid-cycle. Without one the evolution is unkicked and ``t`` is required.
    Each constant-sign segment is integrated with its own uniform step no
    larger than ``h`` so that switching times land exactly on step boundaries.

    Returns the full amplitude vector ``(alpha, beta_1, ..., beta_K)``.
    """
    if omega_c is None:
        omega_c = float(np.max(np.abs(np.diag(M.matrix)))) + 1.0
    h_limit = 0.01 / omega_c
    if schedule is not None and schedule.T > 0:
        h_limit = min(h_limit, schedule.T / 50.0)
    if h is None:
        h = h_limit
    if not 0 < h <= h_limit * (1 + 1e-12):
        raise ParameterError(f"step size {h} exceeds the allowed maximum {h_limit}")

    if schedule is None:
        if t is None:
            raise ParameterError("unkicked integration needs an end time t")
        segments = [(1, float(t))]
    else:
        t_end = schedule.duration if t is None else float(t)
        if t_end > 0 and schedule.cycle_time == 0:
            raise ParameterError("kick schedule has zero cycle time")
        segments = []
        elapsed = 0.0
        pattern = _cycle_segments(schedule.T, schedule.tau0)
        while elapsed < t_end * (1 - 1e-12):
            for sign, length in pattern:
                step = min(length, t_end - elapsed)
                if step > 0:
                    segments.append((sign, step))
                    elapsed += step
                if elapsed >= t_end * (1 - 1e-12):
                    break

    gens = {s: M.signed(s) for s in (1, 0, -1)}
    v = np.zeros(M.dim, dtype=complex)
    v[0] = alpha0
    for sign, length in segments:
        v = _rk4(gens[sign], v, length, h)
    return v
