"""Cat-state observables computed from a propagator's first column."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ParameterError
from .propagator import IntegrityError, Propagator

ETA_CONSISTENCY_TOL = 1e-8
ENERGY_IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class AmplitudeState:
    alpha: complex
    betas: np.ndarray = field(repr=False)

    @property
    def norm_sq(self) -> float:
        return abs(self.alpha) ** 2 + float(np.sum(np.abs(self.betas) ** 2))


@dataclass(frozen=True)
class CatSnapshot:
    time: float
    alpha_t: complex
    eta: float
    D: float
    energy_ratio: float


@dataclass(frozen=True)
class WignerAxis:
    lo: float = -4.5
    hi: float = 4.5
    n: int = 161

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class WignerGrid:
    """``values[i, j]`` is W at ``re_z[i] + 1j * im_z[j]``."""

    re_z: np.ndarray = field(repr=False)
    im_z: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    alpha0: complex = 0j
    phi: float = 0.0
    alpha_t: complex = 0j
    D: float = 1.0
    label: str = ""

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.im_z, axis=1), self.re_z))

    def at(self, z: complex) -> float:
        i = int(np.argmin(np.abs(self.re_z - z.real)))
        j = int(np.argmin(np.abs(self.im_z - z.imag)))
        return float(self.values[i, j])


def evolve_amplitudes(U: Propagator, alpha0: complex) -> AmplitudeState:
    col = U.matrix[:, 0] * alpha0
    return AmplitudeState(complex(col[0]), col[1:].copy())


def eta(U: Propagator) -> float:
    """Weight transferred to the bath: ``sum_k |U_k0|^2``.

    Cross-checked against ``1 - |U_00|^2``; a mismatch means unitarity broke.
    """
    col = U.matrix[:, 0]
    bath_sum = float(np.sum(np.abs(col[1:]) ** 2))
    complement = 1.0 - abs(col[0]) ** 2
    if abs(bath_sum - complement) > ETA_CONSISTENCY_TOL:
        raise IntegrityError(
            f"eta routes disagree: sum_k |U_k0|^2 = {bath_sum!r}, 1 - |U_00|^2 = {complement!r}"
        )
    return bath_sum


def decoherence_factor(eta_val: float, alpha0: complex) -> float:
    if eta_val < -1e-8 or eta_val > 1 + 1e-8:
        raise ParameterError(f"eta must lie in [0, 1], got {eta_val}")
    return math.exp(-2.0 * abs(alpha0) ** 2 * eta_val)


def mean_energy(alpha_t: complex, alpha0: complex, phi: float, omega0: float) -> float:
    """Mean oscillator energy of the evolved cat (hbar = 1)."""
    c = math.cos(phi) * math.exp(-2.0 * abs(alpha0) ** 2)
    if 1.0 + c == 0.0:
        raise ParameterError("degenerate cat state: normalisation vanishes (alpha0 = 0, phi = pi)")
    return omega0 * abs(alpha_t) ** 2 * (1.0 - c) / (1.0 + c)


def markov_eta(gamma: float, t):
    return 1.0 - np.exp(-gamma * np.asarray(t, dtype=float))


def markov_alpha(gamma: float, t, alpha0: complex):
    return alpha0 * np.exp(-0.5 * gamma * np.asarray(t, dtype=float))


def snapshot(U: Propagator, alpha0: complex, phi: float, omega0: float = 1.0,
             time: float | None = None) -> CatSnapshot:
    """Observables of the evolved cat. Checks energy_ratio + eta = 1."""
    amps = evolve_amplitudes(U, alpha0)
    e = eta(U)
    D = decoherence_factor(min(max(e, 0.0), 1.0), alpha0)
    e0 = mean_energy(alpha0, alpha0, phi, omega0)
    ratio = mean_energy(amps.alpha, alpha0, phi, omega0) / e0 if e0 > 0 else abs(U.matrix[0, 0]) ** 2
    if abs(ratio + e - 1.0) > ENERGY_IDENTITY_TOL:
        raise IntegrityError(f"energy ratio {ratio!r} + eta {e!r} != 1")
    return CatSnapshot(U.elapsed if time is None else time, amps.alpha, e, D, ratio)


def initial_snapshot(alpha0: complex) -> CatSnapshot:
    return CatSnapshot(0.0, complex(alpha0), 0.0, 1.0, 1.0)


# minimum margin between the outermost lobe centre and the grid edge
WIGNER_MARGIN = 2.25


def wigner(snap: CatSnapshot, alpha0: complex, phi: float,
           re_axis: WignerAxis = WignerAxis(), im_axis: WignerAxis | None = None,
           label: str = "") -> WignerGrid:
    """Closed-form Wigner function of the evolved cat's reduced state.

    Convention: ``z = x + i p``, a coherent state peaks at 2/pi, and the
    integral over ``dx dp`` is one.
    """
    im_axis = re_axis if im_axis is None else im_axis
    a = complex(snap.alpha_t)
    need = abs(a) + WIGNER_MARGIN
    for ax in (re_axis, im_axis):
        if ax.lo > -need or ax.hi < need:
            raise ParameterError(
                f"Wigner grid [{ax.lo}, {ax.hi}] must cover +-{need:.3f} (|alpha(t)| + {WIGNER_MARGIN})"
            )
    x = re_axis.points()[:, None]
    p = im_axis.points()[None, :]
    n2 = 1.0 / (2.0 + 2.0 * math.exp(-2.0 * abs(alpha0) ** 2) * math.cos(phi))
    r2 = x * x + p * p
    lobes = (np.exp(-2.0 * ((x - a.real) ** 2 + (p - a.imag) ** 2))
             + np.exp(-2.0 * ((x + a.real) ** 2 + (p + a.imag) ** 2)))
    fringes = 2.0 * snap.D * np.exp(-2.0 * r2) * np.cos(4.0 * (x * a.imag - p * a.real) - phi)
    values = n2 * (2.0 / math.pi) * (lobes + fringes)
    return WignerGrid(re_axis.points(), im_axis.points(), values,
                      complex(alpha0), float(phi), a, float(snap.D), label)


def fringe_visibility(grid: WignerGrid) -> float:
    """Interference contrast on the Im z axis, between lobes lying on the real axis.

    The column nearest Re z = 0 is divided by the vacuum envelope
    ``exp(-2 p^2)`` over one fringe period either side of the origin, and its
    peak-to-peak range is normalised by ``2 * (2/pi)``. An undamped odd cat
    gives 1 and the value tracks D otherwise.
    """
    a = abs(grid.alpha_t)
    if a == 0:
        return 0.0
    i0 = int(np.argmin(np.abs(grid.re_z)))
    p = grid.im_z
    window = np.abs(p) <= math.pi / (2.0 * a)
    profile = grid.values[i0, window] * np.exp(2.0 * p[window] ** 2)
    return float((profile.max() - profile.min()) / (2.0 * (2.0 / math.pi)))
