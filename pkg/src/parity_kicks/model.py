"""Physical parameters, the discrete flat-coupling bath and config loading.

Units: hbar = 1, frequencies in units of omega0, times in units of 1/omega0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np


class ParameterError(ValueError):
    """Raised for physically or numerically invalid inputs."""


@dataclass(frozen=True)
class SystemParams:
    omega0: float = 1.0
    gamma: float = 0.05
    alpha0: complex = complex(math.sqrt(5.0), 0.0)
    phi: float = math.pi
    kick_interval_T: float = 1.5625
    pulse_width_tau0: float = 0.0

    def __post_init__(self) -> None:
        if not self.omega0 > 0:
            raise ParameterError(f"omega0 must be > 0, got {self.omega0}")
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if not self.gamma < self.omega0:
            raise ParameterError(
                f"weak coupling requires gamma < omega0 (gamma={self.gamma}, omega0={self.omega0})"
            )
        if self.kick_interval_T < 0 or self.pulse_width_tau0 < 0:
            raise ParameterError("kick_interval_T and pulse_width_tau0 must be >= 0")
        object.__setattr__(self, "alpha0", complex(self.alpha0))


@dataclass(frozen=True)
class BathSpec:
    """Equally spaced bath modes ``omega_k = omega0 + k*delta`` with couplings ``g``.

    ``omega`` and ``g`` are ordered by increasing k in ``[-k_max, k_max]``.
    """

    omega0: float
    delta: float
    k_max: int
    omega: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    omega_c: float = 0.0

    def __post_init__(self) -> None:
        self.omega.setflags(write=False)
        self.g.setflags(write=False)

    @property
    def n_modes(self) -> int:
        return len(self.omega)

    @property
    def detunings(self) -> np.ndarray:
        return self.omega - self.omega0

    def decoupled(self) -> "BathSpec":
        """Same mode frequencies with every coupling set to zero."""
        return BathSpec(self.omega0, self.delta, self.k_max, self.omega.copy(),
                        np.zeros_like(self.g), self.omega_c)


@dataclass(frozen=True)
class KickSchedule:
    """Periodic parity kicks. One cycle is two pulses and lasts ``2T + 2tau0``."""

    T: float
    tau0: float = 0.0
    n_cycles: int = 0

    def __post_init__(self) -> None:
        if self.T < 0 or self.tau0 < 0:
            raise ParameterError("T and tau0 must be >= 0")
        if self.n_cycles < 0:
            raise ParameterError("n_cycles must be >= 0")
        if self.n_cycles > 0 and self.T == 0 and self.tau0 == 0:
            raise ParameterError("a schedule with cycles needs T > 0 or tau0 > 0")

    @property
    def cycle_time(self) -> float:
        return 2.0 * self.T + 2.0 * self.tau0

    @property
    def duration(self) -> float:
        return self.n_cycles * self.cycle_time


def build_flat_bath(params: SystemParams, delta: float, k_max: int) -> BathSpec:
    """Discretised flat spectrum: ``2*k_max + 1`` modes with ``g_k**2 = gamma*delta/(2*pi)``."""
    if not delta > 0:
        raise ParameterError(f"delta must be > 0, got {delta}")
    if int(k_max) != k_max or k_max < 1:
        raise ParameterError(f"k_max must be an integer >= 1, got {k_max}")
    k_max = int(k_max)
    lowest = params.omega0 - k_max * delta
    # small negative values from rounding (e.g. 1 - 100*0.01) are treated as zero
    if lowest < -1e-12 * params.omega0:
        raise ParameterError(
            f"lowest bath frequency omega0 - k_max*delta = {lowest:g} is negative"
        )
    k = np.arange(-k_max, k_max + 1)
    omega = params.omega0 + k * delta
    g = np.full(omega.shape, math.sqrt(params.gamma * delta / (2.0 * math.pi)))
    return BathSpec(params.omega0, float(delta), k_max, omega, g, float(omega.max()))


def revival_time(bath: BathSpec) -> float:
    return 2.0 * math.pi / bath.delta


def decoherence_time(gamma: float, alpha0: complex) -> float:
    """Lifetime ``1/(2 gamma |alpha0|^2)`` of cat interference under vacuum damping."""
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    n = abs(alpha0) ** 2
    if n == 0:
        raise ParameterError("decoherence time is undefined for alpha0 = 0")
    return 1.0 / (2.0 * gamma * n)


# ---------------------------------------------------------------------------
# flat key/value configuration

DEFAULT_CONFIG: dict[str, Any] = {
    "omega0": 1.0,
    "gamma": 0.05,
    "delta": 0.01,
    "k_max": 100,
    "alpha0_re": math.sqrt(5.0),
    "alpha0_im": 0.0,
    "phi": math.pi,
    "kick_T": 1.5625,
    "tau0": 0.0,
}

_INT_KEYS = {"k_max"}


def coerce_value(key: str, value: Any) -> float | int:
    """Validate ``key`` against the schema and convert ``value`` to its type."""
    if key not in DEFAULT_CONFIG:
        raise ParameterError(f"unknown config key {key!r}")
    try:
        if key in _INT_KEYS:
            as_float = float(value)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        return float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"bad value for {key!r}: {value!r}") from None


def resolve_config(*layers: Mapping[str, Any]) -> dict[str, float | int]:
    """Merge layers over the defaults; later layers win."""
    cfg: dict[str, Any] = dict(DEFAULT_CONFIG)
    for layer in layers:
        for key, value in layer.items():
            cfg[key] = coerce_value(key, value)
    return cfg


def load_config(path: str | Path) -> dict[str, float | int]:
    """Read a flat JSON object of config keys. Unknown keys are an error."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParameterError(f"config {path} must hold a flat object")
    out = {}
    for key, value in raw.items():
        if isinstance(value, (dict, list)):
            raise ParameterError(f"config {path}: key {key!r} is not a scalar")
        out[key] = coerce_value(key, value)
    return out


def params_from_config(cfg: Mapping[str, Any]) -> SystemParams:
    return SystemParams(
        omega0=float(cfg["omega0"]),
        gamma=float(cfg["gamma"]),
        alpha0=complex(cfg["alpha0_re"], cfg["alpha0_im"]),
        phi=float(cfg["phi"]),
        kick_interval_T=float(cfg["kick_T"]),
        pulse_width_tau0=float(cfg["tau0"]),
    )
