"""Scenario harness: decoherence curves, kick-period sweep, Wigner snapshots,
Markovian validation and revival check, plus their CSV/JSON artifacts."""

from __future__ import annotations

import json
import math
import os
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import observables as obs
from . import propagator as prop
from .model import (
    BathSpec,
    ParameterError,
    SystemParams,
    build_flat_bath,
    params_from_config,
    resolve_config,
    revival_time,
)

FIG1_WCT = (50.0, 25.0, 12.5, 6.25, 3.125, 1.5625)
FIG3_WCT = 3.125


@dataclass
class ScenarioConfig:
    params: SystemParams = field(default_factory=SystemParams)
    delta: float = 0.01
    k_max: int = 100
    wct_values: Sequence[float] = FIG1_WCT
    # curve sample times in units of 1/gamma
    curve_gamma_t: Sequence[float] = tuple(np.round(np.linspace(0.0, 3.0, 61), 12))
    sweep_lo: float = 0.1
    sweep_hi: float = 8.0
    sweep_points: int = 30
    sweep_gamma_t: Sequence[float] = (0.5, 1.0)
    wigner_axis: obs.WignerAxis = field(default_factory=obs.WignerAxis)
    wigner_wct: float = FIG3_WCT
    snap_to_grid: bool = False
    threads: int = 0
    out_dir: Path = Path("out")

    def __post_init__(self) -> None:
        if any(not w > 0 for w in self.wct_values) or not self.wigner_wct > 0:
            raise ParameterError("all omega_c*T values must be positive")
        if not 0 < self.sweep_lo < self.sweep_hi or self.sweep_points < 2:
            raise ParameterError("sweep range must satisfy 0 < lo < hi with at least 2 points")
        t_max = math.pi / self.delta
        gamma = self.params.gamma
        for gt in list(self.curve_gamma_t) + list(self.sweep_gamma_t):
            if gt < 0 or gt / gamma > t_max * (1 + 1e-12):
                raise ParameterError(
                    f"sample time {gt}/gamma lies outside [0, pi/delta = {t_max:g}]"
                )
        if list(self.curve_gamma_t) != sorted(set(self.curve_gamma_t)):
            raise ParameterError("curve sample times must be strictly increasing")

    @classmethod
    def from_flat(cls, cfg: dict[str, Any], **kwargs: Any) -> "ScenarioConfig":
        cfg = resolve_config(cfg)
        return cls(params=params_from_config(cfg), delta=float(cfg["delta"]),
                   k_max=int(cfg["k_max"]), **kwargs)

    def bath(self) -> BathSpec:
        return build_flat_bath(self.params, self.delta, self.k_max)

    def sweep_grid(self) -> np.ndarray:
        return np.geomspace(self.sweep_lo, self.sweep_hi, self.sweep_points)

    def manifest(self) -> dict[str, Any]:
        p = self.params
        return {
            "omega0": p.omega0, "gamma": p.gamma, "delta": self.delta, "k_max": self.k_max,
            "alpha0_re": p.alpha0.real, "alpha0_im": p.alpha0.imag, "phi": p.phi,
            "kick_T": p.kick_interval_T, "tau0": p.pulse_width_tau0,
            "wct_values": ",".join(_fmt(w) for w in self.wct_values),
            "curve_points": len(self.curve_gamma_t),
            "sweep_lo": self.sweep_lo, "sweep_hi": self.sweep_hi,
            "sweep_points": self.sweep_points,
            "sweep_gamma_t": ",".join(_fmt(g) for g in self.sweep_gamma_t),
            "wigner_lo": self.wigner_axis.lo, "wigner_hi": self.wigner_axis.hi,
            "wigner_n": self.wigner_axis.n, "wigner_wct": self.wigner_wct,
            "snap_to_grid": self.snap_to_grid, "threads": self.threads,
        }


@dataclass
class CurveSeries:
    label: str
    x: list[float] = field(default_factory=list)
    y: list[float] = field(default_factory=list)
    snapped_time: list[float] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def append(self, x: float, y: float, t: float) -> None:
        if self.x and not x > self.x[-1]:
            raise ValueError(f"{self.label}: x must be strictly increasing ({x} after {self.x[-1]})")
        self.x.append(float(x))
        self.y.append(float(y))
        self.snapped_time.append(float(t))

    def y_at(self, x: float) -> tuple[float, float]:
        """(y, snapped_time) at the sample nearest ``x``."""
        i = int(np.argmin(np.abs(np.asarray(self.x) - x)))
        return self.y[i], self.snapped_time[i]


@dataclass
class MarkovReport:
    max_eta_dev: float
    max_alpha_dev: float
    n_samples: int
    t_lo: float
    t_hi: float
    coupled: bool
    tolerance: float = 0.02

    @property
    def passed(self) -> bool:
        return self.coupled and max(self.max_eta_dev, self.max_alpha_dev) < self.tolerance


@dataclass
class RevivalReport:
    t_rev: float
    max_ratio: float
    t_at_max: float
    ratio_half: float


class Simulation:
    """Bath, coupling matrix and a propagator log shared by one run's scenarios."""

    def __init__(self, config: ScenarioConfig, bath: BathSpec | None = None):
        self.config = config
        self.params = config.params
        self.bath = config.bath() if bath is None else bath
        self.M = prop.build_coupling_matrix(self.bath)
        # decompose up front so worker threads share one cache entry per sign
        self.M.eig(1)
        self.M.eig(-1)
        self.max_unitarity_error = 0.0
        self.n_propagators = 0
        self._lock = threading.Lock()

    def _record(self, U: prop.Propagator) -> prop.Propagator:
        err = prop.unitarity_error(U.matrix)
        with self._lock:
            self.max_unitarity_error = max(self.max_unitarity_error, err)
            self.n_propagators += 1
        return U

    def free(self, t: float) -> prop.Propagator:
        return self._record(prop.free_propagator(self.M, t))

    def period(self, wct: float) -> float:
        return wct / self.bath.omega_c

    def eval_time(self, t: float, T: float | None) -> float:
        """Time actually evaluated for target ``t``; differs only with grid snapping."""
        if T is None or not self.config.snap_to_grid:
            return t
        return prop.snap_time(t, 2 * T + 2 * self.params.pulse_width_tau0)[1]

    def kicked_series(self, T: float | None, times: Iterable[float]) -> list[tuple[float, prop.Propagator]]:
        """Propagators at each target time (ascending); ``T=None`` means no kicks."""
        out = []
        if T is None:
            for t in times:
                out.append((t, self.free(t)))
            return out
        tau0 = self.params.pulse_width_tau0
        cycle = self._record(prop.kick_cycle(self.M, self.bath, T, tau0))
        cycle_time = cycle.elapsed
        powers = [prop.identity(self.M.dim)]
        for t in times:
            t_eval = self.eval_time(t, T)
            n, t_grid = prop.snap_time(t_eval, cycle_time)
            while len(powers) <= n:
                powers.append(self._record(cycle @ powers[-1]))
            r = max(0.0, t_eval - t_grid)
            U = powers[n]
            if r > 0:
                U = prop.partial_cycle(self.M, self.bath, T, tau0, r) @ U
            out.append((t_eval, self._record(U)))
        return out

    def snapshot(self, U: prop.Propagator, t: float) -> obs.CatSnapshot:
        p = self.params
        return obs.snapshot(U, p.alpha0, p.phi, p.omega0, time=t)


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    workers = threads if threads > 0 else min(8, os.cpu_count() or 1)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_decoherence_curves(config: ScenarioConfig, sim: Simulation | None = None) -> list[CurveSeries]:
    """eta versus gamma*t for the unkicked system and each omega_c*T in the ladder."""
    sim = Simulation(config) if sim is None else sim
    gamma = sim.params.gamma
    times = [gt / gamma for gt in config.curve_gamma_t]
    specs: list[tuple[str, float | None]] = [("no-kick", None)]
    specs += [(f"wcT={_fmt(w)}", sim.period(w)) for w in config.wct_values]

    def one(spec: tuple[str, float | None]) -> CurveSeries:
        label, T = spec
        s = CurveSeries(label, meta={"T": T, "omega_c": sim.bath.omega_c})
        for t, U in sim.kicked_series(T, times):
            # grid snapping can map several targets onto one grid time
            if s.x and not gamma * t > s.x[-1]:
                continue
            s.append(gamma * t, sim.snapshot(U, t).eta, t)
        return s

    return _map(one, specs, config.threads)


def run_kick_period_sweep(config: ScenarioConfig, sim: Simulation | None = None) -> list[CurveSeries]:
    """eta at fixed times versus omega_c*T/(2 pi); one series per fixed time."""
    sim = Simulation(config) if sim is None else sim
    gamma = sim.params.gamma
    xs = config.sweep_grid()
    times = [gt / gamma for gt in config.sweep_gamma_t]

    def one(x: float) -> list[tuple[float, float]]:
        T = sim.period(2.0 * math.pi * x)
        res = []
        for t, U in sim.kicked_series(T, times):
            res.append((sim.snapshot(U, t).eta, t))
        return res

    rows = _map(one, list(xs), config.threads)
    series = []
    for j, gt in enumerate(config.sweep_gamma_t):
        s = CurveSeries(f"t={_fmt(gt)}/gamma", meta={"t": times[j]})
        for x, row in zip(xs, rows):
            s.append(x, row[j][0], row[j][1])
        series.append(s)
    return series


def nokick_eta(config: ScenarioConfig, gamma_t: float, sim: Simulation | None = None) -> float:
    sim = Simulation(config) if sim is None else sim
    t = gamma_t / sim.params.gamma
    return sim.snapshot(sim.free(t), t).eta


def run_wigner_snapshots(config: ScenarioConfig, sim: Simulation | None = None) -> list[obs.WignerGrid]:
    """(a) initial cat, (b) kicked at t = 1/gamma, (c) unkicked at t = 1/gamma."""
    sim = Simulation(config) if sim is None else sim
    p = sim.params
    t = 1.0 / p.gamma
    ax = config.wigner_axis
    initial = obs.wigner(obs.initial_snapshot(p.alpha0), p.alpha0, p.phi, ax, label="initial")
    [(tk, Uk)] = sim.kicked_series(sim.period(config.wigner_wct), [t])
    kicked = obs.wigner(sim.snapshot(Uk, tk), p.alpha0, p.phi, ax, label="kicked")
    nokick = obs.wigner(sim.snapshot(sim.free(t), t), p.alpha0, p.phi, ax, label="nokick")
    return [initial, kicked, nokick]


def run_markov_validation(config: ScenarioConfig, sim: Simulation | None = None,
                          n_samples: int = 51) -> MarkovReport:
    """Largest deviation from the Markovian closed forms over 0.1/gamma..3/gamma.

    Samples beyond pi/delta are dropped (recurrences from the discrete bath).
    """
    sim = Simulation(config) if sim is None else sim
    gamma = sim.params.gamma
    t_max = math.pi / sim.bath.delta
    ts = [t for t in np.geomspace(0.1 / gamma, 3.0 / gamma, n_samples) if t <= t_max]
    eta_dev = alpha_dev = 0.0
    for t in ts:
        U = sim.free(t)
        snap = sim.snapshot(U, t)
        eta_dev = max(eta_dev, abs(snap.eta - float(obs.markov_eta(gamma, t))))
        alpha_dev = max(alpha_dev, abs(abs(U.matrix[0, 0]) - math.exp(-0.5 * gamma * t)))
    coupled = bool(np.any(sim.bath.g != 0))
    return MarkovReport(eta_dev, alpha_dev, len(ts), min(ts, default=0.0), max(ts, default=0.0), coupled)


def run_revival_check(config: ScenarioConfig, sim: Simulation | None = None,
                      n_samples: int = 2001) -> RevivalReport:
    """Largest unkicked ``|alpha(t)|/|alpha0|`` in [0.9, 1.1] * T_rev, and the value at T_rev/2."""
    sim = Simulation(config) if sim is None else sim
    t_rev = revival_time(sim.bath)
    lam, vecs = sim.M.eig(1)
    weights = np.abs(vecs[0, :]) ** 2
    ts = np.linspace(0.9 * t_rev, 1.1 * t_rev, n_samples)
    # U_00(t) = sum_j |V_0j|^2 exp(-i lam_j t); avoids building full matrices per sample
    ratios = np.abs(np.exp(-1j * np.outer(ts, lam)) @ weights)
    i = int(np.argmax(ratios))
    half = abs(sim.free(0.5 * t_rev).matrix[0, 0])
    return RevivalReport(t_rev, float(ratios[i]), float(ts[i]), float(half))


# ---------------------------------------------------------------------------
# artifacts


def _fmt(v: float) -> str:
    """Decimal notation with 12 significant digits."""
    v = float(v)
    if v == 0:
        return "0"
    s = np.format_float_positional(v, precision=12, unique=False, fractional=False, trim="-")
    return s


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


CURVE_HEADER = "x,y,label,snapped_time"
WIGNER_HEADER = "re_z,im_z,w"


def curves_to_text(series: Sequence[CurveSeries]) -> str:
    lines = [CURVE_HEADER]
    for s in series:
        if "," in s.label or "\n" in s.label:
            raise ValueError(f"label {s.label!r} may not contain commas or newlines")
        for x, y, t in zip(s.x, s.y, s.snapped_time):
            lines.append(f"{_fmt(x)},{_fmt(y)},{s.label},{_fmt(t)}")
    return "\n".join(lines) + "\n"


def wigner_to_text(grid: obs.WignerGrid) -> str:
    lines = [WIGNER_HEADER]
    for i, x in enumerate(grid.re_z):
        xs = _fmt(x)
        for j, p in enumerate(grid.im_z):
            lines.append(f"{xs},{_fmt(p)},{_fmt(grid.values[i, j])}")
    return "\n".join(lines) + "\n"


def write_csv(data: CurveSeries | Sequence[CurveSeries] | obs.WignerGrid, path: str | Path) -> None:
    """Write curve series or a Wigner grid; the file appears only once complete."""
    if isinstance(data, obs.WignerGrid):
        text = wigner_to_text(data)
    elif isinstance(data, CurveSeries):
        text = curves_to_text([data])
    else:
        text = curves_to_text(list(data))
    _atomic_write(Path(path), text)


def read_curves_csv(path: str | Path) -> list[CurveSeries]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CURVE_HEADER:
        raise ValueError(f"{path}: missing header {CURVE_HEADER!r}")
    by_label: dict[str, CurveSeries] = {}
    for line in lines[1:]:
        x, y, label, t = line.split(",")
        s = by_label.setdefault(label, CurveSeries(label))
        s.append(float(x), float(y), float(t))
    return list(by_label.values())


def write_manifest(entries: dict[str, Any], path: str | Path) -> None:
    flat = {}
    for k, v in entries.items():
        if isinstance(v, (dict, list, tuple)):
            raise ValueError(f"manifest entry {k!r} must be a scalar")
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        flat[k] = v
    _atomic_write(Path(path), json.dumps(flat, indent=2, sort_keys=True) + "\n")
