"""Exit criteria. Each test records one PASS/FAIL line, printed in the pytest summary."""

import math
import time

import numpy as np
import pytest

from parity_kicks import experiments as ex
from parity_kicks import observables as obs
from parity_kicks import propagator as prop
from parity_kicks.model import BathSpec, KickSchedule

SQRT5 = math.sqrt(5.0)


@pytest.fixture(scope="module")
def config():
    return ex.ScenarioConfig()


@pytest.fixture(scope="module")
def runs(config):
    """Every scenario once, logging each propagator constructed along the way."""
    errors = []
    original = prop.Propagator.__post_init__

    def logging_init(self):
        u = np.asarray(self.matrix, dtype=complex)
        errors.append((prop.unitarity_error(u), abs(float(np.sum(np.abs(u[:, 0]) ** 2)) - 1.0)))
        original(self)

    mp = pytest.MonkeyPatch()
    mp.setattr(prop.Propagator, "__post_init__", logging_init)
    try:
        sim = ex.Simulation(config)
        out = {"sim": sim}
        out["curves"] = {s.label: s for s in ex.run_decoherence_curves(config, sim)}
        start = time.perf_counter()
        out["sweep"] = {s.label: s for s in ex.run_kick_period_sweep(config, sim)}
        out["sweep_seconds"] = time.perf_counter() - start
        out["wigner"] = {g.label: g for g in ex.run_wigner_snapshots(config, sim)}
        out["markov"] = ex.run_markov_validation(config, sim)
        out["revival"] = ex.run_revival_check(config, sim)
    finally:
        mp.undo()
    out["propagator_errors"] = errors
    return out


def test_c01_markovian_limit(config, record_criterion):
    start = time.perf_counter()
    rep = ex.run_markov_validation(config)
    elapsed = time.perf_counter() - start
    ok = rep.max_eta_dev < 0.02 and rep.max_alpha_dev < 0.02 and elapsed < 10.0
    record_criterion(
        "C1 Markovian limit (gamma=0.05)", ok,
        f"max|eta-eta_Mark|={rep.max_eta_dev:.4f}, max||alpha|/|alpha0|-exp(-gt/2)|="
        f"{rep.max_alpha_dev:.4f} (tol 0.02), {elapsed:.2f}s (tol 10s)",
    )
    assert rep.max_eta_dev < 0.02
    assert rep.max_alpha_dev < 0.02
    assert elapsed < 10.0


def test_c02_unitarity_suite(runs, record_criterion):
    errs = runs["propagator_errors"]
    worst_u = max(e[0] for e in errs)
    worst_c = max(e[1] for e in errs)
    ok = worst_u <= 1e-10 and worst_c <= 1e-10
    record_criterion("C2 unitarity suite", ok,
                     f"{len(errs)} propagators, max|U^H U - I|={worst_u:.2e}, "
                     f"max column-0 norm error={worst_c:.2e} (tol 1e-10)")
    assert len(errs) > 100
    assert ok


def test_c03_dissipation_decoherence_identity(runs, config, record_criterion):
    sim = runs["sim"]
    p = config.params
    worst = 0.0
    n = 0
    for T in (None, *(sim.period(w) for w in config.wct_values)):
        for t, U in sim.kicked_series(T, np.linspace(0, 3 / p.gamma, 31)):
            s = sim.snapshot(U, t)
            worst = max(worst, abs(s.energy_ratio + s.eta - 1.0))
            n += 1
    record_criterion("C3 energy ratio + eta = 1", worst <= 1e-9,
                     f"{n} snapshots, max deviation {worst:.2e} (tol 1e-9)")
    assert worst <= 1e-9


def test_c04_kick_ladder(runs, record_criterion):
    curves = runs["curves"]
    labels = ["no-kick", "wcT=50", "wcT=25", "wcT=12.5", "wcT=6.25", "wcT=3.125", "wcT=1.5625"]
    at_1 = [curves[k].y_at(1.0) for k in labels]
    etas = [y for y, _ in at_1]
    monotone = all(b <= a for a, b in zip(etas, etas[1:]))
    fast = curves["wcT=1.5625"]
    fast_max = max(y for x, y in zip(fast.x, fast.y) if x <= 1.0 + 1e-12)
    ok = monotone and fast_max < 0.05
    record_criterion("C4 kick-ladder monotonicity", ok,
                     "eta(1/gamma)=" + ", ".join(f"{e:.4f}" for e in etas)
                     + f"; max eta(wcT=1.5625, t<=1/gamma)={fast_max:.4f} (tol 0.05)")
    assert all(t == pytest.approx(20.0) for _, t in at_1)
    assert monotone
    assert fast_max < 0.05


def _distance_to_monotone(y):
    # sup-norm distance from y to the nearest non-decreasing sequence
    worst_drop = max((max(y[:i + 1]) - y[i] for i in range(len(y))), default=0.0)
    return worst_drop / 2


def test_c05_sharp_transition(runs, record_criterion):
    s = runs["sweep"]["t=1/gamma"]
    ref = runs["curves"]["no-kick"].y_at(1.0)[0]
    x, y = np.array(s.x), np.array(s.y)
    left = y[x <= 0.5]
    right = y[x >= 4.0]
    trend = _distance_to_monotone(list(y))
    seconds = runs["sweep_seconds"]
    ok = (left.max() < 0.1 and right.min() > 0.5 * ref and trend <= 0.02
          and len(x) >= 30 and seconds < 300)
    record_criterion("C5 sharp transition at wcT/2pi = 1", ok,
                     f"max eta(x<=0.5)={left.max():.4f} (tol 0.1), min eta(x>=4)={right.min():.4f} "
                     f"(> {0.5 * ref:.4f}), distance to monotone={trend:.4f} (tol 0.02), "
                     f"{len(x)}-point sweep {seconds:.1f}s (tol 300s)")
    assert left.max() < 0.1
    assert right.min() > 0.5 * ref
    assert trend <= 0.02
    assert seconds < 300


def test_c06_single_mode_freeze(record_criterion):
    bath = BathSpec(1.0, 0.1, 0, np.array([1.0]), np.array([0.37]), 1.0)
    M = prop.build_coupling_matrix(bath)
    worst = 0.0
    for T in (0.05, 0.8, 4.0, 30.0):
        C = prop.kick_cycle(M, bath, T, 0.0)
        worst = max(worst, np.max(np.abs(C.matrix - np.eye(2))))
        for n in (2, 17, 200):
            U = prop.stroboscopic_propagator(C, n)
            worst = max(worst, np.max(np.abs(U.matrix - np.eye(2))))
    record_criterion("C6 single resonant mode freeze", worst <= 1e-12,
                     f"max|cycle^N - I|={worst:.2e} (tol 1e-12)")
    assert worst <= 1e-12


def test_c07_oracle_equivalence(runs, record_criterion):
    sim = runs["sim"]
    M, bath = sim.M, sim.bath
    a0 = SQRT5
    t_max = 3 / sim.params.gamma
    cases = []
    for t in (1 / sim.params.gamma, t_max):
        v = prop.ode_oracle(M, a0, t=t, omega_c=bath.omega_c)
        cases.append(np.max(np.abs(v - a0 * prop.free_propagator(M, t).matrix[:, 0])))
    for wct, tau0 in ((3.125, 0.0), (1.5625, 0.0), (6.25, 0.4)):
        T = wct / bath.omega_c
        n = int(t_max // (2 * T + 2 * tau0))
        sched = KickSchedule(T, tau0, n)
        v = prop.ode_oracle(M, a0, schedule=sched, omega_c=bath.omega_c)
        U = prop.stroboscopic_propagator(prop.kick_cycle(M, bath, T, tau0), n)
        cases.append(np.max(np.abs(v - a0 * U.matrix[:, 0])))
        v = prop.ode_oracle(M, a0, schedule=sched, t=t_max, omega_c=bath.omega_c)
        U = prop.kicked_propagator(M, bath, T, tau0, t_max)
        cases.append(np.max(np.abs(v - a0 * U.matrix[:, 0])))
    worst = max(cases)
    record_criterion("C7 oracle equivalence (202 amplitudes)", worst < 1e-6,
                     f"{len(cases)} runs up to t=3/gamma, max error {worst:.2e} (tol 1e-6)")
    assert worst < 1e-6


def test_c08_wigner_cat_protection(runs, config, record_criterion):
    w = runs["wigner"]
    origin = w["initial"].at(0j)
    vis_no = obs.fringe_visibility(w["nokick"])
    vis_k = obs.fringe_visibility(w["kicked"])
    integrals = [g.integral() for g in w.values()]
    t_dec_ratio = (1 / config.params.gamma) * 2 * config.params.gamma * abs(config.params.alpha0) ** 2
    ok = (abs(origin + 2 / math.pi) <= 1e-6 and vis_no < 0.05 and vis_k > 0.8
          and all(0.99 <= i <= 1.01 for i in integrals))
    record_criterion("C8 Wigner cat protection", ok,
                     f"W(0)={origin:.7f}, t={t_dec_ratio:.0f} t_dec, visibility no-kick={vis_no:.4f} "
                     f"(tol <0.05), kicked={vis_k:.4f} (tol >0.8), integrals "
                     + ", ".join(f"{i:.5f}" for i in integrals))
    assert t_dec_ratio == pytest.approx(10.0)
    assert abs(origin + 2 / math.pi) <= 1e-6
    assert vis_no < 0.05
    assert vis_k > 0.8
    assert all(0.99 <= i <= 1.01 for i in integrals)


def test_c09_parity_conjugation(runs, record_criterion):
    M = runs["sim"].M
    rng = np.random.default_rng(20261016)
    Ts = rng.uniform(0.0, 60.0, 20)
    worst = max(
        np.max(np.abs(prop.free_propagator(M, T, -1).matrix
                      - prop.parity_conjugate(prop.free_propagator(M, T, +1)).matrix))
        for T in Ts
    )
    record_criterion("C9 parity conjugation identity", worst <= 1e-12,
                     f"20 random T in [0, 60], max error {worst:.2e} (tol 1e-12)")
    assert worst <= 1e-12


def test_c10_revival(runs, record_criterion):
    rep = runs["revival"]
    record_criterion("C10 revival sanity", rep.max_ratio > 0.5,
                     f"max |alpha|/|alpha0| in [0.9,1.1] T_rev = {rep.max_ratio:.4f} "
                     f"at t={rep.t_at_max:.1f} (T_rev={rep.t_rev:.1f}; tol >0.5)")
    assert rep.max_ratio > 0.5
