import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parity_kicks.model import (
    DEFAULT_CONFIG,
    KickSchedule,
    ParameterError,
    SystemParams,
    build_flat_bath,
    decoherence_time,
    load_config,
    params_from_config,
    resolve_config,
    revival_time,
)


def test_default_bath_layout(bath):
    assert bath.n_modes == 201
    assert bath.omega.min() == pytest.approx(0.0, abs=1e-12)
    assert bath.omega.max() == pytest.approx(2.0)
    assert bath.omega_c == pytest.approx(2.0)
    assert np.all(np.diff(bath.omega) > 0)
    assert np.allclose(np.diff(bath.omega), 0.01)


def test_default_coupling_value(bath):
    expected = math.sqrt(0.05 * 0.01 / (2 * math.pi))
    assert expected == pytest.approx(8.9206e-3, abs=5e-8)
    assert np.all(bath.g == expected)


def test_negative_frequency_rejected():
    with pytest.raises(ParameterError, match="negative"):
        build_flat_bath(SystemParams(), 0.5, 3)


@pytest.mark.parametrize("delta", [0.0, -0.01])
def test_nonpositive_spacing_rejected(delta):
    with pytest.raises(ParameterError):
        build_flat_bath(SystemParams(), delta, 10)


def test_revival_time():
    p = SystemParams()
    assert revival_time(build_flat_bath(p, 0.01, 100)) == pytest.approx(628.3185307, rel=1e-9)
    assert revival_time(build_flat_bath(SystemParams(omega0=20.0), 2 * math.pi, 1)) == pytest.approx(1.0)
    assert revival_time(build_flat_bath(SystemParams(omega0=20.0), math.pi, 1)) == pytest.approx(2.0)


def test_decoherence_time():
    assert decoherence_time(1.0, math.sqrt(5)) == pytest.approx(0.1)
    assert decoherence_time(0.5, 1.0) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        decoherence_time(1.0, 0.0)


@pytest.mark.parametrize("kwargs", [
    {"omega0": 0.0}, {"gamma": 0.0}, {"gamma": 1.5}, {"kick_interval_T": -1.0},
])
def test_system_params_invariants(kwargs):
    with pytest.raises(ParameterError):
        SystemParams(**kwargs)


def test_kick_schedule():
    s = KickSchedule(T=1.0, tau0=0.25, n_cycles=3)
    assert s.cycle_time == 2.5
    assert s.duration == 7.5
    with pytest.raises(ParameterError):
        KickSchedule(T=0.0, tau0=0.0, n_cycles=1)
    assert KickSchedule(T=0.0, tau0=0.0, n_cycles=0).duration == 0


@settings(max_examples=60, deadline=None)
@given(
    gamma=st.floats(0.001, 0.5),
    k_max=st.integers(1, 150),
    frac=st.floats(0.05, 1.0),
)
def test_flat_bath_properties(gamma, k_max, frac):
    p = SystemParams(gamma=gamma)
    delta = frac * p.omega0 / k_max
    b = build_flat_bath(p, delta, k_max)
    K = 2 * k_max + 1
    assert b.n_modes == K
    assert np.sum(b.g ** 2) == pytest.approx(gamma * K * delta / (2 * math.pi), rel=1e-12)
    assert np.allclose(b.detunings, -b.detunings[::-1], atol=1e-12)
    assert b.omega.min() >= -1e-12
    assert revival_time(b) * delta == pytest.approx(2 * math.pi, rel=1e-15)


def test_config_roundtrip(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"gamma": 0.1, "k_max": 50}))
    cfg = resolve_config(load_config(path))
    assert cfg["gamma"] == 0.1 and cfg["k_max"] == 50
    assert cfg["omega0"] == DEFAULT_CONFIG["omega0"]
    p = params_from_config(cfg)
    assert p.gamma == 0.1 and p.alpha0 == complex(math.sqrt(5), 0)


def test_config_precedence():
    cfg = resolve_config({"gamma": 0.1, "phi": 0.0}, {"gamma": 0.2})
    assert cfg["gamma"] == 0.2 and cfg["phi"] == 0.0


@pytest.mark.parametrize("content", [
    '{"bogus": 1}', '{"k_max": 10.5}', '{"gamma": "fast"}', '[1, 2]', '{"gamma": {"a": 1}}', "not json",
])
def test_config_rejects_bad_files(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(ParameterError):
        load_config(path)
