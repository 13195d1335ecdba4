"""Parity-kick suppression of dissipation and decoherence for an oscillator
coupled to a discrete bosonic bath."""

from .model import (
    BathSpec,
    KickSchedule,
    ParameterError,
    SystemParams,
    build_flat_bath,
    decoherence_time,
    revival_time,
)
from .propagator import (
    CouplingMatrix,
    IntegrityError,
    Propagator,
    build_coupling_matrix,
    free_propagator,
    kick_cycle,
    kicked_propagator,
    ode_oracle,
    parity_conjugate,
    pulse_propagator,
    stroboscopic_propagator,
)
from .observables import (
    decoherence_factor,
    eta,
    evolve_amplitudes,
    markov_alpha,
    markov_eta,
    mean_energy,
    wigner,
)

__version__ = "0.1.0"
