"""Classical simulator for continuous-variable scattering in lattice phi^4 theory."""

from .lattice import LatticeSpec, dispersion, mode_frequencies
from .synthesis import GaussianCircuit, synthesize_ground_circuit
from .fock import FockState
from .scattering import ScatteringSpec, exact_amplitude_oracle, make_spec, scattering_amplitude

__all__ = ["LatticeSpec", "dispersion", "mode_frequencies", "GaussianCircuit", "synthesize_ground_circuit",
           "FockState", "ScatteringSpec", "make_spec", "scattering_amplitude", "exact_amplitude_oracle"]
