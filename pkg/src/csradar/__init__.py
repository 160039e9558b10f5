"""Compressed-sensing delay-Doppler radar with Alltop-sequence Gabor dictionaries."""

from .bounds import bound_report, empirical_line, thm1_bound, thm2_bound, thm3_bound
from .gabor import GaborDictionary, build_dictionary, coherence, verify_mub_properties, welch_bound
from .scenes import NoiseSpec, SparseScene, Target, add_awgn, random_scene, scene_error, vectorize
from .solvers import SolverOptions, basis_pursuit, bpdn_entrywise, l0_oracle, omp
from .tfcore import alltop_sequence, gaussian_pulse, random_gaussian_probe, random_phase_probe

__version__ = "0.1.0"

__all__ = [
    "GaborDictionary", "NoiseSpec", "SolverOptions", "SparseScene", "Target",
    "add_awgn", "alltop_sequence", "basis_pursuit", "bound_report", "bpdn_entrywise",
    "build_dictionary", "coherence", "empirical_line", "gaussian_pulse", "l0_oracle", "omp",
    "random_gaussian_probe", "random_phase_probe", "random_scene", "scene_error",
    "thm1_bound", "thm2_bound", "thm3_bound", "vectorize", "verify_mub_properties", "welch_bound",
]
