"""Quench dynamics of frustrated spin chains with single-ion anisotropy.

The package builds sparse Hamiltonians for open chains with competing
nearest- and next-nearest-neighbor exchange, a linearly tilted field with
a small quadratic bow, and a uniform single-ion term, then propagates
product states exactly (dense spectra for small sectors, adaptive Krylov
steps otherwise) and measures imbalance, half-chain entanglement, and
spectral participation.
"""

from .basis import SpinBasis, count_digit_strings, enumerate_sector
from .dynamics import (
    EvolutionConfig,
    StateVector,
    evolve_dense,
    evolve_krylov,
    evolve_stream,
    expectation_energy,
    uniform_time_grid,
)
from .errors import (
    BasisMismatchError,
    CapacityError,
    ConfigError,
    ConvergenceError,
    EmptySectorError,
)
from .hpboson import (
    BosonBasis,
    build_bose_hubbard,
    build_hp_hamiltonian,
    enumerate_boson_sector,
    one_magnon_crosscheck,
    polarized_energy,
)
from .model import (
    ModelParams,
    SparseOperator,
    build_hamiltonian,
    couplings_from_theta,
    field_profile,
    full_spectrum,
    write_matrix_market,
)
from .observables import (
    ObservableSeries,
    SpectralDecomposition,
    decompose_state,
    default_degeneracy_tol,
    density_of_states,
    entanglement_entropy,
    imbalance,
    imbalance_from_profiles,
    magnetization_profile,
    participation_entropy,
    thermal_imbalance,
    time_average,
)
from .runner import (
    ScenarioConfig,
    build_initial_state,
    load_scenario,
    n_walls_pattern,
    parse_scenario,
    resolve_initial_pattern,
    run_point,
    run_scenario,
    scenario_from_dict,
    single_island_pattern,
)

__version__ = "0.1.0"

__all__ = [
    "BasisMismatchError",
    "BosonBasis",
    "CapacityError",
    "ConfigError",
    "ConvergenceError",
    "EmptySectorError",
    "EvolutionConfig",
    "ModelParams",
    "ObservableSeries",
    "ScenarioConfig",
    "SparseOperator",
    "SpectralDecomposition",
    "SpinBasis",
    "StateVector",
    "build_bose_hubbard",
    "build_hamiltonian",
    "build_hp_hamiltonian",
    "build_initial_state",
    "count_digit_strings",
    "couplings_from_theta",
    "decompose_state",
    "default_degeneracy_tol",
    "density_of_states",
    "entanglement_entropy",
    "enumerate_boson_sector",
    "enumerate_sector",
    "evolve_dense",
    "evolve_krylov",
    "evolve_stream",
    "expectation_energy",
    "field_profile",
    "full_spectrum",
    "imbalance",
    "imbalance_from_profiles",
    "load_scenario",
    "magnetization_profile",
    "n_walls_pattern",
    "one_magnon_crosscheck",
    "parse_scenario",
    "participation_entropy",
    "polarized_energy",
    "resolve_initial_pattern",
    "run_point",
    "run_scenario",
    "scenario_from_dict",
    "single_island_pattern",
    "thermal_imbalance",
    "time_average",
    "uniform_time_grid",
    "write_matrix_market",
    "__version__",
]
