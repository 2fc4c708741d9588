"""Simulation and analysis toolkit for transient spectroscopy of tunneling
two-level defect ensembles: Lindblad time evolution under strong gated
drives, Floquet quasi-energy analysis, ring-down signal processing, and
rectangular-waveguide drive calibration.
"""

from .analysis import (
    ChiMap,
    CorrelationMap,
    LifetimeFit,
    Series,
    Spectrogram,
    TimeTrace,
    chi_imag,
    diff_map,
    fit_lifetime,
    g2_map,
    homodyne_amplitude,
    intensity,
    mean_driven_response,
    pulse_bandwidth,
    ringdown_fft,
)
from .config import RunConfig, load_config, parse_config
from .datasets import import_iq_csv, read_dataset, write_dataset
from .errors import (
    ConfigError,
    DatasetError,
    NumericsError,
    SweepPointError,
    TdspecError,
)
from .floquet import (
    FloquetSpectrum,
    QuasiEnergySweep,
    bessel_j,
    floquet_response,
    n_photon_coupling,
    quasi_energies,
    sweep_quasi_energies,
)
from .lindblad import EvolutionResult, evolve, ground_state, lindblad_rhs
from .model import (
    DisorderSpec,
    DrivePulse,
    EnsembleSpec,
    GainTable,
    TlsParams,
    build_collective_jump_operators,
    build_polarization_operator,
    build_static_hamiltonian,
    sample_disorder,
    tls_splitting,
)
from .sweep import SweepPlan, SweepResult, run_duration_series, run_frequency_sweep
from .waveguide import (
    FieldProfile,
    WaveguideGeometry,
    flatten_gain,
    mode_cutoffs,
    propagation_constant,
)

__version__ = "1.0.0"
