"""czpulse: coupler-assisted adiabatic controlled-phase gate toolkit."""

from .errors import (
    AdiabaticityError,
    AnchorError,
    CalibrationError,
    ConfigError,
    CzPulseError,
    DispersiveError,
    DomainError,
    IntegratorError,
    SingularityError,
    TrackingError,
    WaveformRangeError,
)
from .model import (
    CircuitSpec,
    CouplingSpec,
    FluxMapSpec,
    FockBasis,
    HamiltonianMatrix,
    ModeSpec,
    assemble_hamiltonian,
    build_basis,
    computational_labels,
    effective_coupling,
    effective_coupling_zero,
    flux_to_frequency,
    frequency_to_flux,
)
from .spectrum import (
    OperatingMap,
    SpectrumGrid,
    d_factor,
    d_star,
    diagonalize,
    operating_map,
    track_adiabatic,
    zz_strength,
)

__version__ = "0.1.0"
