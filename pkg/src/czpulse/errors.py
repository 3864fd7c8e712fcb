"""Exception types shared across the package."""


class CzPulseError(Exception):
    """Base class for all czpulse errors."""


class ConfigError(CzPulseError):
    """Invalid circuit/noise/pulse configuration input."""


class DomainError(CzPulseError):
    """Argument outside the documented validity range."""


class SingularityError(CzPulseError):
    """Degenerate denominator (resonant frequencies, flux sweet-spot slope)."""


class AnchorError(CzPulseError):
    """No grid sample qualifies as a dispersive anchor for state tracking."""


class TrackingError(CzPulseError):
    """Adiabatic continuation failed even after grid refinement."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class DispersiveError(CzPulseError):
    """Perturbative expansion evaluated outside its dispersive validity range."""


class WaveformRangeError(CzPulseError):
    """Pulse trajectory left the tabulated coupler-frequency range."""


class AdiabaticityError(CzPulseError):
    """Divergent adiabaticity measure encountered along a trajectory."""


class CalibrationError(CzPulseError):
    """Conditional-phase target unreachable within the allowed range."""


class IntegratorError(CzPulseError):
    """Numerical integration lost unitarity/trace beyond tolerance."""
