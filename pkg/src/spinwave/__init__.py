"""Dark-time decay of spin waves stored in cold atomic gases.

Closed-form efficiency models, first-principles oracles on a grid,
Ramsey readout, decay-curve fitting and a command line front-end.
"""

from .errors import (
    ConfigError,
    FitError,
    GridTooSmallError,
    NormDriftError,
    NumericalError,
    QuadratureError,
    SpinwaveError,
    TailBoundError,
    VisibilityError,
)
from .fitting import FitResult, TemperatureFit, fit_decay, fit_tau_vs_temperature
from .models import (
    CoherenceSeries,
    Composite,
    DecayCurve,
    Exponential,
    GaussianOffset,
    HarmonicSag,
    Kuhr,
    LinearForceExact,
    RamanNathGeneral,
    Recoil,
    ReleaseBEC,
    ReleaseThermal,
    compose,
    decay_time,
)
from .physics import (
    RB87,
    BeamGeometry,
    DerivedScales,
    ExperimentConfig,
    Species,
    ThermalEnsemble,
    TrapConfig,
    derive_scales,
    spin_wave_wavevector,
)
from .ramsey import RamseyConfig, ramsey_signal, visibility

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "FitError",
    "GridTooSmallError",
    "NormDriftError",
    "NumericalError",
    "QuadratureError",
    "SpinwaveError",
    "TailBoundError",
    "VisibilityError",
    "FitResult",
    "TemperatureFit",
    "fit_decay",
    "fit_tau_vs_temperature",
    "CoherenceSeries",
    "Composite",
    "DecayCurve",
    "Exponential",
    "GaussianOffset",
    "HarmonicSag",
    "Kuhr",
    "LinearForceExact",
    "RamanNathGeneral",
    "Recoil",
    "ReleaseBEC",
    "ReleaseThermal",
    "compose",
    "decay_time",
    "RB87",
    "BeamGeometry",
    "DerivedScales",
    "ExperimentConfig",
    "Species",
    "ThermalEnsemble",
    "TrapConfig",
    "derive_scales",
    "spin_wave_wavevector",
    "RamseyConfig",
    "ramsey_signal",
    "visibility",
    "__version__",
]
