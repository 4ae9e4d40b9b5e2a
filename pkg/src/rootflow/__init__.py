"""Root dynamics of repeatedly differentiated polynomials with rotational symmetry."""
from .errors import ConfigError, DegenerateMeasureError, DomainError, NumericalFailure, RootflowError
from .measures import (
    Dirac,
    Empirical,
    EmpiricalMeasure1D,
    PiecewiseLinearCDF,
    PowerLaw,
    RadialMeasure,
    kolmogorov_distance,
    levy_distance,
    levy_prokhorov_bound,
    measure_from_json,
    measure_to_json,
    sample_radii,
)
from .radial_dynamics import RadialState, differentiate_k, differentiate_once, evolve, from_radii, radii_view, roots_as_complex

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "RootflowError",
    "DomainError",
    "DegenerateMeasureError",
    "NumericalFailure",
    "ConfigError",
    "RadialMeasure",
    "Dirac",
    "Empirical",
    "PiecewiseLinearCDF",
    "PowerLaw",
    "EmpiricalMeasure1D",
    "sample_radii",
    "levy_distance",
    "levy_prokhorov_bound",
    "kolmogorov_distance",
    "measure_from_json",
    "measure_to_json",
    "RadialState",
    "from_radii",
    "evolve",
    "differentiate_once",
    "differentiate_k",
    "radii_view",
    "roots_as_complex",
]
