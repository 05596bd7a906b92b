"""Numerical laboratory for polynomial progressions inside fractal subsets
of the unit interval: fractal measures on a dyadic torus grid, smooth
frequency decompositions, multilinear polynomial averages, scale
pigeonholing, trilinear pattern-counting forms, and direct witness search.
"""

from .averages import (
    SobolevProbeResult,
    average,
    lowfreq_factorization_error,
    maximal_average,
    sobolev_probe,
    truncated_average,
)
from .detect import Witness, average_certificate, detect
from .errors import (
    ConfigError,
    ConstructionError,
    DegeneratePairError,
    FamilyParseError,
    FitError,
    FraclabError,
    NormalizationError,
    PreconditionError,
    RangeError,
    ResourceError,
)
from .families import Polynomial, PolynomialFamily, parse_family
from .fourier import (
    DecayProfile,
    KernelPair,
    Spectrum,
    annulus_norm,
    decay_profile,
    inverse,
    lp_low,
    lp_piece,
    square_function,
    transform,
)
from .grid import (
    DyadicSet,
    GridFunction,
    conditional_expectation,
    grid_norm,
    integrate,
    sample_displaced,
)
from .measures import (
    DigitConstruction,
    FrostmanEstimate,
    cantor_measure,
    estimate_dimension,
    frostman_constant,
    hausdorff_content,
    random_digit_measure,
    support_set,
)
from .pigeonhole import (
    PigeonholeReport,
    energy_extraction,
    find_good_scale,
    lower_bound_check,
)
from .roth import (
    RothReport,
    ThetaPair,
    diagonal_mass,
    lambda_fourier,
    lambda_level,
    lambda_physical,
    roth_certificate,
)

__version__ = "0.1.0"
