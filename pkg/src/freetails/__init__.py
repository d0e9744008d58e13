"""Free regular infinitely divisible laws, free convolutions and heavy tails."""

from .convolution import (
    FreeProduct,
    FreeSum,
    STransformTable,
    SubordinationState,
    WignerProductSquare,
    compound_free_poisson,
    free_add,
    free_multiply,
    subordination,
    wigner_product_square,
)
from .exceptions import FreeTailsError, NumericalError, ValidationError
from .freeid import (
    ClassicalTriplet,
    FreeRegularLaw,
    FreeRegularRep,
    FreeStableLaw,
    FreeStableParams,
    bercovici_pata,
    classical_compound_poisson_sample,
    contour_moments,
    cumulant_from_nu,
    cumulant_moment_identity_check,
    free_stable_voiculescu,
    nu_from_sigma,
    sigma_from_nu,
    voiculescu_from_sigma,
)
from .inversion import InversionConfig, G_from_phi, stieltjes_invert, tail_from_inversion
from .laws import MarchenkoPasturLaw, SemicircleLaw
from .measures import (
    AtomicMeasure,
    CumulantVector,
    EmpiricalMeasure,
    GriddedDensity,
    Measure,
    MomentVector,
    ParetoMeasure,
    PowerTail,
    delta,
    dilate,
    measure_from_dict,
    moments,
    pareto,
    pushforward_sqrt_symmetric,
    pushforward_square,
    semicircle_grid,
    tail,
    uniform_grid,
)
from .rmt import RmtConfig, compare_to_theory, sample_product_spectrum
from .tails import (
    RemainderCheckConfig,
    TailReport,
    check_remainder_asymptotics,
    classify_Mp,
    estimate_tail_index,
    hill_estimator,
    tail_ratio,
)
from .transforms import (
    ConeRegion,
    cauchy,
    free_cumulant_transform,
    free_cumulants_to_moments,
    invert_F,
    moments_to_free_cumulants,
    reciprocal_cauchy,
    remainder_G,
    remainder_phi,
    voiculescu,
)

__version__ = "0.1.0"
