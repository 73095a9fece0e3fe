"""Grid + PPP cellular network model: analytic coverage, simulation and fitting."""

__version__ = "0.1.0"

from .association import AssociationResult, assoc_bounds, assoc_prob_grid, assoc_prob_ppp, erf
from .coverage import (
    CoverageQuery,
    CoverageResult,
    coverage_curve,
    coverage_exact,
    coverage_lower,
    coverage_ppp_closed_form,
    coverage_upper,
)
from .distributions import (
    DistanceLaw,
    area_fraction_grid,
    area_fraction_ppp,
    grid_nearest_cdf,
    grid_nearest_pdf,
    ppp_nearest_cdf,
    ppp_nearest_pdf,
    superposition_nearest_cdf,
    superposition_nearest_pdf,
)
from .fitting import (
    DeploymentData,
    FittedModel,
    PcfEstimate,
    RectWindow,
    estimate_pcf,
    fit_model,
    kappa_from_rho,
    project_latlon,
    read_deployment_csv,
    rho_from_kappa,
)
from .interference import (
    LaplaceValue,
    LatticeWindow,
    laplace_grid_bounds_assoc,
    laplace_grid_bounds_excl,
    laplace_grid_excl,
    laplace_grid_given_grid_assoc,
    laplace_ppp_excl,
)
from .model import (
    BoundedSingleSlope,
    DualSlope,
    ModelConfig,
    PowerLaw,
    SirThreshold,
    derive_ratios,
    path_gain,
)
from .montecarlo import (
    McEstimate,
    TrialOutcome,
    estimate_association,
    estimate_coverage,
    estimate_nearest_cdf,
    run_trial,
    simulate,
)
from .processes import (
    GridShift,
    Label,
    LabeledPointSet,
    SimWindow,
    nearest,
    sample_grid,
    sample_ppp,
    sample_superposition,
)
from .quadrature import QuadratureError, QuadratureSpec
