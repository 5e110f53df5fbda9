"""Sharp constants and curvature checks for the monomial CKN inequality."""

from .params import (
    CknParams,
    DerivedParams,
    DomainError,
    HypothesisReport,
    MonomialWeight,
    Regime,
    derive,
    felli_schneider,
    interpolation_exponents,
    make_params,
    subcritical_constant,
    theorem_hypotheses,
)
from .special import (
    ClosedFormConstants,
    OptimalityWarning,
    closed_form_constants,
    cosh_profile_integral,
    log_gamma,
    optimal_constant,
    sphere_weight_area,
    z_constant,
)
from .jets import Jet
from .quadrature import (
    ConvergenceError,
    QuadratureRule1D,
    SphereRule,
    gauss_jacobi,
    integrate_E,
    integrate_radial_mu_E,
    integrate_S,
    integrate_sphere,
    sphere_rule,
)
from .calculus import (
    ChartError,
    ModelE,
    ModelS,
    MonomialSphere,
    ZetaCutoff,
    cd_sphere_defect,
    hessian_w_bound_residual,
    ibp_residual_S,
    ibp_residual_sphere,
    integrated_cd_defect,
    warped_identity_residual,
)
from .optimizers import (
    OptimizerE,
    OptimizerS,
    ckn_sides,
    conformal_E_to_S,
    conformal_S_to_E,
    euler_lagrange_residual,
    phi_identity_residual,
    tight_sobolev_sides,
    weyl_extension_check,
)
from .spectral import (
    BreakingVerdict,
    ScanRow,
    Verdict,
    nonradial_test_quotient,
    phase_scan,
    radial_spectral_gap_S,
    sphere_first_eigenvalue,
    stability_threshold,
    symmetry_breaking_detector,
)

__version__ = "0.1.0"
