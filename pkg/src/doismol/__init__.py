"""doismol: a finite-volume verification lab for the large-coupling limit
of the radial Doi absorption model against its Smoluchowski boundary-value
limit, on concentric balls in any dimension (eigen oracle in m = 3).
"""

from .geometry import (
    Field,
    GridAlignmentError,
    RadialDomain,
    Region,
    RegionError,
    SpaceTimeGrid,
    build_domain,
    extend_by_zero,
    lateral_trace,
    restrict_inner,
    restrict_outer,
)
from .norms import (
    NormSpec,
    grad_l2,
    hrs_surrogate,
    inner_l2,
    interpolation_bound,
    l2,
    slobodeckii_time,
    space_interpolation,
    sup_t_l2,
)
from .oracle import EigenMode, eigen_wavenumbers, mms_source, series_solution
from .profiles import initial_profile
from .solvers import (
    ProblemSpec,
    SolverFailure,
    coupling_residuals,
    solve_auxiliary,
    solve_doi,
    solve_forced,
    solve_smoluchowski,
)
from .estimates import (
    EnergyReport,
    check_energy_doi,
    check_energy_doi_refined,
    check_energy_smol,
    check_modified_trace,
    fit_trace_prefactor,
    main_bound_ratio,
    poincare_constant,
    transposition_residual,
)
from .rates import (
    ClaimCheck,
    DegenerateSweepError,
    RateFit,
    SweepResult,
    SweepRow,
    SweepSpec,
    check_claims,
    claimed_exponent,
    fit_rate,
    run_sweep,
)

__version__ = "0.1.0"
