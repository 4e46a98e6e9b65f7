"""fwrestart: projection-free convex solvers with scheduled gap restarts."""

from .algorithms import (
    RunLog,
    Termination,
    burn_in,
    fractional_afw,
    fractional_fw,
    initial_extreme_point,
    one_shot_large_gamma,
    restart_fractional_fw,
    scheduled_restarts,
    vanilla_fw,
)
from .analysis import (
    FitModel,
    RateParams,
    calibrate_mu,
    fit_rate,
    holder_bound,
    primal_gaps,
    recurrence_check,
    theoretical_bound,
)
from .core import (
    ActiveSet,
    AdaptiveParams,
    DenseId,
    GapReport,
    IterationRecord,
    LineSearchKind,
    SignedBasis,
    SolverConfig,
    StepType,
    dense_id,
)
from .gaps import brute_force_strong_wolfe, compute_gaps
from .linesearch import (
    LipschitzState,
    adaptive_step,
    exact_quadratic,
    golden_section,
    quadratic_model,
)
from .objectives import (
    CsvFormatError,
    Dataset,
    LeastSquares,
    Logistic,
    Objective,
    PoweredNorm,
    generate_synthetic,
    load_csv,
)
from .oracles import (
    Box,
    FeasibleRegion,
    L1Ball,
    LpBall,
    Simplex,
    away_vertex,
    lp_ball,
    region_diameter,
)

__version__ = "0.1.0"
