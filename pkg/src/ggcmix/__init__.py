"""Scale mixtures of Gamma(k) laws, hyperbolic monotonicity and GGC certificates."""

__version__ = "0.1.0"

from .dist import (  # noqa: E402
    FAMILIES,
    Beta,
    Density,
    Gamma,
    IndicatorInterval,
    PowerOf,
    Scaled,
    ShiftedGamma,
    SimBatch,
    Table,
    ThorinSpec,
    Tilted,
    TriangularDown,
    Uniform,
    UniformProduct,
    eval_density,
    from_dict,
    ggc_laplace,
    normalization,
    parse_density,
    sample,
)
from .errors import *  # noqa: E402,F401,F403
from .hyperbolic import HMConfig, HMReport, h_slice, hm_test, logconcavity_test, v_of_w  # noqa: E402
from .identities import (  # noqa: E402
    PQPair,
    ProofPoint,
    asymptotic_check,
    cm_sweep,
    gf_eval,
    jk_closed,
    jk_derivative_rhs,
    jk_quadrature,
    rk_reduction,
    series_check,
)
from .levy import (  # noqa: E402
    KreinAtoms,
    LadderBetaSpec,
    LevySpec,
    excursion_mixing_density,
    excursion_y3_density,
    ks_distance,
    ladder_factor,
    psi,
    simulate_exp_functional,
)
from .mixtures import (  # noqa: E402
    CATALOG_NAMES,
    MixtureDensity,
    catalog,
    product_density,
    ratio_density,
    tilt,
)
from .transforms import (  # noqa: E402
    CMConfig,
    HCMConfig,
    cm_test,
    finite_diff,
    hcm_test,
    laplace,
    product_lt,
    stieltjes_k,
)
