"""translen: an exact-arithmetic workbench for translation lengths.

Injective-hull barycentres on finite metric spaces, word metrics by BFS,
certified stable-translation-length brackets, Brooks counting
quasimorphisms, bounded-cocycle central extensions, quasimorphism
quasilines, and toy hierarchically-hyperbolic structures.
"""

from .metric import (
    FiniteMetricSpace,
    MetricFunction,
    kuratowski,
    sup_distance,
    validate_metric,
)
from .tightspan import (
    TightSpanPoint,
    barycentre,
    dyadic_geodesic,
    in_px,
    midpoint,
    retract,
    star,
)
from .groups import (
    FreeGroup,
    FreeWord,
    GroupOracle,
    HeisenbergGroup,
    LatticeGroup,
    parse_group,
    power,
    reduce,
    word_ball,
    word_distance,
)
from .translation import (
    LipschitzCertificate,
    TauBracket,
    barycentric_displacement,
    distortion_profile,
    tau_lower_certified,
    tau_upper,
)
from .brooks import (
    CombinationSpec,
    HomogenisedValue,
    Quasimorphism,
    brooks,
    combine,
    count_disjoint,
    defect_sample,
    homogenize,
    pullback,
)
from .extension import (
    CentralExtension,
    Cocycle,
    build_r_hat,
    ext_inv,
    ext_mult,
    ext_power,
    floor_linear_cocycle,
    heisenberg_cocycle,
    peripheral_analysis,
    q_alpha,
    validate_cocycle,
    zero_cocycle,
)
from .quasiline import (
    ExactLinearForm,
    QuasilineConfig,
    distance_bounds,
    in_generating_set,
    tau_quasiline_bracket,
)
from .hhg import (
    ToyHHGStructure,
    df_ratio_scan,
    discreteness_probe,
    extend_with_quasiline,
    make_z2_delta_epsilon,
    make_z2_epsilon,
    relevant_domains,
    tau_per_domain,
    validate_structure,
)
from .pipeline import run_pipeline

__version__ = "0.1.0"
