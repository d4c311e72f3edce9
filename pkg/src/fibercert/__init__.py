"""fibercert: exact fibered-cone reconstruction and curve-graph
translation-length upper-bound certificates from lifted train-track maps."""

from .cones import (
    DualConeModel,
    EpsilonBound,
    FiberedConeModel,
    epsilon_of_subcone,
    estimate_dual_cone,
    fibered_cone_from_dual,
)
from .errors import (
    BudgetError,
    CapabilityError,
    RankMismatchError,
    SubconeError,
    ValidationError,
)
from .lattice import (
    DeepPoint,
    FiberedClass,
    PerpLattice,
    covolume,
    deep_point,
    perp_basis,
    systole,
)
from .laurent import (
    CharPoly,
    DegreeData,
    LaurentMatrix,
    LaurentPoly,
    char_poly,
    degree_extrema,
    mat_pow,
    slope_estimate,
)
from .pipeline import (
    BoundCertificate,
    GammaWord,
    VerifyResult,
    certify,
    decompose,
    enumerate_words,
    normalized_bound,
    sweep,
    verify_certificate,
)
from .trackmap import (
    Edge,
    LiftedGraphMap,
    SupportPolytope,
    build_transition_matrix,
    mode_gap_constant,
    omega_of_word,
    oracle_iterate,
    support_of_power,
)

__version__ = "0.1.0"
