"""Double moment graphs, structure sheaves and the W-invariant cohomology of G/Q x G/P."""

from .demazure import (
    Cofunction,
    TwistedElement,
    act_on_s,
    borel_pair,
    bullet,
    char_map,
    correspondence_product,
    hom_membership,
    identity_tuple,
    odot,
    point_class,
    push_pull,
    twisted_mul,
)
from .errors import (
    GroupTooLarge,
    IndexMismatch,
    InvalidRank,
    MathDomainError,
    NotParabolicInvariant,
    TruncationExceeded,
    UnclassifiedType,
    UnsupportedLaw,
    VertexModuleViolation,
    WrongType,
)
from .fga import (
    CustomLaw,
    QElement,
    SElement,
    additive_context,
    make_context,
    multiplicative_context,
    parse_selement,
    truncated_context,
)
from .moment_graph import (
    MomentGraph,
    build_double_graph,
    build_parabolic_graph,
    check_mge,
    invariant_description,
    is_closed_brute,
    is_closed_classified,
    is_closed_orbit,
    is_closed_via_closure,
    wq_closure,
)
from .root_system import RootSystem, SimpleSubset, build_root_system, dominant_weight
from .sections import (
    GradedBasis,
    SectionTuple,
    Sheaf,
    gamma_basis_graded,
    graded_basis,
    is_section,
    membership_qap,
    membership_rwq_wp,
    project_hat,
    psi,
    section_tuple,
    structure_sheaf_double,
    structure_sheaf_parabolic,
)
from .weyl import WeylElement, WeylGroup, bruhat_leq, double_coset_reps, min_coset_reps, weyl_group

__version__ = "0.1.0"
