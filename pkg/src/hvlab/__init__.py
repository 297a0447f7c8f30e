"""hvlab: a numerical laboratory for hidden-variable models of entangled states.

Layers:
  linalg     dense complex matrices, partial trace/transpose, eigensolver
  states     pure states, Schmidt data, Born probabilities, partner projections
  influence  influence-free operators, their induced maps, reconstruction,
             and verifiers for purity / proportionality / HS conformality
  hvmodels   hidden-variable models and the locality/contextuality checkers
  leggett    the Leggett family, positivity bounds, inequality vs quantum value
  nogo       convex-decomposition feasibility search and the constancy chain
  cli        reproducible command-line front end
"""

from .influence import (
    PhiMap,
    as_lambda_operator,
    ic_projectors,
    min_product_projection_value,
    phi_from_lambda,
    phi_from_pure_state,
    proportionality_profile,
    reconstruct_lambda,
    verify_lemma1,
    verify_lemma3,
)
from .hvmodels import (
    ConditionReport,
    HVModel,
    MeasurementContext,
    check_cpi,
    check_joint_noncontextuality,
    check_marginal_noncontextuality,
    check_oi,
    check_pi,
    check_reproduction,
    check_triviality,
    trivial_quantum_model,
)
from .leggett import (
    DirectionTriple,
    LeggettLambda,
    c_bounds,
    fibonacci_sphere,
    leggett_bound,
    leggett_joint,
    max_lhs_lp,
    quantum_lhs,
    violation_region,
)
from .linalg import (
    as_hermitian,
    as_projector,
    eig_hermitian,
    hs_inner,
    kron,
    partial_trace,
    partial_transpose,
)
from .nogo import (
    DecompositionProblem,
    FeasibilityCertificate,
    basis_image_conditioning,
    max_perturbation,
    perturbation_ladder,
    verify_constancy_chain,
)
from .states import (
    PureState,
    SchmidtData,
    as_density,
    born_joint,
    max_entangled,
    partner_projection,
    random_rank1_projector,
    schmidt_decompose,
    singlet,
)

__version__ = "0.1.0"
