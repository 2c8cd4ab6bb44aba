"""Complete reducibility and displacement geometry for matrix representations
over local fields (real, p-adic rational, and F_p(T) models)."""

from .fields import Field, FpPoly, FpRat, INFINITY, valuation
from .linalg import Matrix, rref, smith_padic, solve_linear
from .reptheory import (
    INCONCLUSIVE,
    InvariantFlag,
    Representation,
    Semisimplification,
    are_conjugate_ss,
    composition_series,
    has_invariant_complement,
    is_cr,
    is_nonparabolic,
    probe_seed,
    semisimplify,
    spin,
    trace_fingerprint,
)
from .parabolic import (
    BlockStructure,
    FundamentalSequence,
    build_neighbors,
    contract_limit,
    contract_unipotent,
    levi_decompose,
    levi_project,
)
from .symspace import (
    ATTAINED,
    DIVERGED,
    MAXITER,
    DisplacementReport,
    SPDPoint,
    check_symmetry_at_min,
    displacement,
    dist,
    grad_objective,
    minimize_displacement,
)
from .tree import (
    ProductPoint,
    TreeVertex,
    neighbors,
    product_counterexample,
    translation_length,
    tree_dist,
    vertex_displacement,
)
from .quotient import (
    CrClass,
    lambda_class_invariant,
    project,
    same_point_in_Xcr,
    separation_experiment,
)

__all__ = [
    "Field", "FpPoly", "FpRat", "INFINITY", "valuation",
    "Matrix", "rref", "smith_padic", "solve_linear",
    "INCONCLUSIVE", "InvariantFlag", "Representation", "Semisimplification",
    "are_conjugate_ss", "composition_series", "has_invariant_complement",
    "is_cr", "is_nonparabolic", "probe_seed", "semisimplify", "spin",
    "trace_fingerprint",
    "BlockStructure", "FundamentalSequence", "build_neighbors",
    "contract_limit", "contract_unipotent", "levi_decompose", "levi_project",
    "ATTAINED", "DIVERGED", "MAXITER", "DisplacementReport", "SPDPoint",
    "check_symmetry_at_min", "displacement", "dist", "grad_objective",
    "minimize_displacement",
    "ProductPoint", "TreeVertex", "neighbors", "product_counterexample",
    "translation_length", "tree_dist", "vertex_displacement",
    "CrClass", "lambda_class_invariant", "project", "same_point_in_Xcr",
    "separation_experiment",
]

__version__ = "0.1.0"
