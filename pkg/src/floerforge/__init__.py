"""floerforge: exact knot-complex computations over F2[U].

Core layers:

- ``fualgebra``   exact homological algebra for free graded F2[U]-complexes
- ``cfk``         knot complexes: builders, sums, mirrors, hat invariants
- ``surgery``     the integer-surgery mapping cone and its graded output
- ``whitehead``   Whitehead doubles at the complex level, clasp steps
- ``endfloer``    directed systems, end invariants, distinguishability
- ``cli``         command-line front end and verification suite
"""

from .cfk import (
    Ambient,
    HfkTable,
    KnotComplex,
    ReducedBasisForm,
    box,
    builtin,
    connected_sum_knots,
    figure8,
    filtration_homology,
    hfk_hat,
    j_in_y,
    jprime_in_yprime,
    knot_numerics,
    mirror_knot,
    reduce_canonical,
    reduced_basis_form,
    staircase_torus,
    unknot,
    validate_knot,
)
from .endfloer import (
    CH_MINUS,
    CH_PLUS,
    CH_STAR,
    CassonHandle,
    ClosedManifoldData,
    DistinguishVerdict,
    EndFloerReport,
    ExhaustionSpec,
    INFINITE,
    Level,
    RankEntry,
    SliceR4Spec,
    colimit,
    distinguish,
    grading_shift,
    he_end_sum,
    he_product_end,
    he_slice_r4,
    normalize_level,
    restrict_spec,
    s1xs2_data,
    s3_data,
)
from .fualgebra import (
    FUDecomposition,
    FreeComplex,
    Grading,
    InvalidComplex,
    ValidationReport,
    format_grading,
    grading,
    homology_decomposition,
    plus_presentation,
    tensor_complexes,
    validate_complex,
)
from .surgery import (
    HFPlusResult,
    MappingCone,
    MissingFlip,
    OneHandleMap,
    TriangleForce,
    build_cone,
    connected_sum_floer,
    exact_triangle_force,
    extract_invariants,
    one_handle_stabilize,
    surgery_hf,
)
from .whitehead import (
    FormalRankError,
    StepDescriptor,
    box_parameters,
    clasp_step,
    hedden_hfk_double,
    is_box_sum,
    negative_double_cfk,
    whitehead_double_cfk,
)

__version__ = "0.1.0"
