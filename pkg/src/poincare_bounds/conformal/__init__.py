from .composite import CompositeMap, InverseMap, composite_derivative_abs, inverse_disk_map, regular_forward
from .sc import (
    PrevertexSolution,
    detect_symmetry,
    sc_evaluate,
    side_integrals,
    side_length_residual,
    solve_parameter_problem,
)
from .singularity import (
    SingularityExponent,
    assumption_b,
    koch_matching,
    singularity_exponents,
    transplanted_singularity_table,
)
