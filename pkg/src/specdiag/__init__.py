"""Inverse diagonal problems: feasibility predicates and explicit witnesses."""

__version__ = "0.1.0"

from .construct_compact import (
    CasePlan,
    CaseTag,
    case1_plan,
    case2_partition,
    case3_split,
    classify_case,
    plan_case,
    realize_truncation,
)
from .construct_finite import (
    UnitaryWitness,
    projection_from_diagonal,
    rank_one,
    schur_horn,
    solve_2x2,
    thompson_construct,
    unitary_from_diagonal,
)
from .dense import DenseMatrix
from .errors import *  # noqa: F401,F403
from .majorization import (
    KadisonReport,
    MajorizationReport,
    Order,
    fan_necessary,
    kadison_check,
    majorizes,
    strong_majorizes,
    thompson_majorizes,
    unitary_diagonal_check,
    weak_majorizes,
)
from .oracle import haar_orthogonal, haar_unitary, necessity_sweep, sample_orbit_diagonals
from .seqspec import ONES, ZERO, SequenceSpec, Tail, as_spec, delta_sequence, geometric, nonincreasing_rearrangement
from .verify import (
    Certificate,
    Theorem,
    Verdict,
    VerificationReport,
    certify_tight_strong,
    certify_tight_unitary,
    certify_trace_equality,
    check_2x2_lemmas,
    jacobi_svd,
    singular_values,
    verify_construction,
)
