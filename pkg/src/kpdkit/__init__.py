"""Kronecker product decomposition of dense hypermatrices.

Exact rank-one testing, nearest Kronecker products by alternating
updates, greedy finite sums, and the axis permutation that reduces
matrix-form problems to vector form.
"""

__version__ = "0.1.0"

from kpdkit.errors import (  # noqa: E402
    AllRestartsFailed,
    DegenerateFactor,
    DomainError,
    KpdError,
    ParseError,
    ZeroStationaryPoint,
)
from kpdkit.matform import (  # noqa: E402
    MatFactorTerm,
    MatKpdProblem,
    expand_by_splits,
    mat_sum_kpd,
    mat_to_vec,
    pairing_permutation,
    split_2x2,
)
from kpdkit.mda import exact_decompose  # noqa: E402
from kpdkit.stp import apply_perm, kron, perm_map, stp, swap_map  # noqa: E402
from kpdkit.sumkpd import SumConfig, greedy_sum  # noqa: E402
from kpdkit.sva import FactorTerm, SvaConfig, nkp, nkp_multistart, rank_one_oracle  # noqa: E402
from kpdkit.tensor_core import Hypermatrix, linear_index, multi_index  # noqa: E402
