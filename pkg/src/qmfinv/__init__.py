"""qmfinv: invariant sets of quadrature mirror filters and of g-functions.

Exact symbolic and rational machinery for subshifts, doubling-invariant subsets of the
unit interval, QMF transition functions built to leave a given set invariant, the
infinite product Phi_p, and a seeded simulator for the associated Markov chain.
"""
from .symbolic import SymbolSeq, parse_word, format_word, shift, star, rho
from .subshift import (
    SftSubshift,
    CylinderUnion,
    exit_set,
    barrier_set,
    rho_to_set,
    condition_thm_1_2,
    check_prop_2_2,
    example_3_1,
)
from .intervals import (
    IntervalSet,
    Points,
    Intervals,
    SftBacked,
    tau,
    exit_and_barrier,
    check_lemma_4_3,
    dist,
)
from .filters import (
    builtin,
    construct_prop_4_2,
    construct_thm_1,
    qmf_residual,
    invariance_check,
    cohen_check,
    ConstructionError,
)
from .spectral import phi_hat, sum_phi_hat, code_k, xi_t_of_k
from .sampler import simulate, absorption_estimate, lemma_4_4_check, coupling_report
from .gfun import lift, construct_thm_1_2, g_sum_residual, g_invariance_check, strict_g, general_subset_invariance

__version__ = "0.1.0"
