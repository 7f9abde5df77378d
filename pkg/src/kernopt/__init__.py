"""kernopt: stochastic global optimization from composable Markov kernels.

Search operators are kernels (sampleable state transformers with an
optional exact transition mass on finite spaces); classic algorithms
are assembled from four combinators; a convergence lab checks elitism,
absorption, and the geometric hitting bound both empirically and, on
enumerable spaces, exactly.
"""

from .algorithms import (
    ALGORITHM_IDS,
    RunResult,
    SGoalConfig,
    build_kernel,
    de_kernel,
    differential_mutant,
    gga_kernel,
    hc_kernel,
    phc_kernel,
    pick_distinct_parents,
    pick_parents_kernel,
    replacement_keep_best,
    run_sgoal,
    ssga_kernel,
    uniform_population,
    vr_kernel,
)
from .convergence import (
    AbsorptionReport,
    BoundVerdict,
    ConvergenceReport,
    DeltaEstimate,
    ElitismReport,
    ExactBoundReport,
    GoodnessOfFit,
    PartialSums,
    SuccessCurve,
    check_absorption,
    check_bounded_from_zero,
    check_elitist,
    check_lemma1_bound,
    complete_convergence_diagnostic,
    convergence_report,
    estimate_delta,
    estimate_success_curve,
    geometric_bound,
    kernel_goodness_of_fit,
    success_curve_from_gaps,
    total_variation,
    verify_bound_exact,
    wilson_interval,
)
from .errors import (
    DegenerateProblem,
    EnumerationTooLarge,
    GapUnavailable,
    OracleUnavailable,
    UnknownProblem,
)
from .kernels import (
    Kernel,
    MarkovChainTrace,
    TransitionMatrix,
    compose,
    deterministic,
    exact_matrix,
    identity,
    iterate_chain,
    join,
    mix,
    pipeline,
)
from .problems import builtin_problems, make_problem
from .spaces import (
    EpsClass,
    Individual,
    OptimizationProblem,
    Population,
    SearchSpace,
    best_index,
    best_value,
    classify_eps,
    enumerate_states,
    optimality_gap,
)
from .streams import RandomStream
from .structural import (
    best_two_of_four_kernel,
    bubble_pass_kernel,
    full_sort_kernel,
    permutation_kernel,
    projection_kernel,
    random_scan_permutation,
    select_kernel,
    sort_two_kernel,
    swap_kernel,
    sweep_kernel,
)
from .variation import (
    VariationOperator,
    bit_flip_kernel,
    default_crossover_kernel,
    default_mutation_kernel,
    gaussian_step_kernel,
    pairwise,
    single_bit_flip_kernel,
    single_point_crossover_kernel,
    uniform_crossover_kernel,
)

__version__ = "0.1.0"
