"""Evaluation and search of multivariate crossover designs."""

from .covmodels import (CASES, ExplicitCovariance, Kernel, KernelFamily, MarkovScenario, ProportionalScenario,
                        build_kernel_matrix, build_markov_sigma, build_proportional_sigma, case_scenario,
                        load_scenario, omega_matrices, scenario_from_dict, vstar)
from .designs import (Design, DesignClassFlags, carryover_matrix, classify, fixture_designs, format_design,
                      gene_design, load_design, make_balanced_uniform, make_oa, make_uniform, parse_design,
                      save_design, shift_matrix, treatment_matrix, verify_oa_type1_strength2)
from .efficiency import (SweepResult, attains_bound, bound_gap, efficiency_proportional, rd_terms,
                         relative_difference, sweep, trace_components, univariate_upper_bound, upper_bound_u)
from .errors import (CapacityError, ClassViolationError, CrossoverError, InvalidInputError,
                     NotPositiveDefiniteError, NumericalError, UnsupportedError)
from .infomat import (InfoMatrix, astar_brute, astar_markov_closed, astar_markov_noperiod_closed,
                      astar_proportional_closed, batch_traces, info_markov, info_markov_noperiod,
                      info_markov_oa_closed, info_proportional, info_univariate, info_univariate_oa_closed,
                      precision_blocks)
from .matlib import Tolerance
from .search import SearchReport, enumerate_binary, rank_by_trace, sample_binary

__all__ = [
    'CASES', 'ExplicitCovariance', 'Kernel', 'KernelFamily', 'MarkovScenario', 'ProportionalScenario',
    'build_kernel_matrix', 'build_markov_sigma', 'build_proportional_sigma', 'case_scenario',
    'load_scenario', 'omega_matrices', 'scenario_from_dict', 'vstar',
    'Design', 'DesignClassFlags', 'carryover_matrix', 'classify', 'fixture_designs', 'format_design',
    'gene_design', 'load_design', 'make_balanced_uniform', 'make_oa', 'make_uniform', 'parse_design',
    'save_design', 'shift_matrix', 'treatment_matrix', 'verify_oa_type1_strength2',
    'SweepResult', 'attains_bound', 'bound_gap', 'efficiency_proportional', 'rd_terms',
    'relative_difference', 'sweep', 'trace_components', 'univariate_upper_bound', 'upper_bound_u',
    'CapacityError', 'ClassViolationError', 'CrossoverError', 'InvalidInputError',
    'NotPositiveDefiniteError', 'NumericalError', 'UnsupportedError',
    'InfoMatrix', 'astar_brute', 'astar_markov_closed', 'astar_markov_noperiod_closed',
    'astar_proportional_closed', 'batch_traces', 'info_markov', 'info_markov_noperiod',
    'info_markov_oa_closed', 'info_proportional', 'info_univariate', 'info_univariate_oa_closed',
    'precision_blocks',
    'Tolerance',
    'SearchReport', 'enumerate_binary', 'rank_by_trace', 'sample_binary',
]
