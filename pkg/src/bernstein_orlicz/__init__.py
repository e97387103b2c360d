"""Bernstein-Orlicz norms, chaining along trees and empirical-process deviation bounds."""

__version__ = "0.1.0"

from .orlicz import (NormNotFiniteError, OrliczParams, TailBound, TailStatement, expected_psi,
                     norm_from_tail, orlicz_norm_empirical, orlicz_norm_quadrature, psi_eval,
                     psi_inverse, tail_from_norm)
from .bernstein import (BernsteinProfile, bernstein_orlicz_norm, bernstein_tail, check_bernstein,
                        fit_bernstein)
from .finite_max import (MaxBoundInput, max_deviation_norm, max_deviation_threshold,
                         max_expectation_bound)
from .tree import (ChainCertificate, FiniteTree, LabeledTree, gamma_bound, generic_constants,
                   generic_deviation_threshold, talagrand_expectation_bound, uniform_tree_deviation,
                   validate_tree)
from .bracketing import (FiniteClass, HalfLineClass, bracket_ladder, build_brackets, build_tree_chain,
                         entropy_profile, entropy_sum_bound, generalized_brackets)
from .ep_bounds import (EpBoundInput, constant_assembly, deviation_orlicz, deviation_threshold,
                        expectation_bound, massart_threshold, truncation_levels)
from .simulation import SimulationConfig, mc_tail_report, pathwise_chain_check, simulate_sup
