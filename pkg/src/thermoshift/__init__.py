"""Thermodynamic formalism on mixing subshifts of finite type.

Shift spaces, locally constant potentials, pressure and equilibrium states,
conditional Gibbs measures on unstable fibers, and the fiber-measure
transform that turns the Gibbs measure of one potential into the equilibrium
state of another. Every quantity has a fast transfer-contraction path and a
brute-force enumeration oracle (see thermoshift.enumeration).
"""

from .errors import (ConfigError, ConvergenceError, ExactArithmeticError,
                     InadmissibleWordError, NonPrimitiveError, PotentialTableError,
                     ThermoshiftError, WordLengthError)
from .shiftspace import (BlockRecoding, FiberConstraint, PastWord, ShiftSpace,
                         TwoSidedCylinder, TwoSidedPoint, Word, as_word, bracket,
                         build_shift, cylinder, full_shift, golden_mean_shift,
                         higher_block_recode, past_word, shifted_cylinder_constraints)
from .potentials import (LocallyConstantPotential, VariationProfile,
                         bernoulli_potential, birkhoff_sum, birkhoff_weight,
                         constant_potential, constant_weight_potential, from_table,
                         from_weights, random_potential, shift_reduce,
                         variation_profile, widen, zero_potential)
from .linalg import (ExactPerronData, PerronData, perron, perron_exact,
                     primitivity_exponent)
from .equilibrium import (BowenSeries, EquilibriumMarkovState, GibbsRatioReport,
                          UnstableFiberMeasure, bowen_series,
                          conditional_unstable_measure, cylinder_measure, entropy,
                          equilibrium_state, gibbs_ratio_report, markov_entropy,
                          pressure_bowen, pressure_spectral, stationary_distribution,
                          variational_score)
from .transform import (ConvergenceReport, GrowthSeries, PartitionSums,
                        TransformJob, convergence_report, endpoint_eval,
                        growth_series, lambda_n_eval, mu_n_eval, partition_sum,
                        pushforward_eval, transform_job)

__version__ = "0.1.0"
