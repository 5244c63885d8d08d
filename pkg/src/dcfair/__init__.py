"""Partially fair linear classifiers via difference-of-convex constrained optimization."""
from .data import (CsvSchema, DataError, Dataset, GroupPartition, SplitSpec, load_csv, load_libsvm,
                   partition_by_group, split, split_indices, write_libsvm)
from .dc import (ConvexFn, DCFn, SurrogateKind, hinge_surrogate, linearize_minus, max_constraint,
                 mu_shift, sigmoid_surrogate)
from .metrics import (FairnessReport, ScoredGroupSample, accuracy, dp_metric, empirical_ccdf,
                      fairness_report, pdp_metric, select_interval, wdp_metric, wpdp_metric)
from .problems import (DCProblem, Interval, PGrid, auc_objective, baseline_constraints, build_problem,
                       erm_objective, feasible_start, pauc_objective, pdp_constraints,
                       regularized_objective, wpdp_constraints)
from .scoring import (DecisionVector, FeasibleDomain, Layout, LinearCrossModel, featurize, pack,
                      project, score, unpack)
from .solvers import (IDCASchedule, NoFeasibleIterateError, SolveTrace, SSGConfig, idca, ssg,
                      ssg_direct, subgradient_descent, theoretical_schedule)

__version__ = "0.1.0"
