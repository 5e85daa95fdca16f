"""percolab: Monte Carlo laboratory plus exact oracles for near-critical
Bernoulli bond percolation on nonamenable transitive graphs."""

from .bridges import (BridgeDecomposition, ConnectivityError, FiniteSubgraph,
                      MembershipError, br_statistic, decompose)
from .engine import (ClusterSample, ExplorationBudget, SampleSummary, Status,
                     explore_cluster, sample_batch)
from .enumeration import (PolynomialInP, SizeError, configuration_table,
                          d_term, enumerate_truncated_expectation,
                          functional_one, functional_volume,
                          functional_volume_sq, genfn_exact,
                          make_radius_indicator, tree_root_cluster_pmf, u_term)
from .estimators import (BudgetError, CollapseReport, ConfigurationError,
                         DataError, ExponentFit, GenFunctionEstimate,
                         MomentEstimate, RangeError, SkinnyEstimate, TailCurve,
                         WindowError, exponent_fit_gamma_delta,
                         gen_function_estimate, scaling_collapse,
                         skinny_probability, tail_curve, truncated_moments,
                         wilson_interval, zeta_fit)
from .diagnostics import (BallOperator, IterationError, NormEstimate,
                          TriangleReport, ball_operator, ball_operator_norm,
                          triangle_diagram, two_point)
from .graphs import (AddressError, AdjacencyError, Finite, HypercubicLattice,
                     RegularTree, TreeTimesCycle, canonical_edge,
                     load_edge_list, parse_model)
from .oracles import DomainError, TreeOracle
from .rng import stream, subseed

__version__ = "0.1.0"
