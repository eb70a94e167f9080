"""Design-based estimation toolkit for bipartite incidence graph sampling."""

from .design import IidDraws, Srswor, design_from_json
from .errors import EnumerationCapError, UnreachableMotifSetError, ValidationError
from .estimators import (EstimateReport, EstimatorSpec, condition_two_residual,
                         evaluate, hh_per_draw_estimates, hh_point_estimate,
                         hh_variance_estimator, ht_point_estimate,
                         ht_variance_estimator, iwe_point_estimate,
                         iwe_true_variance, make_point_estimator,
                         parse_estimator, parse_estimator_list,
                         priority_point_estimate, priority_variance_estimator,
                         scheme_for, z_values)
from .exact import (ExactMoments, exact_moments, priority_support_check,
                    rao_blackwell_moments, rao_blackwellize)
from .graph import (BipartiteIncidenceGraph, SampleBIG, build_graph,
                    graph_from_json, graph_to_json, observe, observe_draws)
from .scenarios import (Scenario, acs_thompson, becker_lis, example1,
                        get_scenario, sample_from_spec, scenario_names,
                        scenario_to_json, synthetic_bigraph)
from .simulate import (EfficiencyRow, SimulationConfig, rows_to_csv,
                       run_simulation)
from .weights import (CustomWeights, HtShare, Multiplicity, Pida, PriorityRule,
                      constant_weights, ht_share_weights, joint_priority_prob,
                      priority_indicator, priority_prob, resolve_ordering)

__version__ = "0.1.0"
