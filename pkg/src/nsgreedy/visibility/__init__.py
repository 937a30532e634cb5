"""Top-K feed visibility under piecewise-constant Poisson traffic."""

from ..incgamma import gamma_antiderivative, regularized_gamma_q
from .analytic import (adaptive_simpson, expected_top_k, integrated_top_k,
                       position_probabilities, position_probability)
from .baselines import METHODS, select_baseline
from .intensity import IntensityProfile, PiecewiseRate, cumulative_intensity, sum_rates
from .scenario import (BroadcastScenario, VisibilityReport, analytic_report, constant_scenario,
                       edge_set_hash, random_scenario, toy_scenario, visibility_edge,
                       visibility_objective, visibility_per_edge)
from .simulate import (EventLog, FeedEvents, empirical_visibility, estimate_visibility,
                       realization_visibility, simulate, simulate_realization)
from .theory import (ScenarioConstants, curvature_bound_strong, curvature_bound_weak,
                     xi_zeta_rho_estimates)

__all__ = [
    "BroadcastScenario", "EventLog", "FeedEvents", "IntensityProfile", "METHODS",
    "PiecewiseRate", "ScenarioConstants", "VisibilityReport", "adaptive_simpson",
    "analytic_report", "constant_scenario", "cumulative_intensity", "curvature_bound_strong",
    "curvature_bound_weak", "edge_set_hash", "empirical_visibility", "estimate_visibility",
    "expected_top_k", "gamma_antiderivative", "integrated_top_k", "position_probabilities",
    "position_probability", "random_scenario", "realization_visibility", "regularized_gamma_q",
    "select_baseline", "simulate", "simulate_realization", "sum_rates", "toy_scenario", "visibility_edge",
    "visibility_objective", "visibility_per_edge", "xi_zeta_rho_estimates",
]
