"""Greedy maximization of monotone non-submodular set functions under matroids.

Brute-force certificates for the submodularity ratio and generalized
curvature sit next to the greedy solver, along with two application
objectives: top-K feed visibility and tree Gaussian graphical models.
"""

from .bounds import (asymptotic_regime, bound_curvature, bound_weak, lemma1_constants,
                     ratio_bound_rsc)
from .errors import DomainError, InstanceTooLarge, NonMonotoneError, NSGreedyError
from .greedy import GreedyStep, GreedyTrace, brute_force_opt, greedy_maximize, lemma1_violations
from .kernels import BACKEND
from .matroids import (AxiomReport, GraphicMatroid, IndependenceFamily, Matroid,
                       PartitionMatroid, UniformMatroid, matroid_from_dict, verify_axioms)
from .seeding import derive_seed
from .sets import (AlphaResult, GammaResult, GroundSet, RatioCertificate, SetFunction, certify,
                   check_monotone, ds_compose, eps_approx_counterexample,
                   generalized_curvature_bruteforce, is_submodular, marginal_gain,
                   submodularity_ratio_bruteforce)

__version__ = "0.1.0"

__all__ = [
    "AlphaResult", "AxiomReport", "BACKEND", "DomainError", "GammaResult", "GraphicMatroid",
    "GreedyStep", "GreedyTrace", "GroundSet", "IndependenceFamily", "InstanceTooLarge", "Matroid",
    "NSGreedyError", "NonMonotoneError", "PartitionMatroid", "RatioCertificate", "SetFunction",
    "UniformMatroid", "asymptotic_regime", "bound_curvature", "bound_weak", "brute_force_opt",
    "certify", "check_monotone", "derive_seed", "ds_compose", "eps_approx_counterexample",
    "generalized_curvature_bruteforce", "greedy_maximize", "is_submodular", "lemma1_constants",
    "lemma1_violations", "marginal_gain", "matroid_from_dict", "ratio_bound_rsc",
    "submodularity_ratio_bruteforce", "verify_axioms",
]
