"""Approximate (thrifty) market equilibria with a built-in LP solver."""
from .arrow_debreu import solve_ad_fixed_agents, solve_ad_fixed_items
from .estimators import (ExchangeEquilibrium, FisherEquilibrium,
                         MatchingEquilibrium)
from .fisher import residual_program, solve_fixed_agents, solve_fixed_items
from .io import (parse_candidate, parse_instance, serialize_candidate,
                 serialize_instance)
from .lp import LinearProgram, solve_lp
from .matching import (solve_hz_thrifty_fixed_agents,
                       solve_matching_fixed_agents,
                       solve_matching_fixed_items)
from .model import (AdMarket, CplcUtility, EquilibriumCandidate,
                    FisherMarket, MatchingMarket, PlcUtility, best_value,
                    eval_utility, plc_to_cplc)
from .verify import (VerificationReport, oracle_grid_search, verify_ad,
                     verify_fisher, verify_matching)

__version__ = "0.1.0"

__all__ = [
    "AdMarket", "CplcUtility", "EquilibriumCandidate", "ExchangeEquilibrium",
    "FisherEquilibrium", "FisherMarket", "LinearProgram",
    "MatchingEquilibrium", "MatchingMarket", "PlcUtility",
    "VerificationReport", "best_value", "eval_utility",
    "oracle_grid_search", "parse_candidate",
    "parse_instance", "plc_to_cplc", "residual_program", "serialize_candidate",
    "serialize_instance", "solve_ad_fixed_agents", "solve_ad_fixed_items",
    "solve_fixed_agents", "solve_fixed_items",
    "solve_hz_thrifty_fixed_agents", "solve_lp",
    "solve_matching_fixed_agents", "solve_matching_fixed_items",
    "verify_ad", "verify_fisher", "verify_matching",
]
