"""Attack demonstrations and cost estimators at desk scale."""

from .costmodel import best_reduction_interval, reduction_schedule_cost
from .ekera import EkeraInstance, Sampler, ekera_postprocess, ekera_simulate, run_trials
from .fixed_base import (
    FixedBaseOutcome,
    bsgs_dlog,
    expected_exponent_bits,
    find_generator,
    fixed_base_attack_demo,
    table_memory_report,
)
from .gcd import PolyModP, gcd_attack_success_rate, gcd_attack_swap_neighbors, signs_of, swap_neighbors_chain
from .lattice import babai_cvp, is_lll_reduced, lll_reduce

__all__ = [
    "EkeraInstance",
    "FixedBaseOutcome",
    "PolyModP",
    "Sampler",
    "babai_cvp",
    "best_reduction_interval",
    "bsgs_dlog",
    "ekera_postprocess",
    "ekera_simulate",
    "expected_exponent_bits",
    "find_generator",
    "fixed_base_attack_demo",
    "gcd_attack_success_rate",
    "gcd_attack_swap_neighbors",
    "is_lll_reduced",
    "lll_reduce",
    "reduction_schedule_cost",
    "run_trials",
    "signs_of",
    "swap_neighbors_chain",
    "table_memory_report",
]
