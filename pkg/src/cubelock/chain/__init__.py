"""Delay chaining with keyed permutations."""

from .core import (
    BENCH_COLUMNS,
    BenchResult,
    ChainSpec,
    StageSpec,
    chain_apply,
    chain_bench,
    chain_invert,
    chain_invert_traced,
    dump_chain,
    load_chain,
    parse_stage_list,
    pick_fpe_kind,
)
from .perms import KINDS, SHUFFLES, Permutation, PermSpec, build, perm_forward, perm_inverse

__all__ = [
    "KINDS",
    "SHUFFLES",
    "BENCH_COLUMNS",
    "BenchResult",
    "ChainSpec",
    "PermSpec",
    "Permutation",
    "StageSpec",
    "build",
    "chain_apply",
    "chain_bench",
    "chain_invert",
    "chain_invert_traced",
    "dump_chain",
    "load_chain",
    "parse_stage_list",
    "perm_forward",
    "perm_inverse",
    "pick_fpe_kind",
]
