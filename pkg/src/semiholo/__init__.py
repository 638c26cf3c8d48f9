"""Semi-holographic hyperdimensional algebra with a cycle-level CoPU model."""

from .algebra import (
    AlgebraError,
    BaseItem,
    Chain,
    OverflowPolicy,
    ParamsMismatchError,
    RankOverflowError,
    RankOverflowWarning,
    SystemParams,
    UndefinedOperandError,
    as_chain,
    bind,
    compress_chain,
    inverse,
    invert_chain,
    make_rng,
    new_params,
    pad_chain,
    random_item,
    superpose,
    zero_item,
)
from .capacity import (
    capacity_bound,
    capacity_report,
    derived_items,
    max_capacity,
    mc_ambiguity,
    sparse_capacity,
)
from .memory import (
    Codebook,
    DenoiseMethod,
    QueryResult,
    chain_dist,
    circ_dist,
    cleanup_query,
    denoise_avg,
    denoise_item,
    item_dist,
    unbind_query,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraError",
    "BaseItem",
    "Chain",
    "Codebook",
    "DenoiseMethod",
    "OverflowPolicy",
    "ParamsMismatchError",
    "QueryResult",
    "RankOverflowError",
    "RankOverflowWarning",
    "SystemParams",
    "UndefinedOperandError",
    "as_chain",
    "bind",
    "capacity_bound",
    "capacity_report",
    "chain_dist",
    "circ_dist",
    "cleanup_query",
    "compress_chain",
    "denoise_avg",
    "denoise_item",
    "derived_items",
    "inverse",
    "invert_chain",
    "item_dist",
    "make_rng",
    "max_capacity",
    "mc_ambiguity",
    "new_params",
    "pad_chain",
    "random_item",
    "sparse_capacity",
    "superpose",
    "unbind_query",
    "zero_item",
]
