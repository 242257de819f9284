"""Grammar view of grounded systems: parse trees, wedges, Parikh images."""

from .grammar import (
    BudgetExceeded,
    Grammar,
    Hole,
    ParseTree,
    Production,
    UnknownSymbol,
    count_trees,
    enumerate_trees,
    eval_via_trees,
    eval_via_trees_upto,
    grammar_from_system,
    is_valid_tree,
    nonterminals_of,
    parikh,
    product_yield,
    tree_parikh,
    word_of,
    yield_of,
)
from .semilinear import (
    CapExceeded,
    LinearSet,
    Rewrite,
    SemilinearSet,
    absorption_check,
    bounded_points,
    build_semilinear,
    find_equal_sum_subsets,
    reduce_support,
    z_of,
)
from .wedges import (
    InvalidPair,
    NonterminalAbsent,
    Wedge,
    augment,
    collapse_to_core,
    find_good_pair,
    is_good_pair,
    rebuild,
    remove_wedge,
)

__all__ = [name for name in dir() if not name.startswith("_")]
