"""reebkit: combinatorial Reeb graphs, their elementary moves, canonical
forms, and realization planning."""

from .graph import (
    Edge,
    ReebGraph,
    SubgraphView,
    VertexClass,
    betti,
    canonical_graph,
    classify,
    counting_identities,
    degree_profile,
    initial_graph,
    is_below,
    is_branching,
    is_canonical_form,
    is_good_orientation,
    is_initial_form,
    is_primitive,
    iso_oriented,
    ordered_implies_tree_check,
    path_set_DP,
    path_set_DP_from,
    path_set_IP,
    path_set_IP_from,
    smooth,
    synthesize_levels,
)
from .planner import Plan, check_plan, realize, verify_plan

__version__ = "0.1.0"
