"""Worst-case controller synthesis for partially observable stochastic games.

Pipeline: parse or generate a game model, build its product with a
deterministic Rabin automaton, compose finite state controllers into a
Markov chain, analyze its recurrent structure, and search controller
structures maximizing the defender's worst-case probability of
satisfying the specification.
"""

__version__ = "0.1.0"

from .chain import (
    GlobalMarkovChain,
    RecurrenceAnalysis,
    absorption_probabilities,
    check_proposition1,
    compose_gmc,
    phi_feasible_sets,
    recurrent_classes,
    satisfaction_probability,
    sccs,
    strongly_connected_components,
)
from .dra import RabinAutomaton, builtin_paper_dra, dra_accepts_lasso, dra_to_doc, parse_dra
from .fsc import (
    FSC,
    FSCStructure,
    fsc_to_doc,
    fully_connected_structure,
    parse_fsc,
    softmax_policy,
    uniform_policy,
    validate_fsc,
)
from .ltl import Formula, LassoWord, eval_lasso, parse_ltl, pretty_print
from .posg import POSG, GridSpec, make_grid_posg, parse_posg, posg_to_doc, validate_posg
from .product import ProductPOSG, build_product, parse_product, product_to_doc, prune_unreachable
from .simulate import Episode, estimate_satisfaction, simulate_episode, wilson_interval
from .synthesis import (
    CandidateSet,
    algorithm1,
    algorithm2,
    default_seed_structures,
    enumerate_structures,
    generate_candidates,
    maxmin_select,
    optimize_parameters,
    single_action_structure,
)
