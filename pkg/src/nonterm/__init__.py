"""Disproving termination of sole combinatory calculi with tree automata and SAT."""

__version__ = "0.1.0"

from .automata import (  # noqa: E402
    TreeAutomaton, VerificationReport, accepts, minld, parse_automaton, run,
    serialize_automaton, smallest_accepted_term, verify_tda, verify_tdas,
)
from .combinators import RULES, get_rule  # noqa: E402
from .encoding import decode_automaton, encode_tda_baseline, encode_tdas  # noqa: E402
from .inclusion import language_inclusion, tda_to_tdas  # noqa: E402
from .search import SearchOptions, SearchOutcome, disprove, run_corpus, validate_counterexample  # noqa: E402
from .solvers import solve_builtin, solve_external  # noqa: E402
from .terms import App, Leaf, Var, parse_rule, parse_term, show  # noqa: E402
