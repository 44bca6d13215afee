"""Registry of the ten combinators whose termination was open."""

from .terms import CombinatorRule, parse_rule

RULES = {
    "P": "P x y z -> z (x y z)",
    "P3": "P3 x y z -> y (x z y)",
    "D1": "D1 x y z w -> x z (y w) (x z)",
    "D2": "D2 x y z w -> x w (y z) (x w)",
    "Phi": "Phi x y z w -> x (y w) (z w)",
    "Phi2": "Phi2 x y z w1 w2 -> x (y w1 w2) (z w1 w2)",
    "S1": "S1 x y z w -> x y w (z w)",
    "S2": "S2 x y z w -> x z w (y z w)",
    "S3": "S3 x y z w v -> x y (z v) (w v)",
    "S4": "S4 x y z w v -> z (x w v) (y w v)",
}

# Phi2 needs roughly 11 hours of solver time; keep it out of default runs.
SLOW = frozenset({"Phi2"})

DEFAULT_CORPUS = tuple(RULES)


def get_rule(name_or_text: str) -> CombinatorRule:
    """Look up a registered combinator by name, or parse a full rule."""
    key = name_or_text.strip()
    if key in RULES:
        return parse_rule(RULES[key])
    return parse_rule(key)
