"""Learning symbolic safety transducers from membership and conjecture queries."""

from .core import (
    STAR,
    Alphabet,
    SafetyAutomaton,
    SymbolicTransducer,
    SymbolicWord,
    automaton_from_transducer,
    biword,
    constant_transducer,
    dump_json,
    load_json,
)
from .learner import LearnerConfig, LearnResult, RunStats, Status, s4
from .ltl import compile_formula, parse, semantic_check
from .oracle import AutomatonTeacher, IrregularTeacher, Teacher, bespoke_teacher
from .verify import bounded_containment, bounded_equivalence, brute_smq, is_isomorphic

__all__ = [
    "STAR",
    "Alphabet",
    "AutomatonTeacher",
    "IrregularTeacher",
    "LearnResult",
    "LearnerConfig",
    "RunStats",
    "SafetyAutomaton",
    "Status",
    "SymbolicTransducer",
    "SymbolicWord",
    "Teacher",
    "automaton_from_transducer",
    "bespoke_teacher",
    "biword",
    "bounded_containment",
    "bounded_equivalence",
    "brute_smq",
    "compile_formula",
    "constant_transducer",
    "dump_json",
    "is_isomorphic",
    "load_json",
    "parse",
    "s4",
    "semantic_check",
]
