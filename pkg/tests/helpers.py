"""Shared fixtures and random generators for the test suite."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from s4synth.core import Alphabet, SafetyAutomaton, SymbolicTransducer, SymbolicWord
from s4synth.ltl import And, Const, Glob, Lit, Next, Not, Or, Implies

RG_IN = Alphabet(("r", "!r"))
RG_OUT = Alphabet(("g", "!g"))

EXAMPLE1 = "G(r -> (g | X g))"
EXAMPLE2 = "G(r -> (g | X g)) & G(g -> X !g)"


def _three_state_shape(left: set, right: set) -> SymbolicTransducer:
    """Initial state with r,!r edges to ``L``, an extra !r edge to ``R``, and L <-> R."""
    delta = {
        ("i", "r"): {"L"},
        ("i", "!r"): {"L", "R"},
        ("L", "r"): {"R"},
        ("L", "!r"): {"R"},
        ("R", "r"): {"L"},
        ("R", "!r"): {"L"},
    }
    return SymbolicTransducer(RG_IN, RG_OUT, ("i", "L", "R"), "i", delta, {"L": left, "R": right})


def grant_s1() -> SymbolicTransducer:
    return _three_state_shape({"g", "!g"}, {"g"})


def alternating_s2() -> SymbolicTransducer:
    return _three_state_shape({"!g"}, {"g"})


def alternating_s3() -> SymbolicTransducer:
    return _three_state_shape({"g"}, {"!g"})


# -- random objects driven by random.Random ------------------------------------------

def random_automaton(rng: random.Random, max_states: int = 6, max_sigma: int = 4, max_gamma: int = 4) -> SafetyAutomaton:
    """Random complete automaton; state 0 is the sink and state 1 is initial."""
    n = rng.randint(2, max_states)
    inputs = Alphabet(tuple(f"a{i}" for i in range(rng.randint(1, max_sigma))))
    outputs = Alphabet(tuple(f"b{j}" for j in range(rng.randint(1, max_gamma))))
    width = len(inputs) * len(outputs)
    sink_bias = rng.choice([0.1, 0.25, 0.5])
    table = [[0] * width]
    for _ in range(1, n):
        table.append([0 if rng.random() < sink_bias else rng.randrange(1, n) for _ in range(width)])
    return SafetyAutomaton(inputs, outputs, table, 1, 0)


def random_symbolic_word(rng: random.Random, inputs: Alphabet, outputs: Alphabet, max_len: int = 5) -> SymbolicWord:
    pairs = []
    for _ in range(rng.randint(0, max_len - 1)):
        k = rng.randint(1, len(outputs))
        pairs.append((rng.choice(inputs.symbols), frozenset(rng.sample(outputs.symbols, k))))
    return SymbolicWord(tuple(pairs), rng.choice(inputs.symbols))


def random_concrete_transducer(
    rng: random.Random, max_states: int = 8, max_sigma: int = 3, max_gamma: int = 3
) -> SymbolicTransducer:
    """Deterministic single-output transducer with at most ``max_states`` states."""
    inputs = Alphabet(tuple(f"i{k}" for k in range(rng.randint(1, max_sigma))))
    outputs = Alphabet(tuple(f"o{k}" for k in range(rng.randint(1, max_gamma))))
    body = [f"q{k}" for k in range(1, rng.randint(2, max_states))]
    delta = {}
    for q in ["q0"] + body:
        for a in inputs:
            delta[(q, a)] = {rng.choice(body)}
    eta = {q: {rng.choice(outputs.symbols)} for q in body}
    return SymbolicTransducer(inputs, outputs, tuple(["q0"] + body), "q0", delta, eta)


def random_symbolic_transducer(
    rng: random.Random, max_states: int = 5, inputs: Alphabet | None = None, outputs: Alphabet | None = None
) -> SymbolicTransducer:
    """Nondeterministic transducer with set-valued outputs."""
    inputs = inputs or Alphabet(tuple(f"i{k}" for k in range(rng.randint(1, 3))))
    outputs = outputs or Alphabet(tuple(f"o{k}" for k in range(rng.randint(1, 3))))
    body = [f"q{k}" for k in range(1, rng.randint(2, max_states))]
    delta = {}
    for q in ["q0"] + body:
        for a in inputs:
            delta[(q, a)] = set(rng.sample(body, rng.randint(1, len(body))))
    eta = {q: set(rng.sample(outputs.symbols, rng.randint(1, len(outputs)))) for q in body}
    return SymbolicTransducer(inputs, outputs, tuple(["q0"] + body), "q0", delta, eta)


def random_formula(rng: random.Random, aps: list[str], budget: int):
    """Random safety formula with at most ``budget`` syntax-tree nodes."""
    if budget <= 1:
        if rng.random() < 0.08:
            return Const(rng.random() < 0.5)
        return Lit(rng.choice(aps), rng.random() < 0.5)
    kinds = ["lit", "next", "next", "glob"]
    if budget >= 3:
        kinds += ["and", "or", "implies"]
    kind = rng.choice(kinds)
    if kind == "lit":
        return Lit(rng.choice(aps), rng.random() < 0.5)
    if kind in ("next", "glob"):
        inner = random_formula(rng, aps, budget - 1)
        return Next(inner) if kind == "next" else Glob(inner)
    left_budget = rng.randint(1, budget - 2)
    left = random_formula(rng, aps, left_budget)
    right = random_formula(rng, aps, budget - 1 - left_budget)
    if kind == "and":
        return And((left, right))
    if kind == "or":
        return Or((left, right))
    # keep implications inside the safety fragment: no G on the negated side
    if _has_glob(left):
        return Or((left, right))
    return Implies(left, right)


def _has_glob(f) -> bool:
    if isinstance(f, Glob):
        return True
    if isinstance(f, (And, Or)):
        return any(_has_glob(a) for a in f.args)
    if isinstance(f, Implies):
        return _has_glob(f.left) or _has_glob(f.right)
    if isinstance(f, (Next, Not)):
        return _has_glob(f.arg)
    return False


# -- hypothesis strategies -------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def automata(draw, max_states: int = 5, max_sigma: int = 3, max_gamma: int = 3) -> SafetyAutomaton:
    return random_automaton(random.Random(draw(seeds)), max_states, max_sigma, max_gamma)


@st.composite
def concrete_transducers(draw, max_states: int = 6) -> SymbolicTransducer:
    return random_concrete_transducer(random.Random(draw(seeds)), max_states)


@st.composite
def symbolic_transducers(draw, max_states: int = 5) -> SymbolicTransducer:
    return random_symbolic_transducer(random.Random(draw(seeds)), max_states)
