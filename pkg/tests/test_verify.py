import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import EXAMPLE1, EXAMPLE2, automata, grant_s1, alternating_s2, alternating_s3, random_symbolic_transducer
from s4synth.core import SymbolicWord, constant_transducer
from s4synth.learner import s4
from s4synth.ltl import compile_formula
from s4synth.oracle import AutomatonTeacher
from s4synth.verify import (
    BudgetExceeded,
    bounded_containment,
    bounded_equivalence,
    brute_smq,
    equivalence_depth,
    incompat_witness,
    is_isomorphic,
    saturating_depth,
)

BOTH = frozenset({"g", "!g"})


def compiled(formula):
    return compile_formula(formula, ["r"], ["g"])


def test_brute_smq_examples():
    d = compiled(EXAMPLE1)
    assert brute_smq(d, SymbolicWord((("r", BOTH),), "r")) == {"g"}
    assert brute_smq(compiled("true"), SymbolicWord((), "!r")) == BOTH
    assert brute_smq(compiled(EXAMPLE2), SymbolicWord((("r", BOTH),), "r")) == frozenset()


def test_brute_smq_budget_and_hole():
    d = compiled(EXAMPLE1)
    long_query = SymbolicWord((("r", BOTH),) * 12, "r")
    with pytest.raises(BudgetExceeded):
        brute_smq(d, long_query, budget=100)
    with pytest.raises(ValueError):
        brute_smq(d, SymbolicWord((("r", BOTH),)))


def test_containment_of_grant_s1_is_exact():
    d = compiled(EXAMPLE1)
    s1 = grant_s1()
    report = bounded_containment(s1, d, saturating_depth(s1, d))
    assert report.holds and report.exact and report.witness is None


def test_containment_finds_short_witness():
    d = compiled(EXAMPLE1)
    never = constant_transducer(d.inputs, d.outputs, {"!g"})
    report = bounded_containment(never, d, 5)
    assert not report.holds
    assert len(report.witness) == 2
    assert never.generates(report.witness) and not d.accepts_prefix(report.witness)


def test_containment_depth_zero_and_negative():
    d = compiled(EXAMPLE1)
    never = constant_transducer(d.inputs, d.outputs, {"!g"})
    assert bounded_containment(never, d, 0).holds
    with pytest.raises(ValueError):
        bounded_containment(never, d, -1)


def test_incompatibility_of_alternating_pair():
    teacher = AutomatonTeacher(compiled(EXAMPLE2))
    assert incompat_witness(alternating_s2(), alternating_s3(), teacher, 10) == ("r", "r")


def _deterministic(t):
    return all(len(t.delta[(q, x)]) == 1 for q in t.states for x in t.inputs)


def test_compatible_pairs_have_no_witness():
    t1 = AutomatonTeacher(compiled(EXAMPLE1))
    s1 = grant_s1()
    c = s1.concretize()
    assert _deterministic(c) and incompat_witness(c, c, t1, 10) is None
    t2 = AutomatonTeacher(compiled(EXAMPLE2))
    learned = s4(t2).transducer.concretize()
    assert incompat_witness(learned, learned, t2, 10) is None


@pytest.mark.parametrize("make, formula, witness", [
    (grant_s1, EXAMPLE1, ("!r", "r", "r", "r")),
    (alternating_s2, EXAMPLE2, ("!r", "r", "r")),
])
def test_self_pair_of_branching_transducer_can_clash(make, formula, witness):
    # on !r both L and R are reached, so the label union admits runs neither branch has
    teacher = AutomatonTeacher(compiled(formula))
    s = make()
    assert teacher.scq(s).ok and not _deterministic(s)
    assert incompat_witness(s, s, teacher, 10) == witness
    # pairing with a subsumed concretization leaves the label unions unchanged
    assert incompat_witness(s, s.concretize(), teacher, 10) == witness


def test_bounded_equivalence_examples():
    s1 = grant_s1()
    assert bounded_equivalence(s1, s1, 6) is None
    diff = bounded_equivalence(alternating_s2(), alternating_s3(), 6)
    assert diff == (("r", "g"),)
    # the concretization drops {!g} from L, so a difference shows up
    c = s1.concretize()
    assert bounded_equivalence(s1, c, equivalence_depth(s1, c)) is not None
    assert bounded_equivalence(c, c.concretize(), equivalence_depth(c, c)) is None


def test_bounded_equivalence_alphabet_mismatch():
    d = compiled(EXAMPLE1)
    other = constant_transducer(d.inputs, compile_formula("true", ["r"], ["h"]).outputs, {"h"})
    with pytest.raises(ValueError):
        bounded_equivalence(grant_s1(), other, 3)


def test_isomorphism():
    assert is_isomorphic(alternating_s2(), alternating_s2())
    assert not is_isomorphic(alternating_s2(), alternating_s3())
    assert not is_isomorphic(grant_s1(), grant_s1().concretize())


@settings(max_examples=80, deadline=None)
@given(automata(max_states=5, max_sigma=3, max_gamma=3), st.integers(0, 2**32 - 1))
def test_saturated_containment_agrees_with_scq(d, seed):
    conj = random_symbolic_transducer(random.Random(seed), 4, d.inputs, d.outputs)
    report = bounded_containment(conj, d, saturating_depth(conj, d))
    answer = AutomatonTeacher(d).scq(conj)
    assert report.holds == answer.ok
    if not answer.ok:
        assert len(report.witness) == len(answer.counterexample)
