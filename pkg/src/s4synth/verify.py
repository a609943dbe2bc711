"""Brute-force checkers used as ground truth by the tests and by ``verify``."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .core import (
    BiWord,
    SafetyAutomaton,
    SymbolicTransducer,
    SymbolicWord,
    product_search,
)
from .oracle import Teacher


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ContainmentReport:
    holds: bool
    witness: BiWord | None
    depth: int
    exact: bool


def _monitor(target):
    """``(initial, step, good)`` for a safety automaton or a teacher."""
    if isinstance(target, SafetyAutomaton):
        return target.monitor_initial(), target.monitor_step, target.monitor_good
    if isinstance(target, Teacher):
        return target.initial(), target.step, target.good
    raise TypeError(f"cannot monitor {type(target).__name__}")


def brute_smq(target, q: SymbolicWord, budget: int = 10**6) -> frozenset:
    """Answer a symbolic membership query by enumerating every concretization."""
    if q.hole is None:
        raise ValueError("query needs a trailing hole")
    initial, step, good = _monitor(target)
    gammas = list(target.outputs)
    count = len(gammas)
    for _, theta in q.pairs:
        count *= len(theta)
    if count > budget:
        raise BudgetExceeded(f"{count} concretizations exceed the budget of {budget}")
    choices = [sorted(theta) for _, theta in q.pairs]
    inputs = [a for a, _ in q.pairs]
    allowed = set(gammas)
    for outs in itertools.product(*choices):
        s = initial
        for a, g in zip(inputs, outs):
            s = step(s, a, g)
        for g in list(allowed):
            if not good(step(s, q.hole, g)):
                allowed.discard(g)
        if not allowed:
            break
    return frozenset(allowed)


def saturating_depth(t: SymbolicTransducer, target) -> int:
    """A depth at which the product with an automaton target is fully explored."""
    if isinstance(target, SafetyAutomaton):
        return len(t.states) * target.num_states + 1
    raise TypeError("saturation depth is only known for automaton targets")


def bounded_containment(t: SymbolicTransducer, target, depth: int) -> ContainmentReport:
    """Check that every word of length at most ``depth`` generated by ``t`` is a good prefix.

    ``exact`` is set when the reachable product closed before the bound, in
    which case the verdict holds for words of every length.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    initial, step, good = _monitor(target)
    witness, saturated = product_search(t, initial, step, good, depth)
    if witness is not None:
        return ContainmentReport(False, witness, depth, saturated)
    return ContainmentReport(True, None, depth, saturated)


def incompat_witness(
    s1: SymbolicTransducer, s2: SymbolicTransducer, teacher: Teacher, bound: int
) -> tuple[str, ...] | None:
    """Shortest input word on which the union of the two output labellings fails.

    Each word ``v`` is turned into the symbolic query whose output sets are the
    unions of both transducers' node labels along ``v``. A word is returned
    when its own query is empty while all its proper prefixes have nonempty
    answers. Searched lengths stop at ``min(bound, |Q1|*|Q2| + 1)``.
    """
    limit = min(bound, len(s1.states) * len(s2.states) + 1)
    frontier: list[tuple[tuple[str, ...], tuple]] = [((), ())]
    for _ in range(limit):
        nxt = []
        for v, pairs in frontier:
            for a in teacher.inputs:
                answer = teacher.smq(SymbolicWord(pairs, a))
                word = v + (a,)
                if not answer.outputs:
                    return word
                label = s1.node_label(word) | s2.node_label(word)
                nxt.append((word, pairs + ((a, label),)))
        frontier = nxt
    return None


def bounded_equivalence(a: SymbolicTransducer, b: SymbolicTransducer, depth: int) -> BiWord | None:
    """Shortest word of length at most ``depth`` generated by exactly one of ``a`` and ``b``."""
    if a.inputs != b.inputs or a.outputs != b.outputs:
        raise ValueError("transducers have different alphabets")
    start = (frozenset([a.initial]), frozenset([b.initial]))
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (sa, sb), word = queue.popleft()
        if len(word) >= depth:
            continue
        for x in a.inputs:
            for g in a.outputs:
                na = frozenset(p for q in sa for p in a.delta[(q, x)] if g in a.eta[p])
                nb = frozenset(p for q in sb for p in b.delta[(q, x)] if g in b.eta[p])
                w = word + ((x, g),)
                if bool(na) != bool(nb):
                    return w
                if na and (na, nb) not in seen:
                    seen.add((na, nb))
                    queue.append(((na, nb), w))
    return None


def equivalence_depth(a: SymbolicTransducer, b: SymbolicTransducer) -> int:
    """Depth bound past which no new pair of reachable subsets can appear."""
    return 2 ** (len(a.states) + len(b.states)) + 1


def is_isomorphic(a: SymbolicTransducer, b: SymbolicTransducer) -> bool:
    """Whether a bijection of states maps ``a`` exactly onto ``b``.

    Labels, transition sets and the initial state must all correspond.
    """
    if len(a.states) != len(b.states) or a.inputs != b.inputs or a.outputs != b.outputs:
        return False
    others_a = [q for q in a.states if q != a.initial]
    others_b = [q for q in b.states if q != b.initial]
    for perm in itertools.permutations(others_b):
        mapping = dict(zip(others_a, perm))
        mapping[a.initial] = b.initial
        if any(a.eta[q] != b.eta[mapping[q]] for q in others_a):
            continue
        if all(
            frozenset(mapping[p] for p in a.delta[(q, x)]) == b.delta[(mapping[q], x)]
            for q in a.states
            for x in a.inputs
        ):
            return True
    return False
