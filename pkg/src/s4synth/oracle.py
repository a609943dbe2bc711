"""Teachers answering symbolic membership and conjecture queries.

A teacher is built on a *monitor*: an initial state, a step function on
``(input, output)`` letters and a predicate telling whether the prefix read so
far can still be extended into the target language. :class:`SafetyAutomaton`
is one such monitor; the irregular target of experiment 6 is another.
"""

from __future__ import annotations

import threading
import time
import warnings
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Hashable, Iterator, Sequence

from .core import (
    Alphabet,
    BiWord,
    SafetyAutomaton,
    SymbolicTransducer,
    SymbolicWord,
    product_search,
)


@dataclass
class QueryStats:
    """Query counters plus accumulated time spent inside the teacher."""

    mq_count: int = 0
    smq_count: int = 0
    scq_count: int = 0
    oracle_seconds: float = 0.0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def bump(self, kind: str) -> None:
        with self._lock:
            setattr(self, f"{kind}_count", getattr(self, f"{kind}_count") + 1)

    def add_time(self, seconds: float) -> None:
        with self._lock:
            self.oracle_seconds += seconds

    @property
    def total(self) -> int:
        return self.mq_count + self.smq_count + self.scq_count

    def snapshot(self) -> dict:
        return {
            "mq": self.mq_count,
            "smq": self.smq_count,
            "scq": self.scq_count,
            "oracle_seconds": self.oracle_seconds,
        }


@dataclass(frozen=True)
class SmqAnswer:
    outputs: frozenset
    counterexample: BiWord | None = None

    def __post_init__(self) -> None:
        if bool(self.outputs) == (self.counterexample is not None):
            raise ValueError("a counterexample accompanies exactly the empty answer")


@dataclass(frozen=True)
class ScqAnswer:
    counterexample: BiWord | None = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


class Teacher:
    """Exact SMQ/MQ teacher over a monitor. Subclasses supply the monitor and SCQ."""

    inputs: Alphabet
    outputs: Alphabet

    def __init__(self, inputs: Alphabet, outputs: Alphabet) -> None:
        self.inputs = inputs
        self.outputs = outputs
        self.stats = QueryStats()

    # -- monitor protocol -------------------------------------------------
    def initial(self) -> Hashable:
        raise NotImplementedError

    def step(self, state: Hashable, a: str, g: str) -> Hashable:
        raise NotImplementedError

    def good(self, state: Hashable) -> bool:
        raise NotImplementedError

    # -- queries ----------------------------------------------------------
    @contextmanager
    def _timed(self) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.stats.add_time(time.perf_counter() - start)

    def _check_symbolic(self, q: SymbolicWord) -> None:
        if q.hole is None:
            raise ValueError("symbolic membership query needs a trailing hole")
        for a, theta in q.pairs:
            if a not in self.inputs:
                raise ValueError(f"input {a!r} not in {self.inputs.symbols!r}")
            for g in theta:
                if g not in self.outputs:
                    raise ValueError(f"output {g!r} not in {self.outputs.symbols!r}")
        if q.hole not in self.inputs:
            raise ValueError(f"input {q.hole!r} not in {self.inputs.symbols!r}")

    def smq(self, q: SymbolicWord) -> SmqAnswer:
        """Maximal set of outputs that keeps every concretization a good prefix."""
        self._check_symbolic(q)
        self.stats.bump("smq")
        with self._timed():
            return self._smq(q)

    def mq(self, w: BiWord) -> bool:
        """Membership of a bi-word in the target's prefixes, asked as an SMQ."""
        self.stats.bump("mq")
        if not w:
            return True
        with self._timed():
            pairs = tuple((a, frozenset([g])) for a, g in w[:-1])
            answer = self._smq(SymbolicWord(pairs, w[-1][0]))
        return w[-1][1] in answer.outputs

    def scq(self, conjecture: SymbolicTransducer) -> ScqAnswer:
        """Whether every finite word the conjecture generates is a good prefix."""
        if conjecture.inputs != self.inputs or conjecture.outputs != self.outputs:
            raise ValueError("conjecture alphabets differ from the teacher's")
        self.stats.bump("scq")
        with self._timed():
            return self._scq(conjecture)

    def _smq(self, q: SymbolicWord) -> SmqAnswer:
        pairs = q.pairs
        ordered = [self.outputs.sorted(theta) for _, theta in pairs]
        current = {self.initial()}
        doomed = False
        for (a, _), thetas in zip(pairs, ordered):
            nxt = set()
            for s in current:
                for g in thetas:
                    nxt.add(self.step(s, a, g))
            current = nxt
            if not all(self.good(s) for s in current):
                doomed = True
                break
        if not doomed:
            allowed = frozenset(
                g for g in self.outputs if all(self.good(self.step(s, q.hole, g)) for s in current)
            )
            if allowed:
                return SmqAnswer(allowed)
        least = self.outputs.symbols[0]
        return SmqAnswer(frozenset(), self._least_bad(pairs, ordered, q.hole, least))

    def _least_bad(self, pairs, ordered, hole: str, last: str) -> BiWord:
        """Lexicographically least concretization ending in ``(hole, last)`` that is bad."""
        m = len(pairs)
        memo: dict = {}

        def fails(k: int, s) -> bool:
            key = (k, s)
            if key in memo:
                return memo[key]
            if not self.good(s):
                result = True
            elif k == m:
                result = not self.good(self.step(s, hole, last))
            else:
                a = pairs[k][0]
                result = any(fails(k + 1, self.step(s, a, g)) for g in ordered[k])
            memo[key] = result
            return result

        s = self.initial()
        if not fails(0, s):
            raise AssertionError("empty symbolic answer without a failing concretization")
        word = []
        for k in range(m):
            a = pairs[k][0]
            if not self.good(s):
                word.append((a, ordered[k][0]))
                continue
            for g in ordered[k]:
                t = self.step(s, a, g)
                if fails(k + 1, t):
                    word.append((a, g))
                    s = t
                    break
        word.append((hole, last))
        return tuple(word)

    def _scq(self, conjecture: SymbolicTransducer) -> ScqAnswer:
        raise NotImplementedError

    def _product_search(self, conjecture: SymbolicTransducer, depth: int | None) -> BiWord | None:
        witness, _ = product_search(conjecture, self.initial(), self.step, self.good, depth)
        return witness


class AutomatonTeacher(Teacher):
    """Exact teacher for a target given as a safety automaton."""

    def __init__(self, automaton: SafetyAutomaton, check_exhaustive: bool = False) -> None:
        super().__init__(automaton.inputs, automaton.outputs)
        self.automaton = automaton
        self._live = automaton.live
        self._table = automaton.table
        self._width = len(automaton.outputs)
        self._in_idx = {a: i for i, a in enumerate(automaton.inputs)}
        self._out_idx = {g: j for j, g in enumerate(automaton.outputs)}
        if check_exhaustive:
            problem = exhaustiveness_violation(automaton)
            if problem is not None:
                warnings.warn(problem, stacklevel=2)

    def initial(self) -> int:
        return self.automaton.initial

    def step(self, state: int, a: str, g: str) -> int:
        return self._table[state][self._in_idx[a] * self._width + self._out_idx[g]]

    def good(self, state: int) -> bool:
        return state in self._live

    def _scq(self, conjecture: SymbolicTransducer) -> ScqAnswer:
        return ScqAnswer(self._product_search(conjecture, None))


def exhaustiveness_violation(d: SafetyAutomaton) -> str | None:
    """Describe a reachable live state where some input has no live continuation."""
    if d.initial not in d.live:
        return "initial state is not live: the target language is empty"
    seen = {d.initial}
    queue = deque([d.initial])
    while queue:
        s = queue.popleft()
        for a in d.inputs:
            options = [d.step(s, a, g) for g in d.outputs]
            if not any(t in d.live for t in options):
                return f"state {d.labels[s]} has no live continuation on input {a!r}"
            for t in options:
                if t in d.live and t not in seen:
                    seen.add(t)
                    queue.append(t)
    return None


# -- experiment 4 -------------------------------------------------------------

def experiment4_automaton() -> SafetyAutomaton:
    """Single input ``a``; the first three outputs are 1, then 2 forever."""
    inputs = Alphabet(("a",))
    outputs = Alphabet(("1", "2"))
    # states 0..2 count the leading ones, 3 loops on 2, 4 is the sink
    table = [[1, 4], [2, 4], [3, 4], [4, 3], [4, 4]]
    return SafetyAutomaton(inputs, outputs, table, 0, 4, ["t0", "t1", "t2", "tail", "sink"])


# -- experiment 6 -------------------------------------------------------------

_BAD = ("bad",)
_TWOS = ("twos",)
_ONE = ("one",)
_START = ("start",)
_DIVERGED = ("diverged",)
_MATCHED = ("matched",)


def _advance_input(phase: tuple, a: str) -> tuple:
    """Track how the input relates to the family a^n b^n (n >= 1)."""
    kind = phase[0]
    if kind == "a":
        n = phase[1]
        if a == "a":
            return ("a", n + 1)
        if n == 0:
            return _DIVERGED
        return _MATCHED if n == 1 else ("b", n, 1)
    if kind == "b":
        n, j = phase[1], phase[2]
        if a == "a":
            return _DIVERGED
        return _MATCHED if j + 1 == n else ("b", n, j + 1)
    return phase


class IrregularTeacher(Teacher):
    """Target with an irregular component over inputs {a, b} and outputs {0, 1, 2}.

    The language is the union of three families:

    * output ``0^(2n-1) 1 0^ω`` on inputs starting with ``a^n b^n``;
    * output ``0^ω`` on inputs that start with no ``a^n b^n``;
    * output ``2^ω`` on any input.

    The monitor state records the output shape seen so far and, for the all-zero
    shape, the position of the input relative to ``a^n b^n``. SCQ is answered
    by a product search bounded to ``2 * |states| + extra`` steps.
    """

    def __init__(self, extra_depth: int = 4) -> None:
        super().__init__(Alphabet(("a", "b")), Alphabet(("0", "1", "2")))
        self.extra_depth = extra_depth
        self.last_scq_depth: int | None = None

    def initial(self) -> tuple:
        return _START

    def step(self, state: tuple, a: str, g: str) -> tuple:
        if state is _BAD or state == _BAD:
            return _BAD
        if state == _TWOS:
            return _TWOS if g == "2" else _BAD
        if state == _ONE:
            return _ONE if g == "0" else _BAD
        if state == _START:
            if g == "2":
                return _TWOS
            phase = ("a", 0)
        else:
            phase = state[1]
            if g == "2":
                return _BAD
        nxt = _advance_input(phase, a)
        if g == "0":
            return _BAD if nxt == _MATCHED else ("zeros", nxt)
        # g == "1": allowed exactly when a^n b^n completes at this position
        return _ONE if nxt == _MATCHED else _BAD

    def good(self, state: tuple) -> bool:
        return state != _BAD

    def _scq(self, conjecture: SymbolicTransducer) -> ScqAnswer:
        depth = 2 * len(conjecture.states) + self.extra_depth
        self.last_scq_depth = depth
        return ScqAnswer(self._product_search(conjecture, depth))


def bespoke_teacher(kind: str) -> Teacher:
    """Teachers for the two targets that are not given by a formula."""
    if kind == "experiment4":
        return AutomatonTeacher(experiment4_automaton())
    if kind == "experiment6":
        return IrregularTeacher()
    raise ValueError(f"unknown bespoke teacher {kind!r}")


def monitor_accepts(teacher: Teacher, w: Sequence[tuple[str, str]]) -> bool:
    """Run the teacher's monitor on ``w`` without touching query counters."""
    s = teacher.initial()
    for a, g in w:
        s = teacher.step(s, a, g)
    return teacher.good(s)
