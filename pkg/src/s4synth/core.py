"""Alphabets, words, symbolic transducers and safety automata.

Words over the input alphabet are plain tuples of symbol strings. Bi-words are
tuples of ``(input, output)`` pairs. Output sets are frozensets of output
symbols; the initial state of a transducer carries the :data:`STAR` sentinel
instead of an output set.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

Word = tuple  # tuple[str, ...]
BiWord = tuple  # tuple[tuple[str, str], ...]
State = Hashable


class _Star:
    """Sentinel output of the initial state. Acts as the top element."""

    _instance: "_Star | None" = None

    def __new__(cls) -> "_Star":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "*"

    def __reduce__(self):
        return (_Star, ())


STAR = _Star()


def entry_subset(a, b) -> bool:
    """``a ⊆ b`` for output entries, with STAR above every output set."""
    if b is STAR:
        return True
    if a is STAR:
        return False
    return a <= b


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet. Declared order drives every tie-break."""

    symbols: tuple[str, ...]
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        symbols = tuple(self.symbols)
        if not symbols:
            raise ValueError("alphabet must be nonempty")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"duplicate symbols in alphabet {symbols!r}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._index

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not in alphabet {self.symbols!r}") from None

    def word_key(self, word: Sequence[str]) -> tuple:
        """Sort key: shorter first, then lexicographic in declared order."""
        return (len(word), tuple(self._index[s] for s in word))

    def set_key(self, subset: Iterable[str]) -> tuple:
        return tuple(sorted(self._index[s] for s in subset))

    def sorted(self, subset: Iterable[str]) -> list[str]:
        return sorted(subset, key=self._index.__getitem__)

    def words(self, length: int) -> Iterator[Word]:
        """All words of exactly ``length`` letters in lexicographic order."""
        if length == 0:
            yield ()
            return
        for prefix in self.words(length - 1):
            for s in self.symbols:
                yield prefix + (s,)


def biword(inputs: Sequence[str], outputs: Sequence[str]) -> BiWord:
    """Zip an input word and an output word of equal length (``v ⊕ w``)."""
    if len(inputs) != len(outputs):
        raise ValueError("input and output words differ in length")
    return tuple(zip(inputs, outputs))


def inputs_of(w: BiWord) -> Word:
    return tuple(a for a, _ in w)


def outputs_of(w: BiWord) -> Word:
    return tuple(b for _, b in w)


def format_biword(w: BiWord) -> str:
    if not w:
        return "ε"
    return " ".join(f"({a},{b})" for a, b in w)


def format_word(v: Sequence[str]) -> str:
    return "ε" if not v else ".".join(v)


@dataclass(frozen=True)
class SymbolicWord:
    """A word of ``(input, output set)`` pairs, optionally ending in a hole."""

    pairs: tuple[tuple[str, frozenset], ...] = ()
    hole: str | None = None

    def __post_init__(self) -> None:
        pairs = tuple((a, frozenset(t)) for a, t in self.pairs)
        for a, theta in pairs:
            if not theta:
                raise ValueError(f"empty output set at input {a!r}")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def with_hole(self, symbol: str) -> "SymbolicWord":
        return SymbolicWord(self.pairs, symbol)

    def extend(self, symbol: str, outputs: Iterable[str]) -> "SymbolicWord":
        if self.hole is not None:
            raise ValueError("cannot extend a symbolic word past its hole")
        return SymbolicWord(self.pairs + ((symbol, frozenset(outputs)),))

    def inputs(self) -> Word:
        word = tuple(a for a, _ in self.pairs)
        return word + ((self.hole,) if self.hole is not None else ())

    def __str__(self) -> str:
        parts = [f"({a},{{{','.join(sorted(t))}}})" for a, t in self.pairs]
        if self.hole is not None:
            parts.append(f"({self.hole},?)")
        return " ".join(parts) if parts else "ε"


@dataclass(frozen=True)
class SymbolicTransducer:
    """Input-complete transducer with set-valued transitions and output sets.

    ``states`` fixes the order used when a "least" state is needed. ``delta``
    maps ``(state, input)`` to a nonempty frozenset of states and ``eta`` maps
    every state except ``initial`` to a nonempty frozenset of outputs.
    """

    inputs: Alphabet
    outputs: Alphabet
    states: tuple
    initial: State
    delta: Mapping[tuple, frozenset]
    eta: Mapping[State, object]

    def __post_init__(self) -> None:
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        known = set(states)
        if self.initial not in known:
            raise ValueError("initial state not among states")
        delta = {}
        for q in states:
            for a in self.inputs:
                targets = frozenset(self.delta.get((q, a), ()))
                if not targets:
                    raise ValueError(f"no transition from {q!r} on {a!r}")
                if not targets <= known:
                    raise ValueError(f"transition from {q!r} on {a!r} leaves the state set")
                if self.initial in targets:
                    raise ValueError("the initial state has no output and cannot be re-entered")
                delta[(q, a)] = targets
        eta = {self.initial: STAR}
        for q in states:
            if q == self.initial:
                continue
            out = frozenset(self.eta.get(q, ()))
            if not out:
                raise ValueError(f"state {q!r} has an empty output set")
            bad = [g for g in out if g not in self.outputs]
            if bad:
                raise ValueError(f"unknown outputs {bad!r} at state {q!r}")
            eta[q] = out
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "eta", eta)

    @property
    def is_concrete(self) -> bool:
        return all(len(t) == 1 for t in self.delta.values()) and all(
            len(o) == 1 for q, o in self.eta.items() if q != self.initial
        )

    def successors(self, states: Iterable[State], symbol: str) -> frozenset:
        if symbol not in self.inputs:
            raise ValueError(f"input {symbol!r} not in {self.inputs.symbols!r}")
        out: set = set()
        for q in states:
            out |= self.delta[(q, symbol)]
        return frozenset(out)

    def reach(self, v: Sequence[str]) -> frozenset:
        """States reachable by reading the input word ``v``."""
        current = frozenset([self.initial])
        for a in v:
            current = self.successors(current, a)
        return current

    def generates(self, w: BiWord) -> bool:
        """Whether some run on the inputs of ``w`` emits its outputs."""
        current = {self.initial}
        for a, g in w:
            current = {p for q in current for p in self.delta[(q, a)] if g in self.eta[p]}
            if not current:
                return False
        return True

    def node_label(self, v: Sequence[str]) -> frozenset:
        """Union of output sets over the states reached by a nonempty word."""
        if not v:
            raise ValueError("node_label needs a nonempty input word")
        out: set = set()
        for q in self.reach(v):
            out |= self.eta[q]
        return frozenset(out)

    def least_state(self, candidates: Iterable[State]) -> State:
        order = {q: i for i, q in enumerate(self.states)}
        return min(candidates, key=order.__getitem__)

    def concretize(
        self,
        choose_state: Callable[[frozenset], State] | None = None,
        choose_output: Callable[[frozenset], str] | None = None,
    ) -> "SymbolicTransducer":
        """Restrict to one successor and one output per state.

        By default the least state and the least output symbol are chosen.
        """
        pick_state = choose_state or self.least_state
        pick_out = choose_output or (lambda outs: self.outputs.sorted(outs)[0])
        delta = {key: frozenset([pick_state(t)]) for key, t in self.delta.items()}
        eta = {q: frozenset([pick_out(o)]) for q, o in self.eta.items() if q != self.initial}
        return SymbolicTransducer(self.inputs, self.outputs, self.states, self.initial, delta, eta)

    def reachable(self) -> "SymbolicTransducer":
        """Drop states that no input word reaches."""
        seen = [self.initial]
        marked = {self.initial}
        queue = deque(seen)
        while queue:
            q = queue.popleft()
            for a in self.inputs:
                for p in self.least_sorted(self.delta[(q, a)]):
                    if p not in marked:
                        marked.add(p)
                        seen.append(p)
                        queue.append(p)
        keep = [q for q in self.states if q in marked]
        delta = {(q, a): t for (q, a), t in self.delta.items() if q in marked}
        eta = {q: o for q, o in self.eta.items() if q in marked}
        return SymbolicTransducer(self.inputs, self.outputs, keep, self.initial, delta, eta)

    def least_sorted(self, states: Iterable[State]) -> list:
        order = {q: i for i, q in enumerate(self.states)}
        return sorted(states, key=order.__getitem__)

    def relabel(self, names: Mapping[State, str] | None = None) -> "SymbolicTransducer":
        """Rename states to strings (``q0``, ``q1``, ... by default)."""
        if names is None:
            names = {q: f"q{i}" for i, q in enumerate(self.states)}
        delta = {(names[q], a): frozenset(names[p] for p in t) for (q, a), t in self.delta.items()}
        eta = {names[q]: o for q, o in self.eta.items() if q != self.initial}
        return SymbolicTransducer(
            self.inputs, self.outputs, [names[q] for q in self.states], names[self.initial], delta, eta
        )

    def to_json(self) -> dict:
        names = {q: f"q{i}" for i, q in enumerate(self.states)}
        transitions = []
        for q in self.states:
            for a in self.inputs:
                targets = [names[p] for p in self.least_sorted(self.delta[(q, a)])]
                transitions.append([names[q], a, targets])
        return {
            "kind": "symbolic-transducer",
            "inputs": list(self.inputs.symbols),
            "outputs": list(self.outputs.symbols),
            "states": [names[q] for q in self.states],
            "initial": names[self.initial],
            "eta": {
                names[q]: self.outputs.sorted(self.eta[q]) for q in self.states if q != self.initial
            },
            "transitions": transitions,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SymbolicTransducer":
        delta: dict = {}
        for src, a, targets in data["transitions"]:
            delta[(src, a)] = frozenset(delta.get((src, a), frozenset()) | set(targets))
        return cls(
            Alphabet(tuple(data["inputs"])),
            Alphabet(tuple(data["outputs"])),
            tuple(data["states"]),
            data["initial"],
            delta,
            {q: frozenset(o) for q, o in data["eta"].items()},
        )

    def to_dot(self, name: str = "transducer") -> str:
        names = {q: f"q{i}" for i, q in enumerate(self.states)}
        lines = [f'digraph "{name}" {{', "  rankdir=LR;", '  node [shape=circle];']
        for q in self.states:
            if q == self.initial:
                label = "*"
            else:
                label = "{" + ",".join(self.outputs.sorted(self.eta[q])) + "}"
            lines.append(f'  {names[q]} [label="{label}"];')
        lines.append('  start [shape=point];')
        lines.append(f"  start -> {names[self.initial]};")
        for q in self.states:
            grouped: dict = {}
            for a in self.inputs:
                for p in self.delta[(q, a)]:
                    grouped.setdefault(p, []).append(a)
            for p in self.least_sorted(grouped):
                label = ",".join(grouped[p])
                lines.append(f'  {names[q]} -> {names[p]} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def constant_transducer(inputs: Alphabet, outputs: Alphabet, emit: Iterable[str]) -> SymbolicTransducer:
    """Initial state plus one self-looping state emitting ``emit``."""
    emit = frozenset(emit)
    delta = {}
    for a in inputs:
        delta[("init", a)] = frozenset(["loop"])
        delta[("loop", a)] = frozenset(["loop"])
    return SymbolicTransducer(inputs, outputs, ("init", "loop"), "init", delta, {"loop": emit})


class SafetyAutomaton:
    """Complete deterministic automaton over input/output letters.

    States are ``0 .. n-1``. ``table[s][i * |Γ| + j]`` is the successor of
    state ``s`` on the letter ``(Σ[i], Γ[j])``. ``live`` holds the states from
    which an infinite run avoiding the sink exists.
    """

    def __init__(
        self,
        inputs: Alphabet,
        outputs: Alphabet,
        table: Sequence[Sequence[int]],
        initial: int,
        sink: int,
        labels: Sequence[str] | None = None,
    ) -> None:
        self.inputs = inputs
        self.outputs = outputs
        self.table = tuple(tuple(row) for row in table)
        self.initial = initial
        self.sink = sink
        width = len(inputs) * len(outputs)
        n = len(self.table)
        for s, row in enumerate(self.table):
            if len(row) != width:
                raise ValueError(f"state {s} has {len(row)} successors, expected {width}")
            if any(not 0 <= t < n for t in row):
                raise ValueError(f"state {s} has a successor outside the state range")
        if any(t != sink for t in self.table[sink]):
            raise ValueError("sink state must be absorbing")
        self.labels = tuple(labels) if labels is not None else tuple(str(s) for s in range(n))
        self.live = frozenset(_live_states(self.table, sink))

    @property
    def num_states(self) -> int:
        return len(self.table)

    def letter(self, a: str, g: str) -> int:
        return self.inputs.index(a) * len(self.outputs) + self.outputs.index(g)

    def step(self, state: int, a: str, g: str) -> int:
        return self.table[state][self.letter(a, g)]

    def run(self, w: BiWord, start: int | None = None) -> int:
        s = self.initial if start is None else start
        for a, g in w:
            s = self.table[s][self.letter(a, g)]
        return s

    def accepts_prefix(self, w: BiWord) -> bool:
        """Whether ``w`` is a prefix of some word in the target language."""
        return self.run(w) in self.live

    # Monitor protocol shared with non-automaton teachers.
    def monitor_initial(self) -> int:
        return self.initial

    def monitor_step(self, state: int, a: str, g: str) -> int:
        return self.table[state][self.letter(a, g)]

    def monitor_good(self, state: int) -> bool:
        return state in self.live

    def to_json(self) -> dict:
        transitions = []
        for s, row in enumerate(self.table):
            for i, a in enumerate(self.inputs):
                for j, g in enumerate(self.outputs):
                    transitions.append([str(s), a, g, str(row[i * len(self.outputs) + j])])
        return {
            "kind": "safety-automaton",
            "inputs": list(self.inputs.symbols),
            "outputs": list(self.outputs.symbols),
            "states": [str(s) for s in range(self.num_states)],
            "labels": list(self.labels),
            "initial": str(self.initial),
            "sink": str(self.sink),
            "live": [str(s) for s in sorted(self.live)],
            "transitions": transitions,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SafetyAutomaton":
        inputs = Alphabet(tuple(data["inputs"]))
        outputs = Alphabet(tuple(data["outputs"]))
        index = {name: i for i, name in enumerate(data["states"])}
        width = len(inputs) * len(outputs)
        table = [[-1] * width for _ in index]
        for src, a, g, dst in data["transitions"]:
            table[index[src]][inputs.index(a) * len(outputs) + outputs.index(g)] = index[dst]
        for s, row in enumerate(table):
            if -1 in row:
                raise ValueError(f"state {data['states'][s]!r} is missing transitions")
        return cls(inputs, outputs, table, index[data["initial"]], index[data["sink"]], data.get("labels"))


def _live_states(table: Sequence[Sequence[int]], sink: int) -> set[int]:
    """Greatest set of non-sink states each having a successor in the set."""
    n = len(table)
    alive = [s != sink for s in range(n)]
    preds: list[set[int]] = [set() for _ in range(n)]
    count = [0] * n
    for s, row in enumerate(table):
        if not alive[s]:
            continue
        succ = set(row)
        for t in succ:
            preds[t].add(s)
        count[s] = sum(1 for t in succ if alive[t])
    queue = deque(s for s in range(n) if alive[s] and count[s] == 0)
    for s in queue:
        alive[s] = False
    while queue:
        t = queue.popleft()
        for s in preds[t]:
            if alive[s]:
                count[s] -= 1
                if count[s] == 0:
                    alive[s] = False
                    queue.append(s)
    return {s for s in range(n) if alive[s]}


def automaton_accepts_prefix(d: SafetyAutomaton, w: BiWord) -> bool:
    return d.accepts_prefix(w)


def automaton_from_transducer(t: SymbolicTransducer) -> SafetyAutomaton:
    """Safety automaton whose prefix language is exactly what ``t`` generates.

    The transducer is determinized by the subset construction on bi-letters;
    every nonempty subset is live because transducers are input-complete.
    """
    n_out = len(t.outputs)
    start = frozenset([t.initial])
    index = {start: 0}
    order = [start]
    table: list[list[int]] = []
    i = 0
    sink = None
    while i < len(order):
        current = order[i]
        row = []
        for a in t.inputs:
            for g in t.outputs:
                nxt = frozenset(p for q in current for p in t.delta[(q, a)] if g in t.eta[p])
                if nxt not in index:
                    index[nxt] = len(order)
                    order.append(nxt)
                row.append(index[nxt])
        table.append(row)
        i += 1
    sink = index.get(frozenset())
    if sink is None:
        sink = len(order)
        table.append([sink] * (len(t.inputs) * n_out))
    labels = ["{" + ",".join(map(str, sorted(map(str, s)))) + "}" for s in order]
    if len(labels) < len(table):
        labels.append("{}")
    return SafetyAutomaton(t.inputs, t.outputs, table, 0, sink, labels)


def product_search(
    t: SymbolicTransducer,
    initial: Hashable,
    step: Callable[[Hashable, str, str], Hashable],
    good: Callable[[Hashable], bool],
    depth: int | None = None,
) -> tuple[BiWord | None, bool]:
    """Shortest, then least, word generated by ``t`` that drives a monitor bad.

    Breadth-first over pairs of transducer state and monitor state, expanding
    letters in declared order. Returns the witness (or ``None``) and whether
    the reachable product was exhausted within ``depth`` steps; ``depth=None``
    means no bound.
    """
    start = (t.initial, initial)
    if not good(initial):
        return (), True
    parent: dict = {start: None}
    frontier = [start]
    level = 0
    while frontier and (depth is None or level < depth):
        nxt = []
        for node in frontier:
            q, s = node
            for a in t.inputs:
                targets = t.least_sorted(t.delta[(q, a)])
                for g in t.outputs:
                    for p in targets:
                        if g not in t.eta[p]:
                            continue
                        child = (p, step(s, a, g))
                        if child in parent:
                            continue
                        parent[child] = (node, (a, g))
                        if not good(child[1]):
                            return _trace_back(parent, child), False
                        nxt.append(child)
        frontier = nxt
        level += 1
    return None, not frontier


def _trace_back(parent: dict, node) -> BiWord:
    word = []
    while parent[node] is not None:
        node, letter = parent[node]
        word.append(letter)
    return tuple(reversed(word))


def dump_json(obj: SymbolicTransducer | SafetyAutomaton, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj.to_json(), fh, indent=2)
        fh.write("\n")


def load_json(path: str) -> SymbolicTransducer | SafetyAutomaton:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    kind = data.get("kind")
    if kind == "safety-automaton":
        return SafetyAutomaton.from_json(data)
    if kind == "symbolic-transducer" or kind is None:
        return SymbolicTransducer.from_json(data)
    raise ValueError(f"unknown JSON kind {kind!r}")
