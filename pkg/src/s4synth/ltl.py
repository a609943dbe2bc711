"""Safety fragment of LTL: parsing, progression and compilation to automata.

Supported syntax (ASCII)::

    atom     [a-z][a-z0-9_]*      true  false
    unary    !f   X f   X[n] f   G f
    binary   f & g   f | g   f -> g   f <-> g

Binding from tightest to loosest: ``!``, ``X``/``G``, ``&``, ``|``, ``->``,
``<->``. Implication associates to the right. After conversion to negation
normal form only literals carry negation, and ``G`` must never end up negated.
``F``, ``U``, ``R`` and ``W`` are rejected.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .bdd import BDD, FALSE, TRUE
from .core import Alphabet, SafetyAutomaton


class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnsafeFormulaError(FormulaError):
    """The formula leaves the safety fragment."""


class StateLimitError(RuntimeError):
    """Compilation produced more states than the configured cap."""


# -- syntax tree ---------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Lit:
    name: str
    positive: bool = True

    def __str__(self) -> str:
        return self.name if self.positive else f"!{self.name}"


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self) -> str:
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self) -> str:
        return " & ".join(_wrap(a) for a in self.args)


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self) -> str:
        return " | ".join(_wrap(a) for a in self.args)


@dataclass(frozen=True)
class Implies:
    left: object
    right: object

    def __str__(self) -> str:
        return f"{_wrap(self.left)} -> {_wrap(self.right)}"


@dataclass(frozen=True)
class Iff:
    left: object
    right: object

    def __str__(self) -> str:
        return f"{_wrap(self.left)} <-> {_wrap(self.right)}"


@dataclass(frozen=True)
class Next:
    arg: object

    def __str__(self) -> str:
        return f"X {_wrap(self.arg)}"


@dataclass(frozen=True)
class Glob:
    arg: object

    def __str__(self) -> str:
        return f"G {_wrap(self.arg)}"


Formula = object
_SIMPLE = (Const, Atom, Lit, Not, Next, Glob)


def _wrap(f) -> str:
    return str(f) if isinstance(f, _SIMPLE) else f"({f})"


# -- parser --------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<xn>X\[(?P<n>\d+)\])|(?P<ident>[a-z][a-z0-9_]*)|(?P<op><->|->|[!&|()XG])|(?P<bad>[FURW])|(?P<junk>\S))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace remains
            break
        text_match = m.group(0)
        start = m.start() + len(text_match) - len(text_match.lstrip())
        if m.group("xn") is not None:
            tokens.append(("xn", m.group("n"), start))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), start))
        elif m.group("op") is not None:
            tokens.append(("op", m.group("op"), start))
        elif m.group("bad") is not None:
            raise UnsafeFormulaError(
                f"operator {m.group('bad')!r} at position {start} is outside the safety fragment"
            )
        else:
            raise FormulaSyntaxError(f"unexpected character {m.group('junk')!r}", start)
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, pos = self.take()
        if val != value or kind != "op":
            raise FormulaSyntaxError(f"expected {value!r}", pos)

    def parse(self):
        f = self.iff()
        kind, _, pos = self.peek()
        if kind != "end":
            raise FormulaSyntaxError("trailing input", pos)
        return f

    def iff(self):
        left = self.implies()
        while self.peek()[1] == "<->":
            self.take()
            left = Iff(left, self.implies())
        return left

    def implies(self):
        left = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disj(self):
        args = [self.conj()]
        while self.peek()[1] == "|":
            self.take()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self):
        args = [self.unary()]
        while self.peek()[1] == "&":
            self.take()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "!":
            self.take()
            return Not(self.unary())
        if kind == "op" and val == "X":
            self.take()
            return Next(self.unary())
        if kind == "xn":
            self.take()
            f = self.unary()
            for _ in range(int(val)):
                f = Next(f)
            return f
        if kind == "op" and val == "G":
            self.take()
            return Glob(self.unary())
        return self.primary()

    def primary(self):
        kind, val, pos = self.take()
        if kind == "ident":
            if val == "true":
                return Const(True)
            if val == "false":
                return Const(False)
            return Atom(val)
        if kind == "op" and val == "(":
            f = self.iff()
            self.expect(")")
            return f
        if kind == "end":
            raise FormulaSyntaxError("unexpected end of formula", pos)
        raise FormulaSyntaxError(f"unexpected token {val!r}", pos)


def parse_raw(text: str):
    """Syntax tree exactly as written (no desugaring)."""
    return _Parser(text).parse()


def parse(text: str):
    """Parse and convert to negation normal form over ``Lit``/``And``/``Or``/``Next``/``Glob``."""
    return to_nnf(parse_raw(text))


def mk_and(args: Iterable) -> object:
    flat: list = []
    for a in args:
        if isinstance(a, Const):
            if not a.value:
                return Const(False)
            continue
        for b in a.args if isinstance(a, And) else (a,):
            if b not in flat:
                flat.append(b)
    if not flat:
        return Const(True)
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def mk_or(args: Iterable) -> object:
    flat: list = []
    for a in args:
        if isinstance(a, Const):
            if a.value:
                return Const(True)
            continue
        for b in a.args if isinstance(a, Or) else (a,):
            if b not in flat:
                flat.append(b)
    if not flat:
        return Const(False)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def mk_next(arg) -> object:
    return arg if isinstance(arg, Const) else Next(arg)


def mk_glob(arg) -> object:
    return arg if isinstance(arg, Const) else Glob(arg)


def to_nnf(f, negate: bool = False):
    """Push negations to atoms. Raises :class:`UnsafeFormulaError` on a negated ``G``."""
    if isinstance(f, Const):
        return Const(f.value != negate)
    if isinstance(f, Atom):
        return Lit(f.name, not negate)
    if isinstance(f, Lit):
        return Lit(f.name, f.positive != negate)
    if isinstance(f, Not):
        return to_nnf(f.arg, not negate)
    if isinstance(f, And):
        parts = [to_nnf(a, negate) for a in f.args]
        return mk_or(parts) if negate else mk_and(parts)
    if isinstance(f, Or):
        parts = [to_nnf(a, negate) for a in f.args]
        return mk_and(parts) if negate else mk_or(parts)
    if isinstance(f, Implies):
        return to_nnf(Or((Not(f.left), f.right)), negate)
    if isinstance(f, Iff):
        if negate:
            expanded = Or((And((f.left, Not(f.right))), And((Not(f.left), f.right))))
        else:
            expanded = Or((And((f.left, f.right)), And((Not(f.left), Not(f.right)))))
        return to_nnf(expanded)
    if isinstance(f, Next):
        return mk_next(to_nnf(f.arg, negate))
    if isinstance(f, Glob):
        if negate:
            raise UnsafeFormulaError(f"negated G in {Not(f)} is outside the safety fragment")
        return mk_glob(to_nnf(f.arg))
    raise TypeError(f"not a formula: {f!r}")


def atoms(f) -> set[str]:
    if isinstance(f, (Atom, Lit)):
        return {f.name}
    if isinstance(f, Const):
        return set()
    if isinstance(f, (And, Or)):
        return set().union(*(atoms(a) for a in f.args))
    if isinstance(f, (Implies, Iff)):
        return atoms(f.left) | atoms(f.right)
    return atoms(f.arg)


def size(f) -> int:
    """Number of syntax-tree nodes."""
    if isinstance(f, (Const, Atom, Lit)):
        return 1
    if isinstance(f, (And, Or)):
        return 1 + sum(size(a) for a in f.args)
    if isinstance(f, (Implies, Iff)):
        return 1 + size(f.left) + size(f.right)
    return 1 + size(f.arg)


def next_depth(f) -> int:
    """Largest number of nested ``X`` operators."""
    if isinstance(f, (Const, Atom, Lit)):
        return 0
    if isinstance(f, (And, Or)):
        return max(next_depth(a) for a in f.args)
    if isinstance(f, (Implies, Iff)):
        return max(next_depth(f.left), next_depth(f.right))
    return next_depth(f.arg) + (1 if isinstance(f, Next) else 0)


# -- alphabets of valuations -----------------------------------------------------

def valuation_symbol(aps: Sequence[str], values: Sequence[bool]) -> str:
    if not aps:
        return "_"
    return "&".join(ap if v else f"!{ap}" for ap, v in zip(aps, values))


def valuation_alphabet(aps: Sequence[str]) -> tuple[Alphabet, dict[str, frozenset]]:
    """All valuations of ``aps``, positive literals first.

    Returns the alphabet and a map from each symbol to its set of true
    propositions. With no propositions the alphabet has the single symbol ``_``.
    """
    aps = tuple(aps)
    symbols = []
    truth: dict[str, frozenset] = {}
    for values in itertools.product((True, False), repeat=len(aps)):
        sym = valuation_symbol(aps, values)
        symbols.append(sym)
        truth[sym] = frozenset(ap for ap, v in zip(aps, values) if v)
    return Alphabet(tuple(symbols)), truth


# -- progression on formulas ----------------------------------------------------

def progress(f, true_aps: frozenset):
    """Rewrite ``f`` by one letter whose true propositions are ``true_aps``."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Lit):
        return Const((f.name in true_aps) == f.positive)
    if isinstance(f, And):
        return mk_and(progress(a, true_aps) for a in f.args)
    if isinstance(f, Or):
        return mk_or(progress(a, true_aps) for a in f.args)
    if isinstance(f, Next):
        return f.arg
    if isinstance(f, Glob):
        return mk_and([progress(f.arg, true_aps), f])
    raise TypeError(f"progression needs a formula in negation normal form, got {f!r}")


# -- compilation -----------------------------------------------------------------

class _Compiler:
    def __init__(self, f, letters: list[frozenset]) -> None:
        self.bdd = BDD()
        self.letters = letters
        self._formula_node: dict = {}
        self._prog: dict = {}
        self._compose_memo: list[dict[int, int]] = [dict() for _ in letters]
        self._subst: list[dict[int, int]] = [dict() for _ in letters]
        self.root = self.node_of(f)

    def node_of(self, f) -> int:
        cached = self._formula_node.get(f)
        if cached is not None:
            return cached
        bdd = self.bdd
        if isinstance(f, Const):
            node = TRUE if f.value else FALSE
        elif isinstance(f, Lit):
            v = bdd.variable(Lit(f.name, True))
            node = v if f.positive else bdd.not_(v)
        elif isinstance(f, And):
            node = TRUE
            for a in f.args:
                node = bdd.and_(node, self.node_of(a))
        elif isinstance(f, Or):
            node = FALSE
            for a in f.args:
                node = bdd.or_(node, self.node_of(a))
        elif isinstance(f, (Next, Glob)):
            node = bdd.variable(f)
        else:
            raise TypeError(f"not in negation normal form: {f!r}")
        self._formula_node[f] = node
        return node

    def progress_formula(self, f, k: int) -> int:
        key = (f, k)
        cached = self._prog.get(key)
        if cached is not None:
            return cached
        bdd = self.bdd
        if isinstance(f, Const):
            node = TRUE if f.value else FALSE
        elif isinstance(f, Lit):
            node = TRUE if (f.name in self.letters[k]) == f.positive else FALSE
        elif isinstance(f, And):
            node = TRUE
            for a in f.args:
                node = bdd.and_(node, self.progress_formula(a, k))
                if node == FALSE:
                    break
        elif isinstance(f, Or):
            node = FALSE
            for a in f.args:
                node = bdd.or_(node, self.progress_formula(a, k))
                if node == TRUE:
                    break
        elif isinstance(f, Next):
            node = self.node_of(f.arg)
        elif isinstance(f, Glob):
            node = bdd.and_(self.progress_formula(f.arg, k), self.node_of(f))
        else:
            raise TypeError(f"not in negation normal form: {f!r}")
        self._prog[key] = node
        return node

    def step(self, state: int, k: int) -> int:
        subst = self._subst[k]

        def substitute(var: int) -> int:
            node = subst.get(var)
            if node is None:
                node = self.progress_formula(self.bdd.variables[var], k)
                subst[var] = node
            return node

        return self.bdd.compose(state, substitute, self._compose_memo[k])


def compile_formula(
    f,
    input_aps: Sequence[str],
    output_aps: Sequence[str],
    max_states: int = 2**20,
) -> SafetyAutomaton:
    """Deterministic safety automaton for the prefixes of the models of ``f``.

    States are canonical progression states (BDDs over literals and ``X``/``G``
    subformulas). The unsatisfiable state is the sink; liveness is computed
    afterwards so that doomed states are rejected too.
    """
    if isinstance(f, str):
        f = parse(f)
    overlap = set(input_aps) & set(output_aps)
    if overlap:
        raise FormulaError(f"propositions declared as both input and output: {sorted(overlap)}")
    unknown = atoms(f) - set(input_aps) - set(output_aps)
    if unknown:
        raise FormulaError(f"undeclared propositions {sorted(unknown)}")
    sigma, sigma_truth = valuation_alphabet(input_aps)
    gamma, gamma_truth = valuation_alphabet(output_aps)
    letters = [sigma_truth[a] | gamma_truth[g] for a in sigma for g in gamma]
    comp = _Compiler(f, letters)

    index = {FALSE: 0}
    order = [FALSE]
    if comp.root not in index:
        index[comp.root] = len(order)
        order.append(comp.root)
    table: list[list[int]] = [[0] * len(letters)]
    i = 1
    while i < len(order):
        node = order[i]
        row = []
        for k in range(len(letters)):
            nxt = comp.step(node, k)
            idx = index.get(nxt)
            if idx is None:
                idx = len(order)
                if idx >= max_states:
                    raise StateLimitError(f"more than {max_states} progression states")
                index[nxt] = idx
                order.append(nxt)
            row.append(idx)
        table.append(row)
        i += 1
    labels = ["false"] + [f"s{j}" for j in range(1, len(order))]
    return SafetyAutomaton(sigma, gamma, table, index[comp.root], 0, labels)


# -- independent bounded semantics ---------------------------------------------------

def _weak_holds(f, word: Sequence[frozenset], i: int, memo: dict) -> bool:
    """Finite-word semantics where every position past the end satisfies everything."""
    if i >= len(word):
        return True
    key = (id(f), i)
    cached = memo.get(key)
    if cached is not None:
        return cached
    if isinstance(f, Const):
        result = f.value
    elif isinstance(f, Lit):
        result = (f.name in word[i]) == f.positive
    elif isinstance(f, And):
        result = all(_weak_holds(a, word, i, memo) for a in f.args)
    elif isinstance(f, Or):
        result = any(_weak_holds(a, word, i, memo) for a in f.args)
    elif isinstance(f, Next):
        result = _weak_holds(f.arg, word, i + 1, memo)
    elif isinstance(f, Glob):
        result = all(_weak_holds(f.arg, word, j, memo) for j in range(i, len(word)))
    else:
        raise TypeError(f"not in negation normal form: {f!r}")
    memo[key] = result
    return result


def weakly_satisfies(f, word: Sequence[frozenset]) -> bool:
    return _weak_holds(f, word, 0, {})


def semantic_check(
    f,
    w: Sequence[tuple[str, str]],
    input_aps: Sequence[str],
    output_aps: Sequence[str],
    horizon: int,
) -> bool | None:
    """Whether ``w`` extends to a word of length ``horizon`` that weakly satisfies ``f``.

    Extensions are enumerated depth first; a branch is cut as soon as its
    prefix already fails, which is sound because weak truth can only be lost by
    extending a word. Returns ``None`` when ``horizon < len(w)``.
    """
    if isinstance(f, str):
        f = parse(f)
    if horizon < len(w):
        return None
    _, sigma_truth = valuation_alphabet(input_aps)
    _, gamma_truth = valuation_alphabet(output_aps)
    word = [sigma_truth[a] | gamma_truth[g] for a, g in w]
    letters = _letters(tuple(input_aps), tuple(output_aps))

    def search(prefix: list[frozenset]) -> bool:
        if not weakly_satisfies(f, prefix):
            return False
        if len(prefix) == horizon:
            return True
        for letter in letters:
            prefix.append(letter)
            found = search(prefix)
            prefix.pop()
            if found:
                return True
        return False

    return search(word)


@lru_cache(maxsize=None)
def _letters(input_aps: tuple, output_aps: tuple) -> tuple[frozenset, ...]:
    _, s = valuation_alphabet(input_aps)
    _, g = valuation_alphabet(output_aps)
    return tuple(a | b for a in s.values() for b in g.values())

