"""Built-in benchmark targets and the spec-file format.

A spec file is a flat ``key = value`` text file with optional list sections::

    # request/grant arbiter
    name = arbiter
    formula = G(r -> (g | X g))
    ce_mode = basic

    [inputs]
    r

    [outputs]
    g

Exactly one of ``formula``, ``builtin`` or ``automaton`` names the target.
For formulas the sections list atomic propositions; for automata they may
list the expected symbols. Builtins take parameters as ``param.n = 3``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Callable

from .core import SafetyAutomaton, load_json
from .learner import LearnerConfig
from .ltl import compile_formula, parse
from .oracle import AutomatonTeacher, IrregularTeacher, Teacher, bespoke_teacher


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    description: str = ""
    input_aps: tuple[str, ...] = ()
    output_aps: tuple[str, ...] = ()
    formula: str | None = None
    builtin: str | None = None
    automaton: str | None = None
    params: dict = field(default_factory=dict)
    ce_mode: str = "basic"
    max_tables: int | None = 200_000
    max_queries: int | None = None
    max_steps: int | None = None
    dedup: bool = False
    verify_depth: int | None = None
    scq_extra_depth: int = 4

    def __post_init__(self) -> None:
        kinds = [k for k in (self.formula, self.builtin, self.automaton) if k is not None]
        if len(kinds) != 1:
            raise SpecError(f"spec {self.name!r} must name exactly one target kind")

    def learner_config(self, **overrides) -> LearnerConfig:
        base = dict(
            ce_mode=self.ce_mode,
            max_tables=self.max_tables,
            max_queries=self.max_queries,
            max_steps=self.max_steps,
            dedup=self.dedup,
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return LearnerConfig(**base)

    def resolved(self) -> "ExperimentSpec":
        """Replace a parameterized builtin by its concrete formula spec."""
        if self.builtin is None:
            return self
        entry = _BUILTINS.get(self.builtin)
        if entry is None:
            raise SpecError(f"unknown builtin {self.builtin!r}")
        if entry.make is None:
            return self
        n = int(self.params.get("n", entry.default_n))
        if n < entry.min_n:
            raise SpecError(f"{self.builtin} needs n >= {entry.min_n}, got {n}")
        ins, outs, formula = entry.make(n)
        return replace(
            self,
            builtin=None,
            formula=formula,
            input_aps=ins,
            output_aps=outs,
            params={"n": n},
        )

    def automaton_target(self) -> SafetyAutomaton | None:
        spec = self.resolved()
        if spec.formula is not None:
            return compile_formula(parse(spec.formula), spec.input_aps, spec.output_aps)
        if spec.automaton is not None:
            obj = load_json(spec.automaton)
            if not isinstance(obj, SafetyAutomaton):
                raise SpecError(f"{spec.automaton} does not hold a safety automaton")
            _check_symbols(spec, obj)
            return obj
        if spec.builtin == "experiment-4":
            return bespoke_teacher("experiment4").automaton
        return None

    def teacher(self) -> Teacher:
        spec = self.resolved()
        if spec.builtin == "experiment-6":
            return IrregularTeacher(extra_depth=spec.scq_extra_depth)
        automaton = spec.automaton_target()
        if automaton is None:
            raise SpecError(f"no teacher for {spec.name!r}")
        return AutomatonTeacher(automaton)


def _check_symbols(spec: ExperimentSpec, d: SafetyAutomaton) -> None:
    if spec.input_aps and tuple(spec.input_aps) != d.inputs.symbols:
        raise SpecError(f"declared inputs {spec.input_aps} differ from automaton's {d.inputs.symbols}")
    if spec.output_aps and tuple(spec.output_aps) != d.outputs.symbols:
        raise SpecError(f"declared outputs {spec.output_aps} differ from automaton's {d.outputs.symbols}")


# -- formula builders ----------------------------------------------------------------

def _xn(n: int, body: str) -> str:
    return body if n == 0 else f"X[{n}] ({body})"


def _mutex(n: int) -> list[str]:
    return [f"G(!g{i} | !g{j})" for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def arbiter_deadline(n: int) -> tuple[tuple, tuple, str]:
    """n clients; each request is granted within n-1 steps; grants exclusive."""
    ins = tuple(f"r{i}" for i in range(1, n + 1))
    outs = tuple(f"g{i}" for i in range(1, n + 1))
    parts = []
    for i in range(1, n + 1):
        window = " | ".join(_xn(t, f"g{i}") for t in range(n))
        parts.append(f"G(r{i} -> ({window}))")
    parts += _mutex(n)
    return ins, outs, " & ".join(parts)


def arbiter_handover(n: int) -> tuple[tuple, tuple, str]:
    """n clients; a dropped request releases its grant; open requests are served next step."""
    ins = tuple(f"r{i}" for i in range(1, n + 1))
    outs = tuple(f"g{i}" for i in range(1, n + 1))
    parts = [f"G((!r{i} & g{i}) -> X !g{i})" for i in range(1, n + 1)]
    any_req = " | ".join(f"r{i}" for i in range(1, n + 1))
    served = " | ".join(f"(r{i} & X g{i})" for i in range(1, n + 1))
    parts.append(f"G(({any_req}) -> ({served}))")
    parts += _mutex(n)
    return ins, outs, " & ".join(parts)


def delayed_echo(n: int) -> tuple[tuple, tuple, str]:
    """Grants echo requests with a delay of n steps after an initial handshake."""
    parts = [f"(g -> {_xn(n, 'g')})"]
    parts += [_xn(i, "r <-> g") for i in range(1, n)]
    parts.append(f"({_xn(n - 1, 'g')} <-> {_xn(n, 'g')})")
    parts.append(_xn(n + 1, f"G(r <-> {_xn(n, 'g')})"))
    return ("r",), ("g",), " & ".join(parts)


def fib(k: int) -> int:
    a, b = 1, 1
    for _ in range(k - 1):
        a, b = b, a + b
    return a


def fibonacci_lock(n: int) -> tuple[tuple, tuple, str]:
    """Grants follow requests only after a Fibonacci-timed unlock sequence."""
    terms = [_xn(fib(i + 2), "r") for i in range(1, n)]
    init = " & ".join(terms) if terms else "true"
    follow = _xn(fib(n + 1), "G(r <-> g)")
    return ("r",), ("g",), f"(({init}) -> {follow}) & (!({init}) -> G !g)"


@dataclass(frozen=True)
class _Builtin:
    description: str
    make: Callable[[int], tuple] | None = None
    default_n: int = 1
    min_n: int = 1


_BUILTINS: dict[str, _Builtin] = {
    "experiment-4": _Builtin("single input; output 1 three times, then 2 forever"),
    "experiment-6": _Builtin("irregular target: 0^(2n-1) 1 0* after a^n b^n, 0* otherwise, or 2*"),
    "experiment-7": _Builtin("n-client arbiter with deadline n-1 and exclusive grants", arbiter_deadline, 2, 2),
    "experiment-8": _Builtin("n-client arbiter with next-step service and exclusive grants", arbiter_handover, 2, 1),
    "experiment-9": _Builtin("grants echo requests with delay n", delayed_echo, 1, 1),
    "experiment-10": _Builtin("Fibonacci combination lock of length n", fibonacci_lock, 1, 1),
}


def registry() -> list[ExperimentSpec]:
    """The ten benchmark targets with their default parameters."""
    specs = [
        ExperimentSpec(
            "experiment-1",
            "each request is granted now or in the next step",
            ("r",), ("g",),
            formula="G(r -> (g | X g))",
        ),
        ExperimentSpec(
            "experiment-2",
            "as experiment-1, and a grant is always followed by no grant",
            ("r",), ("g",),
            formula="G(r -> (g | X g)) & G(g -> X !g)",
        ),
        ExperimentSpec(
            "experiment-3",
            "from the fourth step on, every request is granted in the next step",
            ("r",), ("g",),
            formula="X[4] G(r -> X g)",
        ),
        ExperimentSpec("experiment-4", _BUILTINS["experiment-4"].description, builtin="experiment-4"),
        ExperimentSpec(
            "experiment-5",
            "requests are granted at once and the output pattern g g !g never occurs",
            ("r",), ("g",),
            formula="G(r -> g) & G !(g & X g & X[2] !g)",
        ),
        ExperimentSpec("experiment-6", _BUILTINS["experiment-6"].description, builtin="experiment-6"),
    ]
    for name in ("experiment-7", "experiment-8", "experiment-9", "experiment-10"):
        b = _BUILTINS[name]
        specs.append(ExperimentSpec(name, b.description, builtin=name, params={"n": b.default_n}))
    return specs


def lookup(name: str, n: int | None = None) -> ExperimentSpec:
    """Find a builtin by name (``experiment-7``, ``7`` or ``7-3`` for n=3)."""
    key = name
    if "-" in name and not name.startswith("experiment"):
        key, n_text = name.split("-", 1)
        n = int(n_text)
    if not key.startswith("experiment-"):
        key = f"experiment-{key}"
    for spec in registry():
        if spec.name == key:
            if n is not None:
                if spec.builtin is None or _BUILTINS[spec.builtin].make is None:
                    raise SpecError(f"{key} takes no parameter")
                spec = replace(spec, params={"n": n})
            return spec
    raise SpecError(f"unknown builtin {name!r}")


def is_builtin(name: str) -> bool:
    try:
        lookup(name)
    except (SpecError, ValueError):
        return False
    return True


_INT_KEYS = {"max_tables", "max_queries", "max_steps", "verify_depth", "scq_extra_depth"}


def parse_spec_text(text: str, base_dir: str = ".") -> ExperimentSpec:
    fields: dict = {}
    params: dict = {}
    lists: dict[str, list[str]] = {"inputs": [], "outputs": []}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in lists:
                raise SpecError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" in line:
            key, value = (part.strip() for part in line.split("=", 1))
            section = None
            if key.startswith("param."):
                params[key[len("param."):]] = int(value)
            elif key in _INT_KEYS:
                fields[key] = int(value)
            elif key == "dedup":
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise SpecError(f"line {lineno}: dedup expects a boolean, got {value!r}")
                fields[key] = value.lower() in ("true", "1", "yes")
            elif key in ("name", "description", "formula", "builtin", "automaton", "ce_mode"):
                fields[key] = value
            else:
                raise SpecError(f"line {lineno}: unknown key {key!r}")
            continue
        if section is None:
            raise SpecError(f"line {lineno}: expected 'key = value' or a list item inside a section")
        lists[section].extend(line.replace(",", " ").split())
    if "automaton" in fields and not os.path.isabs(fields["automaton"]):
        fields["automaton"] = os.path.join(base_dir, fields["automaton"])
    if "builtin" in fields:
        if "formula" in fields or "automaton" in fields:
            raise SpecError("a spec must name exactly one target kind")
        known = lookup(fields["builtin"])
        fields["builtin"] = known.builtin
        if known.builtin is None:
            # registry entries 1, 2, 3 and 5 are plain formulas
            del fields["builtin"]
            fields["formula"] = known.formula
            lists["inputs"] = lists["inputs"] or list(known.input_aps)
            lists["outputs"] = lists["outputs"] or list(known.output_aps)
            fields.setdefault("name", known.name)
    fields.setdefault("name", fields.get("builtin") or "spec")
    return ExperimentSpec(
        input_aps=tuple(lists["inputs"]),
        output_aps=tuple(lists["outputs"]),
        params=params,
        **fields,
    )


def load_spec(path_or_name: str) -> ExperimentSpec:
    """Read a spec file, or resolve a builtin name such as ``experiment-1`` or ``7-2``."""
    if os.path.exists(path_or_name):
        with open(path_or_name, encoding="utf-8") as fh:
            return parse_spec_text(fh.read(), os.path.dirname(os.path.abspath(path_or_name)))
    return lookup(path_or_name)


def bench_suite(dedup: bool = True) -> list[tuple[str, ExperimentSpec]]:
    """Experiments run by ``bench --all`` with their table labels.

    Duplicate-table pruning is on by default here: without it the split tree of
    the largest Fibonacci lock (n = 3) grows past 400k tables.
    """
    suite = []
    for spec in registry()[:6]:
        suite.append((spec.name.split("-", 1)[1], spec))
    suite.append(("7-2", lookup("experiment-7", 2)))
    suite.append(("8-2", lookup("experiment-8", 2)))
    for n in range(1, 5):
        suite.append((f"9-{n}", lookup("experiment-9", n)))
    for n in range(1, 4):
        suite.append((f"10-{n}", lookup("experiment-10", n)))
    return [(label, replace(spec, dedup=dedup)) for label, spec in suite]
