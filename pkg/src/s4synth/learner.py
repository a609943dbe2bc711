"""Learning a symbolic safety transducer from symbolic queries.

The learner keeps a FIFO of candidate observation tables. Each scheduler step
advances one table by a single action and moves on to the next table, so a
branch that never converges cannot starve the others. A table is replaced by
narrowed copies whenever a symbolic membership query comes back empty.

Table entries are stored as bit masks over the output alphabet. The initial
entry uses an extra bit, which makes it the top element of the subset order:
every output set is contained in it and it is contained only in itself.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .core import (
    STAR,
    Alphabet,
    BiWord,
    SymbolicTransducer,
    SymbolicWord,
    entry_subset,
    format_biword,
    format_word,
    inputs_of,
)
from .oracle import SmqAnswer, Teacher

Word = tuple


def row_covers(a: Sequence, b: Sequence) -> bool:
    """Row ``a`` covers row ``b`` when each entry of ``a`` is a subset of ``b``'s.

    Entries are frozensets or :data:`STAR`; ``None`` marks a blank cell.
    """
    if len(a) != len(b):
        raise ValueError("rows have different lengths")
    for x, y in zip(a, b):
        if x is None or y is None:
            raise ValueError("cannot compare rows with blank cells")
        if not entry_subset(x, y):
            return False
    return True


def find_shortest_ce(w: BiWord, teacher: Teacher) -> BiWord:
    """Shortest prefix of ``w`` rejected by a membership query."""
    for k in range(1, len(w) + 1):
        if not teacher.mq(w[:k]):
            return w[:k]
    raise ValueError(f"{format_biword(w)} is not a counterexample")


def infixes(v: Sequence[str]) -> set[Word]:
    v = tuple(v)
    return {v[i:j] for i in range(len(v) + 1) for j in range(i, len(v) + 1)}


class ObservationTable:
    """Rows, columns and a word-indexed entry map, plus basis and cover map."""

    def __init__(self, inputs: Alphabet, outputs: Alphabet, ident: int = 0) -> None:
        self.inputs = inputs
        self.outputs = outputs
        self.ident = ident
        self.parent: int | None = None
        self.width = len(outputs) + 1
        self.full = (1 << len(outputs)) - 1
        self.star = (1 << self.width) - 1
        self._bit = {g: 1 << j for j, g in enumerate(outputs)}
        self.rows: set[Word] = {()}
        self.cols: list[Word] = [()]
        self._colset: set[Word] = {()}
        self.entries: dict[Word, int] = {(): self.star}
        self.basis: set[Word] = {()}
        self.cover: dict[Word, frozenset] = {(): frozenset([()])}
        self.dirty = True
        self._rows_cache: dict[Word, int] = {}

    # -- encoding -----------------------------------------------------------
    def key(self, word: Sequence[str]) -> tuple:
        return self.inputs.word_key(word)

    def mask_of(self, outputs: Iterable[str]) -> int:
        m = 0
        for g in outputs:
            m |= self._bit[g]
        return m

    def set_of(self, mask: int):
        if mask == self.star:
            return STAR
        return frozenset(g for g in self.outputs if mask & self._bit[g])

    def entry(self, word: Sequence[str]):
        """Entry at ``word`` as a frozenset, :data:`STAR`, or ``None`` if blank."""
        mask = self.entries.get(tuple(word))
        return None if mask is None else self.set_of(mask)

    def row(self, r: Sequence[str]) -> list:
        r = tuple(r)
        return [self.entry(r + c) for c in self.cols]

    # -- mutation -----------------------------------------------------------
    def _touch(self) -> None:
        self.dirty = True
        self._rows_cache.clear()

    def set_entry(self, word: Word, mask: int) -> None:
        if not word:
            raise ValueError("the entry at the empty word is fixed")
        if mask == 0 or mask & ~self.full:
            raise ValueError("entries must be nonempty output sets")
        self.entries[word] = mask
        self._touch()

    def narrow(self, word: Word, mask: int) -> None:
        """Set the entry at ``word`` and blank every strictly longer extension."""
        n = len(word)
        for w in [w for w in self.entries if len(w) > n and w[:n] == word]:
            del self.entries[w]
        self.set_entry(word, mask)

    def add_rows(self, words: Iterable[Word]) -> None:
        for w in words:
            w = tuple(w)
            for k in range(len(w) + 1):
                self.rows.add(w[:k])
        self._touch()

    def add_columns(self, words: Iterable[Word]) -> list[Word]:
        added = []
        for w in words:
            w = tuple(w)
            for k in range(len(w) + 1):
                if w[:k] not in self._colset:
                    self._colset.add(w[:k])
                    added.append(w[:k])
        if added:
            self.cols = sorted(self._colset, key=self.key)
            self._touch()
        return added

    def copy(self, ident: int) -> "ObservationTable":
        t = ObservationTable.__new__(ObservationTable)
        t.__dict__.update(self.__dict__)
        t.ident = ident
        t.parent = self.ident
        t.rows = set(self.rows)
        t.cols = list(self.cols)
        t._colset = set(self._colset)
        t.entries = dict(self.entries)
        t.basis = set(self.basis)
        t.cover = dict(self.cover)
        t._rows_cache = {}
        return t

    # -- queries on the table -------------------------------------------------
    def blank_cells(self) -> set[Word]:
        return {r + c for r in self.rows for c in self.cols if r + c not in self.entries}

    def is_filled(self) -> bool:
        entries = self.entries
        return all(r + c in entries for r in self.rows for c in self.cols)

    def row_mask(self, r: Word) -> int:
        """Whole row packed into one integer, ``width`` bits per column."""
        cached = self._rows_cache.get(r)
        if cached is not None:
            return cached
        mask = 0
        shift = 0
        entries = self.entries
        for c in self.cols:
            mask |= entries[r + c] << shift
            shift += self.width
        self._rows_cache[r] = mask
        return mask

    def symbolic_word_of(self, v: Sequence[str]) -> SymbolicWord:
        v = tuple(v)
        pairs = []
        for i in range(1, len(v) + 1):
            mask = self.entries.get(v[:i])
            if mask is None:
                raise ValueError(f"blank entry at {format_word(v[:i])}")
            pairs.append((v[i - 1], self.set_of(mask)))
        return SymbolicWord(tuple(pairs))

    def extensions_needed(self) -> list[Word]:
        return [b + (a,) for b in self.basis for a in self.inputs if b + (a,) not in self.rows]

    def rebase(self) -> None:
        """Recompute a minimal basis and the cover map of every row."""
        masks = {r: self.row_mask(r) for r in self.rows}
        classes: dict[int, list[Word]] = {}
        for r, m in masks.items():
            classes.setdefault(m, []).append(r)
        distinct = list(classes)
        minimal = [
            m for m in distinct if not any(o != m and (o & ~m) == 0 for o in distinct)
        ]
        basis = {min(classes[m], key=self.key) for m in minimal}
        basis.add(())
        basis_masks = [(b, masks[b]) for b in basis]
        covered_by: dict[int, frozenset] = {}
        for m in distinct:
            covered_by[m] = frozenset(b for b, bm in basis_masks if (bm & ~m) == 0)
        self.basis = basis
        self.cover = {r: covered_by[m] for r, m in masks.items()}
        self.dirty = False

    def is_closed(self) -> bool:
        if not self.is_filled():
            return False
        basis_masks = [self.row_mask(b) for b in self.basis]
        for b in self.basis:
            for a in self.inputs:
                ext = b + (a,)
                if ext not in self.rows:
                    return False
                m = self.row_mask(ext)
                if not any((bm & ~m) == 0 for bm in basis_masks):
                    return False
        return True

    def extract(self) -> SymbolicTransducer:
        """Transducer whose states are the basis rows."""
        if not self.is_closed():
            raise RuntimeError(f"table T{self.ident} is not closed")
        states = sorted(self.basis, key=self.key)
        basis_masks = [(b, self.row_mask(b)) for b in states]
        delta = {}
        for b in states:
            for a in self.inputs:
                m = self.row_mask(b + (a,))
                delta[(b, a)] = frozenset(q for q, qm in basis_masks if (qm & ~m) == 0)
        eta = {b: self.set_of(self.entries[b]) for b in states if b}
        return SymbolicTransducer(self.inputs, self.outputs, states, (), delta, eta)

    def signature(self) -> tuple:
        return (
            frozenset(self.rows),
            tuple(self.cols),
            frozenset(self.entries.items()),
        )

    def render(self) -> str:
        """Plain-text rendering, one line per row."""
        def cell(mask: int | None) -> str:
            if mask is None:
                return "__"
            if mask == self.star:
                return "*"
            return "{" + ",".join(g for g in self.outputs if mask & self._bit[g]) + "}"

        header = ["T%d" % self.ident] + [format_word(c) for c in self.cols]
        lines = ["\t".join(header)]
        for r in sorted(self.rows, key=self.key):
            mark = "B " if r in self.basis else "  "
            cells = [cell(self.entries.get(r + c)) for c in self.cols]
            lines.append("\t".join([mark + format_word(r)] + cells))
        return "\n".join(lines)


# -- run bookkeeping -------------------------------------------------------------

class Status(str, Enum):
    SYNTHESIZED = "synthesized"
    UNREALIZABLE = "unrealizable"
    EXHAUSTED = "resource-exhausted"


class Phase(str, Enum):
    FILLING = "filling"
    PROCESSING_CE = "processing-ce"


@dataclass
class LearnerConfig:
    ce_mode: str = "basic"
    # "alphabet" starts with columns {ε} ∪ Σ; "epsilon" starts with {ε} only
    initial_columns: str = "alphabet"
    max_tables: int | None = 200_000
    max_queries: int | None = None
    max_steps: int | None = None
    dedup: bool = False
    trace: bool = False

    def __post_init__(self) -> None:
        if self.ce_mode not in ("basic", "optimized"):
            raise ValueError(f"unknown counterexample mode {self.ce_mode!r}")
        if self.initial_columns not in ("alphabet", "epsilon"):
            raise ValueError(f"unknown initial column choice {self.initial_columns!r}")


@dataclass
class RunStats:
    mq: int = 0
    smq: int = 0
    scq: int = 0
    tables_generated: int = 0
    tables_explored: int = 0
    splits: int = 0
    result_states: int | None = None
    learner_seconds: float = 0.0
    oracle_seconds: float = 0.0
    steps: int = 0
    counterexamples: int = 0
    ce_rounds: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class LearnResult:
    status: Status
    stats: RunStats
    transducer: SymbolicTransducer | None = None
    table: ObservationTable | None = None
    trace: list[str] = field(default_factory=list)

    @property
    def synthesized(self) -> bool:
        return self.status is Status.SYNTHESIZED


@dataclass
class TableTask:
    table: ObservationTable
    phase: Phase = Phase.FILLING
    pending: deque | None = None
    counterexample: BiWord | None = None
    conjecture: SymbolicTransducer | None = None
    # |B| and the total cover size recorded when a counterexample is processed
    snapshot: tuple[int, int] | None = None
    stepped: bool = False


class _Done(Exception):
    def __init__(self, transducer: SymbolicTransducer, table: ObservationTable) -> None:
        self.transducer = transducer
        self.table = table


class Learner:
    def __init__(self, teacher: Teacher, config: LearnerConfig | None = None) -> None:
        self.teacher = teacher
        self.config = config or LearnerConfig()
        self.stats = RunStats()
        self.trace: list[str] = []
        self._next_id = 0
        self._seen: set = set()

    def _log(self, table: ObservationTable, phase: str, message: str) -> None:
        if self.config.trace:
            self.trace.append(f"T{table.ident}\t{phase}\t{message}")

    def _new_id(self) -> int:
        ident = self._next_id
        self._next_id += 1
        self.stats.tables_generated += 1
        return ident

    def initial_table(self) -> ObservationTable:
        t = ObservationTable(self.teacher.inputs, self.teacher.outputs, self._new_id())
        if self.config.initial_columns == "alphabet":
            t.add_columns((a,) for a in t.inputs)
        return t

    # -- the scheduler --------------------------------------------------------
    def run(self) -> LearnResult:
        teacher_before = self.teacher.stats.snapshot()
        start = time.perf_counter()
        tasks: deque[TableTask] = deque([TableTask(self.initial_table())])
        status = Status.UNREALIZABLE
        transducer = None
        final_table = None
        try:
            while tasks:
                if self._exhausted(teacher_before):
                    status = Status.EXHAUSTED
                    break
                task = tasks.popleft()
                if not task.stepped:
                    task.stepped = True
                    self.stats.tables_explored += 1
                self.stats.steps += 1
                replacement = self._step(task)
                if replacement is None:
                    tasks.append(task)
                else:
                    tasks.extend(replacement)
        except _Done as done:
            status = Status.SYNTHESIZED
            transducer = done.transducer
            final_table = done.table
        finally:
            after = self.teacher.stats.snapshot()
            self.stats.mq = after["mq"] - teacher_before["mq"]
            self.stats.smq = after["smq"] - teacher_before["smq"]
            self.stats.scq = after["scq"] - teacher_before["scq"]
            self.stats.oracle_seconds = after["oracle_seconds"] - teacher_before["oracle_seconds"]
            self.stats.learner_seconds = max(
                0.0, time.perf_counter() - start - self.stats.oracle_seconds
            )
        if transducer is not None:
            self.stats.result_states = len(transducer.states)
        return LearnResult(status, self.stats, transducer, final_table, self.trace)

    def _exhausted(self, before: dict) -> bool:
        cfg = self.config
        if cfg.max_tables is not None and self.stats.tables_generated > cfg.max_tables:
            return True
        if cfg.max_steps is not None and self.stats.steps >= cfg.max_steps:
            return True
        if cfg.max_queries is not None:
            now = self.teacher.stats.snapshot()
            used = sum(now[k] - before[k] for k in ("mq", "smq", "scq"))
            if used >= cfg.max_queries:
                return True
        return False

    def _step(self, task: TableTask) -> list[TableTask] | None:
        """Advance one task by one action. Returns replacement tasks if it died."""
        if task.phase is Phase.PROCESSING_CE:
            self._process_counterexample(task)
            return None
        t = task.table
        if task.pending is None:
            if t.is_filled():
                if t.dirty:
                    self._rebase(task)
                if t.is_closed():
                    self._conjecture(task)
                    return None
            new_rows = t.extensions_needed()
            t.add_rows(new_rows)
            cells = t.blank_cells()
            task.pending = deque(sorted(cells, key=t.key))
        if task.pending:
            word = task.pending.popleft()
            query = t.symbolic_word_of(word[:-1]).with_hole(word[-1])
            answer = self.teacher.smq(query)
            self._log(t, "fill", f"{query} -> {_show_answer(t, answer)}")
            if not answer.outputs:
                self.stats.splits += 1
                return self._split(task, answer.counterexample)
            t.set_entry(word, t.mask_of(answer.outputs))
        if not task.pending:
            task.pending = None
            self._rebase(task)
        return None

    def _rebase(self, task: TableTask) -> None:
        t = task.table
        t.rebase()
        self._log(t, "rebase", "basis " + ", ".join(format_word(b) for b in sorted(t.basis, key=t.key)))
        if task.snapshot is not None:
            basis_before, cover_before = task.snapshot
            cover_now = sum(len(v) for v in t.cover.values())
            if len(t.basis) > basis_before:
                outcome = "basis-grew"
            elif cover_now < cover_before:
                outcome = "cover-shrank"
            else:
                outcome = "stalled"
            self.stats.ce_rounds.append((t.ident, outcome))
            task.snapshot = None

    def _conjecture(self, task: TableTask) -> None:
        t = task.table
        conjecture = t.extract()
        answer = self.teacher.scq(conjecture)
        if answer.ok:
            self._log(t, "scq", f"{len(conjecture.states)} states -> ok")
            raise _Done(conjecture, t)
        self._log(t, "scq", f"{len(conjecture.states)} states -> {format_biword(answer.counterexample)}")
        task.phase = Phase.PROCESSING_CE
        task.counterexample = answer.counterexample
        task.conjecture = conjecture

    def _process_counterexample(self, task: TableTask) -> None:
        t = task.table
        u = find_shortest_ce(task.counterexample, self.teacher)
        self.stats.counterexamples += 1
        task.snapshot = (len(t.basis), sum(len(v) for v in t.cover.values()))
        if self.config.ce_mode == "basic":
            columns = infixes(inputs_of(u))
        else:
            columns = [self._ladder_column(t, task.conjecture, u)]
        added = t.add_columns(columns)
        if not added and self.config.ce_mode == "optimized":
            # the ladder column is already present; fall back to every infix of u
            added = t.add_columns(infixes(inputs_of(u)))
        self._log(t, "ce", f"{format_biword(u)} adds columns " + ", ".join(format_word(c) for c in added))
        task.phase = Phase.FILLING
        task.pending = None
        task.counterexample = None
        task.conjecture = None

    def _ladder_column(self, t: ObservationTable, conjecture: SymbolicTransducer, u: BiWord) -> Word:
        """Column that separates the conjecture run from the target along ``u``."""
        run = _least_run(conjecture, u)
        k = len(u)
        last = u[-1][1]

        def theta(i: int) -> frozenset:
            if i == k:
                return frozenset([last])
            pairs = t.symbolic_word_of(run[i]).pairs
            pairs += tuple((a, frozenset([g])) for a, g in u[i : k - 1])
            answer = self.teacher.smq(SymbolicWord(pairs, u[k - 1][0]))
            return answer.outputs

        current = theta(0)
        for i in range(k):
            following = theta(i + 1)
            if last not in current and last in following:
                # rows s_{i+1} and s_i.σ_{i+1} disagree on the remaining inputs
                return inputs_of(u[i + 1 :])
            current = following
        raise RuntimeError("counterexample ladder found no separating index")

    def _split(self, task: TableTask, w: BiWord) -> list[TableTask]:
        t = task.table
        if task.snapshot is not None:
            self.stats.ce_rounds.append((t.ident, "removed"))
            task.snapshot = None
        u = find_shortest_ce(w, self.teacher)
        m = len(w) - 1
        children = []
        for k in range(1, len(u) + 1):
            prefix = inputs_of(w[:k])
            dropped = t.mask_of([w[k - 1][1]])
            base = t.full if k == m + 1 else t.entries[prefix]
            theta = base & ~dropped
            if theta == 0:
                self._log(t, "split", f"k={k} infeasible")
                continue
            child = t.copy(-1)
            child.narrow(prefix, theta)
            if self.config.dedup:
                sig = child.signature()
                if sig in self._seen:
                    continue
                self._seen.add(sig)
            child.ident = self._new_id()
            self._log(t, "split", f"k={k} -> T{child.ident} with M({format_word(prefix)}) = {_show_set(t, child.entry(prefix))}")
            children.append(TableTask(child))
        return children


def _least_run(conjecture: SymbolicTransducer, u: BiWord) -> list:
    """Least run of the conjecture generating ``u``, as a list of states s0..sk."""
    layers = [frozenset([conjecture.initial])]
    for a, g in u:
        layers.append(frozenset(
            p for q in layers[-1] for p in conjecture.delta[(q, a)] if g in conjecture.eta[p]
        ))
    if not layers[-1]:
        raise ValueError("the conjecture does not generate the counterexample")
    run = [conjecture.least_state(layers[-1])]
    for i in range(len(u) - 1, -1, -1):
        a = u[i][0]
        options = [q for q in layers[i] if run[-1] in conjecture.delta[(q, a)]]
        run.append(conjecture.least_state(options))
    run.reverse()
    return run


def _show_set(t: ObservationTable, outputs) -> str:
    return "{" + ",".join(t.outputs.sorted(outputs)) + "}"


def _show_answer(t: ObservationTable, answer: SmqAnswer) -> str:
    if answer.outputs:
        return _show_set(t, answer.outputs)
    return "empty, witness " + format_biword(answer.counterexample)


def s4(teacher: Teacher, config: LearnerConfig | None = None) -> LearnResult:
    """Learn a symbolic transducer contained in the teacher's target."""
    return Learner(teacher, config).run()
