"""Minimal reduced ordered BDD used to canonicalize progression states.

Nodes are integers. ``0`` and ``1`` are the constants; every other node is a
hash-consed triple ``(var, low, high)``. Variables are ordered by index and new
variables are always appended at the end, so existing nodes stay reduced and
ordered.
"""

from __future__ import annotations

from typing import Callable, Hashable

FALSE = 0
TRUE = 1


class BDD:
    def __init__(self) -> None:
        self._nodes: list[tuple[int, int, int]] = [(-1, 0, 0), (-1, 1, 1)]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._ite_cache: dict[tuple[int, int, int], int] = {}
        self._var_index: dict[Hashable, int] = {}
        self.variables: list[Hashable] = []

    def __len__(self) -> int:
        return len(self._nodes)

    def var_of(self, node: int) -> int:
        return self._nodes[node][0]

    def low(self, node: int) -> int:
        return self._nodes[node][1]

    def high(self, node: int) -> int:
        return self._nodes[node][2]

    def variable(self, key: Hashable) -> int:
        """Node for the variable named ``key``, allocating it if new."""
        idx = self._var_index.get(key)
        if idx is None:
            idx = len(self.variables)
            self._var_index[key] = idx
            self.variables.append(key)
        return self._make(idx, FALSE, TRUE)

    def _make(self, var: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (var, low, high)
        node = self._unique.get(key)
        if node is None:
            node = len(self._nodes)
            self._nodes.append(key)
            self._unique[key] = node
        return node

    def ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE:
            return g
        if f == FALSE:
            return h
        if g == h:
            return g
        if g == TRUE and h == FALSE:
            return f
        key = (f, g, h)
        cached = self._ite_cache.get(key)
        if cached is not None:
            return cached
        nodes = self._nodes
        top = min(v for v in (nodes[f][0], nodes[g][0], nodes[h][0]) if v >= 0)
        f0, f1 = self._cofactors(f, top)
        g0, g1 = self._cofactors(g, top)
        h0, h1 = self._cofactors(h, top)
        result = self._make(top, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_cache[key] = result
        return result

    def _cofactors(self, node: int, var: int) -> tuple[int, int]:
        v, lo, hi = self._nodes[node]
        if v == var:
            return lo, hi
        return node, node

    def and_(self, f: int, g: int) -> int:
        return self.ite(f, g, FALSE)

    def or_(self, f: int, g: int) -> int:
        return self.ite(f, TRUE, g)

    def not_(self, f: int) -> int:
        return self.ite(f, FALSE, TRUE)

    def compose(self, node: int, substitute: Callable[[int], int], memo: dict[int, int]) -> int:
        """Replace every variable ``v`` by the node ``substitute(v)``."""
        if node <= TRUE:
            return node
        cached = memo.get(node)
        if cached is not None:
            return cached
        var, lo, hi = self._nodes[node]
        result = self.ite(
            substitute(var),
            self.compose(hi, substitute, memo),
            self.compose(lo, substitute, memo),
        )
        memo[node] = result
        return result

    def support(self, node: int) -> set[int]:
        seen: set[int] = set()
        out: set[int] = set()
        stack = [node]
        while stack:
            n = stack.pop()
            if n <= TRUE or n in seen:
                continue
            seen.add(n)
            var, lo, hi = self._nodes[n]
            out.add(var)
            stack.append(lo)
            stack.append(hi)
        return out

    def evaluate(self, node: int, assignment: Callable[[int], bool]) -> bool:
        while node > TRUE:
            var, lo, hi = self._nodes[node]
            node = hi if assignment(var) else lo
        return node == TRUE
