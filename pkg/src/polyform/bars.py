"""Succinct bar graphs.

Cells are numbered in canonical order, bar by bar from the bottom up, so a
bar graph of ``n`` cells is the bitstring ``S_G`` marking the lowest cell
of every bar.  Visibility needs a little more: bars are grouped into blocks
of at least ``k`` cells (``B_G`` marks block starts), a table answers
queries inside any block, and a Cartesian tree over the per-block minimum
bar sizes finds the weakest block between two others.

"Bar size" is a bar's cell count; "cell height" is a cell's 0-based
position inside its bar.  A bar holds a cell at height h iff its size is
at least h + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .bits import PLAIN, SPARSE, BitVector
from .errors import EmptyComposition, InvalidCell, InvalidK, ZeroBar
from .grid import Coord
from .treekit import COMPACT, OrdinalTree

MAX_K = 16


def pair_index(a: int, b: int, k: int) -> int:
    """Position of the pair ``a < b`` among all pairs of ``range(k)`` in lexicographic order."""
    return a * (2 * k - a - 1) // 2 + (b - a - 1)


def default_k(n: int) -> int:
    if n < 4:
        return 1
    return min(8, max(1, int(math.floor(math.log2(math.log2(n))))))


def _composition_of(code: int, k: int) -> list[int]:
    """Bar sizes of the size-``k`` bar graph whose bar-start bits are ``1`` followed by ``code``."""
    sizes = []
    run = 0
    for t in range(k):
        if t == 0 or (code >> (k - 1 - t)) & 1:
            if run:
                sizes.append(run)
            run = 1
        else:
            run += 1
    sizes.append(run)
    return sizes


@dataclass
class LookupTable:
    k: int
    vis: list[int] = field(repr=False)
    min_except_last: list[int] = field(repr=False)

    @property
    def entry_count(self) -> int:
        return len(self.vis)

    @property
    def bit_size(self) -> int:
        pairs = self.k * (self.k - 1) // 2
        return self.entry_count * (pairs + max(1, math.ceil(math.log2(self.k))) if self.k > 1 else 1)

    def visible(self, code: int, a: int, b: int) -> bool:
        if a == b:
            return True
        if a > b:
            a, b = b, a
        return bool((self.vis[code] >> pair_index(a, b, self.k)) & 1)


@lru_cache(maxsize=None)
def build_lookup(k: int) -> LookupTable:
    """Answers for every bar graph with ``k`` cells, indexed by its bar-start bits."""
    if not isinstance(k, int) or not 1 <= k <= MAX_K:
        raise InvalidK(f"k must be an integer in [1, {MAX_K}], got {k!r}")
    vis, mins = [], []
    for code in range(1 << (k - 1)):
        sizes = _composition_of(code, k)
        bar, height = [], []
        for b, s in enumerate(sizes):
            bar.extend([b] * s)
            height.extend(range(s))
        mask = 0
        for a in range(k):
            for c in range(a + 1, k):
                ba, bc, h = bar[a], bar[c], height[a]
                if ba == bc or (h == height[c] and all(s > h for s in sizes[ba + 1:bc])):
                    mask |= 1 << pair_index(a, c, k)
        vis.append(mask)
        # sizes fit in ceil(log2 k) bits; 0 means the graph has a single bar
        mins.append(min(sizes[:-1]) if len(sizes) > 1 else 0)
    return LookupTable(k, vis, mins)


def min_heap_parents(values: Sequence[int]) -> list[int]:
    """Parent of each 1-based position: the nearest earlier position with a value not larger (0 = root)."""
    parents = [0] * (len(values) + 1)
    stack: list[int] = []
    for i, v in enumerate(values, 1):
        while stack and values[stack[-1] - 1] > v:
            stack.pop()
        parents[i] = stack[-1] if stack else 0
        stack.append(i)
    return parents


def _heap_degrees(parents: list[int]) -> list[int]:
    """Level-order degrees of the tree with root 0 and children in index order."""
    kids: list[list[int]] = [[] for _ in parents]
    for i in range(1, len(parents)):
        kids[parents[i]].append(i)
    out = []
    queue = [0]
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        out.append(len(kids[u]))
        queue.extend(kids[u])
    return out


class BarGraphStructure:
    """``S_G``, ``B_G``, the block lookup table and the block Cartesian tree."""

    def __init__(self, s_bits: BitVector, b_bits: BitVector, k: int, ctree: OrdinalTree):
        self.s_bits = s_bits
        self.b_bits = b_bits
        self.k = int(k)
        self.ctree = ctree
        self.lookup = build_lookup(self.k)
        self.n = s_bits.length
        self.bar_count = s_bits.ones
        self.block_count = b_bits.ones
        self._mask = (1 << (self.k - 1)) - 1
        self.last_trace: dict = {}
        if ctree.node_count != self.block_count + 1:
            raise ValueError("Cartesian tree must have one node per block plus a root")

    # accounting ---------------------------------------------------------------

    @property
    def payload_bits(self) -> int:
        return self.s_bits.payload_bits + self.b_bits.payload_bits + self.ctree.payload_bits

    @property
    def index_bits(self) -> int:
        return self.s_bits.index_bits + self.b_bits.index_bits + self.ctree.index_bits + self.lookup.bit_size

    # helpers --------------------------------------------------------------------

    def _check(self, x: int) -> int:
        if not isinstance(x, (int, np.integer)) or not 1 <= x <= self.n:
            raise InvalidCell(f"canonical index {x} outside [1, {self.n}]")
        return int(x)

    def bar_of(self, x: int) -> int:
        return self.s_bits.rank1(self._check(x))

    def first_in_bar(self, x: int) -> int:
        return self.s_bits.select1(self.bar_of(x))

    def cell_height(self, x: int) -> int:
        return x - self.first_in_bar(x)

    def block_of(self, x: int) -> int:
        return self.b_bits.rank1(self._check(x))

    def bar_size(self, i: int) -> int:
        s = self.s_bits.select1(i)
        if s is None or i < 1:
            raise InvalidCell(f"no bar {i}")
        t = self.s_bits.select1(i + 1)
        return (t if t is not None else self.n + 1) - s

    def sizes(self) -> list[int]:
        starts = self.s_bits.positions() + [self.n + 1]
        return [b - a for a, b in zip(starts, starts[1:])]

    def block_minima(self) -> list[int]:
        sizes = self.sizes()
        bar_starts = self.s_bits.positions()
        block_starts = set(self.b_bits.positions())
        out: list[int] = []
        for start, size in zip(bar_starts, sizes):
            if start in block_starts:
                out.append(size)
            else:
                out[-1] = min(out[-1], size)
        return out

    def handle(self, c: Coord) -> int:
        x, y = int(c[0]), int(c[1])
        s = self.s_bits.select1(x + 1) if x >= 0 else None
        if s is None or y < 0 or y >= self.bar_size(x + 1):
            raise InvalidCell(f"{(x, y)} is not a cell of the bar graph")
        return s + y

    def coord(self, x: int) -> Coord:
        b = self.bar_of(x)
        return b - 1, x - self.s_bits.select1(b)

    def handles(self):
        return iter(range(1, self.n + 1))

    def rmq(self, i: int, j: int) -> int:
        """Leftmost block with the smallest minimum among blocks ``i..j``."""
        if i == j:
            return i
        t = self.ctree
        u, v = i + 1, j + 1
        a = t.lca(u, v)
        if a == u:
            return i
        return t.ancestor_at_level(v, t.depth(a) + 1) - 1

    def _block_code(self, q: int) -> int:
        return self.s_bits.read_bits(q, self.k) & self._mask

    def _block_end(self, i: int) -> int:
        nxt = self.b_bits.select1(i + 1)
        return nxt - 1 if nxt is not None else self.n

    def block_min_size(self, i: int) -> int:
        """Smallest bar size inside block ``i``."""
        q = self.b_bits.select1(i)
        h1 = self.lookup.min_except_last[self._block_code(q)] or self.n + 1
        e = self._block_end(i)
        h2 = e - self.first_in_bar(e) + 1
        return min(h1, h2)

    # overridable pieces of the visibility cascade -------------------------------

    def _is_leftover(self, x: int, q: int) -> bool:
        return x - q >= self.k

    def _cell_at(self, first: int, h: int) -> int:
        return first + h

    def _holds_height(self, size: int, h: int) -> bool:
        return size >= h + 1

    def _interior_clear(self, i: int, j: int, h: int) -> bool:
        if j == i + 1:
            return True
        ell = self.rmq(i + 1, j - 1)
        lo = self.block_min_size(ell)
        self.last_trace.update(ell=ell, lo=lo)
        return lo >= h + 1

    # queries --------------------------------------------------------------------

    def neighbor(self, x: int, direction: str) -> int | None:
        x = self._check(x)
        s = self.s_bits
        if direction == "up":
            return None if x == self.n or s[x + 1] else x + 1
        if direction == "down":
            return None if s[x] else x - 1
        b = s.rank1(x)
        h = x - s.select1(b)
        if direction == "left":
            if b == 1:
                return None
            c = s.select1(b - 1)
            return c + h if h < self.bar_size(b - 1) else None
        if direction == "right":
            c = s.select1(b + 1)
            if c is None:
                return None
            return c + h if h < self.bar_size(b + 1) else None
        raise ValueError(f"unknown direction {direction!r}")

    def adjacent(self, x1: int, x2: int) -> bool:
        self._check(x2)
        return any(self.neighbor(x1, d) == x2 for d in ("left", "right", "up", "down"))

    def degree(self, x: int) -> int:
        return sum(self.neighbor(x, d) is not None for d in ("left", "right", "up", "down"))

    def _visible_in_block(self, q: int, a: int, b: int) -> bool:
        if a == b:
            return True
        y = self.neighbor(b, "left") if self._is_leftover(b, q) else b
        if y is None:
            return False
        if y == a:
            return True
        if y < a or y - q >= self.k:
            return False
        return self.lookup.visible(self._block_code(q), a - q, y - q)

    def is_visible(self, x1: int, x2: int) -> bool:
        x1, x2 = self._check(x1), self._check(x2)
        if x1 > x2:
            x1, x2 = x2, x1
        self.last_trace = {}
        if x1 == x2:
            return True
        s = self.s_bits
        b1, b2 = s.rank1(x1), s.rank1(x2)
        if b1 == b2:
            return True
        h = x1 - s.select1(b1)
        if h != x2 - s.select1(b2):
            return False
        if h == 0:
            return True
        i, j = self.b_bits.rank1(x1), self.b_bits.rank1(x2)
        self.last_trace.update(i=i, j=j, h=h)
        if i == j:
            return self._visible_in_block(self.b_bits.select1(i), x1, x2)
        e = self._block_end(i)
        first = s.select1(s.rank1(e))
        if not self._holds_height(e - first + 1, h):
            return False
        w = self._cell_at(first, h)
        qj = self.b_bits.select1(j)
        if not self._holds_height(self.bar_size(s.rank1(qj)), h):
            return False
        z = self._cell_at(qj, h)
        self.last_trace.update(w=w, z=z)
        if not self._visible_in_block(self.b_bits.select1(i), x1, w):
            return False
        if not self._visible_in_block(qj, z, x2):
            return False
        return self._interior_clear(i, j, h)

    def binary_cartesian(self) -> dict[int, tuple[int | None, int | None]]:
        """Left/right children of the binary Cartesian tree, rebuilt from range-minimum queries."""
        out: dict[int, tuple[int | None, int | None]] = {}

        def build(a: int, b: int) -> int | None:
            if a > b:
                return None
            r = self.rmq(a, b)
            out[r] = (build(a, r - 1), build(r + 1, b))
            return r

        self.cartesian_root = build(1, self.block_count)
        return out


def build_bargraph(composition: Sequence[int], k: int | None = None, mode: str = COMPACT) -> BarGraphStructure:
    sizes = [int(s) for s in composition]
    if not sizes:
        raise EmptyComposition("composition is empty")
    if any(s < 1 for s in sizes):
        raise ZeroBar("every bar needs at least one cell")
    n = sum(sizes)
    if k is None:
        k = default_k(n)
    if not isinstance(k, int) or not 1 <= k <= MAX_K:
        raise InvalidK(f"k must be an integer in [1, {MAX_K}], got {k!r}")
    arr = np.asarray(sizes, dtype=np.int64)
    bar_starts = np.concatenate(([1], 1 + np.cumsum(arr)[:-1]))
    s_bits = BitVector.from_positions(bar_starts, n, PLAIN)
    block_starts: list[int] = []
    minima: list[int] = []
    acc = k
    for start, size in zip(bar_starts.tolist(), sizes):
        if acc >= k:
            block_starts.append(start)
            minima.append(size)
            acc = 0
        elif size < minima[-1]:
            minima[-1] = size
        acc += size
    b_bits = BitVector.from_positions(block_starts, n, SPARSE)
    ctree = OrdinalTree(_heap_degrees(min_heap_parents(minima)), mode)
    return BarGraphStructure(s_bits, b_bits, k, ctree)
