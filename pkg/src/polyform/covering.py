"""Covering-tree structure for polyominoes that fit in a short strip.

A dummy column is glued to the left of the strip and a dummy root on top.
Every node's parent is the rightmost domino head one level up at or left
of it, which makes the tree shape plus one "has a left neighbour" bit per
node enough for constant-time navigation.  Node handles are preorder ids.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .bits import PLAIN, BitVector
from .errors import InvalidCell
from .grid import DIRECTIONS, Coord, Polyomino
from .treekit import COMPACT, OrdinalTree


class CellStructure:
    """Handle bookkeeping and the queries derived from ``neighbor``."""

    handle_map: dict[Coord, int] | None = None
    _reverse: dict[int, Coord] | None = None

    def handle(self, c: Coord) -> int:
        if self.handle_map is None:
            raise InvalidCell("no handle map available")
        try:
            return self.handle_map[(int(c[0]), int(c[1]))]
        except KeyError:
            raise InvalidCell(f"{tuple(c)} is not a cell of the polyomino") from None

    def coord(self, v: int) -> Coord:
        if self.handle_map is None:
            raise InvalidCell("no handle map available")
        if self._reverse is None:
            self._reverse = {h: c for c, h in self.handle_map.items()}
        try:
            return self._reverse[v]
        except KeyError:
            raise InvalidCell(f"handle {v} is not a cell") from None

    def neighbor(self, v: int, direction: str) -> int | None:  # pragma: no cover - abstract
        raise NotImplementedError

    def adjacent(self, v1: int, v2: int) -> bool:
        self._check(v2)
        return any(self.neighbor(v1, d) == v2 for d in DIRECTIONS)

    def degree(self, v: int) -> int:
        return sum(self.neighbor(v, d) is not None for d in DIRECTIONS)

    def _check(self, v: int) -> int:  # pragma: no cover - abstract
        raise NotImplementedError


def _level_degrees(levels: Sequence[Sequence[int]]) -> tuple[list[int], list[int]]:
    """Level-order degrees and left bits of the augmented covering tree.

    ``levels[0]`` is the top row; each entry lists the occupied x values
    (non-negative, ascending).  The dummy of every level sits at x = -1.
    """
    height = len(levels)
    degrees = [height and len(levels[0]) + 1]
    left = [0]
    rows = [np.asarray(r, dtype=np.int64) for r in levels]
    for lv in range(height):
        cur = np.concatenate(([-1], rows[lv]))
        lbits = np.zeros(cur.size, dtype=np.int64)
        if cur.size > 1:
            lbits[1:] = np.concatenate(([0], (np.diff(rows[lv]) == 1).astype(np.int64)))
        left.extend(lbits.tolist())
        if lv + 1 < height:
            below = np.concatenate(([-1], rows[lv + 1]))
            is_head = np.isin(cur, below)
            heads = np.flatnonzero(is_head)
            owner = heads[np.searchsorted(cur[heads], below, side="right") - 1]
            deg = np.bincount(owner, minlength=cur.size)
        else:
            deg = np.zeros(cur.size, dtype=np.int64)
        degrees.extend(deg.tolist())
    if height == 0:
        degrees = [0]
    return degrees, left


class CoveringStructure(CellStructure):
    """Tree shape plus left bitstring; see :func:`build_covering`."""

    def __init__(self, tree: OrdinalTree, left_bits: BitVector, strip_height: int,
                 handle_map: dict[Coord, int] | None = None):
        if left_bits.length != tree.node_count:
            raise ValueError("left bitstring must have one bit per tree node")
        self.tree = tree
        self.left_bits = left_bits
        self.strip_height = int(strip_height)
        self.n = tree.node_count - self.strip_height - 1
        self.handle_map = handle_map

    # accounting -------------------------------------------------------------

    @property
    def payload_bits(self) -> int:
        return self.tree.payload_bits + self.left_bits.payload_bits

    @property
    def index_bits(self) -> int:
        return self.tree.index_bits + self.left_bits.index_bits

    # handles ----------------------------------------------------------------

    def is_dummy(self, v: int) -> bool:
        return self.tree.is_level_first(v)

    def _check(self, v: int) -> int:
        if not isinstance(v, (int, np.integer)) or not 1 <= v <= self.tree.node_count:
            raise InvalidCell(f"handle {v} outside [1, {self.tree.node_count}]")
        if self.tree.is_level_first(int(v)):
            raise InvalidCell(f"handle {v} is a dummy node")
        return int(v)

    def handles(self) -> Iterator[int]:
        """Every non-dummy handle in preorder."""
        for v in range(1, self.tree.node_count + 1):
            if not self.tree.is_level_first(v):
                yield v

    # queries ----------------------------------------------------------------

    def neighbor(self, v: int, direction: str) -> int | None:
        v = self._check(v)
        t = self.tree
        if direction == "left":
            return t.level_pred(v) if self.left_bits[t.level_order_rank(v)] else None
        if direction == "right":
            w = t.level_order_rank(v) + 1
            return t.level_succ(v) if w <= t.node_count and self.left_bits[w] else None
        if direction == "up":
            p = t.parent(v)
            return p if t.child(p, 1) == v else None
        if direction == "down":
            return v + 1 if v < t.node_count and t.parent(v + 1) == v else None
        raise ValueError(f"unknown direction {direction!r}")

    def is_visible(self, c1: int, c2: int) -> bool:
        c1, c2 = self._check(c1), self._check(c2)
        return self._visible(min(c1, c2), max(c1, c2))

    def _visible(self, c1: int, c2: int) -> bool:
        """Visibility for checked handles with ``c1 <= c2``."""
        if c1 == c2:
            return True
        t = self.tree
        d1, d2 = t.depth(c1), t.depth(c2)
        if d1 == d2:
            w1, w2 = t.level_order_rank(c1), t.level_order_rank(c2)
            return self.left_bits.rank1(w2) - self.left_bits.rank1(w1) == w2 - w1
        # c2 must be reached from c1 by repeatedly taking first children
        return c2 - c1 == d2 - d1


def build_levels(levels: Sequence[Sequence[int]], mode: str = COMPACT) -> CoveringStructure:
    """Covering structure over rows given top-down as sorted x lists."""
    degrees, left = _level_degrees(levels)
    tree = OrdinalTree(degrees, mode)
    return CoveringStructure(tree, BitVector(left, PLAIN), len(levels))


def attach_handles(cs: CoveringStructure, levels: Sequence[Sequence[int]], coords: Sequence[Sequence[Coord]]) -> None:
    """Record the preorder id of every cell; ``coords`` mirrors ``levels``."""
    t = cs.tree
    handle_map = {}
    w = 2  # level-order index after the root
    for row, names in zip(levels, coords):
        w += 1  # skip the level's dummy
        for c in names:
            handle_map[c] = t.level_order_select(w)
            w += 1
    cs.handle_map = handle_map
    cs._reverse = None


def build_covering(p: Polyomino, mode: str = COMPACT, emit_map: bool = True) -> CoveringStructure:
    """Covering structure of ``p``; level 1 is the top row."""
    rows = p.rows()[::-1]
    cs = build_levels(rows, mode)
    if emit_map:
        h = p.height
        attach_handles(cs, rows, [[(x, h - 1 - r) for x in row] for r, row in enumerate(rows)])
    return cs
