"""Ordinal trees built from level-order degree sequences.

Node ids handed to callers are preorder indices ``1..N`` (root = 1).
Two interchangeable modes are provided:

* ``reference`` keeps explicit parent/depth/child arrays.  It is the
  correctness baseline.
* ``compact`` keeps the level-order unary degree sequence (LOUDS) in a
  plain bit vector plus a sparse vector marking the first node of every
  level.  Parent, child and level queries run on rank/select in level-order
  numbering; a pair of permutation arrays translates to and from preorder.

Those permutation arrays are runtime acceleration: they are reported in
``translation_bits`` and never serialized.
"""

from __future__ import annotations

from array import array
from typing import Sequence

import numpy as np

from .bits import PLAIN, SPARSE, BitVector
from .errors import InvalidIndex, InvalidLevel, InvalidNode, MalformedDegrees

REFERENCE = "reference"
COMPACT = "compact"


def _check_degrees(degrees) -> np.ndarray:
    deg = np.asarray(degrees, dtype=np.int64).reshape(-1)
    n = deg.size
    if n == 0:
        raise MalformedDegrees("degree sequence is empty")
    if np.any(deg < 0):
        raise MalformedDegrees("negative degree")
    if int(deg.sum()) != n - 1:
        raise MalformedDegrees(f"degrees sum to {int(deg.sum())}, expected {n - 1}")
    # every node except the root must be discovered before it is visited
    if n > 1 and np.any(1 + np.cumsum(deg[:-1]) < np.arange(2, n + 1)):
        raise MalformedDegrees("degree sequence describes a forest, not a tree")
    return deg


class OrdinalTree:
    """Rooted ordered tree with navigation over preorder ids.

    >>> t = OrdinalTree([2, 1, 2, 0, 0, 0])
    >>> t.parent(3), t.child(4, 2), t.lca(5, 6)
    (2, 6, 4)
    """

    def __init__(self, degrees: Sequence[int], mode: str = COMPACT):
        if mode not in (REFERENCE, COMPACT):
            raise ValueError(f"unknown tree mode {mode!r}")
        deg = _check_degrees(degrees)
        self.mode = mode
        n = self.node_count = int(deg.size)
        # level-order bookkeeping, 1-based (slot 0 unused)
        first_child = np.empty(n + 1, dtype=np.int64)
        first_child[0] = 0
        first_child[1:] = 2 + np.concatenate(([0], np.cumsum(deg)[:-1]))
        par_lvl = np.zeros(n + 1, dtype=np.int64)
        par_lvl[2:] = np.repeat(np.arange(1, n + 1), deg)
        depth_lvl = np.zeros(n + 1, dtype=np.int64)
        pl = par_lvl.tolist()
        dl = depth_lvl.tolist()
        for y in range(2, n + 1):
            dl[y] = dl[pl[y]] + 1
        self.height = dl[n]
        deg_l = [0] + deg.tolist()
        fc_l = first_child.tolist()

        pre2lvl = array("l", bytes(8 * (n + 1)))
        lvl2pre = array("l", bytes(8 * (n + 1)))
        stack = [1]
        counter = 0
        while stack:
            x = stack.pop()
            counter += 1
            lvl2pre[x] = counter
            pre2lvl[counter] = x
            d = deg_l[x]
            if d:
                f = fc_l[x]
                stack.extend(range(f + d - 1, f - 1, -1))
        self._pre2lvl = pre2lvl
        self._lvl2pre = lvl2pre

        dl_arr = np.asarray(dl[1:], dtype=np.int64)
        starts = np.flatnonzero(np.diff(np.concatenate(([-1], dl_arr)))) + 1
        self._level_start = starts.tolist()  # level-order index of each level's first node

        if mode == REFERENCE:
            self._deg = deg_l
            self._fc = fc_l
            self._par = pl
            self._depth = dl
        else:
            # "10" for a virtual super-root, then 1^d 0 per node
            shape = np.ones(2 * n + 1, dtype=np.uint8)
            shape[1] = 0
            shape[1 + np.cumsum(deg + 1)] = 0
            self._louds = BitVector(shape, PLAIN)
            self._levels = BitVector.from_positions(starts, n, SPARSE)

    # construction from serialized shape ------------------------------------

    @classmethod
    def from_shape(cls, shape: BitVector | str | Sequence[int], mode: str = COMPACT) -> "OrdinalTree":
        """Rebuild from the shape string: per node in level order, degree ones then a zero."""
        bits = shape.to_numpy() if isinstance(shape, BitVector) else BitVector(shape).to_numpy()
        zeros = np.flatnonzero(bits == 0)
        if zeros.size == 0 or zeros[-1] != bits.size - 1:
            raise MalformedDegrees("shape string must end with a zero")
        deg = np.diff(np.concatenate(([-1], zeros))) - 1
        return cls(deg, mode)

    def shape_bits(self) -> BitVector:
        """Shape string without the virtual super-root prefix (2N-1 bits)."""
        deg = np.asarray(self.degrees, dtype=np.int64)
        out = np.ones(2 * self.node_count - 1, dtype=np.uint8)
        out[np.cumsum(deg + 1) - 1] = 0
        return BitVector(out, PLAIN)

    @property
    def degrees(self) -> list[int]:
        if self.mode == REFERENCE:
            return self._deg[1:]
        n = self.node_count
        return [self._degree_lvl(x) for x in range(1, n + 1)]

    # accounting ---------------------------------------------------------------

    @property
    def payload_bits(self) -> int:
        return 2 * self.node_count - 1

    @property
    def index_bits(self) -> int:
        if self.mode == REFERENCE:
            w = max(1, self.node_count.bit_length())
            return 4 * (self.node_count + 1) * w
        lv = self._levels
        return self._louds.index_bits + 2 + lv.payload_bits + lv.index_bits

    @property
    def total_bits(self) -> int:
        return self.payload_bits + self.index_bits

    @property
    def translation_bits(self) -> int:
        return 2 * self.node_count * max(1, self.node_count.bit_length())

    # helpers --------------------------------------------------------------------

    def _lvl(self, v: int) -> int:
        if not 1 <= v <= self.node_count:
            raise InvalidNode(f"node {v} outside [1, {self.node_count}]")
        return self._pre2lvl[v]

    def _degree_lvl(self, x: int) -> int:
        if self.mode == REFERENCE:
            return self._deg[x]
        louds = self._louds
        return louds.select0(x + 1) - louds.select0(x) - 1

    def _depth_lvl(self, x: int) -> int:
        if self.mode == REFERENCE:
            return self._depth[x]
        return self._levels.rank1(x) - 1

    def _level_bounds(self, level: int) -> tuple[int, int]:
        """Half-open level-order range of ``level``."""
        starts = self._level_start
        if self.mode == REFERENCE:
            s = starts[level]
            e = starts[level + 1] if level + 1 < len(starts) else self.node_count + 1
            return s, e
        s = self._levels.select1(level + 1)
        e = self._levels.select1(level + 2)
        return s, (e if e is not None else self.node_count + 1)

    # operations -----------------------------------------------------------------

    @property
    def root(self) -> int:
        return 1

    def degree(self, v: int) -> int:
        return self._degree_lvl(self._lvl(v))

    def parent(self, v: int) -> int | None:
        x = self._lvl(v)
        if x == 1:
            return None
        if self.mode == REFERENCE:
            return self._lvl2pre[self._par[x]]
        louds = self._louds
        return self._lvl2pre[louds.rank0(louds.select1(x))]

    def child(self, v: int, i: int) -> int | None:
        x = self._lvl(v)
        if i < 1:
            return None
        if self.mode == REFERENCE:
            if i > self._deg[x]:
                return None
            return self._lvl2pre[self._fc[x] + i - 1]
        louds = self._louds
        s = louds.select0(x)
        if louds.select0(x + 1) - s - 1 < i:
            return None
        return self._lvl2pre[louds.rank1(s + i)]

    def depth(self, v: int) -> int:
        return self._depth_lvl(self._lvl(v))

    def ancestor_at_level(self, v: int, level: int) -> int:
        x = self._lvl(v)
        d = self._depth_lvl(x)
        if not 0 <= level <= d:
            raise InvalidLevel(f"level {level} outside [0, {d}] for node {v}")
        if level == d:
            return v
        if self.mode == REFERENCE:
            par = self._par
            for _ in range(d - level):
                x = par[x]
            return self._lvl2pre[x]
        # the ancestor is the last node of that level not after v in preorder
        lo, hi = self._level_bounds(level)
        lvl2pre = self._lvl2pre
        hi -= 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if lvl2pre[mid] <= v:
                lo = mid
            else:
                hi = mid - 1
        return lvl2pre[lo]

    def level_order_rank(self, v: int) -> int:
        return self._lvl(v)

    def level_order_select(self, w: int) -> int:
        if not 1 <= w <= self.node_count:
            raise InvalidIndex(f"level-order index {w} outside [1, {self.node_count}]")
        return self._lvl2pre[w]

    def level_rank(self, v: int) -> int:
        x = self._lvl(v)
        s, _ = self._level_bounds(self._depth_lvl(x))
        return x - s

    def level_select(self, level: int, i: int) -> int | None:
        if level < 0 or level > self.height or i < 1:
            return None
        s, e = self._level_bounds(level)
        y = s + i - 1
        return self._lvl2pre[y] if y < e else None

    def level_pred(self, v: int) -> int | None:
        x = self._lvl(v)
        if x == 1 or self._is_level_start(x):
            return None
        return self._lvl2pre[x - 1]

    def level_succ(self, v: int) -> int | None:
        x = self._lvl(v)
        if x == self.node_count or self._is_level_start(x + 1):
            return None
        return self._lvl2pre[x + 1]

    def is_level_first(self, v: int) -> bool:
        """True when ``v`` is the leftmost node of its level."""
        return self._is_level_start(self._lvl(v))

    def _is_level_start(self, x: int) -> bool:
        if self.mode == REFERENCE:
            d = self._depth[x]
            return self._level_start[d] == x
        return self._levels[x] == 1

    def lca(self, u: int, v: int) -> int:
        xu, xv = self._lvl(u), self._lvl(v)
        if u == v:
            return u
        if self.mode == REFERENCE:
            par, depth = self._par, self._depth
            while depth[xu] > depth[xv]:
                xu = par[xu]
            while depth[xv] > depth[xu]:
                xv = par[xv]
            while xu != xv:
                xu, xv = par[xu], par[xv]
            return self._lvl2pre[xu]
        du, dv = self._depth_lvl(xu), self._depth_lvl(xv)
        lo, hi = 0, min(du, dv)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.ancestor_at_level(u, mid) == self.ancestor_at_level(v, mid):
                lo = mid
            else:
                hi = mid - 1
        return self.ancestor_at_level(u, lo)

    def __repr__(self) -> str:
        return f"OrdinalTree(node_count={self.node_count}, mode={self.mode!r})"
