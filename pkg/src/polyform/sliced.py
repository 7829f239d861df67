"""Sliced structure for polyominoes of any height.

Rows are cut into horizontal slices (the first one ``i*`` rows tall, the
rest ``f`` rows tall), the slices are laid side by side to form a strip of
height ``f``, and that strip is stored as a covering structure.  Two extra
bitstrings, ``Top`` and ``Bot``, record which cells touch across each cut.
Navigation stays constant time; visibility walks up one slice per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bits import BitVector, best_mode
from .covering import CellStructure, CoveringStructure, attach_handles, build_levels
from .errors import InvalidThickness
from .grid import Coord, Polyomino
from .treekit import COMPACT

PRESETS = ("min-space", "const-vis")


def thickness(n: int, preset: str = "min-space", epsilon: float = 0.3) -> int:
    """Slice thickness for a named preset."""
    if preset == "min-space":
        return max(1, math.ceil(n / math.ceil(math.log2(n + 1))))
    if preset == "const-vis":
        if not 0 < epsilon:
            raise InvalidThickness("epsilon must be positive")
        return max(1, math.ceil(epsilon * n / 3))
    raise InvalidThickness(f"unknown preset {preset!r}")


@dataclass
class SlicingPlan:
    f: int
    i_star: int
    slice_count: int
    boundary_count: int
    boundary_counts: list[int] = field(repr=False)
    height: int = 0

    def slice_rows(self, j: int) -> range:
        """Top-down row indices held by slice ``j`` (1-based)."""
        if j == 1:
            return range(0, min(self.i_star, self.height))
        start = self.i_star + (j - 2) * self.f
        return range(start, min(self.height, start + self.f))

    def row_offsets(self) -> dict[int, tuple[int, int]]:
        """Map each top-down row to ``(slice, strip level)``."""
        out = {}
        for j in range(1, self.slice_count + 1):
            for lv, r in enumerate(self.slice_rows(j), 1):
                out[r] = (j, lv)
        return out


def _row_counts(p: Polyomino) -> np.ndarray:
    return np.bincount(p.height - 1 - p.ys, minlength=p.height)


def choose_slicing(p: Polyomino, f: int) -> SlicingPlan:
    """Slicing type with the fewest boundary cells, smallest type on ties."""
    if int(f) != f or f < 1:
        raise InvalidThickness(f"slice thickness must be a positive integer, got {f}")
    f = int(f)
    cnt = _row_counts(p)
    h = p.height
    counts = np.zeros(f + 1, dtype=np.int64)
    if h > 1:
        r = np.arange(1, h)
        # row r starts a slice exactly for type ((r - 1) mod f) + 1
        np.add.at(counts, (r - 1) % f + 1, cnt[1:] + cnt[:-1])
        # a full last slice (other than slice 1) also has bottom cells
        i = (h - 1) % f + 1
        if i < h:
            counts[i] += cnt[h - 1]
    i_star = int(np.argmin(counts[1:])) + 1
    slices = 1 + max(0, -(-(h - i_star) // f))
    return SlicingPlan(f, i_star, slices, int(counts[i_star]), counts[1:].tolist(), h)


class SlicedStructure(CellStructure):
    def __init__(self, base: CoveringStructure, top_bits: BitVector, bot_bits: BitVector,
                 f: int, i_star: int, first_top: int, first_bot: int, slice_count: int,
                 handle_map: dict[Coord, int] | None = None):
        self.base = base
        self.top_bits = top_bits
        self.bot_bits = bot_bits
        self.f = int(f)
        self.i_star = int(i_star)
        self.first_top = int(first_top)
        self.first_bot = int(first_bot)
        self.slice_count = int(slice_count)
        self.handle_map = handle_map
        self.n = base.n
        self.last_iterations = 0

    @property
    def tree(self):
        return self.base.tree

    @property
    def payload_bits(self) -> int:
        return self.base.payload_bits + self.top_bits.payload_bits + self.bot_bits.payload_bits

    @property
    def index_bits(self) -> int:
        return self.base.index_bits + self.top_bits.index_bits + self.bot_bits.index_bits

    def _check(self, v: int) -> int:
        return self.base._check(v)

    def handles(self):
        return self.base.handles()

    # boundary bookkeeping ---------------------------------------------------

    def _top_index(self, v: int) -> int | None:
        """0-based position of ``v`` in Top, or None when it is not a top cell."""
        t = self.tree
        if t.depth(v) != 1:
            return None
        r = t.level_rank(v)
        return r - self.first_top - 1 if r > self.first_top else None

    def _bot_index(self, v: int) -> int | None:
        t = self.tree
        d = t.depth(v)
        r = t.level_rank(v)
        if d == self.i_star and r <= self.first_bot:
            k = r - 1
        elif d == self.f:
            k = r - 1 + (self.first_bot if self.i_star < self.f else 0)
        else:
            return None
        return k if 0 <= k < self.bot_bits.length else None

    def _bot_node(self, r: int) -> int:
        """Node for 0-based Bot position ``r``."""
        t = self.tree
        if self.i_star < self.f and r < self.first_bot:
            return t.level_select(self.i_star, r + 2)
        if self.i_star < self.f:
            r -= self.first_bot
        return t.level_select(self.f, r + 2)

    # queries ------------------------------------------------------------------

    def neighbor(self, v: int, direction: str) -> int | None:
        v = self._check(v)
        if direction == "up":
            k = self._top_index(v)
            if k is not None:
                if not self.top_bits[k + 1]:
                    return None
                return self._bot_node(self.bot_bits.select1(self.top_bits.rank1(k + 1)) - 1)
        elif direction == "down":
            k = self._bot_index(v)
            if k is not None:
                if not self.bot_bits[k + 1]:
                    return None
                r = self.top_bits.select1(self.bot_bits.rank1(k + 1)) - 1
                return self.tree.level_select(1, self.first_top + r + 2)
        return self.base.neighbor(v, direction)

    def is_visible(self, c1: int, c2: int) -> bool:
        return self.visible_traced(c1, c2)[0]

    def visible_traced(self, c1: int, c2: int) -> tuple[bool, int]:
        """Visibility answer plus the number of slice-walk iterations used."""
        c1, c2 = self._check(c1), self._check(c2)
        if c1 > c2:
            c1, c2 = c2, c1
        self.last_iterations = 0
        if self.base._visible(c1, c2):
            return True, 0
        t = self.tree
        d1 = t.depth(c1)
        cur = c2
        iterations = 0
        while iterations < self.slice_count:
            iterations += 1
            self.last_iterations = iterations
            dc = t.depth(cur)
            if cur - c1 == dc - d1:
                return True, iterations
            anc = t.ancestor_at_level(cur, 1)
            if cur - anc != dc - 1:
                return False, iterations
            cur = self.neighbor(anc, "up") if not self.base.is_dummy(anc) else None
            if cur is None or cur < c1:
                return False, iterations
        return False, iterations


def build_sliced(p: Polyomino, f: int | None = None, preset: str = "min-space",
                 epsilon: float = 0.3, mode: str = COMPACT, emit_map: bool = True) -> SlicedStructure:
    if f is None:
        f = thickness(p.n, preset, epsilon)
    plan = choose_slicing(p, f)
    f = plan.f
    rows = p.rows()[::-1]  # top-down
    h = p.height
    gap = p.width + 1
    levels: list[list[int]] = [[] for _ in range(f)]
    names: list[list[Coord]] = [[] for _ in range(f)]
    for j in range(1, plan.slice_count + 1):
        off = (j - 1) * gap
        for lv, r in enumerate(plan.slice_rows(j)):
            levels[lv].extend(x + off for x in rows[r])
            if emit_map:
                names[lv].extend((x, h - 1 - r) for x in rows[r])
    base = build_levels(levels, mode)
    if emit_map:
        attach_handles(base, levels, names)

    def touching(r: int, other: int) -> np.ndarray:
        return np.isin(np.asarray(rows[r], dtype=np.int64), np.asarray(rows[other], dtype=np.int64))

    top_parts, bot_parts = [], []
    for j in range(2, plan.slice_count + 1):
        r = plan.slice_rows(j).start
        top_parts.append(touching(r, r - 1))
        bot_parts.append(touching(r - 1, r))
    last = plan.slice_rows(plan.slice_count)
    if plan.slice_count > 1 and len(last) == f:
        bot_parts.append(np.zeros(len(rows[last[-1]]), dtype=bool))
    concat = lambda parts: np.concatenate(parts).astype(np.uint8) if parts else np.zeros(0, np.uint8)  # noqa: E731
    top = best_mode(concat(top_parts))
    bot = best_mode(concat(bot_parts))
    first_top = len(rows[0])
    first_bot = len(rows[plan.i_star - 1]) if plan.slice_count > 1 else 0
    return SlicedStructure(base, top, bot, f, plan.i_star, first_top, first_bot, plan.slice_count,
                           base.handle_map)
