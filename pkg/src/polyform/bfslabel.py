"""Edge-labelled BFS tree of the dual graph.

Every non-root node carries the direction (T, B, L or R) of the step from
its parent.  Counting labels on the root path recovers a cell's offset from
the root, which is enough to answer adjacency.  Navigation and visibility
are not supported by this encoding.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .bits import PLAIN, BitVector
from .errors import Disconnected, InvalidCell, InvalidNode
from .grid import Coord, Polyomino
from .treekit import COMPACT, OrdinalTree

LABELS = "TBLR"
_STEP = {"T": (0, 1), "B": (0, -1), "L": (-1, 0), "R": (1, 0)}


class LabeledBfsTree:
    def __init__(self, tree: OrdinalTree, labels: BitVector, root_coord: Coord,
                 handle_map: dict[Coord, int] | None = None, accelerate: bool = False):
        if labels.length != 2 * (tree.node_count - 1):
            raise ValueError("label sequence must hold two bits per non-root node")
        self.tree = tree
        self.labels = labels
        self.root_coord = (int(root_coord[0]), int(root_coord[1]))
        self.handle_map = handle_map
        self.n = tree.node_count
        self._offsets = None
        if accelerate:
            self._offsets = [(0, 0)] * (self.n + 1)
            for v in range(2, self.n + 1):
                dx, dy = self._offsets[tree.parent(v)]
                sx, sy = _STEP[self.label(v)]
                self._offsets[v] = (dx + sx, dy + sy)

    @property
    def payload_bits(self) -> int:
        return self.tree.payload_bits + self.labels.payload_bits

    @property
    def index_bits(self) -> int:
        return self.tree.index_bits + self.labels.index_bits

    def _check(self, v: int) -> int:
        if not isinstance(v, (int, np.integer)) or not 1 <= v <= self.n:
            raise InvalidCell(f"handle {v} outside [1, {self.n}]")
        return int(v)

    def label(self, v: int) -> str | None:
        v = self._check(v)
        if v == 1:
            return None
        return LABELS[self.labels.read_bits(2 * (v - 2) + 1, 2)]

    def _counts(self, v: int) -> dict[str, int]:
        counts = dict.fromkeys(LABELS, 0)
        tree = self.tree
        while v != 1:
            counts[self.label(v)] += 1
            v = tree.parent(v)
        return counts

    def depth_label(self, v: int, alpha: str) -> int:
        """Number of ``alpha`` labels on the path from the root to ``v``."""
        if alpha not in _STEP:
            raise ValueError(f"label must be one of {LABELS}")
        return self._counts(self._check(v))[alpha]

    def relative_position(self, v: int) -> tuple[int, int]:
        """Offset ``(dx, dy)`` of ``v`` from the root cell."""
        v = self._check(v)
        if self._offsets is not None:
            return self._offsets[v]
        c = self._counts(v)
        return c["R"] - c["L"], c["T"] - c["B"]

    def offsets(self, v1: int, v2: int) -> tuple[int, int]:
        """Vertical and horizontal differences ``(v_d, h_d)`` between two cells."""
        x1, y1 = self.relative_position(v1)
        x2, y2 = self.relative_position(v2)
        return y1 - y2, x1 - x2

    def adjacent(self, v1: int, v2: int) -> bool:
        vd, hd = self.offsets(v1, v2)
        return abs(vd) + abs(hd) == 1

    def coord(self, v: int) -> Coord:
        dx, dy = self.relative_position(v)
        return self.root_coord[0] + dx, self.root_coord[1] + dy

    def handle(self, c: Coord) -> int:
        if self.handle_map is None:
            raise InvalidCell("no handle map available")
        try:
            return self.handle_map[tuple(c)]
        except KeyError:
            raise InvalidCell(f"{c} is not a cell of the polyomino") from None

    def bfs_node(self, i: int) -> int:
        """Preorder id of the cell discovered ``i``-th by the BFS (root is 0)."""
        try:
            return self.tree.level_order_select(i + 1)
        except Exception:
            raise InvalidNode(f"no BFS index {i}") from None


def build_bfs(p: Polyomino, root: Coord, mode: str = COMPACT, accelerate: bool = False) -> LabeledBfsTree:
    """BFS from ``root``, enqueueing neighbours in the order T, B, L, R."""
    root = (int(root[0]), int(root[1]))
    if root not in p:
        raise InvalidCell(f"root {root} is not a cell")
    cells = p.cells
    order = [root]
    parent_label: list[int] = [-1]
    degrees: list[int] = []
    seen = {root}
    queue = deque([root])
    while queue:
        x, y = queue.popleft()
        d = 0
        for code, name in enumerate(LABELS):
            sx, sy = _STEP[name]
            c = (x + sx, y + sy)
            if c in cells and c not in seen:
                seen.add(c)
                queue.append(c)
                order.append(c)
                parent_label.append(code)
                d += 1
        degrees.append(d)
    if len(order) != p.n:
        raise Disconnected(f"only {len(order)} of {p.n} cells reachable from {root}")
    tree = OrdinalTree(degrees, mode)
    n = p.n
    pre_labels = np.zeros(max(0, n - 1), dtype=np.uint8)
    handle_map = {}
    for w, c in enumerate(order, 1):
        v = tree.level_order_select(w)
        handle_map[c] = v
        if v > 1:
            pre_labels[v - 2] = parent_label[w - 1]
    bits = np.zeros(2 * max(0, n - 1), dtype=np.uint8)
    bits[0::2] = pre_labels >> 1
    bits[1::2] = pre_labels & 1
    return LabeledBfsTree(tree, BitVector(bits, PLAIN), root, handle_map, accelerate)
