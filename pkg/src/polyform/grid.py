"""Polyomino model, text formats, generators and the brute-force oracle.

Coordinates put x to the right and y upwards.  ASCII input lists rows from
the top down and is flipped on parse.  The oracle functions answer every
query the compact structures support by looking at the occupancy grid
directly, so they serve as ground truth in tests.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateCell, InvalidCell, ParseError

Coord = tuple[int, int]

DIRECTIONS: dict[str, Coord] = {
    "left": (-1, 0),
    "right": (1, 0),
    "up": (0, 1),
    "down": (0, -1),
}
FORMATS = ("ascii", "coords", "composition")


class Polyomino:
    """A finite set of unit cells, shifted so the minimum coordinate is (0, 0).

    Cells may be disconnected and may enclose holes.

    >>> p = Polyomino([(5, 5), (6, 5)])
    >>> sorted(p.cells), p.width, p.height
    ([(0, 0), (1, 0)], 2, 1)
    """

    def __init__(self, cells: Iterable[Coord] | np.ndarray):
        arr = np.asarray(list(cells) if not isinstance(cells, np.ndarray) else cells, dtype=np.int64)
        if arr.size == 0:
            raise ValueError("a polyomino needs at least one cell")
        arr = arr.reshape(-1, 2)
        arr = arr - arr.min(axis=0)
        arr = np.unique(arr, axis=0)
        self.xs = arr[:, 0].copy()
        self.ys = arr[:, 1].copy()
        self.n = int(arr.shape[0])
        self.width = int(self.xs.max()) + 1
        self.height = int(self.ys.max()) + 1

    @cached_property
    def cells(self) -> frozenset[Coord]:
        return frozenset(zip(self.xs.tolist(), self.ys.tolist()))

    @cached_property
    def occupancy(self) -> np.ndarray:
        """Boolean grid indexed ``[y, x]`` with row 0 at the bottom."""
        grid = np.zeros((self.height, self.width), dtype=bool)
        grid[self.ys, self.xs] = True
        return grid

    def __contains__(self, c) -> bool:
        x, y = c
        return 0 <= x < self.width and 0 <= y < self.height and bool(self.occupancy[y, x])

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyomino) and self.cells == other.cells

    def __hash__(self) -> int:
        return hash(self.cells)

    def __repr__(self) -> str:
        return f"Polyomino(n={self.n}, width={self.width}, height={self.height})"

    def rows(self) -> list[list[int]]:
        """Sorted x coordinates of each row, indexed by y."""
        order = np.lexsort((self.xs, self.ys))
        xs, ys = self.xs[order], self.ys[order]
        cuts = np.searchsorted(ys, np.arange(self.height + 1))
        return [xs[cuts[y]:cuts[y + 1]].tolist() for y in range(self.height)]

    def rotated(self) -> "Polyomino":
        """Quarter turn clockwise, so columns become rows."""
        return Polyomino(np.stack([self.ys, -self.xs], axis=1))


# parsing and serialization ------------------------------------------------


def _decode(text: bytes | str) -> str:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    return text.replace("\r\n", "\n").replace("\r", "\n")


def parse_polyomino(text: bytes | str, fmt: str = "ascii") -> Polyomino:
    """Parse one of the three text formats into a normalized polyomino."""
    body = _decode(text)
    if fmt == "ascii":
        lines = body.split("\n")
        while lines and not lines[-1].strip():
            lines.pop()
        while lines and not lines[0].strip():
            lines.pop(0)
        if not lines:
            raise ParseError("empty ascii input")
        top = len(lines) - 1
        cells = []
        for r, line in enumerate(lines):
            line = line.rstrip()
            for x, ch in enumerate(line):
                if ch == "#":
                    cells.append((x, top - r))
                elif ch != ".":
                    raise ParseError(f"bad character {ch!r} at row {r + 1}, column {x + 1}")
        if not cells:
            raise ParseError("ascii input has no cells")
        return Polyomino(cells)
    if fmt == "coords":
        seen: set[Coord] = set()
        for lineno, line in enumerate(body.split("\n"), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: expected 'x y'")
            try:
                c = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer coordinate") from None
            if c in seen:
                raise DuplicateCell(f"line {lineno}: duplicate cell {c}")
            seen.add(c)
        if not seen:
            raise ParseError("empty coordinate list")
        return Polyomino(seen)
    if fmt == "composition":
        return from_composition(parse_composition(body))
    raise ParseError(f"unknown format {fmt!r}")


def parse_composition(text: bytes | str) -> list[int]:
    tokens = _decode(text).split()
    if not tokens:
        raise ParseError("empty composition")
    try:
        sizes = [int(t) for t in tokens]
    except ValueError:
        raise ParseError("composition entries must be integers") from None
    if any(s < 1 for s in sizes):
        raise ParseError("bar sizes must be positive")
    return sizes


def serialize_polyomino(p: Polyomino, fmt: str = "ascii") -> str:
    if fmt == "ascii":
        occ = p.occupancy
        return "\n".join(
            "".join("#" if v else "." for v in occ[y]) for y in range(p.height - 1, -1, -1)
        ) + "\n"
    if fmt == "coords":
        return "".join(f"{x} {y}\n" for x, y in sorted(p.cells))
    if fmt == "composition":
        sizes = to_composition(p)
        if sizes is None:
            raise ValueError("polyomino is not a bar graph")
        return " ".join(map(str, sizes)) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def from_composition(sizes: Sequence[int]) -> Polyomino:
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("composition must be nonempty with positive parts")
    xs = np.repeat(np.arange(len(sizes)), sizes)
    starts = np.repeat(np.cumsum([0] + sizes[:-1]), sizes)
    ys = np.arange(sum(sizes)) - starts
    return Polyomino(np.stack([xs, ys], axis=1))


def to_composition(p: Polyomino) -> list[int] | None:
    """Bar sizes left to right, or None when ``p`` is not a bar graph."""
    occ = p.occupancy
    sizes = occ.sum(axis=0)
    if np.any(sizes == 0):
        return None
    # grounded and contiguous: the column is exactly rows 0..size-1
    expect = np.arange(p.height)[:, None] < sizes[None, :]
    if not np.array_equal(occ, expect):
        return None
    return sizes.tolist()


@dataclass(frozen=True)
class Classification:
    is_bar_graph: bool
    height: int
    width: int


def classify(p: Polyomino) -> Classification:
    return Classification(to_composition(p) is not None, p.height, p.width)


def is_connected(p: Polyomino) -> bool:
    cells = p.cells
    start = next(iter(cells))
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for dx, dy in DIRECTIONS.values():
            c = (x + dx, y + dy)
            if c in cells and c not in seen:
                seen.add(c)
                queue.append(c)
    return len(seen) == p.n


# oracle ---------------------------------------------------------------------


def _require(p: Polyomino, c: Coord) -> None:
    if c not in p:
        raise InvalidCell(f"{c} is not a cell of the polyomino")


def oracle_neighbor(p: Polyomino, c: Coord, direction: str) -> Coord | None:
    _require(p, c)
    dx, dy = DIRECTIONS[direction]
    nb = (c[0] + dx, c[1] + dy)
    return nb if nb in p else None


def oracle_adjacent(p: Polyomino, c1: Coord, c2: Coord) -> bool:
    _require(p, c1)
    _require(p, c2)
    return abs(c1[0] - c2[0]) + abs(c1[1] - c2[1]) == 1


def oracle_degree(p: Polyomino, c: Coord) -> int:
    return sum(oracle_neighbor(p, c, d) is not None for d in DIRECTIONS)


def oracle_visible(p: Polyomino, c1: Coord, c2: Coord) -> bool:
    _require(p, c1)
    _require(p, c2)
    (x1, y1), (x2, y2) = c1, c2
    occ = p.occupancy
    if y1 == y2:
        lo, hi = sorted((x1, x2))
        return bool(occ[y1, lo:hi + 1].all())
    if x1 == x2:
        lo, hi = sorted((y1, y2))
        return bool(occ[lo:hi + 1, x1].all())
    return False


# generators -----------------------------------------------------------------


def random_connected(n: int, rng: random.Random) -> Polyomino:
    """Grow a connected polyomino by repeatedly attaching a cell to a random one."""
    cells = [(0, 0)]
    seen = {(0, 0)}
    steps = list(DIRECTIONS.values())
    while len(cells) < n:
        x, y = cells[rng.randrange(len(cells))]
        dx, dy = steps[rng.randrange(4)]
        c = (x + dx, y + dy)
        if c not in seen:
            seen.add(c)
            cells.append(c)
    return Polyomino(cells)


def random_subset(width: int, height: int, density: float, rng: random.Random) -> Polyomino:
    """Random cells of a box; usually disconnected and holey."""
    cells = [(x, y) for y in range(height) for x in range(width) if rng.random() < density]
    if not cells:
        cells = [(rng.randrange(width), rng.randrange(height))]
    return Polyomino(cells)


def random_composition(n: int, rng: random.Random) -> list[int]:
    """Uniformly random composition of ``n``."""
    sizes = []
    run = 1
    for _ in range(n - 1):
        if rng.random() < 0.5:
            sizes.append(run)
            run = 1
        else:
            run += 1
    sizes.append(run)
    return sizes


def random_composition_np(n: int, seed: int) -> list[int]:
    """Uniformly random composition of ``n`` built with numpy (for large n)."""
    cuts = np.flatnonzero(np.random.default_rng(seed).integers(0, 2, n - 1)) + 1
    edges = np.concatenate(([0], cuts, [n]))
    return np.diff(edges).tolist()


def staircase(n: int) -> Polyomino:
    """Descending staircase where every column holds two cells."""
    k = np.arange(n)
    return Polyomino(np.stack([(k + 1) // 2, -(k // 2)], axis=1))


def random_strip(n: int, height: int, seed: int, density: float = 0.5) -> Polyomino:
    """``n`` random cells of a box of the given height."""
    width = max(1, int(np.ceil(n / (height * density))))
    rng = np.random.default_rng(seed)
    idx = rng.choice(width * height, size=n, replace=False)
    return Polyomino(np.stack([idx // height, idx % height], axis=1))


def mixed_polyomino(rng: random.Random, max_n: int) -> Polyomino:
    """One of: connected walk, sparse box subset, dense box subset."""
    kind = rng.randrange(3)
    if kind == 0:
        return random_connected(rng.randint(1, max_n), rng)
    side = max(1, int((max_n / (0.6 if kind == 1 else 0.85)) ** 0.5))
    w = rng.randint(1, side)
    h = rng.randint(1, side)
    dens = 0.6 if kind == 1 else 0.85
    p = random_subset(w, h, dens, rng)
    while p.n > max_n:
        p = random_subset(w, h, dens, rng)
    return p
