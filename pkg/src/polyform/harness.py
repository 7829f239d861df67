"""Compare encoded structures with the brute-force grid oracle.

Used by ``polyform check`` and by the test suite.  Every comparison works
on coordinates, so a mismatch report names real cells of the input.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .bars import build_bargraph
from .bfslabel import LabeledBfsTree, build_bfs
from .covering import build_covering
from .grid import (DIRECTIONS, Polyomino, from_composition, is_connected, mixed_polyomino,
                   oracle_adjacent, oracle_degree, oracle_neighbor, oracle_visible, random_composition)
from .sliced import build_sliced

KINDS = ("bfs", "nice", "sliced", "bar")


@dataclass
class Outcome:
    structures: int = 0
    queries: int = 0
    mismatch: dict | None = None

    @property
    def ok(self) -> bool:
        return self.mismatch is None

    def merge(self, other: "Outcome") -> None:
        self.structures += other.structures
        self.queries += other.queries
        if self.mismatch is None:
            self.mismatch = other.mismatch


def _coords(s) -> dict:
    return {v: s.coord(v) for v in s.handles()}


def verify_cells(p: Polyomino, s, pair_sample: int | None = None, rng: random.Random | None = None) -> Outcome:
    """Check neighbours and degree of every cell, then adjacency and visibility of pairs.

    Adjacency is read off the four neighbour answers, mirroring how the
    structures define it.  All unordered pairs are checked unless
    ``pair_sample`` caps them, in which case ``rng`` picks the sample.
    """
    out = Outcome(structures=1)
    where = _coords(s)
    handles = list(where)
    if sorted(where.values()) != sorted(p.cells):
        out.mismatch = {"op": "cells", "expected": p.n, "got": len(where)}
        return out
    nbrs: dict[int, set] = {}
    for v in handles:
        c = where[v]
        found = set()
        for d in DIRECTIONS:
            got = s.neighbor(v, d)
            got_c = None if got is None else where.get(got, ("dummy", got))
            exp = oracle_neighbor(p, c, d)
            out.queries += 1
            if got_c != exp:
                out.mismatch = {"op": d, "a": c, "expected": exp, "got": got_c}
                return out
            if got is not None:
                found.add(got)
        nbrs[v] = found
        out.queries += 1
        if s.degree(v) != oracle_degree(p, c):
            out.mismatch = {"op": "deg", "a": c, "expected": oracle_degree(p, c), "got": s.degree(v)}
            return out
    if pair_sample is None:
        pairs = itertools.combinations_with_replacement(handles, 2)
    else:
        rng = rng or random.Random(0)
        pairs = ((rng.choice(handles), rng.choice(handles)) for _ in range(pair_sample))
    for v1, v2 in pairs:
        c1, c2 = where[v1], where[v2]
        out.queries += 2
        if (v2 in nbrs[v1]) != oracle_adjacent(p, c1, c2):
            out.mismatch = {"op": "adj", "a": c1, "b": c2, "expected": oracle_adjacent(p, c1, c2)}
            return out
        got = s.is_visible(v1, v2)
        if got != oracle_visible(p, c1, c2):
            out.mismatch = {"op": "vis", "a": c1, "b": c2, "expected": not got, "got": got}
            return out
    return out


def verify_bfs(p: Polyomino, t: LabeledBfsTree) -> Outcome:
    """Relative positions of every cell and adjacency of every pair."""
    out = Outcome(structures=1)
    rx, ry = t.root_coord
    pos = {}
    for c, v in t.handle_map.items():
        out.queries += 1
        got = t.relative_position(v)
        if got != (c[0] - rx, c[1] - ry):
            out.mismatch = {"op": "relpos", "a": c, "expected": (c[0] - rx, c[1] - ry), "got": got}
            return out
        pos[v] = c
    for v1, v2 in itertools.combinations(pos, 2):
        out.queries += 1
        if t.adjacent(v1, v2) != oracle_adjacent(p, pos[v1], pos[v2]):
            out.mismatch = {"op": "adj", "a": pos[v1], "b": pos[v2],
                            "expected": oracle_adjacent(p, pos[v1], pos[v2])}
            return out
    return out


def build(kind: str, p: Polyomino, f: int | None = None, k: int | None = None, rng: random.Random | None = None):
    if kind == "nice":
        return build_covering(p)
    if kind == "sliced":
        return build_sliced(p, f=f)
    if kind == "bfs":
        cells = sorted(p.cells)
        root = cells[(rng or random.Random(0)).randrange(len(cells))]
        return build_bfs(p, root, accelerate=True)
    raise ValueError(f"use build_bargraph for kind {kind!r}")


def check_polyomino(kind: str, p: Polyomino, f: int | None = None, rng: random.Random | None = None,
                    pair_sample: int | None = None) -> Outcome:
    s = build(kind, p, f=f, rng=rng)
    if kind == "bfs":
        return verify_bfs(p, s)
    return verify_cells(p, s, pair_sample, rng)


def check_composition(sizes, k: int | None = None) -> Outcome:
    g = build_bargraph(sizes, k)
    out = verify_cells(from_composition(sizes), g)
    if out.mismatch is not None:
        out.mismatch["composition"] = list(sizes)
        out.mismatch["k"] = g.k
    return out


def all_compositions(n: int):
    for mask in range(1 << (n - 1)):
        sizes, run = [], 1
        for i in range(n - 1):
            if mask >> i & 1:
                sizes.append(run)
                run = 1
            else:
                run += 1
        sizes.append(run)
        yield sizes


def run_trials(kind: str, trials: int, seed: int, max_n: int, f: int | None = None,
               k: int | None = None) -> Outcome:
    """Seeded random trials for one kind; stops at the first mismatch."""
    rng = random.Random(seed)
    total = Outcome()
    for t in range(trials):
        if kind == "bar":
            sizes = random_composition(rng.randint(1, max_n), rng)
            res = check_composition(sizes, k)
        else:
            p = mixed_polyomino(rng, max_n)
            if kind == "bfs" and not is_connected(p):
                continue
            ff = f if f is not None else rng.randint(1, max(1, p.height))
            res = check_polyomino(kind, p, f=ff, rng=rng)
            if res.mismatch is not None:
                res.mismatch["trial"] = t
                if kind == "sliced":
                    res.mismatch["f"] = ff
        total.merge(res)
        if total.mismatch is not None:
            break
    return total


def run_exhaustive(max_n: int, ks=(2, 3, 4)) -> Outcome:
    """Every composition of every n up to ``max_n`` at each forced k."""
    total = Outcome()
    for k in ks:
        for n in range(1, max_n + 1):
            for sizes in all_compositions(n):
                total.merge(check_composition(sizes, k))
                if total.mismatch is not None:
                    return total
    return total
