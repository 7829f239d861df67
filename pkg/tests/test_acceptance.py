"""End-to-end acceptance checks, one or more tests per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints a
PASS/FAIL line for each criterion along with the measured numbers.
"""

import json
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from polyform.bars import build_bargraph, build_lookup
from polyform.bfslabel import build_bfs
from polyform.cli import bench_structure
from polyform.covering import build_covering
from polyform.grid import (Polyomino, from_composition, oracle_visible, parse_composition, parse_polyomino,
                           random_composition_np, random_strip)
from polyform.harness import run_exhaustive, run_trials
from polyform.sliced import build_sliced

from oracles import assert_matches_scan, check_against_oracle, random_degrees
from test_bars import ERRATA, as_literal

FIX = Path(__file__).parent / "fixtures"
GOLD = json.loads((FIX / "golden.json").read_text())
SIZES = (10**4, 10**5, 10**6)


def fixture_polyomino(name):
    return parse_polyomino((FIX / GOLD[name]["file"]).read_text())


# 1. oracle equivalence ------------------------------------------------------------


@pytest.mark.criterion(1)
def test_oracle_equivalence(record):
    start = time.perf_counter()
    summary = []
    for kind, seed in (("nice", 101), ("sliced", 202)):
        out = run_trials(kind, 500, seed, 200)
        assert out.ok, (kind, out.mismatch)
        assert out.structures == 500
        summary.append(f"{kind} {out.structures} polyominoes/{out.queries} queries")
    out = run_exhaustive(14, ks=(2, 3, 4))
    assert out.ok, out.mismatch
    assert out.structures == 3 * (2**14 - 1)
    summary.append(f"bar {out.structures} compositions/{out.queries} queries")
    elapsed = time.perf_counter() - start
    assert elapsed < 600, f"took {elapsed:.0f}s"
    record(", ".join(summary) + f", 0 mismatches in {elapsed:.0f}s")


# 2. golden examples ------------------------------------------------------------


@pytest.mark.criterion(2)
def test_golden_examples(record):
    g = GOLD["figure1"]
    cs = build_covering(fixture_polyomino("figure1"))
    h = {k: cs.handle(tuple(c)) for k, c in g["labels"].items()}
    assert [cs.is_visible(h[a], h[b]) for a, b, _ in g["visible"]] == [v for _, _, v in g["visible"]]

    g = GOLD["bfs_example"]
    t = build_bfs(fixture_polyomino("bfs_example"), tuple(g["root"]))
    cells = {name: t.bfs_node(i) for name, i in g["cells"].items()}
    for a, b, adjacent, offsets in g["adjacent"]:
        assert t.offsets(cells[a], cells[b]) == tuple(offsets)
        assert t.adjacent(cells[a], cells[b]) is adjacent

    g = GOLD["figure4"]
    s = build_sliced(fixture_polyomino("figure4"), f=g["f"])
    assert s.i_star == g["i_star"]
    lab = {k: s.handle(tuple(c)) for k, c in g["labels"].items()}
    for a, b, expected, _ in g["visible"]:
        assert s.is_visible(lab[a], lab[b]) is expected

    g = GOLD["figure5"]
    bg = build_bargraph(parse_composition((FIX / g["file"]).read_text()))
    assert bg.s_bits.read_bits(1, len(g["s_prefix"])) == int(g["s_prefix"], 2)
    assert bg.b_bits.read_bits(1, len(g["b_prefix"])) == int(g["b_prefix"], 2)
    assert bg.block_minima() == g["block_minima"]
    assert bg.is_visible(g["a"], g["b"]) is g["visible"]
    assert bg.last_trace["ell"] == g["trace"]["ell"] and bg.last_trace["lo"] == g["trace"]["lo"]
    record("figure 1, bfs example, figure 4 and figure 5 all exact")


# 3. space trends -----------------------------------------------------------------


@pytest.mark.criterion(3)
def test_bars_space_trend(record):
    per_cell, excess = [], []
    for n in SIZES:
        g = build_bargraph(random_composition_np(n, seed=n))
        per_cell.append(g.payload_bits / n)
        excess.append((g.payload_bits - n) / n)
    record("bits/cell " + ", ".join(f"{v:.4f}" for v in per_cell))
    problems = []
    if not all(a > b for a, b in zip(excess, excess[1:])):
        problems.append("excess not strictly decreasing " + ", ".join(f"{v:.6f}" for v in excess))
    if per_cell[-1] > 1.25:
        problems.append(f"bits/cell {per_cell[-1]:.4f} at n=10^6 exceeds 1.25")
    assert not problems, "; ".join(problems)


@pytest.mark.criterion(3)
def test_covering_space_trend(record):
    per_cell, excess = [], []
    for n in SIZES:
        cs = build_covering(random_strip(n, 64, seed=n), emit_map=False)
        per_cell.append(cs.payload_bits / n)
        excess.append((cs.payload_bits - 3 * n) / n)
    record("bits/cell " + ", ".join(f"{v:.5f}" for v in per_cell))
    assert all(a > b for a, b in zip(excess, excess[1:])), excess
    assert per_cell[-1] <= 3.5


@pytest.mark.criterion(3)
def test_sliced_space_min_space(record):
    excess = []
    for n in SIZES:
        p = random_strip(n, 8, seed=n).rotated()
        s = build_sliced(p, preset="min-space")
        excess.append((s.payload_bits - 3 * (n + s.f)) / n)
    record("(payload - 3(n+f))/n " + ", ".join(f"{v:.2e}" for v in excess))
    # the lower-order term must be small and shrinking
    assert excess[-1] <= 0.01
    assert all(a > b for a, b in zip(excess, excess[1:])), excess


# 4. time behaviour ---------------------------------------------------------------

NAV = ("left", "right", "up", "down")


def _nav_medians(s, queries=20000):
    return {r["op"]: r["median_ns"] for r in bench_structure(s, queries, seed=5, ops=list(NAV))}


@pytest.mark.criterion(4)
@pytest.mark.parametrize("kind", ["nice", "sliced", "bar"])
def test_navigation_latency_flat(kind, record):
    medians = []
    for n in (10**4, 10**6):
        if kind == "bar":
            s = build_bargraph(random_composition_np(n, seed=n))
        elif kind == "nice":
            s = build_covering(random_strip(n, 64, seed=n))
        else:
            s = build_sliced(random_strip(n, 8, seed=n).rotated(), preset="min-space")
        medians.append(_nav_medians(s))
    ratios = {op: medians[1][op] / medians[0][op] for op in NAV}
    record(", ".join(f"{op} {medians[0][op]}->{medians[1][op]}ns" for op in NAV))
    for op, r in ratios.items():
        assert 0.5 <= r <= 2.0, (op, r)


@pytest.mark.criterion(4)
def test_visibility_iterations_bounded(record):
    rng = random.Random(9)
    worst_ratio = 0.0
    for n in (10**3, 10**4):
        s = build_sliced(random_strip(n, 8, seed=n).rotated(), f=rng.randint(2, 12))
        row = bench_structure(s, 5000, seed=n, ops=["vis"])[0]
        top = max(int(k) for k in row["iterations_histogram"])
        assert top <= row["slice_count"]
        worst_ratio = max(worst_ratio, top / row["slice_count"])
    worst = 0
    for n in (30, 100, 101, 250):
        s = build_sliced(Polyomino([(0, y) for y in range(n)]), preset="const-vis", epsilon=0.3)
        hs = list(s.handles())
        worst = max(worst, max(s.visible_traced(a, b)[1] for a in hs for b in hs))
    assert worst <= math.ceil(3 / 0.3)
    record(f"iterations/slice_count <= {worst_ratio:.2f}, const-vis worst {worst} <= 10")


# 5. primitives -------------------------------------------------------------------


@pytest.mark.criterion(5)
def test_bitvector_against_scan(record):
    rng = np.random.default_rng(3)
    count = 0
    for mode in ("plain", "sparse"):
        for length in (0, 1, 63, 64, 65):
            for density in (0.0, 0.1, 0.5, 1.0):
                assert_matches_scan([int(b) for b in rng.random(length) < density], mode)
                count += 1
        for density in (0.01, 0.3, 0.5, 0.9):
            assert_matches_scan([int(b) for b in rng.random(10**4) < density], mode)
            count += 1
    record(f"{count} vectors")


@pytest.mark.criterion(5)
def test_treekit_against_traversal(record):
    rng = random.Random(17)
    for i in range(1000):
        n = rng.randint(1, 500)
        mode = "compact" if i % 2 else "reference"
        check_against_oracle(random_degrees(rng, n), mode, lca_sample=None if n <= 60 else 4 * n, rng=rng)
    record("1000 trees, every unary op at every node")


@pytest.mark.criterion(5)
def test_lookup_tables(record):
    for k in range(1, 9):
        table = build_lookup(k)
        assert table.entry_count == 2 ** (k - 1)
        for code in range(table.entry_count):
            bits = format(code, f"0{k - 1}b") if k > 1 else ""
            sizes = [len(run) for run in ("1" + bits).replace("1", " 1").split()]
            p = from_composition(sizes)
            g = build_bargraph(sizes, k)
            coords = [g.coord(x) for x in range(1, k + 1)]
            for a in range(k):
                for b in range(k):
                    assert table.visible(code, a, b) == oracle_visible(p, coords[a], coords[b])
    record("k = 1..8, entry counts 2^(k-1)")


# 6. errata -----------------------------------------------------------------------


@pytest.mark.criterion(6)
@pytest.mark.parametrize("cls,sizes,k,x,y", ERRATA, ids=[e[0].__name__ for e in ERRATA])
def test_erratum(cls, sizes, k, x, y, record):
    literal, fixed = as_literal(cls, sizes, k)
    truth = oracle_visible(from_composition(sizes), fixed.coord(x), fixed.coord(y))
    assert fixed.is_visible(x, y) == truth
    assert literal.is_visible(x, y) != truth
    record(f"sizes {sizes}, k={k}, vis({x},{y}) truth {truth}")
