import json
import random
from pathlib import Path

import pytest

from polyform.bfslabel import build_bfs
from polyform.errors import Disconnected, InvalidCell
from polyform.grid import is_connected, oracle_adjacent, parse_polyomino, random_connected
from polyform.harness import verify_bfs
from polyform.treekit import REFERENCE

FIX = Path(__file__).parent / "fixtures"
GOLD = json.loads((FIX / "golden.json").read_text())["bfs_example"]


@pytest.fixture(scope="module")
def example():
    p = parse_polyomino((FIX / GOLD["file"]).read_text())
    t = build_bfs(p, tuple(GOLD["root"]))
    cells = {name: t.bfs_node(i) for name, i in GOLD["cells"].items()}
    return p, t, cells


def path_labels(t, v):
    out = []
    while v != 1:
        out.append(t.label(v))
        v = t.tree.parent(v)
    return "".join(reversed(out))


def test_paths_from_root(example):
    _, t, cells = example
    for name, path in GOLD["paths"].items():
        assert path_labels(t, cells[name]) == path


def test_label_depths(example):
    _, t, cells = example
    assert t.depth_label(cells["c13"], "B") == 4
    assert t.depth_label(cells["c8"], "R") == 1
    assert t.depth_label(cells["c8"], "L") == 0


def test_relative_positions(example):
    _, t, cells = example
    for name, rel in GOLD["relative"].items():
        assert t.relative_position(cells[name]) == tuple(rel)


def test_adjacency_with_offsets(example):
    _, t, cells = example
    for a, b, adjacent, offsets in GOLD["adjacent"]:
        assert t.offsets(cells[a], cells[b]) == tuple(offsets)
        assert t.adjacent(cells[a], cells[b]) is adjacent


def test_root_has_no_label(example):
    _, t, _ = example
    assert t.label(1) is None and t.relative_position(1) == (0, 0)
    assert t.coord(1) == tuple(GOLD["root"])


def test_labels_take_two_bits_per_edge(example):
    p, t, _ = example
    assert t.labels.length == 2 * (p.n - 1)
    assert t.payload_bits == (2 * p.n - 1) + 2 * (p.n - 1)


def test_handles_round_trip(example):
    p, t, _ = example
    for c in p.cells:
        assert t.coord(t.handle(c)) == c


@pytest.mark.parametrize("accelerate", [False, True])
def test_random_connected_against_oracle(accelerate):
    rng = random.Random(21)
    for _ in range(40):
        p = random_connected(rng.randint(1, 70), rng)
        root = sorted(p.cells)[rng.randrange(p.n)]
        out = verify_bfs(p, build_bfs(p, root, accelerate=accelerate))
        assert out.ok, out.mismatch


def test_reference_tree_mode_agrees():
    p = random_connected(60, random.Random(4))
    a = build_bfs(p, (0, 0) if (0, 0) in p else min(p.cells))
    b = build_bfs(p, a.root_coord, mode=REFERENCE)
    for v in range(1, p.n + 1):
        assert a.relative_position(v) == b.relative_position(v)


def test_adjacency_matches_oracle_for_every_pair(example):
    p, t, _ = example
    cells = sorted(p.cells)
    for c1 in cells:
        for c2 in cells:
            assert t.adjacent(t.handle(c1), t.handle(c2)) == oracle_adjacent(p, c1, c2)


def test_errors():
    p = parse_polyomino("#.#\n")
    assert not is_connected(p)
    with pytest.raises(Disconnected):
        build_bfs(p, (0, 0))
    q = parse_polyomino("##\n")
    with pytest.raises(InvalidCell):
        build_bfs(q, (5, 5))
    t = build_bfs(q, (0, 0))
    with pytest.raises(InvalidCell):
        t.relative_position(3)
    with pytest.raises(InvalidCell):
        t.handle((4, 4))
    with pytest.raises(ValueError):
        t.depth_label(1, "X")
