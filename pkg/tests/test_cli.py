import json
import subprocess
import sys
from pathlib import Path

import pytest

from polyform.cli import main
from polyform.container import load

FIX = Path(__file__).parent / "fixtures"
GOLD = json.loads((FIX / "golden.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def jsonl(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_encode_composition_as_bar(tmp_path, capsys):
    src = tmp_path / "c.txt"
    src.write_text("2 3 1\n")
    out = tmp_path / "c.pfs"
    assert run(capsys, "encode", src, out, "--format", "composition", "--kind", "bar")[0] == 0
    data = out.read_bytes()
    assert data[5] == 4
    code, text, _ = run(capsys, "stats", out)
    assert code == 0
    report = jsonl(text)[0]
    assert report["kind"] == "bar" and report["n"] == 6
    assert report["sections"]["s_g"] == 72 + 6


def test_encode_single_cell_nice(tmp_path, capsys):
    src = tmp_path / "one.txt"
    src.write_text("#\n")
    out = tmp_path / "one.pfs"
    assert run(capsys, "encode", src, out, "--kind", "nice")[0] == 0
    assert load(out.read_bytes()).n == 1
    report = jsonl(run(capsys, "stats", out)[1])[0]
    assert report["raw_bits"] == 5 + 3


def test_figure4_sliced_records_slicing_type(tmp_path, capsys):
    out = tmp_path / "f4.pfs"
    assert run(capsys, "encode", FIX / "figure4.txt", out, "--kind", "sliced", "--f", "4", "--emit-map")[0] == 0
    report = jsonl(run(capsys, "stats", out)[1])[0]
    assert report["params"]["i_star"] == 2
    labels = GOLD["figure4"]["labels"]
    ref = lambda name: "{},{}".format(*labels[name])  # noqa: E731
    assert run(capsys, "query", out, "--op", "vis", "--a", ref("b"), "--b", ref("a"))[1].strip() == "false"
    assert run(capsys, "query", out, "--op", "up", "--a", ref("d"))[1].strip() == ref("e")


def test_query_degree_of_square_corner(tmp_path, capsys):
    src = tmp_path / "sq.txt"
    src.write_text("##\n##\n")
    out = tmp_path / "sq.pfs"
    run(capsys, "encode", src, out, "--kind", "nice", "--emit-map")
    code, text, _ = run(capsys, "query", out, "--op", "deg", "--a", "0,0")
    assert code == 0 and text.strip() == "2"
    assert run(capsys, "query", out, "--op", "left", "--a", "0,0")[1].strip() == "null"
    handle = run(capsys, "query", out, "--op", "right", "--a", "0,0")[1].strip()
    assert handle == "1,0"


def test_bfs_container_adjacency(tmp_path, capsys):
    out = tmp_path / "b.pfs"
    assert run(capsys, "encode", FIX / "bfs_example.txt", out, "--kind", "bfs", "--emit-map")[0] == 0
    t = load(out.read_bytes())
    # resolve c13, c15 and c8 through the library, then ask the CLI
    from polyform.bfslabel import build_bfs
    from polyform.grid import parse_polyomino
    g = GOLD["bfs_example"]
    ref = build_bfs(parse_polyomino((FIX / g["file"]).read_text()), tuple(g["root"]))
    cell = {name: "{},{}".format(*ref.coord(ref.bfs_node(i))) for name, i in g["cells"].items()}
    assert run(capsys, "query", out, "--op", "adj", "--a", cell["c13"], "--b", cell["c15"])[1].strip() == "true"
    assert run(capsys, "query", out, "--op", "adj", "--a", cell["c13"], "--b", cell["c8"])[1].strip() == "false"
    assert t.n == ref.n
    code, text, _ = run(capsys, "query", out, "--op", "relpos", "--a", "#1")
    assert code == 0 and text.strip() == "0 0"


def test_figure5_bar_visibility(tmp_path, capsys):
    out = tmp_path / "f5.pfs"
    assert run(capsys, "encode", FIX / "figure5.txt", out, "--format", "composition")[0] == 0
    g = GOLD["figure5"]
    text = run(capsys, "query", out, "--op", "vis", "--a", f"#{g['a']}", "--b", f"#{g['b']}")[1]
    assert text.strip() == "false"


def test_unsupported_op_and_invalid_cell(tmp_path, capsys):
    out = tmp_path / "b.pfs"
    assert run(capsys, "encode", FIX / "bfs_example.txt", out, "--kind", "bfs", "--emit-map")[0] == 0
    assert run(capsys, "query", out, "--op", "vis", "--a", "3,5", "--b", "3,6")[0] == 5
    assert run(capsys, "query", out, "--op", "adj", "--a", "0,6", "--b", "3,5")[0] == 4
    assert run(capsys, "query", out, "--op", "adj", "--a", "#999", "--b", "#1")[0] == 4


def test_exit_codes_for_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("#?#\n")
    assert run(capsys, "encode", bad, tmp_path / "o.pfs")[0] == 2
    assert run(capsys, "stats", tmp_path / "missing.pfs")[0] == 2
    junk = tmp_path / "junk.pfs"
    junk.write_bytes(b"nope")
    assert run(capsys, "query", junk, "--op", "deg", "--a", "#1")[0] == 2
    split = tmp_path / "split.txt"
    split.write_text("#.#\n")
    assert run(capsys, "encode", split, tmp_path / "o.pfs", "--kind", "bfs")[0] == 3
    assert run(capsys, "encode", split, tmp_path / "o.pfs", "--kind", "bar")[0] == 3
    assert run(capsys, "encode", split, tmp_path / "o.pfs", "--kind", "sliced", "--f", "0")[0] == 3


def test_auto_kind_selection(tmp_path, capsys):
    cases = {"bar.txt": ("#.\n##\n", 4), "wide.txt": ("####\n#..#\n", 2), "tall.txt": ("#.\n##\n#.\n#.\n#.\n", 3)}
    for name, (text, kind) in cases.items():
        src = tmp_path / name
        src.write_text(text)
        out = tmp_path / (name + ".pfs")
        assert run(capsys, "encode", src, out)[0] == 0
        assert out.read_bytes()[5] == kind, name


def test_tall_covering_warns(tmp_path, capsys):
    src = tmp_path / "tall.txt"
    src.write_text("#\n" * 12)
    code, _, err = run(capsys, "encode", src, tmp_path / "t.pfs", "--kind", "nice")
    assert code == 0 and "warning" in err


def test_rotate_keeps_original_coordinates(tmp_path, capsys):
    src = tmp_path / "tall.txt"
    src.write_text("#.\n##\n#.\n#.\n")
    out = tmp_path / "t.pfs"
    assert run(capsys, "encode", src, out, "--kind", "nice", "--rotate", "--emit-map")[0] == 0
    assert load(out.read_bytes()).strip_height == 2
    assert run(capsys, "query", out, "--op", "up", "--a", "0,0")[1].strip() == "0,1"
    assert run(capsys, "query", out, "--op", "right", "--a", "0,2")[1].strip() == "1,2"
    assert run(capsys, "query", out, "--op", "left", "--a", "1,2")[1].strip() == "0,2"
    assert run(capsys, "query", out, "--op", "down", "--a", "0,3")[1].strip() == "0,2"
    assert run(capsys, "query", out, "--op", "vis", "--a", "0,0", "--b", "0,3")[1].strip() == "true"
    assert run(capsys, "query", out, "--op", "vis", "--a", "1,2", "--b", "0,0")[1].strip() == "false"


def test_check_passes_and_is_deterministic(capsys):
    code, text, _ = run(capsys, "check", "--kind", "sliced", "--trials", "15", "--seed", "7", "--max-n", "40")
    again = run(capsys, "check", "--kind", "sliced", "--trials", "15", "--seed", "7", "--max-n", "40")[1]
    assert code == 0 and text == again
    assert jsonl(text)[0]["status"] == "pass"


def test_check_vacuous_and_exhaustive(capsys):
    code, text, _ = run(capsys, "check", "--kind", "nice", "--trials", "0")
    assert code == 0 and jsonl(text)[0]["structures"] == 0
    code, text, _ = run(capsys, "check", "--kind", "bar", "--exhaustive", "--max-n", "7")
    assert code == 0 and jsonl(text)[0]["structures"] == 3 * (2**7 - 1)
    assert run(capsys, "check", "--kind", "nice", "--exhaustive")[0] == 3


def test_check_reports_counterexample(capsys, monkeypatch):
    from polyform.covering import CoveringStructure

    monkeypatch.setattr(CoveringStructure, "degree", lambda self, v: 7)
    code, text, _ = run(capsys, "check", "--kind", "nice", "--trials", "3", "--max-n", "10")
    assert code == 1
    summary = jsonl(text)[0]
    assert summary["status"] == "fail" and summary["counterexample"]["op"] == "deg"


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("POLYFORM_SEED", "11")
    text = run(capsys, "check", "--kind", "bfs", "--trials", "4", "--max-n", "20")[1]
    assert jsonl(text)[0]["seed"] == 11
    monkeypatch.setenv("POLYFORM_SEED", "x")
    assert run(capsys, "check", "--kind", "bfs", "--trials", "1")[0] == 3


def test_bench_reports_latency_and_histogram(capsys):
    code, text, _ = run(capsys, "bench", "--gen", "connected:n=300,seed=2", "--kind", "sliced", "--f", "3",
                        "--queries", "300", "--ops", "up,vis")
    assert code == 0
    rows = {r["op"]: r for r in jsonl(text)}
    assert set(rows) == {"up", "vis"}
    assert rows["up"]["median_ns"] > 0 and rows["up"]["p99_ns"] >= rows["up"]["median_ns"]
    hist = rows["vis"]["iterations_histogram"]
    assert sum(hist.values()) == 300
    assert max(int(k) for k in hist) <= rows["vis"]["slice_count"]


def test_stats_from_generators(capsys):
    report = jsonl(run(capsys, "stats", "--gen", "staircase:n=2000", "--kind", "nice")[1])[0]
    assert abs(report["raw_bits"] / report["n"] - 4.5) < 0.02
    report = jsonl(run(capsys, "stats", "--gen", "composition:n=5000,seed=3")[1])[0]
    assert report["kind"] == "bar"
    assert run(capsys, "stats", "--gen", "blob:n=3")[0] == 3
    assert run(capsys, "stats")[0] == 3


def test_console_script_entry_point(tmp_path):
    src = tmp_path / "c.txt"
    src.write_text("1 2\n")
    proc = subprocess.run([sys.executable, "-m", "polyform.cli", "encode", str(src), str(tmp_path / "c.pfs"),
                           "--format", "composition"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


@pytest.mark.parametrize("argv", [["query", "x.pfs"], ["encode"], ["bogus"]])
def test_usage_errors_are_parameter_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 3
