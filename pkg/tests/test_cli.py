import json
import subprocess
import sys
from pathlib import Path

import pytest

from shiftreset.cli import GRAMMAR, run

GOLDEN = Path(__file__).parent / "golden"
EXAMPLE = "<(S k1. i (k1 i)) (S k2. w) (w w)>"

# (name, argv, exit code)
GOLDEN_CASES = [
    ("reduce_trace", ["--json", "reduce", EXAMPLE, "--trace"], 0),
    ("bisim_stuck", ["--json", "bisim", "S k. k i", "i"], 1),
    ("bisim_reset", ["--json", "bisim", "<i>", "i"], 0),
    ("cps_var", ["--json", "cps", "x"], 0),
    ("cps_equiv_unknown", ["--json", "cps-equiv", "omega", "omega omega"], 3),
    ("prove_s_elim", ["--json", "prove", "S k. k i", "i"], 0),
    ("lts_example", ["--json", "lts", "<i (S k. w) (w w)>", "--derive"], 0),
    ("fuzz_small", ["--json", "fuzz", "--n", "20", "--seed", "1"], 0),
]


def _run(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name, argv, code", GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_json_golden(capsys, name, argv, code):
    got, out, _ = _run(capsys, argv)
    assert got == code
    assert json.loads(out) == json.loads((GOLDEN / f"{name}.json").read_text(encoding="utf-8"))


def test_identical_invocations_are_byte_identical(capsys):
    argv = ["--json", "fuzz", "--n", "30", "--seed", "9", "--check", "lts"]
    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second


def test_reduce_trace_text(capsys):
    code, out, _ = _run(capsys, ["reduce", EXAMPLE, "--trace"])
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 8
    assert lines[-1] == r"value after 6 steps: \x.x x"
    assert [l.rsplit("[", 1)[1].rstrip("]") for l in lines[1:-1]] == [
        "Rshift", "Rbeta", "Rshift", "Rreset", "Rbeta", "Rreset"
    ]


def test_bisim_text_shows_trace(capsys):
    code, out, _ = _run(capsys, ["bisim", "S k. k i", "i"])
    assert code == 1
    assert "trace: context @" in out


def test_cps_text(capsys):
    assert _run(capsys, ["cps", "x"])[1].strip() == r"\k1.\k2.k1 x k2"


def test_flags_after_subcommand(capsys):
    code, out, _ = _run(capsys, ["eval", "omega", "--fuel", "10", "--json"])
    assert code == 3
    assert json.loads(out) == {"result": "timeout", "term": r"(\x.x x) (\x.x x)", "steps": 10}


def test_pool_file(capsys, tmp_path):
    pool = tmp_path / "pool.json"
    pool.write_text(json.dumps({"values": ["i"], "contexts": ["@", "i @"]}))
    code, out, _ = _run(capsys, ["--json", "bisim", "i", r"\x.omega", "--pool", str(pool), "--depth", "1"])
    assert code == 1
    # probe with i, then the value side can take a value probe and the other cannot
    assert json.loads(out)["trace"] == [r"value \x.x", r"value \x.x"]


@pytest.mark.parametrize(
    "argv",
    [["eval", r"\x."], ["eval", "x"], ["bogus"], ["reduce"], ["bisim", "i", "i", "--pool", "/nonexistent"],
     ["eval", "i", "--fuel", "-1"]],
)
def test_input_errors_print_grammar(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        sys.exit(run(argv))
    assert exc.value.code == 2
    assert GRAMMAR.splitlines()[1] in capsys.readouterr().err


def test_negative_cps_verdict(capsys):
    code, out, _ = _run(capsys, ["cps-equiv", "i", "w"])
    assert code == 1 and out.startswith("NotEquivalent")


def test_prove_unknown(capsys):
    code, out, _ = _run(capsys, ["prove", "i", "w", "--budget", "20"])
    assert (code, out.strip()) == (3, "unknown")


def test_parse_command(capsys):
    code, out, _ = _run(capsys, ["--json", "parse", r"λx.⟨x y⟩"])
    assert code == 0
    assert json.loads(out) == {"term": r"\x.<x y>", "closed": False, "free": ["y"]}


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "shiftreset", "eval", "<i>"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == r"value: \x.x"
