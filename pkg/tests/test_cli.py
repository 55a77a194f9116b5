import io
import json
import subprocess
import sys

import pytest

from aleph.cli import (
    EXIT_AMBIGUOUS,
    EXIT_FUEL,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_STALL,
    EXIT_STRICT,
    Flags,
    Session,
    main,
)


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_run_addition():
    code, out, err = invoke("run", "arith.al", "--term", "+ 3 2 ()")
    assert code == EXIT_OK
    assert out == "() 5 2 +\n"
    assert "L001" in err  # linearity lint is advisory


@pytest.mark.parametrize("program, term", [
    ("arith.al", "Sq 6 ()"),
    ("arith.al", "+ 4 7 ()"),
    ("pairs.al", "Pair 2 3 1 4 ()"),
])
def test_run_output_feeds_back_to_input(program, term):
    _, out, _ = invoke("run", program, "--term", term)
    code, back, _ = invoke("run", program, "--term", out.strip())
    assert code == EXIT_OK and back == term + "\n"


def test_no_sugar_output():
    _, out, _ = invoke("run", "arith.al", "--no-sugar", "--term", "+ Z (S Z) ()")
    assert out == "() (S Z) (S Z) +\n"


def test_trace_output():
    code, out, _ = invoke("trace", "arith.al", "--term", "+ 1 0 ()")
    assert code == EXIT_OK
    assert out.splitlines() == ["! + 1 0 ()", "| () 1 0 +  -- add-base", "! () 1 0 +"]


def test_check_clean_program():
    code, out, _ = invoke("check", "arith.al")
    assert code == EXIT_OK
    lines = out.splitlines()
    # four halting patterns in the file plus the built-in unit pattern
    assert lines[-1] == "5 computational, 5 halting; 0 error(s), 2 warning(s)"
    assert sum("L001" in l for l in lines) == 2


@pytest.mark.parametrize("name", ["ambiguous_halting.al", "ambiguous_triple.al", "palindrome.al"])
def test_check_ambiguous(name):
    code, out, _ = invoke("check", name)
    assert code == EXIT_AMBIGUOUS
    assert "witness:" in out


def test_check_strict():
    assert invoke("check", "--strict", "arith.al")[0] == EXIT_STRICT


def test_run_refuses_ambiguous_program_unless_forced():
    code, out, err = invoke("run", "ambiguous_halting.al", "--term", "A 1")
    assert code == EXIT_AMBIGUOUS and out == "" and "--force" in err
    code, out, _ = invoke("run", "ambiguous_halting.al", "--force", "--term", "A 1")
    assert code == EXIT_STALL
    assert out.startswith("stall: ambiguous at A 1")


def test_stall_exit_code():
    code, out, _ = invoke("run", "arith.al", "--term", "() 10 Sq")
    assert code == EXIT_STALL
    assert out.splitlines()[:3] == [
        "stall: unification-failure at () 0 3 +",
        "bindings: {s'' ↦ 0, k ↦ 3}",
        "location: sq-step~:sq-step.2~",
    ]


def test_fuel_exit_code():
    code, out, _ = invoke("run", "counter.al", "--fuel", "20", "--term", "Count ()")
    assert code == EXIT_FUEL
    assert out.startswith("stall: fuel-exhausted")


def test_nonpositive_fuel_rejected():
    assert invoke("run", "arith.al", "--fuel", "0", "--term", "+ 1 1 ()")[0] == EXIT_PARSE


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.al"
    bad.write_text("! A x ;\n@f A x = B x\n")
    code, _, err = invoke("check", str(bad))
    assert code == EXIT_PARSE
    assert "end of input" in err


def test_missing_file_and_bad_term():
    assert invoke("check", "no-such-file.al")[0] == EXIT_PARSE
    code, _, err = invoke("run", "arith.al", "--term", "+ x 1 ()")
    assert code == EXIT_PARSE and "x" in err
    assert invoke("run", "arith.al")[0] == EXIT_PARSE


def test_duplicate_label_is_a_load_error(tmp_path):
    f = tmp_path / "dup.al"
    f.write_text("! A x ; ! B x ;\n@f A x = B x ;\n@f A (x) = B (x) ;\n")
    assert invoke("check", str(f))[0] == EXIT_PARSE


def test_several_files_are_concatenated(tmp_path):
    extra = tmp_path / "extra.al"
    extra.write_text("! Sqr x ;\n! () y Sqr ;\n@sqr Sqr x = () y Sqr : Sq x () = () y Sq .\n")
    code, out, _ = invoke("run", "arith.al", str(extra), "--term", "Sqr 4")
    assert code == EXIT_OK and out == "() 16 Sqr\n"


def test_aleph_path(tmp_path, monkeypatch):
    (tmp_path / "mine.al").write_text("! Ping ; ! Pong ;\n@p Ping = Pong ;\n")
    monkeypatch.setenv("ALEPH_PATH", str(tmp_path))
    code, out, _ = invoke("run", "mine.al", "--term", "Ping")
    assert code == EXIT_OK and out == "Pong\n"


def test_machine_output_is_stable():
    args = ("run", "pairs.al", "--machine", "--seed", "7", "--term", "Pair 3 2 4 1 ()")
    first, second = invoke(*args), invoke(*args)
    assert first == second
    doc = json.loads(first[1])
    assert doc["exit_code"] == EXIT_OK
    assert doc["output"] == "() 5 2 5 1 Pair"
    assert doc["root_states"][0] == "Pair 3 2 4 1 ()"


def test_machine_stall_document():
    code, out, _ = invoke("run", "arith.al", "--machine", "--term", "() 10 Sq")
    doc = json.loads(out)
    assert code == EXIT_STALL == doc["exit_code"]
    assert doc["stall"]["reason"] == "unification-failure"
    assert doc["stall"]["bindings"] == {"s''": "0", "k": "3"}
    assert doc["root_states"][-1] == "Sq 1 3 Sq"


def test_machine_check_document():
    code, out, _ = invoke("check", "--machine", "ambiguous_triple.al")
    doc = json.loads(out)
    assert code == EXIT_AMBIGUOUS == doc["exit_code"]
    (finding,) = doc["findings"]
    assert finding["code"] == "A001"
    assert finding["labels"] == ["to-b", "to-c", "to-d"]
    assert finding["witness"] == "A _"


def test_verify_subcommand():
    code, out, _ = invoke("verify")
    assert code == EXIT_OK
    assert out.splitlines() and all(l.startswith("PASS") for l in out.splitlines())


def test_max_depth_guard():
    # adding 200 nests 200 child evaluations
    code, out, _ = invoke("run", "arith.al", "--max-depth", "100", "--term", "+ 0 200 ()")
    assert code == EXIT_FUEL and "--max-depth" in out
    code, out, _ = invoke("run", "arith.al", "--max-depth", "2000", "--term", "+ 0 200 ()")
    assert code == EXIT_OK and out == "() 200 200 +\n"


def test_repl_session():
    session = Session(["arith.al"], Flags())
    assert session.execute("+ 2 2 ()") == ["() 4 2 +"]
    assert session.execute("Sq 0 ()") == ["() 0 Sq"]
    assert session.execute("() 0 Sq") == ["Sq 0 ()"]
    assert any("L001" in l for l in session.execute(":check"))
    assert session.execute(":trace on") == ["trace on"]
    assert session.execute("+ 0 0 ()")[0] == "! + 0 0 ()"
    # errors are reported per line and the session continues
    assert session.execute("+ x ()")[0].startswith("error:")
    assert session.execute(":bogus")[0].startswith("unknown directive")
    assert session.execute(":load nowhere.al")[0].startswith("error:")
    assert session.execute(":trace off") == ["trace off"]
    assert session.execute("+ 1 1 ()") == ["() 2 1 +"]
    session.execute(":quit")
    assert session.done


def test_repl_loop_reads_until_eof():
    stdin = io.StringIO("+ 1 2 ()\n-- comment\n:nope\n() 9 Sq\n")
    stdout = io.StringIO()
    assert main(["repl", "arith.al"], stdout, io.StringIO(), stdin) == EXIT_OK
    lines = stdout.getvalue().splitlines()
    assert lines[0] == "() 3 2 +"
    assert lines[1].startswith("unknown directive")
    assert lines[2] == "Sq 3 ()"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aleph", "run", "arith.al", "--term", "Sq 4 ()"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout == "() 16 Sq\n"
