import subprocess
import sys

import pytest

from ologkit import load_instance, validate_instance
from ologkit.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def body_of(out):
    """Report lines without the trailing elapsed_ms line."""
    lines = out.rstrip("\n").split("\n")
    assert lines[-1].startswith("elapsed_ms: ")
    int(lines[-1].split(": ")[1])
    return lines[:-1]


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def test_check_bundled_schema_and_instance(capsys):
    code, out = run_cli(capsys, "check", "paper.olog", "protein.oinst")
    assert code == 0
    lines = body_of(out)
    assert lines[0] == "command: check"
    assert lines[1] == "input: bundled:paper.olog"
    assert lines[2] == "input: bundled:protein.oinst"
    assert (
        "schema 'chain-systems': 23 boxes, 42 arrows, 17 equations, 8 pullbacks"
        in lines
    )
    assert "instance 'protein': 285 elements" in lines
    assert sum(" AllHold (" in line for line in lines) == 17
    assert sum(" PASS (" in line for line in lines) == 8
    assert "Counterexample" not in out and "FAIL" not in out
    assert lines[-1] == "verdict: ok"


def test_check_schema_only(capsys):
    code, out = run_cli(capsys, "check", "paper.olog")
    assert code == 0
    assert "AllHold" not in out


def test_check_social_instance(capsys):
    code, out = run_cli(capsys, "check", "paper.olog", "social.oinst")
    assert code == 0
    assert "instance 'social': 285 elements" in out


def test_check_reports_instance_violations(capsys, tmp_path):
    broken = tmp_path / "broken.oinst"
    broken.write_text(
        'instance "broken" of "chain-systems" { set ZZ { z1 } }', encoding="utf-8"
    )
    code, out = run_cli(capsys, "check", "paper.olog", str(broken))
    assert code == 1
    assert "UNKNOWN_BOX" in out
    assert body_of(out)[-1] == "verdict: violation"


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def test_simulate_lifeline_defaults(capsys):
    code, out = run_cli(capsys, "simulate", "--lifeline")
    assert code == 0
    lines = body_of(out)
    assert "failure=100 class=Ductile" in lines
    assert "elements=285" in lines


def test_simulate_bare_defaults_are_brittle(capsys):
    code, out = run_cli(capsys, "simulate")
    assert code == 0
    lines = body_of(out)
    assert "failure=20.6 class=Brittle" in lines
    assert "elements=190" in lines


def test_simulate_social_narrative(capsys):
    code, out = run_cli(capsys, "simulate", "--domain", "social")
    assert code == 0
    lines = body_of(out)
    assert "failure=0.0137673 class=Brittle" in lines
    assert "elements=20210" in lines


def test_simulate_writes_a_loadable_instance(capsys, tmp_path, schema, protein):
    out_file = tmp_path / "generated.oinst"
    code, out = run_cli(capsys, "simulate", "--lifeline", "-o", str(out_file))
    assert code == 0
    assert f"wrote {out_file}" in body_of(out)
    written = load_instance(out_file)
    assert validate_instance(schema, written) == []
    assert written == protein


def test_simulate_rejects_weak_bricks(capsys):
    code, out = run_cli(capsys, "simulate", "--glue-fail", "20.6", "--brick-fail", "30")
    assert code == 3
    assert "error[PARAM_CONSTRAINT]: box N:" in out
    assert body_of(out)[-1] == "verdict: param-constraint"


def test_simulate_rejects_bad_comparator_flags(capsys):
    code, out = run_cli(capsys, "simulate", "--eps-rel", "2.0")
    assert code == 3
    assert "error[DOMAIN]" in out


# ---------------------------------------------------------------------------
# iso / analogy
# ---------------------------------------------------------------------------


def test_iso_bundled_instances(capsys):
    code, out = run_cli(capsys, "iso", "paper.olog", "protein.oinst", "social.oinst")
    assert code == 0
    lines = body_of(out)
    assert "Found" in lines
    assert "A: a1->a1" in lines
    assert any(line.startswith("V: ") for line in lines)


def test_iso_instance_with_itself(capsys):
    code, out = run_cli(capsys, "iso", "paper.olog", "protein.oinst", "protein.oinst")
    assert code == 0
    assert "Found" in body_of(out)


def test_analogy_default_bricks_match(capsys):
    code, out = run_cli(capsys, "analogy")
    assert code == 0
    lines = body_of(out)
    assert "iso: Found (285 elements matched)" in lines
    assert sum(" AllHold (" in line for line in lines) == 34  # 17 per instance
    assert sum(" PASS (" in line for line in lines) == 16


def test_analogy_mismatched_bricks_fail(capsys):
    code, out = run_cli(capsys, "analogy", "--bricks-a", "9", "--bricks-b", "12")
    assert code == 1
    assert "CARDINALITY_MISMATCH" in out


def test_analogy_with_tight_kappa_flags_the_hypothesis_gap(capsys):
    code, out = run_cli(capsys, "analogy", "--kappa", "10")
    assert code == 1
    assert "MISSING_IMAGE" in out
    assert "1/a1" in out


def test_analogy_reports_are_deterministic(capsys):
    code_a, out_a = run_cli(capsys, "analogy")
    code_b, out_b = run_cli(capsys, "analogy")
    assert code_a == code_b == 0
    assert body_of(out_a) == body_of(out_b)


# ---------------------------------------------------------------------------
# pullback
# ---------------------------------------------------------------------------


def test_pullback_command(capsys):
    code, out = run_cli(capsys, "pullback", "paper.olog", "protein.oinst", "9", "26")
    assert code == 0
    lines = body_of(out)
    assert "pullback along 9, 26: 1 pairs" in lines
    assert "(d1, j1)" in lines


def test_pullback_rejects_non_cospans(capsys):
    code, out = run_cli(capsys, "pullback", "paper.olog", "protein.oinst", "9", "14")
    assert code == 1
    assert "error[COSPAN_MISMATCH]" in out


# ---------------------------------------------------------------------------
# error and quiet plumbing
# ---------------------------------------------------------------------------


def test_parse_errors_carry_positions(capsys, tmp_path):
    bad = tmp_path / "bad.olog"
    bad.write_text('schema "t" {\n  box A "an a"\n  arrow f : A ->\n}\n', encoding="utf-8")
    code, out = run_cli(capsys, "check", str(bad))
    assert code == 2
    assert "error[PARSE_ERROR]" in out
    assert f"{bad}:4:1" in out


def test_missing_file_is_a_usage_error(capsys, tmp_path):
    code, out = run_cli(capsys, "check", str(tmp_path / "nope" / "paper.olog"))
    assert code == 2
    assert "no such file" in out


def test_bundled_fallback_needs_a_bare_name(capsys, tmp_path):
    # a pathy reference must not silently reach for the bundled data
    code, out = run_cli(capsys, "check", str(tmp_path / "paper.olog"))
    assert code == 2


def test_unknown_subcommand_is_a_usage_error(capsys):
    assert main(["frobnicate"]) == 2
    assert main([]) == 2
    capsys.readouterr()  # swallow argparse noise


def test_quiet_prints_only_the_verdict(capsys):
    code, out = run_cli(capsys, "iso", "--quiet", "paper.olog", "protein.oinst", "social.oinst")
    assert (code, out) == (0, "ok\n")
    code, out = run_cli(capsys, "analogy", "--quiet", "--bricks-b", "12")
    assert (code, out) == (1, "violation\n")
    code, out = run_cli(capsys, "--quiet", "simulate")
    assert (code, out) == (0, "ok\n")


def test_module_is_runnable_as_a_script():
    proc = subprocess.run(
        [sys.executable, "-m", "ologkit.cli", "simulate", "--quiet"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout == "ok\n"
