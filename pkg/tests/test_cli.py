"""Tests for the command-line interface, driven through click's CliRunner."""
import pytest
from click.testing import CliRunner

from builder import load_approximant
from cli import cli
from core import parse_space


@pytest.fixture
def runner():
    return CliRunner()


def test_validate_accepts_a_metric(runner, write):
    space = write("path.space", "3\na b c\n0 1 2\n1 0 1\n2 1 0\n")
    result = runner.invoke(cli, ["validate", str(space)])
    assert result.exit_code == 0
    assert result.output == "OK points=3 diameter=2/1\n"


def test_validate_reports_the_triangle(runner, write):
    space = write("bad.space", "3\na b c\n0 1 3\n1 0 1\n3 1 0\n")
    result = runner.invoke(cli, ["validate", str(space)])
    assert result.exit_code == 1
    assert "TriangleViolation" in result.output
    assert "triple=a,c,b" in result.output


def test_missing_input_is_a_usage_error(runner, tmp_path):
    result = runner.invoke(cli, ["validate", str(tmp_path / "nope.space")])
    assert result.exit_code == 2


def test_unknown_flag_is_a_usage_error(runner, write):
    space = write("one.space", "1\na\n0\n")
    result = runner.invoke(cli, ["validate", "--frobnicate", str(space)])
    assert result.exit_code == 2


def test_amalgamate_two_anchor_example(runner, write, tmp_path):
    m1 = write("m1.space", "3\na b x\n0 2 1\n2 0 3\n1 3 0\n")
    m2 = write("m2.space", "3\na b y\n0 2 4\n2 0 2\n4 2 0\n")
    pairs = write("pairs.txt", "a a\nb b\n")
    out = tmp_path / "union.space"
    result = runner.invoke(cli, ["amalgamate", str(m1), str(m2), str(pairs), "--output", str(out)])
    assert result.exit_code == 0
    union = parse_space(out.read_text())
    assert union.d("x", "y") == 5
    assert "5/1" in out.read_text()


def test_extend_point_with_completion(runner, write):
    space = write("path.space", "3\na b c\n0 1 2\n1 0 1\n2 1 0\n")
    f = write("f.txt", "a 1\n")
    result = runner.invoke(cli, ["extend-point", str(space), str(f), "--label", "n", "--complete", "maximal"])
    assert result.exit_code == 0
    grown = parse_space(result.output)
    assert grown.d("n", "c") == 3

    partial = runner.invoke(cli, ["extend-point", str(space), str(f), "--label", "n"])
    assert partial.exit_code == 1
    assert "KatetovDomainError" in partial.output


def test_random_space_is_byte_identical_per_seed(runner):
    first = runner.invoke(cli, ["random-space", "6", "--seed", "11", "--grid-max", "4"])
    second = runner.invoke(cli, ["random-space", "6", "--seed", "11", "--grid-max", "4"])
    assert first.exit_code == 0
    assert first.output == second.output
    assert len(parse_space(first.output)) == 6


def test_enumerate_counts(runner):
    result = runner.invoke(cli, ["enumerate", "3", "--grid-max", "2"])
    assert result.exit_code == 0
    assert result.output.endswith("# total 8\n")


def test_build_and_embed(runner, write, tmp_path):
    approx = tmp_path / "approx.space"
    built = runner.invoke(cli, ["build-approximant", "--grid-max", "2", "--stages", "1", "--arity", "1",
                                "--output", str(approx)])
    assert built.exit_code == 0
    assert built.output == "points=3 stage=1 sizes=1,3\n"
    assert load_approximant(approx).stage == 1

    small = write("small.space", "2\nx y\n0 2\n2 0\n")
    anchor = write("anchor.txt", "x p0\n")
    embedded = runner.invoke(cli, ["embed", str(small), str(approx), "--anchor", str(anchor)])
    assert embedded.exit_code == 0
    assert embedded.output == "x p0\ny u1_2\n"


def test_embed_failure_exits_one(runner, write):
    ambient = write("tri.space", "3\na b c\n0 1 1\n1 0 1\n1 1 0\n")
    small = write("far.space", "2\nx y\n0 2\n2 0\n")
    anchor = write("anchor.txt", "x a\n")
    result = runner.invoke(cli, ["embed", str(small), str(ambient), "--anchor", str(anchor)])
    assert result.exit_code == 1
    assert "NotRealizable" in result.output


def test_back_and_forth_command(runner, write):
    tri = write("tri.space", "3\na b c\n0 1 1\n1 0 1\n1 1 0\n")
    pairs = write("p.txt", "a b\n")
    result = runner.invoke(cli, ["back-and-forth", str(tri), str(pairs)])
    assert result.exit_code == 0
    assert result.output == "a b\nb a\nc c\n"


def test_dap_demo_machine_lines(runner):
    result = runner.invoke(cli, ["dap-demo", "--format", "lines"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert "CHECK V1 n=1 x=x lhs=1/1 rhs=1/1 PASS" in lines
    assert "CHECK V1 n=2 x=x lhs=1/1 rhs=1/1 PASS" in lines
    assert "CHECK V2 n=2 x=x y=x@L1 lhs=2/1 rhs=2/1 PASS" in lines
    assert "CHECK V3 n=2 j=1 u=x@L2 v=x@L1 lhs=2/1 rhs=1/1 PASS" in lines
    assert lines[-1].endswith("failed=0")


def test_dap_demo_files_go_together(runner, write):
    ambient = write("ambient.space", "1\nx\n0\n")
    result = runner.invoke(cli, ["dap-demo", "--ambient", str(ambient)])
    assert result.exit_code == 2


def test_dap_demo_from_files(runner, write):
    ambient = write("ambient.space", "2\na b\n0 1\n1 0\n")
    families = write("families.txt", "a\nb\n")
    h = write("h.txt", "a 1\nb 1/2\n")
    result = runner.invoke(cli, ["dap-demo", "--ambient", str(ambient), "--families", str(families),
                                 "--h", str(h), "--format", "lines"])
    assert result.exit_code == 0
    assert "CHECK V2 n=2 x=b y=a@L1 lhs=5/2 rhs=5/2 PASS" in result.output.splitlines()
