"""Tests for the graph spaces, the family construction and its verifier."""
from dataclasses import replace
from fractions import Fraction

import pytest

from core import PartialIsometry, UnknownLabel, is_isometric_embedding, validate_metric
from dap_harness import (
    DapError,
    DapInstance,
    NonPositiveH,
    dap_construct,
    dap_verify,
    demo_instance,
    format_families,
    format_h,
    graph_space,
    load_instance,
    parse_families,
    parse_h,
    random_dap_instance,
)
from utils.error_handler import FormatError


def test_singleton_graph_space():
    graph = graph_space(validate_metric(["x"], [[0]]), {"x": Fraction(1)})
    assert graph.base_part == ("(x,0)",)
    assert graph.graph_part == ("(x,1/1)",)
    assert graph.space.d("(x,0)", "(x,1/1)") == 1


def test_graph_space_distances():
    family = validate_metric(["x", "y"], [[0, 2], [2, 0]])
    graph = graph_space(family, {"x": Fraction(1), "y": Fraction(1)})
    assert graph.space.d("(x,0)", "(y,1/1)") == 3
    assert graph.space.d("(x,1/1)", "(y,1/1)") == 2
    base = PartialIsometry(family, graph.space, (("x", "(x,0)"), ("y", "(y,0)")))
    assert is_isometric_embedding(base)


def test_graph_space_needs_positive_h():
    with pytest.raises(NonPositiveH) as info:
        graph_space(validate_metric(["x"], [[0]]), {"x": Fraction(0)})
    assert info.value.label == "x"


def test_one_family_moves_each_point_by_h():
    ambient = validate_metric(["x"], [[0]])
    trace = dap_construct(DapInstance(ambient, (("x",),), {"x": Fraction(1)}))
    (step,) = trace.steps
    assert step.f == {"x": "x@L1"}
    assert trace.ambient.space.d("x", "x@L1") == 1


def test_two_singleton_families():
    trace = dap_construct(demo_instance())
    space = trace.ambient.space
    assert space.labels == ("x", "x@L1", "x@L2")
    assert space.d("x", "x@L1") == 1
    assert space.d("x", "x@L2") == 1
    assert space.d("x@L2", "x@L1") == 2

    report = dap_verify(trace)
    assert report.ok
    assert [c.lhs for c in report.of_kind("V1")] == [1, 1]
    (v2,) = report.of_kind("V2")
    assert v2.line() == "CHECK V2 n=2 x=x y=x@L1 lhs=2/1 rhs=2/1 PASS"
    (v3,) = report.of_kind("V3")
    assert (v3.lhs, v3.rhs) == (2, 1)


def test_constant_h_keeps_the_family_shape():
    ambient = validate_metric(["x", "y"], [[0, 2], [2, 0]])
    trace = dap_construct(DapInstance(ambient, (("x", "y"),), {"x": Fraction(1), "y": Fraction(1)}))
    assert trace.ambient.space.d("x@L1", "y@L1") == 2
    assert dap_verify(trace).ok


def test_moving_a_point_onto_itself_fails_v1():
    trace = dap_construct(demo_instance())
    broken = replace(trace, steps=(replace(trace.steps[0], f={"x": "x"}),) + trace.steps[1:])
    report = dap_verify(broken)
    assert not report.ok
    failed_v1 = [c for c in report.failed if c.kind == "V1"]
    assert [c.line() for c in failed_v1] == ["CHECK V1 n=1 x=x lhs=0/1 rhs=1/1 FAIL"]


def test_single_family_has_no_separation_checks():
    ambient = validate_metric(["a", "b"], [[0, 1], [1, 0]])
    trace = dap_construct(DapInstance(ambient, (("a", "b"),), {"a": Fraction(1), "b": Fraction(2)}))
    report = dap_verify(trace)
    assert report.of_kind("V3") == []
    assert len(report.of_kind("V4")) == 1
    assert report.ok


def test_report_formats():
    report = dap_verify(dap_construct(demo_instance()))
    lines = report.to_lines().splitlines()
    assert lines[-1] == f"SUMMARY checks={len(report.checks)} passed={len(report.checks)} failed=0"
    assert all(line.endswith("PASS") for line in lines[:-1])
    text = report.to_text()
    assert "V2 d(f_n(x), y) = d(x, y) + h(x) for earlier y: 1/1 passed" in text


def test_random_instances_pass_every_identity():
    """Two hundred seeded instances with up to twelve points and four families."""
    for seed in range(200):
        points = 2 + seed % 11
        families = 1 + seed % 4
        instance = random_dap_instance(seed, points=points, families=families)
        report = dap_verify(dap_construct(instance))
        assert report.ok, report.to_lines()
        assert len(report.of_kind("V1")) == sum(len(family) for family in instance.families)
        assert report.of_kind("V4") and all(check.passed for check in report.of_kind("V4"))


def test_taken_family_labels_get_a_fresh_suffix():
    ambient = validate_metric(["x", "x@L1"], [[0, 3], [3, 0]])
    trace = dap_construct(DapInstance(ambient, (("x",),), {"x": Fraction(1)}))
    (step,) = trace.steps
    assert step.f == {"x": "x@L1.2"}
    space = trace.ambient.space
    assert space.d("x", "x@L1.2") == 1
    assert space.d("x", "x@L1") == 3
    assert dap_verify(trace).ok


def test_random_instances_are_reproducible():
    assert random_dap_instance(5) == random_dap_instance(5)


def test_instance_validation():
    ambient = validate_metric(["x"], [[0]])
    with pytest.raises(DapError):
        DapInstance(ambient, ((),), {"x": Fraction(1)})
    with pytest.raises(UnknownLabel):
        DapInstance(ambient, (("z",),), {"z": Fraction(1)})
    with pytest.raises(DapError):
        DapInstance(ambient, (("x",),), {})
    with pytest.raises(NonPositiveH):
        DapInstance(ambient, (("x",),), {"x": Fraction(-1)})


def test_instance_files(write):
    ambient = write("ambient.space", "2\na b\n0 1\n1 0\n")
    families = write("families.txt", "# K_1\na\na b\n")
    h = write("h.txt", "a 1/2\nb 1\n")
    instance = load_instance(ambient, families, h)
    assert instance.families == (("a",), ("a", "b"))
    assert instance.h == {"a": Fraction(1, 2), "b": Fraction(1)}
    assert parse_families(format_families(instance.families)) == instance.families
    assert parse_h(format_h(instance.h)) == instance.h
    with pytest.raises(FormatError):
        parse_h("a 1\na 2\n")
    with pytest.raises(FormatError):
        parse_families("# nothing\n")
