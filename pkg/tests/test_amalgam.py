"""Tests for amalgamated unions and Katětov one-point extensions."""
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from amalgam import (
    AmalgamSpec,
    EmptyAmalgam,
    Interval,
    KatetovDomainError,
    KatetovFunction,
    KatetovViolation,
    NamingPolicy,
    NonIsometricAmalgamPairs,
    admissible_interval,
    amalgamated_union,
    format_katetov,
    maximal_extension,
    one_point_extension,
    parse_katetov,
    parse_pairs,
    tight_extension,
)
from core import (
    DuplicateLabel,
    PartialIsometry,
    UnknownLabel,
    ValidationError,
    is_isometric_embedding,
    restrict,
    validate_metric,
)
from generator import DistanceGrid, PortableRng, random_space
from utils.error_handler import FormatError


def test_single_anchor_distance_adds_up():
    m1 = validate_metric(["a", "x"], [[0, 1], [1, 0]])
    m2 = validate_metric(["a", "y"], [[0, 2], [2, 0]])
    result = amalgamated_union(AmalgamSpec(m1, m2, (("a", "a"),)))
    assert result.space.labels == ("a", "x", "y")
    assert result.space.d("x", "y") == 3


def test_two_anchors_take_the_minimum():
    m1 = validate_metric(["a", "b", "x"], [[0, 2, 1], [2, 0, 3], [1, 3, 0]])
    m2 = validate_metric(["a", "b", "y"], [[0, 2, 4], [2, 0, 2], [4, 2, 0]])
    result = amalgamated_union(AmalgamSpec(m1, m2, (("a", "a"), ("b", "b"))))
    assert result.space.d("x", "y") == 5
    validate_metric(result.space.labels, result.space.dist)
    assert is_isometric_embedding(result.h1)
    assert is_isometric_embedding(result.h2)


def test_full_overlap_gives_back_the_space(path3):
    result = amalgamated_union(AmalgamSpec(path3, path3, tuple((x, x) for x in path3.labels)))
    assert result.space == path3


def test_amalgamated_points_keep_their_distances(path3):
    """Distances to the glued points are the ones both sides agree on."""
    other = validate_metric(["p", "q", "z"], [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    result = amalgamated_union(AmalgamSpec(path3, other, (("a", "p"), ("b", "q"))))
    h2 = result.h2.as_dict()
    assert h2["p"] == "a" and h2["q"] == "b"
    assert result.space.d("a", h2["z"]) == 3
    assert result.space.d("b", h2["z"]) == 2


def test_amalgam_errors(path3, unit_pair):
    with pytest.raises(EmptyAmalgam):
        amalgamated_union(AmalgamSpec(path3, unit_pair, ()))
    with pytest.raises(UnknownLabel):
        amalgamated_union(AmalgamSpec(path3, unit_pair, (("q", "x"),)))
    with pytest.raises(NonIsometricAmalgamPairs):
        amalgamated_union(AmalgamSpec(path3, unit_pair, (("a", "x"), ("c", "y"))))


def test_colliding_labels_get_suffixes():
    m1 = validate_metric(["a", "x"], [[0, 1], [1, 0]])
    m2 = validate_metric(["b", "x"], [[0, 2], [2, 0]])
    result = amalgamated_union(AmalgamSpec(m1, m2, (("a", "b"),)))
    assert result.space.labels == ("a", "x.1", "x.2")
    assert result.space.d("x.1", "x.2") == 3


def test_custom_namer_and_duplicate_names(unit_pair):
    m1 = validate_metric(["a", "b"], [[0, 1], [1, 0]])
    renamed = amalgamated_union(
        AmalgamSpec(m1, unit_pair, (("a", "x"),)), NamingPolicy(right_namer=lambda y: f"new_{y}")
    )
    assert renamed.space.labels == ("a", "b", "new_y")
    with pytest.raises(DuplicateLabel):
        amalgamated_union(AmalgamSpec(m1, unit_pair, (("a", "x"),)), NamingPolicy(right_namer=lambda y: "b"))


def test_admissible_interval_examples(path3):
    pair = validate_metric(["a", "b"], [[0, 2], [2, 0]])
    assert admissible_interval(KatetovFunction(pair, {"a": 1}), "b") == Interval(Fraction(1), Fraction(3))
    f = KatetovFunction(path3, {"a": 1, "b": 2})
    assert admissible_interval(f, "c") == Interval(Fraction(1), Fraction(3))
    empty = admissible_interval(KatetovFunction(path3), "a")
    assert empty.lo == 0 and empty.hi is None and empty.lo_open
    assert Fraction(0) not in empty and Fraction(7) in empty


def test_admissible_interval_matches_brute_force(path3):
    """Every grid value inside the interval extends to a metric, and none outside does."""
    f = KatetovFunction(path3, {"a": 1, "b": 2})
    interval = admissible_interval(f, "c")
    for k in range(1, 13):
        value = Fraction(k, 2)
        row = [f["a"], f["b"], value]
        dist = [list(r) + [row[i]] for i, r in enumerate(path3.dist)] + [row + [0]]
        try:
            validate_metric(["a", "b", "c", "n"], dist)
            extends = True
        except ValidationError:
            extends = False
        assert extends == (value in interval)


def test_one_point_extension_examples(path3):
    single = validate_metric(["a"], [[0]])
    two = one_point_extension(single, KatetovFunction(single, {"a": 1}), "n")
    assert two.d("a", "n") == 1

    four = one_point_extension(path3, KatetovFunction(path3, {"a": 1, "b": 2, "c": 1}), "n")
    validate_metric(four.labels, four.dist)
    assert four.labels == ("a", "b", "c", "n")


def test_one_point_extension_rejects_bad_functions(path3):
    far = validate_metric(["a", "b"], [[0, 5], [5, 0]])
    with pytest.raises(KatetovViolation) as info:
        one_point_extension(far, KatetovFunction(far, {"a": 1, "b": 1}), "n")
    assert info.value.pair == ("a", "b")
    with pytest.raises(KatetovDomainError):
        one_point_extension(path3, KatetovFunction(path3, {"a": 1}), "n")
    with pytest.raises(DuplicateLabel):
        one_point_extension(path3, KatetovFunction(path3, {"a": 1, "b": 1, "c": 1}), "a")


def test_maximal_and_tight_extensions(path3):
    f = KatetovFunction(path3, {"a": 1})
    maximal = maximal_extension(f)
    assert maximal.values == {"a": 1, "b": 2, "c": 3}
    tight = tight_extension(f)
    assert tight.values == {"a": 1, "b": 2, "c": 1}
    assert maximal.is_admissible() and tight.is_admissible()
    with pytest.raises(KatetovDomainError):
        maximal_extension(KatetovFunction(path3))


def test_existing_point_realizes_its_own_distances(path3):
    f = KatetovFunction(path3, {"a": 1, "c": 1})
    assert f.realized_by("b")
    assert not f.realized_by("a")


def test_katetov_and_pairs_files(path3):
    f = parse_katetov("# f\na 1\nc 3/2\n", path3)
    assert f.values == {"a": Fraction(1), "c": Fraction(3, 2)}
    assert format_katetov(f) == "a 1/1\nc 3/2\n"
    assert parse_pairs("a x\nb y\n") == (("a", "x"), ("b", "y"))
    with pytest.raises(FormatError):
        parse_katetov("a 1\na 2\n", path3)
    with pytest.raises(UnknownLabel):
        parse_katetov("z 1\n", path3)
    with pytest.raises(FormatError):
        parse_pairs("a\n")


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=6), st.integers(min_value=0, max_value=2 ** 32))
def test_gluing_a_space_to_itself_along_a_subset_is_metric(n, seed):
    space = random_space(n, DistanceGrid(1, 4), seed)
    shared = space.labels[: n // 2 + 1]
    result = amalgamated_union(
        AmalgamSpec(space, space, tuple((x, x) for x in shared)),
        NamingPolicy(right_namer=lambda y: y + "_copy"),
    )
    validate_metric(result.space.labels, result.space.dist)
    assert is_isometric_embedding(result.h1)
    assert is_isometric_embedding(result.h2)
    assert restrict(result.space, space.labels) == space


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2 ** 32),
       st.integers(min_value=1, max_value=4))
def test_maximal_extension_of_one_value_extends_the_space(n, seed, value):
    space = random_space(n, DistanceGrid(1, 4), seed)
    f = maximal_extension(KatetovFunction(space, {space.labels[0]: value}))
    grown = one_point_extension(space, f, "new")
    validate_metric(grown.labels, grown.dist)
    assert is_isometric_embedding(PartialIsometry.inclusion(space, grown))


def _grow(space, extra, grid, rng, prefix):
    for k in range(extra):
        f = KatetovFunction(space, {})
        for x in space.labels:
            f = f.with_value(x, rng.choice(grid.points_in(admissible_interval(f, x))))
        space = one_point_extension(space, f, f"{prefix}{k}")
    return space


def _glued_pair(shared, left, right, q, b, seed):
    grid = DistanceGrid(q, b)
    rng = PortableRng(seed)
    base = random_space(shared, grid, rng)
    m1 = _grow(base, left, grid, rng, "a")
    m2 = _grow(base.relabel({x: "s" + x for x in base.labels}), right, grid, rng, "b")
    return AmalgamSpec(m1, m2, tuple((x, "s" + x) for x in base.labels))


glued_pairs = st.builds(
    _glued_pair,
    st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=5),
    st.integers(min_value=0, max_value=5), st.integers(min_value=1, max_value=4),
    st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2 ** 32),
)


@settings(max_examples=50, deadline=None)
@given(glued_pairs)
def test_independent_spaces_glue_over_a_shared_part(spec):
    result = amalgamated_union(spec)
    space = result.space
    validate_metric(space.labels, space.dist)
    assert is_isometric_embedding(result.h1)
    assert is_isometric_embedding(result.h2)
    assert len(space) == len(spec.m1) + len(spec.m2) - len(spec.a_pairs)
    left, right = result.h1.as_dict(), result.h2.as_dict()
    for u in spec.m1.labels:
        for v in spec.m2.labels:
            through = min(spec.m1.d(u, a) + spec.m2.d(b, v) for a, b in spec.a_pairs)
            assert space.d(left[u], right[v]) == through


@settings(max_examples=50, deadline=None)
@given(glued_pairs)
def test_swapping_the_sides_gives_the_same_space(spec):
    result = amalgamated_union(spec)
    swapped = amalgamated_union(spec.swapped())
    assert len(swapped.space) == len(result.space)
    left, right = result.h1.as_dict(), result.h2.as_dict()
    other_left, other_right = swapped.h2.as_dict(), swapped.h1.as_dict()
    for u in spec.m1.labels:
        for v in spec.m2.labels:
            assert result.space.d(left[u], right[v]) == swapped.space.d(other_left[u], other_right[v])
    for u in spec.m2.labels:
        for v in spec.m2.labels:
            assert result.space.d(right[u], right[v]) == swapped.space.d(other_right[u], other_right[v])


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=2 ** 32),
       st.lists(st.integers(min_value=0, max_value=8), min_size=5, max_size=5))
def test_one_point_extension_accepts_exactly_the_metric_extensions(n, seed, halves):
    space = random_space(n, DistanceGrid(2, 6), seed)
    values = {x: Fraction(k, 2) for x, k in zip(space.labels, halves)}
    row = [values[x] for x in space.labels]
    matrix = [list(r) + [value] for r, value in zip(space.dist, row)] + [row + [Fraction(0)]]
    try:
        validate_metric(space.labels + ("new",), matrix)
    except ValidationError:
        with pytest.raises(KatetovViolation):
            one_point_extension(space, KatetovFunction(space, values), "new")
    else:
        grown = one_point_extension(space, KatetovFunction(space, values), "new")
        assert grown.dist == tuple(tuple(r) for r in matrix)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=2, max_value=7), st.integers(min_value=0, max_value=2 ** 32),
       st.integers(min_value=0, max_value=2 ** 32))
def test_admissible_interval_of_a_katetov_function_is_never_empty(n, seed, pick):
    space = random_space(n + 1, DistanceGrid(1, 5), seed)
    *labels, last = space.labels
    base = restrict(space, labels)
    rng = PortableRng(pick)
    assigned = rng.sample(labels, 1 + rng.below(n - 1))
    f = KatetovFunction(base, {x: space.d(x, last) for x in assigned})
    for target in labels:
        if target in f.values:
            continue
        interval = admissible_interval(f, target)
        assert not interval.is_empty()
        assert space.d(target, last) in interval
