"""
Amalgamated unions and Katětov one-point extensions.

The union of two spaces glued along a common subspace A takes, for
x in M1 and y in M2 \\ A, the cross distance

    d(h1(x), h2(y)) = min over z in A of d1(x, f1(z)) + d2(f2(z), y)

(A is finite, so the infimum is a minimum). A Katětov function on a base
space prescribes the distances from a prospective new point; it is
admissible exactly when adding that point keeps the space metric.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import config
from core import (
    DuplicateLabel,
    FiniteMetricSpace,
    InvalidLabel,
    PartialIsometry,
    UnknownLabel,
    as_rational,
    format_rational,
    is_isometric_embedding,
    is_valid_label,
    iter_content_lines,
    parse_rational,
)
from utils.error_handler import FormatError, MetricToolkitError, handle_error
from utils.logger import setup_logger

logger = setup_logger(__name__)

Pair = Tuple[str, str]


class AmalgamError(MetricToolkitError):
    """Base class for amalgamation input errors."""
    pass


class EmptyAmalgam(AmalgamError):
    def __init__(self):
        super().__init__("The amalgamated subspace A must be non-empty")


class NonIsometricAmalgamPairs(AmalgamError):
    def __init__(self, witness: Optional[Pair], reason: str):
        self.witness = witness
        super().__init__(
            f"Amalgamation pairs are not an isometry: {reason}",
            details={'witness': witness or ()}
        )


class KatetovViolation(MetricToolkitError):
    """The prescription fails |f(x)-f(y)| <= d(x,y) <= f(x)+f(y) (or positivity)."""

    def __init__(self, x: str, y: str, reason: str, fx: Fraction, fy: Fraction, dxy: Fraction):
        self.pair = (x, y)
        super().__init__(
            f"Katetov condition fails at ({x},{y}): {reason}",
            details={'pair': (x, y), 'fx': fx, 'fy': fy, 'd': dxy}
        )


class KatetovDomainError(MetricToolkitError):
    """A Katětov function is missing values the operation needs."""

    def __init__(self, message: str, label: Optional[str] = None):
        super().__init__(message, details={'label': label} if label else {})


@dataclass(frozen=True)
class NamingPolicy:
    """How points of M2 outside A are named in the union.

    With ``right_namer`` every such point is renamed by the callable and M1
    keeps all its labels. Otherwise labels are kept unless they collide
    with a label of M1: a collision with a point of M1 \\ A renames both
    sides with the suffixes, a collision with an amalgamated label renames
    only the right point.
    """

    left_suffix: str = config.AMALGAM_SUFFIXES[0]
    right_suffix: str = config.AMALGAM_SUFFIXES[1]
    right_namer: Optional[Callable[[str], str]] = None


@dataclass(frozen=True)
class AmalgamSpec:
    m1: FiniteMetricSpace
    m2: FiniteMetricSpace
    a_pairs: Tuple[Pair, ...]

    def __post_init__(self):
        object.__setattr__(self, 'a_pairs', tuple((a, b) for a, b in self.a_pairs))

    def swapped(self) -> 'AmalgamSpec':
        return AmalgamSpec(self.m2, self.m1, tuple((b, a) for a, b in self.a_pairs))


@dataclass(frozen=True)
class AmalgamResult:
    space: FiniteMetricSpace
    h1: PartialIsometry
    h2: PartialIsometry


def _check_spec(spec: AmalgamSpec) -> None:
    if not spec.a_pairs:
        raise EmptyAmalgam()
    for a, b in spec.a_pairs:
        if a not in spec.m1:
            raise UnknownLabel(a, "m1")
        if b not in spec.m2:
            raise UnknownLabel(b, "m2")
    check = is_isometric_embedding(PartialIsometry(spec.m1, spec.m2, spec.a_pairs))
    if not check:
        raise NonIsometricAmalgamPairs(check.witness, check.reason)


def _name_points(spec: AmalgamSpec, naming: NamingPolicy) -> Tuple[Dict[str, str], Dict[str, str]]:
    left_amalgamated = {a for a, _ in spec.a_pairs}
    right_amalgamated = {b for _, b in spec.a_pairs}
    left_names = {label: label for label in spec.m1.labels}
    right_names: Dict[str, str] = {}

    for label in spec.m2.labels:
        if label in right_amalgamated:
            continue
        if naming.right_namer is not None:
            right_names[label] = naming.right_namer(label)
        elif label not in spec.m1:
            right_names[label] = label
        elif label in left_amalgamated:
            right_names[label] = label + naming.right_suffix
        else:
            left_names[label] = label + naming.left_suffix
            right_names[label] = label + naming.right_suffix

    taken = set()
    for name in list(left_names.values()) + list(right_names.values()):
        if not is_valid_label(name):
            raise InvalidLabel(name)
        if name in taken:
            raise DuplicateLabel(name)
        taken.add(name)
    return left_names, right_names


def amalgamated_union(spec: AmalgamSpec, naming: Optional[NamingPolicy] = None) -> AmalgamResult:
    """Glue ``spec.m1`` and ``spec.m2`` along the paired subspace A.

    Points of M1 come first in the result (amalgamated points keep their
    M1 label), followed by the points of M2 \\ A in M2 order.
    """
    _check_spec(spec)
    naming = naming or NamingPolicy()
    m1, m2 = spec.m1, spec.m2
    left_names, right_names = _name_points(spec, naming)

    partner = {b: a for a, b in spec.a_pairs}
    anchors = [(m1.index(a), m2.index(b)) for a, b in spec.a_pairs]
    outside = [y for y in m2.labels if y not in partner]
    outside_index = [m2.index(y) for y in outside]

    rows: List[List[Fraction]] = []
    for i in range(len(m1)):
        row1 = m1.dist[i]
        cross = [
            min(row1[za] + m2.dist[zb][j] for za, zb in anchors)
            for j in outside_index
        ]
        rows.append(list(row1) + cross)
    for pos, j in enumerate(outside_index):
        cross = [rows[i][len(m1) + pos] for i in range(len(m1))]
        rows.append(cross + [m2.dist[j][k] for k in outside_index])

    labels = [left_names[x] for x in m1.labels] + [right_names[y] for y in outside]
    space = FiniteMetricSpace(tuple(labels), tuple(tuple(row) for row in rows))

    h1 = PartialIsometry(m1, space, tuple((x, left_names[x]) for x in m1.labels))
    h2 = PartialIsometry(
        m2, space,
        tuple((y, left_names[partner[y]] if y in partner else right_names[y]) for y in m2.labels)
    )
    logger.debug(
        "amalgamated_union: |M1|=%d |M2|=%d |A|=%d -> %d points",
        len(m1), len(m2), len(spec.a_pairs), len(space)
    )
    return AmalgamResult(space, h1, h2)


@dataclass(frozen=True)
class Interval:
    """Closed rational interval; ``hi`` of None means unbounded.

    ``lo_open`` marks the exclusive lower bound 0 reported when nothing
    constrains the value.
    """

    lo: Fraction
    hi: Optional[Fraction]
    lo_open: bool = False

    def __contains__(self, value: Fraction) -> bool:
        if value < self.lo or (self.lo_open and value == self.lo):
            return False
        return self.hi is None or value <= self.hi

    def is_empty(self) -> bool:
        if self.hi is None:
            return False
        return self.hi < self.lo or (self.lo_open and self.hi == self.lo)

    def __str__(self) -> str:
        left = "(" if self.lo_open else "["
        right = "inf)" if self.hi is None else f"{format_rational(self.hi)}]"
        return f"{left}{format_rational(self.lo)}, {right}"


@dataclass(frozen=True)
class KatetovFunction:
    """Prescribed distances from a prospective new point to points of ``base``."""

    base: FiniteMetricSpace
    values: Dict[str, Fraction] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        values = {}
        for label, value in dict(self.values).items():
            if label not in self.base:
                raise UnknownLabel(label, "Katetov base")
            values[label] = as_rational(value)
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, label: str) -> Fraction:
        return self.values[label]

    def assigned(self) -> Tuple[str, ...]:
        """Assigned labels in base order."""
        return tuple(label for label in self.base.labels if label in self.values)

    def is_total(self) -> bool:
        return len(self.values) == len(self.base)

    def with_value(self, label: str, value: Fraction) -> 'KatetovFunction':
        values = dict(self.values)
        values[label] = value
        return KatetovFunction(self.base, values)

    def violation(self) -> Optional[KatetovViolation]:
        """The lexicographically first failing pair, or None."""
        ordered = sorted(self.values)
        for x in ordered:
            if self.values[x] <= 0:
                return KatetovViolation(x, x, "non-positive value", self.values[x], self.values[x], Fraction(0))
        for i, x in enumerate(ordered):
            fx = self.values[x]
            row = self.base.row(x)
            for y in ordered[i + 1:]:
                fy = self.values[y]
                dxy = row[self.base.index(y)]
                if abs(fx - fy) > dxy:
                    return KatetovViolation(x, y, "|f(x)-f(y)| > d(x,y)", fx, fy, dxy)
                if dxy > fx + fy:
                    return KatetovViolation(x, y, "d(x,y) > f(x)+f(y)", fx, fy, dxy)
        return None

    def check(self) -> 'KatetovFunction':
        error = self.violation()
        if error is not None:
            raise error
        return self

    def is_admissible(self) -> bool:
        return self.violation() is None

    def realized_by(self, label: str) -> bool:
        """True if the existing point ``label`` already has exactly these distances."""
        row = self.base.row(label)
        return all(row[self.base.index(x)] == value for x, value in self.values.items())


def admissible_interval(f: KatetovFunction, target: str) -> Interval:
    """Values for f(target) that keep f a Katětov function.

    lo = max |f(x) - d(x, target)| and hi = min f(x) + d(x, target) over
    the assigned points other than ``target``; with nothing assigned the
    interval is (0, inf).
    """
    row = f.base.row(target)
    constraints = [(value, row[f.base.index(x)]) for x, value in f.values.items() if x != target]
    if not constraints:
        return Interval(Fraction(0), None, lo_open=True)
    lo = max(abs(value - dxy) for value, dxy in constraints)
    hi = min(value + dxy for value, dxy in constraints)
    return Interval(lo, hi)


def maximal_extension(f: KatetovFunction) -> KatetovFunction:
    """Extend f to the whole base by y -> min over assigned x of f(x) + d(x, y)."""
    if not f.values:
        raise KatetovDomainError("The maximal extension needs at least one assigned value")
    items = [(f.base.index(x), value) for x, value in f.values.items()]
    values = dict(f.values)
    for j, label in enumerate(f.base.labels):
        if label not in values:
            values[label] = min(value + f.base.dist[i][j] for i, value in items)
    return KatetovFunction(f.base, values)


def tight_extension(f: KatetovFunction) -> KatetovFunction:
    """Extend f point by point, in base order, with the lowest admissible value.

    A lower end of 0 (the point already realizes f) falls back to the
    upper end so every value stays positive.
    """
    if not f.values:
        raise KatetovDomainError("The tight extension needs at least one assigned value")
    base = f.base
    values = dict(f.values)
    assigned = [(base.index(x), value) for x, value in values.items()]
    for j, label in enumerate(base.labels):
        if label in values:
            continue
        lo = max(abs(value - base.dist[i][j]) for i, value in assigned)
        chosen = lo if lo > 0 else min(value + base.dist[i][j] for i, value in assigned)
        values[label] = chosen
        assigned.append((j, chosen))
    return KatetovFunction(base, values)


def one_point_extension(space: FiniteMetricSpace, f: KatetovFunction, new_label: str) -> FiniteMetricSpace:
    """Add ``new_label`` at distance f(x) from every x of ``space``."""
    if f.base is not space and f.base != space:
        raise KatetovDomainError("Katetov function is defined over a different space")
    if not is_valid_label(new_label):
        raise InvalidLabel(new_label)
    if new_label in space:
        raise DuplicateLabel(new_label)
    for label in space.labels:
        if label not in f.values:
            raise KatetovDomainError(f"Katetov function has no value at {label!r}", label)
    f.check()

    new_row = tuple(f.values[label] for label in space.labels)
    rows = [row + (new_row[i],) for i, row in enumerate(space.dist)]
    rows.append(new_row + (Fraction(0),))
    return FiniteMetricSpace(space.labels + (new_label,), tuple(rows))


def parse_katetov(text: str, base: FiniteMetricSpace, source: Optional[str] = None) -> KatetovFunction:
    """Parse ``label p/q`` lines into a Katětov function over ``base``."""
    values: Dict[str, Fraction] = {}
    for number, line in iter_content_lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"Expected 'label value', got {line!r}", line=number, source=source)
        label, raw = parts
        if label in values:
            raise FormatError(f"Label {label!r} assigned twice", line=number, source=source)
        if label not in base:
            raise UnknownLabel(label, "Katetov base")
        values[label] = parse_rational(raw, line=number)
    return KatetovFunction(base, values)


def format_katetov(f: KatetovFunction) -> str:
    return "".join(f"{label} {format_rational(f.values[label])}\n" for label in f.assigned())


def parse_pairs(text: str, source: Optional[str] = None) -> Tuple[Pair, ...]:
    """Parse ``label1 label2`` lines."""
    pairs = []
    for number, line in iter_content_lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"Expected 'label1 label2', got {line!r}", line=number, source=source)
        pairs.append((parts[0], parts[1]))
    return tuple(pairs)


def format_pairs(pairs: Iterable[Pair]) -> str:
    return "".join(f"{a} {b}\n" for a, b in pairs)


@handle_error(OSError)
def load_katetov(path: Union[str, Path], base: FiniteMetricSpace) -> KatetovFunction:
    path = Path(path)
    return parse_katetov(path.read_text(encoding="utf-8"), base, source=str(path))


@handle_error(OSError)
def load_pairs(path: Union[str, Path]) -> Tuple[Pair, ...]:
    path = Path(path)
    return parse_pairs(path.read_text(encoding="utf-8"), source=str(path))
