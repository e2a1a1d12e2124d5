"""
Finite metric spaces over exact rationals.

Holds the space and partial-isometry types, the metric-axiom validator,
subspace formation, the brute-force embedding search used as an oracle,
and the canonical text format every other module reads and writes.
"""
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from utils.error_handler import FormatError, MetricToolkitError, handle_error
from utils.logger import setup_logger

logger = setup_logger(__name__)

Rational = Fraction
Label = str
Pair = Tuple[str, str]

_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


class ValidationError(MetricToolkitError):
    """A label list or distance matrix breaks the metric-space rules."""
    pass


class ShapeMismatch(ValidationError):
    def __init__(self, message: str, rows: int, labels: int):
        super().__init__(message, details={'rows': rows, 'labels': labels})


class DuplicateLabel(ValidationError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"Label {label!r} occurs more than once", details={'label': label})


class InvalidLabel(ValidationError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(
            f"Label {label!r} must be non-empty, whitespace-free and not start with '#'",
            details={'label': label}
        )


class ZeroDiagonalViolation(ValidationError):
    def __init__(self, label: str, value: Fraction):
        self.label = label
        super().__init__(
            f"d({label},{label}) = {format_rational(value)} is not 0",
            details={'point': label, 'value': value}
        )


class SymmetryViolation(ValidationError):
    def __init__(self, x: str, y: str, forward: Fraction, backward: Fraction):
        self.pair = (x, y)
        super().__init__(
            f"d({x},{y}) = {format_rational(forward)} but d({y},{x}) = {format_rational(backward)}",
            details={'pair': (x, y), 'forward': forward, 'backward': backward}
        )


class PositivityViolation(ValidationError):
    def __init__(self, x: str, y: str, value: Fraction):
        self.pair = (x, y)
        super().__init__(
            f"distinct points {x} and {y} are at distance {format_rational(value)}",
            details={'pair': (x, y), 'value': value}
        )


class TriangleViolation(ValidationError):
    def __init__(self, x: str, z: str, y: str, direct: Fraction, detour: Fraction):
        self.triple = (x, z, y)
        super().__init__(
            f"d({x},{z}) = {format_rational(direct)} exceeds d({x},{y}) + d({y},{z}) = {format_rational(detour)}",
            details={'triple': (x, z, y), 'direct': direct, 'detour': detour}
        )


class UnknownLabel(MetricToolkitError):
    def __init__(self, label: str, where: str = "space"):
        self.label = label
        super().__init__(f"Unknown label {label!r} in {where}", details={'label': label})


class EmptySubset(MetricToolkitError):
    def __init__(self):
        super().__init__("Subspace must contain at least one point")


def as_rational(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce an int, ``Fraction`` or ``p/q`` string; floats are refused."""
    if isinstance(value, bool):
        raise ValidationError(f"Not a distance: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise ValidationError(f"Distances must be exact rationals, got {type(value).__name__}", details={'value': repr(value)})


def parse_rational(text: str, line: Optional[int] = None) -> Fraction:
    """Parse ``p/q`` or an integer ``k`` (meaning k/1)."""
    match = _RATIONAL_RE.match(text.strip())
    if not match:
        raise FormatError(f"Not a rational number: {text!r}", line=line)
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise FormatError(f"Zero denominator in {text!r}", line=line)
    return Fraction(numerator, denominator)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def is_valid_label(label: str) -> bool:
    return isinstance(label, str) and bool(label) and not label.startswith('#') and not any(c.isspace() for c in label)


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A labeled finite metric space; matrix order follows ``labels``.

    Build instances through :func:`validate_metric` (or the operations of
    this package); the constructor itself does not check the axioms.
    """

    labels: Tuple[str, ...]
    dist: Tuple[Tuple[Fraction, ...], ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'labels', tuple(self.labels))
        object.__setattr__(self, 'dist', tuple(tuple(row) for row in self.dist))
        object.__setattr__(self, '_index', {label: i for i, label in enumerate(self.labels)})

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def __str__(self) -> str:
        return format_space(self)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabel(label) from None

    def d(self, x: str, y: str) -> Fraction:
        return self.dist[self.index(x)][self.index(y)]

    def row(self, label: str) -> Tuple[Fraction, ...]:
        return self.dist[self.index(label)]

    def diameter(self) -> Fraction:
        return max((value for row in self.dist for value in row), default=Fraction(0))

    def relabel(self, mapping: Mapping[str, str]) -> 'FiniteMetricSpace':
        """Rename points; labels missing from ``mapping`` keep their name."""
        return validate_metric([mapping.get(label, label) for label in self.labels], self.dist)


def validate_metric(labels: Sequence[str], dist: Sequence[Sequence[Union[int, str, Fraction]]]) -> FiniteMetricSpace:
    """Check the metric axioms and return the space.

    Raises the first violated rule in the order: labels, shape, zero
    diagonal, symmetry, positivity, triangle inequality. Pairs and
    triples are scanned in label-list order.
    """
    labels = list(labels)
    seen = set()
    for label in labels:
        if not is_valid_label(label):
            raise InvalidLabel(label)
        if label in seen:
            raise DuplicateLabel(label)
        seen.add(label)

    n = len(labels)
    if len(dist) != n or any(len(row) != n for row in dist):
        raise ShapeMismatch(f"Distance matrix must be {n}x{n}", rows=len(dist), labels=n)

    matrix = [[as_rational(value) for value in row] for row in dist]

    for i in range(n):
        if matrix[i][i] != 0:
            raise ZeroDiagonalViolation(labels[i], matrix[i][i])
    for i in range(n):
        for j in range(i + 1, n):
            if matrix[i][j] != matrix[j][i]:
                raise SymmetryViolation(labels[i], labels[j], matrix[i][j], matrix[j][i])
    for i in range(n):
        for j in range(i + 1, n):
            if matrix[i][j] <= 0:
                raise PositivityViolation(labels[i], labels[j], matrix[i][j])
    for i in range(n):
        row_i = matrix[i]
        for k in range(i + 1, n):
            direct = row_i[k]
            for j in range(n):
                if j == i or j == k:
                    continue
                detour = row_i[j] + matrix[j][k]
                if direct > detour:
                    raise TriangleViolation(labels[i], labels[k], labels[j], direct, detour)

    return FiniteMetricSpace(tuple(labels), tuple(tuple(row) for row in matrix))


def restrict(space: FiniteMetricSpace, subset: Iterable[str]) -> FiniteMetricSpace:
    """Induced subspace on ``subset``, points kept in the space's own order."""
    wanted = set()
    for label in subset:
        space.index(label)
        wanted.add(label)
    if not wanted:
        raise EmptySubset()
    if len(wanted) == len(space):
        return space
    indices = [i for i, label in enumerate(space.labels) if label in wanted]
    return FiniteMetricSpace(
        tuple(space.labels[i] for i in indices),
        tuple(tuple(space.dist[i][j] for j in indices) for i in indices)
    )


@dataclass(frozen=True)
class PartialIsometry:
    """A partial map between two labeled spaces, given as label pairs.

    Construction does not check anything; use
    :func:`is_isometric_embedding` for that.
    """

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    pairs: Tuple[Pair, ...]

    def __post_init__(self):
        object.__setattr__(self, 'pairs', tuple((a, b) for a, b in self.pairs))

    @classmethod
    def inclusion(cls, subspace: FiniteMetricSpace, space: FiniteMetricSpace) -> 'PartialIsometry':
        return cls(subspace, space, tuple((label, label) for label in subspace.labels))

    @classmethod
    def identity(cls, space: FiniteMetricSpace, labels: Optional[Iterable[str]] = None) -> 'PartialIsometry':
        chosen = space.labels if labels is None else labels
        return cls(space, space, tuple((label, label) for label in chosen))

    def __len__(self) -> int:
        return len(self.pairs)

    def domain(self) -> Tuple[str, ...]:
        return tuple(a for a, _ in self.pairs)

    def image(self) -> Tuple[str, ...]:
        return tuple(b for _, b in self.pairs)

    def as_dict(self) -> Dict[str, str]:
        return dict(self.pairs)

    def is_total(self) -> bool:
        return set(self.domain()) == set(self.source.labels)

    def is_bijective(self) -> bool:
        return self.is_total() and set(self.image()) == set(self.target.labels) and len(set(self.image())) == len(self.pairs)

    def inverse(self) -> 'PartialIsometry':
        return PartialIsometry(self.target, self.source, tuple((b, a) for a, b in self.pairs))


@dataclass(frozen=True)
class EmbeddingCheck:
    """Outcome of :func:`is_isometric_embedding`; falsy on failure."""

    ok: bool
    witness: Optional[Pair] = None
    reason: str = ""
    expected: Optional[Fraction] = None
    actual: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.ok


def is_isometric_embedding(p: PartialIsometry) -> EmbeddingCheck:
    """True iff ``p`` is injective and preserves every pairwise distance."""
    for a, b in p.pairs:
        if a not in p.source:
            raise UnknownLabel(a, "source")
        if b not in p.target:
            raise UnknownLabel(b, "target")

    seen_source: Dict[str, str] = {}
    seen_target: Dict[str, str] = {}
    for a, b in p.pairs:
        if a in seen_source:
            if seen_source[a] == b:
                continue
            return EmbeddingCheck(False, (a, a), "source point mapped twice")
        if b in seen_target:
            return EmbeddingCheck(False, (seen_target[b], a), "two points share an image")
        seen_source[a] = b
        seen_target[b] = a

    items = list(seen_source.items())
    source, target = p.source, p.target
    for i, (a, a_image) in enumerate(items):
        row_a = source.row(a)
        row_image = target.row(a_image)
        for b, b_image in items[i + 1:]:
            expected = row_a[source.index(b)]
            actual = row_image[target.index(b_image)]
            if expected != actual:
                return EmbeddingCheck(
                    False, (a, b),
                    f"d({a},{b}) = {format_rational(expected)} but images are {format_rational(actual)} apart",
                    expected, actual
                )
    return EmbeddingCheck(True)


def find_embeddings(
    small: FiniteMetricSpace,
    big: FiniteMetricSpace,
    limit: Optional[int] = None,
    anchor: Optional[Union[PartialIsometry, Mapping[str, str]]] = None
) -> List[PartialIsometry]:
    """All total isometric embeddings of ``small`` into ``big``.

    Points of ``small`` are assigned in lexicographic label order and
    candidates tried in lexicographic order, so the result list is sorted
    by the tuple of images. With ``anchor`` only embeddings extending it
    are returned.
    """
    fixed = dict(anchor.pairs) if isinstance(anchor, PartialIsometry) else dict(anchor or {})
    if fixed:
        if not is_isometric_embedding(PartialIsometry(small, big, tuple(fixed.items()))):
            return []

    order = sorted(small.labels)
    free = [x for x in order if x not in fixed]
    candidates = [big.index(y) for y in sorted(big.labels)]
    small_rows = {x: small.row(x) for x in order}
    small_index = {x: small.index(x) for x in order}

    assigned: List[Tuple[str, int]] = [(x, big.index(y)) for x, y in fixed.items()]
    used = {j for _, j in assigned}
    results: List[PartialIsometry] = []

    def search(depth: int) -> bool:
        if limit is not None and len(results) >= limit:
            return True
        if depth == len(free):
            images = dict((x, big.labels[j]) for x, j in assigned)
            results.append(PartialIsometry(small, big, tuple((x, images[x]) for x in order)))
            return limit is not None and len(results) >= limit
        x = free[depth]
        row_x = small_rows[x]
        for j in candidates:
            if j in used:
                continue
            row_j = big.dist[j]
            if all(row_x[small_index[a]] == row_j[k] for a, k in assigned):
                assigned.append((x, j))
                used.add(j)
                done = search(depth + 1)
                assigned.pop()
                used.discard(j)
                if done:
                    return True
        return False

    search(0)
    logger.debug("find_embeddings: %d result(s) for %d into %d points", len(results), len(small), len(big))
    return results


def iter_content_lines(text: str) -> Iterator[Tuple[int, str]]:
    """Yield (line number, stripped line), skipping blanks and '#' comments."""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        yield number, line


def parse_space(text: str, source: Optional[str] = None) -> FiniteMetricSpace:
    """Parse the canonical metric-space text format and validate it."""
    lines = list(iter_content_lines(text))
    if not lines:
        raise FormatError("Missing point count", source=source)
    number, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise FormatError(f"Point count must be an integer, got {head!r}", line=number, source=source) from None
    if n < 0:
        raise FormatError("Point count must be non-negative", line=number, source=source)
    if n == 0:
        if len(lines) > 1:
            raise FormatError("Unexpected content after empty space", line=lines[1][0], source=source)
        return FiniteMetricSpace((), ())
    if len(lines) != n + 2:
        last = lines[-1][0]
        raise FormatError(f"Expected a label line and {n} matrix rows, found {len(lines) - 1} line(s)", line=last, source=source)

    label_line_number, label_line = lines[1]
    labels = label_line.split()
    if len(labels) != n:
        raise FormatError(f"Expected {n} labels, found {len(labels)}", line=label_line_number, source=source)

    rows = []
    for number, line in lines[2:]:
        entries = line.split()
        if len(entries) != n:
            raise FormatError(f"Expected {n} entries, found {len(entries)}", line=number, source=source)
        rows.append([parse_rational(entry, line=number) for entry in entries])
    return validate_metric(labels, rows)


def format_space(space: FiniteMetricSpace, header: Sequence[str] = ()) -> str:
    """Serialize a space; ``header`` lines are written as comments."""
    out = [f"# {line}" for line in header]
    out.append(str(len(space)))
    if len(space):
        out.append(" ".join(space.labels))
        for row in space.dist:
            out.append(" ".join(format_rational(value) for value in row))
    return "\n".join(out) + "\n"


@handle_error(OSError, status_code=1)
def load_space(path: Union[str, Path]) -> FiniteMetricSpace:
    path = Path(path)
    return parse_space(path.read_text(encoding="utf-8"), source=str(path))


def save_space(space: FiniteMetricSpace, path: Union[str, Path], header: Sequence[str] = ()) -> None:
    Path(path).write_text(format_space(space, header), encoding="utf-8")
