"""
Finite replay of the discrete-approximation construction.

For each family K_n, the graph space N_n (K_n x {0} plus the graph of h)
is glued to the points built so far and realized inside one growing
ambient approximant. The verifier then checks the distance identities of
the construction exactly:

    V0  bookkeeping: f_n is a bijection K_n -> L_n, the L_n are disjoint
    V1  d(x, f_n(x)) = h(x)
    V2  d(f_n(x), y) = d(x, y) + h(x) for y in an earlier L_i
    V3  families are separated by at least min h
    V4  the original ambient distances are untouched

Report lines look like ``CHECK V2 n=2 x=a y=b@L1 lhs=5/2 rhs=5/2 PASS``.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

from amalgam import AmalgamSpec, amalgamated_union
from builder import EXTENDING, Approximant, embed_via_injectivity
from core import (
    FiniteMetricSpace,
    UnknownLabel,
    format_rational,
    iter_content_lines,
    load_space,
    parse_rational,
    restrict,
    validate_metric,
)
from generator import DistanceGrid, PortableRng, random_space
from utils.error_handler import FormatError, MetricToolkitError, handle_error
from utils.logger import setup_logger

logger = setup_logger(__name__)


class DapError(MetricToolkitError):
    """Malformed construction instance."""
    pass


class NonPositiveH(DapError):
    def __init__(self, label: str, value: Fraction):
        self.label = label
        super().__init__(
            f"h must be positive, got h({label}) = {format_rational(value)}",
            details={'label': label, 'value': value}
        )


def base_label(x: str) -> str:
    return f"({x},0)"


def graph_label(x: str, height: Fraction) -> str:
    return f"({x},{format_rational(height)})"


def family_label(x: str, n: int) -> str:
    return f"{x}@L{n}"


def _fresh_family_label(x: str, n: int, taken: Set[str]) -> str:
    """``x@Ln``, or ``x@Ln.2``, ``x@Ln.3``, ... when the ambient already uses it."""
    label = family_label(x, n)
    suffix = 1
    while label in taken:
        suffix += 1
        label = f"{family_label(x, n)}.{suffix}"
    taken.add(label)
    return label


@dataclass(frozen=True)
class DapInstance:
    ambient: Union[Approximant, FiniteMetricSpace]
    families: Tuple[Tuple[str, ...], ...]
    h: Dict[str, Fraction]

    def __post_init__(self):
        object.__setattr__(self, 'families', tuple(tuple(family) for family in self.families))
        space = self.space
        for number, family in enumerate(self.families, start=1):
            if not family:
                raise DapError(f"Family {number} is empty", details={'family': number})
            for x in family:
                if x not in space:
                    raise UnknownLabel(x, f"family {number}")
                if x not in self.h:
                    raise DapError(f"h is not defined at {x}", details={'label': x})
        for x, value in self.h.items():
            if value <= 0:
                raise NonPositiveH(x, value)

    @property
    def space(self) -> FiniteMetricSpace:
        return self.ambient.space if isinstance(self.ambient, Approximant) else self.ambient

    def min_h(self) -> Fraction:
        return min(self.h[x] for family in self.families for x in family)


@dataclass(frozen=True)
class GraphSpace:
    space: FiniteMetricSpace
    base_part: Tuple[str, ...]
    graph_part: Tuple[str, ...]


def graph_space(family: FiniteMetricSpace, h: Mapping[str, Fraction]) -> GraphSpace:
    """K x {0} together with the graph of h, under d(x, y) + |s - t|."""
    for x in family.labels:
        if x not in h:
            raise DapError(f"h is not defined at {x}", details={'label': x})
        if h[x] <= 0:
            raise NonPositiveH(x, h[x])
    points = [(x, Fraction(0)) for x in family.labels] + [(x, h[x]) for x in family.labels]
    labels = [base_label(x) for x in family.labels] + [graph_label(x, h[x]) for x in family.labels]
    dist = [
        [family.d(x, y) + abs(s - t) for y, s in points]
        for x, t in points
    ]
    space = validate_metric(labels, dist)
    size = len(family)
    return GraphSpace(space, tuple(labels[:size]), tuple(labels[size:]))


@dataclass(frozen=True)
class DapStep:
    n: int
    family: Tuple[str, ...]
    graph: GraphSpace
    amalgam: FiniteMetricSpace
    f: Dict[str, str]

    @property
    def image(self) -> Tuple[str, ...]:
        return tuple(self.f[x] for x in self.family)


@dataclass(frozen=True)
class DapTrace:
    instance: DapInstance
    steps: Tuple[DapStep, ...]
    ambient: Approximant

    @property
    def original(self) -> FiniteMetricSpace:
        return self.instance.space


def dap_construct(instance: DapInstance) -> DapTrace:
    current = instance.ambient
    if not isinstance(current, Approximant):
        current = Approximant.from_space(current)
    steps: List[DapStep] = []
    built: List[str] = []

    for n, family in enumerate(instance.families, start=1):
        graph = graph_space(restrict(current.space, family), instance.h)
        keep = set(built) | set(family)
        base = restrict(current.space, [x for x in current.space.labels if x in keep])
        amalgam = amalgamated_union(
            AmalgamSpec(base, graph.space, tuple((x, base_label(x)) for x in family))
        ).space

        taken = set(current.space.labels)
        names = {graph_label(x, instance.h[x]): _fresh_family_label(x, n, taken) for x in family}
        embedding, current = embed_via_injectivity(
            current, amalgam,
            anchor={x: x for x in base.labels},
            mode=EXTENDING,
            label_for=lambda label: names[label],
        )
        placed = embedding.as_dict()
        f = {x: placed[graph_label(x, instance.h[x])] for x in family}
        steps.append(DapStep(n, family, graph, amalgam, f))
        built.extend(f[x] for x in family)
        logger.debug("dap_construct: step %d placed %s", n, ", ".join(f.values()))

    return DapTrace(instance, tuple(steps), current)


def _show(value: Union[int, Fraction]) -> str:
    return format_rational(value) if isinstance(value, Fraction) else str(value)


@dataclass(frozen=True)
class Check:
    kind: str
    where: Tuple[Tuple[str, str], ...]
    lhs: Union[int, Fraction]
    rhs: Union[int, Fraction]
    relation: str = "="

    @property
    def passed(self) -> bool:
        if self.relation == ">=":
            return self.lhs >= self.rhs
        return self.lhs == self.rhs

    def line(self) -> str:
        where = " ".join(f"{key}={value}" for key, value in self.where)
        verdict = "PASS" if self.passed else "FAIL"
        return f"CHECK {self.kind} {where} lhs={_show(self.lhs)} rhs={_show(self.rhs)} {verdict}"


_TITLES = {
    'V0': "bookkeeping (f_n bijective, families disjoint)",
    'V1': "d(x, f_n(x)) = h(x)",
    'V2': "d(f_n(x), y) = d(x, y) + h(x) for earlier y",
    'V3': "separation between families >= min h",
    'V4': "original distances unchanged",
}


@dataclass
class VerificationReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def failed(self) -> List[Check]:
        return [check for check in self.checks if not check.passed]

    @property
    def ok(self) -> bool:
        return not self.failed

    def of_kind(self, kind: str) -> List[Check]:
        return [check for check in self.checks if check.kind == kind]

    def summary(self) -> str:
        failed = len(self.failed)
        return f"SUMMARY checks={len(self.checks)} passed={len(self.checks) - failed} failed={failed}"

    def to_lines(self) -> str:
        return "".join(check.line() + "\n" for check in self.checks) + self.summary() + "\n"

    def to_text(self) -> str:
        out = []
        for kind, title in _TITLES.items():
            checks = self.of_kind(kind)
            out.append(f"{kind} {title}: {sum(c.passed for c in checks)}/{len(checks)} passed")
            for check in checks:
                where = " ".join(f"{key}={value}" for key, value in check.where)
                mark = "ok" if check.passed else "FAILED"
                out.append(f"  [{mark}] {where}: {_show(check.lhs)} {check.relation} {_show(check.rhs)}")
        out.append(self.summary())
        return "\n".join(out) + "\n"


def dap_verify(trace: DapTrace) -> VerificationReport:
    """Check every identity of the construction; failures become report entries."""
    report = VerificationReport()
    space = trace.ambient.space
    original = trace.original
    h = trace.instance.h

    def distance(x: str, y: str) -> Optional[Fraction]:
        return space.d(x, y) if x in space and y in space else None

    seen: Dict[str, int] = {}
    for step in trace.steps:
        image = step.image
        report.checks.append(Check('V0', (('n', str(step.n)), ('what', 'bijection')), len(set(image)), len(step.family)))
        foreign = sum(1 for u in image if u not in space or u in original)
        report.checks.append(Check('V0', (('n', str(step.n)), ('what', 'new-points')), foreign, 0))
        for j in sorted({seen[u] for u in image if u in seen}):
            overlap = sum(1 for u in image if seen.get(u) == j)
            report.checks.append(Check('V0', (('n', str(step.n)), ('j', str(j)), ('what', 'disjoint')), overlap, 0))
        for u in image:
            seen.setdefault(u, step.n)

    earlier: List[str] = []
    for step in trace.steps:
        for x in step.family:
            fx = step.f[x]
            value = distance(x, fx)
            report.checks.append(Check(
                'V1', (('n', str(step.n)), ('x', x)),
                value if value is not None else Fraction(-1), h[x]
            ))
            for y in earlier:
                lhs = distance(fx, y)
                rhs = distance(x, y)
                report.checks.append(Check(
                    'V2', (('n', str(step.n)), ('x', x), ('y', y)),
                    lhs if lhs is not None else Fraction(-1),
                    rhs + h[x] if rhs is not None else Fraction(-1) - h[x]
                ))
        earlier.extend(step.image)

    floor = trace.instance.min_h()
    for later in trace.steps:
        for first in trace.steps:
            if first.n >= later.n:
                continue
            pairs = [
                (distance(u, v), u, v)
                for u in later.image for v in first.image
                if distance(u, v) is not None
            ]
            if not pairs:
                continue
            gap, u, v = min(pairs)
            report.checks.append(Check(
                'V3', (('n', str(later.n)), ('j', str(first.n)), ('u', u), ('v', v)), gap, floor, ">="
            ))

    for i, x in enumerate(original.labels):
        for y in original.labels[i + 1:]:
            now = distance(x, y)
            report.checks.append(Check(
                'V4', (('x', x), ('y', y)),
                now if now is not None else Fraction(-1), original.d(x, y)
            ))

    logger.info("dap_verify: %s", report.summary())
    return report


def demo_instance() -> DapInstance:
    """Two copies of the singleton family {x} with h(x) = 1."""
    ambient = validate_metric(["x"], [[0]])
    return DapInstance(ambient, (("x",), ("x",)), {"x": Fraction(1)})


def random_dap_instance(seed: int, points: int = 8, families: int = 3,
                        grid: Optional[DistanceGrid] = None, max_family: int = 3) -> DapInstance:
    """A seeded instance: random ambient, seeded families, grid-valued h."""
    grid = grid or DistanceGrid(1, 3)
    rng = PortableRng(seed)
    ambient = random_space(points, grid, rng)
    chosen = []
    for _ in range(families):
        size = 1 + rng.below(min(max_family, points))
        chosen.append(tuple(sorted(rng.sample(ambient.labels, size))))
    scope = sorted({x for family in chosen for x in family})
    h = {x: rng.choice(grid.values) for x in scope}
    return DapInstance(ambient, tuple(chosen), h)


def parse_families(text: str, source: Optional[str] = None) -> Tuple[Tuple[str, ...], ...]:
    families = tuple(tuple(line.split()) for _, line in iter_content_lines(text))
    if not families:
        raise FormatError("No families given", source=source)
    return families


def parse_h(text: str, source: Optional[str] = None) -> Dict[str, Fraction]:
    h: Dict[str, Fraction] = {}
    for number, line in iter_content_lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"Expected 'label p/q', got {line!r}", line=number, source=source)
        if parts[0] in h:
            raise FormatError(f"h given twice for {parts[0]}", line=number, source=source)
        h[parts[0]] = parse_rational(parts[1], line=number)
    return h


def format_families(families: Sequence[Sequence[str]]) -> str:
    return "".join(" ".join(family) + "\n" for family in families)


def format_h(h: Mapping[str, Fraction]) -> str:
    return "".join(f"{x} {format_rational(value)}\n" for x, value in h.items())


@handle_error(OSError)
def load_instance(ambient_path: Union[str, Path], families_path: Union[str, Path],
                  h_path: Union[str, Path]) -> DapInstance:
    families_path, h_path = Path(families_path), Path(h_path)
    return DapInstance(
        load_space(ambient_path),
        parse_families(families_path.read_text(encoding="utf-8"), source=str(families_path)),
        parse_h(h_path.read_text(encoding="utf-8"), source=str(h_path)),
    )
