"""
Constructive finite injectivity.

An :class:`Approximant` is a growing finite space over a distance grid.
Saturation rounds realize every grid-valued Katětov function on every
small subset of the round-start point set, so embeddings of small spaces
can be extended point by point. This module also provides:

* ``embed_via_injectivity``: strict search or extension by amalgamation.
* ``embed_via_homogeneity``: embed anywhere, then move the copy onto the
  anchor with a self-isometry.
* ``back_and_forth``: extends partial isometries to self-isometries of a
  possibly grown approximant.
"""
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations, product
from math import gcd
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple, Union

import numpy as np

import config
from amalgam import (
    AmalgamSpec,
    KatetovFunction,
    NamingPolicy,
    amalgamated_union,
    maximal_extension,
    one_point_extension,
)
from core import (
    FiniteMetricSpace,
    PartialIsometry,
    UnknownLabel,
    find_embeddings,
    format_rational,
    format_space,
    is_isometric_embedding,
    iter_content_lines,
    parse_rational,
    parse_space,
)
from generator import DistanceGrid
from utils.error_handler import FormatError, MetricToolkitError, handle_error, log_exception
from utils.logger import setup_logger

logger = setup_logger(__name__)

IndexKey = Tuple[Tuple[str, ...], Tuple[Fraction, ...]]

STRICT = "strict"
EXTENDING = "extending"


class BuilderError(MetricToolkitError):
    """Invalid builder request."""
    pass


class BudgetExceeded(MetricToolkitError):
    def __init__(self, budget: int, partial: 'Approximant'):
        self.partial = partial
        super().__init__(
            f"Point budget of {budget} reached; partial approximant has {len(partial.space)} points",
            details={'budget': budget, 'points': len(partial.space), 'partial': partial}
        )


class AnchorNotIsometric(MetricToolkitError):
    def __init__(self, witness, reason: str):
        super().__init__(f"Anchor is not an isometric embedding: {reason}", details={'witness': witness or ()})


class NotRealizable(MetricToolkitError):
    def __init__(self, unplaced: Sequence[str]):
        super().__init__(
            "No extension of the anchor uses only existing points",
            details={'unplaced': tuple(unplaced)}
        )


class EmptyAnchorNotSupported(MetricToolkitError):
    def __init__(self, mode: str):
        super().__init__(
            f"An empty anchor needs a non-empty approximant in strict mode and a bridge in extending mode ({mode})",
            details={'mode': mode}
        )


class BackAndForthIncomplete(MetricToolkitError):
    def __init__(self, rounds: int, partial: PartialIsometry, approximant: 'Approximant'):
        self.partial = partial
        self.approximant = approximant
        super().__init__(
            f"Back-and-forth did not close within {rounds} glued copies",
            details={'rounds': rounds, 'matched': len(partial), 'points': len(approximant.space)}
        )


@dataclass(frozen=True)
class Approximant:
    """A finite stand-in for the rational Urysohn space.

    ``stage_sizes[s]`` is the number of points at the end of stage s; new
    points are appended, so the stage-s point set is a label prefix.
    ``realization_index`` maps (subset, grid values) to a realizing label.
    """

    space: FiniteMetricSpace
    grid: Optional[DistanceGrid] = None
    stage: int = 0
    realization_index: Dict[IndexKey, str] = field(default_factory=dict, hash=False)
    stage_sizes: Tuple[int, ...] = ()
    arity_cap: int = 0
    point_budget: int = config.POINT_BUDGET
    complete: bool = True

    def __post_init__(self):
        if not self.stage_sizes:
            object.__setattr__(self, 'stage_sizes', (len(self.space),))

    @classmethod
    def from_space(cls, space: FiniteMetricSpace, grid: Optional[DistanceGrid] = None,
                   point_budget: Optional[int] = None) -> 'Approximant':
        return cls(space, grid, point_budget=point_budget or config.POINT_BUDGET)

    def stage_labels(self, stage: int) -> Tuple[str, ...]:
        return self.space.labels[:self.stage_sizes[stage]]


class Embedding(NamedTuple):
    isometry: PartialIsometry
    approximant: Approximant


class _GrowingSpace:
    """Append-only distance table used while an approximant grows."""

    def __init__(self, space: FiniteMetricSpace):
        self.labels: List[str] = list(space.labels)
        self.rows: List[List[Fraction]] = [list(row) for row in space.dist]
        self.index: Dict[str, int] = {label: i for i, label in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def add(self, label: str, distances: Sequence[Fraction]) -> None:
        for row, value in zip(self.rows, distances):
            row.append(value)
        self.rows.append(list(distances) + [Fraction(0)])
        self.index[label] = len(self.labels)
        self.labels.append(label)

    def freeze(self) -> FiniteMetricSpace:
        return FiniteMetricSpace(tuple(self.labels), tuple(tuple(row) for row in self.rows))


class _LabelFactory:
    """Fresh labels u<stage>_<counter>, skipping names already taken."""

    def __init__(self, stage: int, taken: Set[str]):
        self.stage = stage
        self.taken = taken
        self.counter = 0

    def __call__(self, _original: Optional[str] = None) -> str:
        while True:
            self.counter += 1
            label = f"u{self.stage}_{self.counter}"
            if label not in self.taken:
                self.taken.add(label)
                return label


def _subsets(labels: Sequence[str], arity_cap: int) -> Iterator[Tuple[str, ...]]:
    ordered = sorted(labels)
    for size in range(1, min(arity_cap, len(ordered)) + 1):
        yield from combinations(ordered, size)


def _grid_katetov(subset_rows: Sequence[Sequence[Fraction]], grid: DistanceGrid) -> Iterator[Tuple[Fraction, ...]]:
    """Grid-valued Katětov functions on a subset, in lexicographic order.

    ``subset_rows[t][u]`` is the distance between subset points t and u.
    """
    size = len(subset_rows)
    for values in product(grid.values, repeat=size):
        if all(
            abs(values[t] - values[u]) <= subset_rows[t][u] <= values[t] + values[u]
            for t in range(size) for u in range(t + 1, size)
        ):
            yield values


@log_exception(logger)
def saturate(approximant: Approximant, arity_cap: int, stages: int) -> Approximant:
    """Run saturation rounds until the approximant reaches stage ``stages``.

    Each round visits the subsets S of the round-start point set with
    |S| <= arity_cap (by size, then lexicographically) and every grid-valued
    Katětov function f on S. An existing point with exactly the distances f
    is reused; otherwise a point is added at the maximal extension
    y -> min over x in S of f(x) + d(x, y).
    """
    if arity_cap < 1:
        raise BuilderError("arity_cap must be at least 1", details={'arity_cap': arity_cap})
    if stages < 0:
        raise BuilderError("stages must be non-negative", details={'stages': stages})
    if approximant.stage >= stages:
        if approximant.stage > 0 and arity_cap > approximant.arity_cap:
            gaps = missing_realizations(approximant, arity_cap)
            if gaps:
                raise BuilderError(
                    f"Stage {approximant.stage} was built with arity {approximant.arity_cap}, "
                    f"{len(gaps)} realization(s) for arity {arity_cap} are missing",
                    details={'arity_cap': arity_cap, 'recorded': approximant.arity_cap, 'missing': len(gaps)}
                )
        return approximant
    grid = approximant.grid
    if grid is None:
        raise BuilderError("Saturation needs a distance grid")
    if len(approximant.space) == 0:
        raise BuilderError("Saturation needs at least one starting point")

    budget = approximant.point_budget
    grow = _GrowingSpace(approximant.space)
    index = dict(approximant.realization_index)
    sizes = list(approximant.stage_sizes)

    for stage in range(approximant.stage + 1, stages + 1):
        round_start = list(grow.labels)
        fresh = _LabelFactory(stage, set(grow.labels))
        added = 0
        for subset in _subsets(round_start, arity_cap):
            positions = [grow.index[x] for x in subset]
            subset_rows = [[grow.rows[i][j] for j in positions] for i in positions]
            known: Dict[Tuple[Fraction, ...], str] = {}
            for j, label in enumerate(grow.labels):
                known.setdefault(tuple(grow.rows[j][i] for i in positions), label)

            for values in _grid_katetov(subset_rows, grid):
                realizer = known.get(values)
                if realizer is None:
                    if len(grow) >= budget:
                        partial = Approximant(
                            grow.freeze(), grid, stage - 1, index, tuple(sizes),
                            arity_cap, budget, complete=False
                        )
                        logger.warning("saturate: budget %d hit during stage %d", budget, stage)
                        raise BudgetExceeded(budget, partial)
                    realizer = fresh()
                    distances = [
                        min(value + grow.rows[i][j] for i, value in zip(positions, values))
                        for j in range(len(grow))
                    ]
                    grow.add(realizer, distances)
                    known[values] = realizer
                    added += 1
                index[(subset, values)] = realizer
        sizes.append(len(grow))
        logger.info("saturate: stage %d added %d point(s), %d total", stage, added, len(grow))

    return Approximant(grow.freeze(), grid, stages, index, tuple(sizes), arity_cap, budget)


def missing_realizations(approximant: Approximant, arity_cap: Optional[int] = None,
                         stage: Optional[int] = None) -> List[IndexKey]:
    """(S, f) pairs of the saturation invariant that no point realizes."""
    stage = approximant.stage if stage is None else stage
    arity_cap = approximant.arity_cap if arity_cap is None else arity_cap
    if stage < 1 or approximant.grid is None or arity_cap < 1:
        return []
    space = approximant.space
    missing = []
    for subset in _subsets(approximant.stage_labels(stage - 1), arity_cap):
        positions = [space.index(x) for x in subset]
        subset_rows = [[space.dist[i][j] for j in positions] for i in positions]
        present = {tuple(row[i] for i in positions) for row in space.dist}
        for values in _grid_katetov(subset_rows, approximant.grid):
            if values not in present:
                missing.append((subset, values))
    return missing


def _normalize_anchor(approximant: Approximant, small: FiniteMetricSpace,
                      anchor: Optional[Union[PartialIsometry, Mapping[str, str]]]) -> PartialIsometry:
    pairs = anchor.pairs if isinstance(anchor, PartialIsometry) else tuple((anchor or {}).items())
    mapping = PartialIsometry(small, approximant.space, pairs)
    check = is_isometric_embedding(mapping)
    if not check:
        raise AnchorNotIsometric(check.witness, check.reason)
    return mapping


def _realize_in_place(small: FiniteMetricSpace, space: FiniteMetricSpace,
                      fixed: Dict[str, str]) -> Optional[Dict[str, str]]:
    """Place the unanchored points one at a time on existing points.

    Each step needs a point of ``space`` realizing the Katětov function
    "distances to the points placed so far"; choices are tried in
    lexicographic order with backtracking.
    """
    pending = [x for x in sorted(small.labels) if x not in fixed]
    candidates = sorted(space.labels)
    placed = dict(fixed)
    used = set(placed.values())

    def place(depth: int) -> bool:
        if depth == len(pending):
            return True
        x = pending[depth]
        required = [(space.row(placed[a]), space.index, small.d(x, a)) for a in placed]
        for y in candidates:
            if y in used:
                continue
            if all(row[index(y)] == value for row, index, value in required):
                placed[x] = y
                used.add(y)
                if place(depth + 1):
                    return True
                del placed[x]
                used.discard(y)
        return False

    return placed if place(0) else None


def _fresh_bridge_label(small: FiniteMetricSpace) -> str:
    label, counter = "bridge", 0
    while label in small:
        counter += 1
        label = f"bridge{counter}"
    return label


@log_exception(logger)
def embed_via_injectivity(
    approximant: Approximant,
    small: FiniteMetricSpace,
    anchor: Optional[Union[PartialIsometry, Mapping[str, str]]] = None,
    mode: str = STRICT,
    label_for: Optional[Callable[[str], str]] = None,
    bridge: Optional[Tuple[str, str, Fraction]] = None,
) -> Embedding:
    """Extend ``anchor`` (a map from part of ``small`` into the approximant) to all of ``small``.

    Strict mode uses existing points only. Extending mode glues ``small``
    onto the approximant by amalgamation over the anchored part; new
    points are named by ``label_for`` (default ``u<stage>_<counter>``).
    With an empty anchor and a non-empty approximant, extending mode needs
    ``bridge = (approximant label, small label, distance)``.
    """
    if mode not in (STRICT, EXTENDING):
        raise BuilderError(f"Unknown embedding mode {mode!r}", details={'mode': mode})
    mapping = _normalize_anchor(approximant, small, anchor)
    space = approximant.space
    fixed = mapping.as_dict()

    if set(fixed) == set(small.labels):
        ordered = tuple((x, fixed[x]) for x in small.labels)
        return Embedding(PartialIsometry(small, space, ordered), approximant)

    if mode == STRICT:
        if len(space) == 0:
            raise EmptyAnchorNotSupported(mode)
        placed = _realize_in_place(small, space, fixed)
        if placed is None:
            raise NotRealizable([x for x in sorted(small.labels) if x not in fixed])
        return Embedding(PartialIsometry(small, space, tuple((x, placed[x]) for x in small.labels)), approximant)

    namer = label_for or _LabelFactory(approximant.stage, set(space.labels))

    if not fixed:
        if len(space) == 0:
            renamed = {x: namer(x) for x in small.labels} if label_for else {}
            placed_space = small.relabel(renamed) if renamed else small
            pairs = tuple((x, renamed.get(x, x)) for x in small.labels)
            grown = replace(approximant, space=placed_space, stage_sizes=(len(placed_space),))
            return Embedding(PartialIsometry(small, placed_space, pairs), grown)
        if bridge is None:
            raise EmptyAnchorNotSupported(mode)
        near, far, distance = bridge
        space.index(near)
        small.index(far)
        link = _fresh_bridge_label(small)
        anchored = one_point_extension(
            small, maximal_extension(KatetovFunction(small, {far: distance})), link
        )
        spec = AmalgamSpec(space, anchored, ((near, link),))
    else:
        spec = AmalgamSpec(space, small, tuple((y, x) for x, y in fixed.items()))

    result = amalgamated_union(spec, NamingPolicy(right_namer=namer))
    if len(result.space) > approximant.point_budget:
        partial = replace(approximant, complete=False)
        raise BudgetExceeded(approximant.point_budget, partial)
    images = result.h2.as_dict()
    grown = replace(approximant, space=result.space)
    logger.debug("embed_via_injectivity: added %d point(s)", len(result.space) - len(space))
    return Embedding(PartialIsometry(small, result.space, tuple((x, images[x]) for x in small.labels)), grown)


class _SearchExhausted(Exception):
    pass


def _distance_profiles(space: FiniteMetricSpace) -> List[Tuple[Fraction, ...]]:
    return [tuple(sorted(row)) for row in space.dist]


def _self_isometry_search(space: FiniteMetricSpace, start: Dict[str, str], node_limit: int) -> Optional[Dict[str, str]]:
    """Alternating forth/back backtracking for a bijective self-isometry extending ``start``."""
    profiles = _distance_profiles(space)
    idx = space.index
    if any(profiles[idx(a)] != profiles[idx(b)] for a, b in start.items()):
        return None
    ordered = sorted(space.labels)
    groups: Dict[Tuple[Fraction, ...], List[str]] = {}
    for label in ordered:
        groups.setdefault(profiles[idx(label)], []).append(label)
    forward = dict(start)
    backward = {b: a for a, b in start.items()}
    nodes = 0

    def candidates(point: str, mapped: Dict[str, str], taken: Dict[str, str], forth: bool) -> List[str]:
        row = space.row(point)
        # forth: y must satisfy d(y, g(a)) = d(point, a); back: x with d(x, a) = d(point, g(a))
        required = [
            (space.row(b), row[idx(a)]) if forth else (space.row(a), row[idx(b)])
            for a, b in mapped.items()
        ]
        chosen = [
            other for other in groups[profiles[idx(point)]]
            if other not in taken and all(r[idx(other)] == value for r, value in required)
        ]
        if point in chosen:
            chosen.remove(point)
            chosen.insert(0, point)
        return chosen

    def step(forth: bool) -> bool:
        nonlocal nodes
        if len(forward) == len(space):
            return True
        nodes += 1
        if nodes > node_limit:
            raise _SearchExhausted()
        if forth:
            x = next(label for label in ordered if label not in forward)
            for y in candidates(x, forward, backward, True):
                forward[x], backward[y] = y, x
                if step(False):
                    return True
                del forward[x], backward[y]
        else:
            y = next(label for label in ordered if label not in backward)
            for x in candidates(y, forward, forward, False):
                forward[x], backward[y] = y, x
                if step(True):
                    return True
                del forward[x], backward[y]
        return False

    try:
        return forward if step(True) else None
    except _SearchExhausted:
        logger.debug("back_and_forth: in-place search stopped after %d nodes", node_limit)
        return None


def _with_fixed_points(space: FiniteMetricSpace, forward: Dict[str, str]) -> Dict[str, str]:
    """``forward`` plus every free point x with d(x, a) = d(x, forward(a)) for all mapped a."""
    used = set(forward) | set(forward.values())
    pairs = [(space.index(a), space.index(b)) for a, b in forward.items()]
    extended = dict(forward)
    for x, row in zip(space.labels, space.dist):
        if x not in used and all(row[i] == row[j] for i, j in pairs):
            extended[x] = x
    return extended


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _orbits(size: int, step: Dict[int, int]) -> Tuple[List[List[int]], List[List[int]]]:
    """Cycles and maximal chains of an injective partial map on range(size)."""
    has_preimage = set(step.values())
    chains = []
    seen: Set[int] = set()
    for start in range(size):
        if start in has_preimage:
            continue
        chain = [start]
        while chain[-1] in step:
            chain.append(step[chain[-1]])
        chains.append(chain)
        seen.update(chain)
    cycles = []
    for start in range(size):
        if start in seen:
            continue
        cycle = [start]
        while step[cycle[-1]] != start:
            cycle.append(step[cycle[-1]])
        cycles.append(cycle)
        seen.update(cycle)
    return cycles, chains


class _CycleGluing:
    """Copies of a space glued in a ring so that a partial self-map becomes a rotation.

    Copy i + 1 is glued to copy i by identifying point a of copy i + 1 with
    point p(a) of copy i. A point on a cycle of p is shared by every copy,
    while a chain c_0 -> ... -> c_k gives one class per copy: c_t of copy i
    lies in class (i + t) mod n. Under the glued path metric the shift
    (x, i) -> (x, i + 1) is an isometry extending p. Distances are
    integers after scaling by the common denominator.
    """

    def __init__(self, space: FiniteMetricSpace, forward: Dict[str, str]):
        self.space = space
        position = {label: i for i, label in enumerate(space.labels)}
        self.cycles, self.chains = _orbits(len(space), {position[a]: position[b] for a, b in forward.items()})
        self.cycle_class: Dict[int, int] = {}
        for z in sorted(z for cycle in self.cycles for z in cycle):
            self.cycle_class[z] = len(self.cycle_class)
        self.scale = 1
        for row in space.dist:
            for value in row:
                self.scale = _lcm(self.scale, value.denominator)
        self.scaled = [[value.numerator * (self.scale // value.denominator) for value in row] for row in space.dist]
        self.largest = max(max(row) for row in self.scaled)
        self.smallest = min(value for row in self.scaled for value in row if value > 0)
        self.period = 1
        for cycle in self.cycles:
            self.period = _lcm(self.period, len(cycle))
        self.longest = max(len(chain) for chain in self.chains)

    def copy_counts(self) -> range:
        period, longest = self.period, self.longest
        first = -(-max(2, longest) // period) * period
        # from this many copies on, no glued path is shorter than an original distance
        bound = -(-(longest * (self.largest + self.smallest)) // self.smallest) - 1
        last = -(-max(bound, first) // period) * period
        return range(first, last + 1, period)

    def size(self, copies: int) -> int:
        return len(self.cycle_class) + copies * len(self.chains)

    def classes(self, copies: int) -> List[List[int]]:
        """member[i][z]: the class of point z of copy i."""
        member = [[0] * len(self.space) for _ in range(copies)]
        for cycle in self.cycles:
            length = len(cycle)
            for s, z in enumerate(cycle):
                for i in range(copies):
                    member[i][z] = self.cycle_class[cycle[(s + i) % length]]
        base = len(self.cycle_class)
        for c, chain in enumerate(self.chains):
            for t, z in enumerate(chain):
                for i in range(copies):
                    member[i][z] = base + c * copies + (i + t) % copies
        return member

    def glue(self, copies: int, fresh: Callable[[], str]) -> Optional[Tuple[FiniteMetricSpace, List[Tuple[str, str]]]]:
        """The glued space and the shift, or None if copy 0 is not isometric to the space."""
        m = len(self.space)
        member = self.classes(copies)
        counts: Dict[int, int] = {}
        for row in member:
            for cls in row:
                counts[cls] = counts.get(cls, 0) + 1
        hubs = sorted(cls for cls, count in counts.items() if count > 1)
        hub_column = {cls: k for k, cls in enumerate(hubs)}
        h = len(hubs)

        far = (h + 2) * self.largest + 1
        dtype = np.int64 if 4 * far < 2 ** 62 else object
        D = np.array(self.scaled, dtype=dtype)
        hub_points = [[z for z in range(m) if member[i][z] in hub_column] for i in range(copies)]
        hub_columns = [[hub_column[member[i][z]] for z in points] for i, points in enumerate(hub_points)]

        W = np.full((h, h), far, dtype=dtype)
        np.fill_diagonal(W, 0)
        for points, columns in zip(hub_points, hub_columns):
            cell = np.ix_(columns, columns)
            W[cell] = np.minimum(W[cell], D[np.ix_(points, points)])
        for k in range(h):
            W = np.minimum(W, W[:, k:k + 1] + W[k:k + 1, :])

        to_hubs = np.full((m, h), far, dtype=dtype)
        to_hubs[:, hub_columns[0]] = D[:, hub_points[0]]
        through = (to_hubs[:, :, None] + W[None, :, :]).min(axis=1)
        blocks = np.empty((copies, m, m), dtype=dtype)
        for k in range(copies):
            from_hubs = np.full((h, m), far, dtype=dtype)
            from_hubs[hub_columns[k], :] = D[hub_points[k], :]
            blocks[k] = (through[:, :, None] + from_hubs[None, :, :]).min(axis=1)
        blocks[0] = np.minimum(blocks[0], D)
        if not np.array_equal(blocks[0], D):
            return None

        slot: Dict[int, Tuple[int, int]] = {}
        for i in range(copies):
            for z in range(m):
                slot.setdefault(member[i][z], (i, z))
        order = list(slot)
        labels = [self.space.labels[z] if i == 0 else fresh() for i, z in (slot[cls] for cls in order)]
        copy_of = np.array([slot[cls][0] for cls in order])
        point_of = np.array([slot[cls][1] for cls in order])
        # d((x, i), (y, j)) = blocks[j - i][x][y]
        glued = blocks[(copy_of[None, :] - copy_of[:, None]) % copies, point_of[:, None], point_of[None, :]].tolist()
        values = {v: Fraction(v, self.scale) for v in {v for row in glued for v in row}}
        space = FiniteMetricSpace(tuple(labels), tuple(tuple(values[v] for v in row) for row in glued))

        name = dict(zip(order, labels))
        shift = [(name[cls], name[member[(i + 1) % copies][z]]) for cls, (i, z) in slot.items()]
        return space, shift


@log_exception(logger)
def back_and_forth(approximant: Approximant, p: Union[PartialIsometry, Mapping[str, str]],
                   rounds: Optional[int] = None) -> Embedding:
    """Extend a partial isometry of the approximant to a bijective self-isometry.

    First an in-place alternating search looks for a self-isometry of the
    current space. Failing that, p is extended by every point it can fix,
    and copies of the space are glued in a ring along p until the shift by
    one copy is an isometry that leaves the original distances alone.
    ``rounds`` caps the number of copies; past it BackAndForthIncomplete
    carries the extended partial map.
    """
    rounds = config.DEFAULT_ROUNDS if rounds is None else rounds
    space = approximant.space
    pairs = p.pairs if isinstance(p, PartialIsometry) else tuple(p.items())
    start = PartialIsometry(space, space, pairs)
    check = is_isometric_embedding(start)
    if not check:
        raise AnchorNotIsometric(check.witness, check.reason)
    start_map = start.as_dict()

    found = _self_isometry_search(space, start_map, config.SEARCH_NODE_LIMIT)
    if found is not None:
        return Embedding(PartialIsometry(space, space, tuple(sorted(found.items()))), approximant)

    forward = _with_fixed_points(space, start_map)
    if len(forward) == len(space):
        return Embedding(PartialIsometry(space, space, tuple(sorted(forward.items()))), approximant)

    gluing = _CycleGluing(space, forward)
    for copies in gluing.copy_counts():
        if copies > rounds:
            break
        if gluing.size(copies) > approximant.point_budget:
            raise BudgetExceeded(approximant.point_budget, replace(approximant, complete=False))
        glued = gluing.glue(copies, _LabelFactory(approximant.stage, set(space.labels)))
        if glued is None:
            logger.debug("back_and_forth: %d copies shorten an original distance", copies)
            continue
        grown_space, shift = glued
        grown = replace(approximant, space=grown_space) if len(grown_space) > len(space) else approximant
        logger.debug("back_and_forth: closed with %d copies, %d new point(s)", copies, len(grown_space) - len(space))
        return Embedding(PartialIsometry(grown_space, grown_space, tuple(sorted(shift))), grown)

    partial = PartialIsometry(space, space, tuple(sorted(forward.items())))
    raise BackAndForthIncomplete(rounds, partial, approximant)


def embed_via_homogeneity(approximant: Approximant, small: FiniteMetricSpace,
                          anchor: Union[PartialIsometry, Mapping[str, str]],
                          rounds: Optional[int] = None) -> Embedding:
    """Embed ``small`` anywhere, then move the copy onto the anchor.

    With g any embedding of ``small`` and h a self-isometry sending
    anchor(k) to g(k) for every anchored k, h^-1 g extends the anchor.
    """
    mapping = _normalize_anchor(approximant, small, anchor)
    found = find_embeddings(small, approximant.space, limit=1)
    if not found:
        raise NotRealizable(sorted(small.labels))
    g = found[0].as_dict()
    move = {image: g[x] for x, image in mapping.pairs}
    h, grown = back_and_forth(approximant, move, rounds)
    back = h.inverse().as_dict()
    result = PartialIsometry(small, grown.space, tuple((x, back[g[x]]) for x in small.labels))
    return Embedding(result, grown)


def format_approximant(approximant: Approximant) -> Tuple[str, str]:
    """Space text (with a header comment) and the sidecar index text."""
    grid = approximant.grid
    header = [
        "approximant "
        f"grid={'-' if grid is None else f'{grid.denominator}/{grid.max_numerator}'} "
        f"stage={approximant.stage} "
        f"sizes={','.join(str(size) for size in approximant.stage_sizes)} "
        f"arity={approximant.arity_cap} "
        f"budget={approximant.point_budget} "
        f"complete={'yes' if approximant.complete else 'no'}"
    ]
    lines = [
        f"{' '.join(subset)} | {' '.join(format_rational(v) for v in values)} | {label}\n"
        for (subset, values), label in approximant.realization_index.items()
    ]
    return format_space(approximant.space, header), "".join(lines)


def parse_approximant(space_text: str, index_text: str = "", source: Optional[str] = None) -> Approximant:
    space = parse_space(space_text, source=source)
    settings: Dict[str, str] = {}
    for raw in space_text.splitlines():
        line = raw.strip()
        if line.startswith("# approximant "):
            for item in line[len("# approximant "):].split():
                key, _, value = item.partition("=")
                settings[key] = value
            break

    grid = None
    if settings.get("grid", "-") != "-":
        q, _, b = settings["grid"].partition("/")
        grid = DistanceGrid(int(q), int(b))
    sizes = tuple(int(size) for size in settings["sizes"].split(",")) if settings.get("sizes") else ()

    index: Dict[IndexKey, str] = {}
    for number, line in iter_content_lines(index_text):
        parts = [part.strip() for part in line.split("|")]
        if len(parts) != 3:
            raise FormatError(f"Expected 'S-labels | f-values | label', got {line!r}", line=number, source=source)
        subset = tuple(parts[0].split())
        values = tuple(parse_rational(v, line=number) for v in parts[1].split())
        if len(subset) != len(values):
            raise FormatError("Subset and value counts differ", line=number, source=source)
        for label in subset + (parts[2],):
            if label not in space:
                raise UnknownLabel(label, "approximant index")
        index[(subset, values)] = parts[2]

    return Approximant(
        space, grid,
        stage=int(settings.get("stage", 0)),
        realization_index=index,
        stage_sizes=sizes,
        arity_cap=int(settings.get("arity", 0)),
        point_budget=int(settings.get("budget", config.POINT_BUDGET)),
        complete=settings.get("complete", "yes") == "yes",
    )


def save_approximant(approximant: Approximant, path: Union[str, Path], index_path: Optional[Union[str, Path]] = None) -> Path:
    path = Path(path)
    index_path = Path(index_path) if index_path else path.with_suffix(path.suffix + ".index")
    space_text, index_text = format_approximant(approximant)
    path.write_text(space_text, encoding="utf-8")
    index_path.write_text(index_text, encoding="utf-8")
    return index_path


@handle_error(OSError)
def load_approximant(path: Union[str, Path], index_path: Optional[Union[str, Path]] = None) -> Approximant:
    path = Path(path)
    index_path = Path(index_path) if index_path else path.with_suffix(path.suffix + ".index")
    index_text = index_path.read_text(encoding="utf-8") if index_path.exists() else ""
    return parse_approximant(path.read_text(encoding="utf-8"), index_text, source=str(path))
