"""
Random and exhaustive generation of finite metric spaces on a rational grid.

Random spaces are chains of one-point extensions: every new point picks its
distance to each existing point (in label order) uniformly among the grid
values inside the current admissible interval.

Randomness comes from :class:`PortableRng`, which reads raw 64-bit words
from numpy's PCG64 bit generator seeded with the 64-bit seed and draws
bounded integers by rejection. Nothing else is consumed, so a seed gives
the same stream wherever PCG64 is implemented.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from amalgam import Interval, KatetovFunction, admissible_interval, one_point_extension
from core import FiniteMetricSpace, format_rational
from utils.error_handler import MetricToolkitError
from utils.logger import setup_logger

logger = setup_logger(__name__)

T = TypeVar('T')

_TWO_64 = 2 ** 64


class GeneratorError(MetricToolkitError):
    """Invalid generator parameters."""
    pass


class GridExhausted(MetricToolkitError):
    def __init__(self, step: int, point: str, interval: Interval):
        self.step = step
        self.point = point
        self.interval = interval
        super().__init__(
            f"No grid value in {interval} for the distance from new point {step} to {point}",
            details={'step': step, 'point': point, 'interval': str(interval)}
        )


@dataclass(frozen=True)
class DistanceGrid:
    """The finite grid {k/q : 1 <= k <= B}."""

    denominator: int
    max_numerator: int

    def __post_init__(self):
        if self.denominator < 1 or self.max_numerator < 1:
            raise GeneratorError(
                "Grid denominator and max numerator must be positive",
                details={'q': self.denominator, 'B': self.max_numerator}
            )

    @cached_property
    def values(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(k, self.denominator) for k in range(1, self.max_numerator + 1))

    def __contains__(self, value: Fraction) -> bool:
        return value > 0 and (value * self.denominator).denominator == 1 and value * self.denominator <= self.max_numerator

    def __len__(self) -> int:
        return self.max_numerator

    def points_in(self, interval: Interval) -> List[Fraction]:
        return [value for value in self.values if value in interval]

    def __str__(self) -> str:
        return f"{{k/{self.denominator} : 1<=k<={self.max_numerator}}}"


class PortableRng:
    """Deterministic 64-bit stream backed by numpy's PCG64 bit generator."""

    def __init__(self, seed: int):
        if not isinstance(seed, int) or not 0 <= seed < _TWO_64:
            raise GeneratorError(f"Seed must be an unsigned 64-bit integer, got {seed!r}", details={'seed': seed})
        self.seed = seed
        self._bits = np.random.PCG64(seed)

    def next_u64(self) -> int:
        return int(self._bits.random_raw())

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection on raw 64-bit words."""
        if n < 1:
            raise GeneratorError("Cannot draw below a non-positive bound", details={'n': n})
        limit = _TWO_64 - (_TWO_64 % n)
        while True:
            word = self.next_u64()
            if word < limit:
                return word % n

    def choice(self, items: Sequence[T]) -> T:
        return items[self.below(len(items))]

    def sample(self, items: Sequence[T], k: int) -> List[T]:
        """k distinct items, partial Fisher-Yates over a copy."""
        pool = list(items)
        if not 0 <= k <= len(pool):
            raise GeneratorError("Sample size out of range", details={'k': k, 'size': len(pool)})
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def point_labels(n: int, prefix: str = "p") -> List[str]:
    """Labels p0..p(n-1), zero-padded so label order is numeric order."""
    width = len(str(max(n - 1, 0)))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def random_space(n: int, grid: DistanceGrid, seed: Union[int, PortableRng]) -> FiniteMetricSpace:
    """A random space built by n-1 successive one-point extensions."""
    if n < 1:
        raise GeneratorError("A random space needs at least one point", details={'n': n})
    rng = seed if isinstance(seed, PortableRng) else PortableRng(seed)
    labels = point_labels(n)
    space = FiniteMetricSpace((labels[0],), ((Fraction(0),),))
    for step in range(1, n):
        f = KatetovFunction(space, {})
        for x in space.labels:
            interval = admissible_interval(f, x)
            options = grid.points_in(interval)
            if not options:
                raise GridExhausted(step, x, interval)
            f = f.with_value(x, rng.choice(options))
        space = one_point_extension(space, f, labels[step])
    logger.debug("random_space: n=%d grid=%s seed=%s", n, grid, rng.seed)
    return space


def enumerate_spaces(n: int, grid: DistanceGrid, limit: Optional[int] = None) -> List[FiniteMetricSpace]:
    """Every metric on n labeled points with grid distances.

    Upper-triangle entries are assigned row by row with grid values in
    increasing order, so spaces come out in lexicographic matrix order.
    """
    if n < 1:
        return []
    labels = tuple(point_labels(n))
    positions = [(i, j) for i in range(n) for j in range(i + 1, n)]
    matrix = [[Fraction(0)] * n for _ in range(n)]
    assigned = [[i == j for j in range(n)] for i in range(n)]
    results: List[FiniteMetricSpace] = []
    values = grid.values

    def consistent(i: int, j: int) -> bool:
        for k in range(n):
            if k == i or k == j or not (assigned[i][k] and assigned[j][k]):
                continue
            a, b, c = matrix[i][j], matrix[i][k], matrix[j][k]
            if a > b + c or b > a + c or c > a + b:
                return False
        return True

    def search(depth: int) -> bool:
        if limit is not None and len(results) >= limit:
            return True
        if depth == len(positions):
            results.append(FiniteMetricSpace(labels, tuple(tuple(row) for row in matrix)))
            return False
        i, j = positions[depth]
        assigned[i][j] = assigned[j][i] = True
        for value in values:
            matrix[i][j] = matrix[j][i] = value
            if consistent(i, j) and search(depth + 1):
                return True
        assigned[i][j] = assigned[j][i] = False
        return False

    search(0)
    if limit is not None:
        del results[limit:]
    logger.debug("enumerate_spaces: n=%d grid=%s -> %d space(s)", n, grid, len(results))
    return results


def describe_grid(grid: DistanceGrid) -> str:
    return ", ".join(format_rational(value) for value in grid.values)
