"""Steepest-ascent hill climbing with random restarts over a discrete weight grid."""

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from cdsbench.errors import ConfigError, FormatError
from cdsbench.index import Facet
from cdsbench.ranking import FacetWeights

DEFAULT_FACETS = (Facet.TITLE, Facet.ABSTRACT, Facet.BODY, Facet.MESH, Facet.CONCEPTS)


@dataclass(frozen=True)
class WeightGrid:
    step: float = 0.1
    low: float = 0.0
    high: float = 2.0
    facets: tuple = DEFAULT_FACETS

    def __post_init__(self):
        if self.step <= 0 or self.high <= self.low:
            raise ConfigError("grid needs step > 0 and high > low")
        levels = (self.high - self.low) / self.step
        if abs(levels - round(levels)) > 1e-9:
            raise ConfigError(f"step {self.step} does not divide [{self.low}, {self.high}] evenly")
        if not self.facets:
            raise ConfigError("grid needs at least one facet")
        object.__setattr__(self, "facets", tuple(Facet(f) for f in self.facets))

    @property
    def levels(self):
        """Index of the top grid value (grid points are 0..levels per facet)."""
        return int(round((self.high - self.low) / self.step))

    def value(self, level):
        return round(self.low + level * self.step, 10)

    def weights(self, point):
        return FacetWeights({f: self.value(i) for f, i in zip(self.facets, point)})

    def all_points(self):
        return np.array(
            np.meshgrid(*[np.arange(self.levels + 1)] * len(self.facets), indexing="ij")
        ).reshape(len(self.facets), -1).T


@dataclass(frozen=True)
class TraceEntry:
    epoch: int
    step: int
    weights: tuple
    objective: float
    accepted: bool
    restart: bool


@dataclass
class OptimizerRun:
    seed: int
    epochs: int
    grid: WeightGrid
    trace: list = field(default_factory=list)
    best_weights: FacetWeights = None
    best_score: float = float("-inf")

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["epoch", "step", *[f.value for f in self.grid.facets], "objective", "accepted", "restart"])
        for e in self.trace:
            writer.writerow(
                [e.epoch, e.step, *[f"{w:g}" for w in e.weights], repr(e.objective), int(e.accepted), int(e.restart)]
            )
        return buf.getvalue()


def _neighbors(point, levels):
    # Facet order, then -step before +step: this order is the tie-break.
    out = []
    for i in range(len(point)):
        for delta in (-1, 1):
            level = point[i] + delta
            if 0 <= level <= levels:
                out.append(point[:i] + (level,) + point[i + 1 :])
    return out


def hill_climb(objective, grid=None, seed=0, epochs=30, workers=1):
    """Maximize ``objective(FacetWeights)`` over ``grid``.

    Epoch 1 starts with every facet at the top of the range; each later epoch
    starts at a uniformly drawn grid point. Within an epoch the climber moves
    to the best strictly improving single-facet neighbour until none exists.
    Objective values are memoized per grid point.
    """
    if grid is None:
        grid = WeightGrid()
    if epochs < 1:
        raise ConfigError("epochs must be >= 1")
    rng = np.random.default_rng(seed)
    cache = {}
    run = OptimizerRun(seed=seed, epochs=epochs, grid=grid)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def evaluate(points):
        todo = [p for p in dict.fromkeys(points) if p not in cache]
        if pool is not None and len(todo) > 1:
            values = list(pool.map(lambda p: float(objective(grid.weights(p))), todo))
        else:
            values = [float(objective(grid.weights(p))) for p in todo]
        cache.update(zip(todo, values))
        return [cache[p] for p in points]

    def record(epoch, step, point, value, accepted, restart):
        weights = tuple(grid.value(i) for i in point)
        run.trace.append(TraceEntry(epoch, step, weights, value, accepted, restart))
        if value > run.best_score:
            run.best_score = value
            run.best_weights = grid.weights(point)

    try:
        for epoch in range(1, epochs + 1):
            if epoch == 1:
                current = (grid.levels,) * len(grid.facets)
            else:
                current = tuple(int(x) for x in rng.integers(0, grid.levels + 1, size=len(grid.facets)))
            (value,) = evaluate([current])
            step = 0
            record(epoch, step, current, value, True, epoch > 1)
            while True:
                step += 1
                candidates = _neighbors(current, grid.levels)
                values = evaluate(candidates)
                best_i = None
                for i, v in enumerate(values):
                    if v > value and (best_i is None or v > values[best_i]):
                        best_i = i
                for i, (p, v) in enumerate(zip(candidates, values)):
                    record(epoch, step, p, v, i == best_i, False)
                if best_i is None:
                    break
                current, value = candidates[best_i], values[best_i]
    finally:
        if pool is not None:
            pool.shutdown()
    return run


def exhaustive_search(objective, grid):
    """Best grid point by brute force; ties go to the first point in grid order."""
    best = None
    best_value = float("-inf")
    for point in grid.all_points():
        p = tuple(int(x) for x in point)
        v = float(objective(grid.weights(p)))
        if v > best_value:
            best, best_value = p, v
    return grid.weights(best), best_value


def format_weights(weights):
    return "".join(f"{f.value} {weights.get(f, 0.0):g}\n" for f in Facet)


def parse_weights(text):
    items = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError("expected '<facet> <weight>'", lineno)
        try:
            items[Facet(parts[0])] = float(parts[1])
        except ValueError:
            raise FormatError(f"bad facet or weight {line.strip()!r}", lineno) from None
    try:
        return FacetWeights(items)
    except ConfigError as exc:
        raise FormatError(str(exc)) from None
