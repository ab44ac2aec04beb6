"""K-Means over nominal and numeric attributes.

Nominal attributes use 0/1 mismatch distance and mode centroids; numeric
attributes are min-max scaled to [0, 1] and use squared differences and
mean centroids.  The objective (``sse``) is the total squared distance of
instances to their cluster centroid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .report import ReportTable


@dataclass(frozen=True)
class Nominal:
    categories: tuple

    def __init__(self, categories):
        cats = tuple(categories)
        if not cats:
            raise ValueError("nominal attribute needs at least one category")
        if len(set(cats)) != len(cats):
            raise ValueError("duplicate nominal categories")
        object.__setattr__(self, "categories", cats)


@dataclass(frozen=True)
class Numeric:
    min: float
    max: float

    def __post_init__(self):
        if not self.min <= self.max:
            raise ValueError("numeric attribute needs min <= max")

    def scale(self, x: float) -> float:
        span = self.max - self.min
        return 0.0 if span == 0 else (x - self.min) / span


AttributeKind = Union[Nominal, Numeric]


@dataclass(frozen=True)
class AttributeSchema:
    attributes: tuple

    def __init__(self, attributes):
        attrs = tuple((name, kind) for name, kind in attributes)
        names = [name for name, _ in attrs]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        object.__setattr__(self, "attributes", attrs)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.attributes]

    def __len__(self) -> int:
        return len(self.attributes)

    @classmethod
    def nominal_from_instances(cls, names: Sequence[str], instances) -> "AttributeSchema":
        """All-nominal schema whose category sets are the observed values, sorted."""
        cols = list(zip(*instances)) if instances else [() for _ in names]
        return cls((name, Nominal(sorted(set(col)))) for name, col in zip(names, cols))

    def check(self, values) -> None:
        if len(values) != len(self.attributes):
            raise ValueError(f"expected {len(self.attributes)} values, got {len(values)}")
        for v, (name, kind) in zip(values, self.attributes):
            if isinstance(kind, Nominal):
                if v not in kind.categories:
                    raise ValueError(f"{name}: {v!r} is not a known category")
            elif not kind.min <= v <= kind.max:
                raise ValueError(f"{name}: {v!r} outside [{kind.min}, {kind.max}]")

    def to_dict(self) -> list:
        out = []
        for name, kind in self.attributes:
            if isinstance(kind, Nominal):
                out.append({"name": name, "kind": "nominal", "categories": list(kind.categories)})
            else:
                out.append({"name": name, "kind": "numeric", "min": kind.min, "max": kind.max})
        return out


def distance(a, b, schema: AttributeSchema) -> float:
    """Squared distance between an instance and a value list (e.g. a centroid)."""
    schema.check(a)
    schema.check(b)
    total = 0.0
    for x, y, (_, kind) in zip(a, b, schema.attributes):
        if isinstance(kind, Nominal):
            total += 0.0 if x == y else 1.0
        else:
            total += (kind.scale(x) - kind.scale(y)) ** 2
    return total


# -- encoded form ------------------------------------------------------------------

class _Encoded:
    """Instances as a float matrix: nominal slots hold category codes in sorted order."""

    def __init__(self, instances, schema: AttributeSchema):
        self.schema = schema
        self.nominal = np.array([isinstance(k, Nominal) for _, k in schema.attributes])
        self.sorted_cats = []
        self.codes = []
        for _, kind in schema.attributes:
            if isinstance(kind, Nominal):
                cats = sorted(kind.categories)
                self.sorted_cats.append(cats)
                self.codes.append({c: i for i, c in enumerate(cats)})
            else:
                self.sorted_cats.append(None)
                self.codes.append(None)
        self.X = np.array([self.encode(v) for v in instances], dtype=float).reshape(len(instances), len(schema))

    def encode(self, values) -> list[float]:
        self.schema.check(values)
        out = []
        for v, codes, (_, kind) in zip(values, self.codes, self.schema.attributes):
            out.append(float(codes[v]) if codes is not None else kind.scale(v))
        return out

    def decode(self, row) -> tuple:
        out = []
        for x, cats, (_, kind) in zip(row, self.sorted_cats, self.schema.attributes):
            if cats is not None:
                out.append(cats[int(x)])
            else:
                out.append(kind.min + float(x) * (kind.max - kind.min))
        return tuple(out)

    def distances(self, C: np.ndarray) -> np.ndarray:
        """(n, k) matrix of squared distances to each centroid row of ``C``."""
        diff = self.X[:, None, :] - C[None, :, :]
        sq = np.where(self.nominal, (diff != 0).astype(float), diff * diff)
        return sq.sum(axis=2)

    def centroid(self, members: np.ndarray) -> np.ndarray:
        rows = self.X[members]
        out = np.empty(self.X.shape[1])
        for j in range(self.X.shape[1]):
            if self.nominal[j]:
                counts = np.bincount(rows[:, j].astype(int), minlength=len(self.sorted_cats[j]))
                out[j] = int(np.argmax(counts))  # first max = lexicographically smallest
            else:
                out[j] = rows[:, j].mean()
        return out


@dataclass
class ClusterModel:
    k: int
    centroids: list
    assignments: list
    sse: float
    iterations: int
    seed: int
    schema: AttributeSchema
    sse_history: list = field(default_factory=list, repr=False)

    @property
    def sizes(self) -> list[int]:
        return np.bincount(np.asarray(self.assignments, dtype=int), minlength=self.k).tolist()

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "schema": self.schema.to_dict(),
            "centroids": [list(c) for c in self.centroids],
            "cluster_sizes": self.sizes,
            "sse": self.sse,
            "iterations": self.iterations,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _sort_key(values):
    return tuple((0, v) if isinstance(v, str) else (1, float(v)) for v in values)


def _sse(enc: _Encoded, assign: np.ndarray, C: np.ndarray) -> float:
    D = enc.distances(C)
    return float(D[np.arange(len(assign)), assign].sum())


def _update(enc: _Encoded, assign: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Recompute centroids; an empty cluster takes over the worst-fitting instance."""
    k = C.shape[0]
    C = C.copy()
    while True:
        for j in range(k):
            members = np.flatnonzero(assign == j)
            if members.size:
                C[j] = enc.centroid(members)
        empty = [j for j in range(k) if not np.any(assign == j)]
        if not empty:
            return C
        D = enc.distances(C)
        own = D[np.arange(len(assign)), assign]
        worst = int(np.argmax(own))
        j = empty[0]
        assign[worst] = j
        C[j] = enc.X[worst]


def kmeans(instances, schema: AttributeSchema, k: int = 5, seed: int = 0, max_iterations: int = 100) -> ClusterModel:
    """Lloyd iterations from ``k`` seed-chosen distinct instances.

    Starting centroids are sampled from the distinct instances in sorted
    order, so the input order does not matter.  Nearest-centroid ties go to
    the lower cluster index.  ``sse_history`` records the objective after
    every assignment and every centroid update.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    instances = [tuple(v) for v in instances]
    distinct = sorted(set(instances), key=_sort_key)
    if k > len(distinct):
        raise ValueError(f"k={k} exceeds the {len(distinct)} distinct instances")

    enc = _Encoded(instances, schema)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(distinct), size=k, replace=False)
    C = np.array([enc.encode(distinct[int(i)]) for i in picks], dtype=float)

    assign = np.argmin(enc.distances(C), axis=1)
    history = [_sse(enc, assign, C)]
    iterations = 0
    while True:
        C = _update(enc, assign, C)
        iterations += 1
        history.append(_sse(enc, assign, C))
        new = np.argmin(enc.distances(C), axis=1)
        if np.array_equal(new, assign) or iterations >= max_iterations:
            break
        assign = new
        history.append(_sse(enc, assign, C))

    return ClusterModel(
        k=k,
        centroids=[enc.decode(row) for row in C],
        assignments=assign.tolist(),
        sse=history[-1],
        iterations=iterations,
        seed=seed,
        schema=schema,
        sse_history=history,
    )


def kmeans_multi_restart(instances, schema: AttributeSchema, k: int = 5, seeds=(0,), max_iterations: int = 100) -> ClusterModel:
    """Best of one :func:`kmeans` run per seed (lowest sse, earliest seed on ties)."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    best: Optional[ClusterModel] = None
    for seed in seeds:
        model = kmeans(instances, schema, k, seed, max_iterations)
        if best is None or model.sse < best.sse:
            best = model
    return best


def _column_centroid(enc: _Encoded, members: np.ndarray) -> tuple:
    return enc.decode(enc.centroid(members))


def summarize_clusters(model: ClusterModel, instances, schema: AttributeSchema, caption: str = "Cluster centroids") -> ReportTable:
    enc = _Encoded([tuple(v) for v in instances], schema)
    assign = np.asarray(model.assignments, dtype=int)
    columns = ["Attribute", "Full Data"] + [f"c_{j + 1}" for j in range(model.k)]
    full = _column_centroid(enc, np.arange(len(assign))) if len(assign) else (None,) * len(schema)
    rows = [["Instances", len(assign)] + model.sizes]
    for a, name in enumerate(schema.names):
        rows.append([name, full[a]] + [model.centroids[j][a] for j in range(model.k)])
    return ReportTable(caption, columns, rows)
