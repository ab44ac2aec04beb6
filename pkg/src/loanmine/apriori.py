"""Level-wise frequent itemset mining and association rules.

The driver :func:`mine` lowers the minimum support step by step until
enough confident rules appear, and :func:`format_run_report` prints the
result in the familiar ``<conf:(x)> lift:(y) lev:(z) [n] conv:(w)`` layout.

Itemsets are ``frozenset`` objects of string labels.  Support counting is
vertical: every frequent itemset keeps a Python ``int`` bitmask of the
baskets containing it, so extending it by one label is a single ``&`` and
a popcount.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from itertools import combinations
from typing import Iterable, Mapping, Sequence

Itemset = frozenset


class ClosureError(KeyError):
    """An itemset count table is missing a subset of a counted itemset."""


@dataclass(frozen=True)
class MiningParams:
    num_rules: int = 50
    min_metric: float = 0.9
    delta: float = 0.05
    upper_bound_support: float = 1.0
    lower_bound_support: float = 0.01

    def __post_init__(self):
        if self.num_rules < 0:
            raise ValueError("num_rules must be non-negative")
        if not 0 < self.lower_bound_support <= self.upper_bound_support <= 1:
            raise ValueError("need 0 < lower_bound_support <= upper_bound_support <= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.min_metric <= 1:
            raise ValueError("min_metric must lie in (0, 1]")

    def flags(self) -> str:
        return (
            f"-N {self.num_rules} -T 0 -C {self.min_metric!r} -D {self.delta!r} "
            f"-U {self.upper_bound_support!r} -M {self.lower_bound_support!r}"
        )


@dataclass(frozen=True)
class AssociationRule:
    antecedent: tuple
    consequent: tuple
    premise_count: int
    both_count: int
    consequent_count: int
    n: int

    @property
    def confidence(self) -> float:
        return self.both_count / self.premise_count

    @property
    def lift(self) -> float:
        return (self.both_count * self.n) / (self.premise_count * self.consequent_count)

    @property
    def leverage(self) -> float:
        p, b, c, n = self.premise_count, self.both_count, self.consequent_count, self.n
        return b / n - (p * c) / (n * n)

    @property
    def leverage_instances(self) -> int:
        p, b, c, n = self.premise_count, self.both_count, self.consequent_count, self.n
        # exact floor of b - p*c/n on integers
        return (b * n - p * c) // n

    @property
    def conviction(self) -> float:
        # the +1 keeps exact rules (b == p) finite
        p, b, c, n = self.premise_count, self.both_count, self.consequent_count, self.n
        return p * (n - c) / (n * (p - b + 1))

    def sort_key(self):
        return (-self.confidence, -self.both_count, self.antecedent, self.consequent)

    def to_dict(self) -> dict:
        return {
            "antecedent": list(self.antecedent),
            "consequent": list(self.consequent),
            "premise_count": self.premise_count,
            "both_count": self.both_count,
            "consequent_count": self.consequent_count,
            "n": self.n,
            "confidence": self.confidence,
            "lift": self.lift,
            "leverage": self.leverage,
            "conviction": self.conviction,
        }

    def format(self) -> str:
        lhs = " ".join(f"{x}=t" for x in self.antecedent)
        rhs = " ".join(f"{x}=t" for x in self.consequent)
        return (
            f"{lhs} {self.premise_count} ==> {rhs} {self.both_count}    "
            f"<conf:({fmt2(self.confidence)})> lift:({fmt2(self.lift)}) "
            f"lev:({fmt2(self.leverage)}) [{self.leverage_instances}] "
            f"conv:({fmt2(self.conviction)})"
        )


@dataclass
class MiningResult:
    rules: list
    cycles: int
    final_min_support: float
    level_sizes: list
    n_instances: int = 0
    min_count: int = 0
    itemsets: dict = field(default_factory=dict, repr=False)


def fmt2(x: float) -> str:
    """Round half-up to 2 decimals and drop trailing zeros (``2.60`` -> ``2.6``, ``1.00`` -> ``1``)."""
    d = Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    text = f"{d:f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def support_count(min_support: float, n: int) -> int:
    """Instances needed for a fractional support: nearest integer, halves up, at least 1."""
    return max(1, math.floor(min_support * n + 0.5))


def _labels(basket) -> Iterable[str]:
    return getattr(basket, "labels", basket)


def _vertical(baskets: Sequence) -> dict[str, int]:
    tids: dict[str, int] = {}
    for pos, basket in enumerate(baskets):
        bit = 1 << pos
        for label in _labels(basket):
            tids[label] = tids.get(label, 0) | bit
    return tids


def _levels(baskets: Sequence, min_count: int) -> list[dict[tuple, int]]:
    """Frequent itemsets per size as sorted tuples mapped to their bitmask."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    tids = _vertical(baskets)
    level = {(lab,): t for lab, t in sorted(tids.items()) if t.bit_count() >= min_count}
    levels = []
    while level:
        levels.append(level)
        keys = sorted(level)
        nxt: dict[tuple, int] = {}
        # join sets sharing the first k-1 labels
        start = 0
        while start < len(keys):
            prefix = keys[start][:-1]
            end = start
            while end < len(keys) and keys[end][:-1] == prefix:
                end += 1
            for i in range(start, end):
                a = keys[i]
                ta = level[a]
                for j in range(i + 1, end):
                    cand = a + (keys[j][-1],)
                    if len(cand) > 2 and any(
                        cand[:m] + cand[m + 1:] not in level for m in range(len(cand) - 2)
                    ):
                        continue
                    t = ta & tids[cand[-1]]
                    if t.bit_count() >= min_count:
                        nxt[cand] = t
            start = end
        level = nxt
    return levels


def frequent_itemsets(baskets: Sequence, min_count: int) -> dict[frozenset, int]:
    """All itemsets contained in at least ``min_count`` baskets, with exact counts."""
    return {
        frozenset(key): t.bit_count()
        for level in _levels(list(baskets), min_count)
        for key, t in level.items()
    }


def rules_from_itemsets(
    itemset_counts: Mapping[frozenset, int], min_conf: float, n: int
) -> list[AssociationRule]:
    """Every rule ``X -> Y`` with ``X | Y`` counted, both sides nonempty and confidence >= min_conf."""
    rules = []
    for itemset, both in itemset_counts.items():
        if len(itemset) < 2:
            continue
        items = sorted(itemset)
        for r in range(1, len(items)):
            for cons in combinations(items, r):
                cons_set = frozenset(cons)
                ante_set = itemset - cons_set
                try:
                    p = itemset_counts[ante_set]
                    c = itemset_counts[cons_set]
                except KeyError as exc:
                    raise ClosureError(f"subset of {sorted(itemset)} has no count") from exc
                if both / p >= min_conf:
                    rules.append(AssociationRule(
                        tuple(sorted(ante_set)), cons, p, both, c, n,
                    ))
    rules.sort(key=AssociationRule.sort_key)
    return rules


def support_schedule(params: MiningParams):
    """Minimum supports tried by :func:`mine`, highest first.

    The first cycle runs at ``upper - delta``; each later cycle subtracts
    another ``delta`` and the first value under the lower bound is clamped
    to it and ends the schedule.
    """
    k = 1
    while True:
        s = round(params.upper_bound_support - k * params.delta, 12)
        if s <= params.lower_bound_support + 1e-12:
            yield params.lower_bound_support
            return
        yield s
        k += 1


def mine(baskets: Sequence, params: MiningParams) -> MiningResult:
    """Lower the support until ``params.num_rules`` rules reach ``params.min_metric``."""
    baskets = list(baskets)
    n = len(baskets)
    if n == 0:
        return MiningResult([], 0, params.upper_bound_support, [], 0, 0)
    cycles = 0
    rules: list[AssociationRule] = []
    levels: list = []
    support = params.upper_bound_support
    min_count = 0
    for support in support_schedule(params):
        cycles += 1
        min_count = support_count(support, n)
        levels = _levels(baskets, min_count)
        counts = {frozenset(k): t.bit_count() for lvl in levels for k, t in lvl.items()}
        rules = rules_from_itemsets(counts, params.min_metric, n)
        if len(rules) >= params.num_rules:
            break
    return MiningResult(
        rules=rules[: params.num_rules],
        cycles=cycles,
        final_min_support=support,
        level_sizes=[len(lvl) for lvl in levels],
        n_instances=n,
        min_count=min_count,
        itemsets=counts,
    )


def format_run_report(
    result: MiningResult,
    params: MiningParams,
    n: int,
    n_attributes: int,
    relation: str = "baskets",
) -> str:
    lines = [
        "==== Run information ====",
        "",
        f"Scheme:       Apriori {params.flags()}",
        f"Relation:     {relation}",
        f"Instances:    {n}",
        f"Attributes:   {n_attributes}",
        "==== Associator model (full training set) ====",
        "",
        "",
        "Apriori",
        "=======",
        "",
        f"Minimum support: {fmt2(result.final_min_support)} "
        f"({support_count(result.final_min_support, n) if n else 0} instances)",
        f"Minimum metric <confidence>: {fmt2(params.min_metric)}",
        f"Number of cycles performed: {result.cycles}",
        "",
        "Generated sets of large itemsets:",
        "",
    ]
    for size, count in enumerate(result.level_sizes, start=1):
        lines.append(f"Size of set of large itemsets L({size}): {count}")
    lines.append("")
    lines.append("Best rules found:")
    lines.append("")
    width = len(str(len(result.rules)))
    for i, rule in enumerate(result.rules, start=1):
        lines.append(f"{i:>{width + 1}}. {rule.format()}")
    return "\n".join(lines) + "\n"


def rules_to_json(rules: Iterable[AssociationRule]) -> str:
    return json.dumps([r.to_dict() for r in rules], indent=2) + "\n"


def rules_from_json(text: str) -> list[AssociationRule]:
    return [
        AssociationRule(
            tuple(d["antecedent"]), tuple(d["consequent"]), d["premise_count"],
            d["both_count"], d["consequent_count"], d["n"],
        )
        for d in json.loads(text)
    ]
