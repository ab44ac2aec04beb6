"""
Mining association rules
========================

The miner lowers minimum support step by step until enough rules reach
the confidence threshold, then prints a WEKA-style run report.
"""

from loanmine import MiningParams, SyntheticConfig, generate_synthetic, mine
from loanmine.apriori import AssociationRule, format_run_report
from loanmine.preprocess import build_baskets

data = generate_synthetic(SyntheticConfig(seed=7, n_students=500, planted_rules=[({"QA", "QC"}, "QD", 1.0)]))
baskets = build_baskets(data.circulation, data.items, data.students)

params = MiningParams(num_rules=10, min_metric=0.9)
result = mine(baskets, params)
n_attr = len({label for b in baskets for label in b.labels})
print(format_run_report(result, params, len(baskets), n_attr))

# metrics for a single rule from its counts:
# 67 premise baskets, 66 with the consequent too, 2409 with the consequent, 6534 overall
rule = AssociationRule(("QA", "QC", "QH", "QR"), ("QD",), 67, 66, 2409, 6534)
print(rule.format())
