"""
K-Means on nominal attributes
=============================

Nominal attributes use mismatch distance and mode centroids.  Several
seeds are tried and the lowest-sse model is kept.
"""

from loanmine import SyntheticConfig, generate_synthetic
from loanmine.cluster import AttributeSchema, kmeans_multi_restart, summarize_clusters
from loanmine.preprocess import SCHEMA_ATTRIBUTES, SchemaKind, build_cluster_instances
from loanmine.report import render

data = generate_synthetic(SyntheticConfig(seed=3, n_students=200, n_checkouts=2000))
kind = SchemaKind.parse("fsg")
rows = build_cluster_instances(data.circulation, data.items, data.students, kind)
schema = AttributeSchema.nominal_from_instances(SCHEMA_ATTRIBUTES[kind], rows)

model = kmeans_multi_restart(rows, schema, k=4, seeds=range(1, 6))
print("seed", model.seed, "sse", model.sse, "sizes", model.sizes)

# the objective never increases across iterations
print(model.sse_history)

print(render(summarize_clusters(model, rows, schema), "markdown"))
