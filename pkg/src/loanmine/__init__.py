"""Circulation analytics for academic libraries: ingest, baskets, Apriori, K-Means, reports."""

from .apriori import AssociationRule, MiningParams, MiningResult, frequent_itemsets, mine, rules_from_itemsets, support_count
from .cluster import AttributeSchema, ClusterModel, Nominal, Numeric, kmeans, kmeans_multi_restart, summarize_clusters
from .ingest import SyntheticConfig, builtin_lc_table, generate_synthetic, load_csv
from .preprocess import academic_year, build_baskets, build_cluster_instances, grade_level, lifespan_bucket, parse_lc
from .report import ReportTable, render

__version__ = "0.1.0"
