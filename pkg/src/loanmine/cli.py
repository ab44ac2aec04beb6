"""Command-line driver: ``loanmine {generate,mine,cluster,report}``.

The optional ``--config`` file is flat ``key = value`` text; keys carry a
section prefix, e.g.::

    data_dir = data
    output_dir = output
    date_window = 2015-08-01..2019-07-31
    apriori.num_rules = 50
    apriori.lower_bound_support = 0.01
    cluster.k = 5
    cluster.seeds = 1,2,3,4,5
    report.influencer_min_share = 1.0
    synthetic.seed = 7
    synthetic.n_students = 500
    synthetic.planted_rules = QA+QC>QD:1.0

Relative paths are resolved against the config file's directory.
Exit status: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import datetime as dt
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .apriori import MiningParams, format_run_report, mine, rules_to_json
from .cluster import AttributeSchema, kmeans_multi_restart, summarize_clusters
from .datamodel import FACULTIES, validate_dataset
from .ingest import (
    Dataset,
    IngestError,
    PlantedRule,
    SyntheticConfig,
    generate_synthetic,
    load_dataset,
    write_dataset,
)
from .preprocess import SCHEMA_ATTRIBUTES, SchemaKind, build_baskets, build_cluster_instances
from . import report as rpt

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    data_dir: Path = Path("data")
    output_dir: Path = Path("output")
    date_window: Optional[tuple] = None
    apriori: MiningParams = field(default_factory=MiningParams)
    cluster_k: int = 5
    cluster_seeds: tuple = (1, 2, 3, 4, 5)
    influencer_min_share: float = 1.0
    synthetic: Optional[SyntheticConfig] = None

    def __post_init__(self):
        if self.date_window is not None and self.date_window[0] > self.date_window[1]:
            raise ConfigError("date_window start is after its end")


def _parse_window(text: str) -> tuple:
    try:
        start, end = (dt.date.fromisoformat(p.strip()) for p in text.split(".."))
    except ValueError:
        raise ConfigError(f"date_window must look like YYYY-MM-DD..YYYY-MM-DD, got {text!r}") from None
    return start, end


def _parse_rules(text: str) -> tuple:
    """``QA+QC>QD:1.0; HB>QA:0.8`` -> planted rules."""
    rules = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        try:
            lhs, rest = part.split(">")
            rhs, prob = rest.split(":")
            rules.append(PlantedRule(lhs.strip().split("+"), rhs.strip(), float(prob)))
        except ValueError:
            raise ConfigError(f"bad planted rule {part!r}; expected A+B>C:p") from None
    return tuple(rules)


def _parse_weights(text: str) -> dict:
    try:
        return {int(k): float(v) for k, v in (p.split(":") for p in text.split(","))}
    except ValueError:
        raise ConfigError(f"bad faculty_weights {text!r}; expected id:w,id:w,...") from None


_SYNTH_FIELDS = {f.name: f for f in dataclasses.fields(SyntheticConfig)}
_APRIORI_FIELDS = {f.name for f in dataclasses.fields(MiningParams)}


def load_config(path: Optional[Path]) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + path.read_text(encoding="utf-8"), source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    base = path.parent
    cfg: dict = {}
    apriori: dict = {}
    synth: dict = {}
    try:
        for key, value in parser["run"].items():
            section, _, name = key.rpartition(".")
            if section == "" and name in ("data_dir", "output_dir"):
                cfg[name] = base / value
            elif section == "" and name == "date_window":
                cfg[name] = _parse_window(value)
            elif section == "apriori" and name in _APRIORI_FIELDS:
                apriori[name] = int(value) if name == "num_rules" else float(value)
            elif section == "cluster" and name == "k":
                cfg["cluster_k"] = int(value)
            elif section == "cluster" and name == "seeds":
                cfg["cluster_seeds"] = tuple(int(s) for s in value.split(","))
            elif section == "report" and name == "influencer_min_share":
                cfg["influencer_min_share"] = float(value)
            elif section == "synthetic" and name in _SYNTH_FIELDS:
                if name == "planted_rules":
                    synth[name] = _parse_rules(value)
                elif name == "faculty_weights":
                    synth[name] = _parse_weights(value)
                elif name in ("reference_date", "window_start"):
                    synth[name] = dt.date.fromisoformat(value)
                elif name == "subject_affinity":
                    synth[name] = float(value)
                else:
                    synth[name] = int(value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        if apriori:
            cfg["apriori"] = MiningParams(**apriori)
        if synth:
            cfg["synthetic"] = SyntheticConfig(**synth)
        return RunConfig(**cfg)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# -- commands ----------------------------------------------------------------------

def _load_validated(config: RunConfig) -> Dataset:
    dataset, row_rejects = load_dataset(config.data_dir)
    n_bad = sum(len(v) for v in row_rejects.values())
    report = validate_dataset(*dataset)
    n_bad += report.n_rejected
    if n_bad:
        print(f"warning: {n_bad} record(s) rejected during loading/validation", file=sys.stderr)
    return Dataset(report.patrons, report.items, report.circulation, report.students)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")


def cmd_generate(config: RunConfig) -> int:
    if config.synthetic is None:
        print("error: no synthetic config", file=sys.stderr)
        return EXIT_USAGE
    dataset = generate_synthetic(config.synthetic)
    try:
        write_dataset(config.data_dir, dataset)
    except OSError as exc:
        print(f"error: cannot write to {config.data_dir}: {exc.strerror}", file=sys.stderr)
        return EXIT_FAIL
    print(
        f"wrote {len(dataset.patrons)} patrons, {len(dataset.items)} items, "
        f"{len(dataset.circulation)} checkouts, {len(dataset.students)} students to {config.data_dir}"
    )
    return EXIT_OK


def cmd_mine(config: RunConfig, faculty_filter: Optional[int] = None) -> int:
    data = _load_validated(config)
    baskets = build_baskets(data.circulation, data.items, data.students, faculty_filter, config.date_window)
    result = mine(baskets, config.apriori)
    n_attributes = len({label for b in baskets for label in b.labels})
    tag = "all" if faculty_filter is None else f"fac{faculty_filter}"
    relation = "baskets" if faculty_filter is None else f"baskets-FAC{faculty_filter}"
    text = format_run_report(result, config.apriori, len(baskets), n_attributes, relation)
    _write(config.output_dir / f"apriori_{tag}.txt", text)
    _write(config.output_dir / f"rules_{tag}.json", rules_to_json(result.rules))
    print(f"{len(baskets)} instances, {len(result.rules)} rules, {result.cycles} cycles")
    return EXIT_OK


def cmd_cluster(config: RunConfig, schema_kind) -> int:
    kind = SchemaKind.parse(schema_kind)
    data = _load_validated(config)
    instances = build_cluster_instances(
        data.circulation, data.items, data.students, kind, data.patrons, config.date_window
    )
    try:
        if not instances:
            raise ValueError(f"k={config.cluster_k} exceeds the 0 distinct instances")
        schema = AttributeSchema.nominal_from_instances(SCHEMA_ATTRIBUTES[kind], instances)
        model = kmeans_multi_restart(instances, schema, config.cluster_k, config.cluster_seeds)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    table = summarize_clusters(model, instances, schema, f"K-Means centroids ({kind.value}, k={model.k})")
    _write(config.output_dir / f"cluster_{kind.value}.json", model.to_json())
    for fmt in rpt.FORMATS:
        _write(config.output_dir / f"cluster_{kind.value}_summary.{rpt.EXTENSIONS[fmt]}", rpt.render(table, fmt))
    print(f"{len(instances)} instances, k={model.k}, sse={model.sse:.4f}, iterations={model.iterations}")
    return EXIT_OK


def _reports(data: Dataset, year: Optional[int], min_share: float) -> dict:
    return {
        "checkout_share_by_patron_type": lambda: rpt.checkout_share_by_patron_type(data.circulation, data.patrons, year),
        "checkout_share_by_collection": lambda: rpt.checkout_share_by_collection(
            data.circulation, data.items, data.patrons, year, "patron_type"),
        "checkout_share_by_class_year": lambda: rpt.checkout_share_by_collection(
            data.circulation, data.items, data.patrons, year, "class_year"),
        "top_faculties": lambda: rpt.top_faculties(data.circulation, data.patrons, year),
        "faculty_category_matrix": lambda: rpt.faculty_category_matrix(
            data.circulation, data.items, data.patrons, year),
        "category_influencers": lambda: rpt.category_influencers(
            rpt.faculty_category_matrix(data.circulation, data.items, data.patrons, year), min_share),
        "grade_category_distribution": lambda: rpt.grade_category_distribution(
            data.circulation, data.items, data.students, year),
        "checkouts_vs_cgpa": lambda: rpt.checkouts_vs_cgpa(data.circulation, data.students, year),
        "category_usage": lambda: rpt.category_usage(data.items),
        "lifespan_distribution": lambda: rpt.lifespan_distribution(data.items, False),
        "lifespan_distribution_circulated": lambda: rpt.lifespan_distribution(data.items, True),
    }


REPORT_NAMES = tuple(_reports(Dataset([], [], [], []), None, 1.0))
# item-level reports have no academic-year slice
_YEARLESS = {"category_usage", "lifespan_distribution", "lifespan_distribution_circulated"}


def cmd_report(config: RunConfig, report_name: str, year: Optional[int] = None) -> int:
    if report_name not in REPORT_NAMES:
        print(f"error: unknown report {report_name!r}; valid names: {', '.join(REPORT_NAMES)}", file=sys.stderr)
        return EXIT_USAGE
    if report_name in _YEARLESS:
        year = None
    data = _load_validated(config)
    table = _reports(data, year, config.influencer_min_share)[report_name]()
    stem = f"{report_name}_{'all' if year is None else year}"
    for fmt in rpt.FORMATS:
        _write(config.output_dir / f"{stem}.{rpt.EXTENSIONS[fmt]}", rpt.render(table, fmt))
    print(f"wrote {stem}.{{csv,json,md}} to {config.output_dir}")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loanmine", description="Library circulation mining toolkit.")
    parser.add_argument("--config", type=Path, help="flat key=value run configuration")
    parser.add_argument("--output", type=Path, help="output directory (overrides config)")
    parser.add_argument("--data", type=Path, help="data directory (overrides config)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("generate", help="write a synthetic dataset to the data directory")

    p = sub.add_parser("mine", help="mine association rules from student baskets")
    p.add_argument("--faculty", type=int, choices=sorted(FACULTIES), metavar="ID")
    p.add_argument("-N", "--num-rules", type=int)
    p.add_argument("-C", "--min-metric", type=float)
    p.add_argument("-D", "--delta", type=float)
    p.add_argument("-U", "--upper-bound-support", type=float)
    p.add_argument("-M", "--lower-bound-support", type=float)

    p = sub.add_parser("cluster", help="cluster checkouts with K-Means")
    p.add_argument("--schema", required=True, choices=[k.value for k in SchemaKind])
    p.add_argument("-k", type=int, help="number of clusters (overrides config)")

    p = sub.add_parser("report", help="write one descriptive report as csv, json and markdown")
    p.add_argument("--name", required=True)
    p.add_argument("--year", type=int, help="academic year label (default: all years)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.output is not None:
            config.output_dir = args.output
        if args.data is not None:
            config.data_dir = args.data
        if args.command == "mine":
            overrides = {
                name: getattr(args, name)
                for name in ("num_rules", "min_metric", "delta", "upper_bound_support", "lower_bound_support")
                if getattr(args, name) is not None
            }
            if overrides:
                config.apriori = dataclasses.replace(config.apriori, **overrides)
        if args.command == "cluster" and args.k is not None:
            config.cluster_k = args.k
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "generate":
            return cmd_generate(config)
        if args.command == "mine":
            return cmd_mine(config, args.faculty)
        if args.command == "cluster":
            return cmd_cluster(config, args.schema)
        return cmd_report(config, args.name, args.year)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
