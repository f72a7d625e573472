"""Command-line interface.

Subcommands::

    diffnet make-diff-net NAME=PATH NAME=PATH [...] --out DIR
    diffnet cluster-nodes LINKS_TSV --alpha 0.05 --out nodes.tsv
    diffnet simulate SPEC_INI --out DIR
    diffnet enrich NODES_TSV ANNOTATIONS_TSV --out enrichment.tsv
    diffnet export LINKS_TSV --format dot --out network.dot

Exit codes: 0 success, 1 analysis error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__
from . import export as ex
from . import synth
from .enrichment import enrich, read_annotations, write_enrichment
from .graph_io import EdgeListError
from .pipeline import RunConfig, make_diff_net, run

log = logging.getLogger("diffnet")

EXIT_OK, EXIT_ANALYSIS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_inputs(items: list[str]) -> list[tuple[str, str]]:
    """``NAME=PATH`` or bare ``PATH`` (named after the file stem), order preserved."""
    out = []
    for item in items:
        name, sep, path = item.partition("=")
        if not sep:
            name, path = Path(item).stem, item
        if not name or not path:
            raise UsageError(f"bad network input {item!r}; expected NAME=PATH")
        if not Path(path).is_file():
            raise UsageError(f"input file not found: {path}")
        out.append((name, path))
    if len(out) < 2:
        raise UsageError("at least two networks are required")
    return out


def _parse_formats(text: str) -> list[str]:
    formats = [f.strip() for f in text.split(",") if f.strip()]
    for f in formats:
        if f not in ex.GRAPH_FORMATS:
            raise UsageError(f"unknown format {f!r}; choose from {', '.join(ex.GRAPH_FORMATS)}")
    return formats


_FLAG_TO_FIELD = {"tau": "tau", "stretch": "stretch", "norm": "mode", "ratio_cutoff": "ratio_cutoff",
                  "alpha": "alpha", "floor": "floor", "weight_cutoff": "weight_cutoff",
                  "delimiter": "delimiter", "threads": "threads"}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then ``--config`` file values, then explicit flags."""
    cfg = RunConfig()
    types = {f.name: f.type for f in fields(RunConfig)}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        if not cp.read(args.config, encoding="utf-8"):
            raise UsageError(f"config file not found: {args.config}")
        section = cp["run"] if "run" in cp else cp[cp.default_section]
        for key, value in section.items():
            key = _FLAG_TO_FIELD.get(key.replace("-", "_"), key.replace("-", "_"))
            if key not in types:
                raise UsageError(f"unknown config key {key!r}")
            if key == "stretch":
                setattr(cfg, key, value.strip().lower() in ("1", "true", "yes", "on"))
            elif key in ("mode", "delimiter"):
                setattr(cfg, key, value)
            elif key == "threads":
                setattr(cfg, key, int(value))
            else:
                setattr(cfg, key, float(value))
    for flag, field_name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, field_name, value)
    if cfg.delimiter in ("tab", "comma", "whitespace"):
        cfg.delimiter = {"tab": "\t", "comma": ",", "whitespace": "whitespace"}[cfg.delimiter]
    try:
        return cfg.validate()
    except ValueError as err:
        raise UsageError(str(err)) from None


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with a [run] section of defaults")
    p.add_argument("--tau", type=float, help="categorization threshold (default 1/3)")
    p.add_argument("--stretch", action="store_true", default=None, help="rescale each network to [-1, 1]")
    p.add_argument("--norm", choices=["all", "group"], help="score normalisation scope (default group)")
    p.add_argument("--ratio-cutoff", type=float, help="keep links with score ratio >= this (default 1)")
    p.add_argument("--alpha", type=float, help="node test significance level (default 0.05)")
    p.add_argument("--floor", type=float, help="floor of the normalised internal score (default 1e-6)")
    p.add_argument("--weight-cutoff", type=float, help="enrichment weight cutoff (default 0.10)")
    p.add_argument("--delimiter", choices=["tab", "comma", "whitespace"], help="input delimiter (default tab)")
    p.add_argument("--threads", type=int, help="worker cap; results do not depend on it")
    p.add_argument("--format", default="graphml", help="graph formats, comma separated: graphml,dot,json")


def _print_summary(report: dict) -> None:
    links, nodes = report["links"], report["nodes"]
    print(f"links: {links['total']}  " + "  ".join(f"{k}={v}" for k, v in links["phi"].items())
          + f"  groups={links['group_count']}")
    print(f"nodes: {nodes['total']}  " + "  ".join(f"{k}={v}" for k, v in nodes["phi"].items()))


def cmd_make_diff_net(args) -> int:
    cfg = build_config(args)
    formats = _parse_formats(args.format)
    inputs = parse_inputs(args.networks)
    net = run(inputs, cfg)
    ex.export_all(net, args.out, formats, threads=cfg.threads)
    _print_summary(ex.summary(net))
    return EXIT_OK


def cmd_cluster_nodes(args) -> int:
    cfg = build_config(args)
    path = Path(args.links)
    if not path.is_file():
        raise UsageError(f"link table not found: {path}")
    net = ex.read_links_tsv(path, alpha=cfg.alpha)
    out = Path(args.out)
    ex.export_nodes_tsv(net, out)
    tallies = net.tallies()["nodes"]
    print(f"nodes: {tallies['total']}  " + "  ".join(f"{k}={v}" for k, v in tallies["phi"].items()))
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec_path = Path(args.spec)
    if not spec_path.is_file():
        raise UsageError(f"spec file not found: {spec_path}")
    spec = synth.read_spec(spec_path)
    if args.seed is not None:
        spec.seed = args.seed
    cfg = build_config(args)
    cfg.tau = spec.tau if args.tau is None else cfg.tau
    out = Path(args.out)
    lists, truth = synth.generate_edge_lists(spec)
    inputs = synth.write_instance(lists, out / "networks")
    net = run([(n, str(p)) for n, p in inputs], cfg)
    ex.export_all(net, out, _parse_formats(args.format), threads=cfg.threads)
    node_labels = dict(zip(map(str, net.nodes["node"]), map(str, net.nodes["assigned_phi_tilde"])))
    report = synth.evaluate(synth.predicted_labels(net.classified), truth, node_labels)
    ex.write_json(report.as_dict(), out / "recovery.json")
    print(f"link accuracy: {report.accuracy:.6f}")
    if report.node_accuracy is not None:
        print(f"hub accuracy: {report.node_accuracy:.6f}")
    return EXIT_OK


def cmd_enrich(args) -> int:
    cfg = build_config(args)
    for p in (args.nodes, args.annotations):
        if not Path(p).is_file():
            raise UsageError(f"file not found: {p}")
    nodes = ex.read_nodes_tsv(args.nodes)
    results = enrich(nodes, read_annotations(args.annotations), cfg.weight_cutoff, level=args.level)
    write_enrichment(results, args.out)
    print(f"tests: {len(results)}  significant: {sum(r.significant for r in results)}")
    return EXIT_OK


def cmd_export(args) -> int:
    cfg = build_config(args)
    path = Path(args.links)
    if not path.is_file():
        raise UsageError(f"link table not found: {path}")
    params = None
    if args.summary:
        with open(args.summary, encoding="utf-8") as fh:
            params = json.load(fh).get("parameters")
    net = ex.read_links_tsv(path, alpha=cfg.alpha, parameters=params)
    formats = _parse_formats(args.format)
    if len(formats) != 1:
        raise UsageError("export writes exactly one format")
    ex.export_graph(net, args.out, formats[0])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diffnet", description="Multi-network differential analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-diff-net", help="classify, score and filter links; classify nodes")
    p.add_argument("networks", nargs="+", help="NAME=PATH edge lists; the first is the reference")
    p.add_argument("--out", required=True, help="output directory")
    _add_run_flags(p)
    p.set_defaults(func=cmd_make_diff_net)

    p = sub.add_parser("cluster-nodes", help="re-run node classification on an exported link table")
    p.add_argument("links", help="links.tsv from make-diff-net")
    p.add_argument("--out", required=True, help="output node table")
    _add_run_flags(p)
    p.set_defaults(func=cmd_cluster_nodes)

    p = sub.add_parser("simulate", help="generate a planted instance, analyse it and report recovery")
    p.add_argument("spec", help="INI spec with [planted] and [links] sections")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the spec seed")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("enrich", help="annotation enrichment per node category")
    p.add_argument("nodes", help="nodes.tsv from make-diff-net or cluster-nodes")
    p.add_argument("annotations", help="two-column annotation_name/node_id file")
    p.add_argument("--out", required=True, help="output table")
    p.add_argument("--level", choices=["phi_tilde", "phi"], default="phi_tilde")
    _add_run_flags(p)
    p.set_defaults(func=cmd_enrich)

    p = sub.add_parser("export", help="convert an exported link table to a graph file")
    p.add_argument("links", help="links.tsv from make-diff-net")
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--summary", help="summary.json whose parameters are carried over")
    _add_run_flags(p)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, FileNotFoundError, OSError) as err:
        print(f"diffnet: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (EdgeListError, ValueError) as err:
        print(f"diffnet: analysis error: {err}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
