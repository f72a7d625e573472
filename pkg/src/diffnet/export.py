"""Serialization of differential networks: TSV tables, GraphML, DOT, JSON, summary.

Link and node tables are TAB separated, UTF-8, LF terminated and sorted by
canonical pair / node name. Weight columns are written with round-trip float
text so reloading and reclassifying reproduces the class columns; derived
scores use 6 significant digits. JSON carries full precision.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np
import pandas as pd

from . import classify as cl
from . import node_class as nc
from . import scoring as sc
from .pipeline import DiffNetwork, cluster_nodes

GRAPH_FORMATS = ("graphml", "dot", "json")
PHI_COLOURS = {cl.ALPHA: "green", cl.BETA: "red", cl.GAMMA: "blue", nc.UNDEFINED: "grey"}
SCORE_COLUMNS = ("delta", "delta_star", "delta_phi_tilde", "delta_rho_tilde", "score_ratio")


def _g6(values: np.ndarray) -> np.ndarray:
    if len(values) == 0:
        return np.array([], dtype=object)
    return np.char.mod("%.6g", np.asarray(values, dtype=np.float64)).astype(object)


def link_columns(names: Sequence[str]) -> list[str]:
    return (["node1", "node2"] + [f"rho:{n}" for n in names] + [f"rho_tilde:{n}" for n in names]
            + ["phi", "phi_tilde", "group", *SCORE_COLUMNS])


def _tsv_field(text: str) -> str:
    if any(ch in text for ch in '\t"\n\r'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _text_columns(net: DiffNetwork) -> dict[str, list[str]]:
    """Link table columns already rendered as text, in output order."""
    links, scores = net.links, net.scores
    node_text = np.array([_tsv_field(str(n)) for n in links.nodes], dtype=object)
    cols: dict[str, list[str]] = {
        "node1": node_text[links.pair_a].tolist() if len(links) else [],
        "node2": node_text[links.pair_b].tolist() if len(links) else [],
    }
    for k, n in enumerate(net.names):
        cols[f"rho:{n}"] = list(map(repr, links.rho[:, k].tolist()))
    for k, n in enumerate(net.names):
        cols[f"rho_tilde:{n}"] = list(map(str, links.rho_tilde[:, k].tolist()))
    for name, codes, labels in (("phi", None, None),
                                ("phi_tilde", links.phi_tilde_code, links.phi_tilde_labels),
                                ("group", links.group_code, links.group_labels)):
        if codes is None:
            cols[name] = links.phi.tolist()
        else:
            rendered = np.array([_tsv_field(str(x)) for x in labels], dtype=object)
            cols[name] = rendered[codes].tolist() if len(codes) else []
    for col in SCORE_COLUMNS:
        cols[col] = _g6(getattr(scores, col)).tolist()
    return cols


def links_frame(net: DiffNetwork) -> pd.DataFrame:
    """The link table as a DataFrame with numeric score columns (not used by the writer)."""
    links, scores = net.links, net.scores
    a, b = links.nodes[links.pair_a], links.nodes[links.pair_b]
    data: dict[str, object] = {"node1": a, "node2": b}
    for k, n in enumerate(net.names):
        data[f"rho:{n}"] = links.rho[:, k]
    for k, n in enumerate(net.names):
        data[f"rho_tilde:{n}"] = links.rho_tilde[:, k].astype(np.int64)
    data["phi"] = links.phi
    data["phi_tilde"] = links.phi_tilde
    data["group"] = links.group
    for col in SCORE_COLUMNS:
        data[col] = getattr(scores, col)
    return pd.DataFrame(data, columns=link_columns(net.names))


def _write_columns(path: Path, cols: dict[str, list[str]]) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(_tsv_field(c) for c in cols) + "\n")
        rows = zip(*cols.values())
        while True:
            chunk = ["\t".join(r) for _, r in zip(range(65536), rows)]
            if not chunk:
                break
            fh.write("\n".join(chunk))
            fh.write("\n")
    return path


def export_links_tsv(net: DiffNetwork, path: str | Path) -> Path:
    return _write_columns(Path(path), _text_columns(net))


def read_links_tsv(path: str | Path, alpha: float = nc.DEFAULT_ALPHA, parameters: dict | None = None) -> DiffNetwork:
    """Reload an exported link table as a :class:`DiffNetwork` (node classes recomputed)."""
    df = pd.read_csv(path, sep="\t", dtype={"node1": str, "node2": str, "phi": str,
                                            "phi_tilde": str, "group": str},
                     na_filter=False, encoding="utf-8", float_precision="round_trip")
    missing = [c for c in ("node1", "node2", "phi", "phi_tilde", *SCORE_COLUMNS) if c not in df.columns]
    if missing:
        raise ValueError(f"{path}: not a link table, missing columns {missing}")
    names = [c.split(":", 1)[1] for c in df.columns if c.startswith("rho:")]
    a = df["node1"].to_numpy(dtype=object)
    b = df["node2"].to_numpy(dtype=object)
    nodes = np.array(sorted(set(a) | set(b)), dtype=object)
    index = pd.Index(nodes)
    pt = df["phi_tilde"].to_numpy(dtype=object)
    pt_labels = sorted(set(pt))
    pt_code = pd.Index(pt_labels).get_indexer(pt) if len(pt) else np.array([], dtype=np.int64)
    grp = df["group"].to_numpy(dtype=object) if "group" in df.columns else pt
    grp_labels = sorted(set(grp))
    grp_code = pd.Index(grp_labels).get_indexer(grp) if len(grp) else np.array([], dtype=np.int64)
    params = dict(parameters or {})
    links = cl.ClassifiedLinks(
        names=names, nodes=nodes,
        pair_a=index.get_indexer(a).astype(np.int64), pair_b=index.get_indexer(b).astype(np.int64),
        rho=df[[f"rho:{n}" for n in names]].to_numpy(dtype=np.float64).reshape(len(df), len(names)),
        rho_tilde=df[[f"rho_tilde:{n}" for n in names]].to_numpy(dtype=np.int8).reshape(len(df), len(names)),
        phi=df["phi"].to_numpy(dtype="<U1"),
        phi_tilde_code=np.asarray(pt_code, dtype=np.int64), phi_tilde_labels=pt_labels,
        group_code=np.asarray(grp_code, dtype=np.int64), group_labels=grp_labels,
        tau=float(params.get("tau", cl.DEFAULT_TAU)),
    )
    sc_cols = [df[c].to_numpy(dtype=np.float64) for c in SCORE_COLUMNS]
    scores = sc.LinkScores(sc_cols[0], sc_cols[1], sc_cols[2], np.full(len(df), np.nan), sc_cols[3], sc_cols[4])
    params.setdefault("networks", names)
    params["alpha"] = alpha
    return DiffNetwork(names=names, links=links, scores=scores, nodes=cluster_nodes(links, alpha),
                       parameters=params)


def reclassify_links_tsv(path: str | Path, tau: float = cl.DEFAULT_TAU) -> pd.DataFrame:
    """Recompute class columns from the weight columns of an exported link table."""
    df = pd.read_csv(path, sep="\t", dtype={"node1": str, "node2": str}, na_filter=False,
                     float_precision="round_trip")
    names = [c.split(":", 1)[1] for c in df.columns if c.startswith("rho:")]
    rho = df[[f"rho:{n}" for n in names]].to_numpy(dtype=np.float64).reshape(len(df), len(names))
    rt = cl.categorize(rho, tau)
    codes = cl._pattern_codes(rt)
    cache: dict[int, tuple[str, str]] = {}
    phi, pt = [], []
    for code, row in zip(codes.tolist(), rt):
        if code not in cache:
            cache[code] = cl.classify_link(row, names)
        phi.append(cache[code][0])
        pt.append(cache[code][1])
    return pd.DataFrame({"node1": df["node1"], "node2": df["node2"], "phi": phi, "phi_tilde": pt})


def nodes_frame(net: DiffNetwork) -> pd.DataFrame:
    t = net.nodes
    n = len(t["node"])
    counts = np.zeros((n, len(cl.PHI_CLASSES)), dtype=np.int64)
    ni, ci, k = t["_phi_counts"]
    if n:
        counts[np.asarray(ni, dtype=np.int64), np.asarray(ci, dtype=np.int64)] = np.asarray(k, dtype=np.int64)
    pt_text = [[] for _ in range(n)]
    labels = net.links.phi_tilde_labels
    for i, c, kk in zip(*t["_phi_tilde_counts"]):
        pt_text[int(i)].append(f"{labels[int(c)]}={int(kk)}")
    data = {
        "node": t["node"],
        "degree": t["degree"],
        "assigned_phi": t["assigned_phi"],
        "assigned_phi_tilde": t["assigned_phi_tilde"],
        "chi2_phi": _g6(t["chi2_phi"]),
        "p_phi": _g6(t["p_phi"]),
        "chi2_phi_tilde": _g6(t["chi2_phi_tilde"]),
        "p_phi_tilde": _g6(t["p_phi_tilde"]),
        "low_evidence": np.where(np.asarray(t["degree"]) < nc.LOW_EVIDENCE_DEGREE, "true", "false"),
    }
    for j, c in enumerate(cl.PHI_CLASSES):
        data[f"n_{c}"] = counts[:, j]
    data["phi_tilde_counts"] = [";".join(x) for x in pt_text]
    return pd.DataFrame(data)


def export_nodes_tsv(net: DiffNetwork, path: str | Path) -> Path:
    path = Path(path)
    nodes_frame(net).to_csv(path, sep="\t", index=False, lineterminator="\n", encoding="utf-8")
    return path


def read_nodes_tsv(path: str | Path) -> list[nc.NodeClassification]:
    df = pd.read_csv(path, sep="\t", dtype=str, na_filter=False, encoding="utf-8")
    out = []
    for row in df.itertuples(index=False):
        pt_counts = {}
        if row.phi_tilde_counts:
            for item in row.phi_tilde_counts.split(";"):
                lab, k = item.rsplit("=", 1)
                pt_counts[lab] = int(k)
        out.append(nc.NodeClassification(
            node=row.node, degree=int(row.degree),
            phi_counts={c: int(getattr(row, f"n_{c}")) for c in cl.PHI_CLASSES},
            phi_tilde_counts=pt_counts,
            chi2_phi=float(row.chi2_phi), p_phi=float(row.p_phi),
            chi2_phi_tilde=float(row.chi2_phi_tilde), p_phi_tilde=float(row.p_phi_tilde),
            assigned_phi=row.assigned_phi, assigned_phi_tilde=row.assigned_phi_tilde,
        ))
    return out


def summary(net: DiffNetwork) -> dict:
    """Counts of links and nodes per class and sub-category, plus run diagnostics."""
    return {
        "networks": list(net.names),
        "parameters": net.parameters,
        "ingestion": net.ingestion,
        **net.tallies(),
        "group_effect": net.group_effect,
    }


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(obj, path: str | Path, compact: bool = False) -> Path:
    """Write JSON; ``compact`` drops indentation (and is much faster for large documents)."""
    path = Path(path)
    text = json.dumps(obj, indent=None if compact else 2, separators=(",", ":") if compact else None,
                      default=_json_default, allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.write("\n")
    return path


def _edge_arrays(net: DiffNetwork):
    links = net.links
    return (links.nodes[links.pair_a], links.nodes[links.pair_b], links.phi,
            links.phi_tilde, net.scores.score_ratio)


def _node_arrays(net: DiffNetwork):
    t = net.nodes
    return t["node"], t["assigned_phi"], t["assigned_phi_tilde"], t["degree"]


def _write_graphml(net: DiffNetwork, fh) -> None:
    fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    fh.write('<graphml xmlns="http://graphml.graphdrawing.org/xmlns" '
             'xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" '
             'xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns '
             'http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">\n')
    keys = [
        ("n_phi", "node", "assigned_phi", "string"),
        ("n_phi_tilde", "node", "assigned_phi_tilde", "string"),
        ("n_degree", "node", "degree", "int"),
        ("n_colour", "node", "colour", "string"),
        ("e_phi", "edge", "phi", "string"),
        ("e_phi_tilde", "edge", "phi_tilde", "string"),
        ("e_ratio", "edge", "score_ratio", "double"),
        ("e_width", "edge", "width", "double"),
        ("e_colour", "edge", "colour", "string"),
    ]
    for kid, dom, name, typ in keys:
        fh.write(f'  <key id="{kid}" for="{dom}" attr.name="{name}" attr.type="{typ}"/>\n')
    fh.write('  <graph id="diffnet" edgedefault="undirected">\n')
    node_ids = [quoteattr(str(n)) for n in net.links.nodes]
    for node, phi, pt, deg in zip(*_node_arrays(net)):
        fh.write(f"    <node id={quoteattr(str(node))}>"
                 f'<data key="n_phi">{escape(str(phi))}</data>'
                 f'<data key="n_phi_tilde">{escape(str(pt))}</data>'
                 f'<data key="n_degree">{int(deg)}</data>'
                 f'<data key="n_colour">{PHI_COLOURS[str(phi)]}</data></node>\n')
    links = net.links
    pt_text = [escape(str(x)) for x in links.phi_tilde_labels]
    rows = zip(links.pair_a.tolist(), links.pair_b.tolist(), links.phi.tolist(),
               links.phi_tilde_code.tolist(), map(repr, net.scores.score_ratio.tolist()))
    for i, (a, b, phi, pt, r) in enumerate(rows):
        fh.write(f'    <edge id="e{i}" source={node_ids[a]} target={node_ids[b]}>'
                 f'<data key="e_phi">{phi}</data>'
                 f'<data key="e_phi_tilde">{pt_text[pt]}</data>'
                 f'<data key="e_ratio">{r}</data><data key="e_width">{r}</data>'
                 f'<data key="e_colour">{PHI_COLOURS[phi]}</data></edge>\n')
    fh.write("  </graph>\n</graphml>\n")


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_dot(net: DiffNetwork, fh) -> None:
    fh.write("graph diffnet {\n")
    for node, phi, pt, deg in zip(*_node_arrays(net)):
        fh.write(f"  {_dot_id(str(node))} [assigned_phi={_dot_id(str(phi))}, "
                 f"assigned_phi_tilde={_dot_id(str(pt))}, degree={int(deg)}, "
                 f"color={PHI_COLOURS[str(phi)]}];\n")
    links = net.links
    node_ids = [_dot_id(str(n)) for n in links.nodes]
    pt_text = [_dot_id(str(x)) for x in links.phi_tilde_labels]
    rows = zip(links.pair_a.tolist(), links.pair_b.tolist(), links.phi.tolist(),
               links.phi_tilde_code.tolist(), map(repr, net.scores.score_ratio.tolist()))
    for a, b, phi, pt, r in rows:
        fh.write(f'  {node_ids[a]} -- {node_ids[b]} [phi="{phi}", '
                 f"phi_tilde={pt_text[pt]}, score_ratio={r}, penwidth={r}, "
                 f"color={PHI_COLOURS[phi]}];\n")
    fh.write("}\n")


def graph_document(net: DiffNetwork) -> dict:
    links, s = net.links, net.scores
    a, b, phi, pt, ratio = _edge_arrays(net)
    grp = links.group
    edges = [
        {"source": str(a[i]), "target": str(b[i]), "phi": str(phi[i]), "phi_tilde": str(pt[i]),
         "group": str(grp[i]), "rho": links.rho[i].tolist(), "rho_tilde": links.rho_tilde[i].tolist(),
         "delta": float(s.delta[i]), "delta_star": float(s.delta_star[i]),
         "delta_phi_tilde": float(s.delta_phi_tilde[i]), "delta_rho_tilde": float(s.delta_rho_tilde[i]),
         "score_ratio": float(ratio[i]), "width": float(ratio[i]), "colour": PHI_COLOURS[str(phi[i])]}
        for i in range(len(links))
    ]
    nodes = [
        {"id": str(node), "assigned_phi": str(p), "assigned_phi_tilde": str(q), "degree": int(d),
         "colour": PHI_COLOURS[str(p)]}
        for node, p, q, d in zip(*_node_arrays(net))
    ]
    return {"networks": list(net.names), "parameters": net.parameters, "tallies": net.tallies(),
            "nodes": nodes, "links": edges}


def export_graph(net: DiffNetwork, path: str | Path, format: str = "graphml") -> Path:
    if format not in GRAPH_FORMATS:
        raise ValueError(f"unknown graph format {format!r}; choose from {GRAPH_FORMATS}")
    path = Path(path)
    if format == "json":
        return write_json(graph_document(net), path, compact=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        (_write_graphml if format == "graphml" else _write_dot)(net, fh)
    return path


def export_all(net: DiffNetwork, out_dir: str | Path, formats: Sequence[str] = ("graphml",),
               threads: int = 1) -> dict[str, Path]:
    """Write links.tsv, nodes.tsv, summary.json and one graph file per format."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = {
        "links": lambda: export_links_tsv(net, out / "links.tsv"),
        "nodes": lambda: export_nodes_tsv(net, out / "nodes.tsv"),
        "summary": lambda: write_json(summary(net), out / "summary.json"),
    }
    for fmt in formats:
        jobs[fmt] = (lambda f=fmt: export_graph(net, out / f"network.{f}", f))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {k: pool.submit(fn) for k, fn in jobs.items()}
            return {k: f.result() for k, f in futures.items()}
    return {k: fn() for k, fn in jobs.items()}
