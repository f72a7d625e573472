"""End-to-end differential network construction.

ingest -> categorize/classify -> score -> ratio filter -> node classification.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import classify as cl
from . import node_class as nc
from . import scoring as sc
from .graph_io import NetworkSet, load_network_set
from .enrichment import DEFAULT_WEIGHT_CUTOFF


@dataclass
class RunConfig:
    tau: float = cl.DEFAULT_TAU
    stretch: bool = False
    mode: str = sc.NormalizationMode.PER_PHI_TILDE.value
    ratio_cutoff: float = sc.DEFAULT_RATIO_CUTOFF
    alpha: float = nc.DEFAULT_ALPHA
    floor: float = sc.DEFAULT_FLOOR
    weight_cutoff: float = DEFAULT_WEIGHT_CUTOFF
    delimiter: str = "\t"
    threads: int = 1

    def validate(self) -> "RunConfig":
        cl.check_tau(self.tau)
        self.mode = sc.NormalizationMode.parse(self.mode).value
        if self.ratio_cutoff < 0:
            raise ValueError(f"ratio cutoff must be >= 0, got {self.ratio_cutoff}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 < self.floor <= 1.0:
            raise ValueError(f"floor must lie in (0, 1], got {self.floor}")
        if not 0.0 <= self.weight_cutoff <= 1.0:
            raise ValueError(f"weight cutoff must lie in [0, 1], got {self.weight_cutoff}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        return self

    def parameters(self) -> dict:
        p = asdict(self)
        p.pop("threads")
        p.pop("delimiter")
        return p


@dataclass
class DiffNetwork:
    """The filtered differential network plus everything needed to report on it.

    ``links``/``scores`` hold the retained links only. ``classified`` and
    ``all_scores`` keep the pre-filter view when the network was built here
    (they are ``None`` for networks reloaded from a TSV export).
    """

    names: list[str]
    links: cl.ClassifiedLinks
    scores: sc.LinkScores
    nodes: dict[str, np.ndarray]
    parameters: dict
    ingestion: dict = field(default_factory=dict)
    group_effect: dict = field(default_factory=dict)
    classified: cl.ClassifiedLinks | None = None
    all_scores: sc.LinkScores | None = None

    def node_records(self) -> list[nc.NodeClassification]:
        if not len(self.nodes.get("node", ())):
            return []
        return nc.to_records(self.nodes, self.links.phi_tilde_labels)

    def tallies(self) -> dict:
        pt = self.links.phi_tilde
        grp = self.links.group
        link_pt = {lab: int(k) for lab, k in zip(*np.unique(pt, return_counts=True))} if len(pt) else {}
        link_grp = {lab: int(k) for lab, k in zip(*np.unique(grp, return_counts=True))} if len(grp) else {}
        node_phi = {c: 0 for c in (*cl.PHI_CLASSES, nc.UNDEFINED)}
        node_pt: dict[str, int] = {}
        if len(self.nodes.get("node", ())):
            for lab, k in zip(*np.unique(self.nodes["assigned_phi"], return_counts=True)):
                node_phi[str(lab)] = int(k)
            node_pt = {str(lab): int(k) for lab, k in
                       zip(*np.unique(self.nodes["assigned_phi_tilde"], return_counts=True))}
        return {
            "links": {
                "total": len(self.links),
                "phi": self.links.tally(),
                "phi_tilde": link_pt,
                "group": link_grp,
                "group_count": len(link_grp),
            },
            "nodes": {
                "total": int(len(self.nodes.get("node", ()))),
                "phi": node_phi,
                "phi_tilde": node_pt,
                "low_evidence": int((self.nodes["degree"] < nc.LOW_EVIDENCE_DEGREE).sum())
                if len(self.nodes.get("node", ())) else 0,
            },
        }


def _empty_nodes() -> dict[str, np.ndarray]:
    e = np.array([], dtype=object)
    return {"node": e, "degree": np.array([], dtype=np.int64), "chi2_phi": np.array([]), "p_phi": np.array([]),
            "assigned_phi": e, "chi2_phi_tilde": np.array([]), "p_phi_tilde": np.array([]),
            "assigned_phi_tilde": e, "_phi_counts": (e, e, e), "_phi_tilde_counts": (e, e, e)}


def cluster_nodes(links: cl.ClassifiedLinks, alpha: float = nc.DEFAULT_ALPHA) -> dict[str, np.ndarray]:
    if len(links) == 0:
        return _empty_nodes()
    return nc.classify_nodes_arrays(links.nodes, links.pair_a, links.pair_b, links.phi,
                                    links.phi_tilde_code, links.phi_tilde_labels, alpha)


def make_diff_net(net: NetworkSet, config: RunConfig | None = None) -> DiffNetwork:
    """Classify, score, filter and node-classify an aligned :class:`NetworkSet`."""
    config = (config or RunConfig()).validate()
    classified = cl.classify_all(net, config.tau)
    scores = sc.score_all(classified, config.mode, config.floor)
    keep = sc.filter_by_ratio(scores, config.ratio_cutoff)
    links = classified.subset(keep)
    kept_scores = scores.subset(keep)
    params = config.parameters()
    params["stretch"] = bool(net.stretched or config.stretch)
    params["networks"] = list(net.names)
    return DiffNetwork(
        names=list(net.names),
        links=links,
        scores=kept_scores,
        nodes=cluster_nodes(links, config.alpha),
        parameters=params,
        ingestion={
            "dropped": net.dropped,
            "merged_links": net.n_links,
            "all_zero_removed": classified.n_removed,
            "classified_links": len(classified),
            "filtered_out": int((~keep).sum()),
            "retained_links": int(keep.sum()),
            "classified_group_count": len(np.unique(classified.group_code)),
        },
        group_effect=sc.group_effect(scores.delta, classified.phi_tilde_code),
        classified=classified,
        all_scores=scores,
    )


def run(inputs: Sequence[tuple[str, str]], config: RunConfig | None = None) -> DiffNetwork:
    """Load ``(name, path)`` edge lists and build the differential network."""
    config = (config or RunConfig()).validate()
    net = load_network_set(inputs, delimiter=config.delimiter, stretch=config.stretch,
                           threads=config.threads)
    return make_diff_net(net, config)
