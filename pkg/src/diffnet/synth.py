"""Synthetic multi-network instances with planted link classes and hub nodes.

Each planted link gets a target sign pattern consistent with its requested
sub-category label; present coordinates draw a magnitude from
``magnitude_range`` and absent ones are 0, then Gaussian noise is added and
the result clipped to [-1, 1]. Every link is emitted in every network (absent
coordinates as near-zero rows) so no node is lost to the intersection step.
Hubs are nodes whose links all carry one label.
"""

from __future__ import annotations

import configparser
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Mapping

import numpy as np

from . import classify as cl
from .graph_io import EdgeList, NetworkSet, build_network_set, write_edge_list

NO_LABEL = "-"


def default_names(w: int) -> list[str]:
    if w <= 26:
        return [chr(ord("A") + k) for k in range(w)]
    return [f"net{k + 1}" for k in range(w)]


@dataclass
class PlantedSpec:
    n_nodes: int
    w_networks: int
    links_per_class: dict[str, int]
    magnitude_range: tuple[float, float] = (0.6, 0.9)
    noise_sd: float = 0.0
    seed: int = 0
    hubs_per_class: int = 0
    hub_degree: int = 0
    names: list[str] | None = None
    tau: float = cl.DEFAULT_TAU

    def network_names(self) -> list[str]:
        return list(self.names) if self.names else default_names(self.w_networks)

    def validate(self) -> "PlantedSpec":
        if self.w_networks < 2:
            raise ValueError("at least two networks are required")
        if len(self.network_names()) != self.w_networks:
            raise ValueError("number of names differs from w_networks")
        lo, hi = self.magnitude_range
        if not (self.tau < lo <= hi <= 1.0):
            raise ValueError(f"magnitude range {self.magnitude_range} must lie inside (tau, 1]")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        patterns = label_patterns(self.network_names())
        for label, count in self.links_per_class.items():
            if label not in patterns:
                raise ValueError(f"label {label!r} is not a valid sub-category for {self.network_names()}")
            if count < 0:
                raise ValueError(f"negative link count for {label!r}")
        total = sum(self.links_per_class.values())
        if total > self.n_nodes * (self.n_nodes - 1) // 2:
            raise ValueError(f"{total} links do not fit on {self.n_nodes} nodes")
        n_hubs = self.hubs_per_class * len(self.links_per_class)
        if n_hubs > self.n_nodes:
            raise ValueError("more hubs than nodes")
        if self.hubs_per_class and self.hub_degree * self.hubs_per_class > min(self.links_per_class.values()):
            raise ValueError("hub links exceed the planted links of some class")
        if self.hub_degree >= self.n_nodes:
            raise ValueError("hub degree must be below n_nodes")
        return self


@dataclass
class GroundTruth:
    names: list[str]
    links: dict[tuple[str, str], str]
    hubs: dict[str, str] = field(default_factory=dict)


def label_patterns(names: list[str]) -> dict[str, list[tuple[int, ...]]]:
    """Every nonzero sign pattern grouped by its sub-category label."""
    out: dict[str, list[tuple[int, ...]]] = {}
    for pattern in product((-1, 0, 1), repeat=len(names)):
        if any(pattern):
            out.setdefault(cl.classify_link(pattern, names)[1], []).append(pattern)
    return out


def _node_names(n: int) -> np.ndarray:
    width = len(str(n - 1))
    return np.array([f"n{i:0{width}d}" for i in range(n)], dtype=object)


def _sample_pairs(rng, pool: np.ndarray, n_nodes: int, n_pairs: int, taken: set[int],
                  hub: int | None = None) -> np.ndarray:
    """Distinct unordered pair keys ``lo * n_nodes + hi`` with endpoints from ``pool``.

    With ``hub`` set, every pair joins ``hub`` to a node of ``pool``. New keys
    are added to ``taken``.
    """
    chosen: list[int] = []
    while len(chosen) < n_pairs:
        draw = int((n_pairs - len(chosen)) * 1.1) + 16
        b = pool[rng.integers(0, len(pool), size=draw)]
        a = np.full(draw, hub) if hub is not None else pool[rng.integers(0, len(pool), size=draw)]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = lo.astype(np.int64) * n_nodes + hi
        for key, ok in zip(keys.tolist(), (lo != hi).tolist()):
            if ok and key not in taken:
                taken.add(key)
                chosen.append(key)
                if len(chosen) == n_pairs:
                    break
    return np.array(chosen, dtype=np.int64)


def generate(spec: PlantedSpec) -> tuple[NetworkSet, GroundTruth]:
    """Draw a planted instance; the result is fully determined by ``spec.seed``."""
    lists, truth = generate_edge_lists(spec)
    return build_network_set(lists), truth


def generate_edge_lists(spec: PlantedSpec) -> tuple[list[EdgeList], GroundTruth]:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    names = spec.network_names()
    w = len(names)
    node_names = _node_names(spec.n_nodes)
    patterns = label_patterns(names)
    labels = list(spec.links_per_class)

    n_hubs = spec.hubs_per_class * len(labels)
    hub_ids = rng.permutation(spec.n_nodes)[:n_hubs]
    is_hub = np.zeros(spec.n_nodes, dtype=bool)
    is_hub[hub_ids] = True
    # hubs only ever link to non-hubs, so their tallies stay pure
    pool = np.flatnonzero(~is_hub)
    if n_hubs and spec.hub_degree > len(pool):
        raise ValueError("hub degree exceeds the number of non-hub nodes")

    taken: set[int] = set()
    hubs: dict[str, str] = {}
    keys_parts, label_parts = [], []
    for li, label in enumerate(labels):
        count = spec.links_per_class[label]
        for h in range(spec.hubs_per_class):
            hub = int(hub_ids[li * spec.hubs_per_class + h])
            hubs[str(node_names[hub])] = label
            keys_parts.append(_sample_pairs(rng, pool, spec.n_nodes, spec.hub_degree, taken, hub))
            label_parts.append(np.full(spec.hub_degree, li, dtype=np.int64))
        rest = count - spec.hubs_per_class * spec.hub_degree
        keys_parts.append(_sample_pairs(rng, pool, spec.n_nodes, rest, taken))
        label_parts.append(np.full(rest, li, dtype=np.int64))

    keys = np.concatenate(keys_parts) if keys_parts else np.array([], dtype=np.int64)
    lab = np.concatenate(label_parts) if label_parts else np.array([], dtype=np.int64)
    n_links = len(keys)

    signs = np.zeros((n_links, w), dtype=np.int8)
    for li, label in enumerate(labels):
        rows = np.flatnonzero(lab == li)
        options = np.array(patterns[label], dtype=np.int8)
        signs[rows] = options[rng.integers(0, len(options), size=len(rows))]
    lo, hi = spec.magnitude_range
    weights = signs * rng.uniform(lo, hi, size=(n_links, w))
    if spec.noise_sd > 0:
        weights = weights + rng.normal(0.0, spec.noise_sd, size=(n_links, w))
    np.clip(weights, -1.0, 1.0, out=weights)

    a_idx, b_idx = keys // spec.n_nodes, keys % spec.n_nodes
    order = np.lexsort((b_idx, a_idx))
    a_names, b_names = node_names[a_idx[order]], node_names[b_idx[order]]
    weights, lab = weights[order], lab[order]
    lists = [EdgeList(names[k], a_names, b_names, weights[:, k].copy()) for k in range(w)]
    truth = GroundTruth(
        names=names,
        links={(str(x), str(y)): labels[int(i)] for x, y, i in zip(a_names, b_names, lab)},
        hubs=hubs,
    )
    return lists, truth


@dataclass
class RecoveryReport:
    accuracy: float
    precision: dict[str, float]
    recall: dict[str, float]
    confusion: dict[str, dict[str, int]]
    node_accuracy: float | None
    n_links: int
    n_hubs: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy, "precision": self.precision, "recall": self.recall,
            "confusion": self.confusion, "node_accuracy": self.node_accuracy,
            "n_links": self.n_links, "n_hubs": self.n_hubs,
        }


def evaluate(
    predicted: Mapping[tuple[str, str], str],
    truth: GroundTruth,
    node_labels: Mapping[str, str] | None = None,
) -> RecoveryReport:
    """Confusion-matrix metrics of predicted link labels against planted ones.

    ``predicted`` maps canonical pairs to sub-category labels; planted links
    that are missing count as predicted :data:`NO_LABEL`. A predicted link that
    was never planted is an error.
    """
    extra = [p for p in predicted if p not in truth.links]
    if extra:
        raise ValueError(f"{len(extra)} predicted links are not in the planted universe, e.g. {extra[0]}")
    pairs = Counter((t, predicted.get(pair, NO_LABEL)) for pair, t in truth.links.items())
    classes = sorted({t for t, _ in pairs} | {p for _, p in pairs})
    confusion = {t: {p: 0 for p in classes} for t in classes}
    for (t, p), k in pairs.items():
        confusion[t][p] = k
    precision, recall = {}, {}
    for c in sorted(set(truth.links.values())):
        tp = confusion[c][c]
        pred_c = sum(confusion[t][c] for t in classes)
        true_c = sum(confusion[c].values())
        precision[c] = tp / pred_c if pred_c else 0.0
        recall[c] = tp / true_c if true_c else 0.0
    n = len(truth.links)
    correct = sum(k for (t, p), k in pairs.items() if t == p)
    node_acc = None
    if truth.hubs:
        node_labels = node_labels or {}
        node_acc = sum(node_labels.get(h) == lab for h, lab in truth.hubs.items()) / len(truth.hubs)
    return RecoveryReport(correct / n if n else 0.0, precision, recall, confusion, node_acc, n, len(truth.hubs))


def predicted_labels(links: cl.ClassifiedLinks) -> dict[tuple[str, str], str]:
    a, b = links.nodes[links.pair_a], links.nodes[links.pair_b]
    return {(str(x), str(y)): str(lab) for x, y, lab in zip(a, b, links.phi_tilde)}


def read_spec(path: str | Path) -> PlantedSpec:
    """Parse an INI-style spec: ``[planted]`` settings and a ``[links]`` label = count table.

    Example::

        [planted]
        n_nodes = 1000
        w_networks = 3
        magnitude_range = 0.6, 0.9
        noise_sd = 0.05
        seed = 7
        hubs_per_class = 2
        hub_degree = 40

        [links]
        a = 500
        g.B = 500
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not cp.read(path, encoding="utf-8"):
        raise FileNotFoundError(f"spec file not found: {path}")
    if "planted" not in cp or "links" not in cp:
        raise ValueError(f"{path}: needs [planted] and [links] sections")
    p = cp["planted"]
    names = [s.strip() for s in p.get("names", "").split(",") if s.strip()] or None
    lo, hi = (float(x) for x in p.get("magnitude_range", "0.6, 0.9").split(","))
    return PlantedSpec(
        n_nodes=p.getint("n_nodes"),
        w_networks=p.getint("w_networks"),
        links_per_class={k: int(v) for k, v in cp["links"].items()},
        magnitude_range=(lo, hi),
        noise_sd=p.getfloat("noise_sd", 0.0),
        seed=p.getint("seed", 0),
        hubs_per_class=p.getint("hubs_per_class", 0),
        hub_degree=p.getint("hub_degree", 0),
        names=names,
        tau=p.getfloat("tau", cl.DEFAULT_TAU),
    ).validate()


def write_instance(lists: list[EdgeList], out_dir: str | Path) -> list[tuple[str, Path]]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for e in lists:
        path = out / f"{e.name}.tsv"
        write_edge_list(e, path)
        paths.append((e.name, path))
    return paths
