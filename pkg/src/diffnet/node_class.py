"""Node categories from a chi-square goodness-of-fit test on incident-link tallies.

For each node the incident links are tallied per class and per sub-category.
The tallies are tested against the global category frequencies of the
filtered network; when the fit is rejected at ``alpha`` and the largest tally
is unique, that category is assigned, otherwise the node is ``UNDEFINED``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .classify import PHI_CLASSES

UNDEFINED = "Undefined"
DEFAULT_ALPHA = 0.05
LOW_EVIDENCE_DEGREE = 5


def chi2_gof(observed: Sequence[float], expected_proportions: Sequence[float]) -> tuple[float, float]:
    """Pearson statistic and upper-tail p-value with ``len(observed) - 1`` dof."""
    obs = np.asarray(observed, dtype=np.float64)
    p = np.asarray(expected_proportions, dtype=np.float64)
    if obs.shape != p.shape or obs.ndim != 1:
        raise ValueError("observed and expected proportions must be 1-d and equal length")
    n = obs.sum()
    if n < 1:
        raise ValueError("observed counts must sum to at least 1")
    if not np.isclose(p.sum(), 1.0, rtol=0, atol=1e-9):
        raise ValueError(f"expected proportions sum to {p.sum()}, not 1")
    if (p < 0).any():
        raise ValueError("expected proportions must be non-negative")
    zero = p == 0
    if (obs[zero] > 0).any():
        raise ValueError("nonzero observation in a category with zero expected proportion")
    obs, p = obs[~zero], p[~zero]
    if obs.size < 2:
        return 0.0, 1.0
    exp = n * p
    stat = float(((obs - exp) ** 2 / exp).sum())
    return stat, float(special.chdtrc(obs.size - 1, stat))


@dataclass
class NodeClassification:
    node: str
    degree: int
    phi_counts: dict[str, int]
    phi_tilde_counts: dict[str, int]
    chi2_phi: float
    p_phi: float
    chi2_phi_tilde: float
    p_phi_tilde: float
    assigned_phi: str
    assigned_phi_tilde: str

    @property
    def low_evidence(self) -> bool:
        return self.degree < LOW_EVIDENCE_DEGREE


@dataclass
class _Test:
    stat: np.ndarray
    p: np.ndarray
    assigned: np.ndarray
    nz_node: np.ndarray
    nz_cat: np.ndarray
    nz_count: np.ndarray


def _tally_test(node_ids: np.ndarray, cats: np.ndarray, n_nodes: int, n_cats: int, alpha: float) -> _Test:
    """Sparse per-node chi-square test; ``node_ids``/``cats`` hold one entry per link end."""
    global_counts = np.bincount(cats, minlength=n_cats).astype(np.float64)
    total = global_counts.sum()
    prop = global_counts / total
    k_eff = int((global_counts > 0).sum())

    key = node_ids.astype(np.int64) * n_cats + cats
    uniq, counts = np.unique(key, return_counts=True)
    nz_node, nz_cat = uniq // n_cats, uniq % n_cats
    counts = counts.astype(np.float64)
    degree = np.bincount(nz_node, weights=counts, minlength=n_nodes)

    # sum over categories of (O-E)^2/E, split into observed and unobserved cells
    e = degree[nz_node] * prop[nz_cat]
    observed_part = np.bincount(nz_node, weights=(counts - e) ** 2 / e, minlength=n_nodes)
    covered = np.bincount(nz_node, weights=prop[nz_cat], minlength=n_nodes)
    stat = observed_part + degree * np.clip(1.0 - covered, 0.0, None)
    stat = np.where(degree > 0, np.maximum(stat, 0.0), 0.0)

    row_max = np.zeros(n_nodes)
    np.maximum.at(row_max, nz_node, counts)
    at_max = counts == row_max[nz_node]
    n_at_max = np.bincount(nz_node, weights=at_max.astype(np.float64), minlength=n_nodes)
    first_max = np.full(n_nodes, -1, dtype=np.int64)
    max_rows = np.flatnonzero(at_max)
    holders, first = np.unique(nz_node[max_rows], return_index=True)
    first_max[holders] = nz_cat[max_rows[first]]

    if k_eff < 2:
        p = np.ones(n_nodes)
        assigned = np.where(degree > 0, first_max, -1)
    else:
        p = special.chdtrc(k_eff - 1, stat)
        reject = p < alpha
        assigned = np.where(reject & (n_at_max == 1) & (degree > 0), first_max, -1)
    return _Test(stat, p, assigned, nz_node, nz_cat, counts)


def classify_nodes_arrays(
    nodes: np.ndarray,
    pair_a: np.ndarray,
    pair_b: np.ndarray,
    phi: np.ndarray,
    phi_tilde_code: np.ndarray,
    phi_tilde_labels: Sequence[str],
    alpha: float = DEFAULT_ALPHA,
) -> dict[str, np.ndarray]:
    """Column-oriented node classification over the links given (one row per link).

    Returns arrays aligned with the sorted set of incident nodes.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    incident = np.unique(np.concatenate([pair_a, pair_b]))
    remap = np.full(len(nodes), -1, dtype=np.int64)
    remap[incident] = np.arange(len(incident))
    ends = np.concatenate([remap[pair_a], remap[pair_b]])
    n = len(incident)

    phi_index = {c: i for i, c in enumerate(PHI_CLASSES)}
    phi_code = np.zeros(len(phi), dtype=np.int64)
    for c, i in phi_index.items():
        phi_code[phi == c] = i
    t_phi = _tally_test(ends, np.concatenate([phi_code, phi_code]), n, len(PHI_CLASSES), alpha)
    pt = np.asarray(phi_tilde_code, dtype=np.int64)
    t_pt = _tally_test(ends, np.concatenate([pt, pt]), n, len(phi_tilde_labels), alpha)

    phi_labels = np.array([*PHI_CLASSES, UNDEFINED], dtype=object)
    pt_labels = np.array([*phi_tilde_labels, UNDEFINED], dtype=object)
    degree = np.bincount(ends, minlength=n)
    return {
        "node": nodes[incident],
        "degree": degree,
        "chi2_phi": t_phi.stat,
        "p_phi": t_phi.p,
        "assigned_phi": phi_labels[t_phi.assigned],
        "chi2_phi_tilde": t_pt.stat,
        "p_phi_tilde": t_pt.p,
        "assigned_phi_tilde": pt_labels[t_pt.assigned],
        "_phi_counts": (t_phi.nz_node, t_phi.nz_cat, t_phi.nz_count),
        "_phi_tilde_counts": (t_pt.nz_node, t_pt.nz_cat, t_pt.nz_count),
    }


def to_records(table: dict[str, np.ndarray], phi_tilde_labels: Sequence[str]) -> list[NodeClassification]:
    n = len(table["node"])
    phi_counts: list[dict[str, int]] = [{c: 0 for c in PHI_CLASSES} for _ in range(n)]
    for i, c, k in zip(*table["_phi_counts"]):
        phi_counts[int(i)][PHI_CLASSES[int(c)]] = int(k)
    pt_counts: list[dict[str, int]] = [{} for _ in range(n)]
    for i, c, k in zip(*table["_phi_tilde_counts"]):
        pt_counts[int(i)][phi_tilde_labels[int(c)]] = int(k)
    return [
        NodeClassification(
            node=str(table["node"][i]),
            degree=int(table["degree"][i]),
            phi_counts=phi_counts[i],
            phi_tilde_counts=pt_counts[i],
            chi2_phi=float(table["chi2_phi"][i]),
            p_phi=float(table["p_phi"][i]),
            chi2_phi_tilde=float(table["chi2_phi_tilde"][i]),
            p_phi_tilde=float(table["p_phi_tilde"][i]),
            assigned_phi=str(table["assigned_phi"][i]),
            assigned_phi_tilde=str(table["assigned_phi_tilde"][i]),
        )
        for i in range(n)
    ]


def classify_nodes(links, alpha: float = DEFAULT_ALPHA) -> list[NodeClassification]:
    """Classify every node incident to ``links`` (a :class:`ClassifiedLinks`)."""
    if len(links) == 0:
        return []
    table = classify_nodes_arrays(links.nodes, links.pair_a, links.pair_b, links.phi,
                                  links.phi_tilde_code, links.phi_tilde_labels, alpha)
    return to_records(table, links.phi_tilde_labels)
