"""Annotation over-representation per node category.

For each annotation and each node category, a 2x2 table of annotation
membership against category membership is tested twice, with a two-sided
exact Fisher test and a continuity-corrected two-sample proportion test.
The two p-values are combined with Fisher's method into a single ``weight``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .node_class import NodeClassification

log = logging.getLogger(__name__)

DEFAULT_WEIGHT_CUTOFF = 0.10
_TINY = np.finfo(np.float64).tiny
# relative slack when collecting tables "as or more extreme" than the observed one
_FISHER_RTOL = 1e-7


@dataclass(frozen=True)
class AnnotationSet:
    name: str
    members: frozenset[str]


@dataclass
class EnrichmentResult:
    annotation: str
    category: str
    category_size: int
    expected: int
    observed: int
    p_fisher: float
    p_prop: float
    weight: float
    significant: bool


def _log_choose(n, k):
    return special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)


def fisher_exact_2x2(a: int, b: int, c: int, d: int) -> float:
    """Two-sided exact p-value for the table ``[[a, b], [c, d]]``.

    Sums the hypergeometric probabilities of every table with the same margins
    that is no more probable than the observed one.
    """
    a, b, c, d = (int(x) for x in (a, b, c, d))
    if min(a, b, c, d) < 0:
        raise ValueError("counts must be non-negative")
    n = a + b + c + d
    if n < 1:
        raise ValueError("table total must be at least 1")
    row1, col1 = a + b, a + c
    lo, hi = max(0, col1 - (c + d)), min(row1, col1)
    if lo == hi:
        return 1.0
    x = np.arange(lo, hi + 1, dtype=np.float64)
    logp = _log_choose(col1, x) + _log_choose(n - col1, row1 - x) - _log_choose(n, row1)
    observed = logp[a - lo]
    extreme = logp <= observed + math.log1p(_FISHER_RTOL)
    top = logp.max()
    p = np.exp(logp[extreme] - top).sum() / np.exp(logp - top).sum()
    return float(min(1.0, p))


def proportion_test(x1: int, n1: int, x2: int, n2: int) -> float:
    """Two-sample proportion chi-square test with Yates' continuity correction."""
    if n1 < 1 or n2 < 1:
        raise ValueError("both sample sizes must be at least 1")
    if not (0 <= x1 <= n1 and 0 <= x2 <= n2):
        raise ValueError("successes must lie between 0 and the sample size")
    total = n1 + n2
    pooled = (x1 + x2) / total
    if pooled == 0.0 or pooled == 1.0:
        return 1.0
    obs = np.array([[x1, n1 - x1], [x2, n2 - x2]], dtype=np.float64)
    exp = np.outer([n1, n2], [x1 + x2, total - x1 - x2]) / total
    dev = np.abs(obs - exp)
    dev = dev - np.minimum(0.5, dev)
    stat = float((dev ** 2 / exp).sum())
    return float(special.chdtrc(1, stat))


def fisher_combine(p1: float, p2: float) -> float:
    """Fisher's method for two p-values: upper tail of chi-square(4) at -2 ln(p1 p2)."""
    for p in (p1, p2):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-values must lie in [0, 1], got {p}")
    half = -(math.log(max(p1, _TINY)) + math.log(max(p2, _TINY)))
    # chi-square(4) survival at 2*half is exp(-half) * (1 + half)
    return float(min(1.0, math.exp(-half) * (1.0 + half)))


def restrict(annotations: Iterable[AnnotationSet], universe: Iterable[str]) -> list[AnnotationSet]:
    universe = set(universe)
    return [AnnotationSet(a.name, frozenset(a.members & universe)) for a in annotations]


def enrich(
    classified_nodes: Sequence[NodeClassification],
    annotations: Sequence[AnnotationSet],
    weight_cutoff: float = DEFAULT_WEIGHT_CUTOFF,
    level: str = "phi_tilde",
) -> list[EnrichmentResult]:
    """Test every (annotation, category) pair with at least one annotated node.

    ``level`` selects the node label used as category: ``"phi_tilde"`` or
    ``"phi"``. Undefined nodes form a category of their own. ``expected`` is
    the annotation's size within the classified nodes.
    """
    if not classified_nodes:
        raise ValueError("no classified nodes")
    if level not in ("phi", "phi_tilde"):
        raise ValueError(f"unknown category level {level!r}")
    attr = "assigned_phi_tilde" if level == "phi_tilde" else "assigned_phi"
    category_of = {n.node: getattr(n, attr) for n in classified_nodes}
    members_of: dict[str, set[str]] = {}
    for node, cat in category_of.items():
        members_of.setdefault(cat, set()).add(node)
    universe_size = len(category_of)

    results = []
    for ann in restrict(annotations, category_of):
        if not ann.members:
            log.warning("annotation %r shares no nodes with the network; skipped", ann.name)
            continue
        size = len(ann.members)
        for cat in sorted(members_of):
            inside = members_of[cat]
            a = len(ann.members & inside)
            if a == 0:
                continue
            b = len(inside) - a
            c = size - a
            d = universe_size - a - b - c
            p_f = fisher_exact_2x2(a, b, c, d)
            p_p = proportion_test(a, len(inside), c, c + d) if c + d > 0 else 1.0
            w = fisher_combine(p_f, p_p)
            results.append(EnrichmentResult(ann.name, cat, len(inside), size, a, p_f, p_p, w,
                                            w <= weight_cutoff))
    return results


def read_annotations(path: str | Path, delimiter: str = "\t") -> list[AnnotationSet]:
    """Read ``annotation_name node_id`` rows; ``#`` lines and blank lines are ignored."""
    groups: dict[str, set[str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not row or not "".join(row).strip() or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: row {lineno}: expected 2 columns, found {len(row)}")
            name, node = row[0].strip(), row[1].strip()
            groups.setdefault(name, set()).add(node)
    return [AnnotationSet(name, frozenset(m)) for name, m in groups.items()]


def write_enrichment(results: Sequence[EnrichmentResult], path: str | Path) -> None:
    cols = ["annotation", "category", "category_size", "expected", "observed",
            "p_fisher", "p_prop", "weight", "significant"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(cols) + "\n")
        for r in results:
            fh.write("\t".join([
                r.annotation, r.category, str(r.category_size), str(r.expected), str(r.observed),
                f"{r.p_fisher:.6g}", f"{r.p_prop:.6g}", f"{r.weight:.6g}", str(r.significant).lower(),
            ]) + "\n")
