"""Link scores: category-penalised distance, min-max normalisation, internal score, ratio.

For a weight vector ``rho`` with categorical image ``rt``:

``delta``            sqrt(sum(rho**2) / sum(|rt|)), the distance to the origin
                     penalised by the number of present coordinates.
``delta_star``       ``delta`` min-max normalised over all links.
``delta_phi_tilde``  ``delta`` min-max normalised within the link's sub-category
                     (equal to ``delta_star`` in ``all_links`` mode).
``delta_rho_tilde``  ``||rho - rt|| / sqrt(W)`` min-max normalised over all links
                     and floored at ``floor``; larger means worse clustered.
``score_ratio``      ``delta_phi_tilde / delta_rho_tilde``.

A constant list normalises to all ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from .classify import ClassifiedLinks

DEFAULT_FLOOR = 1e-6
DEFAULT_RATIO_CUTOFF = 1.0


class NormalizationMode(str, Enum):
    ALL_LINKS = "all_links"
    PER_PHI_TILDE = "per_phi_tilde"

    @classmethod
    def parse(cls, value: "str | NormalizationMode") -> "NormalizationMode":
        if isinstance(value, cls):
            return value
        aliases = {"all": cls.ALL_LINKS, "all_links": cls.ALL_LINKS,
                   "group": cls.PER_PHI_TILDE, "per_phi_tilde": cls.PER_PHI_TILDE}
        try:
            return aliases[str(value)]
        except KeyError:
            raise ValueError(f"unknown normalization mode {value!r}") from None


def raw_distance(rho, rho_tilde) -> float:
    rho = np.asarray(rho, dtype=np.float64)
    present = np.abs(np.asarray(rho_tilde)).sum()
    if present == 0:
        raise ValueError("raw distance undefined for an all-zero categorical vector")
    return float(np.sqrt(np.dot(rho, rho) / present))


def raw_distances(rho: np.ndarray, rho_tilde: np.ndarray) -> np.ndarray:
    present = np.abs(rho_tilde).sum(axis=1)
    if (present == 0).any():
        raise ValueError("raw distance undefined for an all-zero categorical vector")
    return np.sqrt(np.einsum("ij,ij->i", rho, rho) / present)


def minmax_normalize(values) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot normalise an empty list")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.ones_like(x)
    return (x - lo) / (hi - lo)


def grouped_minmax(values: np.ndarray, groups: np.ndarray, n_groups: int | None = None) -> np.ndarray:
    """Min-max normalise ``values`` independently within each group code."""
    if n_groups is None:
        n_groups = int(groups.max()) + 1 if groups.size else 0
    lo = np.full(n_groups, np.inf)
    hi = np.full(n_groups, -np.inf)
    np.minimum.at(lo, groups, values)
    np.maximum.at(hi, groups, values)
    span = (hi - lo)[groups]
    out = np.ones_like(values, dtype=np.float64)
    ok = span > 0
    out[ok] = (values[ok] - lo[groups][ok]) / span[ok]
    return out


def internal_score(rho, rho_tilde) -> float:
    """Distance from ``rho`` to its ideal corner ``rho_tilde``, scaled by ``1/sqrt(W)``."""
    rho = np.asarray(rho, dtype=np.float64)
    rt = np.asarray(rho_tilde, dtype=np.float64)
    if not rt.any():
        raise ValueError("internal score undefined for an all-zero categorical vector")
    return float(np.linalg.norm(rho - rt) / np.sqrt(rho.size))


def internal_scores(rho: np.ndarray, rho_tilde: np.ndarray) -> np.ndarray:
    diff = rho - rho_tilde
    return np.sqrt(np.einsum("ij,ij->i", diff, diff)) / np.sqrt(rho.shape[1])


@dataclass
class LinkScores:
    delta: np.ndarray
    delta_star: np.ndarray
    delta_phi_tilde: np.ndarray
    internal: np.ndarray
    delta_rho_tilde: np.ndarray
    score_ratio: np.ndarray

    def __len__(self) -> int:
        return len(self.delta)

    def subset(self, mask: np.ndarray) -> "LinkScores":
        return LinkScores(*(getattr(self, f)[mask] for f in self.__dataclass_fields__))


def score_all(
    links: ClassifiedLinks,
    mode: NormalizationMode | str = NormalizationMode.PER_PHI_TILDE,
    floor: float = DEFAULT_FLOOR,
) -> LinkScores:
    mode = NormalizationMode.parse(mode)
    if len(links) == 0:
        empty = np.array([], dtype=np.float64)
        return LinkScores(empty, empty, empty, empty, empty, empty)
    rt = links.rho_tilde.astype(np.float64)
    delta = raw_distances(links.rho, rt)
    delta_star = minmax_normalize(delta)
    if mode is NormalizationMode.ALL_LINKS:
        delta_pt = delta_star.copy()
    else:
        delta_pt = grouped_minmax(delta, links.phi_tilde_code, len(links.phi_tilde_labels))
    internal = internal_scores(links.rho, rt)
    delta_rt = np.maximum(minmax_normalize(internal), floor)
    return LinkScores(delta, delta_star, delta_pt, internal, delta_rt, delta_pt / delta_rt)


def filter_by_ratio(scores: LinkScores, cutoff: float = DEFAULT_RATIO_CUTOFF) -> np.ndarray:
    """Boolean mask of links with ``score_ratio >= cutoff``."""
    if cutoff < 0:
        raise ValueError(f"ratio cutoff must be >= 0, got {cutoff}")
    return scores.score_ratio >= cutoff


def group_effect(delta: np.ndarray, groups: np.ndarray) -> dict[str, float | int | None]:
    """One-way ANOVA of ``delta`` on group codes, as a diagnostic for the summary."""
    n = delta.size
    if n == 0:
        return {"f_statistic": None, "p_value": None, "df_between": 0, "df_within": 0}
    present, g = np.unique(groups, return_inverse=True)
    k = len(present)
    counts = np.bincount(g, minlength=k).astype(np.float64)
    sums = np.bincount(g, weights=delta, minlength=k)
    means = sums / counts
    grand = delta.mean()
    ss_between = float(np.dot(counts, (means - grand) ** 2))
    ss_within = float(((delta - means[g]) ** 2).sum())
    df_b, df_w = k - 1, n - k
    if df_b < 1 or df_w < 1 or ss_within == 0.0:
        return {"f_statistic": None, "p_value": None, "df_between": df_b, "df_within": df_w}
    f = (ss_between / df_b) / (ss_within / df_w)
    return {"f_statistic": f, "p_value": float(stats.f.sf(f, df_b, df_w)),
            "df_between": df_b, "df_within": df_w}
