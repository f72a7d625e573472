"""Categorical weight transform and link classification.

Every weight is coded as -1, 0 or +1 against a threshold ``tau``. A link's
categorical vector then decides its class:

* ``"a"`` (common): nonzero and equal sign in every network,
* ``"b"`` (different): nonzero everywhere, signs disagree,
* ``"g"`` (specific): zero in at least one network.

The sub-category label refines ``b`` with the networks whose sign differs
from the first (reference) network and ``g`` with the networks where the
link is present, e.g. ``"b.B"`` or ``"g.B.C"``. The sign-pattern ``group``
(one of at most ``3**W - 1``) is finer still and records each sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph_io import NetworkSet

ALPHA, BETA, GAMMA = "a", "b", "g"
PHI_CLASSES = (ALPHA, BETA, GAMMA)
DEFAULT_TAU = 1.0 / 3.0

_SIGN_CHARS = {-1: "-", 0: "0", 1: "+"}


def check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    return tau


def categorize_weight(rho: float, tau: float = DEFAULT_TAU) -> int:
    """-1 below ``-tau``, +1 above ``tau``, 0 otherwise (boundaries map to 0)."""
    if rho > tau:
        return 1
    if rho < -tau:
        return -1
    return 0


def categorize(weights: np.ndarray, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Vectorized :func:`categorize_weight`; returns ``int8``."""
    w = np.asarray(weights)
    out = np.zeros(w.shape, dtype=np.int8)
    out[w > tau] = 1
    out[w < -tau] = -1
    return out


def classify_link(rho_tilde: Sequence[int], names: Sequence[str]) -> tuple[str, str]:
    """Return ``(phi, phi_tilde)`` for one categorical vector."""
    rt = [int(x) for x in rho_tilde]
    if len(rt) != len(names):
        raise ValueError("categorical vector and network names differ in length")
    if len(rt) < 2:
        raise ValueError("at least two networks are required")
    if not any(rt):
        raise ValueError("all-zero categorical vector has no class; remove the link first")
    if all(rt):
        if abs(sum(rt)) == len(rt):
            return ALPHA, ALPHA
        ref = rt[0]
        differing = [n for n, s in zip(names, rt) if s != ref]
        return BETA, ".".join([BETA, *differing])
    present = [n for n, s in zip(names, rt) if s != 0]
    return GAMMA, ".".join([GAMMA, *present])


def sign_group(rho_tilde: Sequence[int]) -> str:
    """Sign-pattern label such as ``"+-0"``, one character per network."""
    return "".join(_SIGN_CHARS[int(x)] for x in rho_tilde)


@dataclass
class ClassifiedLinks:
    """Column-oriented set of kept links with their categorical vectors and labels.

    ``phi_tilde_labels[phi_tilde_code[i]]`` is link ``i``'s sub-category;
    labels are sorted so codes are stable for a given set of observed labels.
    """

    names: list[str]
    nodes: np.ndarray
    pair_a: np.ndarray
    pair_b: np.ndarray
    rho: np.ndarray
    rho_tilde: np.ndarray
    phi: np.ndarray
    phi_tilde_code: np.ndarray
    phi_tilde_labels: list[str]
    group_code: np.ndarray
    group_labels: list[str]
    tau: float
    n_removed: int = 0

    def __len__(self) -> int:
        return len(self.pair_a)

    @property
    def phi_tilde(self) -> np.ndarray:
        return np.asarray(self.phi_tilde_labels, dtype=object)[self.phi_tilde_code]

    @property
    def group(self) -> np.ndarray:
        return np.asarray(self.group_labels, dtype=object)[self.group_code]

    def tally(self) -> dict[str, int]:
        return {c: int((self.phi == c).sum()) for c in PHI_CLASSES}

    def subset(self, mask: np.ndarray) -> "ClassifiedLinks":
        return ClassifiedLinks(
            names=self.names, nodes=self.nodes,
            pair_a=self.pair_a[mask], pair_b=self.pair_b[mask],
            rho=self.rho[mask], rho_tilde=self.rho_tilde[mask], phi=self.phi[mask],
            phi_tilde_code=self.phi_tilde_code[mask], phi_tilde_labels=self.phi_tilde_labels,
            group_code=self.group_code[mask], group_labels=self.group_labels,
            tau=self.tau, n_removed=self.n_removed,
        )


def _pattern_codes(rho_tilde: np.ndarray) -> np.ndarray:
    w = rho_tilde.shape[1]
    powers = 3 ** np.arange(w, dtype=np.int64)
    return (rho_tilde.astype(np.int64) + 1) @ powers


def _decode(code: int, w: int) -> list[int]:
    out = []
    for _ in range(w):
        out.append(code % 3 - 1)
        code //= 3
    return out


def classify_weights(
    names: Sequence[str],
    nodes: np.ndarray,
    pair_a: np.ndarray,
    pair_b: np.ndarray,
    weights: np.ndarray,
    tau: float = DEFAULT_TAU,
) -> ClassifiedLinks:
    """Categorize and classify an aligned weight matrix, dropping all-zero links."""
    tau = check_tau(tau)
    names = list(names)
    rt = categorize(weights, tau)
    keep = rt.any(axis=1)
    n_removed = int((~keep).sum())
    rt = rt[keep]
    rho = weights[keep]
    pa, pb = pair_a[keep], pair_b[keep]

    codes = _pattern_codes(rt)
    uniq, inverse = np.unique(codes, return_inverse=True)
    inverse = inverse.reshape(-1)
    patterns = [_decode(int(c), len(names)) for c in uniq]
    per_pattern = [classify_link(p, names) for p in patterns]

    group_labels = [sign_group(p) for p in patterns]
    ordering = sorted(range(len(group_labels)), key=group_labels.__getitem__)
    rank = np.empty(len(ordering), dtype=np.int64)
    rank[ordering] = np.arange(len(ordering))
    group_code = rank[inverse]
    group_labels = [group_labels[i] for i in ordering]

    pt_labels = sorted({pt for _, pt in per_pattern})
    pt_index = {lab: i for i, lab in enumerate(pt_labels)}
    pattern_pt = np.array([pt_index[pt] for _, pt in per_pattern], dtype=np.int64)
    pattern_phi = np.array([ph for ph, _ in per_pattern], dtype="<U1")

    return ClassifiedLinks(
        names=names, nodes=nodes, pair_a=pa, pair_b=pb, rho=rho, rho_tilde=rt,
        phi=pattern_phi[inverse] if len(uniq) else np.array([], dtype="<U1"),
        phi_tilde_code=pattern_pt[inverse] if len(uniq) else np.array([], dtype=np.int64),
        phi_tilde_labels=pt_labels,
        group_code=group_code, group_labels=group_labels,
        tau=tau, n_removed=n_removed,
    )


def classify_all(net: NetworkSet, tau: float = DEFAULT_TAU) -> ClassifiedLinks:
    """Classify every link of a :class:`NetworkSet`; output keeps canonical pair order."""
    return classify_weights(net.names, net.nodes, net.pair_a, net.pair_b, net.weights, tau)
