"""Edge-list ingestion: parsing, canonical ordering, stretch and node intersection.

Each input network is a three-column delimited file ``node1 node2 weight``.
Pairs are stored with the lexicographically smaller node first. A set of
networks is merged into a :class:`NetworkSet`, which keeps only the nodes
measured in every network and holds one dense weight vector per link.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

DELIMITERS = {"tab": "\t", "comma": ",", "whitespace": None}


class EdgeListError(ValueError):
    """Raised for malformed, inconsistent or out-of-range edge-list input."""


@dataclass
class EdgeList:
    """One named network as parallel arrays of canonical records."""

    name: str
    node_a: np.ndarray
    node_b: np.ndarray
    weight: np.ndarray
    source: Path | None = None

    def __len__(self) -> int:
        return len(self.weight)

    def records(self) -> Iterator[tuple[str, str, float]]:
        for a, b, w in zip(self.node_a, self.node_b, self.weight):
            yield str(a), str(b), float(w)

    def nodes(self) -> np.ndarray:
        return pd.unique(np.concatenate([self.node_a, self.node_b]))


@dataclass
class NetworkSet:
    """W aligned networks over the common node universe.

    ``nodes`` is the sorted node universe; ``pair_a``/``pair_b`` index into it
    with ``pair_a < pair_b``; ``weights`` has shape ``(n_links, W)`` with rows
    sorted by canonical pair and absent entries filled with 0.
    """

    names: list[str]
    nodes: np.ndarray
    pair_a: np.ndarray
    pair_b: np.ndarray
    weights: np.ndarray
    dropped: dict[str, dict[str, int]] = field(default_factory=dict)
    stretched: bool = False

    @property
    def n_networks(self) -> int:
        return len(self.names)

    @property
    def n_links(self) -> int:
        return len(self.pair_a)

    def node_names(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes[self.pair_a], self.nodes[self.pair_b]

    def weight_vector(self, a: str, b: str) -> np.ndarray:
        """Dense weight vector of one link; raises ``KeyError`` if absent."""
        if b < a:
            a, b = b, a
        ia = np.searchsorted(self.nodes, a)
        ib = np.searchsorted(self.nodes, b)
        if ia >= len(self.nodes) or ib >= len(self.nodes) or self.nodes[ia] != a or self.nodes[ib] != b:
            raise KeyError((a, b))
        lo = np.searchsorted(self.pair_a, ia, side="left")
        hi = np.searchsorted(self.pair_a, ia, side="right")
        j = lo + np.searchsorted(self.pair_b[lo:hi], ib)
        if j >= hi or self.pair_b[j] != ib:
            raise KeyError((a, b))
        return self.weights[j]

    @property
    def link_index(self) -> dict[tuple[str, str], np.ndarray]:
        a, b = self.node_names()
        return {(str(x), str(y)): self.weights[i] for i, (x, y) in enumerate(zip(a, b))}


def _resolve_delimiter(delimiter: str | None) -> str | None:
    if delimiter is None:
        return "\t"
    return DELIMITERS.get(delimiter, delimiter)


def _split(line: str, sep: str | None) -> list[str]:
    if sep is None:
        return line.split()
    return next(csv.reader([line], delimiter=sep))


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _first_content_line(path: Path) -> tuple[int, str | None]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                return lineno, line.rstrip("\r\n")
    return 0, None


def _parse_slow(path: Path, sep: str | None, has_header: bool) -> tuple[list[str], list[str], list[float], list[int]]:
    """Line-by-line parse that reports the first offending row."""
    a_col, b_col, w_col, rows = [], [], [], []
    seen_header = not has_header
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if not seen_header:
                seen_header = True
                continue
            fields = _split(line, sep)
            if len(fields) != 3:
                raise EdgeListError(f"{path}: row {lineno}: expected 3 columns, found {len(fields)}")
            a, b, w = (f.strip() for f in fields)
            if not a or not b:
                raise EdgeListError(f"{path}: row {lineno}: empty node identifier")
            try:
                weight = float(w)
            except ValueError:
                raise EdgeListError(f"{path}: row {lineno}: weight {w!r} is not a number") from None
            if not math.isfinite(weight):
                raise EdgeListError(f"{path}: row {lineno}: non-finite weight {w!r}")
            a_col.append(a)
            b_col.append(b)
            w_col.append(weight)
            rows.append(lineno)
    return a_col, b_col, w_col, rows


def _parse_fast(path: Path, sep: str | None, header_line: int) -> pd.DataFrame:
    kwargs = dict(
        header=None,
        names=["a", "b", "w"],
        dtype={"a": str, "b": str, "w": np.float64},
        na_filter=False,
        skiprows=header_line,
        engine="c",
        encoding="utf-8",
        float_precision="round_trip",
    )
    if sep is None:
        kwargs["sep"] = r"\s+"
    else:
        kwargs["sep"] = sep
    return pd.read_csv(path, **kwargs)


def read_edge_file(path: str | Path, delimiter: str | None = "\t") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a raw three-column file into node and weight arrays (no canonicalization)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"edge list not found: {path}")
    sep = _resolve_delimiter(delimiter)
    first_no, first = _first_content_line(path)
    if first is None:
        return np.array([], dtype=object), np.array([], dtype=object), np.array([], dtype=np.float64)
    fields = _split(first, sep)
    has_header = len(fields) == 3 and not _is_number(fields[2].strip())

    df = None
    try:
        df = _parse_fast(path, sep, first_no if has_header else 0)
    except (ValueError, pd.errors.ParserError):
        df = None
    if df is not None:
        a = df["a"].to_numpy(dtype=object)
        b = df["b"].to_numpy(dtype=object)
        w = df["w"].to_numpy(dtype=np.float64)
        ok = np.isfinite(w).all() and (df["a"].str.len() > 0).all() and (df["b"].str.len() > 0).all()
        if ok and sep is not None:
            ok = not (df["a"].str.strip().ne(df["a"]).any() or df["b"].str.strip().ne(df["b"]).any())
        if ok:
            return a, b, w
    a_list, b_list, w_list, _ = _parse_slow(path, sep, has_header)
    return np.array(a_list, dtype=object), np.array(b_list, dtype=object), np.array(w_list, dtype=np.float64)


def canonicalize(name: str, node_a, node_b, weight, source: Path | None = None) -> EdgeList:
    """Order each pair alphabetically and reject self-loops and duplicate pairs."""
    a = np.asarray(node_a, dtype=object)
    b = np.asarray(node_b, dtype=object)
    w = np.asarray(weight, dtype=np.float64)
    where = f"{source}" if source is not None else name
    if not np.isfinite(w).all():
        i = int(np.flatnonzero(~np.isfinite(w))[0])
        raise EdgeListError(f"{where}: record {i + 1}: non-finite weight")
    loops = a == b
    if loops.any():
        i = int(np.flatnonzero(loops)[0])
        raise EdgeListError(f"{where}: record {i + 1}: self-loop on node {a[i]!r}")
    swap = (a > b).astype(bool)
    lo = np.where(swap, b, a)
    hi = np.where(swap, a, b)
    dup = pd.DataFrame({"a": lo, "b": hi}).duplicated(keep="first").to_numpy()
    if dup.any():
        i = int(np.flatnonzero(dup)[0])
        raise EdgeListError(f"{where}: duplicate pair {lo[i]}-{hi[i]} (record {i + 1})")
    return EdgeList(name=name, node_a=lo, node_b=hi, weight=w, source=source)


def load_edge_list(path: str | Path, delimiter: str | None = "\t", name: str | None = None) -> EdgeList:
    """Read one network file into canonical records.

    ``delimiter`` is ``"\\t"`` (default), ``","``, ``"tab"``, ``"comma"`` or
    ``"whitespace"``. A header row is recognised when its third field is not
    numeric. Zero weights are kept: they mark measured but insignificant links.
    """
    path = Path(path)
    a, b, w = read_edge_file(path, delimiter)
    return canonicalize(name or path.stem, a, b, w, source=path)


def stretch_weights(edges: EdgeList) -> EdgeList:
    """Affinely map the list's observed weight range onto [-1, 1].

    A list whose weights are all equal is returned unchanged.
    """
    w = edges.weight
    if len(w) == 0:
        raise EdgeListError(f"{edges.name}: cannot stretch an empty edge list")
    lo, hi = float(w.min()), float(w.max())
    if hi == lo:
        return edges
    out = 2.0 * (w - lo) / (hi - lo) - 1.0
    np.clip(out, -1.0, 1.0, out=out)
    return EdgeList(edges.name, edges.node_a, edges.node_b, out, edges.source)


def build_network_set(lists: Sequence[EdgeList], stretch: bool = False) -> NetworkSet:
    """Intersect node sets and merge the lists into dense weight vectors.

    A network's node set is every endpoint of its records, zero-weight ones
    included. Links touching a node missing from any network are dropped
    everywhere; per-network drop counts are kept in ``NetworkSet.dropped``.
    """
    if len(lists) < 2:
        raise EdgeListError(f"at least 2 networks are required, got {len(lists)}")
    names = [e.name for e in lists]
    if len(set(names)) != len(names):
        raise EdgeListError(f"network names must be unique: {names}")
    for e in lists:
        if len(e) == 0:
            raise EdgeListError(f"network {e.name!r} has no links")
    if stretch:
        lists = [stretch_weights(e) for e in lists]
    else:
        for e in lists:
            bad = np.abs(e.weight) > 1.0
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise EdgeListError(
                    f"network {e.name!r}: weight {e.weight[i]!r} on {e.node_a[i]}-{e.node_b[i]} "
                    "lies outside [-1, 1]; enable stretch to rescale"
                )

    per_net_nodes = [pd.Index(e.nodes()) for e in lists]
    universe = per_net_nodes[0]
    for idx in per_net_nodes[1:]:
        universe = universe.intersection(idx)
    if len(universe) == 0:
        raise EdgeListError("the networks share no nodes")
    nodes = np.sort(universe.to_numpy(dtype=object))
    index = pd.Index(nodes)
    n = len(nodes)

    keys, cols, vals = [], [], []
    dropped: dict[str, dict[str, int]] = {}
    for k, (e, net_nodes) in enumerate(zip(lists, per_net_nodes)):
        ca = index.get_indexer(e.node_a)
        cb = index.get_indexer(e.node_b)
        keep = (ca >= 0) & (cb >= 0)
        dropped[e.name] = {
            "nodes": int(len(net_nodes) - len(net_nodes.intersection(index))),
            "links": int((~keep).sum()),
        }
        keys.append(ca[keep].astype(np.int64) * n + cb[keep].astype(np.int64))
        cols.append(np.full(int(keep.sum()), k, dtype=np.int64))
        vals.append(e.weight[keep])
        if dropped[e.name]["links"]:
            log.info("network %s: dropped %d nodes and %d links outside the common universe",
                     e.name, dropped[e.name]["nodes"], dropped[e.name]["links"])

    all_keys = np.concatenate(keys)
    uniq, inverse = np.unique(all_keys, return_inverse=True)
    weights = np.zeros((len(uniq), len(lists)), dtype=np.float64)
    weights[inverse, np.concatenate(cols)] = np.concatenate(vals)
    return NetworkSet(
        names=names,
        nodes=nodes,
        pair_a=(uniq // n).astype(np.int64),
        pair_b=(uniq % n).astype(np.int64),
        weights=weights,
        dropped=dropped,
        stretched=stretch,
    )


def load_network_set(
    inputs: Sequence[tuple[str, str | Path]],
    delimiter: str | None = "\t",
    stretch: bool = False,
    threads: int = 1,
) -> NetworkSet:
    """Load ``(name, path)`` inputs, parsing files concurrently, and merge them."""
    def _load(item):
        name, path = item
        return load_edge_list(path, delimiter=delimiter, name=name)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            lists = list(pool.map(_load, inputs))
    else:
        lists = [_load(item) for item in inputs]
    return build_network_set(lists, stretch=stretch)


def write_edge_list(edges: EdgeList, path: str | Path, delimiter: str = "\t") -> None:
    """Write records as ``node1 node2 weight`` rows with round-trip float text."""
    frame = pd.DataFrame({"a": edges.node_a, "b": edges.node_b, "w": edges.weight})
    frame.to_csv(path, sep=delimiter, header=False, index=False, lineterminator="\n", encoding="utf-8")
