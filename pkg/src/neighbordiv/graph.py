"""Attributed-graph container plus plain-text loaders and writers.

Graphs are undirected, unweighted, and stored in CSR form (``offsets`` /
``neighbors``) with each neighbor segment sorted ascending and every edge
present in both directions. Node features sit in a dense float64 matrix whose
row ``i`` belongs to node ``i``.

File formats
------------
Edge list
    One edge per line as two whitespace-separated non-negative integers.
    Blank lines and lines starting with ``#`` or ``%`` are skipped. Duplicate
    edges (in either orientation) collapse to one; self loops are dropped and
    counted. Node ids need not be contiguous; they are remapped to a dense
    ``0..n-1`` range and the mapping is reported.
Features
    One node per line, comma- or tab-separated numeric cells, constant column
    count. Values must be finite.
Labels / communities
    One integer per line. Labels must be 0 or 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import GraphInputError

_COMMENT_PREFIXES = ("#", "%")


@dataclass
class EdgeList:
    """Canonical undirected edges and the id remapping produced while loading.

    Attributes
    ----------
    edges : ndarray of shape (m, 2)
        One row per undirected edge with ``u < v``, in lexicographic order,
        expressed in dense remapped ids.
    node_ids : ndarray of shape (n,)
        Original id of each dense node index.
    n_nodes : int
        Number of distinct nodes seen in the file.
    self_loops_dropped, duplicates_dropped : int
        Counts of discarded input lines.
    """

    edges: np.ndarray
    node_ids: np.ndarray
    n_nodes: int
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0


@dataclass
class AttributedGraph:
    """Undirected attributed graph in CSR adjacency form."""

    offsets: np.ndarray
    neighbors: np.ndarray
    features: np.ndarray
    labels: np.ndarray | None = None
    communities: np.ndarray | None = None

    @property
    def node_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def edge_count(self) -> int:
        # each undirected edge is stored twice
        return len(self.neighbors) // 2

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def neighbors_of(self, node: int) -> np.ndarray:
        """Sorted neighbor ids of ``node`` (a view, do not mutate)."""
        return self.neighbors[self.offsets[node]:self.offsets[node + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        seg = self.neighbors_of(u)
        pos = np.searchsorted(seg, v)
        return pos < len(seg) and seg[pos] == v


@dataclass
class NodeDegreeProfile:
    """Degree vector with the validity bookkeeping used downstream.

    ``valid_mask`` marks nodes with degree at least two: only those admit a
    neighbor pair, so only those receive a defined diversity value.
    """

    degrees: np.ndarray
    valid_mask: np.ndarray
    isolated_count: int
    degree_one_count: int


def _data_lines(path: Path):
    """Yield (line_number, stripped_text) skipping blanks and comments."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith(_COMMENT_PREFIXES):
                continue
            yield lineno, text


def load_edge_list(path: str | Path) -> EdgeList:
    """Parse an edge-list file into canonical deduplicated form.

    Raises
    ------
    GraphInputError
        On malformed lines (token count, non-integer or negative ids) with
        the offending line number, or when the file contains no edges.
    """
    path = Path(path)
    pairs: list[tuple[int, int]] = []
    self_loops = 0
    for lineno, text in _data_lines(path):
        tokens = text.split()
        if len(tokens) != 2:
            raise GraphInputError(
                f"{path}:{lineno}: expected two whitespace-separated node ids, "
                f"got {len(tokens)} tokens"
            )
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphInputError(
                f"{path}:{lineno}: node ids must be integers, got {text!r}"
            ) from None
        if u < 0 or v < 0:
            raise GraphInputError(f"{path}:{lineno}: node ids must be non-negative")
        if u == v:
            self_loops += 1
            continue
        pairs.append((min(u, v), max(u, v)))
    if not pairs:
        raise GraphInputError(f"{path}: no edges found")
    if self_loops:
        warnings.warn(f"{path}: dropped {self_loops} self loop(s)", stacklevel=2)

    raw = np.asarray(pairs, dtype=np.int64)
    node_ids, dense = np.unique(raw, return_inverse=True)
    dense = dense.reshape(raw.shape)
    edges = np.unique(dense, axis=0)
    return EdgeList(
        edges=edges,
        node_ids=node_ids,
        n_nodes=len(node_ids),
        self_loops_dropped=self_loops,
        duplicates_dropped=len(raw) - len(edges),
    )


def load_features(path: str | Path, n_nodes: int | None = None) -> np.ndarray:
    """Parse a feature matrix, one comma- or tab-separated row per node.

    Parameters
    ----------
    path : str or Path
    n_nodes : int, optional
        Expected row count; mismatch raises.

    Raises
    ------
    GraphInputError
        On ragged rows, non-numeric or non-finite cells (reported with row
        and column), or a row-count mismatch.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    for lineno, text in _data_lines(path):
        delim = "\t" if "\t" in text else ","
        cells = text.split(delim)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise GraphInputError(
                f"{path}:{lineno}: expected {width} columns, got {len(cells)}"
            )
        parsed = []
        for col, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise GraphInputError(
                    f"{path}:{lineno}: column {col}: not a number: {cell.strip()!r}"
                ) from None
            if not np.isfinite(value):
                raise GraphInputError(
                    f"{path}:{lineno}: column {col}: non-finite value {cell.strip()!r}"
                )
            parsed.append(value)
        rows.append(parsed)
    if not rows:
        raise GraphInputError(f"{path}: no feature rows found")
    if n_nodes is not None and len(rows) != n_nodes:
        raise GraphInputError(
            f"{path}: expected {n_nodes} feature rows, got {len(rows)}"
        )
    return np.asarray(rows, dtype=np.float64)


def load_labels(path: str | Path, n_nodes: int | None = None,
                binary: bool = True) -> np.ndarray:
    """Parse one integer per line; with ``binary`` each must be 0 or 1."""
    path = Path(path)
    values: list[int] = []
    for lineno, text in _data_lines(path):
        try:
            value = int(text)
        except ValueError:
            raise GraphInputError(
                f"{path}:{lineno}: expected an integer, got {text!r}"
            ) from None
        if binary and value not in (0, 1):
            raise GraphInputError(f"{path}:{lineno}: labels must be 0 or 1")
        values.append(value)
    if not values:
        raise GraphInputError(f"{path}: no label rows found")
    if n_nodes is not None and len(values) != n_nodes:
        raise GraphInputError(f"{path}: expected {n_nodes} labels, got {len(values)}")
    return np.asarray(values, dtype=np.int64)


def build_graph(edges: np.ndarray | EdgeList, features: np.ndarray,
                labels: np.ndarray | None = None,
                communities: np.ndarray | None = None) -> AttributedGraph:
    """Assemble an :class:`AttributedGraph` from edges and a feature matrix.

    ``edges`` may be an :class:`EdgeList` or an ``(m, 2)`` integer array; rows
    are treated as undirected regardless of orientation, duplicates collapse,
    self loops are dropped with a warning. The feature row count fixes the
    node count, so ids beyond the largest edge endpoint are isolated nodes.
    """
    if isinstance(edges, EdgeList):
        edge_arr = edges.edges
    else:
        edge_arr = np.asarray(edges, dtype=np.int64)
        if edge_arr.ndim != 2 or edge_arr.shape[1] != 2:
            raise GraphInputError("edges must have shape (m, 2)")
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise GraphInputError("features must be a 2-d matrix")
    if not np.all(np.isfinite(features)):
        raise GraphInputError("features contain non-finite values")
    n = features.shape[0]
    if n == 0:
        raise GraphInputError("feature matrix has no rows")

    if len(edge_arr):
        if edge_arr.min() < 0:
            raise GraphInputError("edge endpoints must be non-negative")
        if edge_arr.max() >= n:
            raise GraphInputError(
                f"edge endpoint {int(edge_arr.max())} outside feature rows 0..{n - 1}"
            )
        loops = edge_arr[:, 0] == edge_arr[:, 1]
        if loops.any():
            warnings.warn(f"dropped {int(loops.sum())} self loop(s)", stacklevel=2)
            edge_arr = edge_arr[~loops]

    if len(edge_arr):
        both = np.concatenate([edge_arr, edge_arr[:, ::-1]])
        both = np.unique(both, axis=0)
        counts = np.bincount(both[:, 0], minlength=n)
        neighbors = both[:, 1]
    else:
        counts = np.zeros(n, dtype=np.int64)
        neighbors = np.empty(0, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])

    for name, extra in (("labels", labels), ("communities", communities)):
        if extra is not None and len(extra) != n:
            raise GraphInputError(f"{name} length {len(extra)} != node count {n}")
    return AttributedGraph(
        offsets=offsets,
        neighbors=neighbors,
        features=features,
        labels=None if labels is None else np.asarray(labels, dtype=np.int64),
        communities=None if communities is None
        else np.asarray(communities, dtype=np.int64),
    )


def degree_profile(graph: AttributedGraph) -> NodeDegreeProfile:
    """Degrees plus the degree-at-least-two validity mask."""
    degrees = graph.degrees
    return NodeDegreeProfile(
        degrees=degrees,
        valid_mask=degrees >= 2,
        isolated_count=int((degrees == 0).sum()),
        degree_one_count=int((degrees == 1).sum()),
    )


def write_edge_list(graph: AttributedGraph, path: str | Path) -> None:
    """Write each undirected edge once as ``u v`` with ``u < v``."""
    with open(path, "w", encoding="utf-8") as fh:
        for u in range(graph.node_count):
            for v in graph.neighbors_of(u):
                if u < v:
                    fh.write(f"{u} {int(v)}\n")


def write_features(features: np.ndarray, path: str | Path) -> None:
    """Write a comma-separated feature matrix at full float64 precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.asarray(features, dtype=np.float64):
            fh.write(",".join(f"{value:.17g}" for value in row) + "\n")


def write_labels(values: np.ndarray, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for value in values:
            fh.write(f"{int(value)}\n")
