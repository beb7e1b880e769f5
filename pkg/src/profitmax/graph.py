"""Directed weighted graph model, file formats and weight policies.

A graph couples directed edges carrying propagation probabilities with two
per-node weights: a benefit (reward collected when the node activates) and a
cost (expense incurred when the node activates and starts pushing to its
neighbors).  Graphs are immutable after construction; weight changes produce
new graph views sharing the edge structure.

File formats (UTF-8 text, whitespace separated, ``#`` starts a comment line):

    edge list:   u v [p]     one directed edge per line, external node ids,
                             p in [0,1]; missing p filled by a default policy
    weights:     v b c       per-node benefit and cost, external node ids

External ids are arbitrary nonnegative integers; internally nodes are densely
renumbered 0..n-1 in order of first appearance and the mapping is retained.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError


@dataclass(frozen=True)
class WeightTotals:
    """Total benefit and cost weight over all nodes."""

    upsilon_b: float
    upsilon_c: float


class WeightedGraph:
    """Immutable directed graph with edge probabilities and node weights.

    Construction validates every invariant once; afterwards the arrays are
    marked read-only and the object is safe to share across threads.
    """

    __slots__ = (
        "_n", "_src", "_dst", "_prob", "_benefit", "_cost", "_normalized",
        "_external_ids", "_id_map", "_fwd_ptr", "_fwd_dst", "_fwd_prob",
        "_rev_ptr", "_rev_src", "_rev_prob", "_out_degree", "_in_degree",
        "_rev_lists",
    )

    def __init__(self, node_count, edges, benefit=None, cost=None,
                 external_ids=None, normalized=False):
        n = int(node_count)
        if n < 0:
            raise DomainError("node_count must be nonnegative")
        self._n = n

        edges = list(edges)
        m = len(edges)
        src = np.empty(m, dtype=np.int32)
        dst = np.empty(m, dtype=np.int32)
        prob = np.empty(m, dtype=np.float64)
        seen = set()
        for k, (u, v, p) in enumerate(edges):
            u, v, p = int(u), int(v), float(p)
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u},{v}) references a node outside 0..{n - 1}")
            if u == v:
                raise DomainError(f"self-loop on node {u} is not allowed")
            if not (0.0 <= p <= 1.0):
                raise DomainError(f"edge ({u},{v}) probability {p} outside [0,1]")
            if (u, v) in seen:
                raise DomainError(f"duplicate parallel edge ({u},{v})")
            seen.add((u, v))
            src[k], dst[k], prob[k] = u, v, p
        self._src, self._dst, self._prob = src, dst, prob

        self._benefit = self._check_weights(benefit, "benefit")
        self._cost = self._check_weights(cost, "cost")
        self._normalized = bool(normalized)
        if self._normalized:
            overlap = np.minimum(self._benefit, self._cost)
            if np.any(overlap != 0.0):
                raise DomainError("normalized graphs require min(benefit, cost) == 0 per node")

        if external_ids is None:
            external_ids = list(range(n))
        external_ids = [int(x) for x in external_ids]
        if len(external_ids) != n or len(set(external_ids)) != n:
            raise DomainError("external_ids must be a bijection over the nodes")
        self._external_ids = external_ids
        self._id_map = {ext: i for i, ext in enumerate(external_ids)}

        self._fwd_ptr, self._fwd_dst, self._fwd_prob = self._csr(src, dst, prob)
        self._rev_ptr, self._rev_src, self._rev_prob = self._csr(dst, src, prob)
        self._out_degree = np.diff(self._fwd_ptr).astype(np.int64)
        self._in_degree = np.diff(self._rev_ptr).astype(np.int64)
        self._rev_lists = None

        for arr in (self._src, self._dst, self._prob, self._benefit, self._cost,
                    self._fwd_ptr, self._fwd_dst, self._fwd_prob,
                    self._rev_ptr, self._rev_src, self._rev_prob,
                    self._out_degree, self._in_degree):
            arr.setflags(write=False)

    def _check_weights(self, w, name):
        if w is None:
            w = np.zeros(self._n, dtype=np.float64)
        else:
            w = np.asarray(w, dtype=np.float64).copy()
        if w.shape != (self._n,):
            raise DomainError(f"{name} weights must have one entry per node")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError(f"{name} weights must be finite and nonnegative")
        return w

    def _csr(self, key, val, prob):
        # stable sort keeps edge insertion order within each bucket, which
        # pins the coin-flip order of every sampler
        order = np.argsort(key, kind="stable")
        ptr = np.zeros(self._n + 1, dtype=np.int64)
        np.add.at(ptr, key + 1, 1)
        np.cumsum(ptr, out=ptr)
        return ptr, val[order].copy(), prob[order].copy()

    # -- basic accessors -------------------------------------------------

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._src)

    @property
    def benefit(self) -> np.ndarray:
        return self._benefit

    @property
    def cost(self) -> np.ndarray:
        return self._cost

    @property
    def net_weight(self) -> np.ndarray:
        """Per-node benefit minus cost."""
        return self._benefit - self._cost

    @property
    def normalized(self) -> bool:
        return self._normalized

    @property
    def external_ids(self) -> list:
        return list(self._external_ids)

    @property
    def out_degree(self) -> np.ndarray:
        return self._out_degree

    @property
    def in_degree(self) -> np.ndarray:
        return self._in_degree

    def edge_arrays(self):
        """Edges as parallel arrays (src, dst, prob) in construction order."""
        return self._src, self._dst, self._prob

    def forward_csr(self):
        """(ptr, dst, prob) arrays; out-edges of v are slice ptr[v]:ptr[v+1]."""
        return self._fwd_ptr, self._fwd_dst, self._fwd_prob

    def reverse_csr(self):
        """(ptr, src, prob) arrays; in-edges of v are slice ptr[v]:ptr[v+1]."""
        return self._rev_ptr, self._rev_src, self._rev_prob

    def reverse_lists(self):
        """In-edges of each node as plain Python lists of (source, prob).

        Cached; used by the sampling hot loops where numpy scalar access is
        slower than list indexing.
        """
        if self._rev_lists is None:
            ptr, srcs, probs = self._rev_ptr, self._rev_src, self._rev_prob
            lists = []
            for v in range(self._n):
                lo, hi = int(ptr[v]), int(ptr[v + 1])
                lists.append(list(zip(srcs[lo:hi].tolist(), probs[lo:hi].tolist())))
            self._rev_lists = lists
        return self._rev_lists

    def internal_id(self, external: int) -> int:
        try:
            return self._id_map[int(external)]
        except KeyError:
            raise DomainError(f"unknown external node id {external}") from None

    def external_id(self, internal: int) -> int:
        return self._external_ids[internal]

    def totals(self) -> WeightTotals:
        return WeightTotals(float(self._benefit.sum()), float(self._cost.sum()))

    def with_weights(self, benefit, cost, normalized=False) -> "WeightedGraph":
        """New graph view sharing this edge structure with replaced weights."""
        edges = zip(self._src.tolist(), self._dst.tolist(), self._prob.tolist())
        return WeightedGraph(self._n, edges, benefit, cost,
                             external_ids=self._external_ids, normalized=normalized)

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self._n == other._n
                and self._normalized == other._normalized
                and self._external_ids == other._external_ids
                and np.array_equal(self._src, other._src)
                and np.array_equal(self._dst, other._dst)
                and np.array_equal(self._prob, other._prob)
                and np.array_equal(self._benefit, other._benefit)
                and np.array_equal(self._cost, other._cost))

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return (f"WeightedGraph(n={self._n}, m={self.edge_count}, "
                f"normalized={self._normalized})")

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "node_count": self._n,
            "normalized": self._normalized,
            "external_ids": self._external_ids,
            "edges": [[int(u), int(v), float(p)] for u, v, p in
                      zip(self._src, self._dst, self._prob)],
            "benefit": self._benefit.tolist(),
            "cost": self._cost.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "WeightedGraph":
        return cls(d["node_count"], d["edges"], d["benefit"], d["cost"],
                   external_ids=d["external_ids"], normalized=d["normalized"])


# -- loading and saving ---------------------------------------------------


def _data_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def load_edge_list(path, default_prob="wic") -> WeightedGraph:
    """Read a ``u v [p]`` edge-list file into a graph with zero weights.

    ``default_prob`` fills edges whose line omits p: either a constant in
    [0,1] or the string ``"wic"``, which assigns the reciprocal of the
    target's in-degree.
    """
    if default_prob != "wic":
        try:
            const = float(default_prob)
        except (TypeError, ValueError):
            raise DomainError(f"default_prob must be 'wic' or a float, got {default_prob!r}")
        if not (0.0 <= const <= 1.0):
            raise DomainError(f"default probability {const} outside [0,1]")

    ext_edges = []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"{path}:{lineno}: expected 'u v [p]', got {line!r}")
        try:
            u_ext, v_ext = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: node ids must be integers") from None
        if u_ext < 0 or v_ext < 0:
            raise ParseError(f"{path}:{lineno}: node ids must be nonnegative")
        p = None
        if len(parts) == 3:
            try:
                p = float(parts[2])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: probability must be a float") from None
            if not (0.0 <= p <= 1.0):
                raise DomainError(f"{path}:{lineno}: probability {p} outside [0,1]")
        if u_ext == v_ext:
            raise DomainError(f"{path}:{lineno}: self-loop on node {u_ext}")
        ext_edges.append((u_ext, v_ext, p))

    if not ext_edges:
        raise DomainError(f"{path}: no edges found")

    # dense internal ids in ascending external-id order
    order = sorted({x for u, v, _ in ext_edges for x in (u, v)})
    index = {ext: i for i, ext in enumerate(order)}
    n = len(order)
    in_deg = [0] * n
    for _, v_ext, _ in ext_edges:
        in_deg[index[v_ext]] += 1
    edges = []
    for u_ext, v_ext, p in ext_edges:
        u, v = index[u_ext], index[v_ext]
        if p is None:
            p = 1.0 / in_deg[v] if default_prob == "wic" else const
        edges.append((u, v, p))
    return WeightedGraph(n, edges, external_ids=order)


def save_edge_list(g: WeightedGraph, path) -> None:
    """Write the graph's edges with explicit probabilities (external ids)."""
    src, dst, prob = g.edge_arrays()
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, p in zip(src.tolist(), dst.tolist(), prob.tolist()):
            fh.write(f"{g.external_id(u)} {g.external_id(v)} {p!r}\n")


def load_weights(g: WeightedGraph, path) -> WeightedGraph:
    """Apply a ``v b c`` weights file on top of g's current weights."""
    benefit = g.benefit.copy()
    cost = g.cost.copy()
    seen = set()
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'v b c', got {line!r}")
        try:
            ext = int(parts[0])
            b = float(parts[1])
            c = float(parts[2])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: expected integer id and float weights") from None
        v = g.internal_id(ext)
        if v in seen:
            raise DomainError(f"{path}:{lineno}: duplicate weight row for node {ext}")
        seen.add(v)
        if b < 0 or c < 0:
            raise DomainError(f"{path}:{lineno}: weights must be nonnegative")
        benefit[v] = b
        cost[v] = c
    return g.with_weights(benefit, cost)


def save_weights(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in range(g.node_count):
            fh.write(f"{g.external_id(v)} {float(g.benefit[v])!r} {float(g.cost[v])!r}\n")


_DIST_NAMES = {"uniform", "degree", "degree-proportional"}


def _dist_values(g: WeightedGraph, dist, name) -> np.ndarray:
    if dist not in _DIST_NAMES:
        raise DomainError(f"unknown {name} distribution {dist!r}; expected one of {sorted(_DIST_NAMES)}")
    if dist == "uniform":
        return np.ones(g.node_count, dtype=np.float64)
    return g.out_degree.astype(np.float64)


def assign_weights(g: WeightedGraph, benefit_dist="uniform", cost_dist="degree",
                   r=1.0, weights_path=None) -> WeightedGraph:
    """Assign node weights from distribution policies or an explicit file.

    Benefits take the raw policy values (uniform gives 1 per node,
    degree-proportional gives the out-degree).  Costs take the policy values
    rescaled so that total cost equals ``r`` times total benefit; nodes with
    out-degree 0 therefore get cost 0 under the degree policy.  Rows of an
    explicit ``v b c`` file override both weights verbatim, with no rescaling.
    """
    r = float(r)
    if r <= 0:
        raise DomainError(f"scale factor r must be positive, got {r}")
    benefit = _dist_values(g, benefit_dist, "benefit")
    cost = _dist_values(g, cost_dist, "cost")
    target = r * float(benefit.sum())
    total_cost = float(cost.sum())
    if target > 0 and total_cost == 0:
        raise DomainError(f"cost distribution {cost_dist!r} is identically zero; "
                          "cannot rescale to match r * total benefit")
    cost = cost * (target / total_cost) if total_cost > 0 else cost
    result = g.with_weights(benefit, cost)
    if weights_path is not None:
        result = load_weights(result, weights_path)
    return result


def normalize_weights(g: WeightedGraph) -> WeightedGraph:
    """Fold the overlap out of each node's weight pair.

    Node v keeps only the sign side of its net weight w(v) = b(v) - c(v):
    the normalized pair is (max(0, w), max(0, -w)).  The per-node difference,
    and hence the profit of every seed set, is unchanged, while both weight
    totals shrink by the overlap.  Idempotent.
    """
    if g.normalized:
        return g
    w = g.net_weight
    return g.with_weights(np.maximum(w, 0.0), np.maximum(-w, 0.0), normalized=True)


def save_graph_json(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(g.to_json_dict(), fh)


def load_graph_json(path) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return WeightedGraph.from_json_dict(json.load(fh))
