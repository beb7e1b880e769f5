"""Weighted reverse-reachable (RR) sampling and coverage-based estimation.

One RR set is drawn by picking a root node with probability proportional to
the node weights (benefit or cost), sampling a live-edge outcome of the
diffusion, and collecting every node that reaches the root in that outcome.
For a collection of theta such sets with total node weight Upsilon, the
number Lambda(S) of sets that S intersects estimates the weighted spread:

    benefit(S) ~ Lambda(S) * Upsilon / theta

Two independent collections, one per weight kind, estimate benefit and cost.
Collections are frozen after generation; every downstream algorithm sees a
fixed, deterministic function of (seed, theta), which is what makes the
pruning and selection loops terminate.

Generation is chunked: each block of sets gets its own generator derived from
(seed, kind, block index), so the output is identical no matter how blocks
would be distributed over workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .evaluation import MarginalEvaluator
from .graph import WeightedGraph
from .rng import UniformStream, derive_seed, make_rng

KINDS = ("benefit", "cost")
GENERATION_CHUNK = 8192


class AliasTable:
    """Walker alias sampler over nonnegative weights; O(1) per draw.

    Entries with zero weight are never returned.
    """

    def __init__(self, weights):
        weights = np.asarray(weights, dtype=np.float64)
        if np.any(weights < 0):
            raise DomainError("alias table weights must be nonnegative")
        total = float(weights.sum())
        if total <= 0:
            raise DomainError("alias table needs positive total weight")
        n = len(weights)
        scaled = weights * (n / total)
        self.prob = np.ones(n, dtype=np.float64)
        self.alias = np.arange(n, dtype=np.int64)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        scaled = scaled.copy()
        while small and large:
            s = small.pop()
            l = large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            (small if scaled[l] < 1.0 else large).append(l)
        for i in small + large:
            # leftovers are 1.0 up to rounding
            self.prob[i] = 1.0
        # a zero-weight entry always aliases away
        zero = weights == 0
        self.prob[zero] = 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.integers(0, len(self.prob), size=size)
        u = rng.random(size)
        take = u < self.prob[idx]
        return np.where(take, idx, self.alias[idx])


@dataclass
class RRCollection:
    """A frozen batch of RR sets of one weight kind.

    ``sets[i]`` lists the members of set i with its root first; ``index[v]``
    lists the set ids containing node v.  ``total_weight`` is the Upsilon of
    the kind the collection was sampled under.
    """

    kind: str
    node_count: int
    total_weight: float
    seed: int
    sets: list = field(repr=False)
    index: list = field(init=False, repr=False)
    theta: int = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown RR kind {self.kind!r}; expected one of {KINDS}")
        self.sets = [np.asarray(s, dtype=np.int32) for s in self.sets]
        for i, s in enumerate(self.sets):
            if len(s) == 0:
                raise DomainError(f"RR set {i} is empty")
        self.theta = len(self.sets)
        self.index = self._build_index()
        for arr in self.sets:
            arr.setflags(write=False)
        for arr in self.index:
            arr.setflags(write=False)

    def _build_index(self):
        buckets = [[] for _ in range(self.node_count)]
        for i, members in enumerate(self.sets):
            for v in members.tolist():
                buckets[v].append(i)
        return [np.asarray(b, dtype=np.int64) for b in buckets]

    def check_consistent(self) -> None:
        """Audit: the inverted index must reconstruct exactly from the sets."""
        rebuilt = self._build_index()
        for v in range(self.node_count):
            if not np.array_equal(rebuilt[v], self.index[v]):
                raise DomainError(f"index inconsistent at node {v}")

    def roots(self) -> np.ndarray:
        return np.array([int(s[0]) for s in self.sets], dtype=np.int64)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "node_count": self.node_count,
            "total_weight": self.total_weight,
            "seed": self.seed,
            "theta": self.theta,
            "sets": [s.tolist() for s in self.sets],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RRCollection":
        c = cls(kind=d["kind"], node_count=d["node_count"],
                total_weight=d["total_weight"], seed=d["seed"], sets=d["sets"])
        if c.theta != d["theta"]:
            raise DomainError("collection theta does not match its sets")
        return c


def generate(g: WeightedGraph, kind: str, theta: int, seed: int) -> RRCollection:
    """Sample theta RR sets of the given weight kind.

    Each set draws its root proportionally to the node weights of the kind,
    then walks the graph backwards, flipping each incoming edge at most once
    and keeping every node whose live path reaches the root.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown RR kind {kind!r}; expected one of {KINDS}")
    theta = int(theta)
    if theta < 1:
        raise DomainError("theta must be at least 1")
    weights = g.benefit if kind == "benefit" else g.cost
    total = float(weights.sum())
    if total <= 0:
        raise DomainError(f"no sampleable roots: total {kind} weight is zero")
    alias = AliasTable(weights)
    rev = g.reverse_lists()

    sets = []
    seed = int(seed)
    for block_start in range(0, theta, GENERATION_CHUNK):
        block_len = min(GENERATION_CHUNK, theta - block_start)
        rng = make_rng(derive_seed(seed, "rr", kind, block_start // GENERATION_CHUNK))
        roots = alias.sample(rng, block_len).tolist()
        coins = UniformStream(rng)
        next_coin = coins.next
        for root in roots:
            members = [root]
            seen = {root}
            qi = 0
            while qi < len(members):
                for u, p in rev[members[qi]]:
                    if u not in seen and next_coin() < p:
                        seen.add(u)
                        members.append(u)
                qi += 1
            sets.append(np.array(members, dtype=np.int32))
    return RRCollection(kind=kind, node_count=g.node_count,
                        total_weight=total, seed=seed, sets=sets)


def _check_nodes(coll: RRCollection, nodes) -> None:
    for v in nodes:
        if not (0 <= int(v) < coll.node_count):
            raise DomainError(f"node {v} outside 0..{coll.node_count - 1}")


def coverage(coll: RRCollection, seeds) -> int:
    """Lambda(S): how many of the collection's sets S intersects."""
    _check_nodes(coll, seeds)
    if not seeds:
        return 0
    mask = np.zeros(coll.theta, dtype=bool)
    for v in seeds:
        mask[coll.index[int(v)]] = True
    return int(mask.sum())


def marginal_coverage(coll: RRCollection, seeds, v) -> int:
    """Sets containing v that S leaves uncovered; equals Lambda(S+v) - Lambda(S)."""
    v = int(v)
    seeds = frozenset(int(x) for x in seeds)
    if v in seeds:
        raise DomainError(f"node {v} already in the seed set")
    _check_nodes(coll, seeds | {v})
    if not seeds:
        return int(len(coll.index[v]))
    mask = np.zeros(coll.theta, dtype=bool)
    for u in seeds:
        mask[coll.index[u]] = True
    return int(np.count_nonzero(~mask[coll.index[v]]))


def chernoff_a(delta: float) -> float:
    """The concentration constant a = 4(e-2) ln(2/delta)."""
    delta = float(delta)
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0,1), got {delta}")
    return 4.0 * (math.e - 2.0) * math.log(2.0 / delta)


def confidence_bounds(lambda_: float, theta: int, upsilon: float, delta: float):
    """Two-sided bounds on the true weighted spread behind a coverage count.

    With a = 4(e-2) ln(2/delta),

        lower = (sqrt(Lambda + a/4) - sqrt(a)/2)^2 * Upsilon / theta
        upper = (sqrt(Lambda + a/4) + sqrt(a)/2)^2 * Upsilon / theta

    and each one-sided bound holds with probability at least 1 - delta/2,
    provided the sets were generated independently of the queried seed set.
    """
    if not (0 <= lambda_ <= theta):
        raise DomainError(f"coverage count {lambda_} outside [0, theta={theta}]")
    if upsilon < 0:
        raise DomainError("upsilon must be nonnegative")
    a = chernoff_a(delta)
    scale = upsilon / theta
    root = math.sqrt(lambda_ + 0.25 * a)
    half = 0.5 * math.sqrt(a)
    lower = (root - half) ** 2 * scale
    upper = (root + half) ** 2 * scale
    return lower, upper


def sampling_error_limit(upsilon: float, value: float, theta: int, delta: float) -> float:
    """Additive error limit sqrt(a * Upsilon * value / theta) at confidence 1 - delta.

    Evaluating this at the exact benefit and cost shows why weight
    normalization helps: both Upsilon and the metric value shrink, so the
    limit never grows.
    """
    if upsilon < 0 or value < 0:
        raise DomainError("upsilon and value must be nonnegative")
    if theta < 1:
        raise DomainError("theta must be at least 1")
    return math.sqrt(chernoff_a(delta) * upsilon * value / theta)


def theta_for_relative_error(upsilon: float, value: float, rel_err: float,
                             delta: float) -> int:
    """Samples needed so the error limit is at most rel_err * value.

    Inverts the error-limit formula; ``value`` is the smallest metric value
    the estimate must resolve.
    """
    if rel_err <= 0:
        raise DomainError("rel_err must be positive")
    if value <= 0 or upsilon <= 0:
        raise DomainError("upsilon and value must be positive")
    return int(math.ceil(chernoff_a(delta) * upsilon / (rel_err ** 2 * value)))


class ProfitEstimator(MarginalEvaluator):
    """Benefit and cost estimates from two frozen RR collections.

    A weight kind whose total is zero needs no samples; its collection slot
    is None and every estimate on that side is exactly zero.
    """

    _MASK_MEMO = 8
    _COUNT_MEMO = 4

    def __init__(self, benefit_rr, cost_rr, graph: WeightedGraph):
        totals = graph.totals()
        self._validate_side(benefit_rr, "benefit", totals.upsilon_b, graph)
        self._validate_side(cost_rr, "cost", totals.upsilon_c, graph)
        self.benefit_rr = benefit_rr
        self.cost_rr = cost_rr
        self.graph = graph
        self.node_count = graph.node_count
        self._masks = {}
        self._counts = {}

    @staticmethod
    def _validate_side(coll, kind, upsilon, graph):
        if coll is None:
            if upsilon != 0:
                raise DomainError(f"{kind} collection missing but total weight is {upsilon}")
            return
        if coll.kind != kind:
            raise DomainError(f"collection of kind {coll.kind!r} passed as {kind}")
        if coll.node_count != graph.node_count:
            raise DomainError("collection node count does not match the graph")
        if not math.isclose(coll.total_weight, upsilon, rel_tol=1e-12, abs_tol=1e-12):
            raise DomainError(f"collection {kind} total weight {coll.total_weight} "
                              f"does not match the graph's {upsilon}")

    @classmethod
    def build(cls, g: WeightedGraph, theta_beta: int, theta_gamma: int,
              seed: int) -> "ProfitEstimator":
        """Generate both collections from one master seed."""
        totals = g.totals()
        benefit_rr = (generate(g, "benefit", theta_beta, derive_seed(seed, "benefit"))
                      if totals.upsilon_b > 0 else None)
        cost_rr = (generate(g, "cost", theta_gamma, derive_seed(seed, "cost"))
                   if totals.upsilon_c > 0 else None)
        return cls(benefit_rr, cost_rr, g)

    def _side(self, metric):
        return self.benefit_rr if metric == "benefit" else self.cost_rr

    def rho(self, metric) -> float:
        """Scale factor Upsilon / theta converting counts to weight units."""
        coll = self._side(metric)
        return coll.total_weight / coll.theta if coll is not None else 0.0

    def _memo_get(self, memo, key, build, cap):
        hit = memo.get(key)
        if hit is None:
            hit = build()
            if len(memo) >= cap:
                memo.pop(next(iter(memo)))
            memo[key] = hit
        return hit

    def _covered(self, metric, base: frozenset) -> np.ndarray:
        coll = self._side(metric)

        def build():
            mask = np.zeros(coll.theta, dtype=bool)
            for v in base:
                mask[coll.index[v]] = True
            return mask

        return self._memo_get(self._masks, (metric, base), build, self._MASK_MEMO)

    def _member_counts(self, metric, whole: frozenset) -> np.ndarray:
        coll = self._side(metric)

        def build():
            counts = np.zeros(coll.theta, dtype=np.int32)
            for v in whole:
                counts[coll.index[v]] += 1
            return counts

        return self._memo_get(self._counts, (metric, whole), build, self._COUNT_MEMO)

    # -- MarginalEvaluator interface --------------------------------------

    def value(self, seeds, metric: str) -> float:
        self._check_metric(metric)
        if metric == "profit":
            return self.value(seeds, "benefit") - self.value(seeds, "cost")
        coll = self._side(metric)
        if coll is None:
            return 0.0
        seeds = seeds if isinstance(seeds, frozenset) else frozenset(seeds)
        _check_nodes(coll, seeds)
        return self.rho(metric) * float(self._covered(metric, seeds).sum())

    def marginal(self, v, base, metric: str) -> float:
        self._check_metric(metric)
        v = int(v)
        if v in base:
            raise DomainError(f"node {v} already in the base set")
        if metric == "profit":
            return (self.marginal(v, base, "benefit")
                    - self.marginal(v, base, "cost"))
        coll = self._side(metric)
        if coll is None:
            return 0.0
        base = base if isinstance(base, frozenset) else frozenset(base)
        mask = self._covered(metric, base)
        idx = coll.index[v]
        return self.rho(metric) * float(np.count_nonzero(~mask[idx]))

    def marginal_many(self, nodes, base, metric: str) -> dict:
        self._check_metric(metric)
        if metric == "profit":
            b = self.marginal_many(nodes, base, "benefit")
            c = self.marginal_many(nodes, base, "cost")
            return {v: b[v] - c[v] for v in b}
        coll = self._side(metric)
        if coll is None:
            return {int(v): 0.0 for v in nodes}
        base = base if isinstance(base, frozenset) else frozenset(base)
        mask = self._covered(metric, base)
        rho = self.rho(metric)
        out = {}
        for v in nodes:
            v = int(v)
            out[v] = rho * float(np.count_nonzero(~mask[coll.index[v]]))
        return out

    def marginal_vs_rest(self, nodes, whole, metric: str) -> dict:
        self._check_metric(metric)
        if metric == "profit":
            b = self.marginal_vs_rest(nodes, whole, "benefit")
            c = self.marginal_vs_rest(nodes, whole, "cost")
            return {v: b[v] - c[v] for v in b}
        coll = self._side(metric)
        if coll is None:
            return {int(v): 0.0 for v in nodes}
        whole = whole if isinstance(whole, frozenset) else frozenset(whole)
        counts = self._member_counts(metric, whole)
        rho = self.rho(metric)
        out = {}
        for v in nodes:
            v = int(v)
            picked = counts[coll.index[v]]
            # inside `whole`, v's own membership is the single allowed hit
            want = 1 if v in whole else 0
            out[v] = rho * float(np.count_nonzero(picked == want))
        return out

    def chain_increments(self, order, metric: str) -> list:
        self._check_metric(metric)
        if metric == "profit":
            b = self.chain_increments(order, "benefit")
            c = self.chain_increments(order, "cost")
            return [x - y for x, y in zip(b, c)]
        coll = self._side(metric)
        if coll is None:
            return [0.0 for _ in order]
        mask = np.zeros(coll.theta, dtype=bool)
        rho = self.rho(metric)
        incs = []
        for v in order:
            idx = coll.index[int(v)]
            fresh = ~mask[idx]
            incs.append(rho * float(np.count_nonzero(fresh)))
            mask[idx] = True
        return incs

    def estimate(self, seeds):
        """(estimated benefit, estimated cost, estimated profit)."""
        b = self.value(seeds, "benefit")
        c = self.value(seeds, "cost")
        return b, c, b - c

    def coverage_counts(self, seeds):
        """(Lambda_beta, Lambda_gamma) coverage counts for the seed set."""
        lb = coverage(self.benefit_rr, seeds) if self.benefit_rr is not None else 0
        lc = coverage(self.cost_rr, seeds) if self.cost_rr is not None else 0
        return lb, lc


def estimate(estimator: ProfitEstimator, seeds):
    """(benefit, cost, profit) estimates for a seed set."""
    return estimator.estimate(seeds)


def save_collection(coll: RRCollection, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(coll.to_json_dict(), fh)


def load_collection(path) -> RRCollection:
    with open(path, "r", encoding="utf-8") as fh:
        return RRCollection.from_json_dict(json.load(fh))
