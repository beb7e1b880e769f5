"""Seed selection inside the pruned lattice.

Two heuristics search the lattice [A*, B*]:

* greedy hill climbing on the profit marginal, stopping when no candidate
  improves;
* modular-modular iteration, which replaces the benefit by a modular lower
  bound and the cost by a modular upper bound, both tight at the incumbent,
  and jumps to the exact maximizer of their difference.

The modular bound constructors are shared with certification, which pairs
them the other way around (benefit upper bound, cost lower bound) to cap the
maximum achievable profit.  Three reference baselines mirror the usual
influence-maximization toolkit: random seeds, top degree, and top coverage of
the benefit collection.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import DomainError, InternalError
from .evaluation import MarginalEvaluator
from .graph import WeightedGraph
from .prune import Lattice
from .rng import derive_seed, make_rng

BASELINES = ("random", "highdegree", "benefitmax")
RANDOM_BASELINE_DRAWS = 10


@dataclass(frozen=True)
class ModularFunction:
    """Additive set function: value(Y) = base + sum of per_node over Y.

    ``per_node`` is defined on the lattice ceiling it was built for;
    evaluating outside that domain raises.
    """

    base: float
    per_node: dict

    def evaluate(self, seeds) -> float:
        try:
            return self.base + sum(self.per_node[v] for v in seeds)
        except KeyError as missing:
            raise DomainError(f"node {missing.args[0]} outside the bound's domain") from None


@dataclass
class SelectionResult:
    """A selected seed set with its estimate and the path that produced it."""

    algorithm: str
    params: dict
    seeds: frozenset
    estimated_profit: float
    trajectory: list = field(default_factory=list)

    def to_json_dict(self, g: WeightedGraph = None) -> dict:
        conv = (lambda v: g.external_id(v)) if g is not None else int

        def convert_step(step):
            out = dict(step)
            if "added" in out:
                out["added"] = conv(out["added"])
            if "seeds" in out:
                out["seeds"] = sorted(conv(v) for v in out["seeds"])
            return out

        return {
            "algorithm": self.algorithm,
            "params": self.params,
            "seeds": sorted(conv(v) for v in self.seeds),
            "estimated_profit": self.estimated_profit,
            "trajectory": [convert_step(s) for s in self.trajectory],
        }


def _require_lattice_member(X, lat: Lattice, what: str) -> frozenset:
    X = frozenset(X)
    if not lat.contains(X):
        raise DomainError(f"{what} must lie inside the lattice [A*, B*]")
    return X


def modular_upper(evaluator: MarginalEvaluator, metric: str, X, variant: int,
                  lat: Lattice) -> ModularFunction:
    """Modular upper bound on a submodular metric, tight at X.

    Four variants differ in which base sets anchor the per-node marginals;
    all bound f from above on the lattice and agree with f at X:

        1: inside X use f(v | V - v),  outside use f(v | X)
        2: inside X use f(v | X - v),  outside use f(v | empty)
        3: inside X use f(v | B* - v), outside use f(v | X)
        4: inside X use f(v | X - v),  outside use f(v | A*)

    Variants 3 and 4 sharpen 1 and 2 by exploiting that only lattice sets
    matter; they require A* <= X <= B*.
    """
    if variant not in (1, 2, 3, 4):
        raise DomainError(f"unknown modular upper bound variant {variant}")
    X = frozenset(X)
    if variant in (3, 4):
        X = _require_lattice_member(X, lat, "X")
    elif not X <= lat.may_include:
        raise DomainError("X must lie inside the lattice ceiling")
    inside = sorted(X)
    outside = sorted(lat.may_include - X)

    if variant == 1:
        universe = frozenset(range(evaluator.node_count))
        in_vals = evaluator.marginal_vs_rest(inside, universe, metric)
        out_vals = evaluator.marginal_many(outside, X, metric)
    elif variant == 2:
        in_vals = evaluator.marginal_vs_rest(inside, X, metric)
        out_vals = evaluator.marginal_many(outside, frozenset(), metric)
    elif variant == 3:
        in_vals = evaluator.marginal_vs_rest(inside, lat.may_include, metric)
        out_vals = evaluator.marginal_many(outside, X, metric)
    else:
        in_vals = evaluator.marginal_vs_rest(inside, X, metric)
        out_vals = evaluator.marginal_many(outside, lat.must_include, metric)

    per_node = {}
    per_node.update(in_vals)
    per_node.update(out_vals)
    base = evaluator.value(X, metric) - sum(in_vals[v] for v in inside)
    return ModularFunction(base=base, per_node=per_node)


def make_permutation(lat: Lattice, X, evaluator: MarginalEvaluator,
                     policy: str = "marginal", seed: int = 0) -> list:
    """Ordering of B* in blocks A*, X - A*, B* - X.

    Within each block, the ``marginal`` policy sorts by descending singleton
    profit (ties by id, for reproducibility), so promising nodes sit early in
    the chain and collect the larger increments; the ``random`` policy
    shuffles with the given seed.  Any ordering that respects the blocks
    yields valid bounds, only their tightness away from X differs.
    """
    X = _require_lattice_member(X, lat, "X")
    blocks = [sorted(lat.must_include), sorted(X - lat.must_include),
              sorted(lat.may_include - X)]
    if policy == "random":
        rng = make_rng(derive_seed(int(seed), "permutation"))
        out = []
        for block in blocks:
            block = list(block)
            rng.shuffle(block)
            out.extend(int(v) for v in block)
        return out
    if policy != "marginal":
        raise DomainError(f"unknown permutation policy {policy!r}")
    singleton = evaluator.marginal_many(
        sorted(lat.may_include), frozenset(), "profit")
    out = []
    for block in blocks:
        out.extend(sorted(block, key=lambda v: (-singleton[v], v)))
    return out


def modular_lower(evaluator: MarginalEvaluator, metric: str, X, pi,
                  lat: Lattice) -> ModularFunction:
    """Modular lower bound on a submodular metric, tight at X.

    ``pi`` must order all of B* with the nodes of A* first, then X - A*,
    then B* - X.  Node pi(i) contributes the increment of f along that
    prefix chain; the telescoping sum makes the bound exact at X, and
    submodularity makes it a lower bound everywhere on the lattice.
    """
    X = _require_lattice_member(X, lat, "X")
    pi = [int(v) for v in pi]
    if len(pi) != len(set(pi)) or set(pi) != set(lat.may_include):
        raise DomainError("permutation must cover the lattice ceiling exactly once")
    k1, k2 = len(lat.must_include), len(X)
    if (set(pi[:k1]) != set(lat.must_include)
            or set(pi[:k2]) != set(X)):
        raise DomainError("permutation must order A*, then X - A*, then B* - X")
    incs = evaluator.chain_increments(pi, metric)
    return ModularFunction(base=0.0, per_node=dict(zip(pi, incs)))


def maximize_modular_difference(pos: ModularFunction, neg: ModularFunction,
                                lat: Lattice) -> frozenset:
    """Arg max over the lattice of pos(Y) - neg(Y).

    Both functions are additive, so the maximizer is A* plus every free node
    whose per-node difference is strictly positive; exact zeros stay out.
    """
    chosen = set(lat.must_include)
    for v in lat.free_nodes:
        if pos.per_node[v] - neg.per_node[v] > 0.0:
            chosen.add(v)
    return frozenset(chosen)


def greedy(evaluator: MarginalEvaluator, lat: Lattice, lazy: bool = True) -> SelectionResult:
    """Hill-climb the profit marginal from A* within B*.

    Each round adds the candidate with the largest marginal profit (ties by
    smallest id) and stops as soon as the best marginal is not positive.
    The lazy path keeps a priority queue of upper bounds
    benefit(v | S) - cost(v | B* - v): the benefit term only shrinks as S
    grows and the cost term is the smallest the cost marginal can get inside
    the lattice, so stale keys never underestimate and candidates whose
    bound falls below the incumbent champion need no re-evaluation.
    """
    seeds = set(lat.must_include)
    trajectory = []
    candidates = sorted(lat.free_nodes)
    if candidates:
        if lazy:
            cost_floor = evaluator.marginal_vs_rest(candidates, lat.may_include, "cost")
            first_benefit = evaluator.marginal_many(candidates, frozenset(seeds), "benefit")
            heap = [(-(first_benefit[v] - cost_floor[v]), v) for v in candidates]
            heapq.heapify(heap)
            while heap:
                base = frozenset(seeds)
                champion, champion_gain = None, 0.0
                round_entries = []
                while heap:
                    neg_bound, v = heap[0]
                    if champion is not None and champion_gain > -neg_bound:
                        break
                    if champion is None and -neg_bound <= 0.0:
                        break
                    heapq.heappop(heap)
                    gain_b = evaluator.marginal(v, base, "benefit")
                    gain = gain_b - evaluator.marginal(v, base, "cost")
                    round_entries.append((-(gain_b - cost_floor[v]), v))
                    if gain > champion_gain or (gain == champion_gain
                                                and champion is not None and v < champion
                                                and gain > 0.0):
                        champion, champion_gain = v, gain
                if champion is None or champion_gain <= 0.0:
                    break
                seeds.add(champion)
                trajectory.append({"added": champion, "marginal": champion_gain,
                                   "profit": evaluator.profit(seeds)})
                for entry in round_entries:
                    if entry[1] != champion:
                        heapq.heappush(heap, entry)
        else:
            remaining = set(candidates)
            while remaining:
                base = frozenset(seeds)
                gains = evaluator.marginal_many(sorted(remaining), base, "profit")
                champion = min(gains, key=lambda v: (-gains[v], v))
                if gains[champion] <= 0.0:
                    break
                seeds.add(champion)
                remaining.discard(champion)
                trajectory.append({"added": champion, "marginal": gains[champion],
                                   "profit": evaluator.profit(seeds)})
    result = frozenset(seeds)
    return SelectionResult(algorithm="greedy", params={"lazy": lazy},
                           seeds=result,
                           estimated_profit=evaluator.profit(result),
                           trajectory=trajectory)


def modmod(evaluator: MarginalEvaluator, lat: Lattice, gamma_bound_variant: int = 3,
           pi_policy: str = "marginal", seed: int = 0,
           max_iterations: int = None) -> SelectionResult:
    """Modular-modular iteration from A* to a profit fixpoint.

    Round t bounds the profit from below by h(Y; benefit) - m(Y; cost), both
    tight at the incumbent X_t, and moves to the exact maximizer of that
    modular difference.  Tightness at X_t forces the true profit never to
    drop; the loop ends when the incumbent repeats.  ``gamma_bound_variant``
    picks the cost upper bound (3 or 4), matching the two flavors reported
    by the selection harness.
    """
    if gamma_bound_variant not in (3, 4):
        raise DomainError(f"gamma bound variant must be 3 or 4, got {gamma_bound_variant}")
    incumbent = frozenset(lat.must_include)
    cap = max_iterations if max_iterations is not None else 100 * max(1, len(lat.free_nodes))
    trajectory = [{"seeds": sorted(incumbent), "profit": evaluator.profit(incumbent)}]
    for round_no in range(cap):
        pi = make_permutation(lat, incumbent, evaluator, policy=pi_policy,
                              seed=derive_seed(int(seed), "pi", round_no))
        benefit_floor = modular_lower(evaluator, "benefit", incumbent, pi, lat)
        cost_ceiling = modular_upper(evaluator, "cost", incumbent,
                                     gamma_bound_variant, lat)
        nxt = maximize_modular_difference(benefit_floor, cost_ceiling, lat)
        if nxt == incumbent:
            name = "modmod1" if gamma_bound_variant == 3 else "modmod2"
            return SelectionResult(
                algorithm=name,
                params={"gamma_bound_variant": gamma_bound_variant,
                        "pi_policy": pi_policy, "seed": int(seed)},
                seeds=incumbent,
                estimated_profit=evaluator.profit(incumbent),
                trajectory=trajectory)
        incumbent = nxt
        trajectory.append({"seeds": sorted(incumbent),
                           "profit": evaluator.profit(incumbent)})
    raise InternalError("modular-modular iteration did not converge; "
                        "the evaluator is inconsistent")


def baseline(kind: str, g: WeightedGraph, k: int, evaluator: MarginalEvaluator,
             seed: int) -> SelectionResult:
    """Reference selectors that ignore the cost side of the objective.

    random averages its reported profit over a fixed number of fresh draws;
    highdegree takes the top out-degrees; benefitmax runs coverage greedy on
    the benefit estimates for k rounds.
    """
    if kind not in BASELINES:
        raise DomainError(f"unknown baseline {kind!r}; expected one of {BASELINES}")
    k = int(k)
    if not (1 <= k <= g.node_count):
        raise DomainError(f"k must lie in 1..{g.node_count}, got {k}")

    if kind == "random":
        rng = make_rng(derive_seed(int(seed), "baseline", "random", k))
        draws = [frozenset(rng.choice(g.node_count, size=k, replace=False).tolist())
                 for _ in range(RANDOM_BASELINE_DRAWS)]
        profits = [evaluator.profit(s) for s in draws]
        mean_profit = sum(profits) / len(profits)
        return SelectionResult(
            algorithm="random",
            params={"k": k, "draws": RANDOM_BASELINE_DRAWS, "seed": int(seed)},
            seeds=draws[0], estimated_profit=mean_profit,
            trajectory=[{"draw": i, "profit": p} for i, p in enumerate(profits)])

    if kind == "highdegree":
        order = sorted(range(g.node_count), key=lambda v: (-int(g.out_degree[v]), v))
        seeds = frozenset(order[:k])
        return SelectionResult(algorithm="highdegree", params={"k": k},
                               seeds=seeds,
                               estimated_profit=evaluator.profit(seeds),
                               trajectory=[])

    seeds = set()
    trajectory = []
    for _ in range(k):
        pool = sorted(v for v in range(g.node_count) if v not in seeds)
        gains = evaluator.marginal_many(pool, frozenset(seeds), "benefit")
        best = min(gains, key=lambda v: (-gains[v], v))
        seeds.add(best)
        trajectory.append({"added": best, "marginal": gains[best]})
    seeds = frozenset(seeds)
    return SelectionResult(algorithm="benefitmax", params={"k": k},
                           seeds=seeds,
                           estimated_profit=evaluator.profit(seeds),
                           trajectory=trajectory)


def sweep_sizes(node_count: int) -> list:
    """Deduplicated k values ceil(n / 2^i) for i = 0..10, largest first."""
    if node_count < 1:
        raise DomainError("k sweep needs at least one node")
    sizes = []
    for i in range(11):
        k = -(-node_count // (1 << i))
        if k not in sizes:
            sizes.append(k)
    return sizes


def k_sweep(kind: str, g: WeightedGraph, evaluator: MarginalEvaluator,
            seed: int = 0) -> SelectionResult:
    """Run a baseline across the k schedule and keep its best profit.

    Ties keep the first (largest) k.
    """
    best = None
    swept = []
    for k in sweep_sizes(g.node_count):
        result = baseline(kind, g, k, evaluator, seed)
        swept.append({"k": k, "profit": result.estimated_profit})
        if best is None or result.estimated_profit > best.estimated_profit:
            best = result
    best.params = dict(best.params, swept=swept)
    return best
