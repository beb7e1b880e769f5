"""Acceptance suite: one test per criterion, each printing a PASS line.

Run as ``pytest tests/test_acceptance.py -v -s``.
"""

import csv
import itertools
import math
import time

import numpy as np
import pytest

from profitmax import (ExactEvaluator, ProfitEstimator, WeightedGraph,
                       assign_weights, chernoff_a, confidence_bounds, coverage,
                       exhaustive_optimum, generate, greedy, iterative_prune,
                       k_sweep, make_permutation, modmod, modular_lower,
                       modular_upper, mu_bound, normalize_weights, project,
                       sampling_error_limit)
from profitmax.cli import CSV_COLUMNS
from profitmax.rng import derive_seed

from conftest import (DEMO_LOWER_MARGINS, DEMO_OPTIMUM, DEMO_OPTIMUM_PROFIT,
                      DEMO_UPPER_MARGINS, make_demo_graph, random_graph,
                      random_subset)

TOL = 1e-9


def report(criterion, message):
    print(f"ACCEPTANCE {criterion}: PASS - {message}")


@pytest.fixture(scope="module")
def demo_graph_m():
    return make_demo_graph()


@pytest.fixture(scope="module")
def demo_exact(demo_graph_m):
    ev = ExactEvaluator(demo_graph_m)
    return ev, iterative_prune(ev)


@pytest.fixture(scope="module")
def demo_estimator_1m(demo_graph_m):
    # one million RR sets per kind, fixed seed; shared by criteria 4 and 6
    return ProfitEstimator.build(demo_graph_m, 1_000_000, 1_000_000, seed=881)


@pytest.fixture(scope="module")
def demo_selections(demo_exact):
    ev, lat = demo_exact
    return {
        "greedy": greedy(ev, lat),
        "modmod1": modmod(ev, lat, gamma_bound_variant=3),
        "modmod2": modmod(ev, lat, gamma_bound_variant=4),
    }


def test_criterion_1_fixture_prune_trace(demo_exact):
    start = time.perf_counter()
    ev, lat = demo_exact
    assert lat.must_include == {2}
    assert lat.may_include == {0, 1, 2}
    computed = lat.iterations[1:]
    assert len(computed) == 3
    values_checked = 0
    for step, lower, upper in zip(computed, DEMO_LOWER_MARGINS, DEMO_UPPER_MARGINS):
        assert set(step.lower_margin) == set(lower)
        assert set(step.upper_margin) == set(upper)
        for v, expected in lower.items():
            assert abs(step.lower_margin[v] - expected) <= TOL
            values_checked += 1
        for v, expected in upper.items():
            assert abs(step.upper_margin[v] - expected) <= TOL
            values_checked += 1
    assert values_checked == 18
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report(1, f"all 18 pruning margins reproduced, lattice ({{2}}, {{0,1,2}}), "
              f"{elapsed:.3f}s")


def test_criterion_2_fixture_optimization(demo_exact, demo_selections):
    ev, _ = demo_exact
    for name, result in demo_selections.items():
        assert result.seeds == DEMO_OPTIMUM, name
        assert abs(result.estimated_profit - DEMO_OPTIMUM_PROFIT) <= TOL, name
    chain = [ev.profit({1, 3}), ev.profit({1, 2, 3}), ev.profit(DEMO_OPTIMUM)]
    assert abs(chain[0] - (-2.0)) <= TOL
    assert abs(chain[1] - 0.0) <= TOL
    assert abs(chain[2] - 1.68) <= TOL
    assert chain[0] < chain[1] < chain[2]
    report(2, "greedy/modmod1/modmod2 all return nodes {1,2} at phi=1.68; "
              "projection chain -2 < 0 < 1.68 exact")


def _check_sandwich(ev, lat, X, subsets, values):
    for metric in ("benefit", "cost"):
        bounds = {v: modular_upper(ev, metric, X, v, lat) for v in (1, 2, 3, 4)}
        pi = make_permutation(lat, X, ev)
        floor = modular_lower(ev, metric, X, pi, lat)
        fx = values[(metric, X)]
        for variant in (1, 2, 3, 4):
            assert abs(bounds[variant].evaluate(X) - fx) <= TOL
        assert abs(floor.evaluate(X) - fx) <= TOL
        for Y in subsets:
            f = values[(metric, Y)]
            assert bounds[1].evaluate(Y) >= bounds[3].evaluate(Y) - TOL
            assert bounds[3].evaluate(Y) >= f - TOL
            assert bounds[2].evaluate(Y) >= bounds[4].evaluate(Y) - TOL
            assert bounds[4].evaluate(Y) >= f - TOL
            assert floor.evaluate(Y) <= f + TOL


def test_criterion_3_theorem_property_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(30_000)
    outside_checked = 0
    for _ in range(200):
        g = random_graph(rng, max_nodes=7, max_edges=12)
        n = g.node_count
        ev = ExactEvaluator(g)
        lat = iterative_prune(ev)
        steps = lat.iterations

        # projection chain: profit never drops, strictly rises on a move
        for _ in range(3):
            s = random_subset(rng, n)
            current = s & steps[0].may_include | steps[0].must_include
            value = ev.profit(current)
            for step in steps[1:]:
                nxt = s & step.may_include | step.must_include
                nxt_value = ev.profit(nxt)
                assert nxt_value >= value - TOL
                if nxt != current:
                    assert nxt_value > value
                current, value = nxt, nxt_value

        # strict gain for any set outside the lattice
        for _ in range(3):
            s = random_subset(rng, n)
            if not lat.contains(s):
                outside_checked += 1
                assert ev.profit(project(s, lat)) > ev.profit(s)

        # every profit-maximal set sits inside the lattice
        best_set, best_value = exhaustive_optimum(g)
        assert lat.contains(best_set)
        for mask in range(1 << n):
            subset = frozenset(v for v in range(n) if mask >> v & 1)
            if ev.profit(subset) >= best_value - TOL:
                assert lat.contains(subset)

        # normalized pruning nests inside raw pruning
        lat_norm = iterative_prune(ExactEvaluator(normalize_weights(g)))
        assert lat.must_include <= lat_norm.must_include
        assert lat_norm.must_include <= lat_norm.may_include
        assert lat_norm.may_include <= lat.may_include

        # profit caps dominate the brute-force optimum; bounds sandwich f
        free = sorted(lat.free_nodes)
        anchors = [lat.must_include, lat.may_include,
                   lat.must_include | {v for v in free if rng.random() < 0.5}]
        subsets = [frozenset(lat.must_include) | frozenset(extra)
                   for r in range(len(free) + 1)
                   for extra in itertools.combinations(free, r)]
        values = {(m, Y): ev.value(Y, m)
                  for m in ("benefit", "cost")
                  for Y in set(subsets) | {frozenset(a) for a in anchors}}
        for X in anchors:
            X = frozenset(X)
            assert mu_bound(ev, X, lat, variant=3) >= best_value - TOL
            assert mu_bound(ev, X, lat, variant=4) >= best_value - TOL
        _check_sandwich(ev, lat, frozenset(anchors[2]), subsets, values)
    elapsed = time.perf_counter() - start
    assert outside_checked >= 100
    assert elapsed < 300.0
    report(3, f"200 random graphs, zero violations across pruning chain, "
              f"projection, optimum containment, normalization nesting, "
              f"profit caps and bound sandwich ({elapsed:.1f}s)")


def test_criterion_4_estimator_accuracy(demo_estimator_1m):
    start = time.perf_counter()
    b, c, p = demo_estimator_1m.estimate(DEMO_OPTIMUM)
    assert abs(b - 5.88) / 5.88 <= 0.01
    assert abs(c - 4.20) / 4.20 <= 0.01
    assert abs(p - 1.68) / 1.68 <= 0.01
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report(4, f"theta=10^6 estimates ({b:.4f}, {c:.4f}, {p:.4f}) all within 1% "
              f"of (5.88, 4.20, 1.68)")


def test_criterion_5_confidence_coverage(demo_graph_m):
    runs = 1000
    theta = 10_000
    delta = 0.05
    exact_benefit = 5.88
    upsilon = demo_graph_m.totals().upsilon_b
    hits = 0
    for i in range(runs):
        coll = generate(demo_graph_m, "benefit", theta,
                        seed=derive_seed(555, "coverage", i))
        lam = coverage(coll, DEMO_OPTIMUM)
        lower, upper = confidence_bounds(lam, theta, upsilon, delta)
        hits += lower <= exact_benefit <= upper
    # one-sided exact binomial test at significance 0.001: reject only if
    # P[Bin(runs, 0.95) <= hits] < 0.001
    p = 1.0 - delta
    cdf = sum(math.comb(runs, k) * p ** k * (1 - p) ** (runs - k)
              for k in range(hits + 1))
    assert hits / runs >= 1.0 - delta or cdf >= 0.001
    report(5, f"coverage {hits}/{runs} at theta=10^4, delta=0.05 "
              f"(binomial test not rejected at 0.001)")


def test_criterion_6_ascent_and_termination(demo_exact, demo_selections,
                                            demo_estimator_1m):
    checked_runs = 0
    ev, lat = demo_exact
    est_lat = iterative_prune(demo_estimator_1m)
    for evaluator, lattice in ((ev, lat), (demo_estimator_1m, est_lat)):
        runs = {
            "greedy": greedy(evaluator, lattice),
            "modmod1": modmod(evaluator, lattice, gamma_bound_variant=3),
            "modmod2": modmod(evaluator, lattice, gamma_bound_variant=4),
        }
        if evaluator is ev:
            for name in runs:
                assert runs[name].seeds == demo_selections[name].seeds
        for name in ("modmod1", "modmod2"):
            profits = [t["profit"] for t in runs[name].trajectory]
            assert all(b >= a - TOL for a, b in zip(profits, profits[1:]))
            checked_runs += 1
        result = runs["greedy"]
        for v in lattice.may_include - result.seeds:
            assert evaluator.marginal(v, result.seeds, "profit") <= TOL
        for r in runs.values():
            assert lattice.must_include <= r.seeds <= lattice.may_include
        checked_runs += 1
    report(6, f"modmod trajectories nondecreasing and greedy stops with all "
              f"marginals <= 0 on exact and theta=10^6 evaluators "
              f"({checked_runs} runs)")


def test_criterion_7_normalization_dominance():
    rng = np.random.default_rng(70_000)
    theta = 10_000
    delta = 1e-3
    for _ in range(50):
        g = random_graph(rng, max_nodes=7, max_edges=12)
        gn = normalize_weights(g)
        ev, evn = ExactEvaluator(g), ExactEvaluator(gn)
        tot, totn = g.totals(), gn.totals()
        for _ in range(4):
            s = random_subset(rng, g.node_count)
            raw = (sampling_error_limit(tot.upsilon_b, ev.benefit(s), theta, delta)
                   + sampling_error_limit(tot.upsilon_c, ev.cost(s), theta, delta))
            norm = (sampling_error_limit(totn.upsilon_b, evn.benefit(s), theta, delta)
                    + sampling_error_limit(totn.upsilon_c, evn.cost(s), theta, delta))
            assert norm <= raw + TOL
        lat = iterative_prune(ev)
        lat_norm = iterative_prune(evn)
        n = g.node_count
        assert lat_norm.reduction(n) >= lat.reduction(n) - TOL
    report(7, "50 random graphs: normalized error limits never exceed raw, "
              "normalized pruning never reduces less")


def _synthetic_graph(rng: np.random.Generator, n: int = 1000,
                     m: int = 4000) -> WeightedGraph:
    edges = set()
    while len(edges) < m:
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u != v:
            edges.add((u, v))
    in_deg = np.zeros(n, dtype=np.int64)
    for _, v in edges:
        in_deg[v] += 1
    edge_list = [(u, v, 1.0 / in_deg[v]) for u, v in sorted(edges)]
    g = WeightedGraph(n, edge_list)
    return assign_weights(g, "uniform", "degree", r=1.0)


def test_criterion_8_desk_scale_directional(tmp_path):
    start = time.perf_counter()
    runs = 20
    theta = 20_000
    wins = 0
    rows = []
    for run in range(runs):
        rng = np.random.default_rng(derive_seed(888, "synthetic", run))
        g = normalize_weights(_synthetic_graph(rng))
        selection = ProfitEstimator.build(g, theta, theta,
                                          seed=derive_seed(888, "select", run))
        validation = ProfitEstimator.build(g, theta, theta,
                                           seed=derive_seed(888, "validate", run))
        lat = iterative_prune(selection)
        heuristics = {
            "greedy": greedy(selection, lat),
            "modmod1": modmod(selection, lat, gamma_bound_variant=3),
            "modmod2": modmod(selection, lat, gamma_bound_variant=4),
        }
        baselines = {
            kind: k_sweep(kind, g, selection, seed=derive_seed(888, kind, run))
            for kind in ("random", "highdegree", "benefitmax")
        }
        heuristic_profits = {n: validation.profit(r.seeds)
                             for n, r in heuristics.items()}
        baseline_profits = {n: validation.profit(r.seeds)
                            for n, r in baselines.items()}
        # directional family comparison: the heuristics' best result versus
        # the strongest baseline at its best swept k
        if max(heuristic_profits.values()) >= max(baseline_profits.values()):
            wins += 1
        for name, result in {**heuristics, **baselines}.items():
            profit = heuristic_profits.get(name, baseline_profits.get(name))
            rows.append({
                "dataset": f"synthetic-{run}", "algo": name, "theta": theta,
                "prune": int(name in heuristics), "norm": 1,
                "seeds_count": len(result.seeds), "profit": f"{profit:.6g}",
                "guarantee": "", "time_select_ms": 0, "time_rr_ms": 0,
                "seed": 888,
            })
    artifact = tmp_path / "desk_scale_runs.csv"
    with open(artifact, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    elapsed = time.perf_counter() - start
    assert wins >= 18, f"heuristics beat every baseline in only {wins}/20 runs"
    assert elapsed < 600.0
    report(8, f"full-dataset results intentionally not reproduced; "
              f"1000-node directional check passed {wins}/20 runs in "
              f"{elapsed:.0f}s, artifact at {artifact}")
