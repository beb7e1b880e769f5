"""Common query interface for benefit/cost/profit evaluators.

Pruning, seed selection and certification are written against this interface
so they run unchanged on the exact oracle (small graphs) and on the
reverse-reachable sampling estimator (any scale).  Subclasses must implement
``value``; the batched helpers have generic fallbacks that subclasses may
override with faster paths.
"""

from __future__ import annotations

from .errors import DomainError

METRICS = ("benefit", "cost", "profit")


class MarginalEvaluator:
    """Set-function queries over one graph's benefit and cost metrics."""

    node_count: int

    # -- required primitive ----------------------------------------------

    def value(self, seeds, metric: str) -> float:
        raise NotImplementedError

    # -- derived queries ---------------------------------------------------

    def benefit(self, seeds) -> float:
        return self.value(seeds, "benefit")

    def cost(self, seeds) -> float:
        return self.value(seeds, "cost")

    def profit(self, seeds) -> float:
        return self.value(seeds, "benefit") - self.value(seeds, "cost")

    def marginal(self, v, base, metric: str) -> float:
        """f(base + v) - f(base)."""
        self._check_metric(metric)
        if v in base:
            raise DomainError(f"node {v} already in the base set")
        if metric == "profit":
            return (self.marginal(v, base, "benefit")
                    - self.marginal(v, base, "cost"))
        base = frozenset(base)
        return self.value(base | {v}, metric) - self.value(base, metric)

    def marginal_many(self, nodes, base, metric: str) -> dict:
        """Marginals of several nodes against one fixed base set."""
        base = frozenset(base)
        return {v: self.marginal(v, base, metric) for v in nodes}

    def marginal_vs_rest(self, nodes, whole, metric: str) -> dict:
        """For each v, the marginal against whole minus v itself.

        This is the smallest marginal v can have inside ``whole`` under
        submodularity, so it doubles as a floor in lazy selection.
        """
        self._check_metric(metric)
        whole = frozenset(whole)
        out = {}
        for v in nodes:
            out[v] = self.marginal(v, whole - {v}, metric)
        return out

    def chain_increments(self, order, metric: str) -> list:
        """Increments f(first i items) - f(first i-1 items) along an ordering."""
        self._check_metric(metric)
        incs = []
        prefix = frozenset()
        prev = self.value(prefix, metric)
        for v in order:
            prefix = prefix | {v}
            cur = self.value(prefix, metric)
            incs.append(cur - prev)
            prev = cur
        return incs

    @staticmethod
    def _check_metric(metric):
        if metric not in METRICS:
            raise DomainError(f"unknown metric {metric!r}; expected one of {METRICS}")
