"""Command-line harness: dataset preparation and end-to-end runs.

Subcommands:

    gen-weights   write a weights file from distribution policies
    prune         reduce the search space, emit the lattice and a summary row
    select        run selection algorithms, emit seeds files and CSV rows
    certify       certify a seeds file, emit certificate JSON and a CSV row
    experiment    cross-product sweep (theta x algorithm x pruning x
                  normalization), one CSV

Exit codes: 0 success, 2 configuration or input error, 3 I/O error,
4 capacity error, 5 internal invariant violation.

Every output embeds the master seed and a hash of the resolved
configuration; re-running a command with the same inputs reproduces every
non-timing field bit for bit.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .certify import certify as certify_seeds
from .errors import (CapacityError, ConfigError, DomainError, InternalError,
                     ParseError)
from .graph import WeightedGraph, assign_weights, load_edge_list, normalize_weights, save_weights
from .optimize import BASELINES, SelectionResult, greedy, k_sweep, modmod
from .oracle import ExactEvaluator
from .prune import Lattice, iterative_prune, trivial_lattice
from .rng import derive_seed
from .rrsets import ProfitEstimator

THETA_BASE = 10_000
CSV_COLUMNS = ("dataset", "algo", "theta", "prune", "norm", "seeds_count",
               "profit", "guarantee", "time_select_ms", "time_rr_ms", "seed")
CSV_VERSION = "v1"
HEURISTICS = ("greedy", "modmod1", "modmod2")
ALGORITHMS = HEURISTICS + BASELINES


@dataclass
class RunConfig:
    """Resolved configuration of one harness invocation."""

    graph: str = None
    weights: str = None
    benefit_dist: str = "uniform"
    cost_dist: str = "degree"
    r: float = 1.0
    default_prob: str = "wic"
    model: str = "ic"
    theta_exp: list = field(default_factory=lambda: [6])
    theta: list = None
    validation_theta: int = None
    algo: list = field(default_factory=lambda: ["greedy"])
    delta: float = 1e-6
    seed: int = 0
    normalize: bool = True
    prune: bool = True
    exact: bool = False
    jobs: int = 1
    out: str = None
    out_dir: str = "."
    csv: str = None
    lattice: str = None
    seeds: str = None

    def thetas(self) -> list:
        if self.theta:
            return [int(t) for t in self.theta]
        return [(1 << int(i)) * THETA_BASE for i in self.theta_exp]

    def validate(self) -> None:
        if self.graph is None:
            raise ConfigError("field 'graph': a graph file is required")
        if self.model != "ic":
            raise ConfigError(f"field 'model': only 'ic' is supported, got {self.model!r}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"field 'delta': must lie in (0,1), got {self.delta}")
        if self.r <= 0:
            raise ConfigError(f"field 'r': must be positive, got {self.r}")
        if self.jobs < 1:
            raise ConfigError(f"field 'jobs': must be at least 1, got {self.jobs}")
        for name in self.algo:
            if name not in ALGORITHMS:
                raise ConfigError(f"field 'algo': unknown algorithm {name!r}; "
                                  f"expected one of {ALGORITHMS}")
        for t in self.thetas():
            if t < 1:
                raise ConfigError("field 'theta': counts must be at least 1")
        if self.validation_theta is not None and self.validation_theta < 1:
            raise ConfigError("field 'validation_theta': must be at least 1")

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


# -- configuration resolution ----------------------------------------------

_BOOL_WORDS = {"true": True, "yes": True, "1": True,
               "false": False, "no": False, "0": False}

_LIST_KEYS = {"theta_exp", "theta", "algo"}
_INT_KEYS = {"validation_theta", "seed", "jobs"}
_FLOAT_KEYS = {"r", "delta"}
_FLAG_KEYS = {"normalize", "prune", "exact"}


def _parse_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if key in ("no_norm", "no_prune"):
                flag = _BOOL_WORDS.get(value.lower())
                if flag is None:
                    raise ConfigError(f"{path}:{lineno}: boolean expected")
                values["normalize" if key == "no_norm" else "prune"] = not flag
                continue
            if not hasattr(RunConfig(), key):
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _FLAG_KEYS:
                flag = _BOOL_WORDS.get(value.lower())
                if flag is None:
                    raise ConfigError(f"{path}:{lineno}: boolean expected for {key}")
                values[key] = flag
            elif key in _LIST_KEYS:
                parts = [p for p in value.replace(",", " ").split() if p]
                values[key] = [int(p) for p in parts] if key != "algo" else parts
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                values[key] = value
    return values


def _int_list(text):
    return [int(p) for p in text.replace(",", " ").split() if p]


def _name_list(text):
    return [p for p in text.replace(",", " ").split() if p]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="profitmax",
        description="Profit-driven seed selection in directed social graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--graph", help="edge-list file")
        p.add_argument("--weights", help="explicit 'v b c' weights file")
        p.add_argument("--benefit-dist", dest="benefit_dist",
                       choices=["uniform", "degree"])
        p.add_argument("--cost-dist", dest="cost_dist",
                       choices=["uniform", "degree"])
        p.add_argument("--r", type=float)
        p.add_argument("--default-prob", dest="default_prob")
        p.add_argument("--model")
        p.add_argument("--theta-exp", dest="theta_exp", type=_int_list,
                       help="exponents i; theta = 2^i * 10000 (comma separated)")
        p.add_argument("--theta", type=_int_list,
                       help="explicit sample counts (overrides --theta-exp)")
        p.add_argument("--validation-theta", dest="validation_theta", type=int)
        p.add_argument("--algo", type=_name_list,
                       help="comma separated algorithm names")
        p.add_argument("--delta", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--no-norm", dest="no_norm", action="store_true",
                       help="skip weight normalization")
        p.add_argument("--no-prune", dest="no_prune", action="store_true",
                       help="skip search-space pruning")
        p.add_argument("--exact", action="store_true",
                       help="use the exact oracle instead of sampling (small graphs)")
        p.add_argument("--jobs", type=int)
        p.add_argument("--out")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--csv")

    for name, fn in (("gen-weights", cmd_gen_weights), ("prune", cmd_prune),
                     ("select", cmd_select), ("experiment", cmd_experiment)):
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("certify")
    common(p)
    p.add_argument("--seeds", help="seeds JSON produced by select")
    p.add_argument("--lattice", help="lattice JSON produced by prune")
    p.set_defaults(func=cmd_certify)
    return parser


def _resolve_config(args) -> RunConfig:
    file_values = _parse_config_file(args.config) if args.config else {}
    cfg = RunConfig()
    for key, value in file_values.items():
        setattr(cfg, key, value)
    for key in vars(cfg):
        cli_value = getattr(args, key, None)
        if cli_value is not None and not (key in _FLAG_KEYS and cli_value is False):
            setattr(cfg, key, cli_value)
    if getattr(args, "no_norm", False):
        cfg.normalize = False
    if getattr(args, "no_prune", False):
        cfg.prune = False
    if getattr(args, "exact", False):
        cfg.exact = True
    cfg.validate()
    return cfg


# -- shared pipeline pieces --------------------------------------------------


def _load_weighted_graph(cfg: RunConfig) -> WeightedGraph:
    default_prob = cfg.default_prob
    if default_prob != "wic":
        default_prob = float(default_prob)
    g = load_edge_list(cfg.graph, default_prob=default_prob)
    return assign_weights(g, benefit_dist=cfg.benefit_dist, cost_dist=cfg.cost_dist,
                          r=cfg.r, weights_path=cfg.weights)


def _graph_view(g: WeightedGraph, normalize: bool) -> WeightedGraph:
    return normalize_weights(g) if normalize else g


def _selection_evaluator(cfg: RunConfig, g_view: WeightedGraph, theta: int,
                         norm: bool):
    """(evaluator, rr generation time in ms)."""
    if cfg.exact:
        return ExactEvaluator(g_view), 0
    start = time.perf_counter()
    est = ProfitEstimator.build(
        g_view, theta, theta,
        seed=derive_seed(cfg.seed, "selection", theta, int(norm)))
    return est, int((time.perf_counter() - start) * 1000)


def _validation_evaluator(cfg: RunConfig, g_view: WeightedGraph, theta: int,
                          norm: bool):
    if cfg.exact:
        return ExactEvaluator(g_view)
    vtheta = cfg.validation_theta or theta
    return ProfitEstimator.build(
        g_view, vtheta, vtheta,
        seed=derive_seed(cfg.seed, "cli-validation", vtheta, int(norm)))


def _run_algorithm(name: str, g_view: WeightedGraph, evaluator, lattice: Lattice,
                   cfg: RunConfig) -> SelectionResult:
    if name == "greedy":
        return greedy(evaluator, lattice)
    if name == "modmod1":
        return modmod(evaluator, lattice, gamma_bound_variant=3,
                      seed=derive_seed(cfg.seed, "modmod1"))
    if name == "modmod2":
        return modmod(evaluator, lattice, gamma_bound_variant=4,
                      seed=derive_seed(cfg.seed, "modmod2"))
    return k_sweep(name, g_view, evaluator, seed=derive_seed(cfg.seed, "baseline", name))


def _format_float(x) -> str:
    if x is None:
        return ""
    return f"{x:.10g}"


def _write_csv(rows, cfg: RunConfig, path) -> None:
    lines = [f"# profitmax-csv {CSV_VERSION} config={cfg.config_hash()} seed={cfg.seed}",
             ",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in CSV_COLUMNS))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _row(cfg: RunConfig, algo: str, theta: int, prune_on: bool, norm_on: bool,
         result: SelectionResult, profit, guarantee, select_ms: int,
         rr_ms: int) -> dict:
    return {
        "dataset": Path(cfg.graph).stem,
        "algo": algo,
        "theta": theta,
        "prune": int(prune_on),
        "norm": int(norm_on),
        "seeds_count": len(result.seeds),
        "profit": _format_float(profit),
        "guarantee": _format_float(guarantee),
        "time_select_ms": select_ms,
        "time_rr_ms": rr_ms,
        "seed": cfg.seed,
    }


# -- subcommands -------------------------------------------------------------


def cmd_gen_weights(args) -> int:
    cfg = _resolve_config(args)
    if cfg.out is None:
        raise ConfigError("field 'out': gen-weights needs an output path")
    g = _load_weighted_graph(cfg)
    save_weights(g, cfg.out)
    print(f"wrote weights for {g.node_count} nodes to {cfg.out}")
    return 0


def cmd_prune(args) -> int:
    cfg = _resolve_config(args)
    g = _graph_view(_load_weighted_graph(cfg), cfg.normalize)
    theta = cfg.thetas()[0]
    evaluator, _ = _selection_evaluator(cfg, g, theta, cfg.normalize)
    lattice = iterative_prune(evaluator)
    n = g.node_count
    free = len(lattice.free_nodes)
    print(f"{n},{len(lattice.must_include)},{len(lattice.may_include)},"
          f"{free},{lattice.reduction(n) * 100:.1f}%")
    if cfg.out:
        doc = lattice.to_json_dict(g)
        doc["config"] = asdict(cfg)
        doc["config_hash"] = cfg.config_hash()
        doc["seed"] = cfg.seed
        Path(cfg.out).write_text(json.dumps(doc), encoding="utf-8")
    return 0


def cmd_select(args) -> int:
    cfg = _resolve_config(args)
    raw = _load_weighted_graph(cfg)
    g = _graph_view(raw, cfg.normalize)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for theta in cfg.thetas():
        evaluator, rr_ms = _selection_evaluator(cfg, g, theta, cfg.normalize)
        validation = _validation_evaluator(cfg, g, theta, cfg.normalize)
        lattice = iterative_prune(evaluator) if cfg.prune else trivial_lattice(g.node_count)
        for algo in cfg.algo:
            start = time.perf_counter()
            result = _run_algorithm(algo, g, evaluator, lattice, cfg)
            select_ms = int((time.perf_counter() - start) * 1000)
            profit = validation.profit(result.seeds)
            doc = result.to_json_dict(g)
            doc["theta"] = theta
            doc["config"] = asdict(cfg)
            doc["config_hash"] = cfg.config_hash()
            doc["seed"] = cfg.seed
            doc["validation_profit"] = profit
            (out_dir / f"seeds_{algo}_theta{theta}.json").write_text(
                json.dumps(doc), encoding="utf-8")
            rows.append(_row(cfg, algo, theta, cfg.prune, cfg.normalize,
                             result, profit, None, select_ms, rr_ms))
    _write_csv(rows, cfg, cfg.csv)
    return 0


def cmd_certify(args) -> int:
    cfg = _resolve_config(args)
    if cfg.seeds is None:
        raise ConfigError("field 'seeds': certify needs a seeds JSON file")
    raw = _load_weighted_graph(cfg)
    g = _graph_view(raw, cfg.normalize)
    with open(cfg.seeds, "r", encoding="utf-8") as fh:
        seeds_doc = json.load(fh)
    seeds = frozenset(g.internal_id(v) for v in seeds_doc["seeds"])
    if cfg.lattice:
        with open(cfg.lattice, "r", encoding="utf-8") as fh:
            lattice = Lattice.from_json_dict(json.load(fh), g)
    else:
        lattice = trivial_lattice(g.node_count)
    theta = cfg.validation_theta or cfg.thetas()[0]
    cert = certify_seeds(seeds, g, lattice, theta, delta=cfg.delta,
                         seed=derive_seed(cfg.seed, "certify"))
    print(cert.summary_line())
    if cfg.out:
        doc = cert.to_json_dict()
        doc["config"] = asdict(cfg)
        doc["config_hash"] = cfg.config_hash()
        Path(cfg.out).write_text(json.dumps(doc), encoding="utf-8")
    algo = seeds_doc.get("algorithm", "unknown")
    result = SelectionResult(algorithm=algo, params={}, seeds=seeds,
                             estimated_profit=cert.phi_estimate)
    rows = [_row(cfg, algo, theta, cfg.lattice is not None, cfg.normalize,
                 result, cert.phi_estimate, cert.guarantee, 0, 0)]
    _write_csv(rows, cfg, cfg.csv)
    return 0


def _experiment_row(cfg: RunConfig, row_spec, graph: WeightedGraph = None) -> dict:
    theta, algo, prune_on, norm_on = row_spec
    raw = graph if graph is not None else _load_weighted_graph(cfg)
    g = _graph_view(raw, norm_on)
    evaluator, rr_ms = _selection_evaluator(cfg, g, theta, norm_on)
    lattice = iterative_prune(evaluator) if prune_on else trivial_lattice(g.node_count)
    start = time.perf_counter()
    result = _run_algorithm(algo, g, evaluator, lattice, cfg)
    select_ms = int((time.perf_counter() - start) * 1000)
    # baselines select on the whole graph; their certificate uses the
    # trivial lattice they actually searched
    cert_lattice = lattice if algo in HEURISTICS else trivial_lattice(g.node_count)
    vtheta = cfg.validation_theta or theta
    cert = certify_seeds(result.seeds, g, cert_lattice, vtheta, delta=cfg.delta,
                         seed=derive_seed(cfg.seed, "experiment", theta, algo,
                                          int(prune_on), int(norm_on)))
    return _row(cfg, algo, theta, prune_on, norm_on, result,
                cert.phi_estimate, cert.guarantee, select_ms, rr_ms)


def cmd_experiment(args) -> int:
    cfg = _resolve_config(args)
    row_specs = [(theta, algo, prune_on, norm_on)
                 for theta in cfg.thetas()
                 for algo in cfg.algo
                 for prune_on in (True, False)
                 for norm_on in (True, False)]
    rows = []
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_experiment_row, cfg, rs) for rs in row_specs]
            for rs, fut in zip(row_specs, futures):
                try:
                    rows.append(fut.result())
                except Exception as exc:  # rows are isolated; record and move on
                    rows.append(_failed_row(cfg, rs, exc))
    else:
        graph = _load_weighted_graph(cfg)
        for rs in row_specs:
            try:
                rows.append(_experiment_row(cfg, rs, graph))
            except Exception as exc:  # rows are isolated; record and move on
                rows.append(_failed_row(cfg, rs, exc))
    _write_csv(rows, cfg, cfg.csv)
    return 0


def _failed_row(cfg: RunConfig, row_spec, exc: Exception) -> dict:
    theta, algo, prune_on, norm_on = row_spec
    print(f"row (theta={theta}, algo={algo}, prune={int(prune_on)}, "
          f"norm={int(norm_on)}) failed: {exc}", file=sys.stderr)
    return {
        "dataset": Path(cfg.graph).stem, "algo": algo, "theta": theta,
        "prune": int(prune_on), "norm": int(norm_on), "seeds_count": 0,
        "profit": "", "guarantee": "", "time_select_ms": 0, "time_rr_ms": 0,
        "seed": cfg.seed,
    }


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 4
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
