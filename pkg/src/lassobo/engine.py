"""Bayesian optimization loops: LassoBO and the comparison baselines.

Every run owns one ``numpy.random.Generator`` seeded from the config and
consumes it in a fixed order:

1. the ``n_init`` uniform initial points, one noise draw per evaluation;
2. per iteration: the hyperparameter-fit seed, the coordinate subset
   (Dropout only), the random imputations, the acquisition starts, and
   finally the evaluation noise.

RandomSearch draws one uniform point and its noise per iteration.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .acquisition import AcqConfig, beta_t, maximize_over_space
from .gp import ContractError, Dataset, fit_posterior
from .likelihood import FitConfig, fit_hyperparams
from .search_space import build_search_space
from .selection import ImportanceState

LASSOBO = "lassobo"
RANDOM_SEARCH = "random"
VANILLA_BO = "vanilla"
DROPOUT_BO = "dropout"
METHODS = (LASSOBO, RANDOM_SEARCH, VANILLA_BO, DROPOUT_BO)

LOG_REGRET_FLOOR = 1e-12


class RunAborted(RuntimeError):
    """An objective evaluation failed; ``partial`` holds the trace so far."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class RunConfig:
    method: str = LASSOBO
    budget_T: int = 300
    n_init: int = 30
    fit: FitConfig = field(default_factory=FitConfig)
    acq: AcqConfig = field(default_factory=AcqConfig)
    schedule_n: int = 3
    window_W: int = 1
    dropout_d: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.budget_T < 0:
            raise ContractError("budget_T must be nonnegative")
        if self.n_init < 2:
            raise ContractError("n_init must be >= 2")
        if self.schedule_n < 2:
            raise ContractError("schedule_n must be >= 2")
        if self.window_W < 1:
            raise ContractError("window_W must be >= 1")
        if self.dropout_d < 1:
            raise ContractError("dropout_d must be >= 1")

    def to_dict(self):
        return asdict(self)


@dataclass
class IterationRecord:
    iter: int
    t: int
    x: np.ndarray
    y: float
    best_y: float
    simple_regret: float
    log_regret: float
    d_t: int = 0
    important: tuple = ()
    rho: Optional[np.ndarray] = None
    fit_ms: float = 0.0
    acq_ms: float = 0.0


@dataclass
class RunResult:
    config: RunConfig
    objective_name: str
    f_max: Optional[float]
    records: list = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def best_record(self):
        return max(self.records, key=lambda r: (r.y, -r.iter))

    @property
    def best_x(self):
        return self.best_record.x

    @property
    def best_y(self):
        return self.best_record.y

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    @property
    def final_simple_regret(self):
        return self.records[-1].simple_regret


def _evaluate(objective, x, rng):
    if hasattr(objective, "evaluate"):
        return float(objective.evaluate(x, rng))
    return float(objective(x))


def _regrets(f_max, best_y):
    if f_max is None:
        return float("nan"), float("nan")
    r = max(f_max - best_y, 0.0)
    return r, float(np.log(max(r, LOG_REGRET_FLOOR)))


class _Recorder:
    def __init__(self, objective, cfg):
        self.objective = objective
        self.f_max = getattr(objective, "f_max", None)
        self.result = RunResult(cfg, getattr(objective, "name", type(objective).__name__),
                                self.f_max)
        self.best_y = -np.inf

    def record(self, t, x, y, **extra):
        self.best_y = max(self.best_y, y)
        sr, lr = _regrets(self.f_max, self.best_y)
        rec = IterationRecord(iter=len(self.result.records) + 1, t=t, x=np.array(x, dtype=float),
                              y=y, best_y=self.best_y, simple_regret=sr, log_regret=lr, **extra)
        self.result.records.append(rec)
        return rec


def _dim(objective):
    dim = getattr(objective, "dim", None)
    if dim is None:
        raise ContractError("objective must expose its dimension as .dim")
    return int(dim)


def run(objective, cfg):
    """Run ``cfg.method`` on ``objective`` and return the full trace."""
    D = _dim(objective)
    if cfg.method == DROPOUT_BO and cfg.dropout_d > D:
        raise ContractError("dropout_d cannot exceed the problem dimension")
    rng = np.random.default_rng(cfg.seed)
    rec = _Recorder(objective, cfg)
    start = time.perf_counter()

    def evaluate(t, x, **extra):
        try:
            y = _evaluate(objective, x, rng)
        except Exception as err:
            rec.result.wall_time_s = time.perf_counter() - start
            raise RunAborted(f"objective failed at iteration {t}: {err}", rec.result) from err
        rec.record(t, x, y, **extra)
        return y

    data = Dataset.empty(D)
    for x in rng.uniform(0.0, 1.0, (cfg.n_init, D)):
        data.add(x, evaluate(0, x))

    if cfg.method == RANDOM_SEARCH:
        for t in range(1, cfg.budget_T + 1):
            x = rng.uniform(0.0, 1.0, D)
            evaluate(t, x)
        rec.result.wall_time_s = time.perf_counter() - start
        return rec.result

    fit_cfg = cfg.fit if cfg.method != VANILLA_BO else replace(cfg.fit, lam=0.0)
    state = ImportanceState(D, cfg.window_W)
    params = None
    for t in range(1, cfg.budget_T + 1):
        t0 = time.perf_counter()
        fit_seed = int(rng.integers(2 ** 31))
        params, _ = fit_hyperparams(data, replace(fit_cfg, seed=fit_seed), warm_start=params)
        model = fit_posterior(data, params)
        t1 = time.perf_counter()

        if cfg.method == LASSOBO:
            important, _ = state.push_and_classify(params.rho)
            spec = build_search_space(important, data.best_x, t, cfg.schedule_n, rng)
        elif cfg.method == DROPOUT_BO:
            important = np.sort(rng.choice(D, cfg.dropout_d, replace=False))
            spec = build_search_space(important, data.best_x, t, cfg.schedule_n, rng,
                                      n_random=0)
        else:
            spec = build_search_space(np.arange(D), data.best_x, t, cfg.schedule_n, rng)
        x, _ = maximize_over_space(model, spec, beta_t(t, cfg.acq), cfg.acq, rng,
                                   incumbent=data.best_x)
        t2 = time.perf_counter()

        y = evaluate(t, x, d_t=int(spec.important.size),
                     important=tuple(int(i) for i in spec.important),
                     rho=params.rho.copy(), fit_ms=1e3 * (t1 - t0), acq_ms=1e3 * (t2 - t1))
        data.add(x, y)
    rec.result.wall_time_s = time.perf_counter() - start
    return rec.result


def run_lassobo(objective, cfg):
    if cfg.method != LASSOBO:
        cfg = replace(cfg, method=LASSOBO)
    return run(objective, cfg)


def run_baseline(objective, cfg):
    if cfg.method == LASSOBO:
        raise ContractError("run_baseline expects a baseline method")
    return run(objective, cfg)


@dataclass
class RepeatSummary:
    runs: list
    seeds: list
    failures: list
    median: np.ndarray
    q25: np.ndarray
    q75: np.ndarray


def summarize(runs):
    """Per-iteration median and interquartile band of log regret."""
    traces = np.array([r.column("log_regret") for r in runs])
    return (np.median(traces, axis=0), np.percentile(traces, 25, axis=0),
            np.percentile(traces, 75, axis=0))


def _run_seed(args):
    objective, cfg = args
    try:
        return run(objective, cfg), None
    except RunAborted as err:
        return err.partial, err


def run_seeds(objective, cfg, seeds, jobs=1):
    """Run ``cfg`` once per seed; return ``(seed, result, error)`` triples in seed order.

    Aborted runs carry their partial trace and the :class:`RunAborted` error.
    """
    tasks = [(objective, replace(cfg, seed=int(s))) for s in seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            outcomes = list(pool.map(_run_seed, tasks))
    else:
        outcomes = [_run_seed(t) for t in tasks]
    return [(int(s), res, err) for s, (res, err) in zip(seeds, outcomes)]


def repeat_runs(objective, cfg, n_repeats, jobs=1):
    """Run seeds ``cfg.seed + 0 .. cfg.seed + n_repeats - 1``.

    Runs that abort are listed in ``failures`` (seed, error, partial result);
    the summary covers completed runs only.
    """
    if n_repeats < 1:
        raise ContractError("n_repeats must be >= 1")
    seeds = [cfg.seed + r for r in range(n_repeats)]
    runs, failures, done = [], [], []
    for seed, res, err in run_seeds(objective, cfg, seeds, jobs):
        if err is None:
            runs.append(res)
            done.append(seed)
        else:
            failures.append((seed, err, res))
    if not runs:
        raise RuntimeError(f"all {n_repeats} runs failed; first error: {failures[0][1]}")
    med, q25, q75 = summarize(runs)
    return RepeatSummary(runs, done, failures, med, q25, q75)
