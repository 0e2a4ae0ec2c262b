"""Experiment configuration, bound checking, sweeps and serialization."""

from __future__ import annotations

import copy
import io
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import counterexamples as cx
from .core import FixedSequence, RegretLedger, StablabError, run_online
from .covering import cover_for, hedge_over_cover, verify_cover
from .learners import (
    FTL,
    FTRL,
    RSLM,
    ConstantLearner,
    Hedge,
    fixed_eta_schedule,
    inverse_sqrt,
    quadratic_schedule,
    scaled_lambda_schedule,
    zero_schedule,
)
from .problems import CATALOG, make_problem
from .stability import (
    StabilityReport,
    RateTable,
    hedge_regret_values,
    rate_hedge,
    rate_loo_bounded_reg,
    rate_loo_convex_reg,
    rate_loo_strongly_convex_loss,
    rate_regret_always_aerm,
    rate_regret_rerm,
    uniform_loo_gap,
)

CSV_COLUMNS = ("round", "loss", "cum_loss", "hindsight", "regret", "avg_regret", "bound")
RNGS = {
    "pcg64": np.random.PCG64,
    "pcg64dxsm": np.random.PCG64DXSM,
    "philox": np.random.Philox,
    "sfc64": np.random.SFC64,
    "mt19937": np.random.MT19937,
}
LEARNERS = ("ftl", "ftrl", "rslm", "hedge", "hedge_cover", "constant", "interval_rerm",
            "tie_half_erm", "randomized_threshold")
SCENARIOS = ("matching_pennies", "rounded_pennies", "tracking", "threshold",
             "threshold_randomized")


class ConfigError(StablabError):
    """Invalid experiment configuration (CLI exit code 2)."""


def make_rng(name: str = "pcg64", seed=0) -> np.random.Generator:
    try:
        bitgen = RNGS[name]
    except KeyError:
        raise ConfigError(f"rng: unknown generator {name!r}; choose from {', '.join(RNGS)}") \
            from None
    return np.random.Generator(bitgen(seed))


def thread_cap(default: Optional[int] = None) -> int:
    raw = os.environ.get("STABLAB_THREADS", "")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"STABLAB_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError("STABLAB_THREADS must be >= 1")
        return n
    return default if default is not None else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    problem: str = "binary_game"
    problem_params: dict = field(default_factory=dict)
    learner: str = "ftl"
    learner_params: dict = field(default_factory=dict)
    adversary: Optional[str] = None
    adversary_params: dict = field(default_factory=dict)
    sequence: Optional[list] = None
    rounds: int = 100
    seed: int = 0
    rng: str = "pcg64"
    out: Optional[str] = None
    format: str = "csv"
    samples: int = 50
    n_probes: int = 10_000
    eps: Optional[float] = None
    scenario: Optional[str] = None
    bound: Optional[str] = None
    bound_params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ConfigError(f"{key}: unknown config field")
        cfg = cls(**copy.deepcopy(data))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON in {path}: {exc.msg} "
                              f"(line {exc.lineno})") from None
        return cls.from_dict(data)

    def replace(self, **changes) -> "ExperimentConfig":
        data = asdict(self)
        data.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig.from_dict(data)

    def validate(self) -> None:
        if self.problem not in CATALOG:
            raise ConfigError(f"problem: unknown {self.problem!r}; catalog: "
                              f"{', '.join(sorted(CATALOG))}")
        if self.learner not in LEARNERS:
            raise ConfigError(f"learner: unknown {self.learner!r}; choose from "
                              f"{', '.join(LEARNERS)}")
        if self.adversary is not None and self.adversary not in cx.ADVERSARIES:
            raise ConfigError(f"adversary: unknown {self.adversary!r}; choose from "
                              f"{', '.join(cx.ADVERSARIES)}")
        if self.scenario is not None and self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: unknown {self.scenario!r}; choose from "
                              f"{', '.join(SCENARIOS)}")
        for name in ("rounds", "samples", "n_probes"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name}: must be an integer >= 1, got {v!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed: must be a non-negative integer, got {self.seed!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: must be csv or json, got {self.format!r}")
        if self.rng not in RNGS:
            raise ConfigError(f"rng: unknown generator {self.rng!r}; choose from "
                              f"{', '.join(RNGS)}")
        if self.eps is not None and not (isinstance(self.eps, (int, float)) and self.eps > 0):
            raise ConfigError(f"eps: must be positive, got {self.eps!r}")
        for name in ("problem_params", "learner_params", "adversary_params",
                     "bound_params", "grid"):
            if not isinstance(getattr(self, name), dict):
                raise ConfigError(f"{name}: must be an object")


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_problem(cfg: ExperimentConfig):
    try:
        return make_problem(cfg.problem, **cfg.problem_params)
    except TypeError as exc:
        raise ConfigError(f"problem_params: {exc}") from None
    except StablabError as exc:
        raise ConfigError(f"problem_params: {exc}") from None


def _lam_param(params: dict):
    c = params.get("c", 1.0)
    if not isinstance(c, (int, float)) or c <= 0:
        raise ConfigError(f"learner_params.c: must be positive, got {c!r}")
    return inverse_sqrt(float(c))


def build_learner(cfg: ExperimentConfig, problem, m: Optional[int] = None):
    p = cfg.learner_params
    name = cfg.learner
    try:
        if name == "ftl":
            return FTL(problem)
        if name == "constant":
            return ConstantLearner(problem, p.get("hypothesis"))
        if name in ("ftrl", "rslm"):
            if not hasattr(problem, "lo"):
                raise ConfigError(f"learner: {name} needs an interval problem")
            if p.get("reg", "quadratic") == "none":
                sched = zero_schedule()
            else:
                sched = quadratic_schedule(_lam_param(p), problem.lo, problem.hi,
                                           float(p.get("center", 0.0)))
            if name == "ftrl":
                return FTRL(problem, sched)
            return RSLM(problem, sched, proximal=bool(p.get("proximal", False)))
        if name == "hedge":
            experts = getattr(problem, "hypotheses", None)
            if experts is None:
                raise ConfigError("learner: hedge needs a finite problem (use hedge_cover)")
            if "eta" in p:
                sched = fixed_eta_schedule(float(p["eta"]))
            elif "c" in p:
                sched = scaled_lambda_schedule(float(p["c"]))
            else:
                sched = None
            return Hedge(problem, experts, sched)
        if name == "hedge_cover":
            horizon = m if m is not None else cfg.rounds
            return hedge_over_cover(problem, horizon, cfg.eps, p.get("K"),
                                    int(p.get("cap", 1_000_000)))
        if name == "interval_rerm":
            if problem.name != "randomized_binary":
                raise ConfigError("learner: interval_rerm runs on randomized_binary")
            return cx.IntervalRERM(problem, _lam_param(p))
        if name == "tie_half_erm":
            return cx.tie_half_erm()
        if name == "randomized_threshold":
            return cx.RandomizedThresholdLearner(problem)
    except ConfigError:
        raise
    except StablabError as exc:
        raise ConfigError(f"learner_params: {exc}") from None
    raise ConfigError(f"learner: unknown {name!r}")


def build_source(cfg: ExperimentConfig, problem):
    if cfg.sequence is not None:
        pts = [tuple(z) if isinstance(z, list) else z for z in cfg.sequence]
        if len(pts) < cfg.rounds:
            raise ConfigError(f"sequence: has {len(pts)} points, rounds is {cfg.rounds}")
        for z in pts:
            try:
                problem.validate(z)
            except StablabError as exc:
                raise ConfigError(f"sequence: {exc}") from None
        return FixedSequence(pts)
    if cfg.adversary is None or cfg.adversary == "random":
        rng = make_rng(cfg.rng, cfg.seed)
        return FixedSequence(problem.sample_points(rng, cfg.rounds))
    try:
        return cx.make_adversary(cfg.adversary, problem, cfg.seed, cfg.rng,
                                 **cfg.adversary_params)
    except StablabError as exc:
        raise ConfigError(f"adversary: {exc}") from None


# ---------------------------------------------------------------------------
# Theoretical curves
# ---------------------------------------------------------------------------


def regret_bound_curve(problem, learner, m: int) -> Optional[np.ndarray]:
    """Guaranteed average regret for t = 1..m, or None when no theorem applies."""
    t = np.arange(1, m + 1, dtype=np.float64)
    bound = getattr(learner, "bound", None)
    if callable(bound):
        return np.asarray(bound(t), dtype=np.float64)
    if isinstance(learner, Hedge):
        if learner.schedule.name != "theorem":
            return None  # the guarantee is stated for its own schedule only
        return hedge_regret_values(problem.regret_bound, learner.d, t)
    L, nu = problem.lipschitz, problem.strong_convexity
    if type(learner) is FTL and L is not None and nu:
        return rate_regret_rerm(rate_loo_strongly_convex_loss(L, nu, m), 0.0, m).values
    if type(learner) is FTRL and L is not None and learner.schedule.weights is not None \
            and not learner.schedule.is_zero:
        sched = learner.schedule
        return rate_regret_rerm(rate_loo_bounded_reg(L, sched.rho, sched.nu, m),
                                sched.rho, m).values
    return None


def loo_bound_value(problem, learner, m: int) -> Optional[float]:
    """Uniform-LOO rate at m for the learner/problem pair, when one is known."""
    L, nu = problem.lipschitz, problem.strong_convexity
    if isinstance(learner, Hedge) and learner.schedule.name == "theorem" and learner.d >= 2:
        return rate_hedge(problem.regret_bound, learner.d, m)[0](m)
    if type(learner) is FTL and L is not None and nu:
        return rate_loo_strongly_convex_loss(L, nu, m)(m)
    if type(learner) is FTRL and L is not None and learner.schedule.weights is not None \
            and not learner.schedule.is_zero:
        s = learner.schedule
        return rate_loo_bounded_reg(L, s.rho, s.nu, m)(m)
    return None


# ---------------------------------------------------------------------------
# Bound checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheckResult:
    name: str
    empirical: np.ndarray
    theoretical: np.ndarray
    max_violation: float
    worst_round: int  # 1-based
    tolerance: float
    passed: bool

    @property
    def pairs(self) -> list:
        return list(zip(self.empirical.tolist(), self.theoretical.tolist()))


def check_bounds(observed, rate, tolerance: float = 0.0, name: Optional[str] = None,
                 lower: bool = False) -> BoundCheckResult:
    """Per-round empirical-vs-theoretical comparison.

    ``observed`` is a RegretLedger (average-regret curve), a StabilityReport
    (gaps) or an array. With ``lower=True`` the rate is a lower bound.
    """
    if isinstance(observed, RegretLedger):
        emp = observed.average_regret_curve
    elif isinstance(observed, StabilityReport):
        emp = np.asarray(observed.gaps, dtype=np.float64)
    else:
        emp = np.asarray(observed, dtype=np.float64)
    if isinstance(rate, RateTable):
        theo, name = rate.values, name or rate.name
    else:
        theo = np.asarray(rate, dtype=np.float64)
        if theo.ndim == 0:
            theo = np.full(len(emp), float(theo))
    if len(emp) != len(theo):
        raise StablabError(f"length mismatch: {len(emp)} observations vs {len(theo)} bounds")
    diff = (theo - emp) if lower else (emp - theo)
    if len(diff) == 0:
        return BoundCheckResult(name or "bound", emp, theo, -math.inf, 0, tolerance, True)
    k = int(np.argmax(diff))
    worst = float(diff[k])
    return BoundCheckResult(name or "bound", emp, theo, worst, k + 1, tolerance,
                            worst <= tolerance)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def to_csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if v is None or isinstance(v, (str, int, bool)):
        return v
    return repr(v)


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


@dataclass
class Artifact:
    """Tabular result plus summary and checks."""

    columns: tuple
    rows: list
    summary: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self, format: str = "csv") -> str:
        if format == "csv":
            return to_csv(self.columns, self.rows)
        return to_json({
            "summary": self.summary,
            "checks": [{"name": c.name, "max_violation": c.max_violation,
                        "worst_round": c.worst_round, "tolerance": c.tolerance,
                        "pass": c.passed} for c in self.checks],
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
        })


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def _ledger_artifact(ledger: RegretLedger, bound: Optional[np.ndarray],
                     summary: dict) -> Artifact:
    m = ledger.m
    cum = ledger.cumulative_curve
    hind = ledger.hindsight_curve
    regret = cum - hind
    avg = regret / np.arange(1, m + 1)
    rows = [(t + 1, ledger.per_round_loss[t], cum[t], hind[t], regret[t], avg[t],
             None if bound is None else bound[t]) for t in range(m)]
    checks = []
    if bound is not None:
        checks.append(check_bounds(avg, bound, 0.0, "avg_regret<=bound"))
    summary = dict(summary, rounds=m, cumulative_loss=ledger.cumulative_loss,
                   best_in_hindsight=ledger.best_in_hindsight, regret=ledger.regret,
                   average_regret=ledger.average_regret)
    return Artifact(CSV_COLUMNS, rows, summary, checks)


def run(cfg: ExperimentConfig) -> Artifact:
    """One online run: per-round ledger with the theorem's bound when one applies."""
    problem = build_problem(cfg)
    learner = build_learner(cfg, problem)
    source = build_source(cfg, problem)
    try:
        ledger = run_online(learner, source, cfg.rounds, problem, track_hindsight=True)
    except StablabError as exc:
        raise ConfigError(f"run: {exc}") from None
    bound = regret_bound_curve(problem, learner, cfg.rounds)
    return _ledger_artifact(ledger, bound, {"problem": cfg.problem, "learner": cfg.learner,
                                            "seed": cfg.seed})


def stability(cfg: ExperimentConfig) -> Artifact:
    """Uniform-LOO gaps on ``samples`` random datasets of size ``rounds``."""
    problem = build_problem(cfg)
    learner = build_learner(cfg, problem)
    rng = make_rng(cfg.rng, cfg.seed)
    m = cfg.rounds
    bound = loo_bound_value(problem, learner, m)
    rows, gaps = [], []
    for s in range(cfg.samples):
        rep = uniform_loo_gap(learner, problem.sample_points(rng, m))
        gaps.append(rep.max_gap)
        rows.append((s, m, rep.max_gap, bound))
    checks = []
    if bound is not None:
        checks.append(check_bounds(gaps, bound, 0.0, "uniform_loo<=rate"))
    summary = {"problem": cfg.problem, "learner": cfg.learner, "rounds": m,
               "samples": cfg.samples, "max_gap": max(gaps), "bound": bound}
    return Artifact(("sample", "m", "max_gap", "bound"), rows, summary, checks)


def counterexample(cfg: ExperimentConfig) -> Artifact:
    """Named lower-bound scenario; checks the claimed lower bound on average regret."""
    name = cfg.scenario or cfg.adversary or "matching_pennies"
    m = cfg.rounds
    if name == "tracking":
        lam = _lam_param(cfg.learner_params)
        losses, regret = cx.run_tracking(m, lam)
        # ones after t rounds: the learner loses 1/2 exactly on the rounds with z = 1
        ones = np.cumsum(losses == 0.5)
        hind = np.minimum(ones, np.arange(1, m + 1) - ones).astype(np.float64)
        ledger = RegretLedger(losses, math.fsum(losses), float(hind[-1]), None, regret,
                              regret / m, None, hindsight_curve=hind)
        art = _ledger_artifact(ledger, None, {"scenario": name})
        lo, hi = 0.20, 0.30
        art.checks.append(check_bounds([ledger.average_regret], lo, 0.0,
                                       "avg_regret>=0.20", lower=True))
        art.checks.append(check_bounds([ledger.average_regret], hi, 0.0, "avg_regret<=0.30"))
        return art
    if name in ("threshold", "threshold_randomized"):
        exact = bool(cfg.adversary_params.get("exact", True))
        if not exact and m > cx.FLOAT_ROUND_CAP:
            raise ConfigError(f"rounds: float threshold mode is capped at "
                              f"{cx.FLOAT_ROUND_CAP} (dyadic underflow)")
        problem = make_problem("threshold_class")
        learner = FTL(problem) if name == "threshold" else cx.RandomizedThresholdLearner(problem)
        ledger = run_online(learner, cx.ThresholdAdversary(exact), m, problem,
                            track_hindsight=True)
        art = _ledger_artifact(ledger, None, {"scenario": name, "exact": exact})
        if name == "threshold":
            art.checks.append(check_bounds(ledger.per_round_loss, 1.0, 0.0, "loss==1",
                                           lower=True))
        else:
            art.checks.append(check_bounds(ledger.per_round_loss, 0.5, 0.0, "loss>=1/2",
                                           lower=True))
        art.checks.append(check_bounds([ledger.best_in_hindsight], 0.0, 0.0, "hindsight==0"))
        return art
    if name == "matching_pennies":
        problem = make_problem("binary_game")
        learner, source, floor = FTL(problem), cx.MatchingPennies(), 0.5 - 1.0 / m
    elif name == "rounded_pennies":
        learner = cx.tie_half_erm()
        problem, source, floor = learner.problem, cx.RoundedPennies(), 0.25
    else:
        raise ConfigError(f"scenario: unknown {name!r}; choose from {', '.join(SCENARIOS)}")
    ledger = run_online(learner, source, m, problem, track_hindsight=True)
    art = _ledger_artifact(ledger, None, {"scenario": name})
    art.checks.append(check_bounds([ledger.average_regret], floor, 0.0,
                                   f"avg_regret>={floor:.6g}", lower=True))
    return art


def cover(cfg: ExperimentConfig) -> Artifact:
    """Build the eps-cover used by hedge_cover at ``rounds`` and verify it by sampling."""
    problem = build_problem(cfg)
    eps = cfg.eps if cfg.eps is not None else 1.0 / math.sqrt(cfg.rounds)
    try:
        c = cover_for(problem, eps, cfg.learner_params.get("K"))
    except StablabError as exc:
        raise ConfigError(f"problem: {exc}") from None
    rep = verify_cover(c, problem, cfg.n_probes, cfg.seed)
    check = BoundCheckResult("cover_gap<=eps", np.array([rep.worst_gap]),
                             np.array([c.epsilon]), rep.worst_gap - c.epsilon, 1, 1e-12,
                             rep.passed)
    row = (len(c), c.epsilon, rep.worst_gap, rep.n_probes,
           None if rep.witness is None else repr(rep.witness[0]),
           None if rep.witness is None else repr(rep.witness[1]), rep.passed)
    return Artifact(("members", "epsilon", "worst_gap", "n_probes", "witness_h",
                     "witness_z", "passed"), [row],
                    {"problem": cfg.problem, "members": len(c), "epsilon": c.epsilon},
                    [check])


BOUND_NAMES = ("loo_strongly_convex_loss", "loo_convex_reg", "loo_bounded_reg",
               "regret_rerm", "regret_always_aerm", "hedge_loo", "hedge_erm", "hedge_regret")


def _rate_seq(v):
    """Number, list, or {"inverse_sqrt": c}."""
    if isinstance(v, dict):
        if set(v) == {"inverse_sqrt"}:
            return inverse_sqrt(float(v["inverse_sqrt"]))
        raise ConfigError(f"bound_params: unsupported sequence {v!r}")
    if isinstance(v, list):
        return [float(x) for x in v]
    return float(v)


def rate_table(name: str, params: dict, M: int) -> RateTable:
    p = {k: _rate_seq(v) for k, v in params.items()}
    try:
        if name == "loo_strongly_convex_loss":
            return rate_loo_strongly_convex_loss(p["L"], p["nu"], M)
        if name == "loo_convex_reg":
            return rate_loo_convex_reg(p["L"], p.get("L_R", 0.0), p["nu"], M)
        if name == "loo_bounded_reg":
            return rate_loo_bounded_reg(p["L"], p["rho"], p["nu"], M)
        if name == "regret_rerm":
            return rate_regret_rerm(p.get("stability", 0.0), p.get("rho", 0.0), M)
        if name == "regret_always_aerm":
            case = int(params.get("case", 1))
            return rate_regret_always_aerm(case, p.get("eps_erm", 0.0), p.get("eps_loo", 0.0),
                                           p.get("eps_ro", 0.0), p.get("eps_on", 0.0), M)
        if name in ("hedge_loo", "hedge_erm", "hedge_regret"):
            d = int(params.get("d", 2))
            tables = rate_hedge(p.get("B", 1.0), d, M)
            return tables[("hedge_loo", "hedge_erm", "hedge_regret").index(name)]
    except KeyError as exc:
        raise ConfigError(f"bound_params: missing parameter {exc.args[0]!r} for {name}") \
            from None
    except StablabError as exc:
        raise ConfigError(f"bound_params: {exc}") from None
    raise ConfigError(f"bound: unknown {name!r}; choose from {', '.join(BOUND_NAMES)}")


def rates(cfg: ExperimentConfig) -> Artifact:
    if cfg.bound is None:
        raise ConfigError(f"bound: required; choose from {', '.join(BOUND_NAMES)}")
    table = rate_table(cfg.bound, cfg.bound_params, cfg.rounds)
    rows = [(m, v) for m, v in zip(table.ms.tolist(), table.values.tolist())]
    return Artifact(("m", "epsilon"), rows, {"bound": table.name, "M": table.M})


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _set_path(data: dict, path: str, value) -> None:
    keys = path.split(".")
    for k in keys[:-1]:
        data = data.setdefault(k, {})
    data[keys[-1]] = value


def grid_cells(cfg: ExperimentConfig) -> list:
    """Cells in lexicographic order of (sorted axis name, axis value index)."""
    axes = sorted(cfg.grid.items())
    for name, values in axes:
        if not isinstance(values, list) or not values:
            raise ConfigError(f"grid.{name}: must be a non-empty list")
    cells = []
    for combo in itertools.product(*(range(len(v)) for _, v in axes)):
        base = asdict(cfg)
        base["grid"] = {}
        assignment = {}
        for (name, values), j in zip(axes, combo):
            _set_path(base, name, copy.deepcopy(values[j]))
            assignment[name] = values[j]
        try:
            cells.append((assignment, ExperimentConfig.from_dict(base), None))
        except ConfigError as exc:
            cells.append((assignment, None, str(exc)))
    return cells


SWEEP_COLUMNS = ("cell", "params", "rounds", "cumulative_loss", "regret", "avg_regret",
                 "bound", "pass", "error")


def _run_cell(cell):
    assignment, cfg, error = cell
    if error is not None:
        return (None, None, None, None, None, False, error)
    try:
        art = run(cfg)
    except StablabError as exc:
        return (cfg.rounds, None, None, None, None, False, str(exc))
    s = art.summary
    bound = art.rows[-1][-1]
    return (cfg.rounds, s["cumulative_loss"], s["regret"], s["average_regret"], bound,
            art.passed, None)


def sweep(cfg: ExperimentConfig, threads: Optional[int] = None) -> Artifact:
    cells = grid_cells(cfg)
    workers = max(1, min(len(cells), threads if threads is not None else thread_cap()))
    if workers == 1:
        results = [_run_cell(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, cells))  # map preserves cell order
    rows = []
    for i, ((assignment, _, _), res) in enumerate(zip(cells, results)):
        params = ";".join(f"{k}={json.dumps(v, sort_keys=True)}"
                          for k, v in sorted(assignment.items()))
        rows.append((i, params) + res)
    failed = [r for r in rows if r[-2] is False and r[-1] is None]
    checks = [BoundCheckResult("cells_within_bound", np.zeros(0), np.zeros(0),
                               float(len(failed)), 0, 0.0, not failed)]
    return Artifact(SWEEP_COLUMNS, rows, {"cells": len(rows)}, checks)
