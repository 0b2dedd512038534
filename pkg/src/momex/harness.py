"""Command-line harness: configs, seeded runs, comparisons, reports.

Subcommands: run (one seeded experiment to CSV or JSON), compare (several
algorithms on one problem at an equal oracle-call budget, medians over
seeds), verify (the full check suite as a JSON report, nonzero exit on any
failure), gen-data (write a synthetic dataset to CSV).

Everything an invocation emits is a pure function of the config and seed,
byte for byte, except elapsed_seconds.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import verify as verify_mod
from .optimizer import (
    AlgorithmKind,
    TrajectoryRecord,
    mem,
    nigt,
    run,
    sg,
    sg_pm,
)
from .problems import (
    NOISE_KINDS,
    NoiseModel,
    datafit_problem,
    generate_synthetic,
    load_csv_dataset,
    quadratic_problem,
    robust_problem,
    save_dataset,
)
from .schedule import ScheduleConfig, iteration_threshold, theorem_constant

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "RunConfig",
    "TrajectoryRecord",
    "parse_config",
    "build_problem",
    "build_kind",
    "run_experiment",
    "records_to_csv",
    "parse_records",
    "emit",
    "compare",
    "grid_search",
    "verify_all",
    "main",
]

CSV_HEADER = "k,f_val,rel_obj,grad_norm,mom_err,oracle_calls,elapsed_seconds"

ALGORITHMS = ("mem", "sg", "sg-pm", "nigt")
PROBLEMS = ("datafit", "robust", "quadratic")


class ConfigError(ValueError):
    """Invalid configuration; the message names the flag at fault."""


@dataclass(frozen=True)
class RunConfig:
    """One experiment, fully determined. All fields are JSON-native."""

    algorithm: str
    problem: str
    iters: int
    seed: int = 0
    p: Optional[int] = None
    q: Optional[int] = None
    gamma: Optional[float] = None
    eta: Optional[float] = None
    synthetic: Optional[int] = None
    dataset: Optional[str] = None
    target: str = "target"
    data_seed: int = 0
    dim: Optional[int] = None
    conditioning: Optional[float] = None
    noise: str = "none"
    sigma: float = 0.0
    wall_seconds: Optional[float] = None
    x0: str = "ones"
    log_stride: int = 1
    out: Optional[str] = None
    format: str = "csv"


class _Parser(argparse.ArgumentParser):
    # argparse calls error() for unknown flags and bad choices; raise
    # instead of exiting so library callers get a ConfigError
    def error(self, message):
        raise ConfigError(message)


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", choices=PROBLEMS)
    p.add_argument("--synthetic", type=int, metavar="N")
    p.add_argument("--dataset", metavar="PATH")
    p.add_argument("--target", metavar="COLUMN")
    p.add_argument("--data-seed", type=int, dest="data_seed")
    p.add_argument("--dim", type=int)
    p.add_argument("--conditioning", type=float)
    p.add_argument("--noise", choices=NOISE_KINDS)
    p.add_argument("--sigma", type=float)
    p.add_argument("--x0")


def _run_parser() -> _Parser:
    p = _Parser(prog="momex run", add_help=False)
    p.add_argument("--alg", choices=ALGORITHMS)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eta", type=float)
    _add_problem_flags(p)
    p.add_argument("--iters", type=int)
    p.add_argument("--wall-seconds", type=float, dest="wall_seconds")
    p.add_argument("--seed", type=int)
    p.add_argument("--log-stride", type=int, dest="log_stride")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--config", metavar="FILE")
    return p


_DEFAULTS = {
    "target": "target",
    "data_seed": 0,
    "noise": None,  # resolved from --sigma below
    "sigma": None,
    "seed": 0,
    "x0": "ones",
    "log_stride": 1,
    "format": "csv",
}


def parse_config(argv: Sequence[str], config_file: Optional[str] = None) -> RunConfig:
    """Build a validated RunConfig from run-subcommand flags.

    A JSON config file (--config or the second argument) supplies values
    for any flag not given on the command line; explicit flags always win.
    Unset fields take the documented defaults: seed 0, x0 "ones",
    log_stride 1, format csv, data_seed 0, and noise
    "scalar-gaussian-envelope" exactly when --sigma is given.

    Raises:
        ConfigError: unknown flag, missing required flag, or a value
            violating its constraint; the message names the flag.
    """
    argv = list(argv)
    if argv and argv[0] == "run":
        argv = argv[1:]
    ns = vars(_run_parser().parse_args(argv))
    path = config_file or ns.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                file_vals = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"--config: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--config: {path} is not valid JSON: {exc}") from exc
        if not isinstance(file_vals, dict):
            raise ConfigError(f"--config: {path} must hold a JSON object")
        file_vals.pop("config", None)
        known = set(ns) | {"alg"}
        for key in file_vals:
            if key not in known:
                raise ConfigError(f"--config: unknown field {key!r} in {path}")
        for key, val in file_vals.items():
            if ns.get(key) is None:
                ns[key] = val
    else:
        ns.pop("config", None)
    for key, val in _DEFAULTS.items():
        if ns.get(key) is None:
            ns[key] = val
    return _validate(ns)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _validate(ns: Dict) -> RunConfig:
    alg = ns.get("alg")
    _require(alg in ALGORITHMS, f"--alg is required and must be one of {ALGORITHMS}")
    p, q = ns.get("p"), ns.get("q")
    gamma, eta = ns.get("gamma"), ns.get("eta")
    if alg == "mem":
        _require(
            p is not None,
            "algorithm 'mem' requires --p, the smoothness order its schedule is built for",
        )
        _require(int(p) >= 2, f"--p must be an integer >= 2, got {p}")
        p = int(p)
        q = p - 1 if q is None else int(q)
        _require(q == p - 1, f"--q must equal p - 1 = {p - 1} for the built-in schedules")
        _require(gamma is None and eta is None, "--gamma/--eta do not apply to mem; the schedule sets them")
    elif alg == "nigt":
        _require(p is None and q is None, "--p/--q do not apply to nigt")
        _require(gamma is not None and 0.0 < gamma < 1.0, "nigt requires --gamma in (0, 1)")
        _require(eta is not None and eta > 0.0, "nigt requires --eta > 0")
    else:
        _require(p is None and q is None, f"--p/--q do not apply to {alg}")
        if alg == "sg":
            _require(gamma is None, "--gamma does not apply to sg")
        elif gamma is not None:
            _require(0.0 < gamma <= 1.0, f"--gamma must lie in (0, 1], got {gamma}")
        if eta is not None:
            _require(eta > 0.0, f"--eta must be positive, got {eta}")

    problem = ns.get("problem")
    _require(problem in PROBLEMS, f"--problem is required and must be one of {PROBLEMS}")
    synthetic, dataset = ns.get("synthetic"), ns.get("dataset")
    dim, conditioning = ns.get("dim"), ns.get("conditioning")
    if problem == "quadratic":
        _require(
            synthetic is None and dataset is None,
            "problem 'quadratic' takes --dim/--conditioning, not --synthetic/--dataset",
        )
        _require(dim is not None and dim >= 1, "problem 'quadratic' requires --dim >= 1")
        conditioning = 1.0 if conditioning is None else float(conditioning)
        _require(conditioning >= 1.0, f"--conditioning must be >= 1, got {conditioning}")
    else:
        _require(
            dim is None and conditioning is None,
            f"--dim/--conditioning apply to quadratic, not {problem}",
        )
        _require(
            (synthetic is None) != (dataset is None),
            f"problem {problem!r} needs exactly one data source: --synthetic N or --dataset PATH",
        )
        if synthetic is not None:
            _require(synthetic >= 1, f"--synthetic must be >= 1, got {synthetic}")

    noise, sigma = ns.get("noise"), ns.get("sigma")
    if noise is None:
        noise = "none" if sigma is None else "scalar-gaussian-envelope"
    if noise == "none":
        _require(
            sigma is None,
            "--sigma needs a gaussian --noise kind; omit --noise to default to scalar-gaussian-envelope",
        )
        sigma = 0.0
    else:
        _require(
            sigma is not None and sigma > 0.0,
            f"--noise {noise!r} requires --sigma > 0",
        )

    iters = ns.get("iters")
    _require(iters is not None and iters >= 0, "--iters is required and must be >= 0")
    wall = ns.get("wall_seconds")
    if wall is not None:
        _require(wall > 0.0, f"--wall-seconds must be positive, got {wall}")
    _require(ns["log_stride"] >= 1, f"--log-stride must be >= 1, got {ns['log_stride']}")
    x0 = str(ns["x0"])
    if x0 not in ("ones", "zeros"):
        try:
            [float(v) for v in x0.split(",")]
        except ValueError:
            raise ConfigError(
                '--x0 must be "ones", "zeros", or a comma-separated vector'
            ) from None
    _require(ns["format"] in ("csv", "json"), "--format must be csv or json")

    return RunConfig(
        algorithm=alg,
        problem=problem,
        iters=int(iters),
        seed=int(ns["seed"]),
        p=p,
        q=q,
        gamma=None if gamma is None else float(gamma),
        eta=None if eta is None else float(eta),
        synthetic=synthetic,
        dataset=dataset,
        target=str(ns["target"]),
        data_seed=int(ns["data_seed"]),
        dim=dim,
        conditioning=conditioning,
        noise=noise,
        sigma=float(sigma),
        wall_seconds=wall,
        x0=x0,
        log_stride=int(ns["log_stride"]),
        out=ns.get("out"),
        format=ns["format"],
    )


def build_problem(config: RunConfig):
    """(problem, noise model, initial point) for a validated config."""
    if config.problem == "quadratic":
        problem = quadratic_problem(config.dim, config.conditioning)
    else:
        if config.synthetic is not None:
            data = generate_synthetic(config.synthetic, config.data_seed)
        else:
            data = load_csv_dataset(config.dataset, config.target)
        problem = datafit_problem(data) if config.problem == "datafit" else robust_problem(data)
    noise = NoiseModel(kind=config.noise, sigma_tilde=config.sigma)
    if config.x0 == "ones":
        x0 = np.ones(problem.dim)
    elif config.x0 == "zeros":
        x0 = np.zeros(problem.dim)
    else:
        x0 = np.array([float(v) for v in config.x0.split(",")])
        if x0.size != problem.dim:
            raise ConfigError(
                f"--x0 has {x0.size} coordinates, problem has dimension {problem.dim}"
            )
    return problem, noise, x0


def build_kind(config: RunConfig) -> AlgorithmKind:
    if config.algorithm == "mem":
        mode = "p3-special" if config.p == 3 else "general-p"
        return mem(ScheduleConfig(p=config.p, q=config.q, mode=mode))
    if config.algorithm == "nigt":
        return nigt(config.gamma, config.eta)
    if config.algorithm == "sg":
        if config.eta is not None:
            e = config.eta
            return sg(lambda k: e)
        return sg()
    g, e = config.gamma, config.eta
    return sg_pm(
        gamma_rule=None if g is None else (lambda k: g),
        eta_rule=None if e is None else (lambda k: e),
    )


def run_experiment(config: RunConfig):
    """Execute one config; returns (records, summary).

    The summary carries final and minimum metrics plus, when the problem
    publishes certified smoothness constants compatible with the schedule
    order, the aggregate constant and iteration threshold at the reporting
    accuracy 0.1. The noise scale entering that constant is the envelope
    bound sigma_tilde * sqrt(n).
    """
    problem, noise, x0 = build_problem(config)
    kind = build_kind(config)
    result = run(
        kind,
        problem,
        noise,
        x0,
        budget=config.iters,
        seed=config.seed,
        log_stride=config.log_stride,
        wall_seconds=config.wall_seconds,
    )
    records = result.records
    summary = {
        "algorithm": config.algorithm,
        "problem": config.problem,
        "iterations": result.state.k,
        "final_f": records[-1].f_val,
        "final_rel_obj": records[-1].rel_obj,
        "min_grad_norm": min(r.grad_norm for r in records),
        "oracle_calls": result.state.oracle_calls,
        "zero_direction_steps": result.state.zero_steps,
        "metric_grad_evals": result.metric_grad_evals,
    }
    c = problem.constants
    if (
        config.algorithm == "mem"
        and c is not None
        and c.L1 is not None
        and c.f_low is not None
        and c.Lp is not None
        and (c.Lp == 0.0 or c.p == config.p)
    ):
        sigma_bound = 0.0 if noise.kind == "none" else config.sigma * math.sqrt(problem.dim)
        gap = max(problem.value(x0) - c.f_low, 0.0)
        m_const = theorem_constant(config.p, gap, sigma_bound, c.L1, c.Lp)
        summary["epsilon"] = 0.1
        summary["m_const"] = m_const
        summary["k_threshold"] = iteration_threshold(config.p, m_const, 0.1)
    return records, summary


def _fmt(v: float) -> str:
    return repr(float(v))


def records_to_csv(records: Sequence[TrajectoryRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.k},{_fmt(r.f_val)},{_fmt(r.rel_obj)},{_fmt(r.grad_norm)},"
            f"{_fmt(r.mom_err)},{r.oracle_calls},{_fmt(r.elapsed_seconds)}"
        )
    return "\n".join(lines) + "\n"


def parse_records(text: str) -> Tuple[TrajectoryRecord, ...]:
    """Inverse of records_to_csv; round-trips every float exactly."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"expected header {CSV_HEADER!r}")
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 7:
            raise ValueError(f"expected 7 cells, got {len(cells)}: {ln!r}")
        out.append(
            TrajectoryRecord(
                k=int(cells[0]),
                f_val=float(cells[1]),
                rel_obj=float(cells[2]),
                grad_norm=float(cells[3]),
                mom_err=float(cells[4]),
                oracle_calls=int(cells[5]),
                elapsed_seconds=float(cells[6]),
            )
        )
    return tuple(out)


def emit(
    records: Sequence[TrajectoryRecord],
    path: str,
    format: str = "csv",
    config: Optional[RunConfig] = None,
    summary: Optional[dict] = None,
) -> None:
    """Write records to path; csv as specified by CSV_HEADER, json as an
    object with the config echo, the summary, and the record array."""
    if format == "csv":
        payload = records_to_csv(records)
    elif format == "json":
        payload = json.dumps(
            {
                "config": None if config is None else asdict(config),
                "summary": summary,
                "records": [asdict(r) for r in records],
            },
            indent=2,
        )
    else:
        raise ValueError(f"format must be csv or json, got {format!r}")
    try:
        with open(path, "w") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _label(config: RunConfig) -> str:
    if config.algorithm == "mem":
        return f"mem(q={config.q},p={config.p})"
    if config.algorithm == "nigt":
        return f"nigt(gamma={config.gamma:g},eta={config.eta:g})"
    parts = []
    if config.gamma is not None:
        parts.append(f"gamma={config.gamma:g}")
    if config.eta is not None:
        parts.append(f"eta={config.eta:g}")
    return config.algorithm + (f"({','.join(parts)})" if parts else "")


def _fingerprint(config: RunConfig):
    return (
        config.problem,
        config.synthetic,
        config.dataset,
        config.target,
        config.data_seed,
        config.dim,
        config.conditioning,
        config.noise,
        config.sigma,
        config.x0,
    )


def compare(
    configs: Sequence[RunConfig],
    budget: int,
    n_seeds: int = 10,
    base_seed: int = 0,
    labels: Optional[Sequence[str]] = None,
) -> dict:
    """Run several algorithms on one problem at an equal oracle-call
    budget, across seeds, and tabulate medians.

    Each algorithm gets budget // (calls per iteration) iterations, so the
    cumulative oracle-call counts agree to within one iteration's worth of
    calls. All runs share the problem instance; the run seed varies as
    base_seed .. base_seed + n_seeds - 1. Runs execute concurrently;
    outputs depend only on (config, seed).

    Raises:
        ValueError: no configs, configs disagreeing on problem or noise,
            or a budget below one iteration for some algorithm.
    """
    if not configs:
        raise ValueError("compare needs at least one configuration")
    if budget < 1:
        raise ValueError(f"budget must be >= 1 oracle call, got {budget}")
    fp = _fingerprint(configs[0])
    for c in configs[1:]:
        if _fingerprint(c) != fp:
            raise ValueError(
                "compare configurations must share the problem and noise; "
                f"got {fp} vs {_fingerprint(c)}"
            )
    if labels is None:
        labels = []
        for c in configs:
            base = _label(c)
            label = base
            i = 2
            while label in labels:
                label = f"{base}#{i}"
                i += 1
            labels.append(label)
    elif len(labels) != len(configs):
        raise ValueError(f"{len(labels)} labels for {len(configs)} configurations")

    seeds = list(range(base_seed, base_seed + n_seeds))
    iterations: List[int] = []
    for c in configs:
        per_iter = c.q if c.algorithm == "mem" else 1
        iters = budget // per_iter
        if iters < 1:
            raise ValueError(
                f"budget {budget} is below one iteration ({per_iter} calls) for {_label(c)}"
            )
        iterations.append(iters)

    def one(i: int, seed: int):
        cfg = replace(
            configs[i],
            iters=iterations[i],
            seed=seed,
            log_stride=max(1, iterations[i] // 200),
            wall_seconds=None,
            out=None,
        )
        records, _ = run_experiment(cfg)
        return records

    with ThreadPoolExecutor(max_workers=4) as pool:
        futures = {
            (i, s): pool.submit(one, i, s)
            for i in range(len(configs))
            for s in seeds
        }
        results = {key: f.result() for key, f in futures.items()}

    final: Dict[str, List[float]] = {}
    series: Dict[str, List[dict]] = {}
    for i, label in enumerate(labels):
        per_seed = [results[(i, s)] for s in seeds]
        final[label] = [recs[-1].rel_obj for recs in per_seed]
        rows = []
        for j, ref in enumerate(per_seed[0]):
            rows.append(
                {
                    "k": ref.k,
                    "oracle_calls": ref.oracle_calls,
                    "rel_obj_median": statistics.median(
                        recs[j].rel_obj for recs in per_seed
                    ),
                }
            )
        series[label] = rows
    median_final = {label: statistics.median(final[label]) for label in labels}
    ordering = sorted(labels, key=lambda lb: median_final[lb])
    return {
        "problem": configs[0].problem,
        "noise": configs[0].noise,
        "sigma": configs[0].sigma,
        "budget": budget,
        "seeds": seeds,
        "labels": list(labels),
        "iterations": dict(zip(labels, iterations)),
        "final": final,
        "median_final": median_final,
        "ordering": ordering,
        "series": series,
    }


def grid_search(
    config: RunConfig,
    budget: int,
    etas: Optional[Sequence[float]] = None,
    gammas: Optional[Sequence[float]] = None,
    n_seeds: int = 3,
    base_seed: int = 0,
) -> dict:
    """Sweep constant hyperparameters for a baseline and report the grid.

    Defaults: etas log-spaced 1e-3..1, gammas 0.02..0.8. The sweep covers
    eta alone for sg, (gamma, eta) pairs for sg-pm and nigt. Returns every
    grid point with its median final rel_obj, best first; the input config
    is never modified and the winner is never applied silently.
    """
    if config.algorithm == "mem":
        raise ValueError("mem's schedule is parameter-free; nothing to search")
    if etas is None:
        etas = [float(v) for v in np.geomspace(1e-3, 1.0, 7)]
    if gammas is None:
        gammas = [float(v) for v in np.geomspace(0.02, 0.8, 5)]
    if config.algorithm == "sg":
        combos = [(None, e) for e in etas]
    else:
        combos = [(g, e) for g in gammas for e in etas]
    rows = []
    for g, e in combos:
        cfg = replace(config, gamma=g, eta=e, iters=budget, seed=base_seed)
        finals = []
        for s in range(base_seed, base_seed + n_seeds):
            records, _ = run_experiment(
                replace(cfg, seed=s, log_stride=max(1, budget // 50))
            )
            finals.append(records[-1].rel_obj)
        rows.append(
            {"gamma": g, "eta": e, "median_final_rel_obj": statistics.median(finals)}
        )
    rows.sort(key=lambda r: r["median_final_rel_obj"])
    return {"algorithm": config.algorithm, "grid": rows, "best": rows[0]}


def verify_all(
    seed: int = 0,
    k_max: int = 10**4,
    bound_k_max: int = 10**6,
    n_draws: int = 10**5,
    ps: Sequence[int] = (2, 3, 4, 5, 6),
) -> dict:
    """Drive every check in the verify module and aggregate the reports.

    The report is reproducible for fixed parameters: {"passed": bool,
    "seed", "parameters", "checks": [CheckReport fields...]}.
    """
    data = generate_synthetic(30, seed)
    df = datafit_problem(data)
    rb = robust_problem(data)
    qd = quadratic_problem(20, 100.0)
    flat = quadratic_problem(10, 1.0)
    scalar_noise = NoiseModel(kind="scalar-gaussian-envelope", sigma_tilde=2.0)
    elem_noise = NoiseModel(kind="elementwise-gaussian-envelope", sigma_tilde=2.0)
    rng = np.random.default_rng(seed)
    xq = rng.standard_normal(qd.dim)
    yq = xq + 0.5 * rng.standard_normal(qd.dim)
    xd = rng.standard_normal(df.dim)
    yd = xd + 0.5 * rng.standard_normal(df.dim)
    y_unit = np.zeros(df.dim)
    y_unit[0] = 1.0

    jobs = []
    for p in ps:
        jobs.append(lambda p=p: verify_mod.schedule_cross_check(p, k_max))
        jobs.append(lambda p=p: verify_mod.sum_identity_check(p, k_max))
        jobs.append(lambda p=p: verify_mod.bound_sweep(p, bound_k_max))
    jobs.extend(
        [
            lambda: verify_mod.p3_consistency_check(k_max),
            lambda: verify_mod.gradient_check(df, 20, seed),
            lambda: verify_mod.gradient_check(rb, 20, seed + 1),
            lambda: verify_mod.gradient_check(qd, 20, seed + 2),
            lambda: verify_mod.taylor_remainder_check(qd, xq, yq, 1),
            lambda: verify_mod.taylor_remainder_check(qd, xq, yq, 2),
            lambda: verify_mod.taylor_remainder_check(qd, xq, yq, 3),
            lambda: verify_mod.taylor_remainder_check(df, xd, yd, 2),
            lambda: verify_mod.noise_unbiasedness_check(
                df, scalar_noise, np.ones(df.dim), n_draws, seed + 3
            ),
            lambda: verify_mod.noise_unbiasedness_check(
                qd, elem_noise, np.ones(qd.dim), n_draws, seed + 4
            ),
            lambda: verify_mod.noise_moment_check(
                df, scalar_noise, np.zeros(df.dim), y_unit, n_draws, seed + 5
            ),
            lambda: verify_mod.smoothness_ratio_check(flat, scalar_noise),
        ]
    )
    with ThreadPoolExecutor(max_workers=4) as pool:
        reports = [f.result() for f in [pool.submit(j) for j in jobs]]
    return {
        "passed": all(r.passed for r in reports),
        "seed": seed,
        "parameters": {
            "k_max": k_max,
            "bound_k_max": bound_k_max,
            "n_draws": n_draws,
            "ps": list(ps),
        },
        "checks": [asdict(r) for r in reports],
    }


def _cmd_run(argv: Sequence[str]) -> int:
    config = parse_config(argv)
    records, summary = run_experiment(config)
    if config.out is not None:
        emit(records, config.out, config.format, config, summary)
        print(json.dumps({"out": config.out, **summary}))
    elif config.format == "csv":
        sys.stdout.write(records_to_csv(records))
    else:
        emit_text = json.dumps(
            {
                "config": asdict(config),
                "summary": summary,
                "records": [asdict(r) for r in records],
            },
            indent=2,
        )
        print(emit_text)
    return 0


def _parse_alg_token(token: str) -> dict:
    parts = token.split(":")
    name = parts[0]
    if name == "mem":
        if len(parts) != 2:
            raise ConfigError(f"--algs: mem token must be mem:Q, got {token!r}")
        q = int(parts[1])
        return {"algorithm": "mem", "q": q, "p": q + 1}
    if name == "nigt":
        if len(parts) != 3:
            raise ConfigError(f"--algs: nigt token must be nigt:GAMMA:ETA, got {token!r}")
        return {"algorithm": "nigt", "gamma": float(parts[1]), "eta": float(parts[2])}
    if name in ("sg", "sg-pm"):
        out = {"algorithm": name}
        if len(parts) == 2:
            out["eta"] = float(parts[1])
        elif len(parts) == 3 and name == "sg-pm":
            out["gamma"] = float(parts[1])
            out["eta"] = float(parts[2])
        elif len(parts) != 1:
            raise ConfigError(f"--algs: malformed token {token!r}")
        return out
    raise ConfigError(f"--algs: unknown algorithm {name!r} in {token!r}")


def _cmd_compare(argv: Sequence[str]) -> int:
    p = _Parser(prog="momex compare", add_help=False)
    p.add_argument("--algs", required=True, metavar="TOK[,TOK...]")
    _add_problem_flags(p)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--base-seed", type=int, default=0, dest="base_seed")
    p.add_argument("--out")
    ns = p.parse_args(argv)
    tokens = [t.strip() for t in ns.algs.split(",") if t.strip()]
    if not tokens:
        raise ConfigError("--algs must name at least one algorithm")
    configs = []
    for tok in tokens:
        fields = _parse_alg_token(tok)
        base = {
            "alg": fields["algorithm"],
            "p": fields.get("p"),
            "q": fields.get("q"),
            "gamma": fields.get("gamma"),
            "eta": fields.get("eta"),
            "problem": ns.problem,
            "synthetic": ns.synthetic,
            "dataset": ns.dataset,
            "target": ns.target,
            "data_seed": ns.data_seed,
            "dim": ns.dim,
            "conditioning": ns.conditioning,
            "noise": ns.noise,
            "sigma": ns.sigma,
            "iters": ns.budget,
            "wall_seconds": None,
            "seed": None,
            "x0": ns.x0,
            "log_stride": None,
            "out": None,
            "format": None,
        }
        for key, val in _DEFAULTS.items():
            if base.get(key) is None:
                base[key] = val
        configs.append(_validate(base))
    table = compare(
        configs,
        budget=ns.budget,
        n_seeds=ns.seeds,
        base_seed=ns.base_seed,
        labels=tokens,
    )
    text = json.dumps(table, indent=2)
    if ns.out:
        with open(ns.out, "w") as fh:
            fh.write(text)
        print(json.dumps({"out": ns.out, "median_final": table["median_final"]}))
    else:
        print(text)
    return 0


def _cmd_verify(argv: Sequence[str]) -> int:
    p = _Parser(prog="momex verify", add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-max", type=int, default=10**4, dest="k_max")
    p.add_argument("--bound-k-max", type=int, default=10**6, dest="bound_k_max")
    p.add_argument("--draws", type=int, default=10**5)
    p.add_argument("--out")
    ns = p.parse_args(argv)
    report = verify_all(
        seed=ns.seed, k_max=ns.k_max, bound_k_max=ns.bound_k_max, n_draws=ns.draws
    )
    text = json.dumps(report, indent=2)
    if ns.out:
        with open(ns.out, "w") as fh:
            fh.write(text)
        print(json.dumps({"out": ns.out, "passed": report["passed"]}))
    else:
        print(text)
    return 0 if report["passed"] else 1


def _cmd_gen_data(argv: Sequence[str]) -> int:
    p = _Parser(prog="momex gen-data", add_help=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    ns = p.parse_args(argv)
    if ns.n < 1:
        raise ConfigError(f"--n must be >= 1, got {ns.n}")
    save_dataset(generate_synthetic(ns.n, ns.seed), ns.out)
    print(json.dumps({"out": ns.out, "n": ns.n, "seed": ns.seed}))
    return 0


_USAGE = """usage: momex <run|compare|verify|gen-data> [flags]

  run       one seeded experiment; CSV or JSON records
  compare   several algorithms, one problem, equal oracle-call budget
  verify    the full verification suite as a JSON report
  gen-data  write a synthetic dataset to CSV
"""


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(_USAGE)
        return 0
    cmd, rest = argv[0], argv[1:]
    try:
        if cmd == "run":
            return _cmd_run(rest)
        if cmd == "compare":
            return _cmd_compare(rest)
        if cmd == "verify":
            return _cmd_verify(rest)
        if cmd == "gen-data":
            return _cmd_gen_data(rest)
        print(f"error: unknown command {cmd!r}\n{_USAGE}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
