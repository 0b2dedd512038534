"""Normalized stochastic gradient methods built from a shared step kernel.

The central method evaluates the stochastic gradient at q extrapolated
points per iteration, all on one shared noise draw, combines them with the
scheduled weights, and moves a fixed distance eta along the normalized
momentum. Baselines reuse the same kernel where they coincide with it: the
single-extrapolation variant with constant parameters IS the implicit
gradient transport baseline, bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .problems import NoiseModel, Sample, SmoothProblem, draw_sample, stochastic_grad
from .schedule import (
    IterationParams,
    ScheduleConfig,
    init_params,
    params_for,
    solve_weights_closed_form,
)

__all__ = [
    "OptimizerState",
    "AlgorithmKind",
    "TrajectoryRecord",
    "RunResult",
    "initial_state",
    "extrapolate",
    "momentum_update",
    "normalized_step",
    "mem_step",
    "sg_step",
    "sgpm_step",
    "nigt_step",
    "mem",
    "sg",
    "sg_pm",
    "nigt",
    "run",
    "select_output_iterate",
]


@dataclass(frozen=True, eq=False)
class OptimizerState:
    """Everything iteration k needs from iteration k-1.

    carry holds the parameters used during the previous iteration; the
    extrapolation at iteration k reads last iteration's gammas, not the
    current ones. zs keeps the most recent query points for inspection.
    """

    x_prev: np.ndarray
    x_cur: np.ndarray
    m: np.ndarray
    k: int
    carry: IterationParams
    oracle_calls: int = 0
    zero_steps: int = 0
    zs: Tuple[np.ndarray, ...] = ()


def initial_state(x0, q: int) -> OptimizerState:
    """State before iteration 0: x^-1 = x^0, m^-1 = 0, init carry row."""
    x0 = np.asarray(x0, dtype=float).copy()
    if x0.ndim != 1:
        raise ValueError(f"x0 must be 1-d, got shape {x0.shape}")
    return OptimizerState(
        x_prev=x0.copy(),
        x_cur=x0,
        m=np.zeros_like(x0),
        k=0,
        carry=init_params(q),
    )


def extrapolate(x_cur: np.ndarray, x_prev: np.ndarray, gamma: float) -> np.ndarray:
    """z = x_cur + ((1 - gamma)/gamma) (x_cur - x_prev)."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    if gamma == 1.0:
        return x_cur
    return x_cur + ((1.0 - gamma) / gamma) * (x_cur - x_prev)


def momentum_update(
    m_prev: np.ndarray, thetas: Sequence[float], grads: Sequence[np.ndarray]
) -> np.ndarray:
    """m = (1 - sum(theta)) m_prev + sum_t theta_t g_t."""
    if len(thetas) != len(grads):
        raise ValueError(f"{len(thetas)} weights for {len(grads)} gradients")
    m = (1.0 - math.fsum(thetas)) * m_prev
    for th, g in zip(thetas, grads):
        m = m + th * g
    return m


def normalized_step(
    x_cur: np.ndarray, m: np.ndarray, eta: float
) -> Tuple[np.ndarray, bool]:
    """x - eta m/||m||; a zero direction leaves x unchanged and flags it."""
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    nm = float(np.linalg.norm(m))
    if nm == 0.0:
        return x_cur, True
    return x_cur - (eta / nm) * m, False


Oracle = Callable[[np.ndarray, Sample], np.ndarray]


def mem_step(
    state: OptimizerState, params: IterationParams, oracle: Oracle, sample: Sample
) -> OptimizerState:
    """One iteration of the multi-extrapolated method.

    Queries the oracle at the q points extrapolated with the carried
    (previous-iteration) gammas, all on the shared sample, folds them into
    the momentum with the carried thetas, then steps with this iteration's
    eta. params becomes the next carry.
    """
    if params.k != state.k:
        raise ValueError(f"params are for k={params.k}, state is at k={state.k}")
    zs = tuple(
        extrapolate(state.x_cur, state.x_prev, g) for g in state.carry.gammas
    )
    grads = [oracle(z, sample) for z in zs]
    m = momentum_update(state.m, state.carry.thetas, grads)
    x_next, zero = normalized_step(state.x_cur, m, params.eta)
    return OptimizerState(
        x_prev=state.x_cur,
        x_cur=x_next,
        m=m,
        k=state.k + 1,
        carry=params,
        oracle_calls=state.oracle_calls + len(zs),
        zero_steps=state.zero_steps + int(zero),
        zs=zs,
    )


def sg_step(
    state: OptimizerState, eta: float, oracle: Oracle, sample: Sample
) -> OptimizerState:
    """Plain stochastic gradient: x - eta g, no normalization, m := g."""
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    g = oracle(state.x_cur, sample)
    return OptimizerState(
        x_prev=state.x_cur,
        x_cur=state.x_cur - eta * g,
        m=g,
        k=state.k + 1,
        carry=state.carry,
        oracle_calls=state.oracle_calls + 1,
        zero_steps=state.zero_steps,
        zs=(state.x_cur,),
    )


def sgpm_step(
    state: OptimizerState, gamma: float, eta: float, oracle: Oracle, sample: Sample
) -> OptimizerState:
    """Normalized gradient with Polyak momentum, no extrapolation.

    m = (1 - theta) m_prev + theta g(x) with theta carried from the
    previous iteration (theta = 1 on the first step), then the normalized
    eta step. gamma becomes next iteration's mixing weight.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    g = oracle(state.x_cur, sample)
    m = momentum_update(state.m, state.carry.thetas, [g])
    x_next, zero = normalized_step(state.x_cur, m, eta)
    carry = IterationParams(
        k=state.k,
        eta=eta,
        gammas=np.array([1.0]),
        thetas=np.array([gamma]),
        theta_sum=gamma,
    )
    return OptimizerState(
        x_prev=state.x_cur,
        x_cur=x_next,
        m=m,
        k=state.k + 1,
        carry=carry,
        oracle_calls=state.oracle_calls + 1,
        zero_steps=state.zero_steps + int(zero),
        zs=(state.x_cur,),
    )


def _constant_params(k: int, gamma: float, eta: float) -> IterationParams:
    gammas = np.array([gamma])
    thetas = solve_weights_closed_form(gammas)
    return IterationParams(
        k=k, eta=eta, gammas=gammas, thetas=thetas, theta_sum=float(thetas[0])
    )


def nigt_step(
    state: OptimizerState, gamma: float, eta: float, oracle: Oracle, sample: Sample
) -> OptimizerState:
    """Implicit gradient transport step: the q = 1 kernel with constant
    (gamma, eta). Delegation, not reimplementation, so the equivalence is
    exact by construction."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    return mem_step(state, _constant_params(state.k, gamma, eta), oracle, sample)


GammaRule = Callable[[int], float]
EtaRule = Callable[[int], float]


@dataclass(frozen=True)
class AlgorithmKind:
    """A method plus whatever parameter source it uses.

    Exactly one of schedule (mem), constant gamma/eta (nigt), or the
    per-iteration rules (sg, sg-pm) is populated.
    """

    name: str
    schedule: Optional[ScheduleConfig] = None
    gamma: Optional[float] = None
    eta: Optional[float] = None
    gamma_rule: Optional[GammaRule] = None
    eta_rule: Optional[EtaRule] = None

    @property
    def q(self) -> int:
        return self.schedule.q if self.schedule is not None else 1


def mem(schedule: ScheduleConfig) -> AlgorithmKind:
    return AlgorithmKind(name="mem", schedule=schedule)


def sg(eta_rule: Optional[EtaRule] = None) -> AlgorithmKind:
    """Decaying-step gradient descent; default eta_k = (k+1)^(-1/2)."""
    return AlgorithmKind(
        name="sg", eta_rule=eta_rule or (lambda k: (k + 1.0) ** -0.5)
    )


def sg_pm(
    gamma_rule: Optional[GammaRule] = None, eta_rule: Optional[EtaRule] = None
) -> AlgorithmKind:
    """Normalized Polyak momentum; defaults gamma_k = (k+1)^(-1/2),
    eta_k = (k+1)^(-3/4)."""
    return AlgorithmKind(
        name="sg-pm",
        gamma_rule=gamma_rule or (lambda k: (k + 1.0) ** -0.5),
        eta_rule=eta_rule or (lambda k: (k + 1.0) ** -0.75),
    )


def nigt(gamma: float, eta: float) -> AlgorithmKind:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    return AlgorithmKind(name="nigt", gamma=gamma, eta=eta)


@dataclass(frozen=True)
class TrajectoryRecord:
    """One logged row; field order matches the CSV column order."""

    k: int
    f_val: float
    rel_obj: float
    grad_norm: float
    mom_err: float
    oracle_calls: int
    elapsed_seconds: float


@dataclass(frozen=True, eq=False)
class RunResult:
    records: Tuple[TrajectoryRecord, ...]
    state: OptimizerState
    iterates: Tuple[np.ndarray, ...]
    metric_grad_evals: int


def _advance(
    kind: AlgorithmKind,
    state: OptimizerState,
    oracle: Oracle,
    sample: Sample,
) -> OptimizerState:
    k = state.k
    if kind.name == "mem":
        return mem_step(state, params_for(kind.schedule, k), oracle, sample)
    if kind.name == "nigt":
        return nigt_step(state, kind.gamma, kind.eta, oracle, sample)
    if kind.name == "sg-pm":
        return sgpm_step(state, kind.gamma_rule(k), kind.eta_rule(k), oracle, sample)
    if kind.name == "sg":
        return sg_step(state, kind.eta_rule(k), oracle, sample)
    raise ValueError(f"unknown algorithm {kind.name!r}")


def run(
    kind: AlgorithmKind,
    problem: SmoothProblem,
    noise: NoiseModel,
    x0,
    budget: int,
    seed: int,
    log_stride: int = 1,
    wall_seconds: Optional[float] = None,
    store_iterates: bool = False,
) -> RunResult:
    """Drive a method for `budget` iterations and log its trajectory.

    Row k pairs x^k with the momentum computed during iteration k (the
    momentum the convergence measure couples to x^k); the row logged before
    any iteration has run uses a zero momentum sentinel, so its mom_err is
    ||grad f(x^0)||. Metric gradients (for grad_norm and mom_err) are exact
    and counted separately from oracle calls. Logging happens every
    log_stride iterations, plus the last iteration and a closing row at
    k = budget.

    wall_seconds, when set, stops the loop early after the first iteration
    that exceeds it; the closing row still refers to the last completed
    iterate. seed feeds the per-iteration noise draws only, never the data.
    """
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    if log_stride < 1:
        raise ValueError(f"log_stride must be >= 1, got {log_stride}")
    state = initial_state(x0, kind.q)
    f0 = problem.value(state.x_cur)
    t0 = time.perf_counter()
    records = []
    iterates = [state.x_cur.copy()] if store_iterates else []
    metric_evals = 0

    def log_row(k: int, x: np.ndarray, m: Optional[np.ndarray], calls: int):
        nonlocal metric_evals
        g = problem.gradient(x)
        metric_evals += 1
        f = problem.value(x)
        records.append(
            TrajectoryRecord(
                k=k,
                f_val=float(f),
                rel_obj=float(f / f0) if f0 != 0.0 else float("nan"),
                grad_norm=float(np.linalg.norm(g)),
                mom_err=float(np.linalg.norm((m if m is not None else 0.0) - g)),
                oracle_calls=calls,
                elapsed_seconds=time.perf_counter() - t0,
            )
        )

    if budget == 0:
        log_row(0, state.x_cur, None, 0)
        return RunResult(
            records=tuple(records),
            state=state,
            iterates=tuple(iterates),
            metric_grad_evals=metric_evals,
        )

    for k in range(budget):
        sample = draw_sample(noise, problem.dim, seed, k)
        prev_x = state.x_cur
        state = _advance(
            kind,
            state,
            lambda z, s: stochastic_grad(problem, noise, z, s),
            sample,
        )
        if store_iterates:
            iterates.append(state.x_cur.copy())
        if k % log_stride == 0 or k == budget - 1:
            # row k pairs x^k (the point the momentum was computed at) with m^k
            log_row(k, prev_x, state.m, state.oracle_calls)
        if wall_seconds is not None and time.perf_counter() - t0 > wall_seconds:
            break
    log_row(state.k, state.x_cur, state.m, state.oracle_calls)
    return RunResult(
        records=tuple(records),
        state=state,
        iterates=tuple(iterates),
        metric_grad_evals=metric_evals,
    )


def select_output_iterate(
    iterates: Sequence[np.ndarray], rng: np.random.Generator
) -> np.ndarray:
    """Uniform draw over x^0 .. x^{K-1} (the final iterate is excluded)."""
    if len(iterates) < 2:
        raise ValueError("need at least two stored iterates (x^0 and x^1)")
    return iterates[int(rng.integers(0, len(iterates) - 1))]
