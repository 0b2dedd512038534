"""Independent oracles for the closed forms, bounds, and noise statistics.

Everything here re-derives its expected values from first principles
(defining equations, finite differences, Monte-Carlo estimates, analytic
second moments) rather than trusting the code under test. The dense linear
solve, not the closed-form product, is the reference for the weight
system. Checks are deterministic for a fixed seed, own their RNG streams,
and are independent of one another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .problems import (
    NoiseModel,
    Sample,
    SmoothProblem,
    stochastic_grad,
)
from .schedule import (
    p3_arrays,
    params_general,
    params_p3,
    schedule_arrays,
    solve_weights_linear,
)

__all__ = [
    "CheckReport",
    "finite_diff_grad",
    "gradient_check",
    "taylor_remainder_check",
    "lipschitz_estimate",
    "noise_unbiasedness_check",
    "noise_moment_check",
    "smoothness_ratio_check",
    "weight_residual_sweep",
    "dense_agreement_sweep",
    "sum_identity_sweep",
    "sum_identity_check",
    "schedule_cross_check",
    "bound_sweep",
    "p3_consistency_check",
]

_CHUNK = 1 << 17


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one verification check.

    worst_case is the check's headline number, oriented so that smaller is
    better; passed records whether it met the tolerance stated in detail.
    """

    name: str
    passed: bool
    worst_case: float
    samples: int
    detail: str


def finite_diff_grad(f: Callable[[np.ndarray], float], x, h=1e-5) -> np.ndarray:
    """Central-difference gradient (f(x+h e_i) - f(x-h e_i)) / (2h).

    h may be a scalar or a per-coordinate array of positive steps.
    """
    x = np.asarray(x, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    if not np.all(h > 0.0):
        raise ValueError("finite-difference steps must be positive")
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h[i])
    return g


def gradient_check(
    problem: SmoothProblem, n_points: int = 20, seed: int = 0, h: float = 1e-5
) -> CheckReport:
    """Analytic gradient against central differences at seeded points.

    Steps scale with the coordinate, h_i = h * max(1, |x_i|); the measure
    is ||fd - grad|| / ||grad||, worst over the points. Tolerance 1e-6.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        x = rng.standard_normal(problem.dim)
        steps = h * np.maximum(1.0, np.abs(x))
        fd = finite_diff_grad(problem.value, x, steps)
        g = problem.gradient(x)
        ng = float(np.linalg.norm(g))
        rel = float(np.linalg.norm(fd - g)) / ng if ng > 0.0 else math.inf
        worst = max(worst, rel)
    return CheckReport(
        name=f"gradient:{problem.name}",
        passed=worst <= 1e-6,
        worst_case=worst,
        samples=n_points,
        detail=f"worst ||fd-grad||/||grad|| over {n_points} points; tol 1e-6",
    )


def _fd_hessian_vec(problem: SmoothProblem, x: np.ndarray, dx: np.ndarray) -> np.ndarray:
    nd = float(np.linalg.norm(dx))
    eps = 1e-5 / max(1.0, nd)
    return (problem.gradient(x + eps * dx) - problem.gradient(x - eps * dx)) / (2.0 * eps)


def _expansion(problem: SmoothProblem, x: np.ndarray, dx: np.ndarray, order: int):
    """Order-`order` gradient expansion around x at x + dx."""
    if problem.taylor_gradient is not None:
        return problem.taylor_gradient(x, dx, order)
    if order == 1:
        return problem.gradient(x)
    if order == 2:
        return problem.gradient(x) + _fd_hessian_vec(problem, x, dx)
    raise ValueError(
        f"problem {problem.name!r} supports expansion orders 1 and 2, got {order}"
    )


def taylor_remainder_check(
    problem: SmoothProblem, x, y, order: int
) -> CheckReport:
    """Gradient Taylor remainder at one displacement.

    Measures r = ||grad f(x+dx) - T_order(x, dx)|| with dx = y - x, where
    T_order is the expansion with `order` derivative terms, and compares it
    against (C/order!) ||dx||^order when a certified constant C for that
    order is available (worst_case is then the signed excess r - bound,
    tolerance 1e-12 relative slack). Without a constant the check reports
    the ratio r/||dx||^order as an empirical estimate of C/order! and only
    requires it to be finite. Both sides are evaluated at the reconstructed
    point x + dx so the comparison sees the identical displacement.

    Raises:
        ValueError: order < 1, or order above what the problem supports.
    """
    x = np.asarray(x, dtype=float)
    dx = np.asarray(y, dtype=float) - x
    if order < 1:
        raise ValueError(f"expansion order must be >= 1, got {order}")
    t = _expansion(problem, x, dx, order)
    remainder = float(np.linalg.norm(problem.gradient(x + dx) - t))
    nd = float(np.linalg.norm(dx))
    c = problem.constants
    known = None
    if c is not None:
        if order == 1 and c.L1 is not None:
            known = c.L1
        elif order >= 2 and c.Lp is not None and (c.Lp == 0.0 or c.p == order):
            known = c.Lp
    if known is not None:
        bound = known / math.factorial(order) * nd**order
        excess = remainder - bound
        passed = excess <= 1e-12 * max(1.0, bound)
        detail = (
            f"remainder {remainder:.6e} vs bound {bound:.6e} "
            f"(order {order}, constant {known:g}); tol: excess <= 1e-12 rel"
        )
        return CheckReport(
            name=f"taylor:{problem.name}:order{order}",
            passed=passed,
            worst_case=excess,
            samples=1,
            detail=detail,
        )
    ratio = remainder / nd**order if nd > 0.0 else 0.0
    return CheckReport(
        name=f"taylor:{problem.name}:order{order}",
        passed=math.isfinite(ratio),
        worst_case=ratio,
        samples=1,
        detail=(
            f"no certified constant; remainder/||dx||^{order} = {ratio:.6e} "
            f"is an empirical estimate of the order-{order} constant over {order}!"
        ),
    )


def lipschitz_estimate(
    problem: SmoothProblem,
    order: int,
    n_pairs: int = 100,
    seed: int = 0,
    radius: float = 1.0,
) -> float:
    """Empirical smoothness constant from seeded pairs: an estimate, never
    a certified bound.

    order 1 maxes ||grad f(y) - grad f(x)|| / ||y - x||; order >= 2 maxes
    order! * remainder / ||y - x||^order over pairs with ||y - x|| <= radius.
    """
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(n_pairs):
        x = rng.standard_normal(problem.dim)
        d = rng.standard_normal(problem.dim)
        d *= radius * rng.uniform(0.1, 1.0) / float(np.linalg.norm(d))
        nd = float(np.linalg.norm(d))
        if order == 1:
            num = float(np.linalg.norm(problem.gradient(x + d) - problem.gradient(x)))
            best = max(best, num / nd)
        else:
            t = _expansion(problem, x, d, order)
            rem = float(np.linalg.norm(problem.gradient(x + d) - t))
            best = max(best, math.factorial(order) * rem / nd**order)
    return best


def _bridge_tolerance(scale: float) -> float:
    return 1e-10 * (1.0 + scale)


def noise_unbiasedness_check(
    problem: SmoothProblem,
    noise: NoiseModel,
    x,
    n_draws: int = 100_000,
    seed: int = 0,
) -> CheckReport:
    """E[G(x; xi)] = grad f(x), within 4 standard errors per coordinate.

    The perturbation is linear in the draw, so the coordinate z-scores
    reduce to z-scores of the draws themselves; the first few draws are
    pushed through the public oracle path to pin that reduction down.
    """
    x = np.asarray(x, dtype=float)
    g = problem.gradient(x)
    rng = np.random.default_rng(seed)
    if noise.kind == "none":
        return CheckReport(
            name=f"unbiased:{noise.kind}",
            passed=True,
            worst_case=0.0,
            samples=0,
            detail="noiseless oracle is its own mean",
        )
    scale = noise.envelope_scale(x)
    if scale == 0.0:
        return CheckReport(
            name=f"unbiased:{noise.kind}",
            passed=True,
            worst_case=0.0,
            samples=0,
            detail="envelope vanishes at this point; oracle is exact",
        )
    if noise.kind == "scalar-gaussian-envelope":
        xi = rng.standard_normal(n_draws)
        for i in range(5):
            got = stochastic_grad(problem, noise, x, Sample(float(xi[i]), -1, i))
            expect = g + scale * float(xi[i])
            if float(np.max(np.abs(got - expect))) > _bridge_tolerance(
                float(np.max(np.abs(expect)))
            ):
                raise RuntimeError("draw reduction disagrees with the oracle path")
        # every coordinate shares the one scalar draw, so one z-score covers all
        z = abs(float(xi.mean())) * math.sqrt(n_draws) / float(xi.std(ddof=1))
        detail = "scalar draw; single z-score covers every coordinate; tol 4 SE"
    else:
        xi = rng.standard_normal((n_draws, problem.dim))
        for i in range(5):
            got = stochastic_grad(problem, noise, x, Sample(xi[i], -1, i))
            expect = g + scale * xi[i]
            if float(np.max(np.abs(got - expect))) > _bridge_tolerance(
                float(np.max(np.abs(expect)))
            ):
                raise RuntimeError("draw reduction disagrees with the oracle path")
        zs = np.abs(xi.mean(axis=0)) * math.sqrt(n_draws) / xi.std(axis=0, ddof=1)
        z = float(zs.max())
        detail = f"worst coordinate z-score of {problem.dim}; tol 4 SE"
    return CheckReport(
        name=f"unbiased:{noise.kind}",
        passed=z <= 4.0,
        worst_case=z,
        samples=n_draws,
        detail=detail,
    )


def noise_moment_check(
    problem: SmoothProblem,
    noise: NoiseModel,
    x,
    y,
    n_draws: int = 100_000,
    seed: int = 0,
) -> CheckReport:
    """Monte-Carlo E||G(y) - G(x)||^2 against its analytic value.

    For the scalar envelope kind the analytic second moment is
    ||grad f(y) - grad f(x)||^2 + n (scale(y) - scale(x))^2, and each
    squared norm is an exact quadratic in the draw, so the Monte-Carlo
    side reduces to sampling that scalar quadratic; the first draws are
    run through the public oracle to validate the reduction. Tolerance is
    3 standard errors.

    Raises:
        ValueError: non-scalar noise kind, or n_draws below 10^4.
    """
    if noise.kind != "scalar-gaussian-envelope":
        raise ValueError(f"moment identity check needs the scalar kind, got {noise.kind!r}")
    if n_draws < 10_000:
        raise ValueError(f"need at least 10^4 draws, got {n_draws}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dg = problem.gradient(y) - problem.gradient(x)
    ds = noise.envelope_scale(y) - noise.envelope_scale(x)
    a = float(dg @ dg)
    b = ds * float(dg.sum())
    c = problem.dim * ds * ds
    analytic = a + c
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(n_draws)
    vals = a + 2.0 * b * xi + c * xi * xi
    for i in range(5):
        s = Sample(float(xi[i]), -1, i)
        d = stochastic_grad(problem, noise, y, s) - stochastic_grad(problem, noise, x, s)
        if abs(float(d @ d) - vals[i]) > _bridge_tolerance(a + c * (1.0 + xi[i] ** 2)):
            raise RuntimeError("quadratic reduction disagrees with the oracle path")
    mean = float(vals.mean())
    se = float(vals.std(ddof=1)) / math.sqrt(n_draws)
    # when both envelopes saturate, G(y) - G(x) is deterministic and the
    # sample SE collapses to summation roundoff; floor the denominator so
    # the z-score stays meaningful instead of dividing by ~1e-18
    floor = 1e-12 * max(1.0, abs(analytic))
    z = abs(mean - analytic) / max(se, floor)
    return CheckReport(
        name="moment-identity",
        passed=z <= 3.0,
        worst_case=z,
        samples=n_draws,
        detail=f"MC {mean:.6e} vs analytic {analytic:.6e}, SE {se:.3e}; tol 3 SE",
    )


def smoothness_ratio_check(
    problem: SmoothProblem,
    noise: NoiseModel,
    deltas: Sequence[float] = (1e-2, 1e-3, 1e-4),
) -> CheckReport:
    """Mean-squared smoothness blows up near 0: the analytic ratio

        ratio(d) = (||grad f(d e1) - grad f(0)||^2 + ||g(d e1) - g(0)||^2) / d^2

    must grow by a factor >= 1.9 whenever d is halved. A Lipschitz
    estimator would keep it bounded; the square-root envelope cannot.
    """
    if noise.kind == "none":
        raise ValueError("ratio check needs a gaussian noise kind")

    def ratio(d: float) -> float:
        z = np.zeros(problem.dim)
        yv = np.zeros(problem.dim)
        yv[0] = d
        dg = problem.gradient(yv) - problem.gradient(z)
        ds = noise.envelope_scale(yv) - noise.envelope_scale(z)
        return (float(dg @ dg) + problem.dim * ds * ds) / (d * d)

    growth = [ratio(d / 2.0) / ratio(d) for d in deltas]
    min_growth = min(growth)
    return CheckReport(
        name="ms-smoothness-ratio",
        passed=min_growth >= 1.9,
        worst_case=max(0.0, 1.9 - min_growth),
        samples=len(deltas),
        detail=f"growth per halving {[f'{g:.4f}' for g in growth]} at deltas {list(deltas)}; tol >= 1.9",
    )


def _sweep_chunks(k_max: int):
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    start = 0
    while start <= k_max:
        stop = min(start + _CHUNK, k_max + 1)
        yield np.arange(start, stop, dtype=float)
        start = stop


def weight_residual_sweep(p: int, k_max: int) -> float:
    """Worst scaled residual of the schedule weights in the defining
    system over k in 0..k_max.

    The residual for one bundle is max_r |sum_t theta_t / gamma_t^r - 1|
    divided by (max_r sum_t gamma_t^-r) * max_t |theta_t|, measured
    straight from the defining equations.
    """
    worst = 0.0
    for ks in _sweep_chunks(k_max):
        _, gam, th = schedule_arrays(p, ks)
        u = 1.0 / gam
        num = np.zeros(ks.shape)
        row_norm = np.zeros(ks.shape)
        for r in range(1, gam.shape[0] + 1):
            rows = u ** float(r)
            num = np.maximum(num, np.abs((rows * th).sum(axis=0) - 1.0))
            row_norm = np.maximum(row_norm, rows.sum(axis=0))
        denom = row_norm * np.abs(th).max(axis=0)
        worst = max(worst, float((num / denom).max()))
    return worst


def dense_agreement_sweep(p: int, k_max: int) -> float:
    """Worst relative gap between the production weights and the dense
    linear-solve oracle over k in 0..k_max.

    Goes through solve_weights_linear bundle by bundle; the oracle shares
    no code with the closed-form product.
    """
    worst = 0.0
    for k in range(k_max + 1):
        params = params_general(k, p)
        ref = solve_weights_linear(params.gammas)
        gap = float(np.max(np.abs(params.thetas - ref))) / float(np.max(np.abs(ref)))
        worst = max(worst, gap)
    return worst


def sum_identity_sweep(p: int, k_max: int) -> Tuple[float, int]:
    """Worst relative gap of the product identity for the weight sum, and
    the number of sign-pattern violations, over k in 0..k_max.

    The identity: sum_t theta_t = 1 - prod_t (1 - gamma_t). Signs must
    alternate starting positive.
    """
    worst = 0.0
    violations = 0
    for ks in _sweep_chunks(k_max):
        _, gam, th = schedule_arrays(p, ks)
        direct = th.sum(axis=0)
        s = np.zeros(ks.shape)
        for t in range(gam.shape[0]):
            s += gam[t] - s * gam[t]
        worst = max(worst, float(np.max(np.abs(direct - s) / np.abs(s))))
        for t in range(th.shape[0]):
            good = th[t] > 0.0 if t % 2 == 0 else th[t] < 0.0
            violations += int(np.count_nonzero(~good))
    return worst, violations


def sum_identity_check(p: int, k_max: int) -> CheckReport:
    """CheckReport wrapper over sum_identity_sweep; tol 1e-12 and zero
    sign violations."""
    worst, violations = sum_identity_sweep(p, k_max)
    return CheckReport(
        name=f"sum-identity:p{p}",
        passed=worst <= 1e-12 and violations == 0,
        worst_case=worst,
        samples=k_max + 1,
        detail=f"relative gap tol 1e-12; sign violations {violations} (must be 0)",
    )


def schedule_cross_check(p: int, k_max: int) -> CheckReport:
    """Residual sweep and dense-solve agreement, aggregated.

    worst_case is the larger of the two maxima, each in units of its own
    tolerance (residual 1e-9, agreement 1e-8); at or below 1 passes.
    """
    if not 2 <= p <= 6:
        raise ValueError(f"cross check covers p in 2..6, got {p}")
    residual = weight_residual_sweep(p, k_max)
    agreement = dense_agreement_sweep(p, k_max)
    worst = max(residual / 1e-9, agreement / 1e-8)
    return CheckReport(
        name=f"schedule-cross:p{p}",
        passed=worst <= 1.0,
        worst_case=worst,
        samples=k_max + 1,
        detail=(
            f"residual {residual:.3e} (tol 1e-9), dense agreement "
            f"{agreement:.3e} (tol 1e-8); worst_case in tolerance units"
        ),
    )


def bound_sweep(p: int, k_max: int = 10**6) -> CheckReport:
    """Every schedule bound, at every k in 0..k_max.

    For all p: the weight sum lies in [1/(2c), ln(2p-1)/c] with
    c = (k+p)^(2p/(3p+1)); theta_t^2 <= 16 ((p-1)!)^2 / (t c)^2; the
    discount-weight contraction holds; and p_k <= p_{k+1} <= 2 p_k. For
    p = 3 additionally, on the dedicated schedule: the weight sum lies
    strictly inside (1/(k+3)^(3/5), 1.5/(k+3)^(3/5)), theta_1^2 <=
    4/(k+3)^(6/5), and theta_2^2 <= 1/(4 (k+3)^(6/5)), plus its own
    contraction with divisor 2.

    worst_case is the largest signed violation (negative = slack
    everywhere); closed bounds pass at <= 0, the strict interval needs
    < 0.
    """
    if not 2 <= p <= 6:
        raise ValueError(f"bound sweep covers p in 2..6, got {p}")
    d = 3.0 * p + 1.0
    fac = 16.0 * float(math.factorial(p - 1)) ** 2
    log_cap = math.log(2.0 * p - 1.0)
    divisor = 2.0 if p == 3 else p + 1.0
    worst_closed = -math.inf
    worst_strict = -math.inf
    for ks in _sweep_chunks(k_max):
        lg = np.log(ks + p)
        c = np.exp(2.0 * p / d * lg)
        _, gam, th = schedule_arrays(p, ks)
        s = np.zeros(ks.shape)
        for t in range(gam.shape[0]):
            s += gam[t] - s * gam[t]
        vs = [1.0 / (2.0 * c) - s, s - log_cap / c]
        for t in range(1, p):
            vs.append(th[t - 1] ** 2 - fac / (t * c) ** 2)
        pk = np.exp((p - 1.0) / d * lg)
        pk1 = np.exp((p - 1.0) / d * np.log(ks + p + 1.0))
        vs.append((1.0 - s) * pk1 - (1.0 - s / divisor) * pk)
        vs.append(pk - pk1)
        vs.append(pk1 - 2.0 * pk)
        worst_closed = max(worst_closed, max(float(v.max()) for v in vs))
        if p == 3:
            _, _, th3 = p3_arrays(ks)
            c3 = np.exp(0.6 * np.log(ks + 3.0))
            s3 = th3[0] + th3[1]
            strict = [1.0 / c3 - s3, s3 - 1.5 / c3]
            worst_strict = max(worst_strict, max(float(v.max()) for v in strict))
            closed3 = [
                th3[0] ** 2 - 4.0 / c3**2,
                th3[1] ** 2 - 1.0 / (4.0 * c3**2),
            ]
            pk3 = np.exp(0.2 * np.log(ks + 3.0))
            pk31 = np.exp(0.2 * np.log(ks + 4.0))
            closed3.append((1.0 - s3) * pk31 - (1.0 - s3 / 2.0) * pk3)
            worst_closed = max(worst_closed, max(float(v.max()) for v in closed3))
    passed = worst_closed <= 0.0 and (p != 3 or worst_strict < 0.0)
    worst = worst_closed if p != 3 else max(worst_closed, worst_strict)
    return CheckReport(
        name=f"bounds:p{p}",
        passed=passed,
        worst_case=worst,
        samples=k_max + 1,
        detail=(
            f"largest signed violation; closed bounds need <= 0 "
            f"(measured {worst_closed:.3e})"
            + (
                f", strict interval needs < 0 (measured {worst_strict:.3e})"
                if p == 3
                else ""
            )
        ),
    )


def p3_consistency_check(k_max: int = 10**4) -> CheckReport:
    """The dedicated order-3 schedule against the general one at p = 3,
    every field, relative tolerance 1e-14."""
    worst = 0.0
    for k in range(k_max + 1):
        a = params_general(k, 3)
        b = params_p3(k)
        for u, v in (
            (a.eta, b.eta),
            (a.theta_sum, b.theta_sum),
            (a.gammas[0], b.gammas[0]),
            (a.gammas[1], b.gammas[1]),
            (a.thetas[0], b.thetas[0]),
            (a.thetas[1], b.thetas[1]),
        ):
            worst = max(worst, abs(u - v) / abs(v))
    return CheckReport(
        name="p3-consistency",
        passed=worst <= 1e-14,
        worst_case=worst,
        samples=k_max + 1,
        detail="relative gap between general p=3 and dedicated bundles; tol 1e-14",
    )
