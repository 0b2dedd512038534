"""Per-iteration schedules for extrapolated-momentum methods.

Each iteration of the optimizer consumes one parameter bundle: a step size
eta_k, extrapolation coefficients gamma_{k,1..q} in (0,1), and signed
momentum weights theta_{k,1..q}. The weights are tied to the gammas by the
reciprocal-power system

    sum_t theta_t / gamma_t**r = 1    for r = 1..q,                    (*)

whose coefficient matrix is Vandermonde-like in the reciprocals 1/gamma_t.
This module evaluates the built-in decreasing schedules, solves (*) either
in closed form (the production path) or by dense factorization (an
independent oracle), and measures the identities, sign pattern, and bounds
that the closed form is supposed to satisfy.

All values are plain 64-bit floats; every function here is pure and every
returned object is immutable, so bundles can be shared freely across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "DENSE_Q_CAP",
    "COND_LIMIT",
    "MODES",
    "ScheduleConfig",
    "IterationParams",
    "PotentialWeight",
    "WeightDiagnostics",
    "IllConditionedSystem",
    "params_general",
    "params_p3",
    "params_for",
    "init_params",
    "solve_weights_closed_form",
    "solve_weights_linear",
    "weight_sum_closed_form",
    "validate",
    "potential_weight",
    "check_potential_inequality",
    "theorem_constant",
    "iteration_threshold",
    "schedule_arrays",
    "p3_arrays",
]

# The reciprocal-power matrix of (*) is Vandermonde-like and its condition
# number explodes with q; the dense oracle refuses beyond this cap. The
# closed form has no such limit and is the path production code uses.
DENSE_Q_CAP = 8
COND_LIMIT = 1e12

MODES = ("general-p", "p3-special", "custom")


class IllConditionedSystem(ValueError):
    """Raised when the dense weight solve cannot be trusted."""


def _check_order(p) -> None:
    if not isinstance(p, (int, np.integer)) or p < 2:
        raise ValueError(f"smoothness order must be an integer >= 2, got {p!r}")


def _check_index(k) -> None:
    if k < 0:
        raise ValueError(f"iteration index must be >= 0, got {k}")


def _as_gamma_array(gammas) -> np.ndarray:
    g = np.asarray(gammas, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("gammas must be a nonempty 1-d array")
    if not np.all((g > 0.0) & (g < 1.0)):
        raise ValueError(f"extrapolation coefficients must lie in (0,1), got {g}")
    if g.size > 1 and not np.all(np.diff(g) < 0.0):
        raise ValueError(
            f"extrapolation coefficients must be strictly decreasing, got {g}"
        )
    return g


@dataclass(frozen=True)
class ScheduleConfig:
    """Which per-iteration schedule a method runs under.

    Modes "general-p" and "p3-special" pair q = p - 1 extrapolations with
    the built-in decreasing rules; "p3-special" is the dedicated order-3
    form and requires p = 3. Mode "custom" takes user rules for the gammas
    and the step size. Custom gammas are experimental: the weight solve only
    requires them strictly decreasing in (0,1), and nothing else guides
    their choice.
    """

    p: int
    q: int
    mode: str = "general-p"
    custom_gammas: Optional[Callable[[int], Sequence[float]]] = None
    custom_eta: Optional[Callable[[int], float]] = None

    def __post_init__(self):
        _check_order(self.p)
        if self.q < 1:
            raise ValueError(f"extrapolation count must be >= 1, got {self.q}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode in ("general-p", "p3-special") and self.q != self.p - 1:
            raise ValueError("built-in schedules pair q = p - 1")
        if self.mode == "p3-special" and self.p != 3:
            raise ValueError("p3-special requires p = 3")
        if self.mode == "custom" and (
            self.custom_gammas is None or self.custom_eta is None
        ):
            raise ValueError("custom mode needs custom_gammas and custom_eta rules")


@dataclass(frozen=True, eq=False)
class IterationParams:
    """One iteration's parameter bundle.

    Schedule outputs keep the gammas strictly decreasing in (0,1), the
    thetas alternating in sign starting positive, and theta_sum inside
    (0,1); validate() measures those properties for hand-built bundles.
    theta_sum is stored as the exactly rounded sum of the thetas. The
    warm-up row from init_params() intentionally sits outside these
    conventions (gamma = 1, equal positive weights).
    """

    k: int
    eta: float
    gammas: np.ndarray
    thetas: np.ndarray
    theta_sum: float

    def __post_init__(self):
        g = np.array(self.gammas, dtype=float)
        t = np.array(self.thetas, dtype=float)
        if g.ndim != 1 or g.shape != t.shape:
            raise ValueError("gammas and thetas must be 1-d arrays of equal length")
        g.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "thetas", t)

    @property
    def q(self) -> int:
        return self.gammas.size


@dataclass(frozen=True)
class PotentialWeight:
    """Error-discount weight p_k paired with its iteration index."""

    k: int
    value: float


@dataclass(frozen=True)
class WeightDiagnostics:
    """How well a bundle satisfies (*) and its side conditions.

    residual is ||R theta - 1||_inf / (||R||_inf ||theta||_inf) with R the
    reciprocal-power matrix: the backward-stable normalization, comparable
    across iterations even though the reciprocal powers grow without bound.
    """

    residual: float
    theta_sum_in_unit: bool
    signs_alternate: bool


def params_general(k: int, p: int) -> IterationParams:
    """Parameter bundle of the order-p schedule at iteration k.

    With d = 3p + 1 and the shared power c = (k+p)^(2p/d):

        eta_k = (k+p)^(-(2p+1)/d),    gamma_{k,t} = 1/(t c),  t = 1..p-1,

    and the thetas solve (*) for those gammas via the closed form. Both
    exponentials share one log of (k+p) so a single bundle never mixes
    inconsistent roundings of the base power.

    Raises:
        ValueError: p < 2 or k < 0.
        OverflowError: k beyond 64-bit float range.
    """
    _check_order(p)
    _check_index(k)
    try:
        base = float(k) + p
    except OverflowError as exc:
        raise OverflowError("iteration index exceeds 64-bit float range") from exc
    lg = math.log(base)
    d = 3.0 * p + 1.0
    c = math.exp(2.0 * p / d * lg)
    if not math.isfinite(c):
        raise OverflowError(f"(k+p)^(2p/(3p+1)) overflows at k={k}, p={p}")
    eta = math.exp(-(2.0 * p + 1.0) / d * lg)
    t = np.arange(1, p, dtype=float)
    gammas = 1.0 / (t * c)
    thetas = solve_weights_closed_form(gammas)
    return IterationParams(
        k=k, eta=eta, gammas=gammas, thetas=thetas, theta_sum=math.fsum(thetas)
    )


def params_p3(k: int) -> IterationParams:
    """Bundle of the dedicated third-order schedule, in its literal form.

        eta_k    = (k+3)^(-7/10)
        gamma_1  = (k+3)^(-3/5),          gamma_2 = gamma_1 / 2
        theta_1  = (2(k+3)^(3/5) - 1) / (k+3)^(6/5)
        theta_2  = (1 - (k+3)^(3/5)) / (2 (k+3)^(6/5))

    Agrees with params_general(k, 3) to a few ulp; the general path reaches
    the same thetas through the closed-form product instead of these reduced
    fractions.
    """
    _check_index(k)
    lg = math.log(float(k) + 3.0)
    c = math.exp(3.0 / 5.0 * lg)
    eta = math.exp(-7.0 / 10.0 * lg)
    c2 = c * c
    gammas = np.array([1.0 / c, 0.5 / c])
    thetas = np.array([(2.0 * c - 1.0) / c2, (1.0 - c) / (2.0 * c2)])
    return IterationParams(
        k=k, eta=eta, gammas=gammas, thetas=thetas, theta_sum=math.fsum(thetas)
    )


def params_for(config: ScheduleConfig, k: int) -> IterationParams:
    """Bundle for iteration k under the configured mode."""
    if config.mode == "p3-special":
        return params_p3(k)
    if config.mode == "general-p":
        return params_general(k, config.p)
    gammas = np.asarray(config.custom_gammas(k), dtype=float)
    if gammas.size != config.q:
        raise ValueError(
            f"custom rule returned {gammas.size} gammas, config says q={config.q}"
        )
    thetas = solve_weights_closed_form(gammas)
    return IterationParams(
        k=k,
        eta=float(config.custom_eta(k)),
        gammas=gammas,
        thetas=thetas,
        theta_sum=math.fsum(thetas),
    )


def init_params(q: int) -> IterationParams:
    """Warm-up row consumed by the first iteration.

    gamma = 1 pins every query point to the current iterate and the q
    gradient draws enter with equal weight 1/q, so the first momentum is the
    plain averaged gradient. Its eta is NaN on purpose: nothing may consume
    the warm-up step size.
    """
    if q < 1:
        raise ValueError(f"extrapolation count must be >= 1, got {q}")
    return IterationParams(
        k=-1,
        eta=math.nan,
        gammas=np.ones(q),
        thetas=np.full(q, 1.0 / q),
        theta_sum=1.0,
    )


def solve_weights_closed_form(gammas) -> np.ndarray:
    """Unique solution of (*) written directly in the gammas.

        theta_t = gamma_t**q * prod_{s != t} (gamma_s - 1) / (gamma_s - gamma_t)

    Every factor stays well scaled as the gammas shrink, and at q = 1 the
    empty product collapses to theta = gamma exactly. Signs alternate:
    theta_t > 0 for odd t, theta_t < 0 for even t.
    """
    g = _as_gamma_array(gammas)
    q = g.size
    if q == 1:
        return g.copy()
    th = np.empty(q)
    for i in range(q):
        f = 1.0
        for s in range(q):
            if s != i:
                f *= (g[s] - 1.0) / (g[s] - g[i])
        th[i] = g[i] ** q * f
    return th


def solve_weights_linear(gammas) -> np.ndarray:
    """Dense-factorization oracle for (*).

    Builds the reciprocal-power matrix R[r,t] = (1/gamma_t)**r, equilibrates
    each row by its largest entry, and solves the scaled system. The raw
    rows span many orders of magnitude, hence the q cap and the condition
    check on the equilibrated matrix. Production code wants
    solve_weights_closed_form; this path exists so the closed form can be
    checked against an independent solver.

    Raises:
        ValueError: q above DENSE_Q_CAP or invalid gammas.
        IllConditionedSystem: equilibrated condition number above COND_LIMIT.
    """
    g = _as_gamma_array(gammas)
    q = g.size
    if q > DENSE_Q_CAP:
        raise ValueError(f"dense solve supports q <= {DENSE_Q_CAP}, got {q}")
    u = 1.0 / g
    rows = u[None, :] ** np.arange(1, q + 1, dtype=float)[:, None]
    scale = rows.max(axis=1)
    eq = rows / scale[:, None]
    cond = float(np.linalg.cond(eq))
    if cond > COND_LIMIT:
        raise IllConditionedSystem(
            f"equilibrated system condition {cond:.3e} exceeds {COND_LIMIT:.0e}"
        )
    return np.linalg.solve(eq, 1.0 / scale)


def weight_sum_closed_form(gammas) -> float:
    """Sum of the (*) weights without solving for them.

    Algebraically 1 - prod_t (1 - gamma_t); accumulated as s <- s + g - s*g
    so every partial term stays positive and no leading digits cancel.
    """
    g = _as_gamma_array(gammas)
    s = 0.0
    for gt in g:
        s += gt - s * gt
    return float(s)


def validate(params: IterationParams) -> WeightDiagnostics:
    """Measure a bundle against (*), the unit-interval sum, and the signs.

    Never raises; failures are carried in the flags so sweeps can aggregate.
    """
    g = params.gammas
    th = params.thetas
    u = 1.0 / g
    worst = 0.0
    row_norm = 0.0
    for r in range(1, g.size + 1):
        row = u ** float(r)
        worst = max(worst, abs(float(row @ th) - 1.0))
        row_norm = max(row_norm, float(row.sum()))
    denom = row_norm * float(np.max(np.abs(th)))
    residual = worst / denom if denom > 0.0 else math.inf
    signs = bool(np.all(th[0::2] > 0.0)) and bool(np.all(th[1::2] < 0.0))
    return WeightDiagnostics(
        residual=residual,
        theta_sum_in_unit=bool(0.0 < params.theta_sum < 1.0),
        signs_alternate=signs,
    )


def _order_of(config) -> int:
    if isinstance(config, ScheduleConfig):
        return config.p
    p = int(config)
    _check_order(p)
    return p


def potential_weight(k: int, config) -> PotentialWeight:
    """Error-discount weight p_k = (k+p)^((p-1)/(3p+1)).

    At p = 3 the exponent reduces to 1/5, which is also what the dedicated
    third-order analysis uses, so one formula covers both modes. Accepts a
    ScheduleConfig or a bare order p. Nondecreasing in k, and never more
    than doubles from one index to the next.
    """
    _check_index(k)
    p = _order_of(config)
    value = math.exp((p - 1.0) / (3.0 * p + 1.0) * math.log(float(k) + p))
    return PotentialWeight(k=k, value=value)


def check_potential_inequality(k: int, config) -> bool:
    """True when (1 - S_k) p_{k+1} <= (1 - S_k / d) p_k.

    S_k is the iteration's weight sum and d = 2 at order 3, d = p + 1
    otherwise. This is the contraction the error-discount weights were
    chosen for; the built-in schedules satisfy it at every k.
    """
    cfg = (
        config
        if isinstance(config, ScheduleConfig)
        else ScheduleConfig(p=_order_of(config), q=_order_of(config) - 1)
    )
    params = params_for(cfg, k)
    s = params.theta_sum
    pk = potential_weight(k, cfg.p).value
    pk1 = potential_weight(k + 1, cfg.p).value
    d = 2.0 if cfg.p == 3 else cfg.p + 1.0
    return bool((1.0 - s) * pk1 <= (1.0 - s / d) * pk)


def theorem_constant(
    p: int, f0_minus_flow: float, sigma: float, L1: float, Lp: float
) -> float:
    """Reporting constant M_p aggregating a problem's scale parameters.

    Order 3 has its own sharper form; every other order uses the general
    one, evaluated literally. Monotone increasing in each argument. This is
    a diagnostic for summaries and never gates execution.
    """
    _check_order(p)
    for name, v in (
        ("f0_minus_flow", f0_minus_flow),
        ("sigma", sigma),
        ("L1", L1),
        ("Lp", Lp),
    ):
        if v < 0.0:
            raise ValueError(f"{name} must be nonnegative, got {v}")
    if p == 3:
        return 4.0 * (f0_minus_flow + 19.0 * sigma**2 + L1 + 4.0 * Lp**2 + 2.0)
    pf = float(math.factorial(p))
    return 4.0 * (
        f0_minus_flow
        + p * sigma**2
        + 1.5 * L1
        + 7.0 * Lp**2 / pf**2
        + 2.0 * (p + 1.0 + 32.0 * float(p) ** (2 * p) * Lp**2 + 16.0 * pf**2 * sigma**2)
    )


def iteration_threshold(p: int, m_const: float, epsilon: float) -> float:
    """Iteration count after which the expected gradient norm meets epsilon.

        max( (x ln x)^((3p+1)/p), 2p )   with   x = (6p+2) M / (p epsilon)

    Companion to theorem_constant(); reporting only. epsilon must lie in
    (0,1). Returns inf when the power overflows 64-bit floats.
    """
    _check_order(p)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
    if m_const <= 0.0:
        raise ValueError(f"M must be positive, got {m_const}")
    x = (6.0 * p + 2.0) * m_const / (p * epsilon)
    y = x * math.log(x) if x > 0.0 else 0.0
    if y <= 1.0:
        return 2.0 * p
    lt = (3.0 * p + 1.0) / p * math.log(y)
    thresh = math.inf if lt > 709.0 else math.exp(lt)
    return max(thresh, 2.0 * p)


def schedule_arrays(p: int, ks) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized order-p schedule over an array of iteration indices.

    Returns (eta, gammas, thetas) shaped (n,), (q,n), (q,n) with q = p - 1.
    Same formulas as params_general; the vector exp/log kernels may differ
    from the scalar libm by an ulp, which the sweep tolerances absorb.
    """
    _check_order(p)
    ks = np.asarray(ks, dtype=float)
    if ks.size and ks.min() < 0:
        raise ValueError("iteration indices must be >= 0")
    d = 3.0 * p + 1.0
    lg = np.log(ks + p)
    c = np.exp(2.0 * p / d * lg)
    eta = np.exp(-(2.0 * p + 1.0) / d * lg)
    q = p - 1
    t = np.arange(1, p, dtype=float)
    gam = 1.0 / (t[:, None] * c[None, :])
    th = np.empty_like(gam)
    for i in range(q):
        f = np.ones_like(c)
        for s in range(q):
            if s != i:
                f *= (gam[s] - 1.0) / (gam[s] - gam[i])
        th[i] = gam[i] ** q * f
    return eta, gam, th


def p3_arrays(ks) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized literal third-order schedule; see params_p3."""
    ks = np.asarray(ks, dtype=float)
    if ks.size and ks.min() < 0:
        raise ValueError("iteration indices must be >= 0")
    lg = np.log(ks + 3.0)
    c = np.exp(3.0 / 5.0 * lg)
    eta = np.exp(-7.0 / 10.0 * lg)
    c2 = c * c
    gam = np.stack([1.0 / c, 0.5 / c])
    th = np.stack([(2.0 * c - 1.0) / c2, (1.0 - c) / (2.0 * c2)])
    return eta, gam, th
