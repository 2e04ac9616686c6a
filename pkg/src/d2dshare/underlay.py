"""Underlay in-band D2D analytics.

D2D transmitters hop over a random fraction beta of the B cellular
subchannels, splitting their power across the beta*B accessed subchannels.
With cross-tier interference the SINR CCDFs become

    D2D link:      exp(-N0 x - c beta x^(2/a) - (beta x)^(2/a) / (2 sinc(2/a)))
    cellular link: exp(-N0 x - c beta^(1-2/a) x^(2/a) - Jout(x))

with a = alpha, c the D2D interference constant and Jout the out-of-cell
exponent shared with the overlay analysis.  Rates follow the same ergodic
integrals; the spectrum access factor beta* is found numerically (no closed
form exists), and the coverage-constraint bounds on beta implement the
outage-budget inequalities for both link classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import NetworkParams, ParameterError, derive
from .overlay import (
    CcdfCurve,
    RateReport,
    _as_threshold_array,
    _rate_integral,
    _utility,
    outofcell_exponent,
    scheduling_prefactor,
)
from .specfun import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    bisect_nondecreasing,
    golden_section_minimize,
    integrate_semiinfinite,
    sinc_normalized,
    _GK_NODES,
    _GK_WEIGHTS,
)

__all__ = [
    "OutageBound",
    "d2d_sinr_ccdf_underlay",
    "d2d_spectral_efficiency_underlay",
    "cellular_sinr_ccdf_underlay",
    "cellular_spectral_efficiency_underlay",
    "underlay_rates",
    "optimal_access_factor",
    "max_beta_for_d2d_outage",
    "max_beta_for_cellular_outage",
    "feasible_beta_curves",
]

_BETA_SEARCH_FLOOR = 1e-4  # log-utility is singular at beta = 0


def _require_beta(params: NetworkParams) -> float:
    if not (0.0 < params.beta <= 1.0):
        raise ParameterError(f"underlay operations require beta in (0, 1], got {params.beta}")
    return params.beta


def d2d_sinr_ccdf_underlay(params: NetworkParams, thresholds=None) -> CcdfCurve:
    """CCDF of the typical underlay D2D link SINR."""
    beta = _require_beta(params)
    t = _as_threshold_array(thresholds)
    d = derive(params)
    b = 2.0 / params.alpha
    cell_term = (beta * t) ** b / (2.0 * sinc_normalized(b))
    v = np.exp(-d.n0_equiv * t - d.c_mu * beta * t**b - cell_term)
    return CcdfCurve(thresholds=t, values=v, kind="analytical")


def d2d_spectral_efficiency_underlay(
    params: NetworkParams, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Per-subchannel ergodic spectral efficiency of underlay D2D links."""
    beta = _require_beta(params)
    if params.kappa == 0.0:
        return 0.0
    d = derive(params)
    b = 2.0 / params.alpha
    coef_d2d = d.c_mu * beta
    coef_cell = beta**b / (2.0 * sinc_normalized(b))

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-d.n0_equiv * x - coef_d2d * x**b - coef_cell * x**b) / (1.0 + x)

    return params.kappa * integrate_semiinfinite(f, spec)


def cellular_sinr_ccdf_underlay(params: NetworkParams, thresholds=None) -> CcdfCurve:
    """CCDF of the typical underlay uplink SINR (adds the D2D tier term)."""
    beta = _require_beta(params)
    t = _as_threshold_array(thresholds)
    d = derive(params)
    b = 2.0 / params.alpha
    v = np.exp(
        -d.n0_equiv * t
        - d.c_mu * beta ** (1.0 - b) * t**b
        - outofcell_exponent(t, params.alpha)
    )
    return CcdfCurve(thresholds=t, values=v, kind="analytical")


def cellular_spectral_efficiency_underlay(
    params: NetworkParams, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Ergodic spectral efficiency of underlay cellular uplinks."""
    beta = _require_beta(params)
    d = derive(params)
    b = 2.0 / params.alpha
    pref = scheduling_prefactor(d.lambda_c / params.lambda_b)
    return pref * _rate_integral(
        d.n0_equiv,
        d.c_mu * beta ** (1.0 - b),
        params.alpha,
        extra_outofcell=True,
        spec=spec,
    )


def underlay_rates(params: NetworkParams, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> RateReport:
    """Per-class underlay rates: T_c = R_c, T_d_hat = beta R_d.

    Power splitting across the accessed subchannels is already inside the
    efficiency integrals, so no extra bandwidth normalisation applies.
    """
    d = derive(params)
    rc = cellular_spectral_efficiency_underlay(params, spec=spec)
    rd = d2d_spectral_efficiency_underlay(params, spec=spec)
    p_cell = 1.0 - d.p_d2d_mode
    t_c = rc
    t_d_hat = params.beta * rd
    t_d = p_cell * t_c + d.p_d2d_mode * t_d_hat
    return RateReport(
        r_c=rc,
        r_d=rd,
        t_c=t_c,
        t_d=t_d,
        t_d_hat=t_d_hat,
        utility=_utility(t_c, t_d, params.w_c, params.w_d),
    )


# ---------------------------------------------------------------------------
# Spectrum-access optimisation
# ---------------------------------------------------------------------------

def _fixed_grid(n0: float, alpha: float):
    """A fixed composite GK15 grid resolving every beta in [1e-4, 1].

    The integrand family shares the envelope e^(-n0 x)/(1+x) with one
    beta-dependent factor bounded by 1, so a single refined grid (octave
    panels split in four) integrates the whole family; the beta-independent
    pieces are precomputed once per optimisation run.
    """
    x_hi = max(2.0, 46.0 / n0)  # e^(-n0 x) < 1e-20 beyond
    n_oct = min(64, int(math.ceil(math.log2(x_hi))))
    edges = [0.0, 1.0]
    for k in range(n_oct):
        edges.append(2.0 ** (k + 1))
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sub = np.linspace(lo, hi, 5)
        for a_, b_ in zip(sub[:-1], sub[1:]):
            half = 0.5 * (b_ - a_)
            cen = 0.5 * (b_ + a_)
            nodes.append(cen + half * _GK_NODES)
            weights.append(half * _GK_WEIGHTS)
    return np.concatenate(nodes), np.concatenate(weights)


def optimal_access_factor(
    params: NetworkParams, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Proportional-fair optimal spectrum access factor beta*.

    Single-variable numeric maximisation: a 32-point seed grid on
    [1e-4, 1] followed by golden-section refinement around the best point.
    Deterministic; the lower bracket excludes beta = 0 where the utility
    diverges to -inf whenever D2D carries weight.
    """
    d = derive(params)
    b = 2.0 / params.alpha
    sinc_b = sinc_normalized(b)
    nodes, weights = _fixed_grid(d.n0_equiv, params.alpha)
    env = weights * np.exp(-d.n0_equiv * nodes) / (1.0 + nodes)
    base_cell = env * np.exp(-outofcell_exponent(nodes, params.alpha))
    pow_b = nodes**b
    pref = scheduling_prefactor(d.lambda_c / params.lambda_b)
    p_d2d = d.p_d2d_mode

    def utility(beta: float) -> float:
        rc = pref * float(np.dot(base_cell, np.exp(-d.c_mu * beta ** (1.0 - b) * pow_b)))
        rd = params.kappa * float(
            np.dot(env, np.exp(-(d.c_mu * beta + beta**b / (2.0 * sinc_b)) * pow_b))
        )
        t_c = rc
        t_d = (1.0 - p_d2d) * rc + p_d2d * beta * rd
        return _utility(t_c, t_d, params.w_c, params.w_d)

    grid = np.linspace(_BETA_SEARCH_FLOOR, 1.0, 32)
    values = [utility(float(g)) for g in grid]
    best = int(np.argmax(values))
    lo = float(grid[max(best - 1, 0)])
    hi = float(grid[min(best + 1, grid.size - 1)])
    beta_star = golden_section_minimize(lambda bb: -utility(bb), lo, hi, tol=1e-7)
    beta_star = float(min(max(beta_star, _BETA_SEARCH_FLOOR), 1.0))
    # snap to a domain endpoint when the optimum sits on the boundary
    for endpoint in (_BETA_SEARCH_FLOOR, 1.0):
        if utility(endpoint) >= utility(beta_star):
            return endpoint
    return beta_star


# ---------------------------------------------------------------------------
# Coverage-constraint bounds on beta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OutageBound:
    """Largest admissible beta for an outage budget, with a feasibility flag."""

    beta_max: float
    feasible: bool


def _check_outage_args(theta: float, eps: float) -> None:
    if not (theta > 0.0):
        raise ParameterError(f"SINR threshold theta must be positive, got {theta}")
    if not (0.0 < eps < 1.0):
        raise ParameterError(f"outage probability must lie in (0, 1), got {eps}")


def max_beta_for_d2d_outage(
    params: NetworkParams, theta_d: float, eps_d: float
) -> OutageBound:
    """Largest beta meeting the D2D outage budget.

    Solves (N0 B theta + theta^(2/a) c) beta + theta^(2/a)/(2 sinc) beta^(2/a)
    <= log(1/(1-eps)) by bisection on the increasing left-hand side; the
    budget is always met as beta -> 0, and slack at beta = 1 returns 1.
    """
    _check_outage_args(theta_d, eps_d)
    d = derive(params)
    a = params.alpha
    b = 2.0 / a
    budget = -math.log1p(-eps_d)
    lin = params.n0 * params.b_subchannels * theta_d + theta_d**b * d.c_mu
    sub = theta_d**b / (2.0 * sinc_normalized(b))

    def lhs(beta: float) -> float:
        return lin * beta + sub * beta**b

    if lhs(1.0) <= budget:
        return OutageBound(beta_max=1.0, feasible=True)
    return OutageBound(
        beta_max=bisect_nondecreasing(lhs, budget, 0.0, 1.0, tol=1e-13), feasible=True
    )


def max_beta_for_cellular_outage(
    params: NetworkParams, theta_c: float, eps_c: float, _jout: float | None = None
) -> OutageBound:
    """Largest beta meeting the cellular outage budget.

    The D2D tier contributes c beta^(1-2/a) theta^(2/a) to the outage
    exponent; everything else (noise and out-of-cell interference at
    theta_c) is beta-independent, giving the closed form
    beta_max = (RHS / (theta^(2/a) c))^(a/(a-2)) clamped to [0, 1].
    A negative RHS means the cellular budget fails even without D2D.
    ``_jout`` lets callers reuse a precomputed out-of-cell exponent.
    """
    _check_outage_args(theta_c, eps_c)
    d = derive(params)
    a = params.alpha
    b = 2.0 / a
    jout = outofcell_exponent(theta_c, a) if _jout is None else _jout
    rhs = -math.log1p(-eps_c) - params.n0 * params.b_subchannels * theta_c - jout
    if rhs < 0.0:
        return OutageBound(beta_max=0.0, feasible=False)
    if d.c_mu == 0.0:
        return OutageBound(beta_max=1.0, feasible=True)
    raw = (rhs / (theta_c**b * d.c_mu)) ** (a / (a - 2.0))
    return OutageBound(beta_max=min(raw, 1.0), feasible=True)


def feasible_beta_curves(
    params: NetworkParams,
    mu_grid: Sequence[float],
    theta_d: float,
    eps_d: float,
    theta_c: float,
    eps_c: float,
):
    """beta_max(mu) for both outage constraints over a mode-threshold grid.

    Returns (mu, beta_d2d, beta_cellular, cellular_feasible) arrays; the
    joint admissible access factor at each mu is the elementwise minimum.
    The out-of-cell exponent at theta_c is computed once and shared across
    the grid (it does not depend on mu).
    """
    mus = np.asarray(list(mu_grid), dtype=float)
    if mus.size == 0 or np.any(mus < 0.0):
        raise ParameterError("mu_grid must be nonempty and nonnegative")
    jout = float(outofcell_exponent(theta_c, params.alpha))
    bd = np.empty_like(mus)
    bc = np.empty_like(mus)
    ok = np.empty(mus.shape, dtype=bool)
    for i, m in enumerate(mus):
        p = params.replace(mu=float(m))
        bd[i] = max_beta_for_d2d_outage(p, theta_d, eps_d).beta_max
        cell = max_beta_for_cellular_outage(p, theta_c, eps_c, _jout=jout)
        bc[i] = cell.beta_max
        ok[i] = cell.feasible
    return mus, bd, bc, ok
