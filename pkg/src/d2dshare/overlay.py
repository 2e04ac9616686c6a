"""Overlay in-band D2D analytics.

Cellular and D2D transmissions occupy orthogonal spectrum fractions
(1 - eta) and eta.  The SINR distributions in virtual-power units:

    D2D link:       P(SINR >= x) = exp(-N0 x - c x^(2/alpha))
    cellular link:  P(SINR >= x) = exp(-N0 x - Jout(x))

where c is the D2D interference constant from the model module and
Jout(x) is the out-of-cell uplink interference exponent

    Jout(x) = int_1^inf (1 - 2F1(1, 2/a; 1+2/a; -x u^(-a/2))) du,   a = alpha,

obtained from the ring integral 2 pi lambda_b int_R^inf (...) r dr by the
substitution u = (r/R)^2 (which also shows Jout does not depend on the
base-station density).  Ergodic spectral efficiencies follow by integrating
e^(-N0 x)/(1+x) against the same Laplace factors; link rates weight them by
the accessed bandwidth share, and the weighted proportional-fair partition
eta* has the closed form implemented in :func:`optimal_partition`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    NetworkParams,
    ParameterError,
    cellular_density,
    derive,
    default_sinr_thresholds,
    interference_constant,
)
from .specfun import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    exp_integral_e1,
    golden_section_minimize,
    hyp2f1_kernel,
    integrate_semiinfinite,
    sinc_normalized,
    _GK_NODES,
    _GK_WEIGHTS,
)

__all__ = [
    "DegenerateRateError",
    "CcdfCurve",
    "RateReport",
    "JointOptimum",
    "outofcell_exponent",
    "d2d_sinr_ccdf",
    "d2d_spectral_efficiency",
    "r_d_max",
    "r_d_min",
    "cellular_sinr_ccdf",
    "cellular_sinr_ccdf_sparse_limit",
    "cellular_sinr_ccdf_dense_limit",
    "scheduling_prefactor",
    "cellular_spectral_efficiency",
    "overlay_rates",
    "optimal_partition",
    "joint_optimize_mu_eta",
]


class DegenerateRateError(ValueError):
    """A rate is zero where its logarithm is needed (utility would be -inf)."""


@dataclass(frozen=True)
class CcdfCurve:
    """A tabulated SINR complementary CDF.

    ``thresholds`` are strictly increasing positive linear SINR values,
    ``values`` the matching P(SINR >= x), nonincreasing in [0, 1].
    ``kind`` tags the curve as analytical or empirical.
    """

    thresholds: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        t = np.asarray(self.thresholds, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if self.kind not in ("analytical", "empirical"):
            raise ParameterError(f"kind must be 'analytical' or 'empirical', got {self.kind!r}")
        if t.ndim != 1 or v.shape != t.shape:
            raise ParameterError("thresholds and values must be 1-d arrays of equal length")
        if t.size == 0 or not np.all(t[0] > 0.0) or np.any(np.diff(t) <= 0.0):
            raise ParameterError("thresholds must be strictly increasing and positive")
        if np.any(v < -1e-15) or np.any(v > 1.0 + 1e-15):
            raise ParameterError("CCDF values must lie in [0, 1]")
        if np.any(np.diff(v) > 1e-12):
            raise ParameterError("CCDF values must be nonincreasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class RateReport:
    """Spectral efficiencies, per-class rates and proportional-fair utility.

    ``t_d`` always satisfies the mode-mixture identity
    t_d = P(D >= mu) t_c + P(D < mu) t_d_hat by construction.
    """

    r_c: float
    r_d: float
    t_c: float
    t_d: float
    t_d_hat: float
    utility: float

    def __post_init__(self) -> None:
        for name in ("r_c", "r_d", "t_c", "t_d", "t_d_hat"):
            if getattr(self, name) < 0.0:
                raise ParameterError(f"{name} must be nonnegative")


# ---------------------------------------------------------------------------
# Out-of-cell uplink interference exponent
# ---------------------------------------------------------------------------

def outofcell_exponent(x, alpha: float, abs_tol: float = 1e-12):
    """Jout(x): the cellular out-of-cell interference exponent, vectorised.

    Composite 15-point Gauss-Kronrod panels over octaves of u, truncated at
    U where the second-order tail error bound b/(2+b) x^2 U^(1-alpha)/(alpha-1)
    falls below ``abs_tol``; the dropped tail's first-order value
    b/(1+b) x U^(1-alpha/2) / (alpha/2 - 1) is added back analytically.
    """
    if not (alpha > 2.0):
        raise ParameterError(f"alpha must exceed 2, got {alpha}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0.0):
        raise ParameterError("SINR threshold must be nonnegative")
    scalar = x_arr.ndim == 0
    xs = np.atleast_1d(x_arr).astype(float)
    out = np.zeros_like(xs)
    pos = xs > 0.0
    if pos.any():
        b = 2.0 / alpha
        xmax = float(xs[pos].max())
        u_target = (b / (2.0 + b) * xmax * xmax / ((alpha - 1.0) * abs_tol)) ** (
            1.0 / (alpha - 1.0)
        )
        n_oct = min(64, max(1, int(math.ceil(math.log2(max(2.0, u_target))))))
        big_u = 2.0**n_oct
        edges = 2.0 ** np.arange(0, n_oct + 1)
        # two GK15 subpanels per octave
        lo = np.repeat(edges[:-1], 2)
        hi = np.repeat(edges[1:], 2)
        mid = 0.5 * (np.repeat(edges[:-1], 2) + np.repeat(edges[1:], 2))
        lo[1::2] = mid[1::2]
        hi[0::2] = mid[0::2]
        half = 0.5 * (hi - lo)
        cen = 0.5 * (hi + lo)
        u_nodes = (cen[:, None] + half[:, None] * _GK_NODES[None, :]).ravel()
        w_nodes = (half[:, None] * _GK_WEIGHTS[None, :]).ravel()
        pw = u_nodes ** (-alpha / 2.0)
        z = xs[pos][:, None] * pw[None, :]
        f = hyp2f1_kernel(b, z)
        body = (w_nodes[None, :] * (1.0 - f)).sum(axis=1)
        tail = (b / (1.0 + b)) * xs[pos] * big_u ** (1.0 - alpha / 2.0) / (alpha / 2.0 - 1.0)
        out[pos] = body + tail
    return float(out[0]) if scalar else out.reshape(x_arr.shape)


# ---------------------------------------------------------------------------
# SINR CCDFs
# ---------------------------------------------------------------------------

def _as_threshold_array(thresholds) -> np.ndarray:
    t = default_sinr_thresholds() if thresholds is None else np.asarray(thresholds, dtype=float)
    if np.any(t <= 0.0):
        raise ParameterError("SINR thresholds must be strictly positive")
    return t


def d2d_sinr_ccdf(params: NetworkParams, thresholds=None) -> CcdfCurve:
    """CCDF of the typical overlay D2D link SINR: exp(-N0 x - c x^(2/alpha))."""
    t = _as_threshold_array(thresholds)
    d = derive(params)
    v = np.exp(-d.n0_equiv * t - d.c_mu * t ** (2.0 / params.alpha))
    return CcdfCurve(thresholds=t, values=v, kind="analytical")


def cellular_sinr_ccdf(params: NetworkParams, thresholds=None) -> CcdfCurve:
    """CCDF of the typical uplink SINR: exp(-N0 x - Jout(x)).

    Uses only alpha and N0; the base-station density cancels exactly in the
    normalised out-of-cell integral, so no scheduling-feasibility check is
    required here.
    """
    t = _as_threshold_array(thresholds)
    v = np.exp(-params.n0 * t - outofcell_exponent(t, params.alpha))
    return CcdfCurve(thresholds=t, values=v, kind="analytical")


def cellular_sinr_ccdf_sparse_limit(params: NetworkParams, thresholds=None) -> CcdfCurve:
    """Noise-limited closed form exp(-(N0 + 4/(alpha^2-4)) x)."""
    t = _as_threshold_array(thresholds)
    a = params.alpha
    v = np.exp(-(params.n0 + 4.0 / (a * a - 4.0)) * t)
    return CcdfCurve(thresholds=t, values=v, kind="analytical")


def cellular_sinr_ccdf_dense_limit(params: NetworkParams, thresholds=None) -> CcdfCurve:
    """Interference-limited closed form exp(-N0 x - x^(2/alpha)/(2 sinc(2/alpha)))."""
    t = _as_threshold_array(thresholds)
    a = params.alpha
    v = np.exp(-params.n0 * t - t ** (2.0 / a) / (2.0 * sinc_normalized(2.0 / a)))
    return CcdfCurve(thresholds=t, values=v, kind="analytical")


# ---------------------------------------------------------------------------
# Spectral efficiencies
# ---------------------------------------------------------------------------

def _rate_integral(
    n0: float,
    power_coef: float,
    alpha: float,
    extra_outofcell: bool = False,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """int_0^inf e^(-n0 x)/(1+x) * exp(-power_coef x^(2/alpha) [- Jout(x)]) dx."""
    b = 2.0 / alpha

    if extra_outofcell:
        def f(x):
            x = np.asarray(x, dtype=float)
            return np.exp(-n0 * x - power_coef * x**b - outofcell_exponent(x, alpha)) / (1.0 + x)
    else:
        def f(x):
            x = np.asarray(x, dtype=float)
            return np.exp(-n0 * x - power_coef * x**b) / (1.0 + x)

    return integrate_semiinfinite(f, spec)


def d2d_spectral_efficiency(
    params: NetworkParams,
    n0: float | None = None,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Ergodic spectral efficiency of overlay D2D links.

    kappa * int e^(-N0 x)/(1+x) exp(-c x^(2/alpha)) dx, bounded between
    :func:`r_d_min` and :func:`r_d_max`.  ``n0`` overrides the equivalent
    noise (used for bandwidth-normalised rate reporting).
    """
    if params.kappa == 0.0:
        return 0.0
    d = derive(params)
    noise = d.n0_equiv if n0 is None else n0
    return params.kappa * _rate_integral(noise, d.c_mu, params.alpha, spec=spec)


def r_d_max(params: NetworkParams, n0: float | None = None) -> float:
    """Interference-free D2D efficiency limit (mu -> 0): kappa e^N0 E1(N0)."""
    noise = params.n0 if n0 is None else n0
    return params.kappa * math.exp(noise) * exp_integral_e1(noise)


def r_d_min(
    params: NetworkParams,
    n0: float | None = None,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Fully loaded D2D efficiency limit (mu -> inf)."""
    if params.kappa == 0.0:
        return 0.0
    noise = params.n0 if n0 is None else n0
    c_inf = (
        params.kappa
        * params.q
        * params.lambda_ue
        / (params.xi * sinc_normalized(2.0 / params.alpha))
    )
    return params.kappa * _rate_integral(noise, c_inf, params.alpha, spec=spec)


def scheduling_prefactor(ratio: float) -> float:
    """Round-robin share E[1/N | N >= 1] P(N >= 1) = (1 - e^(-ratio)) / ratio.

    ``ratio`` is lambda_c / lambda_b, the mean number of uplink contenders
    per cell; the expression is the Poisson mean of 1/N for the typical
    scheduled transmitter.
    """
    if ratio <= 0.0:
        raise ParameterError(f"lambda_c/lambda_b ratio must be positive, got {ratio}")
    return -math.expm1(-ratio) / ratio


def cellular_spectral_efficiency(
    params: NetworkParams,
    n0: float | None = None,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Ergodic spectral efficiency of overlay cellular uplinks.

    Scheduling prefactor times the rate integral carrying the out-of-cell
    Laplace factor.  Requires lambda_c >= lambda_b (checked via derive).
    """
    d = derive(params)
    noise = d.n0_equiv if n0 is None else n0
    pref = scheduling_prefactor(d.lambda_c / params.lambda_b)
    return pref * _rate_integral(noise, 0.0, params.alpha, extra_outofcell=True, spec=spec)


# ---------------------------------------------------------------------------
# Rates and spectrum-partition optimisation
# ---------------------------------------------------------------------------

def _utility(t_c: float, t_d: float, w_c: float, w_d: float) -> float:
    if t_c <= 0.0 or t_d <= 0.0:
        raise DegenerateRateError(
            f"proportional-fair utility is -inf at T_c={t_c:.3g}, T_d={t_d:.3g}"
        )
    return w_c * math.log(t_c) + w_d * math.log(t_d)


def overlay_rates(params: NetworkParams, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> RateReport:
    """Per-class overlay rates for the configured partition eta.

    T_c = (1 - eta) R_c, T_d_hat = eta R_d, and T_d mixes them with the
    mode-selection probabilities.  When ``params.bandwidth_normalization``
    is on, each class's equivalent noise is scaled by its bandwidth share
    (N0 (1-eta) for cellular, N0 eta for D2D), reflecting that transmit
    power concentrates in the accessed band.  eta = 1 starves cellular and
    raises :class:`DegenerateRateError`; at eta = 0 the D2D efficiency is
    reported at its unnormalised value and t_d_hat is zero.
    """
    d = derive(params)
    eta = params.eta
    if eta >= 1.0:
        raise DegenerateRateError("eta = 1 leaves no cellular spectrum: T_c = 0")
    norm = params.bandwidth_normalization
    n0_c = d.n0_equiv * (1.0 - eta) if norm else d.n0_equiv
    n0_d = d.n0_equiv * eta if (norm and eta > 0.0) else d.n0_equiv
    rc = cellular_spectral_efficiency(params, n0=n0_c, spec=spec)
    rd = d2d_spectral_efficiency(params, n0=n0_d, spec=spec)
    p_cell = 1.0 - d.p_d2d_mode
    t_c = (1.0 - eta) * rc
    t_d_hat = eta * rd
    t_d = p_cell * t_c + d.p_d2d_mode * t_d_hat
    return RateReport(
        r_c=rc,
        r_d=rd,
        t_c=t_c,
        t_d=t_d,
        t_d_hat=t_d_hat,
        utility=_utility(t_c, t_d, params.w_c, params.w_d),
    )


def _partition_from_rates(rc: float, rd: float, w_c: float, w_d: float, xpm2: float) -> float:
    """Closed-form eta* given fixed spectral efficiencies and xi pi mu^2."""
    if xpm2 <= 0.0:
        return 0.0
    # 1/(e^(xi pi mu^2) - 1), evaluated safely for large exponents
    inv_em1 = 0.0 if xpm2 > 700.0 else 1.0 / math.expm1(xpm2)
    if not (rd > (w_c + w_d) / w_d * inv_em1 * rc):
        return 0.0
    return 1.0 - (w_c / (w_c + w_d)) / (1.0 - inv_em1 * rc / rd)


def optimal_partition(params: NetworkParams, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Weighted proportional-fair optimal overlay partition eta* in [0, 1).

    Evaluated from the closed form with the partition-independent (raw,
    non-bandwidth-normalised) spectral efficiencies, matching the objective
    u(eta) = w_c log((1-eta) R_c) + w_d log((1-eta) a R_c + eta (1-a) R_d)
    whose maximiser it is.  Tends to w_d as mu grows.
    """
    d = derive(params)
    rc = cellular_spectral_efficiency(params, n0=d.n0_equiv, spec=spec)
    rd = d2d_spectral_efficiency(params, n0=d.n0_equiv, spec=spec)
    xpm2 = params.xi * math.pi * params.mu**2
    return _partition_from_rates(rc, rd, params.w_c, params.w_d, xpm2)


@dataclass(frozen=True)
class JointOptimum:
    mu: float
    eta: float
    utility: float


def joint_optimize_mu_eta(
    params: NetworkParams,
    mu_grid: Sequence[float],
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> JointOptimum:
    """Maximise utility over (mu, eta) with eta set to eta*(mu).

    Evaluates the partition-optimised utility on ``mu_grid``, then refines
    around the best grid point by golden-section search.  Ties on the grid
    break toward the lowest mu; the refined point is only adopted when it
    strictly improves on the grid optimum.
    """
    grid = np.asarray(list(mu_grid), dtype=float)
    if grid.size == 0 or np.any(grid <= 0.0):
        raise ParameterError("mu_grid must be nonempty with positive entries")
    grid = np.sort(grid)

    # The out-of-cell integral does not depend on mu: compute once.
    n0 = params.n0
    ic = _rate_integral(n0, 0.0, params.alpha, extra_outofcell=True, spec=spec)

    def utility_at(mu: float) -> tuple[float, float]:
        lam_c = cellular_density(params, mu)
        if lam_c < params.lambda_b:
            raise ParameterError(
                f"mu={mu:g} drives lambda_c below lambda_b; utility undefined"
            )
        rc = scheduling_prefactor(lam_c / params.lambda_b) * ic
        c = interference_constant(params, mu)
        rd = params.kappa * _rate_integral(n0, c, params.alpha, spec=spec)
        xpm2 = params.xi * math.pi * mu * mu
        eta = _partition_from_rates(rc, rd, params.w_c, params.w_d, xpm2)
        if eta >= 1.0:  # cannot happen for finite rates; guard the log
            eta = 1.0 - 1e-12
        a = math.exp(-xpm2)
        t_c = (1.0 - eta) * rc
        t_d = a * t_c + (1.0 - a) * eta * rd
        return _utility(t_c, t_d, params.w_c, params.w_d), eta

    values = []
    etas = []
    for m in grid:
        u, e = utility_at(float(m))
        values.append(u)
        etas.append(e)
    best = int(np.argmax(values))  # first index on ties: lowest mu
    mu_best, u_best, eta_best = float(grid[best]), values[best], etas[best]

    if grid.size > 1:
        lo = float(grid[max(best - 1, 0)])
        hi = float(grid[min(best + 1, grid.size - 1)])
        if hi > lo:
            mu_ref = golden_section_minimize(
                lambda m: -utility_at(m)[0], lo, hi, tol=max(1e-6 * (hi - lo), 1e-9)
            )
            u_ref, eta_ref = utility_at(mu_ref)
            if u_ref > u_best:
                mu_best, u_best, eta_best = mu_ref, u_ref, eta_ref

    return JointOptimum(mu=mu_best, eta=eta_best, utility=u_best)
