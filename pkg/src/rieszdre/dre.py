"""Direct density-ratio estimation by empirical risk minimisation.

The central pieces are :func:`lsif_empirical_risk` (the feasible
least-squares risk that drops the unknown ratio), :func:`fit_dre` (generic
Bregman ERM with an optional non-negative correction), and
:func:`fit_telescoped`, which chains local ratio fits across waymark
samples and multiplies them back together.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from .data import TwoSampleDataset
from .errors import InsufficientWaymarkSamples, RatioBoundWarning, UsageError
from .losses import LSIF, BregmanLoss, RiskValue, bd_population_risk
from .models import (
    BasisExpansion,
    CompositeRatioModel,
    ModelSpec,
    RatioModel,
    ScaledRatioModel,
    TruncatedRatioModel,
    initial_params_for_link,
)
from .optim import OptimizerSettings, OptimResult, gradient_descent

REG_KINDS = ("l2_coefficients", "rkhs_norm")


def lsif_empirical_risk(r, data: TwoSampleDataset, grad: bool = True) -> RiskValue:
    """``-(2/n_nu) sum r(nu) + (1/n_de) sum r(de)^2`` and its parameter gradient."""
    if grad and hasattr(r, "value_and_jacobian"):
        r_de, j_de = r.value_and_jacobian(data.de)
        r_nu, j_nu = r.value_and_jacobian(data.nu)
        g = 2.0 * (j_de.T @ r_de) / data.n_de - 2.0 * j_nu.sum(axis=0) / data.n_nu
    else:
        r_de, r_nu, g = r(data.de), r(data.nu), None
    value = -2.0 * float(np.mean(r_nu)) + float(np.mean(r_de**2))
    return RiskValue(value, g)


def nonneg_corrected_risk(
    r,
    data: TwoSampleDataset,
    loss: BregmanLoss,
    c: float,
    add_back: bool = False,
    grad: bool = True,
) -> RiskValue:
    """Non-negative Bregman risk.

    ``mean_nu ell2(r) + [mean_de ell1(r) - c mean_nu ell1(r)]_+``

    With ``add_back=True`` the term ``c mean_nu ell1(r)`` is also added
    outside the clamp, which makes the unclamped objective equal the plain
    Bregman risk.  The clamp's subgradient is zero when the bracket is
    ``<= 0``.  ``ell1`` is divided by ``loss.target_scale`` as in
    :func:`~rieszdre.losses.bd_population_risk`.
    """
    if not c > 0:
        raise UsageError(f"non-negative correction constant must be positive, got {c!r}")
    if grad and hasattr(r, "value_and_jacobian"):
        r_de, j_de = r.value_and_jacobian(data.de)
        r_nu, j_nu = r.value_and_jacobian(data.nu)
    else:
        r_de, r_nu, j_de, j_nu = r(data.de), r(data.nu), None, None
    loss.check_domain(r_de, "de")
    loss.check_domain(r_nu, "nu")
    s = loss.target_scale
    l1_de = np.mean(loss.ell1(r_de)) / s
    l1_nu = np.mean(loss.ell1(r_nu)) / s
    bracket = l1_de - c * l1_nu
    value = float(np.mean(loss.ell2(r_nu)) + max(bracket, 0.0))
    if add_back:
        value += float(c * l1_nu)
    g = None
    if j_de is not None:
        g = j_nu.T @ loss.dell2(r_nu) / data.n_nu
        dl1_nu = j_nu.T @ loss.dell1(r_nu) / (s * data.n_nu)
        if bracket > 0:
            g = g + j_de.T @ loss.dell1(r_de) / (s * data.n_de) - c * dl1_nu
        if add_back:
            g = g + c * dl1_nu
    return RiskValue(value, g)


def truncate_nonnegative(r) -> TruncatedRatioModel:
    return TruncatedRatioModel(r)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DreFitConfig:
    loss: BregmanLoss = field(default_factory=LSIF)
    reg_lambda: float = 0.0
    reg_kind: str = "l2_coefficients"
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    nonneg_c: float | None = None
    nonneg_add_back: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.reg_lambda < 0:
            raise UsageError(f"reg_lambda must be non-negative, got {self.reg_lambda}")
        if self.reg_kind not in REG_KINDS:
            raise UsageError(f"reg_kind must be one of {REG_KINDS}, got {self.reg_kind!r}")


@dataclass
class DreFit:
    model: RatioModel
    result: OptimResult
    loss: BregmanLoss

    @property
    def trace(self) -> list[float]:
        return self.result.trace

    @property
    def converged(self) -> bool:
        return self.result.converged

    @property
    def ratio(self):
        """The fitted model rescaled to estimate ``r0`` itself."""
        s = self.loss.target_scale
        return self.model if s == 1.0 else ScaledRatioModel(self.model, s)


class _CachedBasis:
    """Basis wrapper that reuses precomputed features of fixed sample arrays."""

    def __init__(self, basis, arrays):
        self._basis = basis
        self._cache = [(a, basis(a)) for a in arrays]

    def __call__(self, x):
        for a, phi in self._cache:
            if x is a:
                return phi
        return self._basis(x)

    def __getattr__(self, name):
        return getattr(self._basis, name)


def dre_objective(data: TwoSampleDataset, model0: RatioModel, cfg: DreFitConfig):
    """Return ``theta -> (value, grad)`` for the configured training objective."""
    if isinstance(model0, RatioModel):
        model0 = replace(model0, basis=_CachedBasis(model0.basis, (data.de, data.nu)))

    def fun(theta):
        model = model0.with_params(theta)
        if cfg.nonneg_c is not None:
            risk = nonneg_corrected_risk(model, data, cfg.loss, cfg.nonneg_c, add_back=cfg.nonneg_add_back)
        else:
            risk = bd_population_risk(cfg.loss, model, data)
        value, grad = risk.value, risk.grad
        if cfg.reg_lambda > 0:
            pen, pen_grad = model.regularizer(cfg.reg_kind)
            value = value + cfg.reg_lambda * pen
            grad = grad + cfg.reg_lambda * pen_grad
        return value, grad

    return fun


def fit_dre(data: TwoSampleDataset, model0: RatioModel, cfg: DreFitConfig = DreFitConfig()) -> DreFit:
    """Minimise the empirical Bregman risk plus ``reg_lambda * Omega`` from ``model0``."""
    res = gradient_descent(dre_objective(data, model0, cfg), model0.params, cfg.optimizer)
    model = model0.with_params(res.theta)
    if cfg.loss.target_scale != 1.0:
        peak = float(max(np.max(model(data.de)), np.max(model(data.nu))))
        if peak > 0.99:
            warnings.warn(
                f"fitted scaled ratio reaches {peak:.3f}; the true ratio may exceed "
                f"1/C = {1.0 / cfg.loss.target_scale:.3g}",
                RatioBoundWarning,
                stacklevel=2,
            )
    return DreFit(model, res, cfg.loss)


# ---------------------------------------------------------------------------
# telescoping
# ---------------------------------------------------------------------------

ModelSource = Union[RatioModel, Callable[[TwoSampleDataset], RatioModel]]


@dataclass(frozen=True)
class TelescopeConfig:
    m: int = 1
    stage: DreFitConfig = field(default_factory=DreFitConfig)
    waymark_rule: str = "pooled_fraction"
    seed: int = 0
    min_per_waymark: int = 10

    def __post_init__(self):
        if self.m < 1:
            raise UsageError(f"waymark count m must be >= 1, got {self.m}")
        if self.waymark_rule != "pooled_fraction":
            raise UsageError(f"unknown waymark rule {self.waymark_rule!r}")


def build_waymarks(data: TwoSampleDataset, m: int, seed: int, min_per_waymark: int = 10) -> list[np.ndarray]:
    """Waymark samples ``p_0 = p_nu, ..., p_m = p_de`` by pooling.

    Waymark ``k`` draws ``n - floor(k n / m)`` rows from ``nu`` and
    ``floor(k n / m)`` rows from ``de`` without replacement, ``n =
    min(n_nu, n_de)``.  Selected indices keep their original order.
    """
    n = min(data.n_nu, data.n_de)
    if n < min_per_waymark:
        raise InsufficientWaymarkSamples(
            f"each waymark needs >= {min_per_waymark} points; only {n} available"
        )
    rng = np.random.default_rng(seed)
    out = []
    for k in range(m + 1):
        n_de_k = (k * n) // m
        n_nu_k = n - n_de_k
        idx_nu = np.sort(rng.choice(data.n_nu, size=n_nu_k, replace=False))
        idx_de = np.sort(rng.choice(data.n_de, size=n_de_k, replace=False))
        out.append(np.vstack([data.nu[idx_nu], data.de[idx_de]]))
    return out


@dataclass
class TelescopedFit:
    model: CompositeRatioModel
    stages: list[DreFit]
    waymarks: list[np.ndarray]


def fit_telescoped(data: TwoSampleDataset, model0: ModelSource, cfg: TelescopeConfig = TelescopeConfig()) -> TelescopedFit:
    """Fit ``p_k / p_{k+1}`` for consecutive waymarks and multiply the stages.

    ``model0`` is either a starting model shared by all stages or a
    callable building one from each stage's two-sample data.
    """
    waymarks = build_waymarks(data, cfg.m, cfg.seed, cfg.min_per_waymark)
    fits = []
    for k in range(cfg.m):
        stage_data = TwoSampleDataset(de=waymarks[k + 1], nu=waymarks[k])
        start = model0(stage_data) if callable(model0) and not isinstance(model0, RatioModel) else model0
        fits.append(fit_dre(stage_data, start, cfg.stage))
    composite = CompositeRatioModel(tuple(f.ratio for f in fits))
    return TelescopedFit(composite, fits, waymarks)


# ---------------------------------------------------------------------------
# evaluation helpers
# ---------------------------------------------------------------------------


def logistic_log_loss(model, data: TwoSampleDataset) -> float:
    """Held-out classification log-loss of ``nu`` vs ``de`` with odds ``r(x)``.

    ``mean_nu log(1 + 1/r) + mean_de log(1 + r)``, computed from
    ``model.log`` so huge or tiny ratios do not overflow.
    """
    lr_nu = model.log(data.nu)
    lr_de = model.log(data.de)
    return float(np.mean(np.logaddexp(0.0, -lr_nu)) + np.mean(np.logaddexp(0.0, lr_de)))


def l2_error(model, truth, x) -> tuple[float, float]:
    """Monte Carlo ``mean (r(x) - r0(x))^2`` over rows of ``x`` and its standard error."""
    sq = (np.asarray(model(x)) - np.asarray(truth(x))) ** 2
    se = float(np.std(sq, ddof=1) / math.sqrt(len(sq))) if len(sq) > 1 else float("nan")
    return float(np.mean(sq)), se


DEFAULT_LINKS = {"lsif": "identity", "ukl": "exp", "bkl": "exp", "pu": "sigmoid"}


def initial_ratio_model(basis: BasisExpansion, link: str, dim: int) -> RatioModel:
    return RatioModel(basis, initial_params_for_link(basis, link, dim), link)


CENTER_SOURCES = ("nu", "de", "pooled")


def build_ratio_model(
    spec: ModelSpec, data: TwoSampleDataset, link: str, seed: int = 0, centers_from: str = "nu"
) -> RatioModel:
    """Starting model for ``linear:*`` specs.

    rbf centers are drawn from the sample named by ``centers_from``; the
    median bandwidth always uses the pooled sample.
    """
    if centers_from not in CENTER_SOURCES:
        raise UsageError(f"centers_from must be one of {CENTER_SOURCES}, got {centers_from!r}")
    pool = {"nu": data.nu, "de": data.de, "pooled": data.pooled}[centers_from]
    rng = np.random.default_rng(seed)
    basis = spec.build_basis(pool, data.pooled, rng)
    return initial_ratio_model(basis, link, data.dim)
