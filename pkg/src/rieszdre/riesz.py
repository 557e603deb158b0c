"""Riesz regression for the ATE representer.

Three training objectives are available:

``riesz_lsq``
    ``mean[-2 (alpha(1,X) - alpha(0,X)) + alpha(D,X)^2]``
``paired_lsif``
    ``mean[-2 (r1(X) + r0(X)) + D r1(X)^2 + (1 - D) r0(X)^2]``, i.e. two
    least-squares importance fits sharing one sample.
``riesz_ukl``
    the signed-KL (tailored) loss from :mod:`rieszdre.losses`.

Under ``alpha(d, x) = d r1(x) - (1 - d) r0(x)`` the first two objectives
are the same function of the parameters, row by row.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import ObservationalDataset
from .errors import UsageError
from .losses import RiskValue, riesz_tailored_ukl_risk
from .models import ModelSpec, RatioModel, RieszModel, initial_params_for_link
from .optim import OptimizerSettings, OptimResult, gradient_descent

OBJECTIVES = ("riesz_lsq", "paired_lsif", "riesz_ukl")


def riesz_empirical_risk(alpha: RieszModel, data: ObservationalDataset, grad: bool = True) -> RiskValue:
    """``(1/n) sum[-2 (alpha(1,X_i) - alpha(0,X_i)) + alpha(D_i,X_i)^2]``."""
    d = data.d_treat
    grad = grad and getattr(alpha, "differentiable", False)
    if grad:
        a1, j1, a0, j0 = alpha.arms_and_jacobians(data.x)
    else:
        a1, a0 = alpha.alpha(1, data.x), alpha.alpha(0, data.x)
    a_obs = np.where(d == 1.0, a1, a0)
    value = float(np.mean(-2.0 * (a1 - a0) + a_obs**2))
    g = None
    if grad:
        j_obs = np.where((d == 1.0)[:, None], j1, j0)
        g = (-2.0 * (j1 - j0).sum(axis=0) + 2.0 * (j_obs.T @ a_obs)) / len(d)
    return RiskValue(value, g)


def paired_lsif_risk(r1: RatioModel, r0: RatioModel, data: ObservationalDataset, grad: bool = True) -> RiskValue:
    """``(1/n) sum[-2 (r1(X_i) + r0(X_i)) + D_i r1(X_i)^2 + (1 - D_i) r0(X_i)^2]``.

    The gradient is over ``concat(r1.theta, r0.theta)``.
    """
    d = data.d_treat
    n = len(d)
    grad = grad and all(hasattr(h, "value_and_jacobian") for h in (r1, r0))
    if grad:
        v1, j1 = r1.value_and_jacobian(data.x)
        v0, j0 = r0.value_and_jacobian(data.x)
    else:
        v1, v0 = r1(data.x), r0(data.x)
    value = float(np.mean(-2.0 * (v1 + v0) + d * v1**2 + (1.0 - d) * v0**2))
    g = None
    if grad:
        g1 = (-2.0 * j1.sum(axis=0) + 2.0 * (j1.T @ (d * v1))) / n
        g0 = (-2.0 * j0.sum(axis=0) + 2.0 * (j0.T @ ((1.0 - d) * v0))) / n
        g = np.concatenate([g1, g0])
    return RiskValue(value, g)


def alpha_from_ratios(r1: RatioModel, r0: RatioModel) -> RieszModel:
    shared = getattr(r1, "basis", None) is not None and getattr(r1, "basis", None) is getattr(r0, "basis", None)
    return RieszModel(r1, r0, shared_basis=shared)


def ratios_from_alpha(alpha: RieszModel) -> tuple[RatioModel, RatioModel]:
    return alpha.r1, alpha.r0


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RieszFitConfig:
    objective: str = "riesz_lsq"
    model: RieszModel | None = None
    reg_lambda: float = 0.0
    reg_kind: str = "l2_coefficients"
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    seed: int = 0

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise UsageError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.reg_lambda < 0:
            raise UsageError(f"reg_lambda must be non-negative, got {self.reg_lambda}")
        if self.model is None:
            raise UsageError("RieszFitConfig needs a starting model")
        if self.objective == "riesz_ukl":
            for head in (self.model.r1, self.model.r0):
                if head.link != "softplus1":
                    raise UsageError(
                        "riesz_ukl needs heads with the softplus1 link so that "
                        "alpha(1,.) > 1 and alpha(0,.) < -1 by construction"
                    )


@dataclass
class RieszFit:
    model: RieszModel
    result: OptimResult

    @property
    def trace(self) -> list[float]:
        return self.result.trace


def riesz_objective(data: ObservationalDataset, cfg: RieszFitConfig):
    model0 = cfg.model

    def fun(params):
        model = model0.with_params(params)
        if cfg.objective == "riesz_lsq":
            risk = riesz_empirical_risk(model, data)
        elif cfg.objective == "paired_lsif":
            risk = paired_lsif_risk(model.r1, model.r0, data)
        else:
            risk = riesz_tailored_ukl_risk(model, data)
        value, grad = risk.value, risk.grad
        if cfg.reg_lambda > 0:
            pen, pen_grad = model.regularizer(cfg.reg_kind)
            value = value + cfg.reg_lambda * pen
            grad = grad + cfg.reg_lambda * pen_grad
        return value, grad

    return fun


def fit_riesz(data: ObservationalDataset, cfg: RieszFitConfig, record_path: bool = False) -> RieszFit:
    """Minimise the configured empirical objective plus ``reg_lambda * Omega``."""
    res = gradient_descent(riesz_objective(data, cfg), cfg.model.params, cfg.optimizer, record_path=record_path)
    return RieszFit(cfg.model.with_params(res.theta), res)


def default_riesz_link(objective: str) -> str:
    return "softplus1" if objective == "riesz_ukl" else "identity"


def build_riesz_model(
    spec: ModelSpec,
    data: ObservationalDataset,
    objective: str = "riesz_lsq",
    shared_basis: bool = True,
    link: str | None = None,
    seed: int = 0,
) -> RieszModel:
    """Starting representer model from a ``linear:*`` spec.

    With ``shared_basis`` both heads use one feature map (rbf centers drawn
    from all rows); otherwise each head gets its own map, with rbf centers
    drawn from its own arm.
    """
    link = link or default_riesz_link(objective)
    rng = np.random.default_rng(seed)
    x = data.x
    if shared_basis:
        b1 = b0 = spec.build_basis(x, x, rng)
    else:
        b1 = spec.build_basis(x[data.d_treat == 1], x, rng)
        b0 = spec.build_basis(x[data.d_treat == 0], x, rng)
    r1 = RatioModel(b1, initial_params_for_link(b1, link, data.dim), link)
    r0 = RatioModel(b0, initial_params_for_link(b0, link, data.dim), link)
    return RieszModel(r1, r0, shared_basis=shared_basis)
