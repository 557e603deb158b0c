"""Cross-fitted ATE estimation with the Neyman-orthogonal score.

For a regression ``mu(d, x)`` and representer ``alpha(d, x)`` the score of
one observation is

    psi = alpha(D, X) (Y - mu(D, X)) + mu(1, X) - mu(0, X) - theta.

:func:`estimate_ate_debiased` fits both nuisances on the complement of each
fold, evaluates the uncentred score on the fold, and averages.  Plug-in and
IPW variants drop the residual term or the regression respectively.

Nuisance fitters are plain callables ``train -> fitted``: the fitted
regression is called as ``mu(d, x)`` and the fitted representer exposes
``alpha(d, x)``.  :class:`OutcomeSpec` and :class:`RieszSpec` build them
from model spec strings; oracle nuisances can be injected with e.g.
``lambda train: oracle.mu``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from .data import FoldAssignment, ObservationalDataset, make_folds
from .errors import EmptyArmInFold, OverlapWarning, UsageError
from .models import OutcomeModel, parse_model_spec, ridge_outcome_fit
from .optim import OptimizerSettings
from .riesz import RieszFitConfig, build_riesz_model, fit_riesz

Z_95 = 1.959963984540054


def neyman_score(x, d: float, y: float, mu, alpha, theta: float) -> float:
    """Score of a single observation ``(x, d, y)``."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    a = float(np.asarray(alpha.alpha(d, x)).ravel()[0])
    mu_d = float(np.asarray(mu(d, x)).ravel()[0])
    m = float(np.asarray(mu(1.0, x)).ravel()[0] - np.asarray(mu(0.0, x)).ravel()[0])
    return a * (y - mu_d) + m - theta


def neyman_scores(data: ObservationalDataset, mu, alpha, theta: float = 0.0) -> np.ndarray:
    x, d, y = data.x, data.d_treat, data.y
    return alpha.alpha(d, x) * (y - mu(d, x)) + mu(1.0, x) - mu(0.0, x) - theta


# ---------------------------------------------------------------------------
# nuisance fitters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutcomeSpec:
    """Ridge outcome regression on a ``linear:*`` basis.

    ``columns`` restricts the covariates used (deliberate misspecification).
    """

    model: str = "linear:poly:1"
    reg_lambda: float = 1e-6
    columns: tuple[int, ...] | None = None
    seed: int = 0

    def __call__(self, train: ObservationalDataset) -> OutcomeModel:
        spec = parse_model_spec(self.model)
        x = train.x if self.columns is None else train.x[:, list(self.columns)]
        basis = spec.build_basis(x, x, np.random.default_rng(self.seed), columns=self.columns)
        return ridge_outcome_fit(train, basis, self.reg_lambda)


@dataclass(frozen=True)
class RieszSpec:
    objective: str = "riesz_lsq"
    model: str = "linear:poly:1"
    link: str | None = None
    shared_basis: bool = True
    reg_lambda: float = 0.0
    reg_kind: str = "l2_coefficients"
    optimizer: OptimizerSettings = field(default_factory=lambda: OptimizerSettings(max_iters=500, grad_tol=1e-6))
    seed: int = 0

    def config(self, train: ObservationalDataset) -> RieszFitConfig:
        model0 = build_riesz_model(
            parse_model_spec(self.model), train, self.objective, self.shared_basis, self.link, self.seed
        )
        return RieszFitConfig(
            objective=self.objective,
            model=model0,
            reg_lambda=self.reg_lambda,
            reg_kind=self.reg_kind,
            optimizer=self.optimizer,
            seed=self.seed,
        )

    def __call__(self, train: ObservationalDataset):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return fit_riesz(train, self.config(train)).model


class _ZeroRegression:
    def __call__(self, d, x):
        return np.zeros(np.asarray(x).shape[0])


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldDiagnostics:
    fold_id: int
    n: int
    riesz_term_mean: float
    plugin_term_mean: float
    max_ratio: float | None = None


@dataclass(frozen=True)
class AteReport:
    tau_hat: float
    se: float
    ci_low: float
    ci_high: float
    estimator_kind: str
    n: int
    folds: int
    per_fold: tuple[FoldDiagnostics, ...] = ()
    overlap_warning: bool = False
    scores: np.ndarray | None = field(default=None, repr=False, compare=False)

    def covers(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("scores")
        d["per_fold"] = [asdict(f) for f in self.per_fold]
        return d


def _report(scores: np.ndarray, kind: str, k: int, per_fold, overlap: bool) -> AteReport:
    n = len(scores)
    tau = float(np.mean(scores))
    se = float(np.std(scores - tau, ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return AteReport(
        tau_hat=tau,
        se=se,
        ci_low=tau - Z_95 * se,
        ci_high=tau + Z_95 * se,
        estimator_kind=kind,
        n=n,
        folds=k,
        per_fold=tuple(per_fold),
        overlap_warning=overlap,
        scores=scores,
    )


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

Fitter = Callable[[ObservationalDataset], Any]


def _cross_fit(
    data: ObservationalDataset,
    folds: int,
    seed: int,
    outcome: Fitter | None,
    riesz: Fitter | None,
    require_both_arms: bool,
    eps_min: float,
):
    fa: FoldAssignment = make_folds(data.n, folds, seed)
    scores = np.empty(data.n)
    per_fold = []
    overlap = False
    for k in range(fa.k):
        test_idx = fa.indices(k)
        train_idx = fa.complement(k)
        d_train = data.d_treat[train_idx]
        if require_both_arms:
            for arm in (1, 0):
                if not np.any(d_train == arm):
                    raise EmptyArmInFold(k, arm)
        train = _subset_unchecked(data, train_idx)
        mu = outcome(train) if outcome is not None else _ZeroRegression()
        x, d, y = data.x[test_idx], data.d_treat[test_idx], data.y[test_idx]
        plug = mu(1.0, x) - mu(0.0, x)
        if riesz is not None:
            alpha = riesz(train)
            resid_term = alpha.alpha(d, x) * (y - mu(d, x))
            max_ratio = float(max(np.max(alpha.alpha(1.0, x)), np.max(-alpha.alpha(0.0, x))))
            if max_ratio > 1.0 / eps_min:
                overlap = True
        else:
            resid_term = np.zeros(len(test_idx))
            max_ratio = None
        scores[test_idx] = resid_term + plug
        per_fold.append(
            FoldDiagnostics(k, len(test_idx), float(np.mean(resid_term)), float(np.mean(plug)), max_ratio)
        )
    if overlap:
        warnings.warn(
            f"fitted ratios exceed 1/eps_min = {1.0 / eps_min:g}; overlap may be violated",
            OverlapWarning,
            stacklevel=3,
        )
    return scores, per_fold, fa.k, overlap


def _subset_unchecked(data: ObservationalDataset, idx: np.ndarray) -> ObservationalDataset:
    """Row subset that tolerates a single-arm sample (plug-in on tiny data)."""
    sub = object.__new__(ObservationalDataset)
    object.__setattr__(sub, "x", data.x[idx])
    object.__setattr__(sub, "d_treat", data.d_treat[idx])
    object.__setattr__(sub, "y", data.y[idx])
    return sub


def _check_k(folds: int):
    if folds < 2:
        raise UsageError(f"cross-fitting needs K >= 2 folds, got {folds}")


def estimate_ate_debiased(
    data: ObservationalDataset,
    folds: int = 5,
    seed: int = 0,
    outcome: Fitter | None = None,
    riesz: Fitter | None = None,
    eps_min: float = 0.01,
) -> AteReport:
    """Cross-fitted debiased ATE: mean of ``alpha (Y - mu) + mu(1,X) - mu(0,X)``."""
    _check_k(folds)
    outcome = outcome if outcome is not None else OutcomeSpec()
    riesz = riesz if riesz is not None else RieszSpec()
    scores, per_fold, k, overlap = _cross_fit(data, folds, seed, outcome, riesz, True, eps_min)
    return _report(scores, "debiased", k, per_fold, overlap)


def estimate_ate_plugin(
    data: ObservationalDataset,
    folds: int = 5,
    seed: int = 0,
    outcome: Fitter | None = None,
) -> AteReport:
    """Cross-fitted plug-in ``mean[mu(1,X) - mu(0,X)]``.

    Its standard error is the sd of the plug-in integrand over ``sqrt(n)``;
    that ignores the first-stage error and is a diagnostic only.
    """
    _check_k(folds)
    outcome = outcome if outcome is not None else OutcomeSpec()
    scores, per_fold, k, overlap = _cross_fit(data, folds, seed, outcome, None, False, 0.01)
    return _report(scores, "plugin", k, per_fold, overlap)


def estimate_ate_ipw(
    data: ObservationalDataset,
    folds: int = 5,
    seed: int = 0,
    riesz: Fitter | None = None,
    eps_min: float = 0.01,
) -> AteReport:
    """Cross-fitted weighting estimator ``mean[alpha(D,X) Y]`` (the score with ``mu = 0``)."""
    _check_k(folds)
    riesz = riesz if riesz is not None else RieszSpec()
    scores, per_fold, k, overlap = _cross_fit(data, folds, seed, None, riesz, True, eps_min)
    return _report(scores, "ipw", k, per_fold, overlap)
