"""Hypothesis classes for ratios, representers and outcome regressions.

* :class:`BasisExpansion` maps ``x`` to features ``phi(x)`` whose first
  column is the constant 1 (polynomial monomials or Gaussian bumps).
* :class:`RatioModel` is ``r(x) = link(theta @ phi(x))``.
* :class:`RieszModel` stacks two ratio heads into the signed representer
  ``alpha(d, x) = d r1(x) - (1 - d) r0(x)``.
* :class:`KernelRatioModel` is the kernel expansion returned by
  :func:`kulsif_fit`.
* :class:`OutcomeModel` is the ridge regression ``mu(d, x)`` from
  :func:`ridge_outcome_fit`.

All fitted models are immutable and serialise to plain dicts
(:func:`model_to_dict` / :func:`model_from_dict`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist, pdist
from scipy.special import expit, log_expit

from .data import ObservationalDataset, TwoSampleDataset
from .errors import (
    NonPositiveLambda,
    SchemaMismatch,
    SingularSystem,
    TooFewSamples,
    UsageError,
)

def as_rows(x) -> np.ndarray:
    """Coerce to an ``(n, d)`` matrix; a 1-d array is ``n`` scalar samples."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x.reshape(1, 1)
    if x.ndim == 1:
        return x[:, None]
    return x


# ---------------------------------------------------------------------------
# links
# ---------------------------------------------------------------------------


def _softplus(z):
    return np.logaddexp(0.0, z)


@dataclass(frozen=True)
class Link:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    log_fn: Callable[[np.ndarray], np.ndarray] | None = None


LINKS: dict[str, Link] = {
    "identity": Link("identity", lambda z: z, lambda z: np.ones_like(z)),
    "exp": Link("exp", np.exp, np.exp, lambda z: z),
    "sigmoid": Link("sigmoid", expit, lambda z: expit(z) * expit(-z), log_expit),
    # 1 + softplus(z) > 1, used by the signed-KL representer heads
    "softplus1": Link(
        "softplus1",
        lambda z: 1.0 + _softplus(z),
        expit,
        lambda z: np.log1p(_softplus(z)),
    ),
    # 1 + exp(z): the exact form of 1/e(x) under a logistic propensity
    "exp1": Link("exp1", lambda z: 1.0 + np.exp(z), np.exp, lambda z: np.logaddexp(0.0, z)),
}


def get_link(name: str) -> Link:
    try:
        return LINKS[name]
    except KeyError:
        raise UsageError(f"unknown link {name!r}; choose from {sorted(LINKS)}") from None


# ---------------------------------------------------------------------------
# kernels and bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Kernel:
    """Gaussian kernel ``exp(-|x - x'|^2 / (2 sigma^2))``."""

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise UsageError(f"kernel bandwidth must be positive, got {self.sigma!r}")

    def __call__(self, a, b) -> np.ndarray:
        sq = cdist(as_rows(a), as_rows(b), "sqeuclidean")
        return np.exp(-sq / (2.0 * self.sigma**2))

    def gram(self, z) -> np.ndarray:
        k = self(z, z)
        return 0.5 * (k + k.T)


def median_bandwidth(points, max_points: int = 2000) -> float:
    """Median pairwise Euclidean distance (evenly thinned above ``max_points``)."""
    points = as_rows(points)
    if points.shape[0] > max_points:
        idx = np.linspace(0, points.shape[0] - 1, max_points).astype(int)
        points = points[idx]
    if points.shape[0] < 2:
        return 1.0
    dist = pdist(points)
    med = float(np.median(dist))
    return med if med > 0 else 1.0


@dataclass(frozen=True, eq=False)
class BasisExpansion:
    """Feature map with a leading constant column.

    ``kind="poly"``: all monomials of total degree ``<= degree`` in the
    selected columns.  ``kind="rbf"``: ``[1, k(x, c_1), ..., k(x, c_m)]``
    for Gaussian bumps at ``centers``.  ``columns`` restricts which
    covariates enter the map (``None`` means all).
    """

    kind: str
    degree: int = 1
    centers: np.ndarray | None = None
    sigma: float | None = None
    columns: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind == "poly":
            if self.degree < 0:
                raise UsageError(f"polynomial degree must be >= 0, got {self.degree}")
        elif self.kind == "rbf":
            if self.centers is None or len(self.centers) < 1:
                raise UsageError("rbf basis needs at least one center")
            if self.sigma is None or not self.sigma > 0:
                raise UsageError(f"rbf bandwidth must be positive, got {self.sigma!r}")
            c = as_rows(np.array(self.centers, dtype=float))
            c.setflags(write=False)
            object.__setattr__(self, "centers", c)
        else:
            raise UsageError(f"unknown basis kind {self.kind!r}")
        if self.columns is not None:
            object.__setattr__(self, "columns", tuple(int(c) for c in self.columns))

    @classmethod
    def poly(cls, degree: int, columns=None) -> "BasisExpansion":
        return cls("poly", degree=degree, columns=columns)

    @classmethod
    def rbf(cls, centers, sigma: float, columns=None) -> "BasisExpansion":
        return cls("rbf", centers=np.asarray(centers, dtype=float), sigma=float(sigma), columns=columns)

    def _select(self, x) -> np.ndarray:
        x = as_rows(x)
        if self.columns is not None:
            x = x[:, list(self.columns)]
        return x

    def _monomials(self, p: int) -> list[tuple[int, ...]]:
        out: list[tuple[int, ...]] = []
        for deg in range(1, self.degree + 1):
            out.extend(itertools.combinations_with_replacement(range(p), deg))
        return out

    def __call__(self, x) -> np.ndarray:
        x = self._select(x)
        n = x.shape[0]
        if self.kind == "poly":
            cols = [np.ones(n)]
            for mono in self._monomials(x.shape[1]):
                cols.append(np.prod(x[:, list(mono)], axis=1))
            return np.column_stack(cols)
        if x.shape[1] != self.centers.shape[1]:
            raise SchemaMismatch(
                f"rbf basis expects {self.centers.shape[1]} columns, got {x.shape[1]}"
            )
        k = Kernel(self.sigma)(x, self.centers)
        return np.hstack([np.ones((n, 1)), k])

    def n_features(self, dim: int) -> int:
        if self.kind == "rbf":
            return 1 + self.centers.shape[0]
        p = dim if self.columns is None else len(self.columns)
        return 1 + len(self._monomials(p))

    def penalty_matrix(self) -> np.ndarray | None:
        """Gram matrix of the centers (RKHS norm of the bump part), rbf only."""
        if self.kind != "rbf":
            return None
        return Kernel(self.sigma).gram(self.centers)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "poly":
            d["degree"] = self.degree
        else:
            d["centers"] = self.centers.tolist()
            d["sigma"] = self.sigma
        if self.columns is not None:
            d["columns"] = list(self.columns)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BasisExpansion":
        if d["kind"] == "poly":
            return cls.poly(int(d["degree"]), columns=d.get("columns"))
        return cls.rbf(np.array(d["centers"], dtype=float), float(d["sigma"]), columns=d.get("columns"))


# ---------------------------------------------------------------------------
# parametric ratio and representer models
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RatioModel:
    """``r(x) = link(theta @ phi(x))``."""

    basis: BasisExpansion
    theta: np.ndarray
    link: str = "identity"

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).ravel()
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        get_link(self.link)

    @property
    def params(self) -> np.ndarray:
        return self.theta

    @property
    def n_params(self) -> int:
        return self.theta.size

    def with_params(self, theta) -> "RatioModel":
        return replace(self, theta=np.asarray(theta, dtype=float))

    def linear_predictor(self, x) -> np.ndarray:
        return self.basis(x) @ self.theta

    def __call__(self, x) -> np.ndarray:
        return get_link(self.link).fn(self.linear_predictor(x))

    def log(self, x) -> np.ndarray:
        link = get_link(self.link)
        z = self.linear_predictor(x)
        if link.log_fn is not None:
            return link.log_fn(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(link.fn(z))

    def value_and_jacobian(self, x) -> tuple[np.ndarray, np.ndarray]:
        phi = self.basis(x)
        z = phi @ self.theta
        link = get_link(self.link)
        return link.fn(z), phi * link.deriv(z)[:, None]

    def penalty_mask(self) -> np.ndarray:
        mask = np.ones(self.n_params, dtype=bool)
        mask[0] = False
        return mask

    def regularizer(self, kind: str = "l2_coefficients") -> tuple[float, np.ndarray]:
        """Penalty value and gradient; the intercept is never penalised."""
        grad = np.zeros(self.n_params)
        w = self.theta[1:]
        kmat = self.basis.penalty_matrix() if kind == "rkhs_norm" else None
        if kind not in ("l2_coefficients", "rkhs_norm"):
            raise UsageError(f"unknown regularizer {kind!r}")
        if kmat is None:
            grad[1:] = 2.0 * w
            return float(w @ w), grad
        kw = kmat @ w
        grad[1:] = 2.0 * kw
        return float(w @ kw), grad

    def to_dict(self) -> dict:
        return {
            "type": "ratio",
            "basis": self.basis.to_dict(),
            "theta": self.theta.tolist(),
            "link": self.link,
        }


@dataclass(frozen=True, eq=False)
class RieszModel:
    """Signed representer ``alpha(d, x) = d r1(x) - (1 - d) r0(x)``.

    ``shared_basis`` records whether both heads use one feature map;
    parameters are always ``concat(r1.theta, r0.theta)``.
    """

    r1: RatioModel
    r0: RatioModel
    shared_basis: bool = True

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([self.r1.theta, self.r0.theta])

    @property
    def n_params(self) -> int:
        return self.r1.n_params + self.r0.n_params

    def with_params(self, params) -> "RieszModel":
        params = np.asarray(params, dtype=float)
        k = self.r1.n_params
        return replace(self, r1=self.r1.with_params(params[:k]), r0=self.r0.with_params(params[k:]))

    def alpha(self, d, x) -> np.ndarray:
        x = as_rows(x)
        d = np.broadcast_to(np.asarray(d, dtype=float), (x.shape[0],))
        return d * self.r1(x) - (1.0 - d) * self.r0(x)

    __call__ = alpha

    @property
    def differentiable(self) -> bool:
        return all(hasattr(h, "value_and_jacobian") for h in (self.r1, self.r0))

    def arms_and_jacobians(self, x):
        """``(alpha(1,x), J1, alpha(0,x), J0)`` with Jacobians over all parameters."""
        v1, j1 = self.r1.value_and_jacobian(x)
        v0, j0 = self.r0.value_and_jacobian(x)
        n, k1, k0 = len(v1), self.r1.n_params, self.r0.n_params
        full1 = np.zeros((n, k1 + k0))
        full0 = np.zeros((n, k1 + k0))
        full1[:, :k1] = j1
        full0[:, k1:] = -j0
        return v1, full1, -v0, full0

    def regularizer(self, kind: str = "l2_coefficients") -> tuple[float, np.ndarray]:
        v1, g1 = self.r1.regularizer(kind)
        v0, g0 = self.r0.regularizer(kind)
        return v1 + v0, np.concatenate([g1, g0])

    def to_dict(self) -> dict:
        return {
            "type": "riesz",
            "shared_basis": self.shared_basis,
            "r1": self.r1.to_dict(),
            "r0": self.r0.to_dict(),
        }


def initial_params_for_link(basis: BasisExpansion, link: str, dim: int) -> np.ndarray:
    """Coefficients of a constant starting model (ratio 1 for identity/exp links)."""
    theta = np.zeros(basis.n_features(dim))
    if link == "identity":
        theta[0] = 1.0
    return theta


# ---------------------------------------------------------------------------
# non-parametric and composite ratio models
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelRatioModel:
    """``r(x) = sum_l coef_l k(x, z_l)``."""

    points: np.ndarray
    coef: np.ndarray
    kernel: Kernel

    def __call__(self, x) -> np.ndarray:
        return self.kernel(x, self.points) @ self.coef

    def log(self, x) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self(x))

    def to_dict(self) -> dict:
        return {
            "type": "kernel",
            "sigma": self.kernel.sigma,
            "points": np.asarray(self.points).tolist(),
            "coef": np.asarray(self.coef).tolist(),
        }


@dataclass(frozen=True, eq=False)
class TruncatedRatioModel:
    """Pointwise ``max(r(x), 0)``."""

    inner: object

    def __call__(self, x) -> np.ndarray:
        return np.maximum(self.inner(x), 0.0)

    def log(self, x) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self(x))

    def to_dict(self) -> dict:
        return {"type": "truncated", "inner": model_to_dict(self.inner)}


@dataclass(frozen=True, eq=False)
class ScaledRatioModel:
    """``r(x) / scale``; turns a PU-loss output (``C r0``) back into a ratio."""

    inner: object
    scale: float

    def __call__(self, x) -> np.ndarray:
        return self.inner(x) / self.scale

    def log(self, x) -> np.ndarray:
        return self.inner.log(x) - math.log(self.scale)

    def to_dict(self) -> dict:
        return {"type": "scaled", "scale": self.scale, "inner": model_to_dict(self.inner)}


@dataclass(frozen=True, eq=False)
class CompositeRatioModel:
    """Product of stage ratios, evaluated in log space."""

    stages: tuple

    def log(self, x) -> np.ndarray:
        return np.sum([s.log(x) for s in self.stages], axis=0)

    def __call__(self, x) -> np.ndarray:
        return np.exp(self.log(x))

    def to_dict(self) -> dict:
        return {"type": "composite", "stages": [model_to_dict(s) for s in self.stages]}


@dataclass(frozen=True, eq=False)
class FunctionRatioModel:
    """Wraps a plain callable (analytic oracles, tests)."""

    fn: Callable[[np.ndarray], np.ndarray]
    log_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(as_rows(x)), dtype=float)

    def log(self, x) -> np.ndarray:
        if self.log_fn is not None:
            return self.log_fn(as_rows(x))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self(x))


def model_to_dict(model) -> dict:
    if not hasattr(model, "to_dict"):
        raise UsageError(f"{type(model).__name__} is not serialisable")
    return model.to_dict()


def model_from_dict(d: dict):
    kind = d.get("type")
    if kind == "ratio":
        return RatioModel(BasisExpansion.from_dict(d["basis"]), np.array(d["theta"], dtype=float), d.get("link", "identity"))
    if kind == "riesz":
        return RieszModel(model_from_dict(d["r1"]), model_from_dict(d["r0"]), bool(d.get("shared_basis", True)))
    if kind == "kernel":
        return KernelRatioModel(np.array(d["points"], dtype=float), np.array(d["coef"], dtype=float), Kernel(float(d["sigma"])))
    if kind == "truncated":
        return TruncatedRatioModel(model_from_dict(d["inner"]))
    if kind == "scaled":
        return ScaledRatioModel(model_from_dict(d["inner"]), float(d["scale"]))
    if kind == "composite":
        return CompositeRatioModel(tuple(model_from_dict(s) for s in d["stages"]))
    if kind == "outcome":
        return OutcomeModel(BasisExpansion.from_dict(d["basis"]), np.array(d["beta"], dtype=float))
    raise SchemaMismatch(f"unknown model type {kind!r}")


# ---------------------------------------------------------------------------
# KuLSIF
# ---------------------------------------------------------------------------


def _check_lambda(lam: float) -> None:
    if not (lam > 0 and math.isfinite(lam)):
        raise NonPositiveLambda(f"lambda must be positive, got {lam!r}")


def kulsif_system(data: TwoSampleDataset, kernel: Kernel, lam: float):
    """Return ``(A, b, points, K)`` for the KuLSIF stationarity system ``A c = b``.

    The expansion points are ``de`` rows followed by ``nu`` rows.  ``A`` is
    symmetrised and carries the diagonal jitter ``1e-10 trace(K) / m``.
    """
    points = data.pooled
    k = kernel.gram(points)
    k_d = k[: data.n_de]
    k_n = k[data.n_de:]
    a = (2.0 / data.n_de) * (k_d.T @ k_d) + lam * k
    a = 0.5 * (a + a.T)
    m = k.shape[0]
    a[np.diag_indices(m)] += 1e-10 * np.trace(k) / m
    b = (2.0 / data.n_nu) * k_n.sum(axis=0)
    return a, b, points, k


def kulsif_objective(c, data: TwoSampleDataset, kernel: Kernel, lam: float, k: np.ndarray | None = None) -> float:
    """``(1/n_de) sum r(de)^2 - (2/n_nu) sum r(nu) + (lam/2) |r|_H^2`` for ``r = K c``."""
    if k is None:
        k = kernel.gram(data.pooled)
    r = k @ c
    r_de, r_nu = r[: data.n_de], r[data.n_de:]
    return float(np.mean(r_de**2) - 2.0 * np.mean(r_nu) + 0.5 * lam * c @ k @ c)


def kulsif_fit(data: TwoSampleDataset, kernel: Kernel, lam: float) -> KernelRatioModel:
    """Closed-form kernel uLSIF over the pooled sample points.

    The minimiser is ``r = (2 / lam) [mean_j k(., nu_j) - mean_l beta_l k(., de_l)]``
    where ``beta = r(de)`` solves the positive definite system
    ``(K_dd + (lam n_de / 2) I) beta = (n_de / n_nu) K_dn 1``.  The returned
    coefficients over ``[de; nu]`` also solve :func:`kulsif_system`.
    """
    _check_lambda(lam)
    nd, nn = data.n_de, data.n_nu
    k_dd = kernel.gram(data.de)
    rhs = (nd / nn) * kernel(data.de, data.nu).sum(axis=1)
    try:
        beta = scipy.linalg.cho_solve(scipy.linalg.cho_factor(k_dd + 0.5 * lam * nd * np.eye(nd)), rhs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(f"KuLSIF system could not be solved: {exc}") from None
    c = (2.0 / lam) * np.concatenate([-beta / nd, np.full(nn, 1.0 / nn)])
    if not np.all(np.isfinite(c)):
        raise SingularSystem("KuLSIF solve produced non-finite coefficients")
    return KernelRatioModel(points=data.pooled, coef=c, kernel=kernel)


LOOCV_METHODS = ("fast", "explicit")


def loocv_score(data: TwoSampleDataset, kernel: Kernel, lam: float, method: str = "fast") -> float:
    """Leave-one-pair-out score of KuLSIF.

    For ``i < N = min(n_de, n_nu)`` the ``i``-th de and ``i``-th nu points
    are removed together, the model is refitted, and the held-out LSIF
    objective ``r(de_i)^2 / 2 - r(nu_i)`` is recorded.  Returns the mean.

    ``method="explicit"`` refits with :func:`kulsif_fit` for every pair.
    ``method="fast"`` obtains the same refits from one factorisation (see
    :func:`_loocv_heldout_fast`).
    """
    _check_lambda(lam)
    if method not in LOOCV_METHODS:
        raise UsageError(f"LOOCV method must be one of {LOOCV_METHODS}, got {method!r}")
    if data.n_de < 2 or data.n_nu < 2:
        raise TooFewSamples(f"LOOCV needs n_de >= 2 and n_nu >= 2, got {data.n_de}, {data.n_nu}")
    if method == "fast":
        r_de, r_nu = _loocv_heldout_fast(data, kernel, lam)
        return float(np.mean(0.5 * r_de**2 - r_nu))
    big_n = min(data.n_de, data.n_nu)
    scores = np.empty(big_n)
    for i in range(big_n):
        train = TwoSampleDataset(np.delete(data.de, i, axis=0), np.delete(data.nu, i, axis=0))
        r = kulsif_fit(train, kernel, lam)
        scores[i] = 0.5 * r(data.de[i : i + 1])[0] ** 2 - r(data.nu[i : i + 1])[0]
    return float(scores.mean())


def _loocv_heldout_fast(data: TwoSampleDataset, kernel: Kernel, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Held-out ``(r_{-i}(de_i), r_{-i}(nu_i))`` for every pair ``i < N``.

    The RKHS stationarity condition gives
    ``r = (2 / lam) [mean_j k(., nu_j) - mean_l beta_l k(., de_l)]`` with
    ``beta = r(de)`` solving ``(K_dd + c I) beta = (n_de / n_nu) K_dn 1``
    and ``c = lam n_de / 2``.  After removing a pair ``c`` is the same for
    every ``i``, so each reduced system is solved from one inverse of the
    full ``K_dd + c I`` by the block-removal identity
    ``inv(M)_{-i,-i} - inv(M)_{-i,i} inv(M)_{i,-i} / inv(M)_{ii}``.
    """
    de, nu = data.de, data.nu
    nd, nn = data.n_de - 1, data.n_nu - 1
    big_n = min(data.n_de, data.n_nu)
    k_dd = kernel.gram(de)
    k_dn = kernel(de, nu)
    k_nn_rowsum = kernel(nu[:big_n], nu).sum(axis=1)
    c = 0.5 * lam * nd
    try:
        m_inv = scipy.linalg.inv(k_dd + c * np.eye(data.n_de), check_finite=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(f"KuLSIF LOOCV system could not be inverted: {exc}") from None
    m_inv = 0.5 * (m_inv + m_inv.T)
    idx = np.arange(big_n)
    dn_rowsum = k_dn.sum(axis=1)
    # column i: K_{d, nu without i} 1, with the held-out de row zeroed
    w = dn_rowsum[:, None] - k_dn[:, :big_n]
    w[idx, idx] = 0.0
    u = m_inv @ w
    beta = (nd / nn) * (u - m_inv[:, :big_n] * (u[idx, idx] / m_inv[idx, idx]))
    beta[idx, idx] = 0.0
    diag_dn = k_dn[idx, idx]
    r_de = (2.0 / lam) * ((dn_rowsum[:big_n] - diag_dn) / nn - np.einsum("li,li->i", k_dd[:, :big_n], beta) / nd)
    r_nu = (2.0 / lam) * ((k_nn_rowsum - 1.0) / nn - np.einsum("li,li->i", k_dn[:, :big_n], beta) / nd)
    return r_de, r_nu


def select_lambda_loocv(
    data: TwoSampleDataset, kernel: Kernel, grid: Sequence[float], method: str = "fast"
) -> tuple[float, dict[float, float]]:
    scores = {float(lam): loocv_score(data, kernel, lam, method) for lam in grid}
    best = min(scores, key=scores.__getitem__)
    return best, scores


DEFAULT_LAMBDA_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0)


# ---------------------------------------------------------------------------
# outcome regression
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OutcomeModel:
    """``mu(d, x) = [phi(x), d phi(x)] @ beta``.

    The treated block ``d phi(x)`` contains ``d`` itself through the
    constant column, so each arm gets its own surface.
    """

    basis: BasisExpansion
    beta: np.ndarray

    def design(self, d, x) -> np.ndarray:
        phi = self.basis(x)
        d = np.broadcast_to(np.asarray(d, dtype=float), (phi.shape[0],))
        return np.hstack([phi, d[:, None] * phi])

    def __call__(self, d, x) -> np.ndarray:
        return self.design(d, x) @ self.beta

    def to_dict(self) -> dict:
        return {"type": "outcome", "basis": self.basis.to_dict(), "beta": self.beta.tolist()}


def ridge_outcome_fit(data: ObservationalDataset, basis: BasisExpansion, lam: float = 0.0) -> OutcomeModel:
    """``beta = (Psi' Psi + lam I)^-1 Psi' y`` over the interaction design."""
    if lam < 0:
        raise UsageError(f"ridge lambda must be non-negative, got {lam!r}")
    proto = OutcomeModel(basis, np.zeros(0))
    psi = proto.design(data.d_treat, data.x)
    gram = psi.T @ psi
    gram[np.diag_indices_from(gram)] += lam
    rhs = psi.T @ data.y
    try:
        beta = scipy.linalg.solve(gram, rhs, assume_a="sym")
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(f"outcome design is rank deficient: {exc}") from None
    with np.errstate(all="ignore"):
        resid = gram @ beta - rhs
    if not np.all(np.isfinite(beta)) or np.linalg.norm(resid) > 1e-6 * max(1.0, np.linalg.norm(rhs)):
        raise SingularSystem("outcome design is rank deficient; increase lambda")
    return OutcomeModel(basis, beta)


# ---------------------------------------------------------------------------
# model spec strings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """Parsed ``linear:poly:<deg> | linear:rbf:<m>:<sigma|median> | kulsif:<sigma|median>:<lambda|loocv-grid>``."""

    family: str
    degree: int = 1
    n_centers: int = 0
    sigma: float | None = None  # None means median heuristic
    lam: float | None = None  # None means LOOCV grid (kulsif only)

    def build_basis(self, center_pool, fit_points, rng: np.random.Generator, columns=None) -> BasisExpansion:
        if self.family == "poly":
            return BasisExpansion.poly(self.degree, columns=columns)
        if self.family != "rbf":
            raise UsageError("kulsif specs do not define a basis")
        pool = as_rows(center_pool)
        m = min(self.n_centers, pool.shape[0])
        idx = np.sort(rng.choice(pool.shape[0], size=m, replace=False))
        centers = pool[idx]
        sigma = self.sigma if self.sigma is not None else median_bandwidth(fit_points)
        return BasisExpansion.rbf(centers, sigma, columns=columns)


def parse_model_spec(spec: str) -> ModelSpec:
    parts = spec.strip().lower().split(":")
    try:
        if parts[0] == "linear" and parts[1] == "poly" and len(parts) == 3:
            return ModelSpec("poly", degree=int(parts[2]))
        if parts[0] == "linear" and parts[1] == "rbf" and len(parts) == 4:
            sigma = None if parts[3] == "median" else float(parts[3])
            return ModelSpec("rbf", n_centers=int(parts[2]), sigma=sigma)
        if parts[0] == "kulsif" and len(parts) == 3:
            sigma = None if parts[1] == "median" else float(parts[1])
            lam = None if parts[2] == "loocv-grid" else float(parts[2])
            return ModelSpec("kulsif", sigma=sigma, lam=lam)
    except (IndexError, ValueError):
        pass
    raise UsageError(
        f"bad model spec {spec!r}; expected linear:poly:<deg>, "
        "linear:rbf:<m>:<sigma|median> or kulsif:<sigma|median>:<lambda|loocv-grid>"
    )
