"""Bregman generators and the empirical risks built from them.

A generator ``f`` induces the pointwise pieces

    ell1(t) = f'(t) * t - f(t)      (averaged over the denominator sample)
    ell2(t) = -f'(t)                (averaged over the numerator sample)

and the empirical density-ratio-matching risk

    BD_f(r) = mean_de ell1(r(x)) + mean_nu ell2(r(x)).

Up to an additive constant this is the Bregman divergence between the true
ratio and ``r`` measured under ``p_de``, so it is minimised at the true
ratio whatever the generator.

PU log-loss is the one member that does not target the ratio itself: its
model output is the scaled ratio ``C * r0`` (kept inside ``(0, 1)`` by
``C < 1 / sup r0``).  That is expressed through ``target_scale``, which
divides the denominator piece so the minimiser becomes
``target_scale * r0``; for every other loss ``target_scale == 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, UsageError


@dataclass(frozen=True)
class RiskValue:
    value: float
    grad: np.ndarray | None = None


class BregmanLoss:
    """Convex generator ``f`` with analytic first and second derivatives."""

    name: str = ""
    target_scale: float = 1.0

    def in_domain(self, t) -> np.ndarray:
        raise NotImplementedError

    def f(self, t):
        raise NotImplementedError

    def df(self, t):
        raise NotImplementedError

    def d2f(self, t):
        raise NotImplementedError

    def ell1(self, t):
        t = np.asarray(t, dtype=float)
        return self.df(t) * t - self.f(t)

    def ell2(self, t):
        return -self.df(t)

    # d/dt of the pieces; used by the chain rule in the risks
    def dell1(self, t):
        t = np.asarray(t, dtype=float)
        return self.d2f(t) * t

    def dell2(self, t):
        return -self.d2f(t)

    def check_domain(self, t, label: str = "t") -> None:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        bad = np.flatnonzero(~self.in_domain(t))
        if bad.size:
            i = int(bad[0])
            raise DomainError(
                f"{self.name}: {label}[{i}] = {t[i]!r} is outside the loss domain",
                index=i,
                value=float(t[i]),
            )

    @property
    def token(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    def __eq__(self, other):
        return type(self) is type(other) and vars(self) == vars(other)

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(vars(self).items()))))


class LSIF(BregmanLoss):
    """``f(t) = (t - 1)^2 / 2`` on the real line."""

    name = "lsif"

    def in_domain(self, t):
        return np.isfinite(t)

    def f(self, t):
        return 0.5 * (np.asarray(t, dtype=float) - 1.0) ** 2

    def df(self, t):
        return np.asarray(t, dtype=float) - 1.0

    def d2f(self, t):
        return np.ones_like(np.asarray(t, dtype=float))


class UKL(BregmanLoss):
    """Unnormalised KL: ``f(t) = t log t - t`` for ``t > 0``."""

    name = "ukl"

    def in_domain(self, t):
        return np.isfinite(t) & (t > 0)

    def f(self, t):
        t = np.asarray(t, dtype=float)
        return t * np.log(t) - t

    def df(self, t):
        return np.log(t)

    def d2f(self, t):
        return 1.0 / np.asarray(t, dtype=float)

    # closed forms avoid cancellation in df*t - f
    def ell1(self, t):
        return np.asarray(t, dtype=float) * 1.0

    def dell1(self, t):
        return np.ones_like(np.asarray(t, dtype=float))


class BKL(BregmanLoss):
    """Binary KL (logistic regression): ``f(t) = t log t - (1 + t) log(1 + t)``."""

    name = "bkl"

    def in_domain(self, t):
        return np.isfinite(t) & (t > 0)

    def f(self, t):
        t = np.asarray(t, dtype=float)
        return t * np.log(t) - (1.0 + t) * np.log1p(t)

    def df(self, t):
        t = np.asarray(t, dtype=float)
        return np.log(t) - np.log1p(t)

    def d2f(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 / (t * (1.0 + t))

    def ell1(self, t):
        return np.log1p(np.asarray(t, dtype=float))


class PULogLoss(BregmanLoss):
    """PU learning with log loss.

    ``f(t) = C log(1 - t) + C t (log t - log(1 - t))`` on ``0 < t < 1``.
    The model output estimates ``C * r0``; see the module docstring.
    """

    name = "pu"

    def __init__(self, c: float = 0.5):
        if not (c > 0 and math.isfinite(c)):
            raise UsageError(f"PU constant C must be positive, got {c!r}")
        self.c = float(c)

    @property
    def target_scale(self) -> float:
        return self.c

    @property
    def token(self) -> str:
        return f"pu:{self.c:g}"

    def in_domain(self, t):
        return np.isfinite(t) & (t > 0) & (t < 1)

    def f(self, t):
        t = np.asarray(t, dtype=float)
        return self.c * np.log1p(-t) + self.c * t * (np.log(t) - np.log1p(-t))

    def df(self, t):
        t = np.asarray(t, dtype=float)
        return self.c * (np.log(t) - np.log1p(-t))

    def d2f(self, t):
        t = np.asarray(t, dtype=float)
        return self.c / (t * (1.0 - t))

    def ell1(self, t):
        return -self.c * np.log1p(-np.asarray(t, dtype=float))

    def __repr__(self) -> str:
        return f"PULogLoss(c={self.c!r})"


class RieszTailoredUKL(BregmanLoss):
    """Signed KL generator ``f(a) = (|a| - 1) log(|a| - 1) + |a|`` for ``|a| > 1``.

    Used for the Riesz representer, which is negative on the control arm.
    """

    name = "riesz-ukl"

    def in_domain(self, t):
        return np.isfinite(t) & (np.abs(t) > 1)

    def f(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        return xlogy(a - 1.0, a - 1.0) + a

    def df(self, t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * (np.log(np.abs(t) - 1.0) + 2.0)

    def d2f(self, t):
        return 1.0 / (np.abs(np.asarray(t, dtype=float)) - 1.0)


def parse_loss(token: str) -> BregmanLoss:
    """Parse ``lsif | ukl | bkl | pu:<C> | riesz-ukl``."""
    token = token.strip().lower()
    simple = {"lsif": LSIF, "ukl": UKL, "bkl": BKL, "riesz-ukl": RieszTailoredUKL}
    if token in simple:
        return simple[token]()
    if token == "pu":
        return PULogLoss()
    if token.startswith("pu:"):
        try:
            c = float(token[3:])
        except ValueError:
            raise UsageError(f"bad PU constant in {token!r}") from None
        return PULogLoss(c)
    raise UsageError(f"unknown loss {token!r}; expected lsif|ukl|bkl|pu:<C>|riesz-ukl")


def f_value(loss: BregmanLoss, t: float) -> float:
    loss.check_domain(t)
    return float(loss.f(t))


# -- empirical risks ---------------------------------------------------------


def _outputs(model, x, need_grad: bool):
    if need_grad and hasattr(model, "value_and_jacobian"):
        return model.value_and_jacobian(x)
    return np.asarray(model(x), dtype=float), None


def bd_population_risk(loss: BregmanLoss, r, data, grad: bool = True) -> RiskValue:
    """Empirical Bregman risk ``mean_de ell1(r) / s + mean_nu ell2(r)``.

    ``s`` is ``loss.target_scale`` (1 except for PU log-loss).  The
    parameter gradient is assembled through ``r.value_and_jacobian`` when
    the model provides it.
    """
    r_de, j_de = _outputs(r, data.de, grad)
    r_nu, j_nu = _outputs(r, data.nu, grad)
    loss.check_domain(r_de, "de")
    loss.check_domain(r_nu, "nu")
    s = loss.target_scale
    value = float(np.mean(loss.ell1(r_de)) / s + np.mean(loss.ell2(r_nu)))
    g = None
    if j_de is not None:
        g = j_de.T @ loss.dell1(r_de) / (s * len(r_de)) + j_nu.T @ loss.dell2(r_nu) / len(r_nu)
    return RiskValue(value, g)


def riesz_tailored_ukl_risk(alpha, data, grad: bool = True) -> RiskValue:
    """Sample average of ``log(|a(D,X)| - 1) + |a(D,X)| - log(a(1,X) - 1) - log(-a(0,X) - 1)``.

    Requires ``a(1, X_i) > 1`` and ``a(0, X_i) < -1`` on every row.
    """
    grad = grad and getattr(alpha, "differentiable", False)
    a1, j1, a0, j0 = alpha.arms_and_jacobians(data.x) if grad else (
        alpha.alpha(1, data.x), None, alpha.alpha(0, data.x), None)
    d = data.d_treat
    bad = np.flatnonzero(~(a1 > 1.0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"representer magnitude <= 1: alpha(1, x[{i}]) = {a1[i]!r}", i, float(a1[i]))
    bad = np.flatnonzero(~(a0 < -1.0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"representer magnitude <= 1: alpha(0, x[{i}]) = {a0[i]!r}", i, float(a0[i]))
    a_obs = np.where(d == 1.0, a1, a0)
    m_obs = np.abs(a_obs)
    terms = np.log(m_obs - 1.0) + m_obs - np.log(a1 - 1.0) - np.log(-a0 - 1.0)
    value = float(np.mean(terms))
    g = None
    if j1 is not None:
        n = len(d)
        # treated rows: the log terms in a(1,.) cancel, leaving a1 - log(-a0 - 1)
        # control rows: a0 terms cancel, leaving -a0 - log(a1 - 1)
        w1 = np.where(d == 1.0, 1.0, -1.0 / (a1 - 1.0))
        w0 = np.where(d == 1.0, 1.0 / (-a0 - 1.0), -1.0)
        g = (j1.T @ w1 + j0.T @ w0) / n
    return RiskValue(value, g)
