"""Synthetic designs with closed-form ground truth.

Observational design::

    X ~ N(0, I_d)
    e0(x) = clip(sigmoid(beta @ x + b), eps, 1 - eps)
    D | X ~ Bernoulli(e0(X))
    Y = mu0(D, X) + noise_sd * N(0, 1),  mu0(d, x) = gamma0 @ x + d (tau_base + gamma1 @ x)

Because ``E[X] = 0`` the true ATE is ``tau_base``.  The oracle exposes
``e0``, the ratios ``1/e0`` and ``1/(1 - e0)``, the representer and
``mu0``.

Two-sample design: ``de ~ N(0, sd^2 I)``, ``nu ~ N(shift, sd^2 I)`` with
``r0(x) = exp((shift @ x - |shift|^2 / 2) / sd^2)``.

Random streams come from NumPy's ``default_rng`` (PCG64) seeded with the
integer seed; tests rely only on distributional properties.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.special import expit

from .data import ObservationalDataset, TwoSampleDataset
from .errors import DataError, DegenerateDesign, ResampledDesignWarning, UsageError
from .models import BasisExpansion, RatioModel, as_rows


@dataclass(frozen=True)
class SyntheticDesign:
    name: str = "custom"
    d: int = 2
    beta: tuple[float, ...] = (0.0, 0.0)
    b: float = 0.0
    eps: float = 0.02
    gamma0: tuple[float, ...] = (0.0, 0.0)
    gamma1: tuple[float, ...] = (0.0, 0.0)
    tau_base: float = 1.0
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.eps < 0.5:
            raise DegenerateDesign(f"overlap eps must lie in (0, 0.5), got {self.eps!r}")
        for name in ("beta", "gamma0", "gamma1"):
            v = tuple(float(t) for t in getattr(self, name))
            if len(v) != self.d:
                raise DegenerateDesign(f"{name} has length {len(v)}, expected d={self.d}")
            object.__setattr__(self, name, v)
        if self.noise_sd < 0:
            raise DegenerateDesign("noise_sd must be non-negative")

    @property
    def tau0(self) -> float:
        return float(self.tau_base)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticDesign":
        return cls(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items()})


DESIGNS: dict[str, SyntheticDesign] = {
    "default-confounded": SyntheticDesign(
        name="default-confounded",
        d=2,
        beta=(0.8, -0.5),
        b=0.2,
        eps=0.02,
        gamma0=(1.0, 0.5),
        gamma1=(0.5, 0.0),
        tau_base=1.0,
        noise_sd=1.0,
    ),
    "randomized": SyntheticDesign(
        name="randomized",
        d=2,
        beta=(0.0, 0.0),
        b=0.0,
        eps=0.02,
        gamma0=(1.0, 0.5),
        gamma1=(0.5, 0.0),
        tau_base=1.0,
        noise_sd=1.0,
    ),
    "strong-confounding": SyntheticDesign(
        name="strong-confounding",
        d=3,
        beta=(1.2, -0.8, 0.4),
        b=-0.3,
        eps=0.02,
        gamma0=(1.5, -1.0, 0.5),
        gamma1=(0.5, 0.25, 0.0),
        tau_base=1.0,
        noise_sd=1.0,
    ),
}


def get_design(name: str) -> SyntheticDesign:
    try:
        return DESIGNS[name]
    except KeyError:
        raise UsageError(f"unknown design {name!r}; choose from {sorted(DESIGNS)}") from None


@dataclass(frozen=True)
class Oracle:
    """Closed-form nuisances of a :class:`SyntheticDesign`."""

    design: SyntheticDesign

    def _lin(self, x) -> np.ndarray:
        return as_rows(x) @ np.asarray(self.design.beta) + self.design.b

    def e0(self, x) -> np.ndarray:
        eps = self.design.eps
        return np.clip(expit(self._lin(x)), eps, 1.0 - eps)

    def r1(self, x) -> np.ndarray:
        """``p_X(x) / p_{D,X}(1, x) = 1 / e0(x)``."""
        return 1.0 / self.e0(x)

    def r0(self, x) -> np.ndarray:
        return 1.0 / (1.0 - self.e0(x))

    def alpha(self, d, x) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        return d * self.r1(x) - (1.0 - d) * self.r0(x)

    def mu(self, d, x) -> np.ndarray:
        x = as_rows(x)
        d = np.asarray(d, dtype=float)
        g0 = np.asarray(self.design.gamma0)
        g1 = np.asarray(self.design.gamma1)
        return x @ g0 + d * (self.design.tau_base + x @ g1)

    @property
    def tau0(self) -> float:
        return self.design.tau0

    def to_dict(self) -> dict:
        d = self.design
        return {
            "kind": "observational",
            "design": d.to_dict(),
            "beta": list(d.beta),
            "b": d.b,
            "gamma0": list(d.gamma0),
            "gamma1": list(d.gamma1),
            "tau0": d.tau0,
            "eps": d.eps,
        }


def generate(design: SyntheticDesign, n: int, seed: int | None = None) -> tuple[ObservationalDataset, Oracle]:
    """Draw ``n`` observations; deterministic in ``seed`` (default ``design.seed``).

    If an arm comes out empty the draw is repeated with the seed
    incremented, with a :class:`ResampledDesignWarning`.
    """
    if n < 2:
        raise DataError(f"need n >= 2, got {n}")
    seed = design.seed if seed is None else seed
    oracle = Oracle(design)
    for attempt in range(100):
        rng = np.random.default_rng(seed + attempt)
        x = rng.standard_normal((n, design.d))
        e = oracle.e0(x)
        d = (rng.uniform(size=n) < e).astype(float)
        if 0 < d.sum() < n:
            if attempt:
                warnings.warn(
                    f"draw with seed {seed} had an empty arm; used seed {seed + attempt}",
                    ResampledDesignWarning,
                    stacklevel=2,
                )
            y = oracle.mu(d, x) + design.noise_sd * rng.standard_normal(n)
            return ObservationalDataset(x, d, y), oracle
    raise DegenerateDesign("could not draw a sample with both arms present")


@dataclass(frozen=True)
class GaussianShiftDesign:
    mu_shift: tuple[float, ...] = (0.5,)
    sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mu_shift", tuple(float(t) for t in np.atleast_1d(self.mu_shift)))
        if not self.sd > 0:
            raise DegenerateDesign(f"sd must be positive, got {self.sd!r}")

    @property
    def d(self) -> int:
        return len(self.mu_shift)


@dataclass(frozen=True)
class GaussianShiftOracle:
    design: GaussianShiftDesign

    def log_r0(self, x) -> np.ndarray:
        mu = np.asarray(self.design.mu_shift)
        return (as_rows(x) @ mu - 0.5 * mu @ mu) / self.design.sd**2

    def r0(self, x) -> np.ndarray:
        return np.exp(self.log_r0(x))

    __call__ = r0

    def log(self, x) -> np.ndarray:
        return self.log_r0(x)

    @property
    def kl(self) -> float:
        """``KL(p_nu || p_de)``."""
        mu = np.asarray(self.design.mu_shift)
        return float(mu @ mu / (2.0 * self.design.sd**2))

    def l2_sq_of_constant(self, c: float = 1.0) -> float:
        """``E_de[(r0 - c)^2] = exp(|mu|^2 / sd^2) - 2c + c^2``."""
        mu = np.asarray(self.design.mu_shift)
        return float(math.exp(mu @ mu / self.design.sd**2) - 2.0 * c + c * c)

    def as_ratio_model(self) -> RatioModel:
        """The exact ratio as an exp-link linear model (serialisable)."""
        mu = np.asarray(self.design.mu_shift)
        var = self.design.sd**2
        theta = np.concatenate([[-0.5 * mu @ mu / var], mu / var])
        return RatioModel(BasisExpansion.poly(1), theta, "exp")

    def to_dict(self) -> dict:
        return {"kind": "gaussian_shift", "mu_shift": list(self.design.mu_shift), "sd": self.design.sd}


def generate_two_sample(
    design: GaussianShiftDesign, n_de: int, n_nu: int, seed: int = 0
) -> tuple[TwoSampleDataset, GaussianShiftOracle]:
    if n_de < 1 or n_nu < 1:
        raise DataError("n_de and n_nu must be >= 1")
    rng = np.random.default_rng(seed)
    de = design.sd * rng.standard_normal((n_de, design.d))
    nu = np.asarray(design.mu_shift) + design.sd * rng.standard_normal((n_nu, design.d))
    return TwoSampleDataset(de=de, nu=nu), GaussianShiftOracle(design)


def oracle_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "gaussian_shift":
        return GaussianShiftOracle(GaussianShiftDesign(tuple(d["mu_shift"]), float(d.get("sd", 1.0))))
    if kind == "observational":
        return Oracle(SyntheticDesign.from_dict(d["design"]))
    raise DataError(f"unknown oracle kind {kind!r}")
