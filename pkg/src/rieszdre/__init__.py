"""Density-ratio and Riesz-representer estimation under Bregman losses,
with cross-fitted debiased ATE estimation."""

from .ate import (
    AteReport,
    OutcomeSpec,
    RieszSpec,
    estimate_ate_debiased,
    estimate_ate_ipw,
    estimate_ate_plugin,
    neyman_score,
    neyman_scores,
)
from .data import (
    FoldAssignment,
    ObservationalDataset,
    TwoSampleDataset,
    make_folds,
    split_two_sample_for_ate,
    validate_observational,
)
from .dre import (
    DreFitConfig,
    TelescopeConfig,
    fit_dre,
    fit_telescoped,
    lsif_empirical_risk,
    nonneg_corrected_risk,
    truncate_nonnegative,
)
from .losses import (
    BKL,
    LSIF,
    UKL,
    BregmanLoss,
    PULogLoss,
    RieszTailoredUKL,
    RiskValue,
    bd_population_risk,
    f_value,
    parse_loss,
    riesz_tailored_ukl_risk,
)
from .models import (
    BasisExpansion,
    Kernel,
    RatioModel,
    RieszModel,
    kulsif_fit,
    loocv_score,
    ridge_outcome_fit,
)
from .optim import OptimizerSettings
from .riesz import (
    RieszFitConfig,
    alpha_from_ratios,
    fit_riesz,
    paired_lsif_risk,
    ratios_from_alpha,
    riesz_empirical_risk,
)
from .synthetic import DESIGNS, GaussianShiftDesign, SyntheticDesign, generate, generate_two_sample

__version__ = "0.1.0"
