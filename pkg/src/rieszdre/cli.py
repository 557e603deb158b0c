"""Command-line interface.

Subcommands::

    rieszdre synth gen         draw a synthetic dataset (and its oracle)
    rieszdre dre fit           fit a density ratio on a two-sample CSV
    rieszdre dre eval          score a fitted ratio (LSIF risk, L2 error)
    rieszdre riesz fit         fit the ATE representer
    rieszdre ate estimate      cross-fitted ATE report
    rieszdre equivalence-check compare the Riesz and paired-LSIF objectives
    rieszdre simulate          replicated ATE study or DRE rate sweep

Every subcommand accepts ``--seed``, ``--config``, ``--out`` and
``--quiet``.  A config file holds ``key = value`` lines whose keys are flag
names; flags given on the command line win.  JSON outputs embed the
resolved configuration under ``"config"``; CSV outputs get a sidecar
``<out>.config.json``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .ate import OutcomeSpec, RieszSpec, estimate_ate_debiased, estimate_ate_ipw, estimate_ate_plugin
from .data import read_observational_csv, read_two_sample_csv, write_observational_csv, write_two_sample_csv
from .dre import (
    CENTER_SOURCES,
    DEFAULT_LINKS,
    DreFitConfig,
    TelescopeConfig,
    build_ratio_model,
    fit_dre,
    fit_telescoped,
    l2_error,
    lsif_empirical_risk,
)
from .errors import DataError, NumericalError, SchemaMismatch, UsageError
from .experiments import ESTIMATORS, AteStudySettings, DreRateSettings, ate_replication, dre_rate_replication
from .losses import parse_loss
from .models import (
    DEFAULT_LAMBDA_GRID,
    Kernel,
    kulsif_fit,
    median_bandwidth,
    model_from_dict,
    model_to_dict,
    parse_model_spec,
    select_lambda_loocv,
)
from .optim import OptimizerSettings
from .riesz import RieszFitConfig, alpha_from_ratios, build_riesz_model, fit_riesz, paired_lsif_risk, riesz_empirical_risk
from .synthetic import DESIGNS, GaussianShiftDesign, generate, generate_two_sample, get_design, oracle_from_dict

log = logging.getLogger("rieszdre")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
EQUIVALENCE_TOL = 1e-12

_GLOBAL_KEYS = ("seed", "config", "out", "quiet")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _objective_token(s: str) -> str:
    return s.replace("-", "_")


def _int_list(s: str) -> list[int]:
    try:
        return [int(t) for t in s.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {s!r}") from None


def _float_list(s: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in s.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {s!r}") from None


def _jsonable(v: Any):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, Path):
        return str(v)
    return v


def _resolved_config(args: argparse.Namespace) -> dict:
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("func", "config_file_values")}


def _emit_json(payload: dict, args: argparse.Namespace) -> None:
    payload = dict(payload)
    payload["config"] = _resolved_config(args)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)


def _write_config_sidecar(path: str, args: argparse.Namespace) -> None:
    Path(f"{path}.config.json").write_text(json.dumps(_resolved_config(args), indent=2, sort_keys=True) + "\n")


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _optimizer(args) -> OptimizerSettings:
    return OptimizerSettings(max_iters=args.max_iters, grad_tol=args.grad_tol)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_synth_gen(args) -> int:
    if not args.out:
        raise UsageError("synth gen needs --out")
    if args.design == "gaussian-shift":
        design = GaussianShiftDesign(_float_list(args.shift), args.sd)
        n_nu = args.n_nu if args.n_nu is not None else args.n
        data, oracle = generate_two_sample(design, args.n, n_nu, seed=args.seed)
        write_two_sample_csv(data, args.out)
        if args.emit_truth_model:
            payload = {"model": model_to_dict(oracle.as_ratio_model()), "config": _resolved_config(args)}
            Path(args.emit_truth_model).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    else:
        data, oracle = generate(get_design(args.design), args.n, seed=args.seed)
        write_observational_csv(data, args.out)
    if args.emit_oracle:
        payload = dict(oracle.to_dict(), config=_resolved_config(args))
        Path(args.emit_oracle).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    _write_config_sidecar(args.out, args)
    log.info("wrote %s", args.out)
    return EXIT_OK


def cmd_dre_fit(args) -> int:
    data = read_two_sample_csv(args.data)
    spec = parse_model_spec(args.model)
    loss = parse_loss(args.loss)
    if loss.token == "riesz-ukl":
        raise UsageError("riesz-ukl is a representer loss; use riesz fit --objective riesz-ukl")
    info: dict[str, Any] = {"n_de": data.n_de, "n_nu": data.n_nu}
    if spec.family == "kulsif":
        if loss.token != "lsif":
            raise UsageError("kulsif models are fitted in closed form under the lsif loss only")
        kernel = Kernel(spec.sigma if spec.sigma is not None else median_bandwidth(data.pooled))
        lam = spec.lam
        if lam is None:
            lam, scores = select_lambda_loocv(data, kernel, DEFAULT_LAMBDA_GRID)
            info["loocv_scores"] = {str(k): v for k, v in scores.items()}
        model = kulsif_fit(data, kernel, lam)
        info.update(sigma=kernel.sigma, kulsif_lambda=lam)
    else:
        link = args.link or DEFAULT_LINKS.get(loss.token.split(":")[0], "exp")
        model0 = build_ratio_model(spec, data, link, seed=args.seed, centers_from=args.centers_from)
        cfg = DreFitConfig(
            loss=loss,
            reg_lambda=args.reg_lambda,
            reg_kind=args.reg_kind,
            optimizer=_optimizer(args),
            nonneg_c=args.nonneg_c,
            nonneg_add_back=args.nonneg_add_back,
            seed=args.seed,
        )
        if args.telescope_m > 1:
            tel = fit_telescoped(data, model0, TelescopeConfig(m=args.telescope_m, stage=cfg, seed=args.seed))
            model = tel.model
            info["stages"] = [
                {"objective": f.result.value, "converged": f.converged, "n_iter": f.result.n_iter} for f in tel.stages
            ]
        else:
            fit = fit_dre(data, model0, cfg)
            model = fit.ratio
            info.update(objective=fit.result.value, converged=fit.converged, n_iter=fit.result.n_iter)
    info["lsif_risk"] = lsif_empirical_risk(model, data, grad=False).value
    _emit_json({"model": model_to_dict(model), "train": info}, args)
    return EXIT_OK


def cmd_dre_eval(args) -> int:
    payload = _read_json(args.model)
    model = model_from_dict(payload.get("model", payload))
    data = read_two_sample_csv(args.data)
    try:
        risk = lsif_empirical_risk(model, data, grad=False).value
    except ValueError as exc:
        raise SchemaMismatch(f"model and data are incompatible: {exc}") from None
    metrics: dict[str, Any] = {"lsif_risk": risk, "n_de": data.n_de, "n_nu": data.n_nu}
    if args.oracle:
        oracle = oracle_from_dict(_read_json(args.oracle))
        if not hasattr(oracle, "r0") or getattr(oracle, "log_r0", None) is None:
            raise DataError("dre eval needs a two-sample (gaussian_shift) oracle")
        if oracle.design.d != data.dim:
            raise SchemaMismatch(f"oracle dimension {oracle.design.d} does not match data dimension {data.dim}")
        mse, se = l2_error(model, oracle.r0, data.de)
        metrics.update(l2_error=mse, l2_error_se=se)
    _emit_json({"metrics": metrics}, args)
    return EXIT_OK


def cmd_riesz_fit(args) -> int:
    data = read_observational_csv(args.data)
    objective = _objective_token(args.objective)
    spec = parse_model_spec(args.model)
    if spec.family == "kulsif":
        raise UsageError("riesz fit takes linear:* model specs")
    model0 = build_riesz_model(spec, data, objective, args.shared_basis, args.link, args.seed)
    cfg = RieszFitConfig(
        objective=objective,
        model=model0,
        reg_lambda=args.reg_lambda,
        reg_kind=args.reg_kind,
        optimizer=_optimizer(args),
        seed=args.seed,
    )
    fit = fit_riesz(data, cfg)
    a = fit.model.alpha(data.d_treat, data.x)
    info = {
        "objective": fit.result.value,
        "converged": fit.result.converged,
        "n_iter": fit.result.n_iter,
        "riesz_risk": riesz_empirical_risk(fit.model, data, grad=False).value,
        "alpha_min": float(a.min()),
        "alpha_max": float(a.max()),
    }
    _emit_json({"model": model_to_dict(fit.model), "train": info}, args)
    return EXIT_OK


def _outcome_spec(args) -> OutcomeSpec:
    cols = tuple(_int_list(args.outcome_columns)) if args.outcome_columns else None
    return OutcomeSpec(args.outcome_model, args.outcome_lambda, cols, args.seed)


def _riesz_spec(args) -> RieszSpec:
    return RieszSpec(
        objective=_objective_token(args.riesz_objective),
        model=args.riesz_model,
        link=args.riesz_link,
        shared_basis=not args.separate_heads,
        reg_lambda=args.riesz_lambda,
        seed=args.seed,
    )


def cmd_ate_estimate(args) -> int:
    data = read_observational_csv(args.data)
    if args.estimator == "debiased":
        report = estimate_ate_debiased(data, args.folds, args.seed, _outcome_spec(args), _riesz_spec(args), args.eps_min)
    elif args.estimator == "plugin":
        report = estimate_ate_plugin(data, args.folds, args.seed, _outcome_spec(args))
    else:
        report = estimate_ate_ipw(data, args.folds, args.seed, _riesz_spec(args), args.eps_min)
    _emit_json(report.to_dict(), args)
    return EXIT_OK


def cmd_equivalence_check(args) -> int:
    if args.trials < 1:
        raise UsageError(f"trials must be >= 1, got {args.trials}")
    if args.data:
        data = read_observational_csv(args.data)
    else:
        data, _ = generate(get_design(args.synthetic), args.n, seed=args.seed)
    spec = parse_model_spec(args.model)
    if spec.family == "kulsif":
        raise UsageError("equivalence-check takes linear:* model specs")
    alpha0 = build_riesz_model(spec, data, "paired_lsif", shared_basis=True, link="identity", seed=args.seed)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        alpha = alpha0.with_params(rng.standard_normal(alpha0.n_params))
        r1, r0 = alpha.r1, alpha.r0
        a = riesz_empirical_risk(alpha_from_ratios(r1, r0), data, grad=False).value
        b = paired_lsif_risk(r1, r0, data, grad=False).value
        denom = max(abs(a), abs(b), np.finfo(float).tiny)
        worst = max(worst, abs(a - b) / denom)
    passed = worst <= EQUIVALENCE_TOL
    _emit_json(
        {"trials": args.trials, "n": data.n, "max_relative_discrepancy": worst, "tolerance": EQUIVALENCE_TOL, "pass": passed},
        args,
    )
    return EXIT_OK if passed else EXIT_NUMERICAL


def _run_pool(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def cmd_simulate(args) -> int:
    if args.reps < 1:
        raise UsageError(f"reps must be >= 1, got {args.reps}")
    ns = _int_list(args.n)
    if not ns:
        raise UsageError("--n needs at least one sample size")
    tasks = [(n, rep) for n in ns for rep in range(args.reps)]
    if args.study == "ate":
        estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
        bad = set(estimators) - set(ESTIMATORS)
        if bad or not estimators:
            raise UsageError(f"estimators must be drawn from {ESTIMATORS}, got {args.estimators!r}")
        design = get_design(args.design)
        settings = AteStudySettings(
            folds=args.folds,
            outcome_model=args.outcome_model,
            outcome_lambda=args.outcome_lambda,
            outcome_columns=tuple(_int_list(args.outcome_columns)) if args.outcome_columns else None,
            riesz_objective=_objective_token(args.riesz_objective),
            riesz_model=args.riesz_model,
            riesz_link=args.riesz_link,
            riesz_lambda=args.riesz_lambda,
        )
        fn = partial(_ate_task, design, args.seed, tuple(estimators), settings)
        rows = [r for block in _run_pool(fn, tasks, args.workers) for r in block]
        fields = ["design", "n", "rep", "estimator", "tau_hat", "se", "covered", "runtime_ms"]
    else:
        fn = partial(_dre_task, args.seed, DreRateSettings(shift=args.shift))
        rows = _run_pool(fn, tasks, args.workers)
        fields = ["design", "n", "rep", "estimator", "l2_error", "se", "runtime_ms"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    if args.out:
        Path(args.out).write_text(buf.getvalue())
        _write_config_sidecar(args.out, args)
        log.info("wrote %d rows to %s", len(rows), args.out)
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _ate_task(design, seed, estimators, settings, n, rep):
    return ate_replication(design, n, rep, seed, estimators, settings)


def _dre_task(seed, settings, n, rep):
    return dre_rate_replication(n, rep, seed, settings)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--config", default=None, help="key = value file; command-line flags take precedence")
    p.add_argument("--out", default=None, help="output path (stdout when omitted, where allowed)")
    p.add_argument("--quiet", action="store_true", help="suppress log messages")
    return p


def _optim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--grad-tol", type=float, default=1e-8)


def _ate_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--outcome-model", default="linear:poly:1")
    p.add_argument("--outcome-lambda", type=float, default=1e-6)
    p.add_argument("--outcome-columns", default=None, help="comma-separated 0-based covariate indices")
    p.add_argument("--riesz-objective", default="riesz-lsq", choices=["riesz-lsq", "paired-lsif", "riesz-ukl"])
    p.add_argument("--riesz-model", default="linear:poly:1")
    p.add_argument("--riesz-link", default=None)
    p.add_argument("--riesz-lambda", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    g = _global_flags()
    parser = _Parser(prog="rieszdre", description="Density-ratio, Riesz-representer and ATE estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    synth = sub.add_parser("synth", help="synthetic data").add_subparsers(dest="action", parser_class=_Parser)
    synth.required = True
    p = synth.add_parser("gen", parents=[g], help="draw a synthetic dataset")
    p.add_argument("--design", default="default-confounded", choices=sorted(DESIGNS) + ["gaussian-shift"])
    p.add_argument("--n", type=int, default=2000, help="rows (de rows for gaussian-shift)")
    p.add_argument("--n-nu", type=int, default=None, help="nu rows for gaussian-shift (default --n)")
    p.add_argument("--shift", default="0.5", help="comma-separated mean shift for gaussian-shift")
    p.add_argument("--sd", type=float, default=1.0)
    p.add_argument("--emit-oracle", default=None)
    p.add_argument("--emit-truth-model", default=None, help="gaussian-shift only: exact ratio as model JSON")
    p.set_defaults(func=cmd_synth_gen)

    dre = sub.add_parser("dre", help="density-ratio estimation").add_subparsers(dest="action", parser_class=_Parser)
    dre.required = True
    p = dre.add_parser("fit", parents=[g], help="fit a density ratio")
    p.add_argument("--data", required=True, help="two-sample CSV (columns x1..xd, sample)")
    p.add_argument("--loss", default="lsif", help="lsif | ukl | bkl | pu:<C>")
    p.add_argument("--model", default="linear:poly:1")
    p.add_argument("--link", default=None, help="identity | exp | sigmoid | softplus1 | exp1")
    p.add_argument("--lambda", dest="reg_lambda", type=float, default=0.0)
    p.add_argument("--reg-kind", default="l2_coefficients", choices=["l2_coefficients", "rkhs_norm"])
    p.add_argument("--nonneg-c", type=float, default=None)
    p.add_argument("--nonneg-add-back", action="store_true")
    p.add_argument("--telescope-m", type=int, default=1)
    p.add_argument("--centers-from", default="nu", choices=list(CENTER_SOURCES))
    _optim_flags(p)
    p.set_defaults(func=cmd_dre_fit)
    p = dre.add_parser("eval", parents=[g], help="evaluate a fitted ratio")
    p.add_argument("--model", required=True, help="model JSON from dre fit")
    p.add_argument("--data", required=True, help="two-sample CSV")
    p.add_argument("--oracle", default=None, help="oracle JSON from synth gen")
    p.set_defaults(func=cmd_dre_eval)

    riesz = sub.add_parser("riesz", help="Riesz representer").add_subparsers(dest="action", parser_class=_Parser)
    riesz.required = True
    p = riesz.add_parser("fit", parents=[g], help="fit the ATE representer")
    p.add_argument("--data", required=True)
    p.add_argument("--objective", default="riesz-lsq", choices=["riesz-lsq", "paired-lsif", "riesz-ukl"])
    p.add_argument("--shared-basis", action="store_true")
    p.add_argument("--model", default="linear:poly:1")
    p.add_argument("--link", default=None)
    p.add_argument("--lambda", dest="reg_lambda", type=float, default=0.0)
    p.add_argument("--reg-kind", default="l2_coefficients", choices=["l2_coefficients", "rkhs_norm"])
    _optim_flags(p)
    p.set_defaults(func=cmd_riesz_fit)

    ate = sub.add_parser("ate", help="average treatment effect").add_subparsers(dest="action", parser_class=_Parser)
    ate.required = True
    p = ate.add_parser("estimate", parents=[g], help="cross-fitted ATE")
    p.add_argument("--data", required=True)
    p.add_argument("--estimator", default="debiased", choices=["debiased", "plugin", "ipw"])
    p.add_argument("--separate-heads", action="store_true", help="give r1 and r0 their own feature maps")
    p.add_argument("--eps-min", type=float, default=0.01)
    _ate_flags(p)
    p.set_defaults(func=cmd_ate_estimate)

    p = sub.add_parser("equivalence-check", parents=[g], help="Riesz vs paired-LSIF objectives")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", default=None)
    src.add_argument("--synthetic", default="default-confounded", choices=sorted(DESIGNS))
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--model", default="linear:poly:1")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_equivalence_check)

    p = sub.add_parser("simulate", parents=[g], help="replicated simulation study (CSV)")
    p.add_argument("--study", default="ate", choices=["ate", "dre-rate"])
    p.add_argument("--design", default="default-confounded", choices=sorted(DESIGNS))
    p.add_argument("--n", default="2000", help="comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--estimators", default="debiased,plugin")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--shift", type=float, default=0.5, help="dre-rate: mean shift")
    _ate_flags(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def _leaf_parser(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.ArgumentParser:
    """Walk the subparser tree along ``argv`` to the parser that owns the flags."""
    node = parser
    for tok in argv:
        actions = [a for a in node._actions if isinstance(a, argparse._SubParsersAction)]
        if not actions:
            break
        if tok in actions[0].choices:
            node = actions[0].choices[tok]
    return node


def _read_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text if text.lstrip().startswith("[") else "[run]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}") from None
    out: dict[str, str] = {}
    for section in cp.sections():
        out.update(cp[section])
    return out


def _apply_config(leaf: argparse.ArgumentParser, values: dict[str, str]) -> None:
    by_key = {}
    for action in leaf._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                by_key[opt[2:]] = action
                by_key[opt[2:].replace("-", "_")] = action
    defaults = {}
    for key, raw in values.items():
        action = by_key.get(key) or by_key.get(key.replace("_", "-"))
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no", "on", "off"):
                raise UsageError(f"config key {key!r} expects a boolean, got {raw!r}")
            defaults[action.dest] = low in ("true", "1", "yes", "on")
        else:
            try:
                defaults[action.dest] = action.type(raw) if action.type else raw
            except (TypeError, ValueError):
                raise UsageError(f"config key {key!r}: bad value {raw!r}") from None
            if action.choices is not None and defaults[action.dest] not in action.choices:
                raise UsageError(f"config key {key!r}: {raw!r} is not one of {list(action.choices)}")
        if action.required:
            action.required = False
    leaf.set_defaults(**defaults)


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    argv = list(argv)
    config_path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
    if config_path:
        _apply_config(_leaf_parser(parser, argv), _read_config(config_path))
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
        log.info("config %s", json.dumps(_resolved_config(args), sort_keys=True))
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
