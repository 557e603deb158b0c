"""Datasets, validation, fold assignment and CSV ingestion.

Two dataset shapes are used throughout the package:

* :class:`ObservationalDataset` holds ``n`` records ``(x, d, y)`` with a
  binary treatment ``d``.
* :class:`TwoSampleDataset` holds independent draws from a denominator
  density (``de``) and a numerator density (``nu``).

Both are frozen dataclasses whose arrays are marked read-only, so they can
be shared between threads and worker processes without copying.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadFoldCount,
    DataError,
    EmptyArm,
    NonBinaryTreatment,
    NonFiniteValue,
    SchemaMismatch,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DataError(f"expected a 2-d covariate matrix, got shape {x.shape}")
    return x


@dataclass(frozen=True, eq=False)
class ObservationalDataset:
    """Observed triples ``(X_i, D_i, Y_i)``, ``i = 1..n``."""

    x: np.ndarray
    d_treat: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _as_matrix(self.x)
        d = np.asarray(self.d_treat, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        n = x.shape[0]
        if d.shape[0] != n or y.shape[0] != n:
            raise DataError(
                f"length mismatch: x has {n} rows, d {d.shape[0]}, y {y.shape[0]}"
            )
        if n < 2:
            raise DataError(f"need at least 2 observations, got {n}")
        _check_finite(x, y, d)
        bad = np.flatnonzero((d != 0.0) & (d != 1.0))
        if bad.size:
            raise NonBinaryTreatment(int(bad[0]), d[bad[0]])
        for arm in (1, 0):
            if not np.any(d == arm):
                raise EmptyArm(arm)
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "d_treat", _frozen(d))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def treated_share(self) -> float:
        return float(self.d_treat.mean())

    def subset(self, index) -> "ObservationalDataset":
        index = np.asarray(index)
        return ObservationalDataset(self.x[index], self.d_treat[index], self.y[index])


@dataclass(frozen=True, eq=False)
class TwoSampleDataset:
    """Independent samples from ``p_de`` (rows of ``de``) and ``p_nu`` (rows of ``nu``)."""

    de: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        de = _as_matrix(self.de)
        nu = _as_matrix(self.nu)
        if de.shape[0] < 1 or nu.shape[0] < 1:
            raise DataError("both samples need at least one row")
        if de.shape[1] != nu.shape[1]:
            raise SchemaMismatch(
                f"column count mismatch: de has {de.shape[1]}, nu has {nu.shape[1]}"
            )
        for name, a in (("de", de), ("nu", nu)):
            bad = np.flatnonzero(~np.isfinite(a).all(axis=1))
            if bad.size:
                raise NonFiniteValue(int(bad[0]), name)
        object.__setattr__(self, "de", _frozen(de))
        object.__setattr__(self, "nu", _frozen(nu))

    @property
    def n_de(self) -> int:
        return self.de.shape[0]

    @property
    def n_nu(self) -> int:
        return self.nu.shape[0]

    @property
    def dim(self) -> int:
        return self.de.shape[1]

    @property
    def pooled(self) -> np.ndarray:
        """Rows of ``de`` followed by rows of ``nu``."""
        return np.vstack([self.de, self.nu])


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    fold_id: np.ndarray
    k: int

    def indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_id == fold)

    def complement(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_id != fold)

    def sizes(self) -> list[int]:
        return [int(np.sum(self.fold_id == k)) for k in range(self.k)]


def _check_finite(x: np.ndarray, y: np.ndarray, d: np.ndarray) -> None:
    rows_x = ~np.isfinite(x)
    first = None
    if rows_x.any():
        r, c = np.argwhere(rows_x)[0]
        first = (int(r), f"x{c + 1}")
    for name, v in (("d", d), ("y", y)):
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size and (first is None or bad[0] < first[0]):
            first = (int(bad[0]), name)
    if first is not None:
        raise NonFiniteValue(*first)


def validate_observational(rows: Iterable[Mapping[str, object]]) -> ObservationalDataset:
    """Build an :class:`ObservationalDataset` from parsed table rows.

    Each row maps column names to values; covariates are the columns
    ``x1..xd`` (in numeric order), the treatment is ``d`` and the outcome
    is ``y``.  Values may be strings, as produced by :mod:`csv`.
    """
    rows = list(rows)
    if not rows:
        raise DataError("no rows")
    header = list(rows[0].keys())
    xcols = _covariate_columns(header)
    for col in ("d", "y"):
        if col not in header:
            raise SchemaMismatch(f"missing column {col!r}")
    n, p = len(rows), len(xcols)
    x = np.empty((n, p))
    d = np.empty(n)
    y = np.empty(n)
    for i, row in enumerate(rows):
        try:
            x[i] = [float(row[c]) for c in xcols]
            y[i] = float(row["y"])
            d[i] = float(row["d"])
        except (TypeError, ValueError, KeyError) as exc:
            raise DataError(f"row {i}: cannot parse value ({exc})") from None
    for i in range(n):
        if not np.isfinite(x[i]).all():
            c = int(np.flatnonzero(~np.isfinite(x[i]))[0])
            raise NonFiniteValue(i, xcols[c])
        if not math.isfinite(y[i]):
            raise NonFiniteValue(i, "y")
        if not math.isfinite(d[i]):
            raise NonFiniteValue(i, "d")
        if d[i] not in (0.0, 1.0):
            raise NonBinaryTreatment(i, rows[i]["d"])
    return ObservationalDataset(x, d, y)


def _covariate_columns(header: Sequence[str]) -> list[str]:
    xcols = [c for c in header if len(c) > 1 and c[0] == "x" and c[1:].isdigit()]
    if not xcols:
        raise SchemaMismatch("no covariate columns x1..xd")
    xcols.sort(key=lambda c: int(c[1:]))
    expected = [f"x{j}" for j in range(1, len(xcols) + 1)]
    if xcols != expected:
        raise SchemaMismatch(f"covariate columns must be x1..x{len(xcols)}, got {xcols}")
    return xcols


def split_two_sample_for_ate(data: ObservationalDataset, arm: int) -> TwoSampleDataset:
    """Pair the marginal covariate sample with one arm's covariates.

    ``nu`` holds every row of ``x`` (draws from ``p_X``) and ``de`` the
    rows with ``D == arm``, so the ratio ``p_nu / p_de`` is, up to the arm
    share, ``1 / e(x)`` for ``arm = 1`` and ``1 / (1 - e(x))`` for
    ``arm = 0``.
    """
    if arm not in (0, 1):
        raise DataError(f"arm must be 0 or 1, got {arm!r}")
    mask = data.d_treat == arm
    if not mask.any():
        raise EmptyArm(arm)
    return TwoSampleDataset(de=data.x[mask], nu=data.x)


def make_folds(n: int, k: int, seed: int) -> FoldAssignment:
    """Seeded shuffle followed by round-robin assignment to ``k`` folds."""
    if not 2 <= k <= n:
        raise BadFoldCount(f"need 2 <= K <= n, got K={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    fold_id = np.empty(n, dtype=int)
    fold_id[perm] = np.arange(n) % k
    fold_id.setflags(write=False)
    return FoldAssignment(fold_id=fold_id, k=k)


# -- CSV ----------------------------------------------------------------


def read_observational_csv(path: str | Path) -> ObservationalDataset:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        return validate_observational(reader)


def write_observational_csv(data: ObservationalDataset, path: str | Path) -> None:
    header = [f"x{j + 1}" for j in range(data.dim)] + ["d", "y"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for xi, di, yi in zip(data.x, data.d_treat, data.y):
            w.writerow([repr(float(v)) for v in xi] + [int(di), repr(float(yi))])


def read_two_sample_csv(path: str | Path) -> TwoSampleDataset:
    with open(path, newline="") as fh:
        text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise DataError(f"{path}: empty file")
    if "sample" not in reader.fieldnames:
        raise SchemaMismatch("missing column 'sample'")
    xcols = _covariate_columns(reader.fieldnames)
    de, nu = [], []
    for i, row in enumerate(reader):
        try:
            vals = [float(row[c]) for c in xcols]
        except (TypeError, ValueError) as exc:
            raise DataError(f"row {i}: cannot parse value ({exc})") from None
        if not all(math.isfinite(v) for v in vals):
            raise NonFiniteValue(i, xcols[[math.isfinite(v) for v in vals].index(False)])
        label = (row["sample"] or "").strip()
        if label == "de":
            de.append(vals)
        elif label == "nu":
            nu.append(vals)
        else:
            raise DataError(f"row {i}: sample label {label!r} is not 'de' or 'nu'")
    if not de or not nu:
        raise DataError("two-sample file needs at least one 'de' and one 'nu' row")
    return TwoSampleDataset(de=np.array(de), nu=np.array(nu))


def write_two_sample_csv(data: TwoSampleDataset, path: str | Path) -> None:
    header = [f"x{j + 1}" for j in range(data.dim)] + ["sample"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for label, block in (("de", data.de), ("nu", data.nu)):
            for row in block:
                w.writerow([repr(float(v)) for v in row] + [label])
