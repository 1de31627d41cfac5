"""Regression fitting, metrics, cross-validation, and the fallout experiment.

The experiment at the end is the point of the package: fit the same
outcome on several feature sets ("arms"), read each arm's effect estimate
for an exposure off the fitted model, and compare against the structural
model's analytic ground truth.  An arm can score excellent cross-validated
accuracy while its effect estimate carries the wrong sign; the audit
verdict attached to each arm says which arms to trust, and why accuracy
alone cannot.
"""

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .adjustment import CausalQuery, audit_feature_set
from .data import Dataset
from .errors import (
    ExtrapolationWarning,
    FeatureIsExposureOrOutcome,
    InsufficientRows,
    MissingFeature,
    ScmFormat,
    TooFewRows,
    UnknownColumn,
    UnknownVariable,
    ZeroMeanTarget,
    ZeroPair,
)
from .io import FORMAT_VERSION
from .scm import ScmSpec, population_means, sample, scm_graph, true_ace

OLS_RIDGE = 1e-8  # diagonal tie-break for collinear feature sets


@dataclass(frozen=True)
class LinearModel:
    """An affine predictor: ``intercept + coefficients . features``.

    ``feature_ranges`` holds the per-feature (min, max) seen during
    fitting; single-row prediction warns when asked to extrapolate
    beyond it.
    """

    feature_names: tuple
    coefficients: tuple
    intercept: float
    feature_ranges: Optional[tuple] = None

    def predict_row(self, row: Mapping) -> float:
        total = self.intercept
        outside = []
        ranges = self.feature_ranges or (None,) * len(self.feature_names)
        for name, coef, bounds in zip(self.feature_names, self.coefficients, ranges):
            if name not in row:
                raise MissingFeature(f"row is missing feature {name!r}")
            value = float(row[name])
            if bounds is not None and not bounds[0] <= value <= bounds[1]:
                outside.append(name)
            total += coef * value
        if outside:
            warnings.warn(
                f"scenario row extrapolates beyond the fitted range of {outside}",
                ExtrapolationWarning,
                stacklevel=2,
            )
        return total

    def predict(self, d: Dataset) -> np.ndarray:
        x = d.matrix(self.feature_names)
        return x @ np.asarray(self.coefficients) + self.intercept

    def coefficient(self, name) -> float:
        if name not in self.feature_names:
            raise MissingFeature(f"model has no feature {name!r}")
        return self.coefficients[self.feature_names.index(name)]


@dataclass(frozen=True)
class Metrics:
    r2: float
    nrmse: float
    smape: float

    def to_dict(self):
        return {"r2": self.r2, "nrmse": self.nrmse, "smape": self.smape}


@dataclass(frozen=True)
class CvReport:
    k: int
    per_fold: tuple
    mean: Metrics

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "k": self.k,
            "per_fold": [m.to_dict() for m in self.per_fold],
            "mean": self.mean.to_dict(),
        }


def ols_fit(d: Dataset, features: Sequence, target: str) -> LinearModel:
    """Least squares of ``target`` on ``features`` plus an intercept.

    Solved via the normal equations with a 1e-8 ridge on the diagonal as
    a tie-break for collinear features, followed by one step of iterative
    refinement so well-conditioned problems are solved to full precision.

    Raises
    ------
    InsufficientRows
        If the row count is not greater than ``len(features) + 1``.
    UnknownColumn
    """
    features = list(features)
    if target in features:
        raise ValueError("target cannot be one of the features")
    if d.n_rows <= len(features) + 1:
        raise InsufficientRows(
            f"{d.n_rows} rows cannot support {len(features)} features plus intercept"
        )
    x = d.matrix(features)
    y = d.column(target)
    a = np.column_stack([x, np.ones(d.n_rows)])
    gram = a.T @ a + OLS_RIDGE * np.eye(a.shape[1])
    rhs = a.T @ y
    beta = np.linalg.solve(gram, rhs)
    beta = beta + np.linalg.solve(gram, rhs - (a.T @ a) @ beta)
    ranges = tuple(
        (float(x[:, j].min()), float(x[:, j].max())) for j in range(len(features))
    )
    return LinearModel(
        tuple(features), tuple(float(b) for b in beta[:-1]), float(beta[-1]), ranges
    )


def metrics(y: Iterable, yhat: Iterable, nrmse_norm: str = "mean") -> Metrics:
    """Coefficient of determination, NRMSE, and SMAPE of predictions.

    ``nrmse`` is the root-mean-square error divided by the mean of ``y``
    (or by ``max(y) - min(y)`` with ``nrmse_norm="range"``); ``smape`` is
    ``mean(2|yhat - y| / (|y| + |yhat|))`` reported as a fraction in [0, 2].

    Raises
    ------
    ZeroMeanTarget
        If ``mean(y) == 0`` (NRMSE undefined under mean normalization).
    ZeroPair
        If some pair has ``|y| + |yhat| == 0`` (SMAPE undefined).
    """
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1 or len(y) < 2:
        raise ValueError("metrics need two equal-length vectors of length >= 2")
    if nrmse_norm == "mean":
        scale = float(y.mean())
        if scale == 0.0:
            raise ZeroMeanTarget("NRMSE is undefined for a zero-mean target")
    elif nrmse_norm == "range":
        scale = float(y.max() - y.min())
        if scale == 0.0:
            raise ValueError("NRMSE range normalization is undefined for a constant target")
    else:
        raise ValueError(f"unknown nrmse_norm {nrmse_norm!r}")
    denom = np.abs(y) + np.abs(yhat)
    if np.any(denom == 0.0):
        raise ZeroPair("SMAPE is undefined when some |y| + |yhat| is zero")
    residual = y - yhat
    ss_res = float(residual @ residual)
    centered = y - float(y.mean())
    ss_tot = float(centered @ centered)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else -np.inf)
    nrmse = float(np.sqrt(ss_res / len(y))) / scale
    smape = float(np.mean(2.0 * np.abs(residual) / denom))
    return Metrics(r2=r2, nrmse=nrmse, smape=smape)


def kfold_cv(d: Dataset, features: Sequence, target: str, k: int = 5, seed: int = 0) -> CvReport:
    """K-fold cross-validation with a seeded shuffle and contiguous folds.

    Raises
    ------
    TooFewRows
        If the dataset has fewer than ``2 * k`` rows.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if d.n_rows < 2 * k:
        raise TooFewRows(f"{d.n_rows} rows are too few for {k} folds")
    order = np.random.default_rng(seed).permutation(d.n_rows)
    base, extra = divmod(d.n_rows, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(order[start : start + size])
        start += size
    per_fold = []
    for i in range(k):
        held = folds[i]
        train = np.concatenate([folds[j] for j in range(k) if j != i])
        model = ols_fit(d.take(train), features, target)
        test = d.take(held)
        per_fold.append(metrics(test.column(target), model.predict(test)))
    mean = Metrics(
        r2=float(np.mean([m.r2 for m in per_fold])),
        nrmse=float(np.mean([m.nrmse for m in per_fold])),
        smape=float(np.mean([m.smape for m in per_fold])),
    )
    return CvReport(k=k, per_fold=tuple(per_fold), mean=mean)


def scenario_effect(
    m: LinearModel, base_row: Mapping, exposure: str, t0: float, t1: float
) -> float:
    """Predicted outcome change when ``exposure`` moves from t0 to t1.

    Every other included feature is held at its ``base_row`` value, which
    is exactly the scenario-prediction protocol: vary the design variable,
    freeze the rest of the model's inputs.
    """
    if exposure not in m.feature_names:
        raise MissingFeature(f"model has no feature {exposure!r}")
    high = dict(base_row)
    low = dict(base_row)
    high[exposure] = t1
    low[exposure] = t0
    return m.predict_row(high) - m.predict_row(low)


@dataclass(frozen=True)
class ArmResult:
    name: str
    features: tuple
    estimated_effect: float
    cv_r2: float
    audit_verdict: str
    sign_agreement: bool


@dataclass(frozen=True)
class FalloutReport:
    """Per-arm effect estimates and accuracy against analytic ground truth."""

    arms: tuple
    true_ace: float
    exposure: str
    t0: float
    t1: float

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "arms": [
                {
                    "name": a.name,
                    "features": list(a.features),
                    "estimated_effect": a.estimated_effect,
                    "cv_r2": a.cv_r2,
                    "audit_verdict": a.audit_verdict,
                    "sign_agreement": a.sign_agreement,
                }
                for a in self.arms
            ],
            "true_ace": self.true_ace,
        }


def render_fallout_table(report: FalloutReport) -> str:
    """Plain-text table of the fallout report, one row per arm."""
    headers = ("arm", "estimated_effect", "cv_r2", "audit", "sign_ok")
    rows = [
        (
            a.name,
            f"{a.estimated_effect:+.4f}",
            f"{a.cv_r2:.4f}",
            a.audit_verdict,
            "yes" if a.sign_agreement else "NO",
        )
        for a in report.arms
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    lines.append(f"true_ace({report.exposure}: {report.t0} -> {report.t1}) = {report.true_ace:+.4f}")
    return "\n".join(lines)


def fallout_experiment(
    spec: ScmSpec,
    q: CausalQuery,
    arms: Sequence,
    n: int,
    seed: int,
    exposure: Optional[str] = None,
    t0: float = 0.0,
    t1: float = 1.0,
    base_row: Optional[Mapping] = None,
) -> FalloutReport:
    """Fit each arm's feature set and compare effect estimates to the truth.

    Parameters
    ----------
    spec : ScmSpec
        Generator for the training data and source of the ground truth.
    q : CausalQuery
        The causal question; each arm is audited against it (exposures are
        stripped from the arm's features for the audit, since an audit
        conditions on covariates only).
    arms : sequence of (name, features)
        Feature sets must be spec variables and exclude the outcome; each
        must include ``exposure`` so the effect can be read off the fit.
    n, seed : int
        Training sample size and RNG seed.
    exposure : str, optional
        Which exposure to vary; defaults to the query's single exposure.
    t0, t1 : float
        Intervention levels compared by the scenario prediction.
    base_row : mapping, optional
        Values at which non-varied features are held; defaults to the
        population means of the structural model.

    Returns
    -------
    FalloutReport
    """
    arms = [(name, tuple(features)) for name, features in arms]
    if not arms:
        raise ValueError("at least one arm is required")
    names = set(spec.names())
    for name, features in arms:
        for f in features:
            if f not in names:
                raise UnknownVariable(f"arm {name!r}: unknown feature {f!r}")
            if f == q.outcome:
                raise FeatureIsExposureOrOutcome(f"arm {name!r}: outcome cannot be a feature")
    if exposure is None:
        if len(q.exposures) != 1:
            raise ValueError("exposure must be given when the query has several exposures")
        exposure = next(iter(q.exposures))
    if exposure not in names:
        raise UnknownVariable(f"unknown exposure {exposure!r}")

    g = scm_graph(spec)
    d = sample(spec, n, seed)
    truth = true_ace(spec, exposure, t1, t0, q.outcome)
    defaults = population_means(spec)
    if base_row is not None:
        defaults.update(base_row)

    results = []
    for name, features in arms:
        model = ols_fit(d, features, q.outcome)
        cv = kfold_cv(d, features, q.outcome, k=5, seed=seed)
        row = {f: defaults[f] for f in features}
        estimate = scenario_effect(model, row, exposure, t0, t1)
        audit = audit_feature_set(g, q, (set(features) - q.exposures) & q.observed)
        results.append(
            ArmResult(
                name=name,
                features=features,
                estimated_effect=estimate,
                cv_r2=cv.mean.r2,
                audit_verdict=audit.verdict,
                sign_agreement=bool(np.sign(estimate) == np.sign(truth)),
            )
        )
    return FalloutReport(arms=tuple(results), true_ace=truth, exposure=exposure, t0=t0, t1=t1)


def arms_from_json_dict(data):
    """Parse an arms file: named feature sets plus the scenario settings.

    Returns
    -------
    (arms, exposure, t0, t1, base_row)
    """
    if not isinstance(data, dict) or not isinstance(data.get("arms"), list):
        raise ScmFormat("arms JSON must be an object with an 'arms' array")
    arms = []
    for item in data["arms"]:
        if not isinstance(item, dict) or "name" not in item or "features" not in item:
            raise ScmFormat(f"bad arm entry {item!r}")
        arms.append((item["name"], tuple(item["features"])))
    exposure = data.get("exposure")
    t0 = float(data.get("t0", 0.0))
    t1 = float(data.get("t1", 1.0))
    base_row = data.get("base_row")
    return arms, exposure, t0, t1, base_row
