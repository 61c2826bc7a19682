"""Per-feature significance via likelihood-ratio tests.

A multinomial logistic model serves as the inferential surrogate for the
classifier: for each feature, the model is refitted without it and twice
the log-likelihood drop is referred to a chi-squared distribution with
(classes - 1) degrees of freedom.  Fits that fail to converge or blow up
(separation) are flagged unstable rather than silently reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from ..errors import ComputationError
from .features import FeatureMatrix

METHOD_TAG = "LR-multinomial-logit"

_COEF_BLOWUP = 30.0


def _negative_log_likelihood(
    beta_flat: np.ndarray, design: np.ndarray, class_index: np.ndarray, n_classes: int
) -> tuple[float, np.ndarray]:
    n, p = design.shape
    beta = beta_flat.reshape(p, n_classes - 1)
    logits = np.hstack([np.zeros((n, 1)), design @ beta])
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    nll = -log_probs[np.arange(n), class_index].sum()

    probs = np.exp(log_probs)
    indicator = np.zeros_like(probs)
    indicator[np.arange(n), class_index] = 1.0
    grad = design.T @ (probs - indicator)[:, 1:]
    return nll, grad.ravel()


def _fit_multinomial_logit(
    features: np.ndarray, class_index: np.ndarray, n_classes: int
) -> tuple[float, np.ndarray, bool]:
    """Maximize the log-likelihood; returns (loglik, coefficients, converged)."""
    design = np.hstack([np.ones((features.shape[0], 1)), features])
    x0 = np.zeros(design.shape[1] * (n_classes - 1))
    result = optimize.minimize(
        _negative_log_likelihood,
        x0,
        args=(design, class_index, n_classes),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": 1000},
    )
    return -float(result.fun), result.x, bool(result.success)


@dataclass
class FeatureSignificance:
    feature: str
    p_value: float
    statistic: float
    dof: int
    unstable: bool = False
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "p_value": self.p_value,
            "statistic": self.statistic,
            "dof": self.dof,
            "unstable": self.unstable,
            "note": self.note,
        }


@dataclass
class SignificanceReport:
    method: str
    features: list[FeatureSignificance] = field(default_factory=list)

    def p_value_of(self, feature: str) -> float | None:
        for entry in self.features:
            if entry.feature == feature:
                return entry.p_value
        return None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "features": [entry.to_dict() for entry in self.features],
        }


def feature_significance(X: FeatureMatrix) -> SignificanceReport:
    """Likelihood-ratio p-value for every feature column.

    Constant columns change nothing when dropped, so their p-value is 1.0
    by construction.  The statistic is clamped at zero: a microscopically
    negative value only reflects optimizer tolerance.
    """
    if X.n_rows == 0:
        raise ComputationError("empty feature matrix")
    classes = sorted(set(int(v) for v in X.labels))
    if len(classes) < 2:
        raise ComputationError("significance testing needs >= 2 classes")
    n_classes = len(classes)
    dof = n_classes - 1
    class_index = np.searchsorted(np.asarray(classes), X.labels)

    ll_full, coef_full, converged_full = _fit_multinomial_logit(
        X.features, class_index, n_classes
    )
    full_blowup = np.abs(coef_full).max() > _COEF_BLOWUP

    report = SignificanceReport(method=METHOD_TAG)
    for j, name in enumerate(X.feature_names):
        column = X.features[:, j]
        if np.all(column == column[0]):
            report.features.append(
                FeatureSignificance(
                    feature=name,
                    p_value=1.0,
                    statistic=0.0,
                    dof=dof,
                    note="constant feature",
                )
            )
            continue
        reduced = np.delete(X.features, j, axis=1)
        ll_reduced, coef_reduced, converged_reduced = _fit_multinomial_logit(
            reduced, class_index, n_classes
        )
        statistic = max(0.0, 2.0 * (ll_full - ll_reduced))
        p_value = float(stats.chi2.sf(statistic, dof))
        unstable = (
            not converged_full
            or not converged_reduced
            or full_blowup
            or np.abs(coef_reduced).max() > _COEF_BLOWUP
        )
        report.features.append(
            FeatureSignificance(
                feature=name,
                p_value=p_value,
                statistic=statistic,
                dof=dof,
                unstable=unstable,
                note="degenerate fit (possible separation)" if unstable else None,
            )
        )
    return report
