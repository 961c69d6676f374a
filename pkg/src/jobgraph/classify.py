"""Multinomial logistic regression and F1 metrics for title classification.

The classifier minimizes mean cross-entropy plus an L2 penalty on the weight
matrix (bias unpenalized) by full-batch gradient descent with backtracking
line search, stopping when the gradient max-norm drops below tol or after
max_iter steps. The objective never increases between iterations.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .errors import InputError, NumericError

_ARMIJO_C = 1e-4
_MAX_HALVINGS = 60


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class LogisticRegressionClassifier(BaseEstimator, ClassifierMixin):
    """Softmax regression trained by monotone gradient descent.

    Parameters
    ----------
    l2 : weight-matrix penalty coefficient (objective adds l2 * ||W||^2 / 2).
    tol : stop once max|gradient| over weights and bias falls below this.
    max_iter : iteration cap.
    """

    def __init__(self, l2: float = 5e-4, tol: float = 1e-5, max_iter: int = 10_000) -> None:
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter

    def _objective_and_grads(
        self, X: np.ndarray, Y: np.ndarray, W: np.ndarray, b: np.ndarray
    ) -> tuple[float, np.ndarray, np.ndarray]:
        n = X.shape[0]
        probs = _softmax_rows(X @ W.T + b)
        # mean cross-entropy over the one-hot gold matrix Y
        eps_clipped = np.clip((probs * Y).sum(axis=1), 1e-300, None)
        ce = float(-np.log(eps_clipped).mean())
        obj = ce + 0.5 * self.l2 * float((W * W).sum())
        diff = probs - Y
        grad_w = diff.T @ X / n + self.l2 * W
        grad_b = diff.mean(axis=0)
        return obj, grad_w, grad_b

    def fit(self, X: Iterable[Sequence[float]], y: Iterable[object]) -> "LogisticRegressionClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(list(y))
        if X.ndim != 2 or X.shape[0] == 0:
            raise InputError("X must be a nonempty 2-D array")
        if len(y) != X.shape[0]:
            raise InputError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
        if not np.isfinite(X).all():
            raise NumericError("non-finite feature values")
        classes = np.unique(y)
        if len(classes) < 2:
            raise InputError(f"need at least 2 classes, got {len(classes)}")
        class_index = {c: i for i, c in enumerate(classes)}
        Y = np.zeros((X.shape[0], len(classes)))
        for i, label in enumerate(y):
            Y[i, class_index[label]] = 1.0

        W = np.zeros((len(classes), X.shape[1]))
        b = np.zeros(len(classes))
        obj, grad_w, grad_b = self._objective_and_grads(X, Y, W, b)
        objectives = [obj]
        step = 1.0
        n_iter = 0
        converged = False
        while n_iter < self.max_iter:
            grad_norm = max(np.abs(grad_w).max(), np.abs(grad_b).max())
            if grad_norm < self.tol:
                converged = True
                break
            g_sq = float((grad_w * grad_w).sum() + (grad_b * grad_b).sum())
            alpha = step
            for _ in range(_MAX_HALVINGS):
                new_w = W - alpha * grad_w
                new_b = b - alpha * grad_b
                new_obj, new_gw, new_gb = self._objective_and_grads(X, Y, new_w, new_b)
                if new_obj <= obj - _ARMIJO_C * alpha * g_sq:
                    break
                alpha *= 0.5
            else:
                # No acceptable step: gradient direction exhausted numerically.
                break
            W, b, obj, grad_w, grad_b = new_w, new_b, new_obj, new_gw, new_gb
            objectives.append(obj)
            step = min(alpha * 2.0, 1e6)  # warm-start next line search
            n_iter += 1
        else:
            grad_norm = max(np.abs(grad_w).max(), np.abs(grad_b).max())
            converged = grad_norm < self.tol

        self.classes_ = classes
        self.weights_ = W
        self.bias_ = b
        self.n_iter_ = n_iter
        self.converged_ = converged
        self.objectives_ = tuple(objectives)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "weights_"):
            raise NotFittedError("classifier is not fitted; call fit first")

    def decision_function(self, X: Iterable[Sequence[float]]) -> np.ndarray:
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        return X @ self.weights_.T + self.bias_

    def predict_proba(self, X: Iterable[Sequence[float]]) -> np.ndarray:
        return _softmax_rows(self.decision_function(X))

    def predict(self, X: Iterable[Sequence[float]]) -> np.ndarray:
        self._check_fitted()
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]


def train_classifier(
    features: Iterable[Sequence[float]],
    labels: Iterable[object],
    l2: float = 5e-4,
    classes: Sequence[object] | None = None,
) -> LogisticRegressionClassifier:
    """Fit a LogisticRegressionClassifier; validates any explicit class list."""
    label_list = list(labels)
    if classes is not None:
        present = set(label_list)
        missing = [c for c in classes if c not in present]
        if missing:
            raise InputError(f"classes with zero training rows: {missing!r}")
    return LogisticRegressionClassifier(l2=l2).fit(features, label_list)


def f1_counts(
    y_true: Sequence[object], y_pred: Sequence[object]
) -> dict[object, tuple[int, int, int]]:
    """Per-class (true positive, false positive, false negative) counts."""
    counts: dict[object, list[int]] = {}
    for gold, pred in zip(y_true, y_pred):
        counts.setdefault(gold, [0, 0, 0])
        counts.setdefault(pred, [0, 0, 0])
        if gold == pred:
            counts[gold][0] += 1
        else:
            counts[pred][1] += 1
            counts[gold][2] += 1
    return {c: (tp, fp, fn) for c, (tp, fp, fn) in counts.items()}


def macro_micro_f1(y_true: Sequence[object], y_pred: Sequence[object]) -> tuple[float, float]:
    """Macro-F1 averaged over classes present in gold, and pooled micro-F1.

    A class the model never predicts scores F1 0 for its gold class;
    classes that appear only in predictions do not enter the macro average.
    With single-label data micro-F1 equals plain accuracy.
    """
    y_true = list(y_true)
    y_pred = list(y_pred)
    if len(y_true) != len(y_pred):
        raise InputError(f"length mismatch: {len(y_true)} gold vs {len(y_pred)} predicted")
    if not y_true:
        raise InputError("empty label sequences")
    counts = f1_counts(y_true, y_pred)
    gold_classes = sorted(set(y_true), key=repr)
    per_class = []
    for c in gold_classes:
        tp, fp, fn = counts[c]
        denom = 2 * tp + fp + fn
        per_class.append(2 * tp / denom if denom else 0.0)
    macro = float(np.mean(per_class))
    tp_all = sum(counts[c][0] for c in counts)
    fp_all = sum(counts[c][1] for c in counts)
    fn_all = sum(counts[c][2] for c in counts)
    denom = 2 * tp_all + fp_all + fn_all
    micro = 2 * tp_all / denom if denom else 0.0
    return macro, micro


def evaluate_classification(
    model: LogisticRegressionClassifier,
    features: Iterable[Sequence[float]],
    labels: Sequence[object],
) -> tuple[float, float]:
    """(macro_f1, micro_f1) of the model on a held-out feature matrix."""
    predictions = model.predict(features)
    return macro_micro_f1(list(labels), list(predictions))
