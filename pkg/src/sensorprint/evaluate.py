"""Identification metrics and the repeated-split evaluation protocol.

Per-class precision is TP/(TP+FP) and recall TP/(TP+FN), both defined
as 0 when the denominator is 0; the per-class F-score is their harmonic
mean.  Averages are unweighted means over all classes, and the average
F-score is the harmonic mean of average precision and average recall.

The evaluation protocol splits each device's sessions 50/50 into
training and test (odd counts give the extra session to training),
fits a fresh classifier and scores the test half; this repeats over
independent shuffles and reports the mean average F-score with a 95%
normal-approximation confidence interval.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from sensorprint._validation import check_X_y
from sensorprint.errors import ValidationError


def confusion_counts(y_true, y_pred, classes):
    """Per-class (TP, FP, FN) counts as three dicts keyed by class."""
    tp = {c: 0 for c in classes}
    fp = {c: 0 for c in classes}
    fn = {c: 0 for c in classes}
    for t, p in zip(y_true, y_pred):
        if t == p:
            tp[t] += 1
        else:
            fn[t] += 1
            fp[p] += 1
    return tp, fp, fn


def f_score(precision, recall):
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class ClassificationScores:
    """Per-class and averaged scores of one train/test evaluation."""

    classes: list
    precision: list
    recall: list
    f1: list
    avg_precision: float
    avg_recall: float
    avg_f: float

    def to_dict(self):
        return {
            "classes": [_jsonable(c) for c in self.classes],
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "avg_precision": self.avg_precision,
            "avg_recall": self.avg_recall,
            "avg_f": self.avg_f,
        }


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.str_,)):
        return str(value)
    return value


def score_predictions(y_true, y_pred, classes=None):
    """Score predictions against ground truth over a fixed class set.

    ``classes`` defaults to the union of labels in ``y_true`` and
    ``y_pred`` (sorted).  Classes absent from both contribute zeros to
    the averages.
    """
    y_true = list(y_true)
    y_pred = list(y_pred)
    if len(y_true) != len(y_pred):
        raise ValidationError(
            f"y_true and y_pred must have equal length, got {len(y_true)} and {len(y_pred)}"
        )
    if not y_true:
        raise ValidationError("cannot score an empty prediction set")
    if classes is None:
        classes = sorted(set(y_true) | set(y_pred))
    else:
        classes = list(classes)
    tp, fp, fn = confusion_counts(y_true, y_pred, classes)

    precision, recall, f1 = [], [], []
    for c in classes:
        denom_p = tp[c] + fp[c]
        denom_r = tp[c] + fn[c]
        p = tp[c] / denom_p if denom_p else 0.0
        r = tp[c] / denom_r if denom_r else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(f_score(p, r))

    avg_p = sum(precision) / len(classes)
    avg_r = sum(recall) / len(classes)
    return ClassificationScores(
        classes=classes,
        precision=precision,
        recall=recall,
        f1=f1,
        avg_precision=avg_p,
        avg_recall=avg_r,
        avg_f=f_score(avg_p, avg_r),
    )


def stratified_split(y, rng, train_fraction=0.5, train_count=None):
    """Random per-class train/test split.

    Each class's samples are shuffled independently; the first
    ``train_count`` (or ``ceil(train_fraction * n)``) go to training
    and the rest to test.  Every class must keep at least one sample on
    each side.

    Returns ``(train_idx, test_idx)`` as sorted index arrays.
    """
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise ValidationError("y must be a non-empty 1-D label array")
    if train_count is None and not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    train_parts, test_parts = [], []
    for c in np.unique(y):
        idx = np.nonzero(y == c)[0]
        k = train_count if train_count is not None else math.ceil(train_fraction * idx.size)
        if not 1 <= k < idx.size:
            raise ValidationError(
                f"class {c!r} has {idx.size} samples; cannot put {k} in training "
                "and keep a non-empty test side"
            )
        perm = rng.permutation(idx)
        train_parts.append(perm[:k])
        test_parts.append(perm[k:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return train_idx, test_idx


@dataclass
class EvalReport:
    """Aggregate of repeated train/test evaluations."""

    classes: list
    reps: list = field(default_factory=list)
    n_reps: int = 0
    seed: int = 0
    train_fraction: float = 0.5
    train_count: int = None
    mean_avg_precision: float = 0.0
    mean_avg_recall: float = 0.0
    mean_avg_f: float = 0.0
    ci95_avg_f: float = 0.0

    def to_dict(self):
        return {
            "classes": [_jsonable(c) for c in self.classes],
            "n_reps": self.n_reps,
            "seed": self.seed,
            "train_fraction": self.train_fraction,
            "train_count": self.train_count,
            "mean_avg_precision": self.mean_avg_precision,
            "mean_avg_recall": self.mean_avg_recall,
            "mean_avg_f": self.mean_avg_f,
            "ci95_avg_f": self.ci95_avg_f,
            "reps": [r.to_dict() for r in self.reps],
        }


def evaluate_repeated(X, y, estimator, *, n_reps=10, seed=0,
                      train_fraction=0.5, train_count=None):
    """Repeated random-split evaluation of a classifier.

    Each repetition draws a fresh stratified split, fits a clone of
    ``estimator`` on the training half and scores the test half over
    the full class set.  Estimators exposing a ``random_state``
    parameter get an independent per-repetition seed.

    Returns an :class:`EvalReport`; the confidence interval is the 95%
    normal approximation ``1.96 * sd / sqrt(n_reps)`` over the
    per-repetition average F-scores.
    """
    X, y = check_X_y(X, y)
    if n_reps < 1:
        raise ValidationError(f"n_reps must be >= 1, got {n_reps}")
    classes = sorted(np.unique(y).tolist())
    report = EvalReport(classes=classes, n_reps=n_reps, seed=seed,
                        train_fraction=train_fraction, train_count=train_count)
    children = np.random.SeedSequence(seed).spawn(n_reps)
    for rep in range(n_reps):
        rng = np.random.default_rng(children[rep])
        train_idx, test_idx = stratified_split(
            y, rng, train_fraction=train_fraction, train_count=train_count
        )
        clf = clone(estimator)
        if "random_state" in clf.get_params():
            clf.set_params(random_state=int(rng.integers(0, 2 ** 31 - 1)))
        clf.fit(X[train_idx], y[train_idx])
        pred = clf.predict(X[test_idx])
        report.reps.append(score_predictions(y[test_idx], pred, classes))

    avg_fs = [r.avg_f for r in report.reps]
    report.mean_avg_precision = sum(r.avg_precision for r in report.reps) / n_reps
    report.mean_avg_recall = sum(r.avg_recall for r in report.reps) / n_reps
    report.mean_avg_f = sum(avg_fs) / n_reps
    if n_reps > 1:
        sd = float(np.std(avg_fs, ddof=1))
        report.ci95_avg_f = 1.96 * sd / math.sqrt(n_reps)
    return report
