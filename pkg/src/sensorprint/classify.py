"""Classifiers for device identification.

Three classifiers over feature vectors, all exposing the usual
fit/predict estimator API:

* :class:`BaggedTreesClassifier` -- an ensemble of CART decision trees,
  each grown on a bootstrap resample of the training set and combined
  by majority vote.  This is the primary classifier.
* :class:`KNNClassifier` -- nearest neighbours on z-scored features.
* :class:`GaussianNBClassifier` -- Gaussian naive Bayes on z-scored
  features.

All tie-breaks (vote ties, equal-quality splits, equidistant
neighbours) resolve deterministically toward the smallest index, so a
fixed random_state yields bit-identical models and predictions.
"""

import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from sensorprint._validation import check_array_2d, check_fitted, check_X_y
from sensorprint.errors import ValidationError


def _standardize_fit(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


# ---------------------------------------------------------------------------
# Bagged CART trees
# ---------------------------------------------------------------------------

class _Tree:
    """One CART tree in flat-array form."""

    __slots__ = ("feature", "threshold", "left", "right", "leaf_class")

    def __init__(self, feature, threshold, left, right, leaf_class):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.leaf_class = np.asarray(leaf_class, dtype=np.int32)

    def predict(self, X):
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = np.nonzero(self.feature[node] >= 0)[0]
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] >= 0]
        return self.leaf_class[node]

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "leaf_class": self.leaf_class.tolist(),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(obj["feature"], obj["threshold"], obj["left"], obj["right"],
                   obj["leaf_class"])


def _best_split(Xn, yn, class_counts, min_leaf):
    """Exhaustive Gini split search over all features.

    Candidate thresholds are the midpoints between consecutive distinct
    values of each (sorted) feature column.  Returns
    ``(feature, threshold, left_mask)`` for the split minimizing the
    weighted child Gini impurity, or None when no split strictly
    improves on the node impurity.  Ties resolve to the lowest feature
    index, then the lowest threshold.
    """
    m, n_features = Xn.shape
    order = np.argsort(Xn, axis=0, kind="stable")
    Xs = np.take_along_axis(Xn, order, axis=0)

    onehot = np.zeros((m, class_counts.size), dtype=np.float64)
    onehot[np.arange(m), yn] = 1.0
    left_counts = np.cumsum(onehot[order], axis=0)          # (m, F, C)
    right_counts = class_counts[None, None, :] - left_counts

    n_left = np.arange(1, m + 1, dtype=np.float64)[:, None]
    n_right = m - n_left
    # Minimizing weighted Gini is equivalent to maximizing the sum of
    # per-child (sum of squared class counts) / child size.
    sum_l2 = np.einsum("ijk,ijk->ij", left_counts, left_counts)
    sum_r2 = np.einsum("ijk,ijk->ij", right_counts, right_counts)
    with np.errstate(divide="ignore", invalid="ignore"):
        score = sum_l2 / n_left + sum_r2 / n_right

    valid = np.zeros((m, n_features), dtype=bool)
    valid[:-1] = Xs[1:] > Xs[:-1]
    if min_leaf > 1:
        valid &= (n_left >= min_leaf) & (n_right >= min_leaf)
    score[~valid] = -np.inf

    # Feature-major argmax: ties pick the lowest feature index, then
    # the lowest threshold (positions sort by value).
    flat = int(np.argmax(score.T))
    feature, pos = divmod(flat, m)
    best = score[pos, feature]
    parent = float(np.sum(class_counts.astype(np.float64) ** 2)) / m
    if not np.isfinite(best) or best <= parent:
        return None
    threshold = (Xs[pos, feature] + Xs[pos + 1, feature]) / 2.0
    return int(feature), float(threshold), Xn[:, feature] <= threshold


def _grow_tree(X, y_enc, n_classes, rng, max_depth, min_leaf):
    n = X.shape[0]
    boot = rng.integers(0, n, size=n)
    Xb, yb = X[boot], y_enc[boot]

    feature, threshold, left, right, leaf_class = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        leaf_class.append(-1)
        return len(feature) - 1

    stack = [(np.arange(n), 0, new_node())]
    while stack:
        idx, depth, slot = stack.pop()
        yn = yb[idx]
        counts = np.bincount(yn, minlength=n_classes)
        majority = int(np.argmax(counts))
        at_depth_limit = max_depth is not None and depth >= max_depth
        if counts[majority] == idx.size or at_depth_limit or idx.size < 2 * min_leaf:
            leaf_class[slot] = majority
            continue
        # Classes absent from the node contribute nothing to any split
        # score; compacting them shrinks the scan tensor.
        present = np.nonzero(counts)[0]
        compact = np.empty(n_classes, dtype=np.intp)
        compact[present] = np.arange(present.size)
        split = _best_split(Xb[idx], compact[yn], counts[present], min_leaf)
        if split is None:
            leaf_class[slot] = majority
            continue
        feat, thr, left_mask = split
        feature[slot] = feat
        threshold[slot] = thr
        left_slot, right_slot = new_node(), new_node()
        left[slot], right[slot] = left_slot, right_slot
        stack.append((idx[left_mask], depth + 1, left_slot))
        stack.append((idx[~left_mask], depth + 1, right_slot))
    return _Tree(feature, threshold, left, right, leaf_class)


class BaggedTreesClassifier(BaseEstimator, ClassifierMixin):
    """Bootstrap-aggregated CART decision trees.

    Each tree is grown on a bootstrap resample of the same size as the
    training set, using exhaustive Gini split search over all features
    (no per-split feature subsampling) with candidate thresholds at
    midpoints between consecutive distinct values.  Trees grow until
    leaves are pure, no split improves impurity, or ``max_depth`` /
    ``min_leaf`` stops them.  Prediction is a majority vote; vote ties
    resolve to the smallest class.

    Parameters
    ----------
    n_trees : int
        Ensemble size.
    max_depth : int or None
        Depth limit; None grows unbounded.  A limit of 0 collapses each
        tree to its root majority vote.
    min_leaf : int
        Minimum samples in each child of a split.
    random_state : int or None
        Seed for bootstrap resampling.
    """

    def __init__(self, n_trees=100, max_depth=None, min_leaf=1, random_state=None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.n_trees < 1:
            raise ValidationError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf < 1:
            raise ValidationError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValidationError(f"max_depth must be >= 0 or None, got {self.max_depth}")
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_trees)
        self.trees_ = [
            _grow_tree(X, y_enc, self.classes_.size,
                       np.random.default_rng(seeds[t]),
                       self.max_depth, self.min_leaf)
            for t in range(self.n_trees)
        ]
        return self

    def predict(self, X):
        check_fitted(self, ["trees_"])
        X = check_array_2d(X)
        votes = np.zeros((X.shape[0], self.classes_.size), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            votes[rows, tree.predict(X)] += 1
        return self.classes_[np.argmax(votes, axis=1)]

    def to_dict(self):
        check_fitted(self, ["trees_"])
        return {
            "model": "bagged_trees",
            "params": self.get_params(),
            "classes": self.classes_.tolist(),
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, obj):
        est = cls(**obj["params"])
        est.classes_ = np.asarray(obj["classes"])
        est.trees_ = [_Tree.from_dict(t) for t in obj["trees"]]
        return est


# ---------------------------------------------------------------------------
# Nearest neighbours
# ---------------------------------------------------------------------------

class KNNClassifier(BaseEstimator, ClassifierMixin):
    """k-nearest-neighbour classifier on z-scored features.

    Standardization statistics come from the training set (zero-variance
    columns pass through unscaled).  Neighbour ordering is stable, so
    equidistant neighbours resolve to the earliest training row;
    vote ties resolve to the smallest class.

    Parameters
    ----------
    n_neighbors : int
        Number of neighbours consulted per prediction.
    """

    def __init__(self, n_neighbors=1):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.n_neighbors < 1:
            raise ValidationError(f"n_neighbors must be >= 1, got {self.n_neighbors}")
        if self.n_neighbors > X.shape[0]:
            raise ValidationError(
                f"n_neighbors={self.n_neighbors} exceeds {X.shape[0]} training samples"
            )
        self.mean_, self.scale_ = _standardize_fit(X)
        self.classes_, self._y_enc = np.unique(y, return_inverse=True)
        self._X_train = (X - self.mean_) / self.scale_
        return self

    def predict(self, X):
        check_fitted(self, ["_X_train"])
        X = check_array_2d(X)
        if X.shape[1] != self._X_train.shape[1]:
            raise ValidationError(
                f"X has {X.shape[1]} features, expected {self._X_train.shape[1]}"
            )
        Z = (X - self.mean_) / self.scale_
        d2 = (
            np.sum(Z ** 2, axis=1)[:, None]
            + np.sum(self._X_train ** 2, axis=1)[None, :]
            - 2.0 * Z @ self._X_train.T
        )
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.n_neighbors]
        out = np.empty(X.shape[0], dtype=np.intp)
        for i in range(X.shape[0]):
            counts = np.bincount(self._y_enc[order[i]], minlength=self.classes_.size)
            out[i] = np.argmax(counts)
        return self.classes_[out]

    def to_dict(self):
        check_fitted(self, ["_X_train"])
        return {
            "model": "knn",
            "params": self.get_params(),
            "classes": self.classes_.tolist(),
            "mean": self.mean_.tolist(),
            "scale": self.scale_.tolist(),
            "X_train": self._X_train.tolist(),
            "y_train": self._y_enc.tolist(),
        }

    @classmethod
    def from_dict(cls, obj):
        est = cls(**obj["params"])
        est.classes_ = np.asarray(obj["classes"])
        est.mean_ = np.asarray(obj["mean"])
        est.scale_ = np.asarray(obj["scale"])
        est._X_train = np.asarray(obj["X_train"])
        est._y_enc = np.asarray(obj["y_train"], dtype=np.intp)
        return est


# ---------------------------------------------------------------------------
# Gaussian naive Bayes
# ---------------------------------------------------------------------------

class GaussianNBClassifier(BaseEstimator, ClassifierMixin):
    """Gaussian naive Bayes on z-scored features.

    Per-class feature means and (population) variances are estimated on
    standardized training data; variances are floored at ``var_floor``
    to keep log-likelihoods finite.  Priors are class frequencies.

    Parameters
    ----------
    var_floor : float
        Lower bound applied to every per-class feature variance.
    """

    def __init__(self, var_floor=1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.var_floor <= 0:
            raise ValidationError(f"var_floor must be > 0, got {self.var_floor}")
        self.mean_, self.scale_ = _standardize_fit(X)
        Z = (X - self.mean_) / self.scale_
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        n_classes = self.classes_.size
        self.theta_ = np.empty((n_classes, X.shape[1]))
        self.var_ = np.empty((n_classes, X.shape[1]))
        self.priors_ = np.empty(n_classes)
        for c in range(n_classes):
            Zc = Z[y_enc == c]
            self.theta_[c] = Zc.mean(axis=0)
            self.var_[c] = np.maximum(Zc.var(axis=0), self.var_floor)
            self.priors_[c] = Zc.shape[0] / X.shape[0]
        return self

    def predict(self, X):
        check_fitted(self, ["theta_"])
        X = check_array_2d(X)
        if X.shape[1] != self.theta_.shape[1]:
            raise ValidationError(
                f"X has {X.shape[1]} features, expected {self.theta_.shape[1]}"
            )
        Z = (X - self.mean_) / self.scale_
        log_lik = np.empty((X.shape[0], self.classes_.size))
        for c in range(self.classes_.size):
            log_lik[:, c] = (
                np.log(self.priors_[c])
                - 0.5 * np.sum(np.log(2.0 * np.pi * self.var_[c]))
                - 0.5 * np.sum((Z - self.theta_[c]) ** 2 / self.var_[c], axis=1)
            )
        return self.classes_[np.argmax(log_lik, axis=1)]

    def to_dict(self):
        check_fitted(self, ["theta_"])
        return {
            "model": "gnb",
            "params": self.get_params(),
            "classes": self.classes_.tolist(),
            "mean": self.mean_.tolist(),
            "scale": self.scale_.tolist(),
            "theta": self.theta_.tolist(),
            "var": self.var_.tolist(),
            "priors": self.priors_.tolist(),
        }

    @classmethod
    def from_dict(cls, obj):
        est = cls(**obj["params"])
        est.classes_ = np.asarray(obj["classes"])
        est.mean_ = np.asarray(obj["mean"])
        est.scale_ = np.asarray(obj["scale"])
        est.theta_ = np.asarray(obj["theta"])
        est.var_ = np.asarray(obj["var"])
        est.priors_ = np.asarray(obj["priors"])
        return est


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

MODEL_TYPES = {
    "bagged_trees": BaggedTreesClassifier,
    "knn": KNNClassifier,
    "gnb": GaussianNBClassifier,
}


def make_classifier(model_type, **params):
    """Instantiate a classifier by its model-type name."""
    if model_type not in MODEL_TYPES:
        raise ValidationError(
            f"unknown model type {model_type!r}, expected one of {sorted(MODEL_TYPES)}"
        )
    return MODEL_TYPES[model_type](**params)


def save_model(estimator, path, feature_names=None):
    """Serialize a fitted classifier to JSON.

    ``feature_names`` records which feature columns (in order) the
    model was trained on, so consumers can align inputs by name.
    """
    path = Path(path)
    obj = estimator.to_dict()
    if feature_names is not None:
        obj["feature_names"] = list(feature_names)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")
    return path


def load_model(path):
    """Load a classifier saved by :func:`save_model`.

    If the file records feature names, they are restored on the
    estimator as ``feature_names_``.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid model JSON: {exc.msg}") from exc
    kind = obj.get("model")
    if kind not in MODEL_TYPES:
        raise ValidationError(f"{path}: unknown or missing model type {kind!r}")
    est = MODEL_TYPES[kind].from_dict(obj)
    if "feature_names" in obj:
        est.feature_names_ = list(obj["feature_names"])
    return est
