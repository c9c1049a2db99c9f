"""Joint mutual information feature ranking.

Features are discretized into equal-frequency bins and ranked greedily:
the first feature maximizes I(X;Y); each further feature f maximizes
the joint-mutual-information score sum over already-selected s of
I((X_f, X_s); Y).  Ties resolve to the lowest feature index, so the
ranking is deterministic for a given matrix.
"""

import numpy as np
from sklearn.base import BaseEstimator

from sensorprint._validation import check_fitted, check_X_y
from sensorprint.errors import ValidationError

DEFAULT_N_BINS = 10


def equal_frequency_bins(values, n_bins=DEFAULT_N_BINS):
    """Discretize values into ``n_bins`` equal-frequency bins.

    Each value's bin is ``floor(rank * n_bins / n)`` where ``rank`` is
    the index of its first occurrence in sorted order, so tied values
    always share a bin and the binning is invariant under monotone
    transforms.  A constant column lands entirely in bin 0.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    n = values.size
    if n == 0:
        raise ValidationError("cannot bin an empty column")
    if n_bins < 1:
        raise ValidationError(f"n_bins must be >= 1, got {n_bins}")
    uniques, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    start_rank = np.concatenate([[0], np.cumsum(counts)[:-1]])
    bin_of_unique = (start_rank * n_bins) // n
    return bin_of_unique[inverse].astype(np.intp)


def _contingency_mi(joint_counts):
    """Mutual information in bits from a 2-D contingency table."""
    n = joint_counts.sum()
    if n == 0:
        return 0.0
    p = joint_counts / n
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / (px * py)[mask])))


def mutual_information(x_bins, y):
    """Plug-in mutual information I(X;Y) in bits for discrete arrays."""
    x_bins = np.asarray(x_bins, dtype=np.intp)
    y = np.asarray(y, dtype=np.intp)
    if x_bins.shape != y.shape:
        raise ValidationError("x_bins and y must have equal length")
    nx = int(x_bins.max()) + 1
    ny = int(y.max()) + 1
    counts = np.bincount(x_bins * ny + y, minlength=nx * ny).reshape(nx, ny)
    return _contingency_mi(counts)


def pairwise_joint_mi(x_bins, s_bins, y, n_bins):
    """I((X,S);Y) in bits, treating the bin pair as one joint variable."""
    joint = np.asarray(x_bins, dtype=np.intp) * n_bins + np.asarray(s_bins, dtype=np.intp)
    return mutual_information(joint, y)


def jmi_rank(X, y, n_features=None, n_bins=DEFAULT_N_BINS):
    """Greedy JMI feature ranking.

    Parameters
    ----------
    X : array of shape (n_samples, n_columns)
        Feature matrix.
    y : array of shape (n_samples,)
        Class labels.
    n_features : int or None
        How many features to rank; all columns when None.
    n_bins : int
        Equal-frequency bins per feature.

    Returns
    -------
    ranking : list of int
        Column indices in selection order.
    scores : list of float
        The score that selected each feature: I(X;Y) for the first,
        the JMI sum for the rest.
    """
    X, y = check_X_y(X, y)
    n_cols = X.shape[1]
    if n_features is None:
        n_features = n_cols
    if not 1 <= n_features <= n_cols:
        raise ValidationError(
            f"n_features must be in [1, {n_cols}], got {n_features}"
        )
    classes, y_enc = np.unique(y, return_inverse=True)
    bins = np.column_stack([equal_frequency_bins(X[:, j], n_bins) for j in range(n_cols)])

    relevance = np.array([mutual_information(bins[:, j], y_enc) for j in range(n_cols)])
    first = int(np.argmax(relevance))
    ranking = [first]
    scores = [float(relevance[first])]

    remaining = [j for j in range(n_cols) if j != first]
    # Accumulated JMI score of each remaining candidate against the
    # selected set; adding one selected feature adds one term.
    acc = np.zeros(n_cols)
    while len(ranking) < n_features:
        last = ranking[-1]
        for j in remaining:
            acc[j] += pairwise_joint_mi(bins[:, j], bins[:, last], y_enc, n_bins)
        best_pos = int(np.argmax([acc[j] for j in remaining]))
        best = remaining.pop(best_pos)
        ranking.append(best)
        scores.append(float(acc[best]))
    return ranking, scores


class JMISelector(BaseEstimator):
    """Selects the top-k features by greedy joint mutual information.

    Parameters
    ----------
    n_features : int or None
        Number of features to keep; all (a full ranking) when None.
    n_bins : int
        Equal-frequency bins used to discretize each column.

    Attributes
    ----------
    ranking_ : ndarray
        Column indices in selection order (length ``n_features``).
    scores_ : ndarray
        Selection score per ranked feature.
    """

    def __init__(self, n_features=None, n_bins=DEFAULT_N_BINS):
        self.n_features = n_features
        self.n_bins = n_bins

    def fit(self, X, y):
        ranking, scores = jmi_rank(X, y, self.n_features, self.n_bins)
        self.ranking_ = np.asarray(ranking, dtype=np.intp)
        self.scores_ = np.asarray(scores)
        self.n_features_in_ = np.asarray(X).shape[1]
        return self

    def transform(self, X):
        check_fitted(self, ["ranking_"])
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X must have {self.n_features_in_} columns to match fit"
            )
        return X[:, self.ranking_]

    def fit_transform(self, X, y):
        return self.fit(X, y).transform(X)
