"""Evaluation metrics: ROC-AUC by rank statistic, binary F1 and accuracy."""

import numpy as np
from scipy.stats import rankdata


class MetricError(ValueError):
    pass


def roc_auc(scores, labels):
    """Mann-Whitney AUC with average ranks for ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC is undefined unless both classes are present")
    ranks = rankdata(scores, method="average")
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def f1_binary(pred, labels):
    pred = np.asarray(pred).astype(bool)
    labels = np.asarray(labels).astype(bool)
    tp = np.sum(pred & labels)
    fp = np.sum(pred & ~labels)
    fn = np.sum(~pred & labels)
    if tp == 0:
        return 0.0
    return float(2 * tp / (2 * tp + fp + fn))


def accuracy(pred, labels):
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    if pred.size == 0:
        raise MetricError("accuracy of an empty prediction set")
    return float(np.mean(pred == labels))
