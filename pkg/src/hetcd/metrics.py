"""Graph-recovery scores against a ground-truth CPDAG.

Undefined ratios (zero denominators) are reported as ``None`` and must be
left out of averages.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import NodeSetMismatch
from .graph import Cpdag


@dataclass(frozen=True)
class AdjacencyScores:
    tp: int
    fp: int
    fn: int
    tn: int
    tpr: Optional[float]
    fpr: Optional[float]
    precision: Optional[float]


@dataclass(frozen=True)
class EdgemarkScores:
    correct_est: int
    total_est: int
    correct_truth: int
    total_truth: int
    precision: Optional[float]
    recall: Optional[float]


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def _check(est: Cpdag, truth: Cpdag):
    if set(est.nodes) != set(truth.nodes):
        raise NodeSetMismatch("estimated and true graphs have different node sets")


def adjacency_scores(est: Cpdag, truth: Cpdag) -> AdjacencyScores:
    _check(est, truth)
    tp = fp = fn = tn = 0
    for a, b in itertools.combinations(truth.nodes, 2):
        in_est, in_true = est.adjacent(a, b), truth.adjacent(a, b)
        if in_est and in_true:
            tp += 1
        elif in_est:
            fp += 1
        elif in_true:
            fn += 1
        else:
            tn += 1
    return AdjacencyScores(tp, fp, fn, tn, _ratio(tp, tp + fn), _ratio(fp, fp + tn),
                           _ratio(tp, tp + fp))


def edgemark_scores(est: Cpdag, truth: Cpdag) -> EdgemarkScores:
    """Per-endpoint mark agreement.

    A directed edge has a tail at its source and an arrowhead at its target;
    an undirected edge has tails at both ends. Precision is taken over the
    marks of estimated edges, recall over the marks of true edges; a mark
    counts as correct when the other graph has the same mark at that end.
    """
    _check(est, truth)
    correct = total_est = total_truth = 0
    for a, b in itertools.permutations(truth.nodes, 2):
        m_est, m_true = est.mark(a, b), truth.mark(a, b)
        total_est += m_est is not None
        total_truth += m_true is not None
        correct += m_est is not None and m_est == m_true
    return EdgemarkScores(correct, total_est, correct, total_truth,
                          _ratio(correct, total_est), _ratio(correct, total_truth))
