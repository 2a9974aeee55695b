"""Linear-chain CRF over the BMES label set.

Emission scores come from the decoder as an ``[m, 4]`` matrix; the
transition matrix ``M`` holds the weight of moving from label ``r`` at step
``t-1`` to label ``c`` at step ``t``. There is no start or stop transition:
the first position carries its emission score only.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .tensor import DTYPE, logsumexp, softmax

LABELS = ("B", "M", "E", "S")
B, M, E, S = range(4)
NUM_LABELS = len(LABELS)
LABEL_INDEX = {name: i for i, name in enumerate(LABELS)}

MAX_ORACLE_LENGTH = 10


def _check(score, transitions):
    score = np.asarray(score, dtype=DTYPE)
    transitions = np.asarray(transitions, dtype=DTYPE)
    if score.ndim != 2 or score.shape[0] == 0:
        raise DomainError(f"score must be a non-empty [m, tau] matrix, got {score.shape}")
    tau = score.shape[1]
    if transitions.shape != (tau, tau):
        raise DimensionError(
            f"transition matrix {transitions.shape} does not match {tau} labels"
        )
    return score, transitions


def _check_labels(score, labels):
    labels = np.asarray(labels, dtype=np.intp)
    if labels.shape != (score.shape[0],):
        raise DomainError(
            f"label sequence of length {labels.size} for a sentence of length {score.shape[0]}"
        )
    if labels.size and (labels.min() < 0 or labels.max() >= score.shape[1]):
        raise DomainError("label index out of range")
    return labels


@dataclass
class AlphaTable:
    alpha: np.ndarray
    log_z: float
    # weights[t-1][k, l] = softmax over k of alpha[t-1, k] + M[k, l]
    weights: list


def forward_alpha(score, transitions):
    score, transitions = _check(score, transitions)
    m = score.shape[0]
    alpha = np.empty_like(score)
    alpha[0] = score[0]
    weights = []
    for t in range(1, m):
        pair = alpha[t - 1][:, None] + transitions
        alpha[t] = score[t] + logsumexp(pair, axis=0)
        weights.append(softmax(pair, axis=0))
    return AlphaTable(alpha, logsumexp(alpha[-1]), weights)


def log_partition(score, transitions):
    return forward_alpha(score, transitions).log_z


def path_score(score, transitions, labels):
    """Emission plus transition score of one label path.

    The summation order is fixed (left to right, transition before
    emission) so that the brute-force oracle reproduces it bit for bit.
    """
    total = score[0, labels[0]]
    for t in range(1, len(labels)):
        total = total + transitions[labels[t - 1], labels[t]] + score[t, labels[t]]
    return float(total)


def nll_loss(score, transitions, labels):
    score, transitions = _check(score, transitions)
    labels = _check_labels(score, labels)
    return forward_alpha(score, transitions).log_z - path_score(score, transitions, labels)


def loss_backward(score, transitions, labels):
    """Loss and its gradients with respect to the scores and transitions.

    Gradients are obtained by running the alpha recursion in reverse: the
    adjoint of log Z w.r.t. alpha[m] is the softmax of alpha[m], and each
    step pushes its adjoint back through the log-sum-exp weights saved on
    the forward pass. The result is the posterior marginal minus the
    observed indicator.

    Returns ``(loss, grad_score, grad_transitions)``.
    """
    score, transitions = _check(score, transitions)
    labels = _check_labels(score, labels)
    table = forward_alpha(score, transitions)
    m, tau = score.shape

    grad_alpha = np.zeros_like(score)
    grad_alpha[-1] = softmax(table.alpha[-1])
    grad_trans = np.zeros_like(transitions)
    for t in range(m - 1, 0, -1):
        flow = table.weights[t - 1] * grad_alpha[t][None, :]
        grad_trans += flow
        grad_alpha[t - 1] += flow.sum(axis=1)
    grad_score = grad_alpha

    rows = np.arange(m)
    grad_score[rows, labels] -= 1.0
    np.subtract.at(grad_trans, (labels[:-1], labels[1:]), 1.0)
    loss = table.log_z - path_score(score, transitions, labels)
    return loss, grad_score, grad_trans


def marginals(score, transitions):
    """Per-position posterior label probabilities, shape ``[m, tau]``."""
    score, transitions = _check(score, transitions)
    dummy = np.zeros(score.shape[0], dtype=np.intp)
    _, grad, _ = loss_backward(score, transitions, dummy)
    grad[np.arange(score.shape[0]), dummy] += 1.0
    return grad


def viterbi(score, transitions):
    """Highest-scoring label path; ties go to the lowest label index."""
    score, transitions = _check(score, transitions)
    m, tau = score.shape
    best = score[0].copy()
    back = np.zeros((m, tau), dtype=np.intp)
    for i in range(1, m):
        cand = best[:, None] + transitions
        # np.argmax returns the first maximum, i.e. the lowest index.
        back[i] = np.argmax(cand, axis=0)
        best = score[i] + cand[back[i], np.arange(tau)]
    path = np.empty(m, dtype=np.intp)
    path[-1] = int(np.argmax(best))
    for j in range(m - 1, 0, -1):
        path[j - 1] = back[j, path[j]]
    return path


@dataclass
class OracleResult:
    log_z: float
    best_path: np.ndarray
    best_score: float
    marginals: np.ndarray


def brute_force_oracle(score, transitions):
    """Exhaustive enumeration of every label path.

    Ties for the best path are broken the way backpointer decoding with a
    lowest-index rule resolves them: compare candidate paths from the last
    position backwards and keep the smallest.
    """
    score, transitions = _check(score, transitions)
    m, tau = score.shape
    if m > MAX_ORACLE_LENGTH:
        raise DomainError(
            f"refusing to enumerate {tau}^{m} paths (limit m <= {MAX_ORACLE_LENGTH})"
        )
    paths = np.array(list(itertools.product(range(tau), repeat=m)), dtype=np.intp)
    totals = score[0, paths[:, 0]]
    for t in range(1, m):
        totals = totals + transitions[paths[:, t - 1], paths[:, t]] + score[t, paths[:, t]]

    top = totals.max()
    log_z = float(top + np.log(np.exp(totals - top).sum()))
    prob = np.exp(totals - log_z)
    marg = np.zeros((m, tau))
    for t in range(m):
        np.add.at(marg[t], paths[:, t], prob)

    winners = paths[totals == top]
    # lexsort treats its last key as primary: order by the final position first.
    order = np.lexsort(tuple(winners[:, t] for t in range(m)))
    best = winners[order[0]]
    return OracleResult(log_z, best, float(top), marg)
