"""One-shot (blocklength-1) random-coding bounds with Stirling partition numbers.

The bounded quantity is the codebook-ensemble moment
E_C[ sum_y Q_{Y|C}(y)^q P_Y(y)^(1-q) ] = e^{(q-1) D_q(Q_{Y|C} || P_Y | Q_C)},
reported here as a log-value.  ``codesim.ensemble_moment_exact`` provides the
exact small-ensemble oracle the sandwich tests compare against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .optim import DEFAULT_CONFIG, scalar_optimize
from .prob import (
    Channel,
    FiniteDistribution,
    compose_marginal,
    conditional_renyi_divergence,
    renyi_divergence,
)

__all__ = ["OneShotInstance", "stirling_partition", "beta_bound", "BetaBound",
           "oneshot_bounds", "OneShotBounds"]


@lru_cache(maxsize=None)
def _stirling_row(m: int) -> tuple:
    if m == 0:
        return (1,)
    prev = _stirling_row(m - 1)
    row = [0] * (m + 1)
    for k in range(1, m + 1):
        row[k] = k * prev[k] if k < len(prev) else 0
        if k - 1 < len(prev):
            row[k] += prev[k - 1]
    return tuple(row)


def stirling_partition(m: int, k: int) -> int:
    """Stirling partition number S(m, k), exact via the triangular recurrence."""
    if m < 0 or k < 0:
        raise ValueError("arguments must be >= 0")
    if k > m:
        return 0
    return _stirling_row(m)[k]


@dataclass(frozen=True)
class OneShotInstance:
    """Input law, channel, reference measure and rate for the one-shot bounds.

    M = e^R need not be an integer here; simulation cross-checks round it and
    recompute R = log M on their side.
    """

    QX: FiniteDistribution
    W: Channel
    PY: FiniteDistribution
    R: float  # nats
    q: float

    def __post_init__(self):
        if self.R < 0:
            raise ValueError("rate must be >= 0")
        if self.q < 1:
            raise ValueError("the one-shot bounds cover q >= 1")
        if self.W.input_dim != self.QX.dim or self.W.output_dim != self.PY.dim:
            raise ValueError("alphabet mismatch")

    @property
    def QY(self) -> FiniteDistribution:
        return compose_marginal(self.QX, self.W)


def _cond_div(inst: OneShotInstance, order: float) -> float:
    ref = Channel(np.tile(inst.PY.atoms, (inst.W.input_dim, 1)))
    return conditional_renyi_divergence(inst.W, ref, inst.QX, order)


@dataclass(frozen=True)
class BetaBound:
    t: float
    log_beta: float
    s_star: float
    log_relax_fixed_q: float    # eq. with both orders pinned to q
    log_relax_infty: float      # eq. with the D_infty tail term


def beta_bound(t: float, inst: OneShotInstance) -> BetaBound:
    """log beta(t) = inf_{s >= q-t} (q-t)(D_{1+s}(W||P_Y|Q_X) - R) + (t-1) D_h(Q_Y||P_Y).

    h = 1 + s(t-1)/(s+t-q); the left endpoint s = q-t uses the D_infty limit.
    Also returns the two closed relaxations (s = q-1 and s = q-t).
    """
    q, R = inst.q, inst.R
    if not 1.0 <= t <= q + 1e-12:
        raise ValueError("t must lie in [1, q]")
    QY = inst.QY

    if q - t <= 1e-12:
        # t = q: the objective is constant (q-1) D_q(Q_Y||P_Y) for s > 0
        lb = (q - 1.0) * renyi_divergence(QY, inst.PY, q)
        return BetaBound(t=t, log_beta=lb, s_star=0.0, log_relax_fixed_q=lb, log_relax_infty=lb)

    def objective(s: float) -> float:
        if s <= q - t + 1e-13:
            inner = math.inf
        else:
            inner = 1.0 + s * (t - 1.0) / (s + t - q)
        d1 = _cond_div(inst, 1.0 + s)
        d2 = renyi_divergence(QY, inst.PY, inner) if t > 1.0 else 0.0
        return (q - t) * (d1 - R) + (t - 1.0) * d2

    # endpoint value (s = q - t, order -> infinity)
    end = (q - t) * (_cond_div(inst, 1.0 + q - t) - R)
    if t > 1.0:
        end += (t - 1.0) * renyi_divergence(QY, inst.PY, math.inf)
    res = scalar_optimize(objective, (q - t, q - t + 64.0), "min", DEFAULT_CONFIG)
    log_beta, s_star = res.value, float(res.args[0])
    if end < log_beta:
        log_beta, s_star = end, q - t

    relax_q = (q - t) * (_cond_div(inst, q) - R) + (t - 1.0) * renyi_divergence(QY, inst.PY, q)
    return BetaBound(t=t, log_beta=log_beta, s_star=s_star,
                     log_relax_fixed_q=relax_q, log_relax_infty=end)


@dataclass(frozen=True)
class OneShotBounds:
    log_upper: float | None      # q in [2, inf)
    log_upper_12: float | None   # q in (1, 2]
    log_lower: float | None      # q in [2, inf)


def oneshot_bounds(inst: OneShotInstance) -> OneShotBounds:
    """Upper/lower bounds on the log ensemble moment, per the applicable q-range."""
    q, R = inst.q, inst.R
    QY = inst.QY
    log_upper = None
    log_lower = None
    log_upper_12 = None

    if q >= 2.0:
        q_t = math.ceil(q) - 1
        q_h = q - q_t
        terms = []
        for t in range(1, q_t):
            s_mt = math.log(stirling_partition(q_t, t))
            b_t = beta_bound(float(t), inst).log_beta
            b_th = beta_bound(float(t) + q_h, inst).log_beta
            terms.append(s_mt + math.log(t) + b_t)
            terms.append(s_mt + b_th)
        terms.append(math.log(q_t) + beta_bound(q - 1.0, inst).log_beta)
        terms.append(beta_bound(q, inst).log_beta)
        log_upper = float(logsumexp(np.asarray(terms)))

        tail = (q - 1.0) * (_cond_div(inst, q) - R)
        if R > 0:
            head = (q - 1.0) * math.log1p(-math.exp(-R)) \
                + (q - 1.0) * renyi_divergence(QY, inst.PY, q)
            log_lower = float(np.logaddexp(head, tail))
        else:
            log_lower = tail  # single codeword: (1 - e^0)^(q-1) kills the head
    if 1.0 < q <= 2.0:
        log_upper_12 = float(np.logaddexp(
            (q - 1.0) * (_cond_div(inst, q) - R),
            (q - 1.0) * renyi_divergence(QY, inst.PY, q)))
    return OneShotBounds(log_upper=log_upper, log_upper_12=log_upper_12, log_lower=log_lower)
