"""q-stability: dimension-free bounds, exact small-n set stability, OT divergences.

The stability <-> resolvability identity
    -log ||P_{X|Y}^{x n}(A|.)||_q = -log P_X^{x n}(A) - (1/q') D_q(Q_{Y^n}||P_Y^{x n})
is verified exactly by ``exact_set_stability``.  The binary record functions
work in bits (base-2 convention of the binary corollaries); everything else
is in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optim import DEFAULT_CONFIG, OptimizerConfig, OptResult, optimize_simplex, scalar_optimize
from .prob import (
    Channel,
    FiniteDistribution,
    GuardExceededError,
    JointDistribution,
    binary_entropy_bits,
    conjugate_order,
    cross_entropy,
    log_lq_norm,
    renyi_divergence,
    tensor_power,
)
from .resolvability import _ipf_coupling, _transport_feasible

__all__ = [
    "StabilityInstance",
    "BinaryCoupling",
    "EtaValues",
    "eta_functions",
    "qstability_bound",
    "exact_set_stability",
    "SetStabilityResult",
    "ot_divergence",
    "binary_ot",
    "BinaryOTResult",
    "binary_qstability",
    "BinaryQStability",
]


@dataclass(frozen=True)
class StabilityInstance:
    """Joint source, Renyi order and exponent alpha = -(1/n) log P_X^{x n}(A)."""

    joint: JointDistribution
    q: float
    alpha: float  # nats/symbol

    def __post_init__(self):
        if self.alpha < -1e-12:
            raise ValueError("alpha must be >= 0")
        px = self.joint.marginal_x.atoms
        amax = float(-np.log(px[px > 0].min()))
        if self.alpha > amax + 1e-9:
            raise ValueError(f"alpha exceeds max_x log(1/P_X(x)) = {amax:.6f}")


@dataclass(frozen=True)
class BinaryCoupling:
    """Marginal biases, disagreement probability and the DSBS reference."""

    a: float
    b: float
    delta: float
    eps: float

    def __post_init__(self):
        lo = abs(self.a - self.b)
        hi = min(self.a + self.b, 2.0 - self.a - self.b)
        if not lo - 1e-12 <= self.delta <= hi + 1e-12:
            raise ValueError("delta outside the coupling window")

    @property
    def kappa(self) -> float:
        return ((1.0 - self.eps) / self.eps) ** 2

    @property
    def matrix(self) -> np.ndarray:
        a, b, d = self.a, self.b, self.delta
        return 0.5 * np.array([[(1 - a) + (1 - b) - d, b - a + d],
                               [a - b + d, a + b - d]])


@dataclass(frozen=True)
class EtaValues:
    eta: float
    eta_hat: float


def eta_functions(r: float, QXY: JointDistribution, PXY: JointDistribution,
                  alpha: float) -> EtaValues:
    """eta_r and eta-hat_r of a candidate joint against the source joint (nats).

    eta_r = D(Q_{Y|X}||P_{Y|X}|Q_X) - (1/r) D(Q_Y||P_Y); eta-hat additionally
    trades the output-marginal term for the cross-entropy window term.
    1/r is 0 at r = +-inf; r = 0 is rejected.
    """
    if r == 0:
        raise ZeroDivisionError("eta functions are undefined at r = 0")
    inv_r = 0.0 if math.isinf(r) else 1.0 / r
    q_m, p_m = QXY.matrix, PXY.matrix
    qx = q_m.sum(axis=1)
    cond = _kl_matrix(q_m, np.where(qx[:, None] > 0, p_m / np.where(
        p_m.sum(axis=1)[:, None] > 0, p_m.sum(axis=1)[:, None], 1.0) * qx[:, None], 0.0))
    d_out = renyi_divergence(QXY.marginal_y, PXY.marginal_y, 1.0)
    cond_to_py = _kl_matrix(q_m, qx[:, None] * PXY.marginal_y.atoms[None, :])
    hq = cross_entropy(QXY.marginal_x, PXY.marginal_x)
    eta = cond - inv_r * d_out
    eta_hat = cond - inv_r * cond_to_py - inv_r * (alpha - hq)
    return EtaValues(eta=eta, eta_hat=eta_hat)


def _kl_matrix(q: np.ndarray, p: np.ndarray) -> float:
    m = q > 0
    if np.any(m & (p <= 0)):
        return math.inf
    return float(np.sum(q[m] * (np.log(q[m]) - np.log(p[m]))))


def _window_terms(QX: np.ndarray, PX: np.ndarray):
    d = _kl_matrix(QX[:, None], PX[:, None])
    m = QX > 0
    h = math.inf if np.any(m & (PX <= 0)) else float(-np.sum(QX[m] * np.log(PX[m])))
    return d, h


def qstability_bound(inst: StabilityInstance, cfg: OptimizerConfig | None = None) -> OptResult:
    """Sharp dimension-free bound on -(1/n) log ||P_{X|Y}^{x n}(A|.)||_q (nats).

    Statement 1 (q >= 1): upper bound; statements 2 (0<q<1) and 3 (q<0):
    lower bounds.  The outer candidate Q_X is constrained to the window
    D(Q_X||P_X) <= alpha <= H(Q_X, P_X).
    """
    cfg = cfg or DEFAULT_CONFIG
    q, alpha = inst.q, inst.alpha
    P = inst.joint
    PX, PY = P.marginal_x.atoms, P.marginal_y.atoms
    W = P.channel_y_given_x().rows
    nx, ny = W.shape
    qp = conjugate_order(q)
    inv_qp = 0.0 if math.isinf(qp) else 1.0 / qp
    supports = [np.flatnonzero(W[x] > 0) for x in range(nx)]
    log_w = [np.log(W[x, supports[x]]) for x in range(nx)]
    log_py = [np.log(PY[supports[x]]) for x in range(nx)]

    if q > 0:
        def inner(QX: np.ndarray, combine) -> float:
            d_qx, h_qx = _window_terms(QX, PX)

            def val(blocks):
                cond = 0.0
                cond_py = 0.0
                qy = np.zeros(ny)
                for i, x in enumerate(np.flatnonzero(QX > 0)):
                    r = blocks[i]
                    qy[supports[x]] += QX[x] * r
                    m = r > 0
                    rl = r[m] * np.log(r[m])
                    cond += QX[x] * float(np.sum(rl - r[m] * log_w[x][m]))
                    cond_py += QX[x] * float(np.sum(rl - r[m] * log_py[x][m]))
                mq = qy > 0
                d_out = float(np.sum(qy[mq] * (np.log(qy[mq]) - np.log(PY[mq]))))
                eta = cond - inv_qp * d_out
                eta_hat = cond - inv_qp * cond_py - inv_qp * (alpha - h_qx)
                return combine(eta_hat, eta)

            dims = [supports[x].size for x in np.flatnonzero(QX > 0)]
            x0 = [[W[x, supports[x]] for x in np.flatnonzero(QX > 0)]]
            r = optimize_simplex(val, dims, "min",
                                 OptimizerConfig(value_tol=1e-9, max_iters=60, n_starts=4,
                                                 grid_schedule=(8, 12), seed=cfg.seed + 1),
                                 x0_list=x0)
            return r.value

        combine = min if q >= 1.0 else max
        outer_sense = "max" if q >= 1.0 else "min"
        fail = -math.inf if outer_sense == "max" else math.inf

        def outer(blocks):
            QX = blocks[0]
            d_qx, h_qx = _window_terms(QX, PX)
            if d_qx > alpha + 1e-9 or alpha > h_qx + 1e-9:
                return fail
            return inner(QX, combine)

        def pen(blocks):
            d_qx, h_qx = _window_terms(blocks[0], PX)
            return max(d_qx - alpha, 0.0) + max(alpha - h_qx, 0.0)

        def feas(blocks):
            d_qx, h_qx = _window_terms(blocks[0], PX)
            return d_qx <= alpha + 1e-7 and alpha <= h_qx + 1e-7

        res = optimize_simplex(outer, [nx], outer_sense, cfg, feasible=feas, penalty=pen,
                               x0_list=[[PX.copy()]])
        if res.status == "infeasible":
            return res
        return OptResult(alpha + res.value, res.args, res.status, res.gap + 1e-6,
                         {"statement": 1 if q >= 1 else 2})

    # q < 0 (statement 3): outer over Q_Y, inner over couplings Q_{X|Y}
    col_sup = [np.flatnonzero(W[:, y] > 0) for y in range(ny)]

    def inner_value(QY: np.ndarray) -> float:
        ys = np.flatnonzero(QY > 0)
        if any(col_sup[y].size == 0 for y in ys):
            return math.inf

        def assemble(blocks):
            joint = np.zeros((nx, ny))
            for i, y in enumerate(ys):
                joint[col_sup[y], y] = QY[y] * blocks[i]
            return joint

        def val(blocks):
            joint = assemble(blocks)
            QX = joint.sum(axis=1)
            m = joint > 0
            cond = float(np.sum(joint[m] * (np.log(joint[m])
                                            - np.log((QX[:, None] * W)[m]))))
            d_out = _kl_matrix(QY[:, None], PY[:, None])
            d_qx, h_qx = _window_terms(QX, PX)
            eta = cond - inv_qp * d_out
            return eta + max(d_qx - alpha, 0.0)

        def constraint(blocks):
            joint = assemble(blocks)
            QX = joint.sum(axis=1)
            m = joint > 0
            i_q = float(np.sum(joint[m] * (np.log(joint[m])
                                           - np.log(np.outer(QX, QY)[m]))))
            _, h_qx = _window_terms(QX, PX)
            return i_q - (h_qx - alpha)

        dims = [col_sup[y].size for y in ys]
        # the statement-3 inner is a convex program in the coupling blocks
        loc = OptimizerConfig(value_tol=1e-9, max_iters=60, n_starts=2,
                              grid_schedule=(6,), seed=cfg.seed + 1, vertex_starts=False)
        r = optimize_simplex(val, dims, "min", loc,
                             feasible=lambda b: constraint(b) <= 1e-7,
                             penalty=lambda b: max(constraint(b), 0.0),
                             x0_list=[[PX[col_sup[y]] * W[col_sup[y], y]
                                       / float(PX[col_sup[y]] @ W[col_sup[y], y]) for y in ys]])
        return r.value if r.status != "infeasible" else math.inf

    res = optimize_simplex(lambda b: inner_value(b[0]), [ny], "max", cfg,
                           x0_list=[[PY.copy()]])
    return OptResult(alpha + res.value, res.args, res.status, res.gap + 1e-6, {"statement": 3})


# ---------------------------------------------------------------------------
# exact small-n stability


@dataclass(frozen=True)
class SetStabilityResult:
    minus_log_norm: float
    identity_rhs: float
    residual: float
    divergence: float  # D_q(Q_{Y^n} || P_Y^{x n}) in nats
    log_set_prob: float


def exact_set_stability(A, PXY: JointDistribution, n: int, q) -> SetStabilityResult:
    """-log ||P_{X|Y}^{x n}(A|.)||_q exactly, plus the resolvability identity check.

    ``A`` is a collection of base-|X| row-major indices into X^n.
    """
    A = np.asarray(sorted(set(int(a) for a in A)), dtype=np.int64)
    if A.size == 0:
        raise ValueError("A must be nonempty")
    nx, ny = PXY.matrix.shape
    if (nx * ny) ** n > 2**24:
        raise GuardExceededError("joint alphabet too large to enumerate")
    q = float(q)

    PXn = tensor_power(PXY.marginal_x, n)
    PYn = tensor_power(PXY.marginal_y, n)
    Wn = tensor_power(PXY.channel_y_given_x(), n)
    Kn = tensor_power(PXY.channel_x_given_y(), n)

    g = Kn.rows[:, A].sum(axis=1)
    mlog_norm = -log_lq_norm(g, PYn, q)

    pa = float(PXn.atoms[A].sum())
    qyn = (PXn.atoms[A][:, None] * Wn.rows[A]).sum(axis=0) / pa
    QYn = FiniteDistribution(qyn)
    if abs(q) < 1e-12:
        div = renyi_divergence(QYn, PYn, 0.0)
        rhs = -math.log(pa) + renyi_divergence(PYn, QYn, 1.0)
    else:
        div = renyi_divergence(QYn, PYn, q)
        inv_qp = (q - 1.0) / q
        rhs = -math.log(pa) - inv_qp * div
    return SetStabilityResult(minus_log_norm=mlog_norm, identity_rhs=rhs,
                              residual=abs(mlog_norm - rhs), divergence=div,
                              log_set_prob=math.log(pa))


# ---------------------------------------------------------------------------
# optimal-transport divergences


def ot_divergence(QX: FiniteDistribution, QY: FiniteDistribution, PXY: JointDistribution,
                  rate_cap: float | None = None) -> OptResult:
    """min_{couplings of (Q_X, Q_Y)} D(Q_XY || P_XY), optionally with I_Q <= R.

    Convex; solved by iterative proportional fitting (I-projection), with a
    64-multiplier sweep plus bisection when the information cap binds.
    """
    P = PXY.matrix
    support = P > 0
    if not _transport_feasible(support, QX.atoms, QY.atoms):
        return OptResult(math.inf, tuple(), "infeasible", 0.0,
                         {"reason": "no coupling inside supp(P_XY)"})

    prod = np.outer(QX.atoms, QY.atoms)

    def project(mu: float):
        if mu == 0.0:
            base = P.copy()
        else:
            w = 1.0 / (1.0 + mu)
            base = np.where(support & (prod > 0), P**w * prod**(1.0 - w), 0.0)
        Q = _ipf_coupling(support, QX.atoms, QY.atoms, base=base)
        if Q is None:
            return None
        m = Q > 0
        d = float(np.sum(Q[m] * (np.log(Q[m]) - np.log(P[m]))))
        pm = prod > 0
        i_q = float(np.sum(Q[m & pm] * (np.log(Q[m & pm]) - np.log(prod[m & pm]))))
        return Q, d, i_q

    out = project(0.0)
    if out is None:
        return OptResult(math.inf, tuple(), "infeasible", 0.0, {})
    Q, d, i_q = out
    if rate_cap is None or math.isinf(rate_cap) or i_q <= rate_cap + 1e-11:
        return OptResult(d, (Q,), "converged", 1e-10, {"I": i_q, "capped": False})

    mus = np.logspace(-3, 3, 64)
    lo, hi = 0.0, None
    for mu in mus:
        _, d_m, i_m = project(mu)
        if i_m <= rate_cap:
            hi = mu
            break
        lo = mu
    if hi is None:
        hi = mus[-1]
        while True:
            hi *= 4.0
            _, d_m, i_m = project(hi)
            if i_m <= rate_cap or hi > 1e12:
                break
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        _, d_m, i_m = project(mid)
        if i_m <= rate_cap:
            hi = mid
        else:
            lo = mid
    Q, d, i_q = project(hi)
    status = "converged" if i_q <= rate_cap + 1e-8 else "max_iter"
    return OptResult(d, (Q,), status, 1e-9, {"I": i_q, "capped": True, "mu": hi})


@dataclass(frozen=True)
class BinaryOTResult:
    delta_star: float
    D_min_bits: float          # OT divergence at delta*
    I_star_bits: float         # mutual information of the minimizing coupling
    D_R_bits: float | None     # information-constrained value (when R given)
    delta_hat: float | None
    D_at_delta_bits: float | None  # D_{a,b}(delta||eps) when delta supplied


def _coupling_cells(a: float, b: float, delta: float):
    delta = min(max(delta, abs(a - b)), min(a + b, 2.0 - a - b))
    return (max(((1 - a) + (1 - b) - delta) / 2, 0.0), max((b - a + delta) / 2, 0.0),
            max((a - b + delta) / 2, 0.0), max((a + b - delta) / 2, 0.0))


def _d_ab_bits(a: float, b: float, delta: float, eps: float) -> float:
    cells = _coupling_cells(a, b, delta)
    ref = ((1 - eps) / 2, eps / 2, eps / 2, (1 - eps) / 2)
    total = 0.0
    for c, p in zip(cells, ref):
        if c > 0:
            total += c * math.log2(c / p)
    return total


def binary_ot(a: float, b: float, eps: float, delta: float | None = None,
              R: float | None = None) -> BinaryOTResult:
    """Closed-form binary OT divergence against DSBS(eps): delta*, and the
    information-constrained variant via the entropy root equation.  Bits."""
    for v, name in ((a, "a"), (b, "b")):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0,1]")
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    kappa = ((1.0 - eps) / eps) ** 2
    disc = ((kappa - 1.0) * (a + b) + 1.0) ** 2 - 4.0 * kappa * (kappa - 1.0) * a * b
    delta_star = (math.sqrt(max(disc, 0.0)) - 1.0) / (kappa - 1.0)
    conv = a * (1.0 - b) + b * (1.0 - a)
    delta_star = min(max(delta_star, abs(a - b)), conv)
    d_min = _d_ab_bits(a, b, delta_star, eps)
    h_star = _entropy_of_coupling_bits(a, b, delta_star)
    i_star = binary_entropy_bits(a) + binary_entropy_bits(b) - h_star
    d_r = None
    delta_hat = None
    if R is not None:
        if R >= i_star - 1e-12:
            d_r = d_min
        else:
            target = binary_entropy_bits(a) + binary_entropy_bits(b) - R
            lo, hi = delta_star, conv
            for _ in range(64):
                mid = 0.5 * (lo + hi)
                if _entropy_of_coupling_bits(a, b, mid) < target:
                    lo = mid
                else:
                    hi = mid
            delta_hat = 0.5 * (lo + hi)
            d_r = _d_ab_bits(a, b, delta_hat, eps)
    d_at = _d_ab_bits(a, b, delta, eps) if delta is not None else None
    return BinaryOTResult(delta_star=delta_star, D_min_bits=d_min, I_star_bits=i_star,
                          D_R_bits=d_r, delta_hat=delta_hat, D_at_delta_bits=d_at)


def _entropy_of_coupling_bits(a: float, b: float, delta: float) -> float:
    return -sum(c * math.log2(c) for c in _coupling_cells(a, b, delta) if c > 0)


# ---------------------------------------------------------------------------
# binary q-stability closed forms (bits)


_LIGHT = OptimizerConfig(value_tol=1e-10, scalar_grid=33)


@dataclass(frozen=True)
class BinaryQStability:
    bound_bits: float
    statement: int
    branch: str | None = None
    boundary: bool = False


def binary_qstability(eps: float, q: float, alpha: float) -> BinaryQStability:
    """DSBS(eps) bounds on -(1/n) log2 ||P_{X|Y}^{x n}(A|.)||_q, alpha in bits."""
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if not 0.0 <= alpha <= 1.0 + 1e-12:
        raise ValueError("alpha must lie in [0,1] bits for the DSBS")
    q = float(q)
    if q >= 1.0 or q == math.inf:
        from .prob import binary_renyi
        hq = binary_renyi(eps, q).entropy_bits
        inv_qp = 0.0 if q == 1.0 else (q - 1.0) / q if not math.isinf(q) else 1.0
        return BinaryQStability(bound_bits=alpha - inv_qp * max(alpha - hq, 0.0), statement=1)
    if q > 0.0:
        from .prob import binary_renyi
        inv_qp = (q - 1.0) / q  # negative
        eps_q = eps**q / (eps**q + (1.0 - eps) ** q)
        dq_eps = binary_renyi(eps, q).divergence_bits
        a_lo = _inverse_binary_entropy(1.0 - alpha)

        def i_q_of(a: float) -> float:
            conv = a * (1 - eps_q) + (1 - a) * eps_q
            return binary_entropy_bits(conv) - binary_entropy_bits(eps_q)

        def branch_value(a: float):
            i_q = i_q_of(a)
            c1 = -inv_qp * (dq_eps - (1.0 - alpha))
            if abs((1.0 - alpha) - i_q) <= 1e-12:
                c2 = _stmt2_second_branch(a, eps, alpha, inv_qp)
                return min(c1, c2), "boundary"
            if 1.0 - alpha < i_q:
                return c1, "low-rate"
            return _stmt2_second_branch(a, eps, alpha, inv_qp), "ot"

        grid = np.linspace(a_lo, 0.5, 41)
        vals = [branch_value(float(a))[0] for a in grid]
        i0 = int(np.argmin(vals))
        lo = grid[max(i0 - 1, 0)]
        hi = grid[min(i0 + 1, len(grid) - 1)]
        r = scalar_optimize(lambda a: branch_value(a)[0], (lo, hi), "min", _LIGHT)
        best_a = float(r.args[0])
        val, br = branch_value(best_a)
        return BinaryQStability(bound_bits=alpha + val, statement=2, branch=br,
                                boundary=(br == "boundary"))
    # q < 0 (statement 3)
    qp = q / (q - 1.0)
    inv_qp = 1.0 / qp if q != -math.inf else 1.0

    def inner_min_a(b: float) -> float:
        def h(a: float) -> float:
            ot = binary_ot(a, b, eps, R=1.0 - alpha)
            da = 1.0 - binary_entropy_bits(a)
            db = 1.0 - binary_entropy_bits(b)
            return ot.D_R_bits - da - inv_qp * db + max(da - alpha, 0.0)
        r = scalar_optimize(h, (0.0, 1.0), "min", _LIGHT)
        return r.value

    r = scalar_optimize(inner_min_a, (0.0, 1.0), "max", _LIGHT)
    return BinaryQStability(bound_bits=alpha + r.value, statement=3)


def _stmt2_second_branch(a: float, eps: float, alpha: float, inv_qp: float) -> float:
    def h(b: float) -> float:
        ot = binary_ot(a, b, eps, R=1.0 - alpha)
        return ot.D_R_bits - inv_qp * (1.0 - binary_entropy_bits(b)) \
            - (1.0 - binary_entropy_bits(a))
    r = scalar_optimize(h, (0.0, 1.0), "min", _LIGHT)
    return r.value


def _inverse_binary_entropy(h: float) -> float:
    """The a in [0, 1/2] with H(a) = h (bits)."""
    if h <= 0:
        return 0.0
    if h >= 1:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if binary_entropy_bits(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
