"""Asymptotic resolvability formulas: forward/reverse limits, duals, rates, exponents.

Everything here is in nats except for the ``binary_closed_forms`` record,
which follows the base-2 convention of the binary corollaries.  The general
evaluators are honest variational solves over simplexes (no global-optimality
claim; a certified-gap field rides along); the binary closed forms are the
ground truth the test suite compares against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from .optim import DEFAULT_CONFIG, OptimizerConfig, OptResult, optimize_simplex, scalar_optimize
from .prob import (
    Channel,
    FiniteDistribution,
    JointDistribution,
    binary_renyi,
    compose_marginal,
    conditional_renyi_divergence,
    conjugate_order,
    expected_row_divergence,
    power_mean_log,
    renyi_divergence,
)

__all__ = [
    "ResolvabilityProblem",
    "ExponentReport",
    "forward_asymptotic",
    "reverse_asymptotic",
    "r_min",
    "dual_asymptotic",
    "resolvability_rate",
    "iid_divergence_limit",
    "iid_exponent",
    "typical_exponent",
    "binary_closed_forms",
    "BinaryClosedForms",
    "feasible_inputs_exist",
    "prune_forward",
]

_ORD = float


@dataclass(frozen=True)
class ResolvabilityProblem:
    """A channel, a target output law, a rate (nats/symbol) and a Renyi order."""

    channel: Channel
    target: FiniteDistribution
    rate: float
    q: float
    direction: str = "forward"

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("rate must be >= 0")
        if self.direction not in ("forward", "reverse"):
            raise ValueError("direction must be 'forward' or 'reverse'")
        if self.channel.output_dim != self.target.dim:
            raise ValueError("channel output and target dimensions differ")


def prune_forward(channel: Channel, target: FiniteDistribution):
    """Keep only inputs x with P_{Y|X=x} << P_Y (required when q > 1)."""
    keep = [x for x in range(channel.input_dim)
            if not np.any((channel.rows[x] > 0) & (target.atoms == 0))]
    if not keep:
        return [], None
    return keep, Channel(channel.rows[keep])


# ---------------------------------------------------------------------------
# forward direction


def _row_divergences(W: Channel, PY: FiniteDistribution, q: float) -> np.ndarray:
    return np.array([renyi_divergence(W.row(x), PY, q) for x in range(W.input_dim)])


def _inner_forward_dual(QX: np.ndarray, W: np.ndarray, PY: np.ndarray, qp: float,
                        cfg: OptimizerConfig) -> OptResult:
    """max_{S_Y} q' E_{Q_X} log E_{P_{Y|X}} (S_Y/P_Y)^{1/q'}  (concave in S_Y)."""
    ny = PY.size
    sup = PY > 0
    inv_qp = 1.0 / qp
    qx_pos = QX > 0
    qxp = QX[qx_pos]
    Wp = W[qx_pos]

    def phi(blocks):
        S = blocks[0]
        ratio = np.zeros(ny)
        ratio[sup] = (S[sup] / PY[sup]) ** inv_qp
        u = Wp @ ratio
        if np.any(u <= 0):
            return -math.inf
        return qp * float(np.sum(qxp * np.log(u)))

    if ny == 2:
        # concave in S_Y, so a coarse bracket grid is enough to seed golden
        def f1(t: float) -> float:
            return phi([np.array([1.0 - t, t])])
        r = scalar_optimize(f1, (0.0, 1.0), "max", replace(cfg, scalar_grid=9))
        return r

    def grad(blocks):
        S = blocks[0]
        ratio = np.zeros(ny)
        ratio[sup] = (np.clip(S[sup], 1e-300, None) / PY[sup]) ** inv_qp
        u = W @ ratio
        u = np.clip(u, 1e-300, None)
        coef = (QX / u) @ W  # per-y
        g = coef * ratio / np.clip(S, 1e-300, None)
        return [g]

    hints = [[PY.copy()], [np.full(ny, 1.0 / ny)]]
    loc = replace(cfg, n_starts=2, grid_schedule=(8,), max_iters=150)
    return optimize_simplex(phi, [ny], "max", loc, x0_list=hints, gradient=grad)


def _inner_forward_primal(QX: np.ndarray, W: np.ndarray, PY: np.ndarray, qp: float,
                          cfg: OptimizerConfig) -> OptResult:
    """max_{Q_{Y|X}} -q' D(Q_{Y|X}||P_{Y|X}|Q_X) + D(Q_Y||P_Y), raw simplex search."""
    nx, ny = W.shape

    def val(blocks):
        rows = np.stack(blocks)
        a = _cond_kl(QX, rows, W)
        if math.isinf(a):
            return -math.inf
        qy = QX @ rows
        c = renyi_divergence(FiniteDistribution(qy), FiniteDistribution(PY), 1.0)
        if math.isinf(c):
            return -math.inf
        return -qp * a + c

    # seed with the dual-optimal tilted rows for a few S_Y candidates
    hints = []
    for S in (PY, np.full(ny, 1.0 / ny)):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where((S > 0) & (PY > 0), (S / np.where(PY > 0, PY, 1.0)) ** (1.0 / qp), 0.0)
        rows = W * t[None, :]
        z = rows.sum(axis=1, keepdims=True)
        rows = np.where(z > 0, rows / np.where(z > 0, z, 1.0), W)
        hints.append([rows[x] for x in range(nx)])
    hints.append([W[x] for x in range(nx)])
    return optimize_simplex(val, [ny] * nx, "max", cfg, x0_list=hints)


def _cond_kl(QX: np.ndarray, Q_rows: np.ndarray, P_rows: np.ndarray) -> float:
    """D(Q_{Y|X} || P_{Y|X} | Q_X) in nats; +inf on a support violation."""
    total = 0.0
    for x in np.flatnonzero(QX > 0):
        qr, pr = Q_rows[x], P_rows[x]
        m = qr > 0
        if np.any(m & (pr <= 0)):
            return math.inf
        total += QX[x] * float(np.sum(qr[m] * (np.log(qr[m]) - np.log(pr[m]))))
    return total


def forward_asymptotic(prob: ResolvabilityProblem, fixed_type: FiniteDistribution | None = None,
                       cfg: OptimizerConfig | None = None, inner: str = "dual") -> OptResult:
    """Normalized forward limit lim (1/n) inf_f D_q(Q_{Y^n} || P_Y^{x n}).

    q in [1, inf] evaluates min_{Q_X} max{E_{Q_X}[D_q(P_{Y|X}||P_Y)] - R, G(Q_X)}
    where the inner maximum over Q_{Y|X} is taken through its dual over S_Y by
    default (``inner="primal"`` runs the raw search instead).  q in [0, 1)
    evaluates the joint min over (Q_X, Q_{Y|X}); a supplied ``fixed_type``
    skips the outer minimization and drops the o_n(1) term.
    """
    cfg = cfg or DEFAULT_CONFIG
    if prob.direction != "forward":
        raise ValueError("forward_asymptotic needs a forward-direction problem")
    q, R = _ORD(prob.q), prob.rate
    if q < 0:
        raise ValueError("forward asymptotics are defined for q in [0, inf]")
    W0, PY = prob.channel, prob.target

    if q >= 1.0:
        keep, W = (list(range(W0.input_dim)), W0) if q == 1.0 else prune_forward(W0, PY)
        if W is None:
            return OptResult(math.inf, tuple(), "infeasible", math.inf,
                             {"reason": "pruning emptied the input alphabet"})
        rowdiv = _row_divergences(W, PY, q)
        qp = conjugate_order(q)

        def value_at(QX: np.ndarray):
            lin = float(np.dot(QX, rowdiv)) - R if np.all(np.isfinite(rowdiv[QX > 0])) else math.inf
            if q == 1.0:
                qy = QX @ W.rows
                g = renyi_divergence(FiniteDistribution(qy), PY, 1.0)
                gap = cfg.value_tol
            elif inner == "dual":
                r = _inner_forward_dual(QX, W.rows, PY.atoms, qp, cfg)
                g, gap = r.value, r.gap
            else:
                r = _inner_forward_primal(QX, W.rows, PY.atoms, qp, cfg)
                g, gap = r.value, r.gap
            return max(lin, g), gap

        inner_gap = [cfg.value_tol]

        def objective(blocks):
            v, gp = value_at(blocks[0])
            inner_gap[0] = max(inner_gap[0], gp)
            return v

        if fixed_type is not None:
            QX_full = fixed_type.atoms
            if q > 1.0 and len(keep) < W0.input_dim:
                if np.any(np.delete(QX_full, keep) > 0):
                    return OptResult(math.inf, (QX_full,), "converged", cfg.value_tol,
                                     {"reason": "fixed type charges a pruned input"})
                QX_full = QX_full[keep]
            v, gp = value_at(QX_full)
            return OptResult(v, (QX_full,), "converged", gp, {"fixed_type": True})

        # the q >= 1 outer objective is convex in Q_X (max of linear and a
        # sup of linear functions), so a coarse outer grid is safe
        outer_cfg = replace(cfg, scalar_grid=17) if W.input_dim == 2 else cfg
        res = optimize_simplex(objective, [W.input_dim], "min", outer_cfg,
                               x0_list=[[np.full(W.input_dim, 1.0 / W.input_dim)]])
        return OptResult(res.value, res.args, res.status, res.gap + inner_gap[0],
                         {**res.meta, "kept_inputs": keep})

    # q in [0, 1): joint minimization with rows restricted to supp(W_x) & supp(P_Y)
    qp = conjugate_order(q)  # < 0 for q in (0,1); 0 at q = 0
    W = W0.rows
    nx, ny = W.shape
    sup_y = PY.atoms > 0
    supports = [np.flatnonzero((W[x] > 0) & sup_y) for x in range(nx)]
    log_w = [np.log(W[x, supports[x]]) for x in range(nx)]
    log_py = [np.log(PY.atoms[supports[x]]) for x in range(nx)]
    log_py_full = np.where(sup_y, np.log(np.where(sup_y, PY.atoms, 1.0)), 0.0)

    def objective_joint(row_blocks, QX, active):
        a = 0.0
        b = 0.0
        qy = np.zeros(ny)
        for i, x in enumerate(active):
            w = QX[x]
            r = row_blocks[i]
            qy[supports[x]] += w * r
            if w <= 0:
                continue
            m = r > 0
            rl = r[m] * np.log(r[m])
            a += w * float(np.sum(rl - r[m] * log_w[x][m]))
            b += w * float(np.sum(rl - r[m] * log_py[x][m]))
        mq = qy > 0
        c = float(np.sum(qy[mq] * (np.log(qy[mq]) - log_py_full[mq])))
        return -qp * a + max(b - R, c)

    joint_cfg = replace(cfg, grid_schedule=(8, 16), n_starts=min(cfg.n_starts, 10),
                        max_iters=min(cfg.max_iters, 120))

    if fixed_type is not None:
        QX = fixed_type.atoms
        active = [x for x in range(nx) if QX[x] > 0]
        if any(supports[x].size == 0 for x in active):
            return OptResult(math.inf, (QX,), "converged", cfg.value_tol,
                             {"reason": "no admissible outputs for a charged input"})
        dims = [supports[x].size for x in active]
        res = optimize_simplex(lambda bl: objective_joint(bl, QX, active),
                               dims, "min", joint_cfg,
                               x0_list=[[W[x, supports[x]] / W[x, supports[x]].sum() for x in active]])
        return OptResult(res.value, (QX,) + res.args, res.status, res.gap, {"fixed_type": True})

    active = [x for x in range(nx) if supports[x].size > 0]
    if not active:
        return OptResult(math.inf, tuple(), "infeasible", math.inf,
                         {"reason": "no admissible (x, y) pairs"})
    dims = [nx] + [supports[x].size for x in active]

    def obj(blocks):
        QX = blocks[0]
        if np.any(np.delete(QX, active) > 1e-12):
            return math.inf
        return objective_joint(blocks[1:], QX, active)

    x0 = [[np.full(nx, 1.0 / nx)] + [W[x, supports[x]] / W[x, supports[x]].sum() for x in active]]
    res = optimize_simplex(obj, dims, "min", joint_cfg, x0_list=x0)
    return OptResult(res.value, res.args, res.status, res.gap, res.meta)


# ---------------------------------------------------------------------------
# couplings via alternating minimization (convex subproblems, exact)


def _min_coupling_free_x(K: np.ndarray, QY: np.ndarray, iters: int = 2000, tol: float = 1e-13,
                         warm_rx: np.ndarray | None = None):
    """Minimize a*D(Q||Q_X W) + b*I(Q) encoded by kernel K(y,x) = W(y|x)^(a/(a+b)).

    Y-marginal fixed to QY, X-marginal free.  Returns (Q_{X|Y} rows, R_X)
    or None if some y in supp(QY) has an empty kernel row.
    """
    ny, nx = K.shape
    ys = np.flatnonzero(QY > 0)
    if np.any(K[ys].sum(axis=1) <= 0):
        return None
    RX = np.full(nx, 1.0 / nx) if warm_rx is None else np.clip(warm_rx, 1e-300, None)
    RX = RX / RX.sum()
    Q = np.zeros((ny, nx))
    Ks = K[ys]
    w = QY[ys]
    for _ in range(iters):
        T = Ks * RX[None, :]
        Z = T.sum(axis=1, keepdims=True)
        Qs = T / Z
        RX_new = w @ Qs
        if np.abs(RX_new - RX).max() < tol:
            RX = RX_new
            break
        RX = RX_new
    Q[ys] = Qs
    return Q, RX


def _coupling_stats(Q_xy_given_y: np.ndarray, QY: np.ndarray, W_rows: np.ndarray):
    """(D(Q||Q_X W), I_Q) for a coupling given as Q_{X|Y} rows."""
    joint = QY[:, None] * Q_xy_given_y  # (y, x)
    QX = joint.sum(axis=0)
    m = joint > 0
    Wt = W_rows.T
    if np.any(m & (Wt <= 0)):
        return math.inf, math.inf
    lj = np.log(joint[m])
    d = float(np.sum(joint[m] * (lj - np.log((QX[None, :] * Wt)[m]))))
    i_q = float(np.sum(joint[m] * (lj - np.log((QX[None, :] * QY[:, None])[m]))))
    return d, i_q


def _reverse_inner(QY: np.ndarray, W: Channel, R: float):
    """min D(Q_{Y|X}||P_{Y|X}|Q_X) over Q_{X|Y} with I_Q <= R (exact, convex)."""
    Wt = W.rows.T  # (y, x)
    warm = {"rx": None}

    def solve(mu: float):
        a = 1.0 / (1.0 + mu)
        K = np.where(Wt > 0, np.exp(a * np.log(np.where(Wt > 0, Wt, 1.0))), 0.0)
        out = _min_coupling_free_x(K, QY, warm_rx=warm["rx"])
        if out is None:
            return None
        Q, rx = out
        warm["rx"] = rx
        d, i_q = _coupling_stats(Q, QY, W.rows)
        return d, i_q

    out = solve(0.0)
    if out is None:
        return math.inf, {"inner": "no admissible coupling"}
    d0, i0 = out
    if i0 <= R + 1e-11:
        return d0, {"mu": 0.0, "I": i0}
    # grow mu until the information constraint is met
    lo, hi = 0.0, 1.0
    for _ in range(60):
        d_hi, i_hi = solve(hi)
        if i_hi <= R + 1e-12:
            break
        lo, hi = hi, hi * 2.0
    else:
        return math.inf, {"inner": "information floor above rate"}
    for _ in range(44):
        mid = 0.5 * (lo + hi)
        d_m, i_m = solve(mid)
        if i_m <= R:
            hi = mid
            d_hi, i_hi = d_m, i_m
        else:
            lo = mid
    if i_hi > R + 1e-8:
        return math.inf, {"inner": "feasibility check failed"}
    return d_hi, {"mu": hi, "I": i_hi}


def r_min(channel: Channel, target: FiniteDistribution,
          fixed_type: FiniteDistribution | None = None,
          cfg: OptimizerConfig | None = None) -> float:
    """R_min = max_{Q_Y << P_Y} min_{Q_{X|Y}: Q_{Y|X} << P_{Y|X}} I_Q(X;Y) (nats)."""
    cfg = cfg or DEFAULT_CONFIG
    if fixed_type is None and np.all(channel.rows > 0):
        return 0.0  # a full-support channel admits the independent coupling
    sup_y = np.flatnonzero(target.atoms > 0)
    mask = (channel.rows.T > 0).astype(float)  # (y, x)

    def inner_free(QY_sub: np.ndarray) -> float:
        QY = np.zeros(target.dim)
        QY[sup_y] = QY_sub
        out = _min_coupling_free_x(mask, QY)
        if out is None:
            return math.inf
        _, i_q = _coupling_stats(out[0], QY, channel.rows)
        return i_q

    def inner_fixed(QY_sub: np.ndarray) -> float:
        QY = np.zeros(target.dim)
        QY[sup_y] = QY_sub
        Q = _ipf_coupling(mask.T, fixed_type.atoms, QY)  # support mask in (x, y)
        if Q is None:
            return math.inf
        joint = Q  # (x, y) with both marginals matched
        QX = joint.sum(axis=1)
        m = joint > 0
        i_q = float(np.sum(joint[m] * np.log(joint[m] / (np.outer(QX, QY)[m]))))
        return i_q

    inner = inner_free if fixed_type is None else inner_fixed
    res = optimize_simplex(lambda b: inner(b[0]), [sup_y.size], "max", cfg,
                           x0_list=[[target.atoms[sup_y]]])
    return max(res.value, 0.0)


def _ipf_coupling(support_mask: np.ndarray, QX: np.ndarray, QY: np.ndarray,
                  base: np.ndarray | None = None, iters: int = 4000, tol: float = 1e-13):
    """I-projection of ``base`` (default: the support mask) onto Pi(QX, QY).

    Returns the coupling or None when the transportation problem is
    infeasible on the given support.
    """
    K = (support_mask if base is None else base).astype(float).copy()
    K[support_mask <= 0] = 0.0
    # quick LP feasibility on the support
    if not _transport_feasible(support_mask > 0, QX, QY):
        return None
    Q = K + 0.0
    for _ in range(iters):
        rs = Q.sum(axis=1)
        Q = np.where(rs[:, None] > 0, Q * (QX / np.where(rs > 0, rs, 1.0))[:, None], 0.0)
        cs = Q.sum(axis=0)
        Q = np.where(cs[None, :] > 0, Q * (QY / np.where(cs > 0, cs, 1.0))[None, :], 0.0)
        err = max(np.abs(Q.sum(axis=1) - QX).max(), np.abs(Q.sum(axis=0) - QY).max())
        if err < tol:
            return Q
    return Q if err < 1e-8 else None


def _transport_feasible(mask: np.ndarray, QX: np.ndarray, QY: np.ndarray) -> bool:
    nx, ny = mask.shape
    idx = [(x, y) for x in range(nx) for y in range(ny) if mask[x, y]]
    if not idx:
        return False
    A = []
    b = []
    for x in range(nx):
        A.append([1.0 if i == x else 0.0 for (i, _) in idx])
        b.append(QX[x])
    for y in range(ny):
        A.append([1.0 if j == y else 0.0 for (_, j) in idx])
        b.append(QY[y])
    r = linprog(c=np.zeros(len(idx)), A_eq=np.asarray(A), b_eq=np.asarray(b),
                bounds=[(0, None)] * len(idx), method="highs")
    return r.status == 0


def reverse_asymptotic(prob: ResolvabilityProblem, cfg: OptimizerConfig | None = None) -> OptResult:
    """Normalized reverse limit lim (1/n) inf_f D_q(P_Y^{x n} || Q_{Y^n}).

    +inf below R_min (and at R_min, flagged as a boundary: the theorems leave
    that point undecided).  q = 0 is the closed form min_x D_0(P_Y||P_{Y|X=x}).
    """
    cfg = cfg or DEFAULT_CONFIG
    if prob.direction != "reverse":
        raise ValueError("reverse_asymptotic needs a reverse-direction problem")
    q, R = _ORD(prob.q), prob.rate
    W, PY = prob.channel, prob.target

    if abs(q) < 1e-12:
        vals = [renyi_divergence(PY, W.row(x), 0.0) for x in range(W.input_dim)]
        x_star = int(np.argmin(vals))
        return OptResult(vals[x_star], tuple(), "converged", 0.0, {"argmin_x": x_star})
    if q < 1.0:
        raise ValueError("reverse asymptotics cover q in {0} u [1, inf]")

    rmin = r_min(W, PY, cfg=cfg)
    if R < rmin - 1e-9:
        return OptResult(math.inf, tuple(), "converged", 0.0, {"below_r_min": True, "r_min": rmin})
    if abs(R - rmin) <= 1e-9:
        return OptResult(math.inf, tuple(), "converged", 0.0, {"boundary": True, "r_min": rmin})

    qp = conjugate_order(q)
    sup_y = np.flatnonzero(PY.atoms > 0)

    if q == 1.0:
        d, meta = _reverse_inner(PY.atoms, W, R)
        return OptResult(d, (PY.atoms,), "converged", cfg.value_tol, {"r_min": rmin, **meta})

    def value(QY_sub: np.ndarray) -> float:
        QY = np.zeros(PY.dim)
        QY[sup_y] = QY_sub
        d, _ = _reverse_inner(QY, W, R)
        if math.isinf(d):
            return -math.inf  # dominated for the outer max
        pen = renyi_divergence(FiniteDistribution(QY), PY, 1.0)
        return d - qp * pen

    res = optimize_simplex(lambda b: value(b[0]), [sup_y.size], "max", cfg,
                           x0_list=[[PY.atoms[sup_y]]])
    val = max(res.value, 0.0) if res.value > -1e-12 else res.value
    return OptResult(val, res.args, res.status, res.gap + 1e-9, {"r_min": rmin})


# ---------------------------------------------------------------------------
# dual formulas


def _dual_forward_high(prob, fixed_type, cfg) -> OptResult:
    """(eq. dual of Stmt 1): max{E[rowdiv]-R, max_{S_Y} q' E log E (S/P)^(1/q')}, min over Q_X."""
    q, R = _ORD(prob.q), prob.rate
    keep, W = (list(range(prob.channel.input_dim)), prob.channel) if q == 1.0 \
        else prune_forward(prob.channel, prob.target)
    if W is None:
        return OptResult(math.inf, tuple(), "infeasible", math.inf, {})
    PY = prob.target
    rowdiv = _row_divergences(W, PY, q)
    qp = conjugate_order(q)
    gap_box = [cfg.value_tol]

    def val(QX):
        lin = float(np.dot(QX, rowdiv)) - R
        if q == 1.0:
            g = renyi_divergence(FiniteDistribution(QX @ W.rows), PY, 1.0)
        else:
            r = _inner_forward_dual(QX, W.rows, PY.atoms, qp, cfg)
            g = r.value
            gap_box[0] = max(gap_box[0], r.gap)
        return max(lin, g)

    if fixed_type is not None:
        QX = fixed_type.atoms[keep] if len(keep) < prob.channel.input_dim else fixed_type.atoms
        if QX.sum() < 1 - 1e-12:
            return OptResult(math.inf, tuple(), "converged", cfg.value_tol, {})
        return OptResult(val(QX), (QX,), "converged", gap_box[0], {"fixed_type": True})
    res = optimize_simplex(lambda b: val(b[0]), [W.input_dim], "min", cfg)
    return OptResult(res.value, res.args, res.status, res.gap + gap_box[0], res.meta)


def _dual_forward_low(prob, fixed_type, cfg) -> OptResult:
    """(eq:-90)/(eq:-97): lambda in [0,1] and S_Y, with min_x replacing E_{Q_X}."""
    q, R = _ORD(prob.q), prob.rate
    qp = conjugate_order(q)
    W, PY = prob.channel.rows, prob.target.atoms
    nx, ny = W.shape
    sup = PY > 0

    def lam_value(lam: float) -> float:
        denom = lam - qp  # > 0 for q in [0,1), lam in (0,1]
        if denom <= 0:
            return -math.inf
        e_w = -qp / denom
        e_p = 1.0 / denom
        e_s = (lam - 1.0) / denom

        def per_x(S):
            # log sum_y W^e_w P^e_p S^e_s; W^0 carries the support indicator,
            # and S_y = 0 under a negative exponent makes the sum infinite
            out = np.empty(nx)
            for x in range(nx):
                cells = (W[x] > 0) & sup
                if e_s < 0 and np.any(cells & (S <= 0)):
                    out[x] = math.inf
                    continue
                m = cells & (S > 0) if e_s != 0 else cells
                if not np.any(m):
                    out[x] = -math.inf
                    continue
                lt = e_p * np.log(PY[m])
                if e_w != 0:
                    lt = lt + e_w * np.log(W[x][m])
                if e_s != 0:
                    lt = lt + e_s * np.log(S[m])
                out[x] = logsumexp(lt)
            return out

        def phi(blocks):
            S = blocks[0]
            lg = per_x(S)
            if fixed_type is not None:
                qx = fixed_type.atoms
                if np.any(np.isinf(lg[qx > 0])):
                    return -math.inf
                core = -denom * float(np.dot(qx, lg))
            else:
                core = float(np.min(np.where(np.isposinf(lg), -math.inf, -denom * lg)))
            return core - lam * R

        loc = replace(cfg, n_starts=4, grid_schedule=(8, 16), max_iters=100)
        r = optimize_simplex(phi, [ny], "max", loc, x0_list=[[PY.copy()], [np.full(ny, 1.0 / ny)]])
        return r.value

    lo = 1e-6 if abs(q) < 1e-12 else 0.0
    r = scalar_optimize(lam_value, (lo, 1.0), "max", cfg)
    return OptResult(r.value, r.args, r.status, r.gap + 1e-6, {"lambda": r.args[0]})


def _dual_reverse(prob, fixed_type, cfg) -> OptResult:
    """(eq:-98) and its fixed-type extension with the tilting function f (eq:-96)."""
    q, R = _ORD(prob.q), prob.rate
    qp = conjugate_order(q)
    W, PY = prob.channel.rows, prob.target.atoms
    nx, ny = W.shape
    kappa_inf = (qp == 1.0)

    def lam_value(lam: float) -> float:
        a = 1.0 / (1.0 + lam)
        kappa = -math.inf if kappa_inf else (1.0 + lam) / (1.0 - qp)
        base = np.where(W > 0, W / np.where(PY[None, :] > 0, PY[None, :], 1.0), 0.0) ** a  # (x,y)

        def term(SX: np.ndarray, f: np.ndarray) -> float:
            tilt = np.exp(-f * a)
            U = (SX * tilt) @ base  # per-y
            if np.any(U[PY > 0] <= 0):
                return math.inf
            m = power_mean_log(np.log(U), PY, kappa)
            val = -(1.0 + lam) * m - lam * R
            if fixed_type is not None:
                val -= float(np.dot(fixed_type.atoms, f))
            return val

        if fixed_type is None:
            zero = np.zeros(nx)
            r = optimize_simplex(lambda b: term(b[0], zero), [nx], "min",
                                 replace(cfg, n_starts=4, grid_schedule=(8, 16), max_iters=100))
            return r.value

        # alternate: for a fixed f the S_X problem is a small simplex solve;
        # optimize f by pattern steps on a bounded box
        f = np.zeros(nx)
        best = -math.inf
        for _ in range(3):
            r = optimize_simplex(lambda b: term(b[0], f), [nx], "min",
                                 replace(cfg, n_starts=3, grid_schedule=(8,), max_iters=80))
            SX = r.args[0]
            step = 1.0
            while step > 1e-4:
                moved = False
                for i in range(nx):
                    for d in (step, -step):
                        f2 = f.copy()
                        f2[i] += d
                        if term(SX, f2) > term(SX, f):
                            f = f2
                            moved = True
                if not moved:
                    step *= 0.5
            best = max(best, r.value)
        r = optimize_simplex(lambda b: term(b[0], f), [nx], "min",
                             replace(cfg, n_starts=3, grid_schedule=(8,), max_iters=80))
        return r.value

    r = scalar_optimize(lam_value, (0.0, math.inf), "max", cfg)
    return OptResult(max(r.value, 0.0) if r.value > -1e-10 else r.value,
                     r.args, r.status, r.gap + 1e-6, {"lambda": r.args[0]})


def dual_asymptotic(prob: ResolvabilityProblem, fixed_type: FiniteDistribution | None = None,
                    cfg: OptimizerConfig | None = None) -> OptResult:
    """Dual-formula evaluation of the asymptotic limits (must agree with the primal)."""
    cfg = cfg or DEFAULT_CONFIG
    q = _ORD(prob.q)
    if prob.direction == "forward":
        if q >= 1.0:
            return _dual_forward_high(prob, fixed_type, cfg)
        return _dual_forward_low(prob, fixed_type, cfg)
    if q < 1.0:
        raise ValueError("reverse duals cover q in [1, inf]")
    return _dual_reverse(prob, fixed_type, cfg)


# ---------------------------------------------------------------------------
# resolvability rates


def feasible_inputs_exist(channel: Channel, target: FiniteDistribution) -> bool:
    """Whether P(P_{Y|X}, P_Y) = {P_X : P_X o P_{Y|X} = P_Y} is nonempty."""
    nx = channel.input_dim
    A = np.vstack([channel.rows.T, np.ones((1, nx))])
    b = np.concatenate([target.atoms, [1.0]])
    r = linprog(c=np.zeros(nx), A_eq=A, b_eq=b, bounds=[(0, None)] * nx, method="highs")
    return r.status == 0


def _min_linear_over_inputs(channel: Channel, target: FiniteDistribution, cost: np.ndarray) -> float:
    """min cost . P_X over the polytope {P_X >= 0, sum 1, P_X W = P_Y}."""
    nx = channel.input_dim
    finite = np.isfinite(cost)
    bounds = [(0.0, None) if finite[x] else (0.0, 0.0) for x in range(nx)]
    A = np.vstack([channel.rows.T, np.ones((1, nx))])
    b = np.concatenate([target.atoms, [1.0]])
    c = np.where(finite, cost, 0.0)
    r = linprog(c=c, A_eq=A, b_eq=b, bounds=bounds, method="highs")
    if r.status != 0:
        return math.inf
    return float(r.fun)


def _rhat_high(channel: Channel, target: FiniteDistribution, q: float,
               cfg: OptimizerConfig) -> float:
    """max_{Q_Y} min_{Q_{X|Y}: D(Q_{Y|X}||P_{Y|X}|Q_X) <= q' D(Q_Y||P_Y)} I_Q."""
    qp = conjugate_order(q)
    W = channel
    sup_y = np.flatnonzero(target.atoms > 0)
    Wt = W.rows.T

    def inner(QY: np.ndarray) -> float:
        budget = qp * renyi_divergence(FiniteDistribution(QY), target, 1.0)
        if math.isinf(budget):
            return -math.inf  # Q_Y not << P_Y never helps the max

        warm = {"rx": None}

        def solve(mu: float):
            a = mu / (1.0 + mu)
            K = np.where(Wt > 0, np.exp(a * np.log(np.where(Wt > 0, Wt, 1.0))), 0.0)
            out = _min_coupling_free_x(K, QY, warm_rx=warm["rx"])
            if out is None:
                return None
            warm["rx"] = out[1]
            return _coupling_stats(out[0], QY, W.rows)

        out = solve(0.0)
        if out is None:
            return -math.inf
        d0, i0 = out
        if d0 <= budget + 1e-11:
            return i0
        lo, hi = 0.0, 1.0
        for _ in range(60):
            out = solve(hi)
            if out is None:
                return -math.inf
            d_h, i_h = out
            if d_h <= budget + 1e-12:
                break
            lo, hi = hi, 2.0 * hi
        else:
            return math.inf
        for _ in range(70):
            mid = 0.5 * (lo + hi)
            d_m, i_m = solve(mid)
            if d_m <= budget:
                hi, d_h, i_h = mid, d_m, i_m
            else:
                lo = mid
        return i_h

    def value(QY_sub):
        QY = np.zeros(target.dim)
        QY[sup_y] = QY_sub
        return inner(QY)

    res = optimize_simplex(lambda b: value(b[0]), [sup_y.size], "max", cfg,
                           x0_list=[[target.atoms[sup_y]]])
    return res.value


def resolvability_rate(channel: Channel, target: FiniteDistribution, q,
                       direction: str = "forward", cfg: OptimizerConfig | None = None) -> float:
    """R_q / R-hat_q in nats; raises if no input distribution induces the target."""
    cfg = cfg or DEFAULT_CONFIG
    q = _ORD(q)
    if not feasible_inputs_exist(channel, target):
        raise ValueError("no input distribution induces the target (P(W, P_Y) empty)")
    mi_cost = np.array([renyi_divergence(channel.row(x), target, 1.0)
                        for x in range(channel.input_dim)])
    if direction == "forward":
        if q > 1.0:
            cost = _row_divergences(channel, target, q)
            return _min_linear_over_inputs(channel, target, cost)
        if q > 0.0:
            return _min_linear_over_inputs(channel, target, mi_cost)
        # q = 0: min I over couplings with Q_Y = P_Y, support inside supp(W)
        mask = (channel.rows.T > 0).astype(float)
        out = _min_coupling_free_x(mask, target.atoms)
        if out is None:
            return math.inf
        _, i_q = _coupling_stats(out[0], target.atoms, channel.rows)
        return i_q
    if direction != "reverse":
        raise ValueError("direction must be 'forward' or 'reverse'")
    if abs(q) < 1e-12:
        return 0.0
    min_mi = _min_linear_over_inputs(channel, target, mi_cost)
    if q < 1.0:
        return min_mi
    if q == 1.0:
        return max(r_min(channel, target, cfg=cfg), min_mi)
    val = _rhat_high(channel, target, q, cfg)
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# i.i.d. code limits and exponents


def iid_divergence_limit(QX: FiniteDistribution, channel: Channel, target: FiniteDistribution,
                         q, R: float, cfg: OptimizerConfig | None = None) -> float:
    """In-probability limit of (1/n) D_q(Q_{Y^n|C} || P_Y^{x n}) for i.i.d. codes (nats)."""
    cfg = cfg or DEFAULT_CONFIG
    q = _ORD(q)
    QY = compose_marginal(QX, channel)
    if q >= 1.0:
        a = conditional_renyi_divergence(channel, _constant_channel(target, channel.input_dim),
                                         QX, q)
        return max(a - R, renyi_divergence(QY, target, q))
    W, PY = channel.rows, target.atoms
    qya = QY.atoms

    def lam_val(lam: float) -> float:
        e_w = 1.0 - lam * (1.0 - q)
        e_q = (lam - 1.0) * (1.0 - q)
        terms = []
        for x in QX.support:
            for y in range(W.shape[1]):
                w = W[x, y]
                if PY[y] <= 0:
                    if w > 0:
                        return math.inf
                    continue
                if w <= 0:
                    if e_w > 0:
                        continue
                    w_term = 0.0 if qya[y] <= 0 else None
                    if w_term == 0.0:
                        continue
                    return math.inf
                lt = math.log(QX.atoms[x]) + (1.0 - q) * math.log(PY[y])
                if e_w != 0:
                    lt += e_w * math.log(w)
                if e_q != 0:
                    if qya[y] <= 0:
                        continue
                    lt += e_q * math.log(qya[y])
                terms.append(lt)
        if not terms:
            return math.inf
        return float(logsumexp(np.asarray(terms))) / (q - 1.0) - lam * R

    r = scalar_optimize(lam_val, (0.0, 1.0), "max", cfg)
    return r.value


def _constant_channel(dist: FiniteDistribution, n_inputs: int) -> Channel:
    return Channel(np.tile(dist.atoms, (n_inputs, 1)))


@dataclass(frozen=True)
class ExponentReport:
    exponent: float  # nats/symbol
    mechanism: str
    no_decay: bool = False
    warning: str | None = None
    inputs: dict = field(default_factory=dict)


def _gamma_iid(s: float, joint: JointDistribution, R: float) -> float:
    W = joint.channel_y_given_x()
    PX = joint.marginal_x
    PY = joint.marginal_y
    d = conditional_renyi_divergence(W, _constant_channel(PY, W.input_dim), PX, 1.0 + s)
    return s * (R - d)


def iid_exponent(joint: JointDistribution, q, R: float,
                 cfg: OptimizerConfig | None = None) -> ExponentReport:
    """Convergence exponent of D_q for the i.i.d. codebook ensemble.

    q in [2, inf): min{gamma(1), gamma(q-1)}; q in (0, 2]: max of gamma over
    the stated s-interval (gamma is concave in s); q = inf never decays.
    """
    cfg = cfg or DEFAULT_CONFIG
    q = _ORD(q)
    info = {"q": q, "R": R}
    if q == math.inf:
        W = joint.channel_y_given_x()
        d = conditional_renyi_divergence(W, _constant_channel(joint.marginal_y, W.input_dim),
                                         joint.marginal_x, math.inf)
        return ExponentReport(exponent=d, mechanism="D_inf constant", no_decay=True, inputs=info)
    if q <= 0:
        raise ValueError("i.i.d. exponents cover q in (0, inf]")
    if q >= 2.0:
        g1 = _gamma_iid(1.0, joint, R)
        g2 = _gamma_iid(q - 1.0, joint, R)
        exp_val = min(g1, g2)
        mech = "gamma(1)" if g1 <= g2 else f"gamma({q - 1:g})"
        warn = None
        if exp_val < 0:
            warn = "rate below D_q(P_{Y|X}||P_Y|P_X); no decay guaranteed"
        return ExponentReport(exponent=exp_val, mechanism=mech, warning=warn, inputs=info)
    s_lo = max(q - 1.0, 0.0)
    r = scalar_optimize(lambda s: _gamma_iid(s, joint, R), (s_lo, 1.0), "max", cfg)
    warn = None if r.value >= 0 else "rate below the soft-covering threshold"
    return ExponentReport(exponent=r.value, mechanism=f"gamma(s*) at s={r.args[0]:.6f}",
                          warning=warn, inputs=info)


def typical_exponent(joint: JointDistribution, q, R: float, eps: float,
                     cfg: OptimizerConfig | None = None) -> ExponentReport:
    """Exponent lower bound for typical codes, including the eps^2 P_min / 3 cap."""
    cfg = cfg or DEFAULT_CONFIG
    q = _ORD(q)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    W = joint.channel_y_given_x()
    PX, PY = joint.marginal_x, joint.marginal_y
    pmin = float(PX.atoms[PX.support].min())
    cap = eps * eps * pmin / 3.0
    info = {"q": q, "R": R, "eps": eps, "cap": cap}

    def gamma(s: float) -> float:
        return s * (R - (1.0 + eps) * expected_row_divergence(PX, W, PY, 1.0 + s))

    if q >= 2.0:
        cands = {"eps cap": cap, "gamma(1,eps)": gamma(1.0), f"gamma({q - 1:g},eps)": gamma(q - 1.0)}
        mech = min(cands, key=cands.get)
        val = cands[mech]
        warn = None
        if R <= (1.0 + eps) * expected_row_divergence(PX, W, PY, q):
            warn = "rate precondition violated"
        return ExponentReport(exponent=val, mechanism=mech, warning=warn, inputs=info)
    if q <= 0:
        raise ValueError("typical-code exponents cover q in (0, inf)")
    s_lo = max(q - 1.0, 0.0)
    r = scalar_optimize(gamma, (s_lo, 1.0), "max", cfg)
    val = min(cap, r.value)
    mech = "eps cap" if cap <= r.value else f"E_q at s={r.args[0]:.6f}"
    warn = None if r.value >= 0 else "rate below the soft-covering threshold"
    return ExponentReport(exponent=val, mechanism=mech, warning=warn, inputs=info)


# ---------------------------------------------------------------------------
# binary closed forms (bits)


def _tilt(eps: float, u: float) -> float:
    """sigma(u) = eps^u / (eps^u + (1-eps)^u)."""
    if u == 0.0:
        return 0.5
    a = u * math.log(eps)
    b = u * math.log1p(-eps)
    m = max(a, b)
    return math.exp(a - m) / (math.exp(a - m) + math.exp(b - m))


def _d_bits(a: float) -> float:
    """D(a || 1/2) = 1 - H(a) in bits."""
    return binary_renyi(a, 1.0).divergence_bits


@dataclass(frozen=True)
class BinaryClosedForms:
    eps: float
    q: float
    rate_bits: float
    forward_bits: float
    reverse_bits: float
    lambda_star_forward: float | None
    lambda_star_reverse: float | None
    forward_rate_bits: float
    reverse_rate_bits: float
    notes: tuple = ()


def _bisect(fun, lo, hi, iters=200):
    flo = fun(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (fun(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binary_closed_forms(eps: float, q, R_bits: float) -> BinaryClosedForms:
    """Closed forms for BSC(eps) with a uniform target, everything in bits.

    Forward q >= 1: [D_q(eps) - R]^+.  Forward q in (0,1): max_l l(D_u(eps)-R)
    with u = -q'/(l - q') and l* pinned by its root equation.  Reverse
    q in [1, inf]: sup_l l(D_{1/(1+l)}(eps) - R), l* by its root equation.
    """
    q = _ORD(q)
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if R_bits < 0:
        raise ValueError("rate must be >= 0")
    notes = []
    qp = conjugate_order(q)
    d1 = _d_bits(eps)

    # reverse side (same for every q in [1, inf]); meaningless for q < 1
    lam_rev: float | None
    if R_bits >= d1:
        rev, lam_rev = 0.0, 0.0
    elif R_bits == 0.0:
        rev = 0.5 * math.log2(1.0 / (4.0 * eps * (1.0 - eps)))
        lam_rev = math.inf
        notes.append("reverse sup approached only as lambda -> inf at R = 0")
    else:
        lam_rev = _bisect(lambda l: _d_bits(_tilt(eps, 1.0 / (1.0 + l))) - R_bits, 0.0,
                          _expand_reverse_bracket(eps, R_bits))
        rev = lam_rev * (binary_renyi(eps, 1.0 / (1.0 + lam_rev)).divergence_bits - R_bits)

    if q >= 1.0:
        fwd = max(binary_renyi(eps, q).divergence_bits - R_bits, 0.0)
        lam_fwd = None
    elif q > 0.0:
        eps_q = _tilt(eps, q)
        lo_thr = _d_bits(eps_q)
        if R_bits >= d1:
            lam_fwd = 0.0
            fwd = 0.0
        elif R_bits <= lo_thr:
            lam_fwd = 1.0
            fwd = binary_renyi(eps, q).divergence_bits - R_bits
        else:
            lam_fwd = _bisect(
                lambda l: _d_bits(_tilt(eps, -qp / (l - qp))) - R_bits, 0.0, 1.0)
            u = -qp / (lam_fwd - qp)
            fwd = lam_fwd * (binary_renyi(eps, u).divergence_bits - R_bits)
    else:
        fwd = 0.0
        lam_fwd = None

    fwd_rate = binary_renyi(eps, q).divergence_bits if q > 1.0 else (_d_bits(eps) if q > 0 else 0.0)
    rev_rate = _d_bits(eps) if q > 0 else 0.0
    if q < 1.0:
        rev = math.nan
        lam_rev = None
        notes.append("reverse closed form applies to q in [1, inf]")
    return BinaryClosedForms(eps=eps, q=q, rate_bits=R_bits, forward_bits=fwd,
                             reverse_bits=rev, lambda_star_forward=lam_fwd,
                             lambda_star_reverse=lam_rev, forward_rate_bits=fwd_rate,
                             reverse_rate_bits=rev_rate, notes=tuple(notes))


def _expand_reverse_bracket(eps: float, R_bits: float) -> float:
    hi = 1.0
    for _ in range(200):
        if _d_bits(_tilt(eps, 1.0 / (1.0 + hi))) - R_bits < 0:
            return hi
        hi *= 2.0
    return hi
