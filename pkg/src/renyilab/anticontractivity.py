"""Anti-contractivity exponents of the conditional-expectation operator.

Gamma-lower is the best constant in ||P_{X|Y}(f)||_q <= e^{-G} ||f||_p and
Gamma-upper the best constant in the opposite-direction inequality; both
equal extremizations of (1/p') D_p(Q_X||P_X) - (1/q') D_q(Q_Y||P_Y) over
input laws, and of the theta functional over output/input marginal pairs.
All values in nats except ``binary_gamma`` (bits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .optim import DEFAULT_CONFIG, OptimizerConfig, OptResult, optimize_simplex
from .prob import (
    Channel,
    FiniteDistribution,
    JointDistribution,
    binary_renyi,
    conjugate_order,
    cross_entropy,
    renyi_divergence,
)
from .stability import ot_divergence

__all__ = [
    "NormExponentQuery",
    "theta",
    "GammaResult",
    "gamma_single_letter",
    "gamma_asymptotic",
    "dual_gamma_low",
    "dual_gamma_high",
    "binary_gamma",
    "BinaryGamma",
    "brute_force_gamma",
    "condition1_witness",
]

_INNER_CFG = OptimizerConfig(value_tol=1e-9, max_iters=60, n_starts=3,
                             grid_schedule=(6, 12), seed=1, vertex_starts=False)


@dataclass(frozen=True)
class NormExponentQuery:
    joint: JointDistribution
    p: float
    q: float
    side: str  # "lower" (best constant in the <= inequality) or "upper"
    n: float = 1  # blocklength; math.inf for the asymptotic exponent

    def __post_init__(self):
        if self.p == 0 or self.q == 0:
            raise ValueError("orders p, q must be nonzero")
        if self.side not in ("lower", "upper"):
            raise ValueError("side must be 'lower' or 'upper'")


def theta(p: float, q: float, QX: FiniteDistribution, QY: FiniteDistribution,
          PXY: JointDistribution) -> float:
    """theta_{p,q}(Q_X,Q_Y) = OT divergence - (1/p) D(Q_X||P_X) - (1/q) D(Q_Y||P_Y)."""
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    d = ot_divergence(QX, QY, PXY).value
    return d - inv_p * renyi_divergence(QX, PXY.marginal_x, 1.0) \
        - inv_q * renyi_divergence(QY, PXY.marginal_y, 1.0)


def _renyi_form_value(Q: np.ndarray, p: float, q: float, PX: np.ndarray, W: np.ndarray,
                      PY: np.ndarray) -> float:
    """a - b with a = -D_{1-p}(P_X||Q_X), b = -D_{1-q}(P_Y||Q_Y), Q_Y = Q_X W."""
    QX = FiniteDistribution(Q)
    a = -renyi_divergence(FiniteDistribution(PX), QX, 1.0 - p)
    QY = FiniteDistribution(Q @ W)
    b = -renyi_divergence(FiniteDistribution(PY), QY, 1.0 - q)
    if math.isinf(a) and math.isinf(b):
        return math.nan
    return a - b


def _renyi_form_opt(PXY: JointDistribution, p: float, q: float, sense: str,
                    cfg: OptimizerConfig) -> OptResult:
    PX = PXY.marginal_x.atoms
    PY = PXY.marginal_y.atoms
    W = PXY.channel_y_given_x().rows
    sup = np.flatnonzero(PX > 0)

    def val(blocks):
        Q = np.zeros(PX.size)
        Q[sup] = blocks[0]
        v = _renyi_form_value(Q, p, q, PX, W, PY)
        if math.isnan(v):
            return math.inf if sense == "min" else -math.inf
        return v

    res = optimize_simplex(val, [sup.size], sense, cfg, x0_list=[[PX[sup]]])
    return res


@dataclass(frozen=True)
class GammaResult:
    value: float
    renyi_form: float | None
    theta_form: float | None
    clause: str
    symbolic: bool
    gap: float
    meta: dict = field(default_factory=dict)


def condition1_witness(PXY: JointDistribution):
    """Singleton-set test for Condition 1: some A with P_{X|Y}(A|y) < 1 for all y."""
    K = PXY.channel_x_given_y().rows  # (y, x)
    PX = PXY.marginal_x.atoms
    for x in range(PX.size):
        if 0.0 < PX[x] < 1.0 and np.all(K[:, x] < 1.0 - 1e-12):
            return x
    return None


def _theta_joint_min(PXY: JointDistribution, p: float, qp: float, cfg) -> float:
    """inf over (Q_X, Q_Y) of theta_{p,qp}: collapses to one joint simplex."""
    P = PXY.matrix
    nx, ny = P.shape
    PX, PY = PXY.marginal_x.atoms, PXY.marginal_y.atoms
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_qp = 0.0 if math.isinf(qp) else 1.0 / qp
    sup = np.flatnonzero(P.ravel() > 0)

    def val(blocks):
        J = np.zeros(nx * ny)
        J[sup] = blocks[0]
        J = J.reshape(nx, ny)
        m = J > 0
        d = float(np.sum(J[m] * (np.log(J[m]) - np.log(P[m]))))
        qx, qy = J.sum(axis=1), J.sum(axis=0)
        dx = float(np.sum(qx[qx > 0] * (np.log(qx[qx > 0]) - np.log(PX[qx > 0]))))
        dy = float(np.sum(qy[qy > 0] * (np.log(qy[qy > 0]) - np.log(PY[qy > 0]))))
        return d - inv_p * dx - inv_qp * dy

    res = optimize_simplex(val, [sup.size], "min", cfg, x0_list=[[P.ravel()[sup]]])
    return res.value


def _theta_pair_opt(PXY: JointDistribution, p: float, qp: float, outer: str, cfg) -> float:
    """sup-sup / sup-inf extremizations of theta over the marginal pair.

    outer in {"supsup", "supX_infY", "supY_infX"}; inner optimization runs
    over couplings directly (rows of Q_{X|Y} or Q_{Y|X}), so no nested OT
    solve is needed.
    """
    P = PXY.matrix
    nx, ny = P.shape
    PX, PY = PXY.marginal_x.atoms, PXY.marginal_y.atoms
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_qp = 0.0 if math.isinf(qp) else 1.0 / qp

    if outer == "supsup":
        def val(blocks):
            t = theta(p, qp, FiniteDistribution(blocks[0]), FiniteDistribution(blocks[1]), PXY)
            return t
        res = optimize_simplex(val, [nx, ny], "max",
                               replace(cfg, n_starts=min(cfg.n_starts, 8), max_iters=80),
                               x0_list=[[PX, PY]])
        return res.value

    # saddle forms: outer marginal, inner conditional rows on supp(P)
    if outer == "supY_infX":
        out_dim, in_marg = ny, PX
        col_sup = [np.flatnonzero(P[:, y] > 0) for y in range(ny)]
    else:
        out_dim, in_marg = nx, PY
        col_sup = [np.flatnonzero(P[x, :] > 0) for x in range(nx)]

    def inner(Qout: np.ndarray) -> float:
        zs = np.flatnonzero(Qout > 0)
        dims = [col_sup[z].size for z in zs]
        if any(d == 0 for d in dims):
            return math.inf

        def val(blocks):
            J = np.zeros((nx, ny))
            for i, z in enumerate(zs):
                if outer == "supY_infX":
                    J[col_sup[z], z] = Qout[z] * blocks[i]
                else:
                    J[z, col_sup[z]] = Qout[z] * blocks[i]
            m = J > 0
            d = float(np.sum(J[m] * (np.log(J[m]) - np.log(P[m]))))
            qx, qy = J.sum(axis=1), J.sum(axis=0)
            dx = float(np.sum(qx[qx > 0] * (np.log(qx[qx > 0]) - np.log(PX[qx > 0]))))
            dy = float(np.sum(qy[qy > 0] * (np.log(qy[qy > 0]) - np.log(PY[qy > 0]))))
            return d - inv_p * dx - inv_qp * dy

        loc = _INNER_CFG
        if outer == "supY_infX":
            x0 = [[P[col_sup[z], z] / P[col_sup[z], z].sum() for z in zs]]
        else:
            x0 = [[P[z, col_sup[z]] / P[z, col_sup[z]].sum() for z in zs]]
        r = optimize_simplex(val, dims, "min", loc, x0_list=x0)
        return r.value

    res = optimize_simplex(lambda b: inner(b[0]), [out_dim], "max", cfg,
                           x0_list=[[in_marg if out_dim == nx else
                                     (PY if outer == "supY_infX" else PX)]])
    return res.value


def gamma_single_letter(query: NormExponentQuery, cfg: OptimizerConfig | None = None) -> GammaResult:
    """Blocklength-1 exponent via both characterizations, with agreement asserted.

    The symbolic clauses (0 for Gamma-lower when p>1, p>q; 0 for Gamma-upper
    when p<1, p<q or p<0<q; -inf for Gamma-lower when p<0) are returned
    exactly; the two optimization routes are reported for the rest.
    """
    cfg = cfg or DEFAULT_CONFIG
    p, q = query.p, query.q
    qp = conjugate_order(q)
    side = query.side
    PXY = query.joint
    # the theta saddles nest a simplex solve per outer point; keep them lean
    theta_cfg = replace(cfg, n_starts=min(cfg.n_starts, 6), grid_schedule=(8, 14),
                        max_iters=min(cfg.max_iters, 60))

    if side == "lower":
        if p < 0:
            if q > 0:
                return GammaResult(-math.inf, None, None, "p<0<q", True, 0.0)
            w = condition1_witness(PXY)
            if w is None:
                return GammaResult(math.nan, None, None, "p<0,q<0: condition 1 unmet", True, 0.0,
                                   {"asserted": False})
            return GammaResult(-math.inf, None, None, "p<0,q<0 under condition 1", True, 0.0,
                               {"witness_singleton": w})
        if p > 1 and p > q:
            return GammaResult(0.0, None, None, "p>1, p>q", True, 0.0)
        renyi = _renyi_form_opt(PXY, p, q, "min", cfg)
        meta = {}
        if q > 0:
            th = _theta_joint_min(PXY, p, qp, cfg)
            clause = "inf theta, p,q>0"
        else:
            # for p in (0,1) the exchanged saddle is only a weak-duality lower
            # bound on the true constant (the Renyi route); see the ledger
            th = _theta_pair_opt(PXY, p, qp, "supY_infX", theta_cfg)
            clause = "sup_QY inf_QX theta, q<0<p"
            if p < 1:
                meta["theta_form_is_lower_bound"] = True
        return GammaResult(renyi.value, renyi.value, th, clause, False,
                           renyi.gap + 2e-6, meta)
    # upper
    if p < 1 and p < q:
        return GammaResult(0.0, None, None, "p<1, p<q", True, 0.0)
    if p < 0 < q:
        return GammaResult(0.0, None, None, "p<0<q", True, 0.0)
    renyi = _renyi_form_opt(PXY, p, q, "max", cfg)
    if p > 0 and q < 0:
        th = _theta_pair_opt(PXY, p, qp, "supsup", theta_cfg)
        clause = "sup theta, p>0>q"
    elif p > 0 and q > 0:
        th = _theta_pair_opt(PXY, p, qp, "supX_infY", theta_cfg)
        clause = "sup_QX inf_QY theta, p,q>0"
    else:
        th = _theta_pair_opt(PXY, p, qp, "supY_infX", theta_cfg)
        clause = "sup_QY inf_QX theta, p,q<0"
    return GammaResult(renyi.value, renyi.value, th, clause, False, renyi.gap + 2e-6)


# ---------------------------------------------------------------------------
# asymptotic exponents


def _eta_min_rows(PXY: JointDistribution, coeff_out: float, QX: np.ndarray,
                  cfg: OptimizerConfig) -> float:
    """min over Q_{Y|X} of D(Q_{Y|X}||P_{Y|X}|Q_X) - coeff_out * D(Q_Y||P_Y)."""
    W = PXY.channel_y_given_x().rows
    PY = PXY.marginal_y.atoms
    nx, ny = W.shape
    xs = np.flatnonzero(QX > 0)
    supports = [np.flatnonzero(W[x] > 0) for x in xs]

    def val(blocks):
        cond = 0.0
        qy = np.zeros(ny)
        for i, x in enumerate(xs):
            r = blocks[i]
            qy[supports[i]] += QX[x] * r
            m = r > 0
            cond += QX[x] * float(np.sum(r[m] * (np.log(r[m]) - np.log(W[x, supports[i]][m]))))
        mq = qy > 0
        d_out = float(np.sum(qy[mq] * (np.log(qy[mq]) - np.log(PY[mq]))))
        return cond - coeff_out * d_out

    r = optimize_simplex(val, [s.size for s in supports], "min", _INNER_CFG,
                         x0_list=[[W[x, supports[i]] for i, x in enumerate(xs)]])
    return r.value


def gamma_asymptotic(query: NormExponentQuery, cfg: OptimizerConfig | None = None) -> GammaResult:
    """Asymptotic (n -> inf) anti-contractivity exponent, clause-dispatched on (p, q)."""
    cfg = cfg or DEFAULT_CONFIG
    p, q = query.p, query.q
    pp, qp = conjugate_order(p), conjugate_order(q)
    inv_pp = 0.0 if math.isinf(pp) else 1.0 / pp
    inv_qp = 0.0 if math.isinf(qp) else 1.0 / qp
    PXY = query.joint
    PX = PXY.marginal_x
    PY = PXY.marginal_y
    W = PXY.channel_y_given_x()
    rowdiv = np.array([renyi_divergence(W.row(x), PY, q) for x in range(W.input_dim)])

    if query.side == "lower":
        if 0 < p <= q < 1:
            vals = [inv_pp * math.log(1.0 / PX.atoms[x]) - inv_qp * rowdiv[x]
                    for x in PX.support]
            x_star = int(np.argmin(vals))
            return GammaResult(float(min(vals)), None, None, "single-x min, 0<p<=q<1",
                               False, 1e-12, {"x_star": int(PX.support[x_star])})
        if 0 < q < p < 1:
            val = _gamma_low_joint_min(PXY, inv_pp, inv_qp, cfg)
            return GammaResult(val, None, None, "min over couplings, 0<q<p<1", False, 1e-6)
        if q < 0 < p < 1:
            val = _gamma_low_saddle(PXY, inv_pp, inv_qp, cfg)
            return GammaResult(val, None, None, "max_QY min_QXgY, q<0<p<1", False, 2e-6)
        if q < 1 <= p:
            return GammaResult(0.0, None, None, "q<1<=p", True, 0.0)
        if p < 0 and q < 1:
            return GammaResult(-math.inf, None, None, "p<0, q<1", True, 0.0)
        raise ValueError(f"(p,q)=({p},{q}) outside the lower-exponent clauses")

    if 1 <= q <= p:
        vals = [inv_pp * math.log(1.0 / PX.atoms[x]) - inv_qp * rowdiv[x] for x in PX.support]
        x_star = int(np.argmax(vals))
        return GammaResult(float(max(vals)), None, None, "single-x max, 1<=q<=p",
                           False, 1e-12, {"x_star": int(PX.support[x_star])})
    if 1 <= p < q:
        def outer(blocks):
            QX = blocks[0]
            if np.any(QX[rowdiv == math.inf] > 0):
                return -math.inf
            hx = cross_entropy(FiniteDistribution(QX), PX)
            head = inv_pp * hx - inv_pp * float(QX @ rowdiv)
            tail = (1.0 - (1.0 if math.isinf(pp) else qp / pp)) \
                * _eta_min_rows(PXY, inv_qp, QX, cfg)
            return head + tail
        res = optimize_simplex(outer, [PX.dim], "max", cfg, x0_list=[[PX.atoms]])
        return GammaResult(res.value, None, None, "max_QX with eta tail, 1<=p<q",
                           False, res.gap + 1e-6)
    if p < 1 <= q:
        return GammaResult(0.0, None, None, "p<1<=q", True, 0.0)
    raise ValueError(f"(p,q)=({p},{q}) outside the upper-exponent clauses")


def _gamma_low_joint_min(PXY: JointDistribution, inv_pp: float, inv_qp: float,
                         cfg: OptimizerConfig) -> float:
    P = PXY.matrix
    nx, ny = P.shape
    PX, PY = PXY.marginal_x.atoms, PXY.marginal_y.atoms
    W = PXY.channel_y_given_x().rows
    sup = np.flatnonzero(P.ravel() > 0)

    def val(blocks):
        J = np.zeros(nx * ny)
        J[sup] = blocks[0]
        J = J.reshape(nx, ny)
        qx, qy = J.sum(axis=1), J.sum(axis=0)
        m = J > 0
        cond = float(np.sum(J[m] * (np.log(J[m]) - np.log((qx[:, None] * W)[m]))))
        d_out = float(np.sum(qy[qy > 0] * (np.log(qy[qy > 0]) - np.log(PY[qy > 0]))))
        hx = float(-np.sum(qx[qx > 0] * np.log(PX[qx > 0])))
        i_q = float(np.sum(J[m] * (np.log(J[m]) - np.log(np.outer(qx, qy)[m]))))
        return cond - inv_qp * d_out + inv_pp * (hx - i_q)

    res = optimize_simplex(val, [sup.size], "min", cfg, x0_list=[[P.ravel()[sup]]])
    return res.value


def _gamma_low_saddle(PXY: JointDistribution, inv_pp: float, inv_qp: float,
                      cfg: OptimizerConfig) -> float:
    P = PXY.matrix
    nx, ny = P.shape
    PX, PY = PXY.marginal_x.atoms, PXY.marginal_y.atoms
    W = PXY.channel_y_given_x().rows
    col_sup = [np.flatnonzero(P[:, y] > 0) for y in range(ny)]

    def inner(QY: np.ndarray) -> float:
        ys = np.flatnonzero(QY > 0)

        def val(blocks):
            J = np.zeros((nx, ny))
            for i, y in enumerate(ys):
                J[col_sup[y], y] = QY[y] * blocks[i]
            qx = J.sum(axis=1)
            m = J > 0
            cond = float(np.sum(J[m] * (np.log(J[m]) - np.log((qx[:, None] * W)[m]))))
            d_out = float(np.sum(QY[ys] * (np.log(QY[ys]) - np.log(PY[ys]))))
            hx = float(-np.sum(qx[qx > 0] * np.log(PX[qx > 0])))
            i_q = float(np.sum(J[m] * (np.log(J[m]) - np.log(np.outer(qx, QY)[m]))))
            return cond - inv_qp * d_out + inv_pp * (hx - i_q)

        r = optimize_simplex(val, [col_sup[y].size for y in ys], "min", _INNER_CFG,
                             x0_list=[[P[col_sup[y], y] / P[col_sup[y], y].sum() for y in ys]])
        return r.value

    res = optimize_simplex(lambda b: inner(b[0]), [ny], "max", cfg, x0_list=[[PY]])
    return res.value


def dual_gamma_low(PXY: JointDistribution, p: float, q: float,
                   cfg: OptimizerConfig | None = None) -> float:
    """Dual of the lower exponent for 0<p<1, q<p:
    min_{S_X} -(1/q) log E_{P_Y}[ E_{S_X}[P_{X|Y}^p / P_X]^{q/p} ]."""
    cfg = cfg or DEFAULT_CONFIG
    K = PXY.channel_x_given_y().rows  # (y, x)
    PX = PXY.marginal_x.atoms
    PY = PXY.marginal_y.atoms
    base = np.where(PX[None, :] > 0, K**p / np.where(PX[None, :] > 0, PX[None, :], 1.0), 0.0)

    def val(blocks):
        S = blocks[0]
        u = base @ S
        if np.any(u[PY > 0] <= 0):
            return math.inf if q > 0 else -math.inf
        return -(1.0 / q) * math.log(float(np.sum(PY[PY > 0] * u[PY > 0] ** (q / p))))

    res = optimize_simplex(val, [PX.size], "min", cfg, x0_list=[[PX.copy()]])
    return res.value


def dual_gamma_high(PXY: JointDistribution, p: float, q: float,
                    cfg: OptimizerConfig | None = None) -> float:
    """Dual of the upper exponent for 1<=p<q: min_{S_Y} max_x of the tilted bound."""
    cfg = cfg or DEFAULT_CONFIG
    pp, qp = conjugate_order(p), conjugate_order(q)
    inv_pp = 0.0 if math.isinf(pp) else 1.0 / pp
    W = PXY.channel_y_given_x().rows
    PX = PXY.marginal_x.atoms
    PY = PXY.marginal_y.atoms
    rowdiv = np.array([renyi_divergence(FiniteDistribution(W[x]), FiniteDistribution(PY), q)
                       for x in range(PX.size)])

    def val(blocks):
        S = blocks[0]
        ratio = np.where(PY > 0, (S / np.where(PY > 0, PY, 1.0)) ** (1.0 / qp), 0.0)
        u = W @ ratio
        best = -math.inf
        for x in np.flatnonzero(PX > 0):
            if u[x] <= 0:
                return math.inf
            t = inv_pp * math.log(1.0 / PX[x]) - inv_pp * rowdiv[x] \
                - (1.0 - qp * inv_pp) * math.log(u[x])
            best = max(best, t)
        return best

    res = optimize_simplex(val, [PY.size], "min", cfg, x0_list=[[PY.copy()]])
    return res.value


# ---------------------------------------------------------------------------
# binary closed forms and the finite-n oracle


@dataclass(frozen=True)
class BinaryGamma:
    gamma_lower_bits: float | None
    gamma_upper_bits: float | None
    achiever_lower: str | None
    achiever_upper: str | None


def binary_gamma(eps: float, p: float, q: float) -> BinaryGamma:
    """DSBS(eps) asymptotic exponents in bits, with achiever descriptors."""
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    pp, qp = conjugate_order(p), conjugate_order(q)
    inv_pp = 0.0 if math.isinf(pp) else 1.0 / pp
    inv_qp = 0.0 if math.isinf(qp) else 1.0 / qp
    hq = binary_renyi(eps, q).entropy_bits if q >= 0 else None
    hp = binary_renyi(eps, p).entropy_bits if p >= 0 else None

    g_lo = ach_lo = None
    if p != 0 and q != 0:
        if 0 < p <= q < 1:
            g_lo = inv_qp * hq - inv_qp + inv_pp
            ach_lo = "single point"
        elif 0 < p < 1 and q < p:
            g_lo = inv_pp * hp
            eps_hat = eps**p / (eps**p + (1 - eps) ** p)
            from .prob import binary_entropy_bits
            ach_lo = (f"random subset of size 2^(n(1-H(eps_hat))), "
                      f"eps_hat={eps_hat:.6f}, size exponent {1 - binary_entropy_bits(eps_hat):.6f}")
        elif p < 0 and q < 1:
            g_lo = -math.inf
            ach_lo = "single point"
        elif q < 1 <= p:
            g_lo = 0.0
            ach_lo = "positive constant function"

    g_hi = ach_hi = None
    if 1 <= q < p or (1 <= q and p == math.inf):
        if q < p:
            g_hi = inv_qp * hq - inv_qp + inv_pp
            ach_hi = "single point"
    if g_hi is None and 1 <= p <= q:
        g_hi = inv_pp * hq
        ach_hi = f"random subset of size 2^(n(1-H_q(eps))), size exponent {1 - hq:.6f}"
    if g_hi is None and p < 1 <= q:
        g_hi = 0.0
        ach_hi = "positive constant function"
    return BinaryGamma(gamma_lower_bits=g_lo, gamma_upper_bits=g_hi,
                       achiever_lower=ach_lo, achiever_upper=ach_hi)


def brute_force_gamma(PXY: JointDistribution, n: int, p: float, q: float, side: str,
                      cfg: OptimizerConfig | None = None) -> OptResult:
    """Exact finite-n oracle: optimize the Renyi characterization on P_XY^{x n}.

    Returns the per-symbol exponent Gamma(P^{x n}) / n; by Fekete the lower
    exponents decrease toward the asymptotic value and the upper ones increase.
    """
    cfg = cfg or DEFAULT_CONFIG
    from .prob import tensor_power
    nx = PXY.matrix.shape[0]
    if nx**n > 256:
        raise ValueError("product alphabet exceeds the simplex guard")
    Pn = tensor_power(PXY, n)
    PX = Pn.marginal_x.atoms
    PY = Pn.marginal_y.atoms
    W = Pn.channel_y_given_x().rows
    sense = "min" if side == "lower" else "max"

    gradient = None
    if (p not in (0.0, 1.0) and q not in (0.0, 1.0)
            and not math.isinf(p) and not math.isinf(q)):
        def gradient(blocks):
            Q = np.clip(blocks[0], 1e-300, None)
            Q = Q / Q.sum()
            sp = float(np.sum(Q**p * PX ** (1.0 - p)))
            ga = Q ** (p - 1.0) * PX ** (1.0 - p) / sp
            QY = np.clip(Q @ W, 1e-300, None)
            tq = float(np.sum(QY**q * PY ** (1.0 - q)))
            gb = (W @ (QY ** (q - 1.0) * PY ** (1.0 - q))) / tq
            return [ga - gb]

    def val(blocks):
        v = _renyi_form_value(blocks[0], p, q, PX, W, PY)
        if math.isnan(v):
            return math.inf if sense == "min" else -math.inf
        return v

    big_cfg = replace(cfg, n_starts=6, max_iters=150, grid_schedule=(8,)) \
        if PX.size > 8 else cfg
    res = optimize_simplex(val, [PX.size], sense, big_cfg, x0_list=[[PX.copy()]],
                           gradient=gradient)
    return OptResult(res.value / n, res.args, res.status, res.gap / n + 1e-9,
                     {"n": n, **res.meta})
