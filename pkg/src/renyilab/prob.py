"""Exact log-domain information measures on finite alphabets.

Distributions, channels and joints are small numpy vectors/matrices.  All
divergences and entropies are returned in nats unless the name carries a
``_bits`` suffix; the Renyi order ``q`` is an extended real (``math.inf`` and
``-math.inf`` are legal).  The conventions x/0 = 0 for x = 0 and +inf for
x > 0 are applied throughout, and the orders 0, 1, +-inf are evaluated by
their continuous-extension formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "FiniteDistribution",
    "Channel",
    "JointDistribution",
    "ExtendedOrder",
    "RealFunction",
    "ClassicalMeasures",
    "conjugate_order",
    "renyi_divergence",
    "conditional_renyi_divergence",
    "expected_row_divergence",
    "classical_measures",
    "cross_entropy",
    "total_variation",
    "binary_renyi",
    "binary_entropy_bits",
    "markov_apply",
    "lq_norm",
    "log_lq_norm",
    "compose_marginal",
    "tensor_power",
    "power_mean_log",
]

_STOCHASTIC_TOL = 1e-9
_KL_ORDER_TOL = 1e-9
_ZERO_ORDER_TOL = 1e-12
TENSOR_CELL_GUARD = 2**24


class AlphabetMismatchError(ValueError):
    """Operands live on incompatible alphabets."""


class GuardExceededError(RuntimeError):
    """An enumeration/materialization guard was exceeded."""


def _as_prob_vector(atoms) -> np.ndarray:
    v = np.asarray(atoms, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("probability vector must be a nonempty 1-D array")
    if np.any(v < -_STOCHASTIC_TOL) or not np.all(np.isfinite(v)):
        raise ValueError(f"invalid probability vector {v}")
    v = np.clip(v, 0.0, None)
    s = v.sum()
    if abs(s - 1.0) > _STOCHASTIC_TOL:
        raise ValueError(f"probability vector sums to {s}, not 1")
    return v / s


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability vector on a finite alphabet (home of P_X, Q_X, P_Y, ...)."""

    atoms: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "atoms", _as_prob_vector(self.atoms))

    @property
    def dim(self) -> int:
        return self.atoms.size

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.atoms > 0)

    @staticmethod
    def uniform(k: int) -> "FiniteDistribution":
        return FiniteDistribution(np.full(k, 1.0 / k))

    @staticmethod
    def point_mass(i: int, k: int) -> "FiniteDistribution":
        v = np.zeros(k)
        v[i] = 1.0
        return FiniteDistribution(v)

    @staticmethod
    def bernoulli(a: float) -> "FiniteDistribution":
        return FiniteDistribution(np.array([1.0 - a, a]))

    def __getitem__(self, i):
        return self.atoms[i]


@dataclass(frozen=True)
class Channel:
    """Row-stochastic conditional distribution (home of P_{Y|X}, Q_{Y|X})."""

    rows: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.rows, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise ValueError("channel must be a nonempty 2-D matrix")
        m = np.stack([_as_prob_vector(r) for r in m])
        object.__setattr__(self, "rows", m)

    @property
    def input_dim(self) -> int:
        return self.rows.shape[0]

    @property
    def output_dim(self) -> int:
        return self.rows.shape[1]

    def row(self, x: int) -> FiniteDistribution:
        return FiniteDistribution(self.rows[x])

    @staticmethod
    def bsc(eps: float) -> "Channel":
        return Channel(np.array([[1.0 - eps, eps], [eps, 1.0 - eps]]))

    @staticmethod
    def identity(k: int) -> "Channel":
        return Channel(np.eye(k))


@dataclass(frozen=True)
class JointDistribution:
    """Joint probability matrix over X x Y with extractable marginals."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("joint must be a 2-D matrix")
        if np.any(m < -1e-12) or abs(m.sum() - 1.0) > 1e-9:
            raise ValueError("joint entries must be >= 0 and sum to 1")
        m = np.clip(m, 0.0, None)
        object.__setattr__(self, "matrix", m / m.sum())

    @property
    def marginal_x(self) -> FiniteDistribution:
        return FiniteDistribution(self.matrix.sum(axis=1))

    @property
    def marginal_y(self) -> FiniteDistribution:
        return FiniteDistribution(self.matrix.sum(axis=0))

    def channel_y_given_x(self) -> Channel:
        px = self.matrix.sum(axis=1)
        rows = np.where(px[:, None] > 0, self.matrix / np.where(px[:, None] > 0, px[:, None], 1.0),
                        1.0 / self.matrix.shape[1])
        return Channel(rows)

    def channel_x_given_y(self) -> Channel:
        return JointDistribution(self.matrix.T).channel_y_given_x()

    @staticmethod
    def dsbs(eps: float) -> "JointDistribution":
        e, eb = eps, 1.0 - eps
        return JointDistribution(0.5 * np.array([[eb, e], [e, eb]]))

    @staticmethod
    def from_marginal_channel(px: FiniteDistribution, w: Channel) -> "JointDistribution":
        if px.dim != w.input_dim:
            raise AlphabetMismatchError("marginal/channel dimensions differ")
        return JointDistribution(px.atoms[:, None] * w.rows)

    @staticmethod
    def product(px: FiniteDistribution, py: FiniteDistribution) -> "JointDistribution":
        return JointDistribution(np.outer(px.atoms, py.atoms))


def conjugate_order(q: float) -> float:
    """Hoelder conjugate q' = q/(q-1); q=1 -> +inf, q=+-inf -> 1.

    q=0 is evaluated to the algebraic value 0 (formula-derived; the paper
    only fixes the conjugate away from 0).
    """
    if math.isinf(q):
        return 1.0
    if q == 1.0:
        return math.inf
    return q / (q - 1.0)


@dataclass(frozen=True)
class ExtendedOrder:
    """Renyi order q on R u {+-inf} with its Hoelder conjugate."""

    value: float

    def __post_init__(self):
        if math.isnan(self.value):
            raise ValueError("order must not be NaN")

    @property
    def conjugate(self) -> float:
        return conjugate_order(self.value)

    def __float__(self) -> float:
        return float(self.value)


def _order(q) -> float:
    return float(q.value) if isinstance(q, ExtendedOrder) else float(q)


@dataclass(frozen=True)
class RealFunction:
    """Extended-real function values indexed by the alphabet."""

    values: np.ndarray
    nonnegative: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if self.nonnegative and np.any(v < 0):
            raise ValueError("nonnegative flag set but values contain negatives")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size


def _clamp_sign(val: float, q: float) -> float:
    # float roundoff can leave a divergence on the wrong side of zero
    if q >= 0 and -1e-12 < val < 0:
        return 0.0
    if q < 0 and 0 < val < 1e-12:
        return 0.0
    return val


def renyi_divergence(Q, P, q) -> float:
    """D_q(Q||P) in nats for an extended-real order q.

    Orders 0, 1, +-inf use the continuous-extension formulas; the KL branch
    is taken for |q-1| < 1e-9 and the order-0 branch for |q| < 1e-12.
    Returns +inf (not an error) when q > 1 and Q is not dominated by P.
    """
    q = _order(q)
    qa = Q.atoms if isinstance(Q, FiniteDistribution) else _as_prob_vector(Q)
    pa = P.atoms if isinstance(P, FiniteDistribution) else _as_prob_vector(P)
    if qa.size != pa.size:
        raise AlphabetMismatchError("distributions on different alphabets")

    qs = qa > 0
    ps = pa > 0
    if abs(q) < _ZERO_ORDER_TOL:
        mass = pa[qs].sum()
        return -math.log(mass) if mass > 0 else math.inf
    if abs(q - 1.0) < _KL_ORDER_TOL:
        if np.any(qs & ~ps):
            return math.inf
        val = float(np.sum(qa[qs] * (np.log(qa[qs]) - np.log(pa[qs]))))
        return _clamp_sign(val, q)
    if q == math.inf:
        if np.any(qs & ~ps):
            return math.inf
        return float(np.log(np.max(qa[ps] / pa[ps])))
    if q == -math.inf:
        r = np.where(qs[ps], qa[ps] / pa[ps], 0.0)
        lo = r.min()
        return float(np.log(lo)) if lo > 0 else -math.inf

    if q > 1 and np.any(qs & ~ps):
        return math.inf
    if q < 0 and np.any(ps & ~qs):
        return -math.inf
    m = qs & ps
    if not np.any(m):
        # disjoint supports: sum Q^q P^(1-q) = 0
        return math.inf if 0 < q < 1 else math.inf
    log_terms = q * np.log(qa[m]) + (1.0 - q) * np.log(pa[m])
    val = float(logsumexp(log_terms)) / (q - 1.0)
    return _clamp_sign(val, q)


def conditional_renyi_divergence(QYX: Channel, PYX: Channel, QX: FiniteDistribution, q) -> float:
    """D_q(Q_{Y|X} || P_{Y|X} | Q_X) = D_q(Q_X Q_{Y|X} || Q_X P_{Y|X})."""
    if QYX.input_dim != PYX.input_dim or QYX.output_dim != PYX.output_dim:
        raise AlphabetMismatchError("channel shapes differ")
    if QX.dim != QYX.input_dim:
        raise AlphabetMismatchError("input distribution does not match channels")
    j1 = (QX.atoms[:, None] * QYX.rows).ravel()
    j2 = (QX.atoms[:, None] * PYX.rows).ravel()
    return renyi_divergence(FiniteDistribution(j1), FiniteDistribution(j2), q)


def expected_row_divergence(QX: FiniteDistribution, PYX: Channel, PY: FiniteDistribution, q) -> float:
    """E_{Q_X}[ D_q(P_{Y|X} || P_Y) ], the per-row average used by Stmt 1."""
    if QX.dim != PYX.input_dim:
        raise AlphabetMismatchError("input distribution does not match channel")
    total = 0.0
    for x in QX.support:
        d = renyi_divergence(PYX.row(x), PY, q)
        if math.isinf(d):
            return math.inf if d > 0 else -math.inf
        total += QX.atoms[x] * d
    return total


def _entropy(v: np.ndarray) -> float:
    s = v[v > 0]
    return float(-np.sum(s * np.log(s)))


@dataclass(frozen=True)
class ClassicalMeasures:
    """Shannon-type quantities of a joint distribution, in nats."""

    H_X: float
    H_Y: float
    H_XgY: float
    I_XY: float
    joint: JointDistribution = field(repr=False)

    def tv_to(self, other: JointDistribution) -> float:
        return total_variation(self.joint.matrix.ravel(), other.matrix.ravel())

    def cross_entropy_x(self, PX: FiniteDistribution) -> float:
        return cross_entropy(self.joint.marginal_x, PX)


def classical_measures(QXY: JointDistribution) -> ClassicalMeasures:
    m = QXY.matrix
    hx = _entropy(m.sum(axis=1))
    hy = _entropy(m.sum(axis=0))
    hxy = _entropy(m.ravel())
    i = renyi_divergence(
        FiniteDistribution(m.ravel()),
        FiniteDistribution(np.outer(m.sum(axis=1), m.sum(axis=0)).ravel()),
        1.0,
    )
    return ClassicalMeasures(H_X=hx, H_Y=hy, H_XgY=hxy - hy, I_XY=i, joint=QXY)


def cross_entropy(Q, P) -> float:
    """H(Q, P) = -sum Q log P in nats; +inf if Q puts mass outside supp(P)."""
    qa = Q.atoms if isinstance(Q, FiniteDistribution) else _as_prob_vector(Q)
    pa = P.atoms if isinstance(P, FiniteDistribution) else _as_prob_vector(P)
    if qa.size != pa.size:
        raise AlphabetMismatchError("distributions on different alphabets")
    m = qa > 0
    if np.any(m & ~(pa > 0)):
        return math.inf
    return float(-np.sum(qa[m] * np.log(pa[m])))


def total_variation(P, Q) -> float:
    pa = P.atoms if isinstance(P, FiniteDistribution) else np.asarray(P, dtype=float)
    qa = Q.atoms if isinstance(Q, FiniteDistribution) else np.asarray(Q, dtype=float)
    return 0.5 * float(np.abs(pa - qa).sum())


def binary_entropy_bits(a: float) -> float:
    """Binary Shannon entropy H(a) in bits."""
    if a <= 0.0 or a >= 1.0:
        return 0.0
    return float(-(a * math.log2(a) + (1 - a) * math.log2(1 - a)))


@dataclass(frozen=True)
class BinaryRenyi:
    entropy_bits: float
    divergence_bits: float


def binary_renyi(a: float, q) -> BinaryRenyi:
    """Binary Renyi entropy H_q(a) and divergence D_q(a) = 1 - H_q(a), in bits.

    The four clauses (generic q in (0,inf), q=1, q=inf, q=0) follow the
    base-2 convention of the binary corollaries.
    """
    q = _order(q)
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0,1]")
    ab = 1.0 - a
    if q == math.inf:
        h = -math.log2(max(a, ab))
    elif abs(q) < _ZERO_ORDER_TOL:
        h = 1.0 if 0.0 < a < 1.0 else 0.0
    elif abs(q - 1.0) < _KL_ORDER_TOL:
        h = binary_entropy_bits(a)
    elif q > 0:
        if a in (0.0, 1.0):
            h = 0.0
        else:
            h = -(1.0 / (q - 1.0)) * math.log2(a**q + ab**q)
    else:
        raise ValueError("binary Renyi entropy is defined for q >= 0")
    return BinaryRenyi(entropy_bits=h, divergence_bits=1.0 - h)


def markov_apply(PXgY: Channel, f: RealFunction) -> RealFunction:
    """Conditional-expectation (Markov) operator: g(y) = E[f(X) | Y=y].

    ``PXgY`` rows are indexed by y and give P_{X|Y=y}.
    """
    if f.dim != PXgY.output_dim:
        raise AlphabetMismatchError("function not indexed by the channel output alphabet")
    g = PXgY.rows @ f.values
    return RealFunction(g, nonnegative=f.nonnegative)


def log_lq_norm(values, mu: FiniteDistribution, q) -> float:
    """log of ||f||_q = E_mu[f^q]^(1/q) (q != 0), with log-domain accumulation.

    q = 0 returns E_mu[log f]; q = +-inf return the essential sup/inf over
    supp(mu).  Zeros of f follow the 0^q conventions: for q < 0 a zero on the
    support makes the norm 0 (returns -inf).
    """
    q = _order(q)
    v = values.values if isinstance(values, RealFunction) else np.asarray(values, dtype=float)
    if np.any(v < 0):
        raise ValueError("L^q norms are taken of nonnegative functions")
    if v.size != mu.dim:
        raise AlphabetMismatchError("function and measure dimensions differ")
    sup = mu.support
    vs = v[sup]
    w = mu.atoms[sup]
    if q == math.inf:
        mx = vs.max()
        return math.log(mx) if mx > 0 else -math.inf
    if q == -math.inf:
        mn = vs.min()
        return math.log(mn) if mn > 0 else -math.inf
    if abs(q) < _ZERO_ORDER_TOL:
        if np.any(vs == 0):
            return -math.inf
        return float(np.sum(w * np.log(vs)))
    pos = vs > 0
    if q < 0 and not np.all(pos):
        return -math.inf  # E[f^q] = +inf, norm = inf^(1/q) = 0
    if not np.any(pos):
        return -math.inf if q > 0 else math.inf
    lse = logsumexp(np.log(w[pos]) + q * np.log(vs[pos]))
    return float(lse) / q


def lq_norm(values, mu: FiniteDistribution, q) -> float:
    return math.exp(log_lq_norm(values, mu, q))


def compose_marginal(PX: FiniteDistribution, PYX: Channel) -> FiniteDistribution:
    """Y-marginal P_X o P_{Y|X}."""
    if PX.dim != PYX.input_dim:
        raise AlphabetMismatchError("marginal/channel dimensions differ")
    return FiniteDistribution(PX.atoms @ PYX.rows)


def tensor_power(obj, n: int):
    """n-fold product of a distribution / channel / joint on the product alphabet."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(obj, FiniteDistribution):
        if obj.dim**n > TENSOR_CELL_GUARD:
            raise GuardExceededError("tensor power exceeds materialization guard")
        out = obj.atoms
        for _ in range(n - 1):
            out = np.kron(out, obj.atoms)
        return FiniteDistribution(out)
    if isinstance(obj, Channel):
        if (obj.input_dim * obj.output_dim) ** n > TENSOR_CELL_GUARD:
            raise GuardExceededError("tensor power exceeds materialization guard")
        out = obj.rows
        for _ in range(n - 1):
            out = np.kron(out, obj.rows)
        return Channel(out)
    if isinstance(obj, JointDistribution):
        if obj.matrix.size**n > TENSOR_CELL_GUARD:
            raise GuardExceededError("tensor power exceeds materialization guard")
        out = obj.matrix
        for _ in range(n - 1):
            out = np.kron(out, obj.matrix)
        return JointDistribution(out)
    raise TypeError(f"cannot tensor {type(obj)!r}")


def power_mean_log(log_values: np.ndarray, weights: np.ndarray, rho: float) -> float:
    """(1/rho) log E_w[exp(rho * log_values)], continuous in rho.

    rho -> 0 gives E_w[log v]; rho = +-inf give log max / log min over the
    support of w.  Used for the power-mean shaped duals.
    """
    lv = np.asarray(log_values, dtype=float)
    w = np.asarray(weights, dtype=float)
    m = w > 0
    lv, w = lv[m], w[m]
    if rho == math.inf:
        return float(np.max(lv))
    if rho == -math.inf:
        return float(np.min(lv))
    if abs(rho) < 1e-11:
        return float(np.sum(w * lv))
    if np.any(np.isneginf(lv)) and rho < 0:
        return -math.inf if rho > 0 else math.inf
    return float(logsumexp(rho * lv, b=w)) / rho
