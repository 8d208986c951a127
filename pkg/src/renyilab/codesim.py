"""Exact and Monte-Carlo simulation of resolvability codes at small blocklength.

Codebooks are multisets (repeated codewords count with multiplicity in the
output mixture).  Randomness comes from Philox streams keyed by (seed, trial),
with all draws inside a trial in a fixed vectorized order, so trial-level
parallelism cannot change any result.  M = ceil(e^{nR}) per the integrality
convention; every report echoes the effective rate log(M)/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.special import logsumexp

from . import hypercube
from .prob import Channel, FiniteDistribution, GuardExceededError, renyi_divergence
from .types_method import (
    ConditionalTypeVector,
    TypeVector,
    log_multinomial,
    sequence_type,
)

__all__ = [
    "EnsembleSpec",
    "Codebook",
    "sample_codebook",
    "code_output_divergence",
    "ensemble_moment_exact",
    "exponent_estimate",
    "RegressionReport",
    "packing_covering_stats",
    "PackingCoveringReport",
    "random_subset",
]

OUTPUT_ENUM_GUARD = 2**24
MOMENT_ENUM_GUARD = 10**6


def _stream(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF,
                                                     trial & 0xFFFFFFFFFFFFFFFF]))


@dataclass(frozen=True)
class EnsembleSpec:
    """Which codebook law to sample: iid / constant_composition / typical / composite."""

    kind: str
    n: int
    rate: float  # nats per symbol
    QX: FiniteDistribution | None = None
    TX: TypeVector | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in ("iid", "constant_composition", "typical", "composite"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "iid" and self.QX is None:
            raise ValueError("iid ensembles need QX")
        if self.kind == "constant_composition":
            if self.TX is None or self.TX.n != self.n:
                raise ValueError("constant-composition ensembles need an n-type TX")
        if self.kind in ("typical", "composite") and (self.QX is None or self.delta is None):
            raise ValueError("typical/composite ensembles need QX and delta")
        if self.n < 1 or self.rate < 0:
            raise ValueError("need n >= 1 and rate >= 0")

    @property
    def M(self) -> int:
        return max(1, math.ceil(math.exp(self.n * self.rate) - 1e-9))

    @property
    def effective_rate(self) -> float:
        return math.log(self.M) / self.n


@dataclass(frozen=True)
class Codebook:
    n: int
    words: np.ndarray  # (M, n) integer symbols; a multiset
    ensemble: str
    seed: int
    meta: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return self.words.shape[0]


def _draw_iid(rng, QX: FiniteDistribution, m: int, n: int) -> np.ndarray:
    cum = np.cumsum(QX.atoms)
    u = rng.random((m, n))
    return np.searchsorted(cum, u, side="right").astype(np.int64)


def _is_typical(words: np.ndarray, QX: FiniteDistribution, delta: float) -> np.ndarray:
    n = words.shape[1]
    ok = np.ones(words.shape[0], dtype=bool)
    for a in range(QX.dim):
        frac = (words == a).sum(axis=1) / n
        ok &= np.abs(frac - QX.atoms[a]) <= delta * QX.atoms[a] + 1e-12
    return ok


def _draw_typical(rng, QX: FiniteDistribution, delta: float, m: int, n: int) -> np.ndarray:
    out = []
    got = 0
    for _ in range(2000):
        batch = _draw_iid(rng, QX, max(m, 256), n)
        keep = batch[_is_typical(batch, QX, delta)]
        if keep.size:
            out.append(keep)
            got += keep.shape[0]
        if got >= m:
            return np.concatenate(out)[:m]
    raise GuardExceededError(f"typical set looks empty at n={n}, delta={delta}")


def _draw_constant_composition(rng, TX: TypeVector, m: int) -> np.ndarray:
    base = np.repeat(np.arange(TX.alphabet_size), TX.counts).astype(np.int64)
    words = np.tile(base, (m, 1))
    return rng.permuted(words, axis=1)


def sample_codebook(spec: EnsembleSpec, seed: int, trial: int = 0) -> Codebook:
    """Draw a codebook of M = ceil(e^{nR}) words from the ensemble law."""
    rng = _stream(seed, trial)
    m, n = spec.M, spec.n
    meta: dict = {"effective_rate": spec.effective_rate, "trial": trial}
    if spec.kind == "iid":
        words = _draw_iid(rng, spec.QX, m, n)
    elif spec.kind == "constant_composition":
        words = _draw_constant_composition(rng, spec.TX, m)
    elif spec.kind == "typical":
        words = _draw_typical(rng, spec.QX, spec.delta, m, n)
    else:
        words, meta = _draw_composite(rng, spec, meta)
    return Codebook(n=n, words=words, ensemble=spec.kind, seed=seed, meta=meta)


def _draw_composite(rng, spec: EnsembleSpec, meta: dict):
    """Typical core plus per-type spreading codewords over off-ball types."""
    from .types_method import enumerate_types

    n, m, delta = spec.n, spec.M, spec.delta
    m_spread_total = min(m - 1, int(math.floor(math.exp(n * (spec.rate - delta)))))
    m_spread_total = max(m_spread_total, 0)
    off_types = []
    for t in enumerate_types(n, spec.QX.dim):
        tv = np.asarray(t.counts, dtype=float) / n
        if 0.5 * np.abs(tv - spec.QX.atoms).sum() > delta / 2.0:
            off_types.append(t)
    parts = []
    if off_types and m_spread_total > 0:
        k = len(off_types)
        per = [m_spread_total // k] * k
        for i in range(m_spread_total % k):
            per[i] += 1
        for t, cnt in zip(off_types, per):
            if cnt > 0:
                parts.append(_draw_constant_composition(rng, t, cnt))
        meta["spread_types"] = sum(1 for c in per if c > 0)
    m_typ = m - sum(p.shape[0] for p in parts)
    parts.insert(0, _draw_typical(rng, spec.QX, delta, m_typ, n))
    meta["typical_words"] = m_typ
    return np.concatenate(parts), meta


# ---------------------------------------------------------------------------
# exact output distributions


def _symbol_powers(n: int, k: int) -> np.ndarray:
    return k ** np.arange(n - 1, -1, -1, dtype=np.int64)


def words_to_indices(words: np.ndarray, k: int) -> np.ndarray:
    return words @ _symbol_powers(words.shape[1], k)


def _log_tensor_row(word: np.ndarray, log_w: np.ndarray) -> np.ndarray:
    v = np.zeros(1)
    for sym in word:
        v = (v[:, None] + log_w[sym][None, :]).ravel()
    return v


def _log_output_distribution(cb: Codebook, channel: Channel) -> np.ndarray:
    """log Q_{Y^n} accumulated in the log domain (general channels)."""
    ny = channel.output_dim
    with np.errstate(divide="ignore"):
        log_w = np.log(channel.rows)
    log_q = np.full(ny**cb.n, -math.inf)
    words, counts = np.unique(cb.words, axis=0, return_counts=True)
    for word, c in zip(words, counts):
        row = _log_tensor_row(word, log_w) + math.log(c)
        log_q = np.logaddexp(log_q, row)
    return log_q - math.log(cb.M)


def _bsc_output_distribution(cb: Codebook, eps: float) -> np.ndarray:
    hist = np.bincount(words_to_indices(cb.words, 2), minlength=2**cb.n).astype(float)
    return hypercube.xor_convolve(hist / cb.M, hypercube.noise_vector(cb.n, eps))


def _is_binary_symmetric(channel: Channel) -> bool:
    r = channel.rows
    return (r.shape == (2, 2) and abs(r[0, 0] - r[1, 1]) < 1e-15
            and abs(r[0, 1] - r[1, 0]) < 1e-15)


def code_output_divergence(cb: Codebook, channel: Channel, target: FiniteDistribution,
                           q, direction: str = "forward") -> float:
    """D_q(Q_{Y^n} || P_Y^{x n}) (forward) or the reverse, exactly, in nats."""
    ny = channel.output_dim
    if ny**cb.n > OUTPUT_ENUM_GUARD:
        raise GuardExceededError("output alphabet too large to enumerate")
    if _is_binary_symmetric(channel) and channel.rows[0, 1] > 0:
        qy = np.clip(_bsc_output_distribution(cb, channel.rows[0, 1]), 0.0, None)
    else:
        qy = np.exp(_log_output_distribution(cb, channel))
    qy = qy / qy.sum()
    pn = target.atoms
    for _ in range(cb.n - 1):
        pn = np.kron(pn, target.atoms)
    Q = FiniteDistribution(qy)
    P = FiniteDistribution(pn)
    return renyi_divergence(Q, P, q) if direction == "forward" else renyi_divergence(P, Q, q)


def ensemble_moment_exact(QX: FiniteDistribution, W: Channel, PY: FiniteDistribution,
                          M: int, q: float) -> float:
    """log E_C[ sum_y Q_{Y|C}(y)^q P_Y(y)^{1-q} ] by enumerating all |X|^M codebooks."""
    nx, ny = W.input_dim, W.output_dim
    if nx**M > MOMENT_ENUM_GUARD:
        raise GuardExceededError("codebook enumeration guard exceeded")
    if q < 1:
        raise ValueError("the ensemble moment is taken at q >= 1")
    combos = np.indices((nx,) * M).reshape(M, -1).T  # (K, M)
    total = 0.0
    py = PY.atoms
    sup = py > 0
    for start in range(0, combos.shape[0], 100_000):
        block = combos[start:start + 100_000]
        rows = W.rows[block]                      # (k, M, ny)
        qy = rows.mean(axis=1)                    # (k, ny)
        weights = QX.atoms[block].prod(axis=1)    # (k,)
        bad = np.any((qy > 0) & ~sup[None, :], axis=1)
        mom = np.where(sup[None, :], qy**q * np.where(sup, py, 1.0)**(1.0 - q), 0.0).sum(axis=1)
        mom = np.where(bad, math.inf, mom)
        total += float(np.sum(weights * mom))
    return math.log(total) if total > 0 else -math.inf


@dataclass(frozen=True)
class RegressionReport:
    slope: float
    stderr: float
    per_n: dict           # n -> (divergence estimate in nats, mean moment)
    predicted: float | None
    effective_rates: dict
    degenerate: bool
    q: float
    trials: int
    seed: int


def exponent_estimate(channel: Channel, target: FiniteDistribution, QX: FiniteDistribution,
                      rate: float, n_list, q: float, trials: int, seed: int,
                      kind: str = "iid", delta: float | None = None,
                      predicted: float | None = None) -> RegressionReport:
    """Monte-Carlo estimate of the decay exponent of the ensemble divergence.

    Per blocklength: the plug-in mean of e^{(q-1) D_q} over codebooks, turned
    into the conditional divergence log(mean)/(q-1); the report regresses
    -log(divergence) on n.
    """
    if trials < 30:
        raise ValueError("need at least 30 trials")
    per_n = {}
    rates = {}
    xs, ys = [], []
    degenerate = False
    for n in n_list:
        spec = EnsembleSpec(kind=kind, n=n, rate=rate, QX=QX, delta=delta)
        rates[n] = spec.effective_rate
        log_moms = np.empty(trials)
        for t in range(trials):
            cb = sample_codebook(spec, seed, trial=t)
            d = code_output_divergence(cb, channel, target, q)
            log_moms[t] = (q - 1.0) * d
        mean_mom = float(np.exp(logsumexp(log_moms) - math.log(trials)))
        div = math.log(mean_mom) / (q - 1.0) if mean_mom > 1.0 + 1e-13 else 0.0
        per_n[n] = (div, mean_mom)
        if div <= 0:
            degenerate = True
            continue
        xs.append(n)
        ys.append(-math.log(div))
    if len(xs) >= 3:
        A = np.vstack([np.asarray(xs, dtype=float), np.ones(len(xs))]).T
        coef, res, *_ = np.linalg.lstsq(A, np.asarray(ys), rcond=None)
        slope = float(coef[0])
        dof = max(len(xs) - 2, 1)
        sigma2 = float(res[0]) / dof if res.size else 0.0
        sx = float(np.sum((np.asarray(xs) - np.mean(xs)) ** 2))
        stderr = math.sqrt(sigma2 / sx) if sx > 0 else math.inf
    else:
        slope, stderr, degenerate = math.nan, math.inf, True
    return RegressionReport(slope=slope, stderr=stderr, per_n=per_n, predicted=predicted,
                            effective_rates=rates, degenerate=degenerate, q=q,
                            trials=trials, seed=seed)


# ---------------------------------------------------------------------------
# packing-covering statistics for constant-composition codes


def _enumerate_type_class_binary(n: int, ones: int) -> np.ndarray:
    out = np.zeros((math.comb(n, ones), n), dtype=np.int8)
    for i, pos in enumerate(combinations(range(n), ones)):
        out[i, list(pos)] = 1
    return out


def _enumerate_type_class(counts) -> np.ndarray:
    counts = list(counts)
    n = sum(counts)
    k = len(counts)
    if k == 2:
        return _enumerate_type_class_binary(n, counts[1])
    if math.exp(log_multinomial(counts)) > 2e5:
        raise GuardExceededError("type class too large to enumerate")
    seqs = []

    def rec(prefix, rem):
        if len(prefix) == n:
            seqs.append(prefix.copy())
            return
        for a in range(k):
            if rem[a] > 0:
                rem[a] -= 1
                prefix.append(a)
                rec(prefix, rem)
                prefix.pop()
                rem[a] += 1

    rec([], counts)
    return np.asarray(seqs, dtype=np.int8)


@dataclass(frozen=True)
class PackingCoveringReport:
    regime: str                  # "covering" (B1) or "packing" (B2)
    mutual_information: float    # I_T(X;Y) in nats
    expected_phi: float
    per_trial_sup_dev: np.ndarray | None
    per_trial_sup_phi: np.ndarray | None
    violation_fraction: float
    empirical_mean_phi: float
    threshold: float
    M: int
    n: int


def packing_covering_stats(TXY: ConditionalTypeVector, R: float, eps: float,
                           trials: int, seed: int) -> PackingCoveringReport:
    """phi_C(y) = #{codewords in the conditional type class of y} over T_{T_Y}.

    Covering regime (I_T <= R - 3 eps): reports sup_y |phi/E[phi] - 1| per
    trial.  Packing regime: reports sup_y phi against the e^{3 n eps} ceiling.
    """
    counts = np.asarray(TXY.counts, dtype=int)
    n = TXY.n
    kx, ky = counts.shape
    tx = counts.sum(axis=1)
    ty = counts.sum(axis=0)
    TX = TypeVector(n, tuple(int(c) for c in tx))
    M = max(1, math.ceil(math.exp(n * R) - 1e-9))

    joint = counts / n
    px, py = tx / n, ty / n
    m = joint > 0
    i_t = float(np.sum(joint[m] * np.log(joint[m] / (np.outer(px, py)[m]))))

    # |T_{T_X|Y}(y)| = prod_b multinomial(ty_b over counts[:, b])
    log_cond_class = sum(log_multinomial(counts[:, b]) for b in range(ky))
    log_e_phi = math.log(M) + log_cond_class - log_multinomial(tx)
    e_phi = math.exp(log_e_phi)

    ys = _enumerate_type_class(tuple(int(c) for c in ty))
    covering = i_t <= R - 3 * eps
    sup_devs = np.empty(trials) if covering else None
    sup_phis = np.empty(trials) if not covering else None
    ceiling = math.exp(3 * n * eps)
    violations = 0
    mean_phi_acc = 0.0
    y_onehots = [(ys == b).astype(np.float32) for b in range(ky)]
    binary = kx == 2 and ky == 2
    for t in range(trials):
        cb = sample_codebook(EnsembleSpec(kind="constant_composition", n=n, rate=R, TX=TX),
                             seed, trial=t)
        if binary:
            # constant composition + fixed y-type: the (1,1) overlap pins the
            # whole joint type, so one matmul suffices
            xa = cb.words.astype(np.float32)
            overlap = np.rint(xa @ y_onehots[1].T).astype(np.int64)
            phi = (overlap == counts[1, 1]).sum(axis=0)
        else:
            match = np.ones((M, ys.shape[0]), dtype=bool)
            for a in range(kx):
                xa = (cb.words == a).astype(np.float32)
                for b in range(ky):
                    overlap = np.rint(xa @ y_onehots[b].T).astype(np.int64)
                    match &= overlap == counts[a, b]
            phi = match.sum(axis=0)
        mean_phi_acc += float(phi.mean())
        if covering:
            sup_devs[t] = float(np.abs(phi / e_phi - 1.0).max())
        else:
            sup_phis[t] = float(phi.max())
            if phi.max() > ceiling:
                violations += 1
    return PackingCoveringReport(
        regime="covering" if covering else "packing",
        mutual_information=i_t,
        expected_phi=e_phi,
        per_trial_sup_dev=sup_devs,
        per_trial_sup_phi=sup_phis,
        violation_fraction=violations / trials,
        empirical_mean_phi=mean_phi_acc / trials,
        threshold=math.exp(-n * eps) if covering else ceiling,
        M=M,
        n=n,
    )


def random_subset(n: int, log_size_bits: float, seed: int) -> np.ndarray:
    """Uniformly random subset of {0,1}^n of size round(2^log_size), as indices."""
    if not 0 <= log_size_bits <= n:
        raise ValueError("log size must lie in [0, n]")
    total = 1 << n
    size = int(round(2.0**log_size_bits))
    size = max(1, min(size, total))
    rng = _stream(seed, 0)
    if total <= 1 << 22:
        idx = rng.choice(total, size=size, replace=False)
    else:
        chosen = set()
        idx = np.empty(size, dtype=np.int64)
        for j, r in enumerate(range(total - size, total)):
            t = int(rng.integers(0, r + 1))
            pick = t if t not in chosen else r
            chosen.add(pick)
            idx[j] = pick
    return np.sort(idx)
