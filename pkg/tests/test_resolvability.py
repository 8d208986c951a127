import math

import numpy as np
import pytest

from renyilab.optim import OptimizerConfig
from renyilab.prob import Channel, FiniteDistribution, JointDistribution, binary_renyi
from renyilab.resolvability import (
    ResolvabilityProblem,
    binary_closed_forms,
    dual_asymptotic,
    feasible_inputs_exist,
    forward_asymptotic,
    iid_divergence_limit,
    iid_exponent,
    prune_forward,
    r_min,
    resolvability_rate,
    reverse_asymptotic,
    typical_exponent,
)

LN2 = math.log(2.0)
UNIF2 = FiniteDistribution.uniform(2)


def bsc_problem(eps, q, R_bits, direction="forward"):
    return ResolvabilityProblem(Channel.bsc(eps), UNIF2, R_bits * LN2, q, direction)


class TestForward:
    def test_binary_closed_form_spot(self):
        res = forward_asymptotic(bsc_problem(0.1, 2.0, 0.5))
        want = (1.0 - binary_renyi(0.1, 2.0).entropy_bits - 0.5) * LN2
        assert res.value == pytest.approx(want, abs=1e-6)

    def test_zero_above_max_row_divergence(self):
        # any channel: R >= max_x D_q(W_x||P_Y) forces the limit to 0
        W = Channel(np.array([[0.7, 0.2, 0.1], [0.1, 0.6, 0.3]]))
        PY = FiniteDistribution([0.4, 0.4, 0.2])
        from renyilab.prob import renyi_divergence
        R = max(renyi_divergence(W.row(x), PY, 3.0) for x in range(2)) + 1e-6
        res = forward_asymptotic(ResolvabilityProblem(W, PY, R, 3.0, "forward"))
        assert res.value == pytest.approx(0.0, abs=1e-6)

    def test_identity_channel_q0_constrained_value(self):
        # the support constraint forces deterministic rows: value = log 2
        # (grid oracle over the constrained set concurs; see decisions ledger)
        res = forward_asymptotic(ResolvabilityProblem(Channel.identity(2), UNIF2, 0.0, 0.0,
                                                      "forward"))
        assert res.value == pytest.approx(LN2, abs=1e-6)

    def test_q0_grid_oracle_small(self):
        # independent oracle: constrained dense grid over (Q_X, deterministic rows
        # mixtures) for BSC(0.3), R = 0.1
        eps, R = 0.3, 0.1
        W = Channel.bsc(eps).rows
        best = math.inf
        g = 40
        for i in range(g + 1):
            qx = np.array([i / g, 1 - i / g])
            for j in range(g + 1):
                for k in range(g + 1):
                    rows = np.array([[j / g, 1 - j / g], [k / g, 1 - k / g]])
                    mask = rows > 0
                    if np.any(mask & (W <= 0)):
                        continue
                    b = sum(qx[x] * sum(rows[x, y] * math.log(rows[x, y] / 0.5)
                                        for y in range(2) if rows[x, y] > 0)
                            for x in range(2))
                    qy = qx @ rows
                    c = sum(qy[y] * math.log(qy[y] / 0.5) for y in range(2) if qy[y] > 0)
                    best = min(best, max(b - R, c))
        res = forward_asymptotic(ResolvabilityProblem(Channel.bsc(eps), UNIF2, R, 0.0, "forward"))
        assert res.value <= best + 1e-6
        assert res.value >= best - 0.01  # grid is coarse

    def test_fixed_type_skips_outer(self):
        ft = FiniteDistribution([0.3, 0.7])
        res = forward_asymptotic(bsc_problem(0.1, 2.0, 0.3), fixed_type=ft)
        free = forward_asymptotic(bsc_problem(0.1, 2.0, 0.3))
        assert res.meta.get("fixed_type")
        assert res.value >= free.value - 1e-9

    def test_pruning_empties_alphabet(self):
        W = Channel(np.array([[0.5, 0.5]]))
        PY = FiniteDistribution([1.0, 0.0])
        res = forward_asymptotic(ResolvabilityProblem(W, PY, 0.1, 2.0, "forward"))
        assert res.value == math.inf
        assert res.status == "infeasible"
        keep, _ = prune_forward(W, PY)
        assert keep == []

    def test_continuity_in_q(self):
        vals = []
        qs = [0.6, 0.8, 0.95, 1.0, 1.05, 1.3]
        for q in qs:
            vals.append(forward_asymptotic(bsc_problem(0.2, q, 0.3)).value)
        diffs = np.abs(np.diff(vals))
        assert diffs.max() < 0.15  # no jumps across the q = 1 seam
        slopes = diffs / np.diff(qs)
        assert np.all(slopes < 10 * (np.median(slopes) + 0.05))


class TestReverse:
    def test_optimal_lambda_zero_regime(self):
        # R >= D(eps): reverse value 0
        eps = 0.1
        d1 = 1.0 - binary_renyi(eps, 1.0).entropy_bits
        res = reverse_asymptotic(bsc_problem(eps, 2.0, d1 + 0.05, "reverse"))
        assert res.value == pytest.approx(0.0, abs=1e-7)

    def test_below_r_min_infinite(self):
        prob = ResolvabilityProblem(Channel.identity(2), UNIF2, 0.2, 2.0, "reverse")
        res = reverse_asymptotic(prob)
        assert res.value == math.inf
        assert res.meta.get("below_r_min")

    def test_boundary_flagged(self):
        prob = ResolvabilityProblem(Channel.identity(2), UNIF2, LN2, 2.0, "reverse")
        res = reverse_asymptotic(prob)
        assert res.value == math.inf
        assert res.meta.get("boundary")

    def test_q0_closed_form(self):
        res = reverse_asymptotic(bsc_problem(0.2, 0.0, 0.3, "reverse"))
        assert res.value == pytest.approx(0.0, abs=1e-12)
        # every row misses half of supp(P_Y): min_x -log W_x{supp P_Y} = log 2
        W = Channel(np.array([[0.5, 0.25, 0.25], [0.25, 0.25, 0.5]]))
        PY = FiniteDistribution([0.5, 0.0, 0.5])
        res = reverse_asymptotic(ResolvabilityProblem(W, PY, 0.3, 0.0, "reverse"))
        want = -math.log(0.75)
        assert res.value == pytest.approx(want, abs=1e-12)

    def test_matches_binary_closed_form(self):
        for q in (1.0, 3.0):
            res = reverse_asymptotic(bsc_problem(0.2, q, 0.2, "reverse"))
            want = binary_closed_forms(0.2, q, 0.2).reverse_bits * LN2
            assert res.value == pytest.approx(want, abs=1e-5)


class TestRMin:
    def test_full_support_zero(self):
        assert r_min(Channel.bsc(0.1), UNIF2) == 0.0

    def test_identity_channel(self):
        assert r_min(Channel.identity(2), UNIF2) == pytest.approx(LN2, abs=1e-7)
        py = FiniteDistribution([0.25, 0.25, 0.25, 0.25])
        assert r_min(Channel.identity(4), py) == pytest.approx(math.log(4), abs=1e-6)

    def test_equal_point_rows(self):
        W = Channel(np.array([[1.0, 0.0], [1.0, 0.0]]))
        assert r_min(W, FiniteDistribution([1.0, 0.0])) == pytest.approx(0.0, abs=1e-9)

    def test_fixed_type_identity_is_infinite(self):
        val = r_min(Channel.identity(2), UNIF2, fixed_type=FiniteDistribution([0.3, 0.7]))
        assert val == math.inf


class TestDual:
    def test_forward_low_matches_primal(self):
        for q, rb in ((0.3, 0.25), (0.7, 0.15)):
            prob = bsc_problem(0.25, q, rb)
            p = forward_asymptotic(prob)
            d = dual_asymptotic(prob)
            assert d.value == pytest.approx(p.value, abs=2e-4)

    def test_forward_high_primal_inner_matches_dual_inner(self):
        # primal=dual invariant on a random small-alphabet suite; the inner
        # identity is per input law, so fixed types keep the check exact
        rng = np.random.default_rng(10)
        cfg = OptimizerConfig(value_tol=1e-8, n_starts=8, grid_schedule=(8, 16), max_iters=80)
        for _ in range(4):
            nx, ny = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            W = Channel(rng.dirichlet(np.ones(ny), size=nx) * 0.9 + 0.1 / ny)
            PY = FiniteDistribution(rng.dirichlet(np.ones(ny)) * 0.8 + 0.2 / ny)
            QX = FiniteDistribution(rng.dirichlet(np.ones(nx)))
            prob = ResolvabilityProblem(W, PY, 0.3, 2.5, "forward")
            via_dual = forward_asymptotic(prob, fixed_type=QX, cfg=cfg)
            via_primal = forward_asymptotic(prob, fixed_type=QX, cfg=cfg, inner="primal")
            assert via_primal.value == pytest.approx(via_dual.value,
                                                     abs=2e-4 + via_primal.gap + via_dual.gap)

    def test_reverse_dual_matches_closed_form(self):
        for q in (2.0, math.inf):
            prob = bsc_problem(0.2, q, 0.15, "reverse")
            d = dual_asymptotic(prob)
            want = binary_closed_forms(0.2, q, 0.15).reverse_bits * LN2
            assert d.value == pytest.approx(want, abs=1e-6)

    def test_plugin_lower_bound_clause(self):
        # S_Y = P_Y, lambda = 0 in the low-q dual reproduces the second primal clause
        prob = bsc_problem(0.2, 0.5, 0.2)
        d = dual_asymptotic(prob)
        p = forward_asymptotic(prob)
        assert d.value <= p.value + 2e-4


class TestRates:
    def test_bsc_rates(self):
        for q in (0.5, 1.0, 2.0, math.inf):
            rf = resolvability_rate(Channel.bsc(0.2), UNIF2, q, "forward")
            hq = binary_renyi(0.2, q).entropy_bits
            want = (1 - hq) if q > 1 else (1 - binary_renyi(0.2, 1.0).entropy_bits)
            assert rf / LN2 == pytest.approx(want, abs=1e-6)

    def test_identity_channel_reverse_rates(self):
        PY = FiniteDistribution([0.7, 0.3])
        W = Channel.identity(2)
        cfg = OptimizerConfig(value_tol=1e-8, n_starts=6, grid_schedule=(8, 16), max_iters=60)
        h0 = LN2
        h = -(0.7 * math.log(0.7) + 0.3 * math.log(0.3))
        assert resolvability_rate(W, PY, 2.0, "reverse", cfg) == pytest.approx(h0, abs=2e-3)
        assert resolvability_rate(W, PY, 0.5, "reverse", cfg) == pytest.approx(h, abs=1e-6)
        assert resolvability_rate(W, PY, 0.0, "reverse", cfg) == 0.0

    def test_infeasible_target(self):
        W = Channel(np.array([[1.0, 0.0], [1.0, 0.0]]))
        assert not feasible_inputs_exist(W, UNIF2)
        with pytest.raises(ValueError):
            resolvability_rate(W, UNIF2, 2.0, "forward")

    def test_forward_zero_iff_rate_above(self):
        # rate consistency on the binary grid
        eps = 0.2
        for q in (1.5, 3.0):
            rq = resolvability_rate(Channel.bsc(eps), UNIF2, q, "forward")
            above = forward_asymptotic(bsc_problem(eps, q, rq / LN2 + 0.02))
            below = forward_asymptotic(bsc_problem(eps, q, max(rq / LN2 - 0.05, 0.01)))
            assert above.value <= 1e-5
            assert below.value > 1e-4


class TestExponents:
    def test_independent_joint(self):
        joint = JointDistribution.dsbs(0.5)  # X and Y independent
        rep = iid_exponent(joint, 3.0, 0.6)
        assert rep.exponent == pytest.approx(min(0.6, 2 * 0.6), abs=1e-9)
        assert rep.mechanism == "gamma(1)"

    def test_dsbs_example_values(self):
        joint = JointDistribution.dsbs(0.1)
        rep = iid_exponent(joint, 3.0, 0.9 * LN2)
        g1 = (0.9 - (1 - binary_renyi(0.1, 2.0).entropy_bits)) * LN2
        g2 = 2 * (0.9 - (1 - binary_renyi(0.1, 3.0).entropy_bits)) * LN2
        assert rep.exponent == pytest.approx(min(g1, g2), abs=1e-10)
        assert rep.exponent == pytest.approx(g1, abs=1e-10)

    def test_infinite_order_no_decay(self):
        rep = iid_exponent(JointDistribution.dsbs(0.1), math.inf, 5.0)
        assert rep.no_decay
        assert rep.exponent == pytest.approx(math.log(1.8), abs=1e-12)  # log sup W/P
        rep0 = iid_exponent(JointDistribution.dsbs(0.5), math.inf, 5.0)
        assert rep0.exponent == pytest.approx(0.0, abs=1e-12)

    def test_rate_precondition_warning(self):
        rep = iid_exponent(JointDistribution.dsbs(0.1), 4.0, 0.05)
        assert rep.exponent < 0
        assert rep.warning is not None

    def test_gamma_concavity_and_interval(self):
        joint = JointDistribution.dsbs(0.15)
        R = 0.8 * LN2
        from renyilab.resolvability import _gamma_iid
        ss = np.linspace(0.05, 1.0, 21)
        vals = [_gamma_iid(float(s), joint, R) for s in ss]
        d2 = np.diff(vals, 2)
        assert np.all(d2 <= 1e-9)  # concave in s
        rep = iid_exponent(joint, 1.5, R)
        assert rep.exponent >= max(vals[0], vals[-1]) - 1e-8

    def test_zero_exponent_at_threshold(self):
        joint = JointDistribution.dsbs(0.2)
        from renyilab.prob import renyi_divergence
        d_q = renyi_divergence(FiniteDistribution([0.8, 0.2]), UNIF2, 3.0)
        rep = iid_exponent(joint, 3.0, d_q)
        assert rep.exponent == pytest.approx(0.0, abs=1e-10)  # gamma(q-1) = 0

    def test_typical_cap(self):
        joint = JointDistribution.dsbs(0.1)
        rep = typical_exponent(joint, 2.0, 0.9 * LN2, eps=0.05)
        cap = 0.05**2 * 0.5 / 3
        g1 = 1.0 * (0.9 * LN2 - 1.05 * (1 - binary_renyi(0.1, 2.0).entropy_bits) * LN2)
        assert rep.exponent == pytest.approx(min(cap, g1), abs=1e-10)

    def test_typical_small_eps_cap_dominates(self):
        joint = JointDistribution.dsbs(0.5)
        rep = typical_exponent(joint, 2.0, 0.5, eps=0.01)
        assert rep.exponent == pytest.approx(0.01**2 * 0.5 / 3, abs=1e-12)
        assert rep.mechanism == "eps cap"


class TestIidLimit:
    def test_high_order_clause(self):
        QX = FiniteDistribution([0.3, 0.7])
        W = Channel.bsc(0.1)
        from renyilab.prob import renyi_divergence, compose_marginal, conditional_renyi_divergence
        R = 0.05
        got = iid_divergence_limit(QX, W, UNIF2, 2.0, R)
        QY = compose_marginal(QX, W)
        ref = Channel(np.tile(UNIF2.atoms, (2, 1)))
        want = max(conditional_renyi_divergence(W, ref, QX, 2.0) - R,
                   renyi_divergence(QY, UNIF2, 2.0))
        assert got == pytest.approx(want, abs=1e-12)

    def test_low_order_lambda_zero_limit(self):
        # R huge: the optimal lambda is 0 and the limit is D_q(Q_Y||P_Y)
        QX = FiniteDistribution([0.3, 0.7])
        W = Channel.bsc(0.1)
        from renyilab.prob import compose_marginal, renyi_divergence
        got = iid_divergence_limit(QX, W, UNIF2, 0.5, 5.0)
        want = renyi_divergence(compose_marginal(QX, W), UNIF2, 0.5)
        assert got == pytest.approx(want, abs=1e-9)


class TestBinaryClosedForms:
    def test_forward_positive_part(self):
        cf = binary_closed_forms(0.1, 2.0, 0.5)
        assert cf.forward_bits == pytest.approx(1 - binary_renyi(0.1, 2).entropy_bits - 0.5,
                                                abs=1e-14)
        cf2 = binary_closed_forms(0.1, 2.0, 0.9)
        assert cf2.forward_bits == 0.0

    def test_q0_forward_zero(self):
        for rb in (0.0, 0.3, 0.9):
            assert binary_closed_forms(0.3, 0.0, rb).forward_bits == 0.0

    def test_reverse_lambda_zero_clause(self):
        d1 = 1 - binary_renyi(0.1, 1.0).entropy_bits
        cf = binary_closed_forms(0.1, 2.0, d1 + 0.01)
        assert cf.reverse_bits == 0.0
        assert cf.lambda_star_reverse == 0.0

    def test_forward_lambda_clauses(self):
        eps, q = 0.2, 0.4
        eps_q = eps**q / (eps**q + (1 - eps) ** q)
        lo = 1 - binary_renyi(eps_q, 1.0).entropy_bits
        hi = 1 - binary_renyi(eps, 1.0).entropy_bits
        assert binary_closed_forms(eps, q, lo / 2).lambda_star_forward == 1.0
        assert binary_closed_forms(eps, q, hi + 0.01).lambda_star_forward == 0.0
        mid = binary_closed_forms(eps, q, (lo + hi) / 2)
        assert 0.0 < mid.lambda_star_forward < 1.0

    def test_lambda_star_roots(self):
        # rb inside (D(eps_q), D(eps)) = (0.053, 0.278) so lambda* is interior
        eps, q, rb = 0.2, 0.4, 0.15
        cf = binary_closed_forms(eps, q, rb)
        lam = cf.lambda_star_forward
        qp = q / (q - 1)
        u = -qp / (lam - qp)
        s = eps**u / (eps**u + (1 - eps) ** u)
        from renyilab.prob import binary_entropy_bits
        assert abs((1 - binary_entropy_bits(s)) - rb) < 1e-9

    def test_scalar_optimizer_agrees_with_root(self):
        from renyilab.optim import scalar_optimize
        eps, q, rb = 0.2, 2.0, 0.15
        cf = binary_closed_forms(eps, q, rb)
        val = scalar_optimize(
            lambda l: l * ((1 - binary_renyi(eps, 1 / (1 + l)).entropy_bits) - rb),
            (0.0, 50.0), "max").value
        assert cf.reverse_bits == pytest.approx(val, abs=1e-9)

    def test_eps_domain(self):
        with pytest.raises(ValueError):
            binary_closed_forms(0.6, 2.0, 0.1)
        with pytest.raises(ValueError):
            binary_closed_forms(0.0, 2.0, 0.1)
