"""Deterministic optimization over probability simplexes and scalar intervals.

The variational formulas evaluated by this package are mostly min/max
problems over one or more probability simplexes, often nested.  Nothing here
claims global optimality for the non-convex outer problems: results carry a
certified-gap estimate taken from the final refinement sweep, and closed
forms serve as ground truth where they exist.

The engine combines
  * a global stage (exhaustive simplex grids up to dimension 4, seeded
    Dirichlet clouds beyond),
  * multi-start exponentiated-gradient descent in softmax coordinates, and
  * a pattern-search polish along edge directions (e_i - e_j), which is what
    actually reaches simplex faces and vertices.
Ties between equally good optima break toward the lexicographically first
point.  Identical (objective, cfg, seed) triples give bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "OptimizerConfig",
    "OptResult",
    "optimize_simplex",
    "scalar_optimize",
    "saddle_solve",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    value_tol: float = 1e-7
    max_iters: int = 200
    n_starts: int = 16
    grid_schedule: tuple = (8, 24, 48)
    scalar_grid: int = 65
    seed: int = 0
    vertex_starts: bool = True  # seed descents from simplex vertices too

    def __post_init__(self):
        if self.value_tol <= 0 or self.n_starts < 1:
            raise ValueError("tolerance must be positive and starts >= 1")


DEFAULT_CONFIG = OptimizerConfig()

# cheaper profile for inner loops of nested solves
FAST_CONFIG = OptimizerConfig(value_tol=1e-9, max_iters=120, n_starts=6, grid_schedule=(8, 24))


@dataclass(frozen=True)
class OptResult:
    value: float
    args: tuple  # tuple of np.ndarray simplex points (or scalars for scalar solves)
    status: str  # converged | max_iter | infeasible | divergent
    gap: float
    meta: dict = field(default_factory=dict)

    @property
    def point(self):
        return self.args[0] if self.args else None


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _blocks_from_logits(z: np.ndarray, dims: Sequence[int]) -> list:
    out, i = [], 0
    for d in dims:
        out.append(_softmax(z[i:i + d]))
        i += d
    return out


def _simplex_grid(k: int, g: int):
    """All points c/g with c a composition of g into k parts (lexicographic)."""
    if k == 1:
        yield np.array([1.0])
        return
    for c in _comps(g, k):
        yield np.asarray(c, dtype=float) / g


def _comps(n, k):
    if k == 1:
        yield (n,)
        return
    for f in range(n + 1):
        for rest in _comps(n - f, k - 1):
            yield (f,) + rest


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    for x, y in zip(a, b):
        if x < y - 1e-15:
            return True
        if x > y + 1e-15:
            return False
    return False


class _Tracker:
    """Keeps the best (minimization-sense) feasible candidate seen."""

    def __init__(self, fun, feasible=None):
        self.fun = fun
        self.feasible = feasible
        self.best_val = math.inf
        self.best_x = None
        self.n_evals = 0

    def eval(self, blocks) -> float:
        v = self.fun(blocks)
        self.n_evals += 1
        if not math.isnan(v):
            ok = self.feasible is None or self.feasible(blocks)
            if ok and (v < self.best_val - 1e-15
                       or (abs(v - self.best_val) <= 1e-12 and self.best_x is not None
                           and _lex_less(np.concatenate(blocks), np.concatenate(self.best_x)))):
                self.best_val = v
                self.best_x = [b.copy() for b in blocks]
        return v


def _eg_descent(tracker, z0, dims, max_iters, tol, gradient=None, sign=1.0):
    """Exponentiated gradient = plain gradient descent in softmax logits."""
    z = z0.copy()
    fz = tracker.eval(_blocks_from_logits(z, dims))
    if math.isinf(fz):
        return
    step = 0.5
    h = 1e-6
    n = z.size
    for _ in range(max_iters):
        if gradient is not None:
            blocks = _blocks_from_logits(z, dims)
            amb = gradient(blocks)
            parts = []
            for b, gb in zip(blocks, amb):
                gb = sign * np.asarray(gb, dtype=float)
                parts.append(b * (gb - float(b @ gb)))
            g = np.concatenate(parts)
            if not np.all(np.isfinite(g)):
                gradient = None
                continue
        else:
            g = np.zeros(n)
            for i in range(n):
                zp = z.copy()
                zp[i] += h
                zm = z.copy()
                zm[i] -= h
                fp = tracker.eval(_blocks_from_logits(zp, dims))
                fm = tracker.eval(_blocks_from_logits(zm, dims))
                g[i] = (fp - fm) / (2 * h)
        gn = np.linalg.norm(g)
        if not np.isfinite(gn) or gn < 1e-12:
            break
        improved = False
        for _ in range(25):
            z_new = z - step * g / max(gn, 1.0)
            f_new = tracker.eval(_blocks_from_logits(z_new, dims))
            if f_new < fz - 1e-15:
                z, fz = z_new, f_new
                step = min(step * 1.6, 50.0)
                improved = True
                break
            step *= 0.5
        if not improved or step < 1e-12:
            break
        if abs(fz - tracker.best_val) < tol and gn * step < tol:
            break


def _pattern_polish(tracker, blocks0, max_levels=40, h0=0.25, tol=1e-12):
    """Coordinate-pair pattern search; reaches faces/vertices exactly."""
    blocks = [b.copy() for b in blocks0]
    fb = tracker.eval(blocks)
    h = h0
    last_improvement = math.inf
    for _ in range(max_levels):
        moved = True
        while moved:
            moved = False
            for bi, b in enumerate(blocks):
                k = b.size
                if k == 1:
                    continue
                for i in range(k):
                    for j in range(k):
                        if i == j:
                            continue
                        d = min(h, b[j])
                        if d <= 0:
                            continue
                        cand = [x.copy() for x in blocks]
                        cand[bi][i] += d
                        cand[bi][j] -= d
                        cand[bi][cand[bi] < 1e-17] = 0.0
                        cand[bi] /= cand[bi].sum()
                        fc = tracker.eval(cand)
                        if fc < fb - 1e-15:
                            last_improvement = fb - fc
                            blocks, fb = cand, fc
                            moved = True
        h *= 0.5
        if h < tol:
            break
    return fb, last_improvement


def optimize_simplex(objective: Callable, dims, sense: str = "min",
                     cfg: OptimizerConfig | None = None, x0_list: Sequence | None = None,
                     feasible: Callable | None = None, penalty: Callable | None = None,
                     gradient: Callable | None = None) -> OptResult:
    """Optimize a total extended-real objective over a product of simplexes.

    ``objective`` receives a list of 1-D simplex points (one per entry of
    ``dims``; a bare int means one block).  ``feasible``/``penalty`` implement
    caller constraints: candidates failing ``feasible`` are never returned and
    ``penalty`` (>= 0, zero when satisfied) is added with increasing weights
    during the search.
    """
    cfg = cfg or DEFAULT_CONFIG
    if isinstance(dims, int):
        dims = [dims]
    dims = list(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError("dimensions must be >= 1")
    sign = 1.0 if sense == "min" else -1.0
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")

    if dims == [2]:
        # a 2-simplex is one scalar: dense pre-grid + golden section; an
        # infeasible point is scored as the worst value so the grid skips it
        bad = math.inf if sense == "min" else -math.inf

        def f1(t: float) -> float:
            x = [np.array([1.0 - t, t])]
            if feasible is not None and not feasible(x):
                return bad
            return objective(x)

        r = scalar_optimize(f1, (0.0, 1.0), sense, cfg)
        t = float(r.args[0])
        if feasible is not None and not feasible([np.array([1.0 - t, t])]):
            # golden refinement can land just outside a thin feasible window:
            # fall back to the best feasible grid point
            grid = np.linspace(0.0, 1.0, max(cfg.scalar_grid, 129))
            vals = [f1(float(u)) for u in grid]
            order = np.argsort(vals) if sense == "min" else np.argsort(vals)[::-1]
            t = None
            for i in order:
                if math.isfinite(vals[int(i)]):
                    t = float(grid[int(i)])
                    break
            if t is None:
                return OptResult(math.nan, tuple(), "infeasible", math.inf,
                                 {"fast_path": "dim2"})
            return OptResult(f1(t), (np.array([1.0 - t, t]),), "converged",
                             max(r.gap, cfg.value_tol), {"fast_path": "dim2"})
        return OptResult(r.value, (np.array([1.0 - t, t]),), r.status,
                         max(r.gap, cfg.value_tol), {"fast_path": "dim2"})


    weights = [0.0] if penalty is None else [0.0, 1e3, 1e6]
    rng = np.random.default_rng(cfg.seed)

    def base(blocks):
        v = objective(blocks)
        return sign * v

    tracker = _Tracker(base, feasible=feasible)

    # start set: barycenters, vertices, Dirichlet cloud, caller hints
    starts: list = []
    bary = [np.full(d, 1.0 / d) for d in dims]
    starts.append(bary)
    if cfg.vertex_starts:
        for bi, d in enumerate(dims):
            if d == 1:
                continue
            for v in range(d):
                s = [b.copy() for b in bary]
                s[bi] = np.full(d, 1e-9)
                s[bi][v] = 1.0
                s[bi] /= s[bi].sum()
                starts.append(s)
    for _ in range(max(cfg.n_starts - len(starts), 2)):
        starts.append([rng.dirichlet(np.ones(d)) for d in dims])
    if x0_list:
        for s in x0_list:
            s = [np.asarray(b, dtype=float) for b in (s if isinstance(s, (list, tuple)) else [s])]
            starts.append([np.clip(b, 1e-15, None) / np.clip(b, 1e-15, None).sum() for b in s])

    # global grid stage (exhaustive only for small products)
    total_combo = 1.0
    for d in dims:
        total_combo *= d
    for g in cfg.grid_schedule:
        if all(d <= 4 for d in dims) and total_combo <= 64:
            grids = [list(_simplex_grid(d, g)) for d in dims]
            sizes = [len(gr) for gr in grids]
            if np.prod([float(s) for s in sizes]) <= 4e4:
                idx = [0] * len(dims)
                while True:
                    tracker.eval([grids[b][idx[b]] for b in range(len(dims))])
                    for b in range(len(dims) - 1, -1, -1):
                        idx[b] += 1
                        if idx[b] < sizes[b]:
                            break
                        idx[b] = 0
                    else:
                        break
            else:
                for _ in range(g * 40):
                    tracker.eval([rng.dirichlet(np.ones(d)) for d in dims])
        else:
            for _ in range(g * 40):
                tracker.eval([rng.dirichlet(np.ones(d)) for d in dims])

    if tracker.best_x is not None:
        starts.append(tracker.best_x)

    for w in weights:
        if w == 0.0:
            track_w = tracker
            grad_w = gradient
        else:
            def pen_fun(blocks, _w=w):
                return base(blocks) + _w * penalty(blocks)
            track_w = _Tracker(pen_fun, feasible=feasible)
            track_w.best_val, track_w.best_x = math.inf, None
            grad_w = None
        for s in starts:
            z0 = np.concatenate([np.log(np.clip(b, 1e-12, None)) for b in s])
            _eg_descent(track_w, z0, dims, cfg.max_iters, cfg.value_tol,
                        gradient=grad_w, sign=sign)
        if w != 0.0 and track_w.best_x is not None:
            tracker.eval(track_w.best_x)  # re-score on the true objective

    if tracker.best_x is None:
        return OptResult(value=math.nan, args=tuple(), status="infeasible", gap=math.inf)

    _, last_impr = _pattern_polish(tracker, tracker.best_x)

    # explicit face enumeration for low dimension: re-polish on the support
    # faces suggested by near-zero coordinates
    if all(d <= 4 for d in dims):
        cur = tracker.best_x
        for bi, b in enumerate(cur):
            small = np.flatnonzero(b < 1e-4)
            if small.size and small.size < b.size:
                for r in range(1, small.size + 1):
                    for drop in combinations(small.tolist(), r):
                        f = b.copy()
                        f[list(drop)] = 0.0
                        if f.sum() <= 0:
                            continue
                        cand = [x.copy() for x in cur]
                        cand[bi] = f / f.sum()
                        tracker.eval(cand)
        _pattern_polish(tracker, tracker.best_x, h0=1e-3)

    gap = max(cfg.value_tol, last_impr if math.isfinite(last_impr) else cfg.value_tol)
    status = "converged" if math.isfinite(tracker.best_val) else "divergent"
    return OptResult(value=sign * tracker.best_val,
                     args=tuple(tracker.best_x),
                     status=status,
                     gap=gap,
                     meta={"n_evals": tracker.n_evals})


def scalar_optimize(objective: Callable[[float], float], interval, sense: str = "max",
                    cfg: OptimizerConfig | None = None) -> OptResult:
    """Optimize a continuous scalar objective on [a, b], b possibly +inf.

    Unbounded intervals are handled by geometric bracket expansion; bounded
    ones by a dense pre-grid.  The bracket is then refined by golden-section.
    For the concave lambda/s objectives of the dual formulas the result is
    the global optimum.
    """
    cfg = cfg or DEFAULT_CONFIG
    a, b = float(interval[0]), float(interval[1])
    sign = 1.0 if sense == "min" else -1.0
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")

    def f(t: float) -> float:
        v = objective(t)
        return sign * v if not math.isnan(v) else math.inf

    status = "converged"
    if math.isinf(b):
        # expand until the objective turns; optimum may sit at a
        pts = [a + (2.0**k - 1.0) for k in range(0, 44)]
        vals = [f(t) for t in pts]
        i = int(np.argmin(vals))
        if i == len(pts) - 1:
            status = "divergent"
            lo, hi = pts[-2], pts[-1]
        else:
            lo = pts[max(i - 1, 0)]
            hi = pts[min(i + 1, len(pts) - 1)]
    else:
        grid = np.linspace(a, b, cfg.scalar_grid)
        vals = [f(t) for t in grid]
        i = int(np.argmin(vals))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]

    # golden-section refinement on [lo, hi]
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(120):
        if hi - lo < 1e-11 * max(1.0, abs(lo) + abs(hi)):
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    cands = [(f(lo), lo), (f1, x1), (f2, x2), (f(hi), hi), (f(a), a)]
    fv, t = min(cands, key=lambda p: (p[0], p[1]))
    return OptResult(value=sign * fv, args=(t,), status=status, gap=cfg.value_tol)


def saddle_solve(objective: Callable, outer, inner, cfg: OptimizerConfig | None = None,
                 inner_constraint: Callable | None = None,
                 inner_solver: Callable | None = None,
                 outer_feasible: Callable | None = None,
                 outer_penalty: Callable | None = None,
                 outer_x0: Sequence | None = None) -> OptResult:
    """Nested optimization: outer over one simplex family, inner over another.

    ``objective(outer_blocks, inner_blocks)``; ``outer``/``inner`` are
    (dims, sense) pairs.  ``inner_constraint(outer, inner) <= 0`` (when given)
    is enforced by a penalty-weight sweep with feasibility verification of the
    returned point.  ``inner_solver(outer_blocks) -> OptResult`` overrides the
    generic inner solve (used for the convex inner problems that admit exact
    alternating-minimization solvers).
    """
    cfg = cfg or DEFAULT_CONFIG
    outer_dims, outer_sense = outer
    inner_dims, inner_sense = inner
    outer_cfg = replace(cfg, n_starts=min(cfg.n_starts, 8),
                        grid_schedule=tuple(cfg.grid_schedule[:2]), max_iters=min(cfg.max_iters, 80))
    inner_cfg = replace(FAST_CONFIG, seed=cfg.seed + 1, n_starts=4,
                        grid_schedule=(8, 16), max_iters=60)
    inner_sign = 1.0 if inner_sense == "min" else -1.0

    fail_value = math.inf if inner_sense == "min" else -math.inf
    inner_gap = [cfg.value_tol]
    cache: dict = {}

    def solve_inner(zb) -> OptResult:
        if inner_solver is not None:
            return inner_solver(zb)
        if inner_constraint is None:
            return optimize_simplex(lambda wb: objective(zb, wb), inner_dims, inner_sense, inner_cfg)
        res = optimize_simplex(lambda wb: objective(zb, wb), inner_dims, inner_sense, inner_cfg,
                               feasible=lambda wb: inner_constraint(zb, wb) <= 1e-8,
                               penalty=lambda wb: max(inner_constraint(zb, wb), 0.0))
        return res

    def F(zb) -> float:
        key = tuple(np.round(np.concatenate(zb), 12).tobytes() for _ in (0,))
        if key in cache:
            return cache[key]
        r = solve_inner(zb)
        v = r.value if r.status != "infeasible" else fail_value
        if r.status != "infeasible":
            inner_gap[0] = max(inner_gap[0], r.gap)
        cache[key] = v
        return v

    res = optimize_simplex(F, outer_dims, outer_sense, outer_cfg,
                           feasible=outer_feasible, penalty=outer_penalty,
                           x0_list=outer_x0)
    if res.status == "infeasible" or not res.args:
        return res
    final_inner = solve_inner(list(res.args))
    status = res.status if final_inner.status != "infeasible" else "infeasible"
    return OptResult(value=res.value,
                     args=tuple(list(res.args) + list(final_inner.args)),
                     status=status,
                     gap=res.gap + inner_gap[0],
                     meta={"outer_evals": res.meta.get("n_evals"),
                           "inner_status": final_inner.status,
                           "inner_sign": inner_sign})
