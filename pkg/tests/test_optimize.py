"""Optimizer, grid oracle, and region tracing tests.

Frozen values used below:
  - noiseless mod-2 adder sum bound = 1.0 bit: mixing the identity and the
    flip table uniformly makes each input equiprobable in every state, the
    output is then uniform, and the table-conditional entropy is zero.
  - stateless binary adder sum bound = 1.5 bits at input probability 1/2
    (output law (1/4, 1/2, 1/4)); confirmed by an out-of-repo dense scan.
"""

import numpy as np
import pytest

from fsmac.errors import GuardError
from fsmac.examples import load
from fsmac.model import induced_strategy_channel
from fsmac.optimize import (
    INNER_SOLVERS,
    DirectionSupport,
    OptimizerConfig,
    RateRegion,
    _behavioral_grid,
    _compositions,
    _grid_max_deterministic,
    _grid_max_generic,
    _WeightedBounds,
    convex_hull_2d,
    grid_oracle_sum_rate,
    inner_bound_region,
    maximize_sum_rate,
    pentagon_support,
)
from fsmac.rates import RatePentagon, joint_law, pentagon

from conftest import random_spec


# ---------------------------------------------------------------- building blocks

def test_compositions_enumerate_exactly():
    rows = _compositions(3, 2)
    assert rows.tolist() == [[0, 3], [1, 2], [2, 1], [3, 0]]
    rows = _compositions(6, 4)
    assert rows.shape[0] == 84  # C(9, 3)
    assert np.all(rows.sum(axis=1) == 6)
    assert np.all(rows >= 0)
    assert len({tuple(r) for r in rows.tolist()}) == rows.shape[0]
    assert _compositions(5, 1).tolist() == [[5]]


def test_behavioral_grid_is_full_product():
    grid = _behavioral_grid(2, 2, 2)  # two obs symbols, binary input, step 1/2
    assert grid.shape == (9, 2, 2)
    rows = {tuple(map(tuple, g)) for g in grid.tolist()}
    per_symbol = {(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)}
    assert rows == {(p, q) for p in per_symbol for q in per_symbol}


def test_optimizer_config_validation():
    with pytest.raises(ValueError, match="restarts"):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError, match="max_iters"):
        OptimizerConfig(max_iters=0)
    with pytest.raises(ValueError, match="rel_tol"):
        OptimizerConfig(rel_tol=0.0)
    with pytest.raises(ValueError, match="inner_solver"):
        OptimizerConfig(inner_solver="newton")


# ---------------------------------------------------------------- pentagon support

def test_pentagon_support_frozen_corners():
    pent = RatePentagon(bound_a=0.5, bound_b=0.5, bound_sum=0.8)
    value, point = pentagon_support(pent, (2.0, 1.0))
    assert point == (0.5, pytest.approx(0.3))
    assert value == pytest.approx(1.3)
    value, point = pentagon_support(pent, (1.0, 3.0))
    assert point == (pytest.approx(0.3), 0.5)
    assert value == pytest.approx(1.8)
    # ties go to the sender-a corner
    _, point = pentagon_support(pent, (1.0, 1.0))
    assert point == (0.5, pytest.approx(0.3))


def test_pentagon_support_matches_dense_scan(rng):
    for _ in range(50):
        a, b = rng.uniform(0.1, 2.0, size=2)
        c = max(a, b) + rng.uniform(0.0, 1.0) * (a + b - max(a, b))
        pent = RatePentagon(bound_a=a, bound_b=b, bound_sum=c)
        ca, cb = rng.uniform(0.0, 1.0, size=2) + 1e-3
        value, point = pentagon_support(pent, (ca, cb))
        ra = np.linspace(0.0, a, 20001)
        rb = np.minimum(b, c - ra)
        scanned = float((ca * ra + cb * rb).max())
        assert value >= scanned - 1e-12
        assert value <= scanned + (ca + cb) * a / 20000 + 1e-12
        assert point[0] <= a + 1e-12 and point[1] <= b + 1e-12
        assert point[0] + point[1] <= c + 1e-12


def test_pentagon_support_rejects_bad_directions():
    pent = RatePentagon(0.5, 0.5, 0.8)
    for bad in [(-1.0, 1.0), (1.0, -0.2), (0.0, 0.0)]:
        with pytest.raises(ValueError, match="direction"):
            pentagon_support(pent, bad)


# ---------------------------------------------------------------- convex hull

def test_convex_hull_known_cases():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5), (0.2, 0.9)]
    hull = convex_hull_2d(pts)
    assert hull.tolist() == [[0, 0], [1, 0], [1, 1], [0, 1]]
    assert convex_hull_2d([(0, 0), (2, 2), (1, 1)]).tolist() == [[0, 0], [2, 2]]
    assert convex_hull_2d([(0.3, 0.4)]).tolist() == [[0.3, 0.4]]
    assert convex_hull_2d([(1, 1), (1, 1), (0, 0)]).tolist() == [[0, 0], [1, 1]]
    with pytest.raises(ValueError):
        convex_hull_2d(np.zeros((0, 2)))


def _oracle_hull(pts: np.ndarray) -> np.ndarray:
    """O(n^3) directed-edge scan: keep i->j iff every other point is strictly
    to its left, then walk the cycle from the lexicographic minimum."""
    n = pts.shape[0]
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    succ = {}
    for i in range(n):
        for j in range(n):
            if i != j and all(
                cross(pts[i], pts[j], pts[k]) > 0 for k in range(n) if k not in (i, j)
            ):
                succ[i] = j
    start = min(range(n), key=lambda k: (pts[k][0], pts[k][1]))
    order = [start]
    cur = succ[start]
    while cur != start:
        order.append(cur)
        cur = succ[cur]
    return pts[order]


def test_convex_hull_matches_edge_scan_oracle(rng):
    for _ in range(10):
        pts = rng.uniform(0.0, 1.0, size=(100, 2))
        np.testing.assert_allclose(convex_hull_2d(pts), _oracle_hull(pts), atol=1e-12)


# ---------------------------------------------------------------- gradients

def test_gradients_match_finite_differences(rng):
    spec = random_spec(rng)
    chan = induced_strategy_channel(spec)
    obj = _WeightedBounds(chan.q, spec.state_pmf, 0.45, 0.3, 0.7)
    pa = rng.dirichlet(np.ones(chan.space_a.count)) + 0.1
    pa /= pa.sum()
    pb = rng.dirichlet(np.ones(chan.space_b.count)) + 0.1
    pb /= pb.sum()
    h = 1e-6
    for block in ("a", "b"):
        own = pa if block == "a" else pb
        grad = obj._grad(pa, pb, block)
        for i in range(1, own.size):
            d = np.zeros(own.size)
            d[0], d[i] = -1.0, 1.0

            def value_at(t):
                shifted = own + t * d
                if block == "a":
                    return obj.value(shifted, pb)
                return obj.value(pa, shifted)

            fd = (value_at(h) - value_at(-h)) / (2 * h)
            assert fd == pytest.approx(float(grad @ d), abs=5e-5)


def test_weighted_value_reduces_to_pentagon_combination(rng):
    spec = random_spec(rng)
    chan = induced_strategy_channel(spec)
    pa = rng.dirichlet(np.ones(chan.space_a.count))
    pb = rng.dirichlet(np.ones(chan.space_b.count))
    from fsmac.rates import TeamPolicy
    pent = pentagon(joint_law(spec, chan, TeamPolicy(pi_a=pa, pi_b=pb)))
    for wa, wb, wc in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0.3, 0.5, 0.9)]:
        obj = _WeightedBounds(chan.q, spec.state_pmf, wa, wb, wc)
        expect = wa * pent.bound_a + wb * pent.bound_b + wc * pent.bound_sum
        assert obj.value(pa, pb) == pytest.approx(expect, abs=1e-10)


# ---------------------------------------------------------------- sum-rate ascent

def test_sum_rate_null_channel_is_zero():
    spec = load("null-channel")
    chan = induced_strategy_channel(spec)
    res = maximize_sum_rate(spec, chan, OptimizerConfig(restarts=3, seed=5))
    assert res.value == pytest.approx(0.0, abs=1e-9)
    assert res.converged


def test_sum_rate_mod2_adder_hits_one_bit():
    spec = load("mod2-adder-noiseless")
    chan = induced_strategy_channel(spec)
    res = maximize_sum_rate(spec, chan)
    assert res.value == pytest.approx(1.0, abs=1e-6)
    assert res.converged
    assert 0 <= res.best_restart < 16
    hist = np.array(res.history)
    assert np.all(np.diff(hist) >= -1e-12)


def test_sum_rate_stateless_adder_hits_frozen_value():
    spec = load("stateless-mac")
    chan = induced_strategy_channel(spec)
    res = maximize_sum_rate(spec, chan, OptimizerConfig(restarts=8, seed=2))
    assert res.value == pytest.approx(1.5, abs=1e-6)
    # the maximizer sits on the resolution-200 grid, so the scan is exact too
    assert grid_oracle_sum_rate(spec, chan, 200) == pytest.approx(1.5, abs=1e-9)


def test_inner_solvers_agree_on_adder():
    spec = load("mod2-adder-noiseless")
    chan = induced_strategy_channel(spec)
    for solver in INNER_SOLVERS:
        cfg = OptimizerConfig(restarts=6, seed=3, inner_solver=solver)
        res = maximize_sum_rate(spec, chan, cfg)
        assert res.value == pytest.approx(1.0, abs=1e-5), solver


def test_maximize_is_deterministic_and_thread_invariant():
    spec = load("mod2-adder-bsc01")
    chan = induced_strategy_channel(spec)
    cfg = OptimizerConfig(restarts=5, seed=11)
    first = maximize_sum_rate(spec, chan, cfg)
    second = maximize_sum_rate(spec, chan, cfg)
    threaded = maximize_sum_rate(spec, chan, cfg, threads=3)
    assert first.value == second.value == threaded.value
    assert np.array_equal(first.policy.pi_a, threaded.policy.pi_a)
    assert np.array_equal(first.policy.pi_b, threaded.policy.pi_b)
    assert first.best_restart == threaded.best_restart


# ---------------------------------------------------------------- grid oracle

def test_grid_oracle_paths_agree_on_deterministic_channel():
    # the collapsed route must equal the literal pair scan wherever both run
    spec = load("mod2-adder-noiseless")
    chan = induced_strategy_channel(spec)
    collapsed = _grid_max_deterministic(spec, 6)
    literal = _grid_max_generic(chan.q, spec.state_pmf, 6)
    assert collapsed == pytest.approx(literal, abs=1e-12)
    assert grid_oracle_sum_rate(spec, chan, 6) == pytest.approx(collapsed, abs=0)


def test_grid_oracle_never_beats_ascent():
    cases = [
        ("mod2-adder-noiseless", 12, 1e-6),
        ("mod2-adder-bsc01", 16, 2e-2),
        ("stateless-mac", 200, 1e-6),
        ("null-channel", 8, 1e-9),
    ]
    for name, resolution, gap in cases:
        spec = load(name)
        chan = induced_strategy_channel(spec)
        best = maximize_sum_rate(spec, chan, OptimizerConfig(restarts=8, seed=7)).value
        scanned = grid_oracle_sum_rate(spec, chan, resolution)
        assert scanned <= best + 1e-9, name
        assert best - scanned <= gap, name


def test_grid_oracle_guard_and_validation():
    spec = load("mod2-adder-bsc01")
    chan = induced_strategy_channel(spec)
    with pytest.raises(ValueError, match="resolution"):
        grid_oracle_sum_rate(spec, chan, 0)
    big = random_spec(np.random.default_rng(0), sizes=dict(xa=2, xb=2, s=2, sa=2, sb=2, y=2))
    big_chan = induced_strategy_channel(big)
    assert big_chan.space_a.count == 4  # sanity: right at the guard boundary
    three_obs = random_spec(np.random.default_rng(1), sizes=dict(xa=2, xb=2, s=2, sa=3, sb=1, y=2))
    with pytest.raises(GuardError, match="grid oracle"):
        grid_oracle_sum_rate(three_obs, induced_strategy_channel(three_obs), 4)


# ---------------------------------------------------------------- region tracing

def test_region_of_mod2_adder_is_unit_triangle():
    spec = load("mod2-adder-noiseless")
    chan = induced_strategy_channel(spec)
    region = inner_bound_region(spec, chan, OptimizerConfig(restarts=4, seed=1), directions=9)
    np.testing.assert_allclose(
        region.vertices, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], atol=1e-5
    )
    assert len(region.supports) == 9
    for rec in region.supports:
        assert isinstance(rec, DirectionSupport)
        ca, cb = rec.direction
        assert rec.value == pytest.approx(ca * rec.point[0] + cb * rec.point[1], abs=1e-12)
    assert region.supports[0].direction == (1.0, 0.0)
    assert region.supports[-1].direction == (0.0, 1.0)


def test_region_validation():
    spec = load("null-channel")
    chan = induced_strategy_channel(spec)
    with pytest.raises(ValueError, match="directions"):
        inner_bound_region(spec, chan, OptimizerConfig(restarts=2), directions=1)
    region = inner_bound_region(spec, chan, OptimizerConfig(restarts=2, seed=4), directions=3)
    assert region.vertices.shape == (1, 2)  # the null channel carries nothing
    np.testing.assert_allclose(region.vertices, [[0.0, 0.0]], atol=1e-9)


def test_rate_region_rejects_bad_vertex_lists():
    from fsmac.errors import InternalInvariantError
    with pytest.raises(InternalInvariantError, match="origin"):
        RateRegion(vertices=np.array([[0.5, 0.0], [1.0, 0.0]]))
    with pytest.raises(InternalInvariantError, match="quadrant"):
        RateRegion(vertices=np.array([[0.0, 0.0], [-0.5, 1.0]]))
    with pytest.raises(InternalInvariantError, match="counterclockwise"):
        RateRegion(vertices=np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))
    region = RateRegion(vertices=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert not region.vertices.flags.writeable
