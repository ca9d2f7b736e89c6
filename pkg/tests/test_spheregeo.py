import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from lruc.errors import DomainError, ResourceError
from lruc.linalg import trace_distance
from lruc.randgen import SeededStream, derive_stream, random_pure_states
from lruc.spheregeo import (
    COVERING_NET,
    MEASURE_NET,
    Cap,
    build_covering_net,
    build_net_probabilistic,
    cap_contains,
    cap_measure,
    chernoff_floor_check,
    covering_cardinality_estimate,
    covering_misses,
    empirical_shatter_search,
    height_for_measure,
    is_shattered,
    measure_net_size,
    real_inner,
    shatter_bound,
    to_real,
    verify_net_against_caps,
)


def test_cap_measure_closed_forms():
    # on S^1 a cap is an arc of half-angle arccos(1-h)
    for h in (0.1, 0.7, 1.3, 1.9):
        assert cap_measure(h, 1) == pytest.approx(math.acos(1 - h) / math.pi, abs=1e-12)
    # on S^3 the height t of a uniform point has density (2/pi) sqrt(1-t^2)
    for h in (0.2, 1.0, 1.6):
        t = 1 - h
        expect = (math.acos(t) - t * math.sqrt(1 - t * t)) / math.pi
        assert cap_measure(h, 2) == pytest.approx(expect, abs=1e-12)
    assert cap_measure(2.0, 3) == pytest.approx(1.0)
    assert cap_measure(1.0, 5) == pytest.approx(0.5)


def test_cap_measure_monte_carlo(stream):
    pts = random_pure_states(3, 200000, stream)
    x = pts[:, 0].real
    for h in (0.3, 0.8, 1.4):
        frac = np.mean(x >= 1 - h)
        se = math.sqrt(frac * (1 - frac) / len(x))
        assert abs(frac - cap_measure(h, 3)) < 4 * se + 1e-4


@given(st.integers(1, 20), st.floats(1e-4, 1.0))
def test_height_inverts_measure(d, eps):
    h = height_for_measure(eps, d)
    assert cap_measure(h, d) == pytest.approx(eps, abs=1e-9)


@given(st.integers(1, 10), st.floats(0.01, 1.99), st.floats(0.01, 1.99))
def test_cap_measure_monotone(d, a, b):
    lo, hi = sorted((a, b))
    assert cap_measure(lo, d) <= cap_measure(hi, d) + 1e-15


def test_cap_contains_uses_real_part():
    u = np.array([1.0, 0.0], complex)
    cap = Cap(u, 0.5)
    assert cap_contains(cap, np.array([1.0, 0.0]))
    assert not cap_contains(cap, np.array([1j, 0.0]))
    assert real_inner(u, np.array([0.6, 0.8])) == pytest.approx(0.6)
    with pytest.raises(DomainError):
        Cap(u, 0.0)


def test_measure_net_size_formula():
    assert measure_net_size(2, 0.2, 10) == math.ceil(10 * 2 * 5 * math.log2(5))
    assert measure_net_size(4, 0.5, 1) == 8


def test_probabilistic_net(stream):
    net = build_net_probabilistic(2, 0.2, 10, stream)
    assert len(net) == 233 and net.kind == MEASURE_NET
    np.testing.assert_allclose(np.linalg.norm(net.points, axis=1), 1.0)
    assert verify_net_against_caps(net, 0.2, 5000, derive_stream(stream, 1)) == 0
    with pytest.raises(DomainError):
        build_net_probabilistic(2, 0.6, 10, stream)


def test_small_net_misses_caps(stream):
    net = build_net_probabilistic(3, 0.5, 0.1, stream)
    assert len(net) == 1
    # a single point misses about half of all hemispheres
    misses = verify_net_against_caps(net, 0.5, 4000, derive_stream(stream, 2))
    assert 0.45 < misses / 4000 < 0.55


def test_covering_net_is_a_cover(stream):
    delta = 0.3
    net = build_covering_net(2, delta, stream)
    assert net.kind == COVERING_NET and net.covering_radius == delta
    probes = random_pure_states(2, 3000, derive_stream(stream, 7))
    worst = max(min(trace_distance(p, q) for q in net.points) for p in probes[:300])
    assert worst <= delta
    assert covering_misses(net, delta, 20000, derive_stream(stream, 8)) == 0
    # packing at radius (1 - margin) delta bounds the size by the volume estimate
    assert len(net) <= 4 * covering_cardinality_estimate(2, 0.9 * delta)


def test_covering_net_budget(stream):
    with pytest.raises(ResourceError) as info:
        build_covering_net(4, 0.05, stream)
    assert info.value.estimate == covering_cardinality_estimate(4, 0.05)


def test_shatter_bound_exact():
    assert shatter_bound(3, 3) == 8
    assert shatter_bound(2, 5) == 1 + 5 + 10
    assert shatter_bound(5, 2) == 4
    with pytest.raises(ResourceError):
        shatter_bound(40, 200)


def _binom_upper(t, k):
    return sum(math.comb(t, j) for j in range(k, t + 1)) / 2 ** t


def test_chernoff_check_oracle():
    # ceil(t eps / 2) successes in t fair trials
    chk = chernoff_floor_check(16, 0.5)
    assert chk.probability == pytest.approx(_binom_upper(16, 4), rel=1e-12)
    assert chk.probability == pytest.approx(0.98935, abs=1e-4)
    assert chk.passes
    assert chernoff_floor_check(4, 0.5).passes


def _lp_separable(points, mask):
    # a cap {x : <u,x> >= s} realizes mask iff the strict linear separation LP is feasible
    from scipy.optimize import linprog
    n, dim = points.shape
    sign = np.where(mask, -1.0, 1.0)
    # variables u (dim), s, margin gamma; maximize gamma subject to sign*(<u,x> - s) + gamma <= 0, |u_i| <= 1
    a = np.hstack([sign[:, None] * points, -sign[:, None], np.ones((n, 1))])
    c = np.zeros(dim + 2)
    c[-1] = -1
    bounds = [(-1, 1)] * dim + [(-2, 2), (None, 1)]
    res = linprog(c, A_ub=a, b_ub=np.zeros(n), bounds=bounds, method="highs")
    return res.status == 0 and -res.fun > 1e-9


def test_is_shattered_agrees_with_lp(stream):
    rng = np.random.default_rng(3)
    outcomes = set()
    for trial, (d, m) in enumerate([(1, 3), (1, 4), (2, 4), (2, 5), (1, 3), (2, 6)]):
        pts = to_real(random_pure_states(d, m, derive_stream(stream, trial)))
        masks = [np.array([(k >> i) & 1 for i in range(m)], bool) for k in range(2 ** m)]
        lp = all(_lp_separable(pts, mk) for mk in masks)
        assert is_shattered(pts, rng) == lp
        outcomes.add(lp)
    assert outcomes == {True, False}


def test_shatter_search_small(stream):
    # three points on a circle in general position are shattered by arcs
    assert empirical_shatter_search(1, 3, 5, stream) == 3
    with pytest.raises(ResourceError):
        empirical_shatter_search(3, 4, 1, stream)


def test_cap_contains_fixtures():
    u = np.array([0.6, 0.8j])
    assert cap_contains(Cap(u, 0.01), u)
    assert not cap_contains(Cap(u, 1.0), -u)
    # Re<e1|w> = 1/2 sits exactly on the boundary of the height-1/2 cap
    e1 = np.array([1.0, 0.0], complex)
    w = np.array([0.5, np.sqrt(0.75)], complex)
    assert cap_contains(Cap(e1, 0.5), w)


def test_cap_measure_grid_strictly_increasing():
    for d in (1, 2, 5):
        vals = np.array([cap_measure(h, d) for h in np.arange(1e-3, 2.0 + 1e-12, 1e-3)])
        assert np.all(np.diff(vals) > 0)


def test_cap_measure_million_samples(stream):
    pts = random_pure_states(2, 1_000_000, stream)
    frac = np.mean(pts[:, 0].real >= 0.7)
    se = np.sqrt(frac * (1 - frac) / 1_000_000)
    assert abs(frac - cap_measure(0.3, 2)) < 3 * se


def test_height_fixtures(stream):
    assert height_for_measure(0.5, 3) == pytest.approx(1.0, abs=1e-9)
    for d in (2, 8):
        for eps in (0.01, 0.1, 0.3):
            assert cap_measure(height_for_measure(eps, d), d) == pytest.approx(eps, abs=1e-8)
    # Monte Carlo inversion: the eps-quantile of 1 - Re x_1
    depth = np.concatenate([1 - random_pure_states(4, 1_000_000, derive_stream(stream, k))[:, 0].real
                            for k in range(4)])
    h_mc = np.quantile(depth, 0.01)
    assert abs(h_mc - height_for_measure(0.01, 4)) < 1e-3


def test_measure_net_fixture(stream):
    assert len(build_net_probabilistic(2, 0.5, 10, stream)) == 40
    for d, eps, c in [(1, 0.5, 1), (3, 0.1, 2.5), (5, 0.3, 10)]:
        assert measure_net_size(d, eps, c) == math.ceil(c * d / eps * math.log2(1 / eps))


def test_verify_fixtures(stream):
    from lruc.spheregeo import EpsilonNet
    centers = random_pure_states(2, 50, stream)
    forced = EpsilonNet(2, 0.2, centers, MEASURE_NET)
    assert verify_net_against_caps(forced, 0.2, 50, stream) == 0
    empty = EpsilonNet(2, 0.2, np.empty((0, 2), complex), MEASURE_NET)
    assert verify_net_against_caps(empty, 0.2, 100, stream) == 100
    net = build_net_probabilistic(2, 0.2, 10, derive_stream(stream, 1))
    assert verify_net_against_caps(net, 0.2, 10_000, derive_stream(stream, 2)) / 10_000 <= 1e-3


def test_covering_fixtures(stream):
    assert len(build_covering_net(3, 2.0, stream)) == 1
    assert len(build_covering_net(1, 0.1, stream)) == 1
    net = build_covering_net(2, 0.5, stream)
    assert covering_misses(net, 0.5, 100_000, derive_stream(stream, 3)) == 0


def test_shatter_bound_fixtures():
    assert shatter_bound(2, 4) == 11
    assert shatter_bound(7, 5) == 32
    assert shatter_bound(3, 0) == 1
    for v in range(5):
        for m in range(8):
            assert shatter_bound(v, m) <= shatter_bound(v + 1, m)
            assert shatter_bound(v, m) <= shatter_bound(v, m + 1)
            assert shatter_bound(v, m) <= 2 ** m


def test_chernoff_fixtures():
    assert chernoff_floor_check(8, 1.0).probability == pytest.approx(1.0)
    p = chernoff_floor_check(32, 0.25).probability
    assert p == pytest.approx(1 - stats.binom(32, 0.25).cdf(3), rel=1e-12)
    assert p == pytest.approx(0.9748, abs=1e-4)


def test_shatter_search_fixtures(stream):
    assert empirical_shatter_search(1, 2, 3, stream) == 2
    assert empirical_shatter_search(2, 1, 2, stream) == 1


def test_shatter_search_circle_four_points(stream):
    # caps on S^1 are arcs; four points in convex position cannot be shattered, so 3 is the most found
    assert empirical_shatter_search(1, 4, 5, stream) == 3
