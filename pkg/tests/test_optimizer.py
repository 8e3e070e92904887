import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from secrecy_region import (ORDERS, ChannelStats, EncodingOrder, InflationFactor, RatePair, Scenario,
                            TransmitCovariances, build_region, dominates, draw_batches, grq_max,
                            mmse_inflation_factor, sample_channel, secrecy_rates, select_covariances,
                            solve_inflation_factor, upper_right_hull)
from secrecy_region.errors import SingularDenominator, ValidationError
from secrecy_region.optimizer import frontier_value, inflation_update, rayleigh_quotient
from secrecy_region.region_math import block_matrices, secrecy_bounds

from conftest import random_psd, rayleigh

O12, O21 = EncodingOrder(1, 2), EncodingOrder(2, 1)


def brute_force_grq(a, b, rng, count=20_000):
    n = a.shape[0]
    v = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    num = np.einsum("ki,ij,kj->k", v.conj(), a, v).real
    den = np.einsum("ki,ij,kj->k", v.conj(), b, v).real
    start = v[np.argmax(num / den)]

    def neg(x):
        e = x[:n] + 1j * x[n:]
        return -rayleigh_quotient(a, b, e)
    res = minimize(neg, np.concatenate([start.real, start.imag]), method="BFGS", options={"gtol": 1e-12})
    return -res.fun


def test_grq_against_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        a, b = random_psd(rng, n), random_psd(rng, n) + 0.1 * np.eye(n)
        e, value = grq_max(a, b)
        assert value == pytest.approx(brute_force_grq(a, b, rng), abs=1e-6)
        assert np.linalg.norm(e) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_grq_is_upper_bound(seed, n):
    rng = np.random.default_rng(seed)
    a, b = random_psd(rng, n), random_psd(rng, n) + 0.05 * np.eye(n)
    _, value = grq_max(a, b)
    v = rng.standard_normal((1000, n)) + 1j * rng.standard_normal((1000, n))
    num = np.einsum("ki,ij,kj->k", v.conj(), a, v).real
    den = np.einsum("ki,ij,kj->k", v.conj(), b, v).real
    assert np.all(num / den <= value * (1 + 1e-9) + 1e-12)


def test_grq_identity_denominator_is_top_eigenvalue(rng):
    a = random_psd(rng, 3)
    e, value = grq_max(a, np.eye(3))
    assert value == pytest.approx(np.linalg.eigvalsh(a)[-1], rel=1e-12)


def test_grq_tie_breaks_to_lowest_basis_vector():
    e, value = grq_max(np.eye(3), np.eye(3))
    assert value == pytest.approx(1.0) and np.allclose(e, [1, 0, 0])
    e, _ = grq_max(np.diag([1.0, 2.0, 2.0]), np.eye(3))
    assert np.allclose(e, [0, 1, 0])


def test_grq_phase_convention(rng):
    for _ in range(10):
        e, _ = grq_max(random_psd(rng, 3), random_psd(rng, 3) + np.eye(3))
        k = np.argmax(np.abs(e))
        assert abs(e[k].imag) < 1e-15 and e[k].real > 0


@pytest.mark.parametrize("c", [0.5, 2.0, 4.0, 3.0, 0.1])
def test_grq_scale_invariance(rng, c):
    a, b = random_psd(rng, 3), random_psd(rng, 3) + np.eye(3)
    e, value = grq_max(a, b)
    e_c, value_c = grq_max(c * a, c * b)
    assert value_c == pytest.approx(value, rel=1e-9)
    assert np.allclose(e_c, e, atol=1e-9)


def test_grq_singular_denominator():
    with pytest.raises(SingularDenominator):
        grq_max(np.eye(2), np.diag([1.0, 0.0]))


def test_select_covariances_rejects_alpha():
    with pytest.raises(ValidationError):
        select_covariances(rayleigh(), 1.5, O12)


def test_select_covariances_endpoints():
    sc = rayleigh()
    assert not select_covariances(sc, 1.0, O12).k_u2.any()
    assert not select_covariances(sc, 0.0, O12).k_u1.any()


# -- inflation factor -----------------------------------------------------------

def test_inflation_update_matches_direct_inverse(rayleigh_small):
    sc, (b1, _) = rayleigh_small
    tc = select_covariances(sc, 0.5, O12)
    b = InflationFactor(np.array([[0.2 - 0.1j, 0.05j]]))
    small = sample_channel(sc.user1, 2000, 3)
    m_inv = np.linalg.inv(block_matrices(tc, b, small.samples))
    a1h = np.conj(np.swapaxes(m_inv[:, :1, :1], 1, 2))
    a2h = np.conj(np.swapaxes(m_inv[:, 1:, :1], 1, 2))
    direct = -np.linalg.solve(a1h.mean(0), (a2h * small.samples.conj()[:, None, :]).mean(0))
    assert np.allclose(inflation_update(tc, b, small), direct, atol=1e-13)


def test_no_second_signal_converges_in_one_step(rayleigh_small):
    sc, (b1, b2) = rayleigh_small
    tc = select_covariances(sc, 1.0, O12)
    b = solve_inflation_factor(tc, b1, b2)
    assert b.iterations == 1 and b.converged and not b.b.any()


def test_deterministic_fixed_point_is_mmse():
    h1 = np.array([0.8 + 0.3j, 0.4])
    h2 = np.array([0.1, 0.9])
    sc_stats = [ChannelStats(h, np.zeros((2, 2))) for h in (h1, h2)]
    b1, b2 = (sample_channel(s, 4, 0) for s in sc_stats)
    tc = TransmitCovariances.from_directions(np.array([1.0, 0.5j]) / math.sqrt(1.25),
                                             np.array([0.3, 1.0]) / math.sqrt(1.09), 0.5, 6.0)
    b = solve_inflation_factor(tc, b1, b2, epsilon=1e-15, max_iters=200)
    assert np.allclose(b.b, mmse_inflation_factor(tc, h1).b, atol=1e-6)


def test_statistical_fixed_point_converges(rayleigh_small):
    sc, (b1, b2) = rayleigh_small
    for order in ORDERS:
        bp1, bp2 = (b1, b2) if order.first == 1 else (b2, b1)
        for alpha in (0.3, 0.7):
            tc = select_covariances(sc, alpha, order)
            b = solve_inflation_factor(tc, bp1, bp2)
            assert b.converged and b.iterations <= 200
            assert b.residual < 1e-2 * (1 + np.linalg.norm(b.b))
            zero = secrecy_bounds(tc, InflationFactor.zeros(1, 2), b1, b2, order)[0]
            assert secrecy_bounds(tc, b, b1, b2, order)[0] >= zero


# -- frontier -------------------------------------------------------------------

def pts(*xy):
    return [RatePair(float(x), float(y)) for x, y in xy]


def test_hull_drops_interior_points():
    hull = upper_right_hull(pts((0, 1), (0.5, 0.5), (1, 0), (0.2, 0.2)))
    assert [(p.r1, p.r2) for p in hull] == [(0, 1), (1, 0)]


def test_hull_keeps_convex_points():
    # axis endpoints (0, 1) and (1, 0) are weakly dominated here and dropped
    hull = upper_right_hull(pts((0.2, 1.0), (0.8, 0.8), (1.0, 0.1)))
    assert [(p.r1, p.r2) for p in hull] == [(0.2, 1.0), (0.8, 0.8), (1.0, 0.1)]
    hull = upper_right_hull(pts((0.2, 0.9), (0.9, 0.2), (0.1, 0.1)))
    assert [(p.r1, p.r2) for p in hull] == [(0.2, 0.9), (0.9, 0.2)]


def test_hull_single_point_and_empty():
    hull = upper_right_hull(pts((0.5, 0.5)))
    assert [(p.r1, p.r2) for p in hull] == [(0.5, 0.5)]
    assert len(upper_right_hull([])) == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 5), st.floats(0, 5)), min_size=1, max_size=30))
def test_hull_contains_every_point(points):
    hull = upper_right_hull(pts(*points))
    r1 = [p.r1 for p in hull]
    assert r1 == sorted(r1)
    for x, y in points:
        assert frontier_value(hull, x) >= y - 1e-12


def test_dominates():
    inner = upper_right_hull(pts((0.5, 0.5)))
    outer = upper_right_hull(pts((0.6, 0.6)))
    assert dominates(outer, inner) and not dominates(inner, outer)
    assert dominates(inner, outer, slack=0.11)


def test_region_frontier_contains_raw_points():
    sc = rayleigh(mc_samples=5000, alpha_grid=6)
    batches = draw_batches(sc)
    for scheme in ("interference-as-noise", "mean-mmse-b", "time-sharing"):
        region = build_region(sc, scheme, batches)
        for p in region.raw_points:
            assert p.r1 >= 0 and p.r2 >= 0
            assert frontier_value(region.frontier, p.r1) >= p.r2 - 1e-12


def test_region_rows_reproducible_from_library():
    sc = rayleigh(mc_samples=5000, alpha_grid=5)
    batches = draw_batches(sc)
    region = build_region(sc, "statistical-csit", batches)
    for p in region.raw_points:
        order = EncodingOrder.parse(p.order)
        tc = select_covariances(sc, p.alpha, order)
        bp1, bp2 = batches if order.first == 1 else batches[::-1]
        b = solve_inflation_factor(tc, bp1, bp2)
        again = secrecy_rates(tc, b, *batches, order)
        assert (again.r1, again.r2) == (p.r1, p.r2)


def test_unknown_scheme():
    with pytest.raises(ValidationError):
        build_region(rayleigh(mc_samples=10), "psychic")
