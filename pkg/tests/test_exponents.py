"""Generating functions, exponent optimization, capacity, secrecy."""

import math

import numpy as np
import pytest

from chanres import (
    Channel,
    ConvergenceError,
    Distribution,
    GIVEN_FAMILIES,
    WORST_FAMILIES,
    bsc,
    capacity,
    constant_channel,
    identity_channel,
    mutual_information,
    phi,
    phi_worst,
    product,
    product_dist,
    psi,
    psi_worst,
    resolvability_exponents,
    exponent_sweep,
    secrecy_capacity_lb,
    secrecy_rate,
    taylor_compare,
    uniform,
    wiretap_exponents,
)


def binary_entropy(w: float) -> float:
    return -w * math.log(w) - (1.0 - w) * math.log(1.0 - w)


def psi_oracle(s, W, p):
    wp = p.probs @ W.rows
    total = 0.0
    for x in range(W.input_size):
        inner = 0.0
        for y in range(W.output_size):
            if wp[y] > 0:
                inner += W.rows[x, y] ** (1.0 + s) * wp[y] ** (-s)
        total += p.probs[x] * inner
    return math.log(total)


def phi_oracle(t, W, p):
    total = 0.0
    for y in range(W.output_size):
        g = 0.0
        for x in range(W.input_size):
            g += p.probs[x] * W.rows[x, y] ** (1.0 / (1.0 + t))
        total += g ** (1.0 + t)
    return math.log(total)


def test_origin_values_are_exact_zero():
    rng = np.random.default_rng(21)
    for _ in range(20):
        K = int(rng.integers(2, 5))
        L = int(rng.integers(2, 5))
        W = Channel(rng.dirichlet(np.ones(L), size=K))
        p = Distribution(rng.dirichlet(np.ones(K)))
        assert psi(0.0, W, p) == 0.0
        assert phi(0.0, W, p) == 0.0


def test_domain_errors():
    W, p = bsc(0.1), uniform(2)
    with pytest.raises(ValueError):
        psi(-1.0, W, p)
    with pytest.raises(ValueError):
        phi(-1.0, W, p)
    with pytest.raises(ValueError):
        psi(0.5, W, uniform(3))


def test_psi_phi_frozen_values():
    W, p = bsc(0.1), uniform(2)
    assert math.isclose(psi(1.0, W, p), math.log(1.64), rel_tol=1e-14)
    assert math.isclose(psi(0.5, W, p), psi_oracle(0.5, W, p), rel_tol=1e-13)
    assert math.isclose(psi(0.5, W, p), 0.22490046096410807, rel_tol=1e-14)
    assert math.isclose(phi(-0.5, W, p), phi_oracle(-0.5, W, p), rel_tol=1e-13)
    assert math.isclose(phi(-0.5, W, p), 0.24734812091805358, rel_tol=1e-14)
    # t = -1/2 collapses to log of twice the root mean square column
    assert math.isclose(phi(-0.5, W, p), math.log(2.0 * math.sqrt(0.41)),
                        rel_tol=1e-14)


def test_identity_channel_closed_forms():
    W, p = identity_channel(2), uniform(2)
    for s in (0.1, 0.3, 0.5, 0.9, 1.0):
        assert math.isclose(psi(s, W, p), s * math.log(2.0), rel_tol=1e-13)
    for t in (-0.5, -0.3, -0.1):
        assert math.isclose(phi(t, W, p), -t * math.log(2.0), rel_tol=1e-13)


def test_psi_phi_match_oracle_random():
    rng = np.random.default_rng(22)
    for _ in range(50):
        K = int(rng.integers(2, 6))
        L = int(rng.integers(2, 6))
        W = Channel(rng.dirichlet(np.ones(L), size=K))
        p = Distribution(rng.dirichlet(np.ones(K)))
        s = float(rng.uniform(0.05, 1.0))
        t = float(rng.uniform(-0.5, -0.05))
        assert math.isclose(psi(s, W, p), psi_oracle(s, W, p),
                            rel_tol=1e-11, abs_tol=1e-12)
        assert math.isclose(phi(t, W, p), phi_oracle(t, W, p),
                            rel_tol=1e-11, abs_tol=1e-12)


def test_convexity_and_tangent_lower_bounds():
    rng = np.random.default_rng(23)
    for _ in range(20):
        K = int(rng.integers(2, 5))
        L = int(rng.integers(2, 5))
        W = Channel(rng.dirichlet(np.ones(L), size=K))
        p = Distribution(rng.dirichlet(np.ones(K)))
        i_val = mutual_information(p, W)
        a, b = sorted(rng.uniform(0.01, 1.0, size=2))
        mid = 0.5 * (a + b)
        assert psi(mid, W, p) <= 0.5 * (psi(a, W, p) + psi(b, W, p)) + 1e-12
        ta, tb = sorted(rng.uniform(-0.5, -0.01, size=2))
        tm = 0.5 * (ta + tb)
        assert phi(tm, W, p) <= 0.5 * (phi(ta, W, p) + phi(tb, W, p)) + 1e-12
        # both curves pass through the origin with slope +/- I
        s = float(rng.uniform(0.01, 1.0))
        assert psi(s, W, p) >= s * i_val - 1e-9
        t = float(rng.uniform(-0.5, -0.01))
        assert phi(t, W, p) >= -t * i_val - 1e-9


def test_slopes_at_origin_equal_mutual_information():
    rng = np.random.default_rng(24)
    h = 1e-5
    for _ in range(10):
        K = int(rng.integers(2, 5))
        L = int(rng.integers(2, 5))
        W = Channel(rng.dirichlet(np.ones(L), size=K))
        p = Distribution(rng.dirichlet(np.ones(K)))
        i_val = mutual_information(p, W)
        fd_psi = psi(h, W, p) / h
        fd_phi = phi(-h, W, p) / (-h)
        scale = max(i_val, 1e-6)
        assert abs(fd_psi - i_val) <= 1e-3 * scale
        assert abs(fd_phi - (-i_val)) <= 1e-3 * scale


def test_additive_over_independent_blocks():
    rng = np.random.default_rng(25)
    W = Channel(rng.dirichlet(np.ones(3), size=2))
    p = Distribution(rng.dirichlet(np.ones(2)))
    W2, p2 = product(W, 2), product_dist(p, 2)
    for s in (0.2, 0.7):
        assert math.isclose(psi(s, W2, p2), 2.0 * psi(s, W, p), rel_tol=1e-12)
    for t in (-0.4, -0.1):
        assert math.isclose(phi(t, W2, p2), 2.0 * phi(t, W, p), rel_tol=1e-12)


def test_worst_case_identity_and_constant():
    for s in (0.25, 0.5, 0.75):
        val, arg = psi_worst(s, identity_channel(2))
        assert math.isclose(val, s * math.log(2.0), rel_tol=1e-9)
        assert np.allclose(arg.probs, 0.5, atol=1e-6)
    val, _ = psi_worst(0.5, identity_channel(3))
    assert math.isclose(val, 0.5 * math.log(3.0), rel_tol=1e-9)
    # uniform-row constant: (sum_x p W^(1+s))^(1-s) = L^(s^2 - 1) per output
    val, _ = psi_worst(0.5, constant_channel([0.5, 0.5], 2))
    assert math.isclose(val, 0.25 * math.log(2.0), rel_tol=1e-9)
    # deterministic constant: a single output column, maximand == 1
    val, _ = psi_worst(0.5, constant_channel([1.0], 3))
    assert abs(val) <= 1e-12
    for t in (-0.5, -0.25):
        val, arg = phi_worst(t, identity_channel(2))
        assert math.isclose(val, -t * math.log(2.0), rel_tol=1e-9)
        assert np.allclose(arg.probs, 0.5, atol=1e-6)


def test_worst_case_degenerate_s_one():
    # at s = 1 the maximand no longer depends on p and counts the
    # output columns reachable from some input
    val, _ = psi_worst(1.0, identity_channel(3))
    assert val == math.log(3.0)
    W = Channel(np.array([[0.5, 0.5, 0.0], [0.3, 0.7, 0.0]]))
    val, _ = psi_worst(1.0, W)
    assert val == math.log(2.0)


def test_worst_case_domain():
    with pytest.raises(ValueError):
        psi_worst(1.2, bsc(0.1))
    with pytest.raises(ValueError):
        psi_worst(-0.1, bsc(0.1))
    with pytest.raises(ValueError):
        phi_worst(0.1, bsc(0.1))
    with pytest.raises(ValueError):
        phi_worst(-0.6, bsc(0.1))


def worst_psi_maximand(s, W, p):
    # p sits inside the power here, unlike the fixed-law psi
    return math.log(float(np.sum((p.probs @ W.rows ** (1.0 + s)) ** (1.0 - s))))


def test_worst_case_dominates_fixed_laws():
    rng = np.random.default_rng(26)
    for _ in range(10):
        K = int(rng.integers(2, 5))
        L = int(rng.integers(2, 5))
        W = Channel(rng.dirichlet(np.ones(L), size=K))
        s = float(rng.uniform(0.05, 0.95))
        t = float(rng.uniform(-0.5, -0.05))
        psi_val, psi_arg = psi_worst(s, W)
        phi_val, phi_arg = phi_worst(t, W)
        for _ in range(20):
            q = Distribution(rng.dirichlet(np.ones(K)))
            assert psi_val >= worst_psi_maximand(s, W, q) - 1e-8
            assert psi_val >= psi(s, W, q) - 1e-8
            assert phi_val >= phi(t, W, q) - 1e-8
        # the returned argmax achieves the returned value
        assert math.isclose(psi_val, worst_psi_maximand(s, W, psi_arg),
                            rel_tol=1e-9, abs_tol=1e-11)
        assert math.isclose(phi_val, phi(t, W, phi_arg), rel_tol=1e-9,
                            abs_tol=1e-11)


def test_worst_case_one_dim_grid_oracle():
    # brute force over p = (q, 1-q) for a 2-input channel
    rng = np.random.default_rng(27)
    W = Channel(rng.dirichlet(np.ones(3), size=2))
    s = 0.4
    best = -math.inf
    for q in np.linspace(0.0, 1.0, 20001):
        p = np.array([q, 1.0 - q])
        best = max(best, float(np.sum((p @ W.rows ** 1.4) ** 0.6)))
    val, _ = psi_worst(s, W)
    assert math.isclose(val, math.log(best), rel_tol=1e-7)


def test_worst_case_symmetric_channel_uniform():
    W = bsc(0.1)
    for t in (-0.5, -0.2):
        val, arg = phi_worst(t, W)
        assert math.isclose(val, phi(t, W, uniform(2)), rel_tol=1e-8,
                            abs_tol=1e-10)
        assert np.allclose(arg.probs, 0.5, atol=1e-4)


def test_exponent_sweep_structure():
    W, p = bsc(0.1), uniform(2)
    reports = exponent_sweep(W, [0.5, 0.8], p)
    assert [r.family for r in reports[:6]] == list(GIVEN_FAMILIES)
    assert len(reports) == 12
    worst_only = exponent_sweep(W, [0.5], None)
    assert [r.family for r in worst_only] == list(WORST_FAMILIES)
    with pytest.raises(ValueError):
        exponent_sweep(W, [-0.1], p)


def test_exponents_zero_at_and_below_capacity():
    W, p = bsc(0.1), uniform(2)
    i_val = mutual_information(p, W)
    for R in (0.0, 0.5 * i_val, i_val):
        for rep in resolvability_exponents(R, W, p):
            if rep.family.endswith("_worst") and R == i_val:
                # exactly at capacity the optimizer sits at s = 0 and
                # the certified solver can leave rounding dust behind
                assert rep.bound_value <= 1e-15
            else:
                assert rep.bound_value == 0.0


def test_exponents_monotone_in_rate():
    W, p = bsc(0.1), uniform(2)
    rates = [0.4, 0.5, 0.6, 0.69]
    by_family = {}
    for rep in exponent_sweep(W, rates, p):
        by_family.setdefault(rep.family, []).append(rep.bound_value)
    for vals in by_family.values():
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_identity_rate_closed_forms():
    # noiseless channel: psi route gives (R - log K)/2 exactly, phi
    # route gives the same value to rounding, and the halved phi bound
    # shares its optimizer with the kl bound
    W, p = identity_channel(2), uniform(2)
    R = 1.0
    reports = {r.family: r for r in resolvability_exponents(R, W, p)}
    expected = (R - math.log(2.0)) / 2.0
    assert reports["vd_psi"].bound_value == expected
    assert math.isclose(reports["kl_phi"].bound_value, expected, rel_tol=1e-12)
    assert reports["vd_phi_half"].bound_value == (
        reports["kl_phi"].bound_value / 2.0)
    assert reports["vd_phi_half"].optimizer == reports["kl_phi"].optimizer
    # worst families agree with the given uniform law on this channel
    assert math.isclose(reports["vd_psi_worst"].bound_value, expected,
                        rel_tol=1e-8)


def test_wiretap_exponents_fields():
    W_B, W_E, p = bsc(0.1), bsc(0.3), uniform(2)
    rep = wiretap_exponents(0.05, 0.2, W_B, W_E, p)
    assert rep.error_exponent >= 0.0
    assert rep.leak_kl_exponent > 0.0          # R' above Eve's capacity
    assert rep.leak_vd_exponent_phi == rep.leak_kl_exponent / 2.0
    assert rep.leak_vd_exponent_psi >= rep.leak_vd_exponent_phi - 1e-12
    # tiny rates push the error optimizer to the s = 1 edge
    assert wiretap_exponents(0.001, 0.001, W_B, W_E, p).error_saturated
    assert not wiretap_exponents(1.0, 1.0, W_B, W_E, p).error_saturated
    # large R' pushes the divergence optimizer to the t = -1/2 edge
    assert wiretap_exponents(0.05, 1.0, W_B, W_E, p).leak_kl_saturated
    with pytest.raises(ValueError):
        wiretap_exponents(-0.1, 0.1, W_B, W_E, p)
    with pytest.raises(ValueError):
        wiretap_exponents(0.1, 0.1, bsc(0.1), identity_channel(3), p)


def test_capacity_closed_forms():
    for w in (0.05, 0.1, 0.25):
        res = capacity(bsc(w))
        assert abs(res.value - (math.log(2.0) - binary_entropy(w))) <= 1e-9
        assert np.allclose(res.argmax.probs, 0.5, atol=1e-4)
        assert res.residual <= 1e-8
    for K in (2, 3, 4):
        res = capacity(identity_channel(K))
        assert res.value == math.log(K)
        assert res.iterations == 1
    assert capacity(constant_channel([0.3, 0.7], 3)).value == 0.0


def test_capacity_convergence_error():
    W = Channel(np.array([[1.0, 0.0], [0.3, 0.7]]))
    with pytest.raises(ConvergenceError) as err:
        capacity(W, tol=1e-30, max_iter=3)
    assert err.value.best_value is not None
    assert err.value.residual is not None


def test_secrecy_rate_and_lower_bound():
    W_B, W_E, p = bsc(0.1), bsc(0.3), uniform(2)
    closed = binary_entropy(0.3) - binary_entropy(0.1)
    assert math.isclose(secrecy_rate(W_B, W_E, p), closed, rel_tol=1e-12)
    assert secrecy_rate(W_E, W_B, p) < 0.0
    val, arg = secrecy_capacity_lb(W_B, W_E)
    assert math.isclose(val, closed, rel_tol=1e-6)
    # the reported value is the exact rate of the reported law
    assert math.isclose(val, secrecy_rate(W_B, W_E, arg), rel_tol=1e-12,
                        abs_tol=1e-15)
    same, _ = secrecy_capacity_lb(W_B, W_B)
    assert abs(same) <= 1e-9
    with pytest.raises(ValueError):
        secrecy_rate(bsc(0.1), identity_channel(3), p)


def test_taylor_compare():
    W, p = bsc(0.1), uniform(2)
    R = mutual_information(p, W) + 0.02
    cmp_ = taylor_compare(R, W, p)
    assert math.isclose(cmp_.Delta, 0.02, rel_tol=1e-9)
    assert cmp_.approx_psi == 2.0 * cmp_.approx_phi_half
    assert cmp_.exact_psi_bound > 0.0
    assert cmp_.exact_phi_half_bound > 0.0
    with pytest.raises(ValueError):
        taylor_compare(1.0, identity_channel(2), uniform(2))
