"""Probability primitives: validation, products, divergences, dispersion."""

import math

import numpy as np
import pytest

from chanres import (
    BudgetError,
    Channel,
    Distribution,
    EnumerationBudget,
    bsc,
    constant_channel,
    dispersion_J,
    divergence_tail_check,
    identity_channel,
    kl_divergence,
    load_channel,
    load_distribution,
    mutual_information,
    output_distribution,
    point_mass,
    product,
    product_dist,
    save_channel,
    save_distribution,
    uniform,
    variational_distance,
)


def binary_entropy(w: float) -> float:
    return -w * math.log(w) - (1.0 - w) * math.log(1.0 - w)


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution(np.array([0.5, -0.1, 0.6]))
    with pytest.raises(ValueError):
        Distribution(np.array([0.5, 0.5 + 2e-10]))
    with pytest.raises(ValueError):
        Distribution(np.array([]))
    # a 1e-13 mass defect is accepted and renormalized away
    p = Distribution(np.array([0.5, 0.5 + 5e-13]))
    assert math.isclose(float(p.probs.sum()), 1.0, abs_tol=1e-15)
    assert not p.probs.flags.writeable


def test_channel_validation():
    with pytest.raises(ValueError):
        Channel(np.array([[0.5, 0.4], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        Channel(np.array([[1.2, -0.2], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        Channel(np.zeros((0, 2)))
    W = bsc(0.1)
    assert W.input_size == 2 and W.output_size == 2
    assert not W.rows.flags.writeable
    with pytest.raises(ValueError):
        bsc(1.5)


def test_helpers():
    assert np.array_equal(uniform(4).probs, np.full(4, 0.25))
    assert np.array_equal(point_mass(1, 3).probs, [0.0, 1.0, 0.0])
    assert np.array_equal(identity_channel(3).rows, np.eye(3))
    const = constant_channel([0.3, 0.7], 4)
    assert const.input_size == 4
    assert np.array_equal(const.rows, np.tile([0.3, 0.7], (4, 1)))


def test_output_distribution():
    wp = output_distribution(bsc(0.1), Distribution(np.array([0.8, 0.2])))
    assert math.isclose(wp.probs[0], 0.8 * 0.9 + 0.2 * 0.1, rel_tol=1e-15)
    assert math.isclose(wp.probs[1], 0.8 * 0.1 + 0.2 * 0.9, rel_tol=1e-15)
    with pytest.raises(ValueError):
        output_distribution(bsc(0.1), uniform(3))


def test_product_is_little_endian():
    # first coordinate = least significant digit of the product index
    W = Channel(np.array([[0.9, 0.1], [0.2, 0.8]]))
    W2 = product(W, 2)
    for x0 in range(2):
        for x1 in range(2):
            for y0 in range(2):
                for y1 in range(2):
                    assert math.isclose(
                        W2.rows[x0 + 2 * x1, y0 + 2 * y1],
                        W.rows[x0, y0] * W.rows[x1, y1], rel_tol=1e-15)
    p = Distribution(np.array([0.7, 0.3]))
    p3 = product_dist(p, 3)
    for x0 in range(2):
        for x1 in range(2):
            for x2 in range(2):
                assert math.isclose(
                    p3.probs[x0 + 2 * x1 + 4 * x2],
                    p.probs[x0] * p.probs[x1] * p.probs[x2], rel_tol=1e-15)


def test_product_budget():
    with pytest.raises(BudgetError) as err:
        product(bsc(0.1), 40)
    assert "max_joint_states" in str(err.value)
    with pytest.raises(BudgetError):
        product_dist(uniform(2), 3, EnumerationBudget(7))
    assert product_dist(uniform(2), 3, EnumerationBudget(8)).size == 8
    with pytest.raises(ValueError):
        EnumerationBudget(0)
    with pytest.raises(ValueError):
        product(bsc(0.1), 0)


def test_variational_distance():
    p = Distribution(np.array([0.9, 0.1]))
    q = uniform(2)
    assert math.isclose(variational_distance(p, q), 0.8, rel_tol=1e-15)
    assert variational_distance(p, p) == 0.0
    assert math.isclose(
        variational_distance(point_mass(0, 2), point_mass(1, 2)), 2.0)
    with pytest.raises(ValueError):
        variational_distance(p, uniform(3))


def test_kl_divergence():
    p = Distribution(np.array([0.9, 0.1]))
    q = uniform(2)
    # direct two-term evaluation
    oracle = 0.9 * math.log(0.9 / 0.5) + 0.1 * math.log(0.1 / 0.5)
    val = kl_divergence(p, q)
    assert math.isclose(val, oracle, rel_tol=1e-14)
    assert math.isclose(val, 0.36806420716849714, rel_tol=1e-15)
    assert kl_divergence(p, p) == 0.0
    assert kl_divergence(q, point_mass(0, 2)) == math.inf
    # mass escaping the support only matters on p's support
    assert kl_divergence(point_mass(0, 2), q) == math.log(2.0)


def test_mutual_information_closed_forms():
    for w in (0.05, 0.1, 0.25):
        val = mutual_information(uniform(2), bsc(w))
        assert math.isclose(val, math.log(2.0) - binary_entropy(w),
                            rel_tol=1e-13)
    assert mutual_information(uniform(3), identity_channel(3)) == pytest.approx(
        math.log(3.0), rel=1e-15)
    assert mutual_information(uniform(4), constant_channel([0.2, 0.8], 4)) == 0.0


def test_mutual_information_additive_over_products():
    rng = np.random.default_rng(7)
    for _ in range(10):
        K = int(rng.integers(2, 4))
        L = int(rng.integers(2, 4))
        W = Channel(rng.dirichlet(np.ones(L), size=K))
        p = Distribution(rng.dirichlet(np.ones(K)))
        base = mutual_information(p, W)
        for n in (2, 3):
            val = mutual_information(product_dist(p, n), product(W, n))
            assert math.isclose(val, n * base, rel_tol=1e-9, abs_tol=1e-9)


def test_dispersion_oracle():
    # four-cell enumeration of the information-density variance
    W = bsc(0.1)
    p = uniform(2)
    wp = [0.5, 0.5]
    mean = 0.0
    second = 0.0
    for x in range(2):
        for y in range(2):
            dens = math.log(W.rows[x, y]) - math.log(wp[y])
            mass = p.probs[x] * W.rows[x, y]
            mean += mass * dens
            second += mass * dens * dens
    oracle = 0.5 * (second - mean * mean)
    val = dispersion_J(p, W)
    assert math.isclose(val, oracle, rel_tol=1e-13)
    assert math.isclose(val, 0.2172508129462647, rel_tol=1e-15)
    # noiseless and constant channels carry no density spread; rounding
    # can leave cancellation dust when alphabet masses are inexact
    assert dispersion_J(uniform(2), identity_channel(2)) == 0.0
    assert dispersion_J(uniform(3), identity_channel(3)) <= 1e-14
    assert dispersion_J(uniform(2), constant_channel([0.4, 0.6], 2)) == 0.0


def test_pinsker_inequality_holds():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        k = int(rng.integers(2, 6))
        p = Distribution(rng.dirichlet(np.ones(k)))
        q = Distribution(rng.dirichlet(np.ones(k)))
        d = variational_distance(p, q)
        assert kl_divergence(p, q) >= d * d / 2.0 - 1e-12


def test_variational_triangle_inequality():
    rng = np.random.default_rng(43)
    for _ in range(500):
        k = int(rng.integers(2, 7))
        p = Distribution(rng.dirichlet(np.ones(k)))
        q = Distribution(rng.dirichlet(np.ones(k)))
        r = Distribution(rng.dirichlet(np.ones(k)))
        assert variational_distance(p, q) <= (
            variational_distance(p, r) + variational_distance(r, q) + 1e-12)


def test_divergence_tail_check():
    lhs, rhs = divergence_tail_check(point_mass(0, 2), uniform(2), 0.5)
    assert math.isclose(lhs, math.log(2.0) + 1.0 / math.e, rel_tol=1e-14)
    assert math.isclose(rhs, 0.5, rel_tol=1e-15)
    # atoms where q vanishes land in the tail event and lhs is infinite
    lhs, rhs = divergence_tail_check(uniform(2), point_mass(0, 2), 2.0)
    assert lhs == math.inf
    assert math.isclose(rhs, 1.0, rel_tol=1e-15)
    with pytest.raises(ValueError):
        divergence_tail_check(uniform(2), uniform(2), 0.0)


def test_divergence_tail_check_never_violated():
    rng = np.random.default_rng(44)
    for _ in range(2000):
        k = int(rng.integers(2, 6))
        p = Distribution(rng.dirichlet(np.ones(k)))
        q = Distribution(rng.dirichlet(np.ones(k)))
        alpha = float(rng.uniform(0.01, 5.0))
        lhs, rhs = divergence_tail_check(p, q, alpha)
        assert lhs >= rhs - 1e-12


def test_channel_json_round_trip(tmp_path):
    W = Channel(np.array([[0.9, 0.1], [0.25, 0.75]]))
    path = tmp_path / "w.json"
    save_channel(W, path)
    back = load_channel(path)
    assert np.array_equal(back.rows, W.rows)

    p = Distribution(np.array([0.6, 0.4]))
    dpath = tmp_path / "p.json"
    save_distribution(p, dpath)
    assert np.array_equal(load_distribution(dpath).probs, p.probs)


def test_channel_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"input_size": 2, "rows": [[1.0, 0.0], [0.0, 1.0]]}')
    with pytest.raises(ValueError) as err:
        load_channel(bad)
    assert "output_size" in str(err.value)

    shape = tmp_path / "shape.json"
    shape.write_text(
        '{"input_size": 3, "output_size": 2, "rows": [[1.0, 0.0], [0.0, 1.0]]}')
    with pytest.raises(ValueError) as err:
        load_channel(shape)
    assert "shape" in str(err.value)

    nodist = tmp_path / "nodist.json"
    nodist.write_text('{"values": [0.5, 0.5]}')
    with pytest.raises(ValueError) as err:
        load_distribution(nodist)
    assert "probs" in str(err.value)
