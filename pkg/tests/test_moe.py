import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degrade_forge.errors import InvalidVector, ShapeMismatch
from degrade_forge.moe import (
    ExpertBank,
    WeightingNet,
    compute_weights,
    mix_params,
    mixing_macs,
)


def make_net(seed=0, hidden=64, n=5):
    rng = np.random.default_rng(seed)
    return WeightingNet(
        w1=rng.normal(size=(hidden, 33)).astype(np.float32),
        b1=rng.normal(size=hidden).astype(np.float32),
        w2=rng.normal(size=(n, hidden)).astype(np.float32),
        b2=rng.normal(size=n).astype(np.float32),
    )


def make_bank(n=3, seed=0, shapes=None):
    shapes = shapes or {"a.weight": (4, 3, 3, 3), "a.bias": (4,)}
    rng = np.random.default_rng(seed)
    return ExpertBank(experts=[
        {name: rng.normal(size=shape).astype(np.float32) for name, shape in shapes.items()}
        for _ in range(n)
    ])


# ---------------------------------------------------------------------------
# compute_weights
# ---------------------------------------------------------------------------

def test_zero_matrices_collapse_to_output_bias():
    net = make_net()
    net.w1 = np.zeros_like(net.w1)
    net.w2 = np.zeros_like(net.w2)
    a = compute_weights(np.random.default_rng(0).random(33), net)
    assert np.allclose(a, net.b2.astype(np.float64))


def test_default_dimensions_are_33_in_5_out():
    net = make_net()
    a = compute_weights(np.zeros(33), net)
    assert a.shape == (5,)


def test_matches_explicit_dot_product_reference():
    net = make_net(seed=3)
    v = np.random.default_rng(4).random(33)
    # independent elementwise evaluation
    hidden = np.zeros(64)
    for i in range(64):
        s = float(net.b1[i])
        for j in range(33):
            s += float(net.w1[i, j]) * v[j]
        hidden[i] = max(s, 0.0)
    want = np.zeros(5)
    for i in range(5):
        s = float(net.b2[i])
        for j in range(64):
            s += float(net.w2[i, j]) * hidden[j]
        want[i] = s
    assert np.abs(compute_weights(v, net) - want).max() < 1e-6


def test_rejects_non_finite_and_misshaped_input():
    net = make_net()
    bad = np.zeros(33)
    bad[0] = np.nan
    with pytest.raises(InvalidVector):
        compute_weights(bad, net)
    with pytest.raises(InvalidVector):
        compute_weights(np.zeros(12), net)


def test_no_output_squashing():
    # factors may be negative or exceed 1; nothing clamps them
    net = make_net(seed=9)
    a = compute_weights(np.full(33, 5.0), net)
    assert a.min() < 0 or a.max() > 1


# ---------------------------------------------------------------------------
# mix_params
# ---------------------------------------------------------------------------

def test_one_hot_mixing_is_bit_exact():
    bank = make_bank(n=4, seed=1)
    for i in range(bank.n):
        a = np.zeros(bank.n)
        a[i] = 1.0
        mixed = mix_params(bank, a)
        for name in bank.experts[i]:
            assert np.array_equal(mixed[name], bank.experts[i][name])


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_mixing_is_linear_in_the_factors(alpha, beta):
    bank = make_bank(n=3, seed=2)
    rng = np.random.default_rng(5)
    a, b = rng.random(3), rng.random(3)
    lhs = mix_params(bank, alpha * a + beta * b)
    for name in bank.experts[0]:
        rhs = alpha * mix_params(bank, a)[name] + beta * mix_params(bank, b)[name]
        assert np.abs(lhs[name] - rhs).max() < 1e-6


def test_equal_weights_give_elementwise_mean():
    bank = make_bank(n=2, seed=6, shapes={"t": (3, 3)})
    mixed = mix_params(bank, np.array([0.5, 0.5]))
    want = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            want[i, j] = (float(bank.experts[0]["t"][i, j]) +
                          float(bank.experts[1]["t"][i, j])) / 2
    assert np.abs(mixed["t"] - want).max() < 1e-7


def test_incongruent_bank_names_offending_tensor():
    bank = make_bank(n=2, seed=7)
    bank.experts[1]["a.weight"] = bank.experts[1]["a.weight"][:2]
    with pytest.raises(ShapeMismatch, match="a.weight"):
        mix_params(bank, np.array([0.5, 0.5]))


def test_wrong_factor_count_raises():
    with pytest.raises(ShapeMismatch):
        mix_params(make_bank(n=3), np.zeros(4))


def test_mixing_cost_is_n_times_parameter_count():
    bank = make_bank(n=5, seed=8)
    per_expert = sum(t.size for t in bank.experts[0].values())
    assert mixing_macs(bank) == 5 * per_expert
