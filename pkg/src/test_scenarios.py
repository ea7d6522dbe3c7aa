# src/test_scenarios.py
import math

import numpy as np
import pytest
from hypothesis import given
from numpy.testing import assert_allclose, assert_array_equal

from .errors import DimensionMismatch, SingularGram
from .hermitian_kernel import HermitianGram, gram_scale, max_abs
from .mmse_estimation import JointGram, mmse_project, mutual_information, project_sequence
from .scenarios import (
    ChannelKind,
    block_predictor,
    build_joint_gram,
    dfe_filters,
    entropy_table,
    incremental_rates,
    isi_scenario,
    mac_scenario,
    mimo_scenario,
    reduce_observations,
    stagewise_mutual_information,
)
from .strategies import channel_cases, complex_normal, seeds, spread_channel_cases

LOG2_3 = math.log2(3.0)


def two_user_mac():
    return mac_scenario([1, 1], powers=[1, 1], noise_variance=1.0)


# ---------- builders ----------
def test_isi_builds_banded_toeplitz():
    s = isi_scenario([1, 0.5], block_length=3)
    assert s.kind is ChannelKind.ISI
    assert_array_equal(s.H, [[1, 0, 0], [0.5, 1, 0], [0, 0.5, 1]])
    assert s.group_names == ["x1", "x2", "x3"]


def test_scalar_isi_joint_gram():
    j = build_joint_gram(isi_scenario([1], block_length=1, powers=[3], noise_variance=1))
    assert_array_equal(j.gram.matrix, [[3, 3], [3, 4]])


def test_useless_channel():
    s = mimo_scenario(np.zeros((2, 2)), noise_variance=0.5)
    j = build_joint_gram(s)
    assert_array_equal(j.block(s.group_names, "y"), 0)
    assert_array_equal(j.sub_gram("y").matrix, 0.5 * np.eye(2))


def test_mac_joint_gram():
    j = build_joint_gram(two_user_mac())
    assert j.group_names == ["u1", "u2", "y"]
    assert_array_equal(j.sub_gram("y").matrix, [[3]])
    assert_array_equal(j.block(["u1", "u2"], "y"), [[1], [1]])


def test_grouped_inputs_follow_group_order():
    s = mimo_scenario(np.eye(3), groups=[["x3"], ["x1", "x2"]])
    j = build_joint_gram(s)
    assert j.labels[:3] == ["x3", "x1", "x2"]
    assert j.group_names[:2] == ["x3", "x1+x2"]


def test_scenario_validation():
    with pytest.raises(DimensionMismatch):
        mimo_scenario(np.ones((2, 3)), powers=[1, 1])
    with pytest.raises(ValueError):
        mimo_scenario(np.eye(2), groups=[["x1"]])
    with pytest.raises(ValueError):
        mimo_scenario(np.eye(2), groups=[["x1"], ["x2"], ["x1"]])
    with pytest.raises(SingularGram) as exc:
        mimo_scenario(np.eye(2), noise_gram=HermitianGram(np.diag([1.0, 0.0])))
    assert exc.value.which == "R_nn"


# ---------- rates ----------
def test_mac_corner_point():
    j = build_joint_gram(two_user_mac())
    p = incremental_rates(j, ["u1", "u2"])
    assert p.rates_bits[0] == pytest.approx(math.log2(1.5), abs=1e-12)
    assert p.rates_bits[1] == pytest.approx(1.0, abs=1e-12)
    assert p.total_bits == pytest.approx(LOG2_3, abs=1e-12)
    assert p.reference_mi.bits == pytest.approx(LOG2_3, abs=1e-12)


def test_mac_reversed_order_swaps_rates():
    j = build_joint_gram(two_user_mac())
    a = incremental_rates(j, ["u1", "u2"])
    b = incremental_rates(j, ["u2", "u1"])
    assert_allclose(b.rates_nats, a.rates_nats, atol=1e-12)
    assert b.total_nats == pytest.approx(a.total_nats, abs=1e-12)


def test_scalar_awgn_rate():
    j = build_joint_gram(mimo_scenario([[1]], powers=[3], noise_variance=1))
    p = incremental_rates(j, ["x1"])
    assert p.rates_bits[0] == pytest.approx(2.0, abs=1e-12)
    f = dfe_filters(j, ["x1"])
    assert f.forward[0, 0] == pytest.approx(0.75, abs=1e-12)
    assert f.error_gram.matrix[0, 0] == pytest.approx(0.75, abs=1e-12)
    assert_array_equal(f.predictor, [[0]])


def test_single_group_rate_is_mutual_information():
    s = mimo_scenario(complex_normal(np.random.default_rng(5), (3, 3)), groups=[["x1", "x2", "x3"]])
    j = build_joint_gram(s)
    p = incremental_rates(j, ["x1+x2+x3"])
    assert p.rates_nats[0] == pytest.approx(mutual_information(j, "x1+x2+x3", "y").nats, abs=1e-9)


def test_order_must_list_every_group():
    j = build_joint_gram(two_user_mac())
    with pytest.raises(ValueError):
        incremental_rates(j, ["u1"])


@given(channel_cases(max_inputs=8, max_outputs=8))
def test_rate_sum_identity(case):
    s, order = case
    p = incremental_rates(build_joint_gram(s), order)
    assert p.rate_sum_gap <= 1e-9
    assert min(p.rates_nats) >= -1e-12


@given(channel_cases())
def test_total_rate_is_order_invariant(case):
    s, order = case
    j = build_joint_gram(s)
    rng = np.random.default_rng(len(order))
    totals = [incremental_rates(j, [str(g) for g in rng.permutation(order)]).total_nats for _ in range(5)]
    assert max(totals) - min(totals) <= 1e-9


@given(channel_cases())
def test_stagewise_mutual_information_agrees(case):
    s, order = case
    j = build_joint_gram(s)
    assert_allclose(stagewise_mutual_information(j, order), incremental_rates(j, order).rates_nats, atol=1e-9)


def test_entropy_table_mac():
    j = build_joint_gram(two_user_mac())
    t = entropy_table(j, ["u1", "u2"])
    assert t["h(X)"] - t["h(E)"] == pytest.approx(math.log(3.0), abs=1e-12)
    assert t["h(X)/N"] == pytest.approx(t["h(X)"] / 2)


# ---------- decision feedback ----------
def test_block_predictor_two_stage_example():
    b, stages = block_predictor(HermitianGram(np.array([[2, 1], [1, 2]])), (("a", ("a",)), ("b", ("b",))))
    assert_allclose(b, [[0, 0], [0.5, 0]], atol=0)
    assert_allclose([g.matrix[0, 0].real for g in stages], [2, 1.5])


def test_block_predictor_diagonal_errors():
    b, _ = block_predictor(HermitianGram(np.diag([1.0, 2.0, 3.0])), (("a", ("a",)), ("b", ("b", "c"))))
    assert_array_equal(b, 0)


@given(channel_cases())
def test_dfe_forms_agree_and_feedback_is_causal(case):
    s, order = case
    j = build_joint_gram(s)
    f = dfe_filters(j, order)
    rng = np.random.default_rng(0)
    y = complex_normal(rng, (10_000, s.noise_gram.dim))
    x = complex_normal(rng, (10_000, s.input_gram.dim))
    diff = f.noise_predictive_input(y, x) - f.standard_input(y, x)
    assert np.max(np.abs(diff)) <= 1e-10 * gram_scale(j.gram)
    start = 0
    for name in order:
        width = len(j.group_labels(name))
        assert np.all(f.predictor[start:start + width, start:] == 0)
        start += width


@given(channel_cases())
def test_stage_variances_are_conditional_error_variances(case):
    s, order = case
    j = build_joint_gram(s)
    f = dfe_filters(j, order)
    errors = JointGram(tuple((g, tuple(j.group_labels(g))) for g in order), f.error_gram)
    for i, name in enumerate(order):
        direct = project_sequence(errors, name, [[g] for g in order[:i]]) if i else mmse_project(errors, name, [])
        assert_allclose(f.stage_error_grams[i].matrix, direct.error_gram.matrix, atol=1e-9)


def test_scalar_stage_variances_are_pivots():
    j = build_joint_gram(two_user_mac())
    f = dfe_filters(j, ["u1", "u2"])
    assert_allclose(f.stage_variances, f.error_gram.innovations.d2, atol=1e-12)
    assert_allclose(f.stage_variances, [2 / 3, 1 / 2], atol=1e-12)


# ---------- observation reduction ----------
def _dup_observation() -> JointGram:
    m = np.array([[1, 1, 1, 0], [1, 2, 2, 0], [1, 2, 2, 0], [0, 0, 0, 0]], dtype=float)
    return JointGram((("x", ("x",)), ("y", ("y1", "y2", "y3"))), HermitianGram(m))


def test_reduce_observations_drops_dependent_and_zero_rows():
    j = _dup_observation()
    r = reduce_observations(j)
    assert r.group_labels("y") == ["y1"]
    assert r.group_labels("x") == ["x"]
    manual = JointGram((("x", ("x",)), ("y", ("y1",))), HermitianGram(np.array([[1, 1], [1, 2]])))
    assert mutual_information(r, "x", "y").nats == pytest.approx(mutual_information(manual, "x", "y").nats)


def test_reduce_observations_keeps_full_rank_set():
    j = build_joint_gram(two_user_mac())
    assert reduce_observations(j) is j


@given(seeds)
def test_reduce_observations_survives_round_off_in_dependent_rows(seed):
    # X = I_3, Y = G X with y3 = 0.7 y1 - 1.3j y2, no noise
    rng = np.random.default_rng(seed)
    g = complex_normal(rng, (2, 3))
    g = np.vstack([g, 0.7 * g[0] - 1.3j * g[1]])
    full = np.block([[np.eye(3), g.conj().T], [g, g @ g.conj().T]])
    j = JointGram((("x", ("x1", "x2", "x3")), ("y", ("y1", "y2", "y3"))), HermitianGram.derived(full))
    r = reduce_observations(j)
    assert r.group_labels("y")[:2] == ["y1", "y2"]
    assert r.group_labels("x") == ["x1", "x2", "x3"]


# ---------- wide channels, spread gains ----------
@given(spread_channel_cases())
def test_wide_channel_rate_sum_identity(case):
    s, order = case
    p = incremental_rates(build_joint_gram(s), order)
    assert p.rate_sum_gap <= 1e-9 * (1.0 + abs(p.total_nats))
    assert min(p.rates_nats) >= -1e-9


@given(spread_channel_cases())
def test_wide_channel_dfe_forms_agree(case):
    s, order = case
    f = dfe_filters(build_joint_gram(s), order)
    rng = np.random.default_rng(1)
    y = complex_normal(rng, (10_000, s.noise_gram.dim))
    x = complex_normal(rng, (10_000, s.input_gram.dim))
    diff = f.noise_predictive_input(y, x) - f.standard_input(y, x)
    scale = (1.0 + max_abs(f.forward)) * (1.0 + max_abs(f.predictor))
    assert max_abs(diff) <= 1e-10 * scale * (1.0 + max_abs(y) + max_abs(x))


@given(spread_channel_cases())
def test_wide_channel_stage_variances(case):
    s, order = case
    j = build_joint_gram(s)
    f = dfe_filters(j, order)
    errors = JointGram(tuple((g, tuple(j.group_labels(g))) for g in order), f.error_gram)
    for i, name in enumerate(order):
        direct = project_sequence(errors, name, [[g] for g in order[:i]]) if i else mmse_project(errors, name, [])
        assert_allclose(f.stage_error_grams[i].matrix, direct.error_gram.matrix, atol=1e-8 * gram_scale(f.error_gram))
