import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tskstreams.fuzzy import (VOID, LeftUnbounded, NotSiblings, RightUnbounded, Rule, RuleSet,
                              SShaped, SplitStep, Uncovered, eval_mf, mf_from_dict, mf_to_dict, replay_path,
                              split_mf, split_widths, union_mf)


def test_sshaped_values():
    mf = SShaped(0, 1, 2, 3)
    assert eval_mf(mf, 1.5) == 1.0
    assert eval_mf(mf, 0.5) == 0.5
    assert eval_mf(mf, 0.25) == pytest.approx(0.125, abs=1e-15)
    assert eval_mf(mf, 2.5) == 0.5
    assert eval_mf(mf, -1) == 0.0
    assert eval_mf(mf, 4) == 0.0


def test_unbounded_values():
    assert eval_mf(LeftUnbounded(0, 2), -5) == 1.0
    assert eval_mf(LeftUnbounded(0, 2), 1) == 0.5
    assert eval_mf(LeftUnbounded(0, 2), 3) == 0.0
    assert eval_mf(RightUnbounded(0, 2), -1) == 0.0
    assert eval_mf(RightUnbounded(0, 2), 1) == 0.5
    assert eval_mf(RightUnbounded(0, 2), 9) == 1.0
    assert eval_mf(VOID, -1e300) == 1.0


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        SShaped(0, 2, 1, 3)
    with pytest.raises(ValueError):
        LeftUnbounded(2, 1)


def test_serialization_round_trip():
    for mf in (VOID, SShaped(0, 1, 2, 3), LeftUnbounded(-1, 0.5), RightUnbounded(0.1, 0.2)):
        data = mf_to_dict(mf)
        assert set(data) == {"variant", "params"}
        assert mf_from_dict(data) == mf


def ramp_with_degree(level):
    """A LeftUnbounded set whose degree at x = 0 is ``level``."""
    # LeftUnbounded(0, 1) reaches ``level`` at t
    t = 1 - math.sqrt(level / 2) if level < 0.5 else math.sqrt((1 - level) / 2)
    return LeftUnbounded(-t, 1 - t)


def test_activation_is_minimum_degree():
    ants = (ramp_with_degree(0.3), ramp_with_degree(0.8), VOID)
    rule = Rule(0, ants, np.zeros(4))
    assert rule.degrees([0, 0, 5]) == pytest.approx([0.3, 0.8, 1.0], abs=1e-12)
    assert rule.activation([0, 0, 5]) == pytest.approx(0.3, abs=1e-12)


def test_activation_edge_cases():
    assert Rule(0, (VOID, VOID), np.zeros(3)).activation([1, 2]) == 1.0
    assert Rule(0, (SShaped(0, 1, 2, 3), VOID), np.zeros(3)).activation([9, 0]) == 0.0
    with pytest.raises(ValueError):
        Rule(0, (VOID, VOID, VOID), np.zeros(4)).activation([1.0, 2.0])


def test_normalized_weights_and_predict():
    rs = RuleSet(1)
    first = rs[rs.default_id]
    first.set_antecedents([ramp_with_degree(0.2)])
    first.consequent[:] = (1.0, 0.0)
    rs.new_rule([ramp_with_degree(0.6)], np.array([2.0, 0.0]))
    assert rs.activations([0.0]) == pytest.approx([0.2, 0.6], abs=1e-12)
    assert rs.normalized_weights([0.0]) == pytest.approx([0.25, 0.75], abs=1e-12)
    assert rs.predict([0.0]) == pytest.approx(1.75, abs=1e-12)


def test_single_rule_weight_is_one_and_fresh_default_predicts_zero():
    rs = RuleSet(2)
    rs[rs.default_id].set_antecedents([LeftUnbounded(0, 1), VOID])
    assert rs.normalized_weights([0.5, 0.0]) == pytest.approx([1.0])
    assert RuleSet(3).predict([4.0, -2.0, 1.0]) == 0.0


def test_uncovered_and_fallback():
    rs = RuleSet(1)
    rs[rs.default_id].set_antecedents([SShaped(0, 1, 2, 3)])
    rs[rs.default_id].consequent[:] = (4.0, 1.0)
    with pytest.raises(Uncovered):
        rs.normalized_weights([10.0])
    assert rs.predict_total([10.0]) == 14.0


def test_predict_matches_dot_product_oracle():
    rng = np.random.default_rng(3)
    rs = RuleSet(2)
    ants = [(SShaped(-2, -1, 1, 2), VOID), (LeftUnbounded(0, 1), RightUnbounded(-1, 0)), (VOID, SShaped(-3, -2, 2, 3))]
    rs[rs.default_id].set_antecedents(ants[0])
    for a in ants[1:]:
        rs.new_rule(a, rng.normal(size=3))
    rs[rs.default_id].consequent[:] = rng.normal(size=3)
    for _ in range(50):
        x = rng.uniform(-1.5, 1.5, size=2)
        mu = np.array([r.activation(x) for r in rs])
        outs = np.array([r.consequent[0] + r.consequent[1:] @ x for r in rs])
        assert rs.predict(x) == pytest.approx(float(mu @ outs / mu.sum()), rel=1e-12, abs=1e-12)


def test_single_rule_prediction_is_its_linear_output():
    rs = RuleSet(2)
    rs[rs.default_id].consequent[:] = (0.5, 2.0, -1.0)
    assert rs.predict([3.0, 4.0]) == 0.5 + 6.0 - 4.0


def test_split_examples():
    lower, upper = split_mf(VOID, 0.0, 0.1, 0.3)
    assert lower == LeftUnbounded(0.1, 0.3)
    assert upper == RightUnbounded(-0.3, -0.1)
    lower, upper = split_mf(SShaped(0, 1, 5, 6), 3, 0.2, 0.5)
    assert lower == SShaped(0, 1, 3.2, 3.5)
    assert upper == SShaped(2.5, 2.8, 5, 6)
    lower, upper = split_mf(LeftUnbounded(4, 5), 1, 0.2, 0.5)
    assert lower == LeftUnbounded(1.2, 1.5) and upper == SShaped(0.5, 0.8, 4, 5)
    lower, upper = split_mf(RightUnbounded(0, 1), 3, 0.2, 0.5)
    assert lower == SShaped(0, 1, 3.2, 3.5) and upper == RightUnbounded(2.5, 2.8)


def test_split_errors():
    with pytest.raises(ValueError):
        split_mf(VOID, 0.0, 0.3, 0.1)
    with pytest.raises(ValueError):
        split_mf(SShaped(0, 1, 2, 3), 2.5, 0.1, 0.2)


def test_split_shrinks_widths_to_fit_core():
    rho1, rho2 = split_widths(SShaped(0, 1, 2, 3), 1.1, 0.2, 0.4)
    assert rho2 == pytest.approx(0.1)
    assert rho1 == pytest.approx(0.05)
    lower, upper = split_mf(SShaped(0, 1, 2, 3), 1.1, 0.2, 0.4)
    assert upper.a >= 1.0 - 1e-12


def test_union_examples():
    assert union_mf(LeftUnbounded(0.1, 0.3), RightUnbounded(-0.3, -0.1)) == VOID
    assert union_mf(SShaped(0, 1, 3.2, 3.5), SShaped(2.5, 2.8, 5, 6)) == SShaped(0, 1, 5, 6)
    assert union_mf(SShaped(2.5, 2.8, 5, 6), SShaped(0, 1, 3.2, 3.5)) == SShaped(0, 1, 5, 6)
    with pytest.raises(NotSiblings):
        union_mf(SShaped(0, 1, 2, 3), SShaped(10, 11, 12, 13))
    with pytest.raises(NotSiblings):
        union_mf(VOID, VOID)


def test_replay_path_rebuilds_antecedents():
    _, upper = split_mf(VOID, 0.0, 0.1, 0.3)
    path = (SplitStep(1, 0, 0.0, 0.1, 0.3, 1, 0), SplitStep(2, 0, 1.0, 0.1, 0.3, 0, 1))
    ants = replay_path(2, path)
    assert ants[1] == VOID
    assert ants[0] == split_mf(upper, 1.0, 0.1, 0.3)[0]


# ---------------------------------------------------------------- properties

finite = st.floats(-50, 50, allow_nan=False)
gap = st.floats(0.01, 10, allow_nan=False)


@st.composite
def membership(draw):
    kind = draw(st.sampled_from(["s", "l", "r"]))
    a = draw(finite)
    b = a + draw(gap)
    if kind == "l":
        return LeftUnbounded(a, b)
    if kind == "r":
        return RightUnbounded(a, b)
    c = b + draw(gap)
    return SShaped(a, b, c, c + draw(gap))


def _breakpoints(mf):
    return list(mf.params)


@settings(max_examples=300, deadline=None)
@given(membership(), st.floats(-100, 100, allow_nan=False))
def test_membership_in_unit_interval(mf, x):
    assert 0.0 <= eval_mf(mf, x) <= 1.0


@settings(max_examples=300, deadline=None)
@given(membership())
def test_membership_continuity_and_midpoints(mf):
    for t in _breakpoints(mf):
        assert abs(eval_mf(mf, t - 1e-7) - eval_mf(mf, t + 1e-7)) <= 1e-5
    p = mf.params
    rise = (p[0], p[1]) if not isinstance(mf, LeftUnbounded) else None
    fall = (p[2], p[3]) if isinstance(mf, SShaped) else (p[0], p[1]) if isinstance(mf, LeftUnbounded) else None
    for ramp in (rise, fall):
        if ramp is not None:
            assert abs(eval_mf(mf, (ramp[0] + ramp[1]) / 2) - 0.5) <= 1e-12


@st.composite
def split_case(draw):
    mf = draw(st.one_of(st.just(VOID), membership()))
    lo, hi = mf.core
    lo = max(lo, -60.0)
    hi = min(hi, 60.0)
    frac = draw(st.floats(0.05, 0.95))
    q = lo + frac * (hi - lo)
    rho1 = draw(st.floats(1e-3, 2.0))
    rho2 = rho1 * draw(st.floats(1.1, 5.0))
    return mf, q, rho1, rho2


@settings(max_examples=300, deadline=None)
@given(split_case())
def test_split_then_union_is_identity(case):
    mf, q, rho1, rho2 = case
    lower, upper = split_mf(mf, q, rho1, rho2)
    assert union_mf(lower, upper) == mf


@settings(max_examples=200, deadline=None)
@given(split_case(), st.floats(0, 1))
def test_children_agree_with_parent_away_from_overlap(case, u):
    mf, q, rho1, rho2 = case
    r1, r2 = split_widths(mf, q, rho1, rho2)
    lower, upper = split_mf(mf, q, rho1, rho2)
    below = q - r2 - u * 10
    above = q + r2 + u * 10
    assert eval_mf(lower, below) == eval_mf(mf, below)
    assert eval_mf(upper, above) == eval_mf(mf, above)
