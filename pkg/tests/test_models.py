"""Model-core behavior: evaluation values, invariants, and validation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qelicit.models import (
    Alternative,
    Menu,
    ModelError,
    ModelSpec,
    UtilitySpec,
    WeightSpec,
    attribute_evaluation,
    catalog_name,
    cc,
    evaluate,
    evaluate_margin,
    gpn,
    gpn_power,
    ncc,
    normalized_utility,
    pn,
    rn_kinked,
    rn_linear,
    rn_power,
)

from conftest import catalog_instances


# --- independent scalar formulas used as oracles -------------------------


def oracle_u(model: ModelSpec, t: float) -> float:
    fam = model.utility.family
    if fam == "linear":
        return t
    if fam == "kinked":
        return t if t >= 0 else model.utility.lam * t
    if fam == "power":
        a = model.utility.alpha
        return abs(t) ** a * (1 if t > 0 else -1 if t < 0 else 0)
    raise AssertionError("cc handled separately")


def oracle_w(model: ModelSpec, t: float, s: float) -> float:
    w = model.weight
    if w.family == "constant":
        return 1.0
    if w.family == "range":
        span = abs(oracle_u(model, t) - oracle_u(model, s))
        return 0.0 if span == 0 else span**w.gamma
    if w.family == "pairwise":
        return 1.0 / (abs(t) + abs(s))
    if w.family == "gen_pairwise":
        return 1.0 / (w.sigma + abs(t) + abs(s))
    if w.family == "gen_pairwise_power":
        return 1.0 / (w.sigma**w.alpha + abs(t) ** w.alpha + abs(s) ** w.alpha)
    raise AssertionError(w.family)


# --- worked values --------------------------------------------------------


class TestEvaluate:
    def test_three_option_range_norm_worked_point(self):
        # 10 * 15^(-1/3) - 10 * 20^(-1/3), quality range 15, price range 20
        model = rn_linear(-1 / 3)
        menu = Menu(((15.0, -20.0), (10.0, -10.0), (0.0, 0.0)))
        low = Alternative((10.0, -10.0))
        expected = 10 * 15 ** (-1 / 3) - 10 * 20 ** (-1 / 3)
        assert evaluate(model, low, menu) == pytest.approx(expected, abs=1e-12)
        assert evaluate(model, low, menu) == pytest.approx(0.371, abs=1e-3)

    def test_zero_alternative_is_zero_for_every_model(self, catalog):
        zero = Alternative((0.0, 0.0))
        menu_with_zero = Menu(((5.0, 0.0), (0.0, 0.0)))
        for model in catalog.values():
            assert evaluate(model, zero, menu_with_zero) == 0.0

    def test_kinked_ignore_menu_balances_at_half_quality(self):
        model = rn_kinked(0.0, 2.0)
        menu = Menu(((10.0, -5.0), (0.0, 0.0)))
        assert evaluate(model, Alternative((10.0, -5.0)), menu) == 0.0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ModelError):
            Menu(((1.0, 2.0), (1.0,)))

    def test_target_not_in_menu_rejected(self):
        menu = Menu(((5.0, 0.0), (0.0, 3.0)))
        with pytest.raises(ModelError):
            evaluate(rn_linear(0.0), Alternative((1.0, 1.0)), menu)

    def test_sign_consistency_enforced(self):
        with pytest.raises(ModelError):
            Menu(((5.0, -1.0), (0.0, 3.0)))

    def test_three_options_rejected_off_range_family(self):
        menu = Menu(((5.0, 0.0), (3.0, 0.0), (0.0, 0.0)))
        with pytest.raises(ModelError):
            evaluate(gpn(1.0), Alternative((5.0, 0.0)), menu)

    def test_three_option_weight_collapses_to_binary_on_coincidence(self):
        # duplicating one alternative leaves every attribute range unchanged
        model = rn_kinked(-0.5, 2.0)
        a, b = Alternative((6.0, -2.0)), Alternative((4.0, -5.0))
        menu2 = Menu((a, b))
        menu3 = Menu((a, b, b))
        for target in (a, b):
            assert evaluate(model, target, menu3) == pytest.approx(
                evaluate(model, target, menu2), rel=1e-15
            )


class TestNormalizedUtility:
    @pytest.mark.parametrize("gamma", [-0.5, 0.0, 1.0])
    @pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
    def test_kinked_gains_follow_power_of_one_plus_gamma(self, gamma, lam):
        model = rn_kinked(gamma, lam)
        assert normalized_utility(model, 2.0) == pytest.approx(
            2.0 ** (1 + gamma), rel=1e-14
        )
        assert normalized_utility(model, -2.0) == pytest.approx(
            -((lam * 2.0) ** (1 + gamma)), rel=1e-14
        )

    def test_zero_maps_to_zero_everywhere(self, catalog):
        for model in catalog.values():
            assert normalized_utility(model, 0.0) == 0.0

    def test_gen_pairwise_saturating_form(self):
        assert normalized_utility(gpn(1.0), 3.0) == pytest.approx(0.75, rel=1e-15)

    def test_sign_coherence_on_grid(self, catalog):
        ts = np.arange(1, 1001) * 0.01
        for model in catalog.values():
            pos = np.array([normalized_utility(model, t) for t in ts])
            neg = np.array([normalized_utility(model, -t) for t in ts])
            assert (pos >= 0).all()
            assert (neg <= 0).all()
            assert np.isfinite(pos).all() and np.isfinite(neg).all()


class TestAttributeEvaluation:
    def test_cc_evaluates_gap_to_the_menu_minimum(self):
        assert attribute_evaluation(cc(0.5), 9.0, 5.0) == pytest.approx(2.0, rel=1e-15)
        assert attribute_evaluation(cc(0.5), 5.0, 9.0) == 0.0

    def test_cc_zero_first_argument(self):
        assert attribute_evaluation(cc(0.7), 0.0, 7.0) == 0.0
        assert attribute_evaluation(cc(0.7), 0.0, -7.0) == 0.0

    def test_ncc_renormalizes_to_identity_scale(self):
        assert attribute_evaluation(ncc(0.5), 9.0, 5.0) == pytest.approx(4.0, rel=1e-15)

    def test_cc_mixed_signs_rejected(self):
        with pytest.raises(ModelError):
            attribute_evaluation(cc(0.5), 3.0, -1.0)

    def test_weighted_models_reduce_to_u_times_w(self, catalog):
        pairs = [(3.0, 1.0), (0.5, 0.5), (7.0, 0.0), (-2.0, -4.0), (10.0, 9.99)]
        for name, model in catalog.items():
            if model.kind != "weighted":
                continue
            for t, s in pairs:
                expected = oracle_u(model, t) * oracle_w(model, t, s) if t != 0 else 0.0
                assert attribute_evaluation(model, t, s) == expected, (name, t, s)

    def test_range_weight_zero_at_equal_utilities(self):
        # gamma < 0 would blow up at zero range; the piecewise rule returns 0
        for model in (rn_linear(-0.5), rn_kinked(-0.9, 2.0), rn_power(-0.5, 2.0)):
            assert attribute_evaluation(model, 4.0, 4.0) == 0.0
            assert math.isfinite(attribute_evaluation(model, 4.0, 3.9999))

    def test_pn_zero_pair_defined(self):
        assert attribute_evaluation(pn(), 0.0, 0.0) == 0.0


class TestValidation:
    def test_parameter_ranges(self):
        with pytest.raises(ModelError):
            UtilitySpec.kinked(1.0)
        with pytest.raises(ModelError):
            UtilitySpec.power(1.0)
        with pytest.raises(ModelError):
            UtilitySpec.cc_concavity(1.0)
        with pytest.raises(ModelError):
            WeightSpec.range_norm(-1.0)
        with pytest.raises(ModelError):
            WeightSpec.gen_pairwise_norm(0.0)

    def test_catalog_combination_rules(self):
        with pytest.raises(ModelError):
            ModelSpec(UtilitySpec.kinked(2.0), WeightSpec.pairwise_norm())
        with pytest.raises(ModelError):
            ModelSpec(UtilitySpec.power(0.5), WeightSpec.gen_pairwise_norm_power(1.0, 2.0))
        with pytest.raises(ModelError):
            ModelSpec(UtilitySpec.cc_concavity(0.5), WeightSpec.constant())
        with pytest.raises(ModelError):
            ModelSpec(UtilitySpec.linear(), WeightSpec.ncc_range(0.5))

    def test_catalog_names_round_trip(self, catalog):
        for name, model in catalog.items():
            assert catalog_name(model) == name

    def test_alternative_needs_finite_values(self):
        with pytest.raises(ModelError):
            Alternative((float("nan"),))
        with pytest.raises(ModelError):
            Alternative(())


@st.composite
def sign_consistent_pair(draw):
    n = draw(st.integers(min_value=1, max_value=4))
    xs, ys = [], []
    money = st.floats(0.0, 10.0, allow_nan=False)
    signs = st.sampled_from([1.0, -1.0])
    for _ in range(n):
        sign = draw(signs)
        xs.append(sign * draw(money))
        ys.append(sign * draw(money))
    return Alternative(xs), Alternative(ys)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(sign_consistent_pair())
    def test_margin_matches_evaluate_difference(self, pair):
        x, y = pair
        menu = Menu((x, y))
        for model in catalog_instances().values():
            margin = evaluate_margin(model, x, y)
            direct = evaluate(model, x, menu) - evaluate(model, y, menu)
            assert margin == pytest.approx(direct, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(sign_consistent_pair())
    def test_zero_alternative_nullity(self, pair):
        x, _ = pair
        zero = Alternative([0.0] * len(x))
        menu = Menu((x, zero))
        for model in catalog_instances().values():
            assert evaluate(model, zero, menu) == 0.0
