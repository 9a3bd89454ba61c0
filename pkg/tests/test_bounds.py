from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdmac_keys.bounds import (
    MarkovChainError,
    common_key_lb_objective,
    corollary2_point,
    degraded_common_key_capacity,
    modadd_lb_closed_form,
    private_key_inner_point,
    private_key_outer_point,
    stuck_at_lb_closed_form,
    upper_bound_value,
)
from sdmac_keys.channels import (
    S, T, Y, Z,
    AuxiliaryScheme,
    SdMacSpec,
    build_modulo_additive,
    build_parallel,
    build_stuck_at,
    modadd_scheme,
    parallel_scheme,
    random_aux_scheme,
    random_round2_scheme,
    random_sdmac,
    state_copy_scheme,
)
from sdmac_keys.probability import binary_convolution, binary_entropy as hb
from sdmac_keys.search import induced_input_law

from oracles import cmi, round1_joint, round2_joint

# H_b(0.3) - H_b(0.1), 30 digits from mpmath
MODADD_GAP = 0.412295305641411396971


class TestClosedForms:
    def test_stuck_at(self):
        cf = stuck_at_lb_closed_form(0.3)
        assert (cf.rate, cf.constraint) == (0.3, pytest.approx(0.7))
        with pytest.raises(ValueError):
            stuck_at_lb_closed_form(-0.1)

    def test_modadd_noiseless_state(self):
        cf = modadd_lb_closed_form(0.5, 0.0, 0.1, 0.3)
        assert cf.rate == pytest.approx(MODADD_GAP, abs=1e-12)

    def test_gap_constant(self):
        assert hb(0.3) - hb(0.1) == pytest.approx(MODADD_GAP, abs=1e-14)

    def test_equal_noise_gives_zero(self):
        for a in (0.0, 0.2, 0.5):
            assert modadd_lb_closed_form(a, 0.2, 0.25, 0.25).raw_rate == pytest.approx(0.0, abs=1e-15)

    def test_constraint_is_capped_by_link(self):
        assert modadd_lb_closed_form(0.5, 0.1, 0.1, 0.3, r_c=0.05).constraint == 0.05

    @pytest.mark.parametrize("alpha,p_s,p_1,p_2", [(0.5, 0.2, 0.1, 0.3), (0.3, 0.1, 0.0, 0.4), (0.1, 0.4, 0.2, 0.2)])
    def test_matches_brute_force(self, alpha, p_s, p_1, p_2):
        spec = build_modulo_additive(p_s, p_1, p_2)
        d = round1_joint(spec, modadd_scheme(spec, alpha))
        # axes: s t u v x1 x2 y z
        brute = cmi(d, (3,), (6,)) - cmi(d, (3,), (7,))
        assert modadd_lb_closed_form(alpha, p_s, p_1, p_2).raw_rate == pytest.approx(brute, abs=1e-12)


class TestCommonKeyLowerBound:
    def test_modadd_value(self):
        spec = build_modulo_additive(0.0, 0.1, 0.3)
        point = common_key_lb_objective(spec, modadd_scheme(spec, 0.5))
        assert point.r0 == pytest.approx(MODADD_GAP, abs=1e-12)

    def test_printed_vs_flipped_constraints(self):
        spec = build_modulo_additive(0.0, 0.1, 0.3)
        aux = modadd_scheme(spec, 0.5)
        # V is independent of S here, so only the flipped direction holds
        assert not common_key_lb_objective(spec, aux).feasible
        assert common_key_lb_objective(spec, aux, proof_consistent=True).feasible

    def test_link_constraint(self):
        spec = build_modulo_additive(0.0, 0.1, 0.3)
        point = common_key_lb_objective(spec, modadd_scheme(spec, 0.5), r_c=0.5, proof_consistent=True)
        link = [c for c in point.constraints if "R_C" in c.name][0]
        assert not link.satisfied and link.lhs == pytest.approx(1.0)

    def test_single_satellite_gives_zero(self):
        spec = random_sdmac(np.random.default_rng(0))
        aux = random_aux_scheme(spec, np.random.default_rng(1), 2, 1)
        assert common_key_lb_objective(spec, aux).r0 == 0.0

    def test_clamp_keeps_raw(self):
        spec = build_stuck_at(0.3, "reads_memory")
        point = common_key_lb_objective(spec, state_copy_scheme(spec))
        assert point.r0 == 0.0 and point.raw["r0"] <= 1e-12

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_objective_matches_loop_oracle(self, seed):
        rng = np.random.default_rng(seed)
        spec = random_sdmac(rng, {T: 2})
        aux = random_aux_scheme(spec, rng, 2, 3)
        d = round1_joint(spec, aux)
        expect = cmi(d, (3,), (6, 1), (2,)) - cmi(d, (3,), (7,), (2,))
        assert common_key_lb_objective(spec, aux).raw["r0"] == pytest.approx(expect, abs=1e-10)


class TestUpperBound:
    def test_eavesdropper_sees_output(self):
        spec = build_stuck_at(0.3, "reads_memory")
        law = np.full((3, 2, 1), 0.5)
        assert upper_bound_value(spec, law) == pytest.approx(0.0, abs=1e-12)

    def test_stuck_at_blind_eve(self):
        spec = build_stuck_at(0.3)
        # I(X,S;Y) = H(Y) = 1 for uniform X
        assert upper_bound_value(spec, np.full((3, 2, 1), 0.5)) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_dominates_scheme_value(self, seed):
        rng = np.random.default_rng(seed)
        spec = random_sdmac(rng)
        aux = random_aux_scheme(spec, rng, 2, 3)
        lb = common_key_lb_objective(spec, aux).raw["r0"]
        assert lb <= upper_bound_value(spec, induced_input_law(aux)) + 1e-9


class TestDegraded:
    def test_identity_on_cascade(self):
        rng = np.random.default_rng(3)
        spec = random_sdmac(rng, cascade=True)
        aux = random_aux_scheme(spec, rng, 2, 3)
        point = degraded_common_key_capacity(spec, aux)
        assert point.r0 == pytest.approx(point.raw["lower_bound_raw"], abs=1e-10)

    def test_modadd_cascade_value(self):
        spec = build_modulo_additive(0.0, 0.1, 0.3, cascade=True)
        point = degraded_common_key_capacity(spec, modadd_scheme(spec, 0.5))
        assert point.r0 == pytest.approx(MODADD_GAP, abs=1e-12)

    def test_rejects_non_degraded(self):
        spec = build_modulo_additive(0.2, 0.1, 0.3)
        with pytest.raises(MarkovChainError, match="I\\(U,V;Z\\|Y\\) = "):
            degraded_common_key_capacity(spec, modadd_scheme(spec, 0.5))


class TestPrivateKeys:
    def test_parallel_values(self):
        spec = build_parallel(0.3, 0.05, 0.07, 0.1, "x2")
        scheme = parallel_scheme(spec, 0.1)
        own1 = 1 - hb(binary_convolution(0.05, 0.1))
        point = corollary2_point(spec, scheme)
        assert point.r1 == pytest.approx(own1, abs=1e-12)
        assert private_key_inner_point(spec, scheme).r1 == pytest.approx(own1, abs=1e-12)
        assert private_key_outer_point(spec, scheme).r1 == pytest.approx(own1, abs=1e-12)

    def test_eve_reading_x2_limits_user2(self):
        spec = build_parallel(0.3, 0.05, 0.07, 0.1, "x2")
        scheme = parallel_scheme(spec, 0.1)
        inner, outer = private_key_inner_point(spec, scheme), private_key_outer_point(spec, scheme)
        assert inner.r2 < inner.raw["own2"]
        assert inner.r2 <= outer.r2 + 1e-12

    def test_chain_case_rejects_state_dependent_inputs(self):
        spec = build_parallel(0.3, 0.05, 0.07, 0.1)
        law = np.zeros((2, 2, 2))
        law[0, 0, :] = 0.5
        law[1, 1, :] = 0.5  # x1 copies the state
        with pytest.raises(MarkovChainError):
            corollary2_point(spec, parallel_scheme(spec, 0.1, law))

    def test_inner_terms_match_loop_oracle(self):
        rng = np.random.default_rng(7)
        spec = random_sdmac(rng, {T: 2})
        scheme = random_round2_scheme(spec, rng, 2, 2)
        d = round2_joint(spec, scheme)
        # axes: s t x1 x2 y z t1 t2
        own = cmi(d, (6,), (2, 0), (1,))
        r1 = min(own - cmi(d, (6,), (3, 0), (1,)), own - cmi(d, (6,), (5,)))
        assert private_key_inner_point(spec, scheme).raw["r1"] == pytest.approx(r1, abs=1e-12)
        outer = min(cmi(d, (6,), (2, 0), (5,)), cmi(d, (6,), (2,), (3, 0)))
        assert private_key_outer_point(spec, scheme).r1 == pytest.approx(outer, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_inner_below_outer_without_receiver_state(self, seed):
        rng = np.random.default_rng(seed)
        spec = random_sdmac(rng)
        scheme = random_round2_scheme(spec, rng)
        inner, outer = private_key_inner_point(spec, scheme), private_key_outer_point(spec, scheme)
        assert inner.r1 <= outer.r1 + 1e-9 and inner.r2 <= outer.r2 + 1e-9
