from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdmac_keys.channels import (
    S, T, U, V, X1, X2, Y, Z, T1, T2,
    AuxiliaryScheme,
    Round2Scheme,
    SdMacSpec,
    build_modulo_additive,
    build_parallel,
    build_stuck_at,
    check_full_joint,
    full_joint_round1,
    full_joint_round2,
    modadd_scheme,
    parallel_scheme,
    random_aux_scheme,
    random_round2_scheme,
    random_sdmac,
    state_copy_scheme,
)
from sdmac_keys.probability import (
    binary_convolution,
    binary_entropy,
    conditional_mutual_information as cmi,
    entropy,
    is_markov_chain,
    marginalize,
)

from oracles import round1_joint, round2_joint


def uniform_inputs(spec, k1=None, k2=None):
    """Round-2 scheme with independent uniform inputs and trivial T_i unless given."""
    ns, nx1, nx2 = spec.size(S), spec.size(X1), spec.size(X2)
    yt = (spec.size(Y), spec.size(T))
    law = np.full((ns, nx1, nx2), 1.0 / (nx1 * nx2))
    k1 = np.ones(yt + (1,)) if k1 is None else k1
    k2 = np.ones(yt + (1,)) if k2 is None else k2
    return Round2Scheme.from_arrays(spec, law, k1, k2)


class TestStuckAt:
    def test_all_stuck_output_ignores_input(self):
        j = full_joint_round2(build_stuck_at(1.0), *[uniform_inputs(build_stuck_at(1.0))])
        assert cmi(j, X1, Y) == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(marginalize(j, Y).table, [0.5, 0.5])

    def test_no_faults_is_noiseless(self):
        spec = build_stuck_at(0.0)
        j = full_joint_round2(spec, uniform_inputs(spec))
        assert cmi(j, X1, Y) == pytest.approx(1.0, abs=1e-15)

    def test_input_output_information(self):
        spec = build_stuck_at(0.3)
        j = full_joint_round2(spec, uniform_inputs(spec))
        # with the fault pattern known: H(Y|S) = 0.7 and H(Y|X,S) = 0
        assert cmi(j, X1, Y, S) == pytest.approx(0.7, abs=1e-12)
        # without it each written bit flips with probability p/2
        assert cmi(j, X1, Y) == pytest.approx(1 - binary_entropy(0.15), abs=1e-12)

    def test_eve_modes(self):
        assert build_stuck_at(0.3).size(Z) == 1
        spec = build_stuck_at(0.3, "reads_memory")
        j = full_joint_round2(spec, uniform_inputs(spec))
        assert cmi(j, Y, Z) == pytest.approx(entropy(j, Y), abs=1e-12)
        with pytest.raises(ValueError):
            build_stuck_at(0.3, "bogus")
        with pytest.raises(ValueError):
            build_stuck_at(1.3)


class TestModuloAdditive:
    def test_noiseless(self):
        spec = build_modulo_additive(0.0, 0.0, 0.0)
        for x1, x2 in np.ndindex(2, 2):
            assert spec.w[x1, x2, 0, x1 ^ x2, x1 ^ x2] == 1.0

    def test_equal_noise_conditionally_iid(self):
        spec = build_modulo_additive(0.3, 0.2, 0.2)
        j = full_joint_round2(spec, uniform_inputs(spec))
        assert cmi(j, Y, Z, [X1, X2, S]) == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(spec.w.sum(axis=4), spec.w.sum(axis=3), atol=1e-15)

    def test_flip_rate_through_state(self):
        spec = build_modulo_additive(0.2, 0.1, 0.3)
        j = full_joint_round2(spec, uniform_inputs(spec))
        t = marginalize(j, (X1, X2, Y)).table
        p_flip = sum(t[a, b, 1 - (a ^ b)] for a, b in np.ndindex(2, 2))
        assert p_flip == pytest.approx(binary_convolution(0.2, 0.1), abs=1e-12)
        assert p_flip == pytest.approx(0.26, abs=1e-12)

    def test_flip_pattern_given_sum(self):
        p_1 = 0.15
        spec = build_modulo_additive(0.4, p_1, 0.3)
        for x1, x2, s in np.ndindex(2, 2, 2):
            b = x1 ^ x2 ^ s
            assert spec.w[x1, x2, s, 1, :].sum() == pytest.approx(abs(b - p_1), abs=1e-15)

    def test_cascade_is_degraded(self):
        spec = build_modulo_additive(0.2, 0.1, 0.3, cascade=True)
        j = full_joint_round2(spec, uniform_inputs(spec))
        assert is_markov_chain(j, [X1, X2, S], Y, Z)
        z_noise = sum(spec.w[0, 0, 0, y, 1] for y in range(2))
        assert z_noise == pytest.approx(0.3, abs=1e-12)

    def test_regime_warning(self):
        with pytest.warns(UserWarning):
            build_modulo_additive(0.1, 0.3, 0.1)
        with pytest.raises(ValueError):
            build_modulo_additive(0.1, 1.1, 0.1)


class TestRound1Joint:
    def test_trivial_auxiliaries(self):
        spec = build_modulo_additive(0.2, 0.1, 0.3)
        rng = np.random.default_rng(0)
        x1 = rng.dirichlet(np.ones(2), size=(1, 1, 2))
        x2 = rng.dirichlet(np.ones(2), size=(1, 1, 2))
        aux = AuxiliaryScheme.from_arrays(spec, np.ones((2, 1)), np.ones((1, 2, 1)), x1, x2)
        j = full_joint_round1(spec, aux)
        expect = np.einsum("s,sa,sb,absyz->syz", spec.p_s, x1[0, 0], x2[0, 0], spec.w)
        np.testing.assert_allclose(marginalize(j, (S, Y, Z)).table, expect, atol=1e-15)

    @pytest.mark.parametrize("alpha", [0.0, 0.2, 0.5, 0.9])
    def test_modadd_scheme_output_law(self, alpha):
        p_s, p_1 = 0.3, 0.1
        spec = build_modulo_additive(p_s, p_1, 0.3)
        j = full_joint_round1(spec, modadd_scheme(spec, alpha))
        p_y1 = binary_convolution(binary_convolution(alpha, p_s), p_1)
        assert marginalize(j, Y).table[1] == pytest.approx(p_y1, abs=1e-12)

    def test_identity_state_view(self):
        spec = SdMacSpec.from_arrays([0.3, 0.7], np.eye(2), build_modulo_additive(0.7, 0.1, 0.2).w)
        j = full_joint_round1(spec, state_copy_scheme(spec))
        assert cmi(j, S, T) == pytest.approx(entropy(j, S), abs=1e-12)

    def test_invariants_for_builders(self):
        rng = np.random.default_rng(1)
        specs = [build_stuck_at(0.3), build_modulo_additive(0.2, 0.1, 0.3), build_parallel(0.3, 0.1, 0.2, 0.1),
                 random_sdmac(rng, {S: 3, T: 2})]
        for spec in specs:
            j = full_joint_round1(spec, random_aux_scheme(spec, rng, 2, 3))
            check_full_joint(j, spec)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(2)
        spec = random_sdmac(rng, {S: 3, T: 2})
        aux = random_aux_scheme(spec, rng, 2, 2, deterministic_inputs=False)
        j = full_joint_round1(spec, aux)
        d = round1_joint(spec, aux)
        assert sum(d.values()) == pytest.approx(1.0, abs=1e-12)
        for key, p in d.items():
            assert j.table[key] == pytest.approx(p, abs=1e-15)
        assert j.names == (S, T, U, V, X1, X2, Y, Z)

    def test_protocol_needs_deterministic_maps(self):
        spec = build_modulo_additive(0.2, 0.1, 0.3)
        aux = random_aux_scheme(spec, np.random.default_rng(3), deterministic_inputs=False)
        with pytest.raises(ValueError, match="deterministic"):
            aux.x_maps()


class TestRound2Joint:
    def test_kernels_ignoring_output(self):
        spec = build_modulo_additive(0.2, 0.1, 0.3)
        k = np.tile([0.3, 0.7], (2, 1, 1))
        j = full_joint_round2(spec, uniform_inputs(spec, k, k))
        assert cmi(j, T1, Y, T) == pytest.approx(0.0, abs=1e-15)

    def test_copy_of_output(self):
        spec = build_modulo_additive(0.2, 0.1, 0.3)
        k = np.eye(2)[:, None, :]
        j = full_joint_round2(spec, uniform_inputs(spec, k, k))
        assert cmi(j, T1, Y) == pytest.approx(entropy(j, Y), abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_conditionally_independent_keys(self, seed):
        rng = np.random.default_rng(seed)
        spec = random_sdmac(rng, {T: 2})
        scheme = random_round2_scheme(spec, rng)
        j = full_joint_round2(spec, scheme)
        check_full_joint(j, spec)
        assert cmi(j, T1, T2, [Y, T]) <= 1e-10

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(4)
        spec = random_sdmac(rng, {T: 2, Y: 3})
        scheme = random_round2_scheme(spec, rng, 3, 2)
        j = full_joint_round2(spec, scheme)
        for key, p in round2_joint(spec, scheme).items():
            assert j.table[key] == pytest.approx(p, abs=1e-15)

    def test_parallel_scheme_components(self):
        spec = build_parallel(0.5, 0.0, 0.0, 0.1)
        j = full_joint_round2(spec, parallel_scheme(spec, 0.0))
        assert cmi(j, T1, [X1, S]) == pytest.approx(1.0, abs=1e-12)
        assert cmi(j, T1, [X2, S]) == pytest.approx(0.0, abs=1e-12)


class TestRelabeling:
    def test_measures_invariant_under_state_relabeling(self):
        rng = np.random.default_rng(5)
        spec = random_sdmac(rng, {S: 3})
        aux = random_aux_scheme(spec, rng, 2, 2)
        perm = np.array([2, 0, 1])
        w = spec.w[:, :, perm]
        spec2 = SdMacSpec.from_arrays(spec.p_s[perm], spec.p_t_given_s[perm], w)
        aux2 = AuxiliaryScheme.from_arrays(
            spec2, aux.u_kernel.table[perm], aux.v_kernel.table[:, perm],
            aux.x1_kernel.table[:, :, perm], aux.x2_kernel.table[:, :, perm])
        j1, j2 = full_joint_round1(spec, aux), full_joint_round1(spec2, aux2)
        for a, b, c in [(V, [Y, T], U), (V, Z, U), (U, S, ()), ([U, V], S, ())]:
            assert cmi(j1, a, b, c) == pytest.approx(cmi(j2, a, b, c), abs=1e-12)
