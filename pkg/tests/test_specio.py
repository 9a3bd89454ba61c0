from __future__ import annotations

import numpy as np
import pytest

from sdmac_keys.channels import S, Y, Round2Scheme, SdMacSpec, build_modulo_additive, build_parallel, build_stuck_at, full_joint_round2
from sdmac_keys.probability import marginalize
from sdmac_keys.specio import SpecFormatError, format_spec, load_spec, parse_spec, save_spec

HAND_WRITTEN = """
[meta]
format = 1
name = two-state

[alphabets]
S = calm, rough
T = -
X1 = 0, 1
X2 = -
Y = 0, 1
Z = -

[state_pmf]
p = 0.25, 0.75

[degrade_kernel]
calm = 1
rough = 1

[channel_kernel]
# y equals x1 xor s with probability 0.9
0,-,calm  = 0.9, 0.1
0,-,rough = 0.1, 0.9
1,-,calm  = 0.1, 0.9
1,-,rough = 0.9, 0.1
"""


def same_tables(a, b):
    return (np.array_equal(a.p_s, b.p_s) and np.array_equal(a.p_t_given_s, b.p_t_given_s)
            and np.array_equal(a.w, b.w) and a.alphabets == b.alphabets and a.name == b.name)


class TestRoundTrip:
    @pytest.mark.parametrize("spec", [
        build_modulo_additive(0.2, 0.1, 0.3),
        build_stuck_at(0.3, "reads_memory"),
        build_parallel(0.3, 0.05, 0.07, 0.1, "x2"),
    ], ids=["modadd", "stuck", "parallel"])
    def test_save_load_is_exact(self, spec, tmp_path):
        path = tmp_path / "spec.ini"
        save_spec(spec, path)
        assert same_tables(load_spec(path), spec)

    def test_random_values_survive_text(self):
        rng = np.random.default_rng(0)
        w = rng.dirichlet(np.ones(6), size=(2, 2, 3)).reshape(2, 2, 3, 3, 2)
        spec = SdMacSpec.from_arrays(rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(2), 3), w)
        assert same_tables(parse_spec(format_spec(spec)), spec)


class TestValidation:
    def test_row_sum_error_names_the_row(self):
        bad = HAND_WRITTEN.replace("1,-,calm  = 0.1, 0.9", "1,-,calm  = 0.1, 0.8")
        with pytest.raises(SpecFormatError, match=r"channel_kernel\] 1,-,calm: row sums to 0\.9"):
            parse_spec(bad, "hand.ini")

    def test_error_carries_line_number(self):
        bad = HAND_WRITTEN.replace("p = 0.25, 0.75", "p = 0.25, 0.65")
        with pytest.raises(SpecFormatError, match=r"hand\.ini:\d+: \[state_pmf\] p"):
            parse_spec(bad, "hand.ini")

    def test_missing_row(self):
        bad = HAND_WRITTEN.replace("1,-,rough = 0.9, 0.1\n", "")
        with pytest.raises(SpecFormatError, match="missing rows"):
            parse_spec(bad)

    def test_alphabet_mismatch(self):
        bad = HAND_WRITTEN.replace("0,-,calm  = 0.9, 0.1", "0,-,calm  = 0.9, 0.05, 0.05")
        with pytest.raises(SpecFormatError, match="row has 3 entries"):
            parse_spec(bad)

    def test_unknown_symbol_and_version(self):
        with pytest.raises(SpecFormatError, match="symbol tuple"):
            parse_spec(HAND_WRITTEN.replace("0,-,calm ", "0,-,storm "))
        with pytest.raises(SpecFormatError, match="unsupported format"):
            parse_spec(HAND_WRITTEN.replace("format = 1", "format = 2"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SpecFormatError, match="cannot read"):
            load_spec(tmp_path / "absent.ini")


class TestHandWritten:
    def test_output_marginal(self):
        spec = parse_spec(HAND_WRITTEN)
        assert spec.alphabets[S].symbols == ("calm", "rough")
        law = np.zeros((2, 2, 1))
        law[:, 0, 0] = 1.0  # always write 0
        scheme = Round2Scheme.from_arrays(spec, law, np.ones((2, 1, 1)), np.ones((2, 1, 1)))
        p_y = marginalize(full_joint_round2(spec, scheme), Y).table
        # 0.25 * 0.1 + 0.75 * 0.9
        assert p_y[1] == pytest.approx(0.7, abs=1e-15)
