from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from sdmac_keys.channels import build_modulo_additive
from sdmac_keys.cli import BUILDERS, ExperimentConfig, NamedSpec, UsageError, main, run
from sdmac_keys.probability import binary_entropy as hb
from sdmac_keys.specio import load_spec

MODADD = "modadd:p_s=0,p_1=0.1,p_2=0.3"


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def value(text, metric, axis_value="-"):
    return float(next(r["estimate"] for r in rows(text) if r["metric"] == metric and r["value"] == axis_value))


class TestOutput:
    def test_common_lb_row(self, capsys):
        code, out, err = invoke(capsys, "bounds", "common-lb", "--builder", MODADD, "--scheme", "modadd:alpha=0.5")
        assert code == 0 and "wall time" in err
        # 12 significant digits in the CSV
        assert value(out, "r0") == pytest.approx(hb(0.3) - hb(0.1), abs=1e-12)
        assert value(out, "feasible") == 0.0

    def test_header_echo(self, capsys):
        _, out, _ = invoke(capsys, "bounds", "closed-form-stuck", "--builder", "stuck_at:p=0.3", "--seed", "4")
        first = out.splitlines()[0]
        assert first.startswith("# sdmac-keys ")
        echo = json.loads(first.split(" ", 3)[3])
        assert echo["seed"] == 4 and echo["task"] == "closed-form-stuck"
        assert out.splitlines()[1] == "axis,value,metric,kind,estimate,lo,hi"
        assert value(out, "r0") == 0.3

    def test_sim_reports_intervals(self, capsys):
        code, out, _ = invoke(capsys, "sim", "round1", "--builder", MODADD, "--scheme", "modadd:alpha=0.5",
                              "--trials", "50", "--batch", "25", "--eps", "0.25", "--exact")
        assert code == 0
        r = next(r for r in rows(out) if r["metric"] == "p_err")
        assert r["kind"] == "estimated" and float(r["lo"]) <= float(r["estimate"]) <= float(r["hi"])
        assert any(r["metric"].startswith("exact_") for r in rows(out))

    def test_sim_round2(self, capsys):
        code, out, _ = invoke(capsys, "sim", "round2", "--builder", "parallel:p_s=0.3,p_1=0.05,p_2=0.05,p_e=0.1",
                              "--scheme", "parallel:q=0.1", "--trials", "20", "--n", "4",
                              "--rate-t", "0.5", "--rate-bins", "0.25", "--rate-subbins", "0.25")
        assert code == 0 and 0.0 <= value(out, "agree_both") <= 1.0


class TestExitCodes:
    def test_zero_trials(self, capsys):
        code, _, err = invoke(capsys, "sim", "round1", "--builder", MODADD, "--scheme", "modadd:alpha=0.5", "--trials", "0")
        assert code == 1 and "trials" in err

    def test_budget(self, capsys):
        code, _, err = invoke(capsys, "sim", "round1", "--builder", MODADD, "--scheme", "modadd:alpha=0.5",
                              "--n", "40", "--exact", "--trials", "1", "--rate-v-total", "0.1", "--rate-v-bins", "0.05")
        assert code == 2 and "budget" in err

    @pytest.mark.parametrize("argv", [
        ["bounds", "common-lb", "--builder", "nosuch:p=1"],
        ["bounds", "common-lb", "--builder", "stuck_at:q=1"],
        ["bounds", "common-lb"],
        ["bounds", "private-outer", "--builder", "parallel:p_s=0.3,p_1=0.1,p_2=0.1,p_e=0.1"],
        ["sweep", "--task", "common-lb", "--builder", "stuck_at:p=0.1", "--axis", "nothing", "--values", "1"],
        ["bounds", "nosuch-task"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, err = invoke(capsys, *argv)
        assert code == 1 and err.startswith("error:")

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "sdmac_keys", "bounds", "closed-form-modadd",
                               "--builder", MODADD, "--scheme", "modadd:alpha=0.5"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert value(proc.stdout, "r0") == pytest.approx(hb(0.3) - hb(0.1), abs=1e-12)


class TestDeterminism:
    def test_sweep_independent_of_jobs(self, capsys):
        argv = ["sweep", "--task", "common-ub", "--builder", "random:seed=3", "--axis", "restarts",
                "--values", "1,2,3", "--iterations", "5", "--seed", "9"]
        _, one, _ = invoke(capsys, *argv, "--jobs", "1")
        _, three, _ = invoke(capsys, *argv, "--jobs", "3")
        assert one == three

    def test_sim_sweep_points_get_distinct_seeds(self):
        cfg = ExperimentConfig(task="sim-round1", builder=NamedSpec.parse(MODADD, BUILDERS, "builder"),
                               scheme=NamedSpec("modadd", (("alpha", 0.5),)), params={"trials": 10, "eps": 0.25},
                               axis="n", values=("4", "4"))
        a, b = cfg.at(4, 0), cfg.at(4, 1)
        assert a.seed != b.seed

    def test_builder_axis(self, capsys):
        _, out, _ = invoke(capsys, "sweep", "--task", "closed-form-stuck", "--builder", "stuck_at:p=0.1",
                           "--axis", "p", "--values", "0.1,0.5")
        assert value(out, "r0", "0.1") == 0.1 and value(out, "r0", "0.5") == 0.5


class TestFiles:
    def test_channel_make_and_validate(self, capsys, tmp_path):
        path = tmp_path / "ch.ini"
        assert invoke(capsys, "channel", "make", "--builder", "modadd:p_s=0.2,p_1=0.1,p_2=0.3", "--out", str(path))[0] == 0
        assert load_spec(path).w.tolist() == build_modulo_additive(0.2, 0.1, 0.3).w.tolist()
        code, out, _ = invoke(capsys, "channel", "validate", str(path))
        assert code == 0 and out.startswith("ok ")

    def test_channel_file_input(self, capsys, tmp_path):
        path = tmp_path / "ch.ini"
        invoke(capsys, "channel", "make", "--builder", MODADD, "--out", str(path))
        _, out, _ = invoke(capsys, "bounds", "common-lb", "--channel", str(path), "--scheme", "modadd:alpha=0.5")
        assert value(out, "r0") == pytest.approx(hb(0.3) - hb(0.1), abs=1e-12)

    def test_ini_config_and_override(self, capsys, tmp_path):
        ini = tmp_path / "exp.ini"
        ini.write_text("[experiment]\ntask = closed-form-stuck\nbuilder = stuck_at:p=0.2\naxis = p\nvalues = 0.2,0.4\n")
        out_path = tmp_path / "out.csv"
        code, out, _ = invoke(capsys, "sweep", "--config", str(ini), "--values", "0.3", "--out", str(out_path))
        assert code == 0 and out == ""
        text = out_path.read_text()
        assert value(text, "r0", "0.3") == 0.3 and len(rows(text)) == 3

    def test_api_run_matches_cli(self, capsys):
        cfg = ExperimentConfig(task="closed-form-stuck", builder=NamedSpec("stuck_at", (("p", 0.25),)))
        _, out, _ = invoke(capsys, "bounds", "closed-form-stuck", "--builder", "stuck_at:p=0.25")
        assert run(cfg).csv == out

    def test_config_rejects_two_sources(self):
        with pytest.raises(UsageError):
            ExperimentConfig(task="common-lb", builder=NamedSpec("stuck_at"), channel="x.ini")
