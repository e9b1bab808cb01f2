import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetcov import cli
from hetcov.model import CLOSED, FadingDistribution, HetNetScenario, TierConfig
from conftest import EXP1, within

HERE = os.path.dirname(os.path.abspath(__file__))
SCEN = os.path.join(os.path.dirname(HERE), "scenarios")


def tier(density=1, power=1, eps=4, threshold_db=0.0, bias_db=0.0, fading=None):
    return {
        "density": density,
        "power": power,
        "pathloss_exp": eps,
        "fading": fading or {"kind": "exponential", "params": {"mean": 1}},
        "threshold_db": threshold_db,
        "bias_db": bias_db,
    }


def doc(open_tiers, closed_tiers=(), noise=0.0, unit="per_km2"):
    return {"density_unit": unit, "noise": noise, "open_tiers": list(open_tiers), "closed_tiers": list(closed_tiers)}


def write(tmp_path, d, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def run(argv):
    buf = io.StringIO()
    code = cli.main(argv, out=buf)
    return code, buf.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


# ----------------------------------------------------------------- scenario files

def test_shipped_scenarios_parse():
    sc = cli.load_scenario(os.path.join(SCEN, "two_tier.json"))
    assert sc.K == 2 and sc.L == 0
    assert sc.open_tiers[0].sinr_threshold == pytest.approx(2.0, rel=1e-5)
    mixed = cli.load_scenario(os.path.join(SCEN, "mixed_closed.json"))
    assert mixed.L == 1 and mixed.closed_tiers[0].access == CLOSED
    assert mixed.open_tiers[1].bias == pytest.approx(10 ** 0.3)


def test_density_units():
    a = cli.parse_document(doc([tier(density=2.0)]))
    b = cli.parse_document(doc([tier(density=2e-6)], unit="per_m2"))
    assert a.open_tiers[0].density == pytest.approx(b.open_tiers[0].density, rel=1e-12)


@pytest.mark.parametrize("name", ["two_tier.json", "mixed_closed.json"])
def test_round_trip_files(name):
    sc = cli.load_scenario(os.path.join(SCEN, name))
    again = cli.parse_document(json.loads(json.dumps(cli.scenario_to_document(sc))))
    assert again == sc


@settings(max_examples=60, deadline=None)
@given(
    beta=st.floats(1e-3, 1e3),
    bias=st.floats(1e-3, 1e3),
    density=st.floats(1e-3, 1e3),
    sigma=st.floats(0.0, 12.0),
    noise=st.floats(0.0, 10.0),
)
def test_round_trip_property(beta, bias, density, sigma, noise):
    sc = HetNetScenario(
        (
            TierConfig(density, 2.0, 3.3, FadingDistribution.lognormal_db(sigma), beta, bias),
            TierConfig(1.0, 1.0, 4.0, EXP1, 1.0, 1.0),
        ),
        (TierConfig(density, 0.5, 2.5, FadingDistribution.constant(1.5), access=CLOSED),),
        noise,
    )
    again = cli.parse_document(json.loads(json.dumps(cli.scenario_to_document(sc))))
    # dB -> linear is not onto the doubles, so thresholds and biases may move by a few ulps
    for a, b in zip(again.all_tiers(), sc.all_tiers()):
        assert a.replace(sinr_threshold=b.sinr_threshold, bias=b.bias) == b
        assert a.sinr_threshold == pytest.approx(b.sinr_threshold, rel=1e-14, abs=0)
        assert a.bias == pytest.approx(b.bias, rel=1e-14, abs=0)
    assert again.noise == sc.noise


@pytest.mark.parametrize(
    "mutate, key",
    [
        (lambda d: d["open_tiers"][0].update(colour=1), "open_tiers[0].colour"),
        (lambda d: d.update(extra=True), "extra"),
        (lambda d: d.pop("density_unit"), "density_unit"),
        (lambda d: d.update(density_unit="per_acre"), "density_unit"),
        (lambda d: d["open_tiers"][0].update(pathloss_exp=2.0), None),
        (lambda d: d["open_tiers"][0]["fading"].update(kind="rician"), "open_tiers[0].fading.kind"),
        (lambda d: d["open_tiers"][0].update(density="many"), "open_tiers[0].density"),
        (lambda d: d.update(closed_tiers=[tier()]), "closed_tiers[0].threshold_db"),
        (lambda d: d.update(open_tiers=[]), None),
    ],
)
def test_bad_scenarios_exit_2(tmp_path, capsys, mutate, key):
    d = doc([tier()])
    mutate(d)
    code, out = run(["coverage", write(tmp_path, d)])
    assert code == 2 and out == ""
    err = error_of(capsys)
    assert err["exit"] == 2 and err["error"] == "input" and err["message"]
    if key is not None:
        assert err["key"] == key


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(["coverage", str(p)])[0] == 2
    assert error_of(capsys)["key"] == "json"


def test_missing_file(tmp_path, capsys):
    assert run(["coverage", str(tmp_path / "absent.json")])[0] == 2


@pytest.mark.parametrize(
    "extra",
    [["--model", "best"], ["--trials", "0"], ["--tolerance", "0.5"], ["--engine", "magic"], ["--bogus"]],
)
def test_bad_arguments_exit_2(tmp_path, capsys, extra):
    assert run(["coverage", write(tmp_path, doc([tier()]))] + extra)[0] == 2
    assert error_of(capsys)["exit"] == 2


def test_set_path():
    d = doc([tier(), tier()])
    new = cli.set_path(d, "open_tiers[1].threshold_db", 7.5)
    assert new["open_tiers"][1]["threshold_db"] == 7.5 and d["open_tiers"][1]["threshold_db"] == 0.0
    assert cli.set_path(d, "noise", 0.5)["noise"] == 0.5
    with pytest.raises(cli.InputError):
        cli.set_path(d, "open_tiers[5].power", 1.0)


# ----------------------------------------------------------------- engines

def test_engine_defaults():
    sc = cli.load_scenario(os.path.join(SCEN, "mixed_closed.json"))
    pick = {n: cli.resolve_engines("auto", sc, cli.build_model(n, sc))[0] for n in cli.MODEL_NAMES}
    # all thresholds >= 1 keeps max-SINR analytic; log-normal fading rules out the MBRP formula
    assert pick == {"maxsinr": "analytic", "nearest": "montecarlo", "mirp": "analytic", "mbrp": "montecarlo"}
    het = cli.parse_document(doc([tier(threshold_db=-3), tier(threshold_db=2)]))
    assert cli.resolve_engines("auto", het, cli.build_model("maxsinr", het)) == ["montecarlo"]
    single = cli.parse_document(doc([tier()]))
    assert all(cli.resolve_engines("auto", single, cli.build_model(n, single)) == ["analytic"] for n in cli.MODEL_NAMES)


def test_coverage_rows_and_classical_value(tmp_path):
    code, out = run(["coverage", write(tmp_path, doc([tier()])), "--model", "maxsinr,nearest"])
    assert code == 0
    r = rows(out)
    assert r[0] == ["model", "engine", "probability", "stderr", "trials", "tier1_serving", "conditional_rate_bits"]
    assert [x[:2] for x in r[1:]] == [["maxsinr", "analytic"], ["nearest", "analytic"]]
    assert float(r[1][2]) == pytest.approx(2 / math.pi, abs=1e-6)
    assert float(r[2][2]) == pytest.approx(1 / (1 + math.pi / 4), abs=1e-6)
    assert out.endswith("\r\n")


def test_engine_both_agree(tmp_path):
    path = os.path.join(SCEN, "two_tier.json")
    code, out = run(["coverage", path, "--model", "mirp", "--engine", "both", "--trials", "20000", "--seed", "3"])
    assert code == 0
    a, m = rows(out)[1:]
    assert (a[1], m[1]) == ("analytic", "montecarlo")
    assert within(float(a[2]), float(m[2]), 4, float(a[3]), float(m[3]))
    assert int(m[4]) == 20000 and m[-1] != ""


def test_analytic_unavailable_is_input_error(tmp_path, capsys):
    assert run(["coverage", os.path.join(SCEN, "mixed_closed.json"), "--model", "mbrp", "--engine", "analytic"])[0] == 2


def test_out_file_and_determinism(tmp_path):
    path = os.path.join(SCEN, "mixed_closed.json")
    outs = []
    for name in ("a.csv", "b.csv"):
        target = tmp_path / name
        code, stdout = run(["coverage", path, "--model", "nearest", "--trials", "3000", "--seed", "5", "--out", str(target)])
        assert code == 0 and stdout == ""
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    _, other = run(["coverage", path, "--model", "nearest", "--trials", "3000", "--seed", "6"])
    assert other.encode() != outs[0]


def test_failed_run_leaves_no_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    bad = write(tmp_path, doc([tier(threshold_db="x")]))
    assert run(["coverage", bad, "--out", str(target)])[0] == 2
    assert not target.exists()
    assert [p.name for p in tmp_path.iterdir()] == ["s.json"]


# ----------------------------------------------------------------- sweep

def test_sweep_two_steps(tmp_path):
    code, out = run(["sweep", os.path.join(SCEN, "two_tier.json"), "--parameter", "noise",
                     "--from", "0", "--to", "0.5", "--steps", "2", "--jobs", "1"])
    assert code == 0
    r = rows(out)
    assert r[0][:2] == ["parameter", "value"] and len(r) == 3
    assert [x[1] for x in r[1:]] == ["0.0", "0.5"]
    assert float(r[2][4]) < float(r[1][4])


def test_sweep_steps_must_be_two(tmp_path, capsys):
    code, _ = run(["sweep", os.path.join(SCEN, "two_tier.json"), "--parameter", "noise",
                   "--from", "0", "--to", "1", "--steps", "1"])
    assert code == 2 and error_of(capsys)["key"] == "sweep.steps"


def test_sweep_threshold_monotone_and_parallel_identical(tmp_path):
    argv = ["sweep", os.path.join(SCEN, "two_tier.json"), "--parameter", "open_tiers[0].threshold_db",
            "--from", "-5", "--to", "10", "--steps", "3", "--model", "mirp", "--omega-max", "500"]
    code, serial = run(argv + ["--jobs", "1"])
    assert code == 0
    p = [float(x[4]) for x in rows(serial)[1:]]
    assert all(a > b for a, b in zip(p, p[1:]))
    _, parallel = run(argv + ["--jobs", "2"])
    assert parallel == serial


def test_sweep_power_invariance(tmp_path):
    # noiseless, common exponent: scaling one tier's power does not change coverage
    d = doc([tier(power=25, eps=3, threshold_db=3), tier(density=5, eps=3, threshold_db=3)])
    code, out = run(["sweep", write(tmp_path, d), "--parameter", "open_tiers[0].power",
                     "--from", "1", "--to", "100", "--steps", "3", "--model", "mirp", "--jobs", "1"])
    p = [float(x[4]) for x in rows(out)[1:]]
    assert code == 0 and max(p) - min(p) < 1e-9


def test_sweep_svg(tmp_path):
    svg = tmp_path / "plot.svg"
    code, _ = run(["sweep", os.path.join(SCEN, "two_tier.json"), "--parameter", "noise", "--from", "0",
                   "--to", "1", "--steps", "2", "--jobs", "1", "--svg", str(svg), "--omega-max", "500"])
    text = svg.read_text()
    assert code == 0 and text.startswith("<svg") and "polyline" in text and "mirp" in text


# ----------------------------------------------------------------- compare

def verdicts(out):
    return {r[1]: r[6] for r in rows(out) if r[0] == "check"}


def test_compare_single_tier_all_pass(tmp_path):
    code, out = run(["compare", write(tmp_path, doc([tier()])), "--trials", "20000"])
    assert code == 0
    v = verdicts(out)
    assert v == {"maxsinr>=nearest": "PASS", "maxsinr==mirp": "PASS", "nearest==mbrp_avg": "PASS"}
    models = {r[1]: r for r in rows(out) if r[0] == "model"}
    assert float(models["nearest"][2]) == pytest.approx(1 / (1 + math.pi / 4), abs=1e-6)


def test_compare_closed_tier_check(tmp_path):
    code, out = run(["compare", os.path.join(SCEN, "mixed_closed.json"), "--trials", "4000"])
    v = verdicts(out)
    assert code == 0
    assert v["maxsinr>=nearest"] == "PASS" and v["open_access>=closed_access"] == "PASS"
    assert v["maxsinr==mirp"] == "PASS"


# ----------------------------------------------------------------- console script

def test_module_entry_point_error_json(tmp_path):
    bad = write(tmp_path, {"density_unit": "per_km2"})
    proc = subprocess.run([sys.executable, "-m", "hetcov", "coverage", bad], capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stdout == ""
    err = json.loads(proc.stderr.strip())
    assert set(err) == {"error", "exit", "key", "message"}
