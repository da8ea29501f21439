import csv
import io
import math
import subprocess
import sys

import pytest

from cislunar_ris import cli
from cislunar_ris.config import default_scenario_text


def run_cli(args, capsys):
    code = cli.run(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def short_scenario(tmp_path):
    path = tmp_path / "short.cfg"
    path.write_text(default_scenario_text().replace("duration = 27.3 d", "duration = 600 s"))
    return path


@pytest.fixture
def single_llo(tmp_path):
    text = default_scenario_text()
    head, _, rest = text.partition("[llo.1]")
    _, _, tail = rest.partition("[moon]")
    path = tmp_path / "single.cfg"
    path.write_text(head + "[moon]" + tail.replace("duration = 27.3 d", "duration = 1 d"))
    return path


def test_timeseries_toy_count(short_scenario, tmp_path, capsys):
    out = tmp_path / "ts.csv"
    code, _, _ = run_cli(["timeseries", "--scenario", str(short_scenario), "--out", str(out)], capsys)
    assert code == 0
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(cli.TIMESERIES_COLUMNS)
    assert len(lines) == 1 + 11
    row = read_csv(out)[0]
    assert row["outage"] == "false" and row["geo_id"] != ""


def test_timeseries_zero_duration(tmp_path, capsys):
    path = tmp_path / "zero.cfg"
    path.write_text(default_scenario_text().replace("duration = 27.3 d", "duration = 0 s"))
    out = tmp_path / "z.csv"
    assert cli.run(["timeseries", "--scenario", str(path), "--out", str(out)]) == 0
    assert len(read_csv(out)) == 1


def test_timeseries_outage_rows(single_llo, tmp_path):
    out = tmp_path / "single.csv"
    assert cli.run(["timeseries", "--scenario", str(single_llo), "--out", str(out)]) == 0
    rows = read_csv(out)
    outages = [r for r in rows if r["outage"] == "true"]
    assert outages
    assert all(r["geo_id"] == "" and r["snr_db"] == "" and r["visible_count"] == "0"
               for r in outages)


def test_number_format(short_scenario, tmp_path):
    out = tmp_path / "ts.csv"
    cli.run(["timeseries", "--scenario", str(short_scenario), "--out", str(out)])
    for row in read_csv(out):
        for key in ("d_er_km", "d_rm_km", "phi_opt_deg", "p_r_w"):
            assert "," not in row[key]
            mantissa = row[key].split("e")[0].replace("-", "").replace(".", "").lstrip("0")
            assert len(mantissa) <= 12


def test_fmt():
    assert cli.fmt(1234567.891234567) == "1234567.89123"
    assert cli.fmt(True) == "true" and cli.fmt(None) == "" and cli.fmt(3) == "3"


def test_snr_elements_fixed_element(capsys):
    code, out, _ = run_cli(["snr-elements", "--area-mode", "fixed-element",
                            "--m-list", "100,1,10", "--out", "-"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["m"]) for r in rows] == [1, 10, 100]
    snr = [float(r["snr_db"]) for r in rows]
    assert snr[1] - snr[0] == pytest.approx(10.0, abs=1e-6)
    assert snr[2] - snr[1] == pytest.approx(10.0, abs=1e-6)


def test_snr_elements_fixed_total(capsys):
    code, out, _ = run_cli(["snr-elements", "--area-mode", "fixed-total",
                            "--m-list", "1,10,100,1000"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    snr = {float(r["snr_db"]) for r in rows}
    assert max(snr) - min(snr) < 1e-9


def test_snr_elements_extra_cases_sorted(capsys):
    code, out, _ = run_cli(["snr-elements", "--m-list", "10,1", "--d-rm-km", "400000,350000"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    keys = [(int(r["case"]), int(r["m"])) for r in rows]
    assert keys == sorted(keys) and len(keys) == 6
    assert float(rows[2]["d_rm_km"]) == 400000.0


def test_misalign(capsys):
    code, out, _ = run_cli(["misalign", "--delta-grid=-90:90:15"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    snr = {float(r["delta_deg"]): float(r["snr_db"]) for r in rows}
    assert max(snr.values()) == snr[0.0]
    assert snr[45.0] == pytest.approx(snr[0.0] - 3.0103, abs=1e-4)
    assert snr[90.0] == -300.0 and snr[-90.0] == -300.0


def test_headers_label_angle_units():
    for header in (cli.TIMESERIES_COLUMNS, cli.SNR_ELEMENTS_COLUMNS, cli.MISALIGN_COLUMNS):
        for col in header:
            if "phi" in col or "delta" in col:
                assert col.endswith("_deg")


@pytest.mark.parametrize("args", [
    ["snr-elements", "--m-list", "0"],
    ["snr-elements", "--m-list", "a,b"],
    ["misalign", "--delta-grid", "0:400:10"],
    ["misalign", "--delta-grid", "nonsense"],
    ["misalign", "--at", "-5"],
    ["timeseries", "--workers", "0"],
])
def test_usage_errors(args, capsys):
    assert cli.run(args) == cli.EXIT_USAGE


def test_argparse_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        cli.run(["nonexistent"])
    assert info.value.code == cli.EXIT_USAGE


def test_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(default_scenario_text().replace("eccentricity = 0", "eccentricity = 1.5", 1))
    code, _, err = run_cli(["validate", "--scenario", str(bad)], capsys)
    assert code == cli.EXIT_VALIDATION and "eccentricity" in err
    typo = tmp_path / "typo.cfg"
    typo.write_text(default_scenario_text().replace("inclination = 23.44", "incliation = 23.44", 1))
    assert cli.run(["timeseries", "--scenario", str(typo)]) == cli.EXIT_VALIDATION


def test_missing_file_exit_code(tmp_path, capsys):
    assert cli.run(["validate", "--scenario", str(tmp_path / "nope.cfg")]) == cli.EXIT_RUNTIME


def test_outage_at_reference_epoch_is_runtime_error(single_llo, capsys):
    from cislunar_ris.config import parse_scenario
    from cislunar_ris.linkselect import evaluate_arrays
    sc = parse_scenario(single_llo)
    cols = evaluate_arrays(sc)
    t = float(cols["times"][cols["outage"]][0])
    code = cli.run(["misalign", "--scenario", str(single_llo), "--at", str(t)])
    assert code == cli.EXIT_RUNTIME


def test_validate_dump_round_trip(capsys, default_scenario):
    from cislunar_ris.config import loads_scenario
    code, out, _ = run_cli(["validate", "--dump"], capsys)
    assert code == 0 and loads_scenario(out) == default_scenario


def test_partial_output_removed(tmp_path, monkeypatch, short_scenario):
    out = tmp_path / "ts.csv"

    def boom(*a, **k):
        yield [0.0] * 12
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(cli, "timeseries_rows", boom)
    assert cli.run(["timeseries", "--scenario", str(short_scenario), "--out", str(out)]) == cli.EXIT_RUNTIME
    assert list(tmp_path.iterdir()) == [short_scenario]


def test_module_entry_point(short_scenario, tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "cislunar_ris", "timeseries", "--scenario",
                           str(short_scenario), "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
