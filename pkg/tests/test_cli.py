import csv
import json
import os

import pytest

from sgfsim.cli import PRESET_NAMES, SWEEP_COLUMNS, ZONE_COLUMNS, main

SWEEP_CONFIG = """
[system]
num_gfus = 2
gbu_power_db = 20
gfu_power_db = 10
target_rate_gbu = 1.0
target_rate_gfu = 1.0

[sweep]
axis = gfu_power_db
grid = 5 10 15
schemes = cr-rsma-sgf cr-noma-sgf

[run]
trials = 5000
seed = 99
"""

ZONE_CONFIG = """
[zone]
p0g0_db = 8
psgk_db = 15
grid = 10

[run]
seed = 1
"""


def read_csv(path):
    comments = []
    with open(path, newline="") as fh:
        rows = []
        for line in fh:
            if line.startswith("#"):
                comments.append(line)
            else:
                rows.append(line)
    parsed = list(csv.reader(rows))
    return comments, parsed[0], parsed[1:]


def write_config(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestRunWithConfigFile:
    def test_sweep_csv_contents(self, tmp_path):
        cfg = write_config(tmp_path, SWEEP_CONFIG)
        out = str(tmp_path / "sweep.csv")
        assert main(["run", "--config", cfg, "--out", out, "--no-timestamp"]) == 0
        comments, header, rows = read_csv(out)
        assert header == SWEEP_COLUMNS
        assert len(rows) == 6  # 3 grid values x 2 schemes
        schemes = {row[header.index("scheme")] for row in rows}
        assert schemes == {"cr-rsma-sgf", "cr-noma-sgf"}
        for row in rows:
            assert row[header.index("trials")] == "5000"
            assert row[header.index("seed")] == "99"
            fracs = [float(row[header.index(f"case{i}_frac")]) for i in (1, 2, 3)]
            assert sum(fracs) == pytest.approx(1.0)

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, SWEEP_CONFIG)
        out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        assert main(["run", "--config", cfg, "--out", out1, "--no-timestamp"]) == 0
        assert main(["run", "--config", cfg, "--out", out2, "--no-timestamp"]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_timestamp_header_by_default(self, tmp_path):
        cfg = write_config(tmp_path, ZONE_CONFIG)
        out = str(tmp_path / "zone.csv")
        assert main(["run", "--config", cfg, "--out", out]) == 0
        comments, _, _ = read_csv(out)
        assert comments[0].startswith("# generated_at=")

    def test_json_mirror(self, tmp_path):
        cfg = write_config(tmp_path, SWEEP_CONFIG)
        out = str(tmp_path / "sweep.csv")
        assert main(["run", "--config", cfg, "--out", out, "--format", "json", "--no-timestamp"]) == 0
        payload = json.load(open(tmp_path / "sweep.json"))
        assert len(payload["rows"]) == 6
        assert set(payload["rows"][0]) == set(SWEEP_COLUMNS)

    def test_zone_config(self, tmp_path):
        cfg = write_config(tmp_path, ZONE_CONFIG)
        out = str(tmp_path / "zone.csv")
        assert main(["run", "--config", cfg, "--out", out, "--no-timestamp"]) == 0
        _, header, rows = read_csv(out)
        assert header == ZONE_COLUMNS
        assert len(rows) == 100
        assert {row[2] for row in rows} <= {
            "noma-gbu-decoded-first",
            "noma-gfu-decoded-first",
            "noma-either-order",
            "rsma-only",
            "outage",
        }


class TestRunWithPresets:
    def test_zone_preset_flags(self, tmp_path):
        out = str(tmp_path / "zone.csv")
        assert main(["run", "zone", "--grid", "20", "--out", out, "--no-timestamp"]) == 0
        comments, header, rows = read_csv(out)
        assert len(rows) == 400
        assert any("p0g0_db=8" in c for c in comments)

    def test_fig7_writes_one_file_per_setting(self, tmp_path):
        out = str(tmp_path / "fig7.csv")
        assert main(
            ["run", "fig7", "--trials", "500", "--seed", "4", "--out", out, "--no-timestamp"]
        ) == 0
        names = sorted(os.listdir(tmp_path))
        assert names == ["fig7_a.csv", "fig7_b.csv"]
        _, header, rows = read_csv(str(tmp_path / "fig7_a.csv"))
        assert header == SWEEP_COLUMNS
        assert len(rows) == 16  # K = 1..8, two schemes

    def test_choice_parameters_are_marked(self, tmp_path):
        out = str(tmp_path / "fig7.csv")
        main(["run", "fig7", "--trials", "500", "--seed", "4", "--out", out, "--no-timestamp"])
        comments, _, _ = read_csv(str(tmp_path / "fig7_b.csv"))
        assert any("gbu_power_db=10" in c and "source=choice" in c for c in comments)

    def test_preset_names_stable(self):
        assert PRESET_NAMES == ("fig3", "fig4", "fig5", "fig6", "fig7", "zone")


class TestUsageErrors:
    def test_preset_and_config_both_given(self, tmp_path):
        cfg = write_config(tmp_path, SWEEP_CONFIG)
        assert main(["run", "zone", "--config", cfg]) == 2

    def test_neither_preset_nor_config(self):
        assert main(["run"]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 2

    def test_invalid_axis_in_config(self, tmp_path):
        bad = SWEEP_CONFIG.replace("axis = gfu_power_db", "axis = bandwidth")
        cfg = write_config(tmp_path, bad)
        assert main(["run", "--config", cfg]) == 2
