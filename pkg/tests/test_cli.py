import json
import os

import pytest

from boolperc.cli import CSV_HEADER, main


def read_csv(path):
    with open(path) as handle:
        return handle.read()


def strip_wall_ms(text):
    lines = text.strip().split("\n")
    cols = lines[0].split(",")
    idx = cols.index("wall_ms") if "wall_ms" in cols else None
    out = []
    for line in lines:
        vals = line.split(",")
        if idx is not None:
            vals[idx] = ""
        out.append(",".join(vals))
    return "\n".join(out)


class TestEstimateEvent:
    def test_writes_csv_and_manifest(self, tmp_path):
        out = tmp_path / "run.csv"
        rc = main(["estimate-event", "--event", "bigball", "--delta", "1",
                   "--lambda", "1", "--n", "2", "--threshold", "2",
                   "--replicas", "20", "--seed", "3", "--out", str(out)])
        assert rc == 0
        text = read_csv(out)
        assert text.startswith(CSV_HEADER + "\n")
        row = dict(zip(CSV_HEADER.split(","), text.strip().split("\n")[1].split(",")))
        assert row["op"] == "estimate-event"
        assert row["replicas"] == "20"
        assert 0 <= float(row["estimate"]) <= 1
        manifest = json.loads(read_csv(str(out) + ".manifest.json"))
        assert manifest["op"] == "estimate-event"
        assert manifest["seed"] == 3
        assert manifest["rows"] == 1

    def test_rerun_byte_identical(self, tmp_path):
        args = ["estimate-event", "--event", "bigball", "--delta", "1",
                "--lambda", "1", "--n", "2", "--threshold", "2",
                "--replicas", "20", "--seed", "3"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert strip_wall_ms(read_csv(a)) == strip_wall_ms(read_csv(b))

    def test_threads_do_not_change_result(self, tmp_path):
        base = ["estimate-event", "--event", "bigball", "--delta", "1",
                "--lambda", "1", "--n", "2", "--threshold", "2",
                "--replicas", "30", "--seed", "3"]
        a, b = tmp_path / "t1.csv", tmp_path / "t4.csv"
        assert main(base + ["--threads", "1", "--out", str(a)]) == 0
        assert main(base + ["--threads", "4", "--out", str(b)]) == 0
        assert strip_wall_ms(read_csv(a)) == strip_wall_ms(read_csv(b))

    def test_env_seed_default(self, tmp_path, monkeypatch):
        out = tmp_path / "env.csv"
        monkeypatch.setenv("BOOLPERC_SEED", "41")
        assert main(["estimate-event", "--event", "bigball", "--delta", "1",
                     "--lambda", "1", "--n", "2", "--threshold", "2",
                     "--replicas", "10", "--out", str(out)]) == 0
        row = read_csv(out).strip().split("\n")[1]
        assert row.split(",")[CSV_HEADER.split(",").index("seed")] == "41"


class TestConfigHandling:
    def test_missing_required_key(self, tmp_path):
        rc = main(["estimate-event", "--delta", "1", "--replicas", "5",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_bad_config_file(self, tmp_path):
        bad = tmp_path / "cfg.toml"
        bad.write_text("not [valid toml")
        rc = main(["estimate-event", "--config", str(bad),
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_config_file_with_cli_override(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('event = "bigball"\nlam = 1.0\nn = 2.0\n'
                       'threshold = 2.0\ndelta = 1.0\nreplicas = 50\n'
                       'seed = 3\n')
        out = tmp_path / "run.csv"
        assert main(["estimate-event", "--config", str(cfg),
                     "--replicas", "10", "--out", str(out)]) == 0
        row = read_csv(out).strip().split("\n")[1]
        assert row.split(",")[CSV_HEADER.split(",").index("replicas")] == "10"

    def test_unknown_event(self, tmp_path):
        rc = main(["estimate-event", "--event", "nope", "--delta", "1",
                   "--lambda", "1", "--replicas", "5",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestExitCodes:
    def test_truncation_budget_exit(self, tmp_path):
        # delta so small that no affordable truncation radius exists
        rc = main(["sample", "--delta", "0.05", "--lambda", "1",
                   "--scale", "2", "--seed", "0",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 3

    def test_invalid_bracket_exit(self, tmp_path):
        rc = main(["lambda-hat-c", "--measure-kind", "pointmass",
                   "--radius", "1", "--bracket-lo", "2", "--bracket-hi", "4",
                   "--tolerance", "0.5", "--ladder", "2.0",
                   "--replicas", "60", "--seed", "6",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 4


class TestRawCsvCommands:
    def test_sample_schema(self, tmp_path):
        out = tmp_path / "snap.csv"
        assert main(["sample", "--delta", "1", "--lambda", "1", "--scale", "4",
                     "--seed", "2", "--out", str(out)]) == 0
        lines = read_csv(out).strip().split("\n")
        assert lines[0] == "x0,x1,r"
        manifest = json.loads(read_csv(str(out) + ".manifest.json"))
        assert manifest["balls"] == len(lines) - 1

    def test_hypercube_check(self, tmp_path):
        out = tmp_path / "hc.csv"
        assert main(["hypercube-check", "--n", "2", "--p", "0.25",
                     "--out", str(out)]) == 0
        lines = read_csv(out).strip().split("\n")
        assert lines[0] == "function_id,p,lhs,var,maxterm,implied_c"
        assert len(lines) == 1 + 16
        manifest = json.loads(read_csv(str(out) + ".manifest.json"))
        assert manifest["min_implied_c"] > 0

    def test_encoding_check(self, tmp_path):
        out = tmp_path / "enc.csv"
        assert main(["encoding-check", "--n", "2", "--p", "0.25",
                     "--table-id", "8", "--out", str(out)]) == 0
        lines = read_csv(out).strip().split("\n")
        assert lines[0].startswith("i,j,inf,flip_prob")
        assert all(line.endswith("True,True,True") for line in lines[1:])


class TestExplore:
    def test_abstract_trace(self, tmp_path):
        out = tmp_path / "abs.csv"
        assert main(["explore-abstract", "--q", "0.8", "--M", "6",
                     "--replicas", "5", "--seed", "1", "--out", str(out)]) == 0
        manifest = json.loads(read_csv(str(out) + ".manifest.json"))
        rec = json.loads(manifest["trace_jsonl"][0])
        assert set(rec) == {"t", "x_t", "accepted", "seed_ball",
                            "frontier_size"}

    def test_abstract_deterministic(self, tmp_path):
        args = ["explore-abstract", "--q", "0.8", "--M", "6",
                "--replicas", "5", "--seed", "1"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert strip_wall_ms(read_csv(a)) == strip_wall_ms(read_csv(b))


class TestMerge:
    def test_pools_matching_rows(self, tmp_path):
        args = ["estimate-event", "--event", "bigball", "--delta", "1",
                "--lambda", "1", "--n", "2", "--threshold", "2", "--seed", "3"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--replicas", "20", "--out", str(a)]) == 0
        assert main(args + ["--replicas", "30", "--out", str(b)]) == 0
        merged = tmp_path / "m.csv"
        assert main(["merge", "--out", str(merged), str(a), str(b)]) == 0
        row = dict(zip(CSV_HEADER.split(","),
                       read_csv(merged).strip().split("\n")[1].split(",")))
        assert row["replicas"] == "50"
        pa = float(read_csv(a).strip().split("\n")[1].split(",")[11])
        pb = float(read_csv(b).strip().split("\n")[1].split(",")[11])
        assert float(row["estimate"]) == pytest.approx(
            (pa * 20 + pb * 30) / 50, abs=1e-9)

    def test_header_mismatch(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope,nope\n1,2\n")
        rc = main(["merge", "--out", str(tmp_path / "m.csv"), str(bad)])
        assert rc == 2


class TestAtomicity:
    def test_no_temp_files_left(self, tmp_path):
        out = tmp_path / "run.csv"
        assert main(["estimate-event", "--event", "bigball", "--delta", "1",
                     "--lambda", "1", "--n", "2", "--threshold", "2",
                     "--replicas", "10", "--seed", "3",
                     "--out", str(out)]) == 0
        leftovers = [f for f in os.listdir(tmp_path)
                     if f.startswith(".boolperc-")]
        assert leftovers == []
