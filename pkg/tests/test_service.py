import csv
import json

import pytest
import yaml
from starlette.testclient import TestClient

from hybridmac import cli
from hybridmac.experiment import build_example
from hybridmac.scenario_io import scenario_to_dict
from hybridmac.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def example1_tree():
    return scenario_to_dict(build_example(1))


class TestEndpoints:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"

    def test_example_roundtrips_through_the_api(self, client, example1_tree):
        resp = client.get("/example/1")
        assert resp.status_code == 200
        body = resp.json()
        assert body["name"] == "example1"
        assert len(body["topology"]["nodes"]) == 5
        assert len(body["links"]) == 3

    def test_unknown_example_404(self, client):
        assert client.get("/example/9").status_code == 404

    def test_run_with_overrides(self, client, example1_tree):
        resp = client.post("/run", json={"scenario": example1_tree,
                                         "mode": "tdma", "seed": 3,
                                         "duration_s": 1.0})
        assert resp.status_code == 200
        body = resp.json()
        assert body["mode"] == "tdma" and body["seed"] == 3
        assert set(body["metrics"]["per_link"]) == {"AP1->STA2", "AP1->STA3",
                                                    "AP2->STA1"}
        assert body["metrics"]["overruns"] == 0

    def test_run_trace_is_returned_on_request(self, client, example1_tree):
        resp = client.post("/run", json={"scenario": example1_tree,
                                         "duration_s": 0.05,
                                         "include_trace": True})
        assert resp.status_code == 200
        trace = resp.json()["trace"]
        assert trace and all(isinstance(line, str) for line in trace)

    def test_run_unknown_mode_422(self, client, example1_tree):
        resp = client.post("/run", json={"scenario": example1_tree,
                                         "mode": "aloha"})
        assert resp.status_code == 422

    def test_run_invalid_scenario_422(self, client, example1_tree):
        broken = json.loads(json.dumps(example1_tree))
        broken["links"].append({"src": 0, "dst": 1, "phy_rate": 6_000_000})
        resp = client.post("/run", json={"scenario": broken})
        assert resp.status_code == 422

    def test_compare_rows(self, client, example1_tree):
        tree = dict(example1_tree, duration_s=1.0)
        resp = client.post("/compare", json={"scenario": tree,
                                             "modes": ["dcf", "hmac"],
                                             "seeds": [1, 2]})
        assert resp.status_code == 200
        rows = resp.json()["rows"]
        assert len(rows) == 8
        assert [r["link"] for r in rows if r["mode"] == "dcf"][-1] == "TOTAL"

    def test_compare_rejects_empty_seeds(self, client, example1_tree):
        resp = client.post("/compare", json={"scenario": example1_tree,
                                             "modes": ["dcf"], "seeds": []})
        assert resp.status_code == 422

    def test_schedule_hmac(self, client, example1_tree):
        resp = client.post("/schedule", json={"scenario": example1_tree,
                                              "mode": "hmac"})
        assert resp.status_code == 200
        plan = resp.json()
        assert plan["guard_slots"] == [4, 9]
        assert plan["permitted"]["AP1->STA2"] == [0, 1, 2, 3]
        assert plan["permitted"]["AP2->STA1"] == [5, 6, 7, 8]
        slots = plan["superframes"]["AP1"]
        assert slots[4]["guard"] and not slots[0]["guard"]
        assert any(e["tos"] == 0 for e in slots[0]["entries"])

    def test_schedule_dcf_rejected(self, client, example1_tree):
        resp = client.post("/schedule", json={"scenario": example1_tree,
                                              "mode": "dcf"})
        assert resp.status_code == 422


class TestCli:
    def test_parse_seeds_range(self):
        assert cli.parse_seeds("1..10") == list(range(1, 11))

    def test_parse_seeds_list(self):
        assert cli.parse_seeds("1,2,5") == [1, 2, 5]

    def test_example_emits_loadable_config(self, tmp_path, capsys):
        cli.main(["example", "--n", "2", "--emit-config"])
        tree = yaml.safe_load(capsys.readouterr().out)
        assert tree["name"] == "example2"
        from hybridmac.scenario_io import scenario_from_dict
        assert len(scenario_from_dict(tree).links) == 4

    def test_run_writes_trace_file(self, tmp_path, capsys):
        config = tmp_path / "sc.yaml"
        cli.main(["example", "--n", "1", "--emit-config"])
        config.write_text(capsys.readouterr().out)
        trace = tmp_path / "trace.txt"
        cli.main(["run", "--scenario", str(config), "--mode", "dcf",
                  "--seed", "1", "--duration", "0.05",
                  "--trace", str(trace)])
        out = json.loads(capsys.readouterr().out)
        assert out["mode"] == "dcf"
        assert trace.read_text().strip()

    def test_compare_csv_and_json_agree(self, tmp_path, capsys):
        config = tmp_path / "sc.yaml"
        cli.main(["example", "--n", "1", "--emit-config"])
        text = capsys.readouterr().out
        tree = yaml.safe_load(text)
        tree["duration_s"] = 1.0
        config.write_text(yaml.safe_dump(tree))
        csv_path, json_path = tmp_path / "r.csv", tmp_path / "r.json"
        for out in (csv_path, json_path):
            cli.main(["compare", "--scenario", str(config),
                      "--modes", "dcf,tdma", "--seeds", "1,2",
                      "--output", str(out)])
            capsys.readouterr()
        with open(csv_path) as fh:
            csv_rows = list(csv.DictReader(fh))
        json_rows = json.loads(json_path.read_text())["rows"]
        assert len(csv_rows) == len(json_rows) == 8
        assert [r for r in csv_rows if r["link"] == "TOTAL"]
        for c, j in zip(csv_rows, json_rows):
            assert c["mode"] == j["mode"] and c["link"] == j["link"]
            for col in ("goodput_bps_mean", "goodput_bps_stderr",
                        "data_collisions", "retransmissions",
                        "airtime_fraction"):
                assert float(c[col]) == pytest.approx(j[col])

    def test_schedule_emit(self, tmp_path, capsys):
        config = tmp_path / "sc.yaml"
        cli.main(["example", "--n", "1", "--emit-config"])
        config.write_text(capsys.readouterr().out)
        cli.main(["schedule", "--scenario", str(config), "--mode", "hmac",
                  "--emit-schedule"])
        plan = json.loads(capsys.readouterr().out)
        assert plan["total_slots"] == 10 and plan["guard_slots"] == [4, 9]
