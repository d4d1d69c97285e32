import csv
import subprocess
import sys
from collections import defaultdict
from statistics import fmean

import pytest

from rtbcsim import cli
from rtbcsim.errors import InvalidConfig
from rtbcsim.topology import Topology, TopologyConfig, generate_topology

FAST = ["--nodes", "60", "--trials", "1", "--events", "100"]


def read_rows(path):
    with open(path, newline="") as fh:
        return [r for r in csv.DictReader(fh) if not r["protocol"].startswith("#")]


def test_defaults_are_reference_setup():
    cfg = cli.parse_config()
    t = cfg.topology
    assert (t.node_count, t.field_side, t.comm_radius, t.min_node_spacing) == (300, 100.0, 10.0, 5.0)
    assert t.sink_position == (50.0, 0.0)
    assert (cfg.initial_energy, cfg.ch_fraction, cfg.trials) == (100.0, 0.05, 10)


def test_zero_nodes_is_a_config_error(tmp_path, capsys):
    with pytest.raises(InvalidConfig):
        cli.parse_config({"nodes": 0})
    assert cli.main(["run", "--nodes", "0", "--out", str(tmp_path)]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_flag_beats_file(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("nodes = 100\n# comment\nfraction = 0.1\n")
    cfg = cli.parse_config({"nodes": 200}, f)
    assert cfg.topology.node_count == 200
    assert cfg.ch_fraction == 0.1


def test_unknown_key(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("colour = blue\n")
    with pytest.raises(InvalidConfig) as exc:
        cli.parse_config(config_file=f)
    assert exc.value.key == "colour"
    assert cli.main(["run", "--config", str(f), "--out", str(tmp_path / "o")]) == 2


def test_compare_scaled_down(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["compare", *FAST, "--out", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    assert [(r["protocol"], r["recluster_period"]) for r in rows] == [
        ("rtbc", "50"), ("rtbc", "100"), ("rtbc", "200"), ("dd", "100")]
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header == ",".join(cli.RESULT_COLUMNS)
    assert b"\r" not in (out / "results.csv").read_bytes()


def test_compare_sweeps_event_counts(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["compare", "--nodes", "40", "--trials", "2", "--out", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    assert len(rows) == 4 * 5 * 2
    assert sorted({int(r["event_count"]) for r in rows}) == [100, 200, 300, 400, 500]


def test_summary_recomputes_from_results(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", "--nodes", "60", "--trials", "3", "--events", "80", "--out", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    summary = read_rows(out / "summary.csv")
    groups = defaultdict(list)
    for r in rows:
        groups[(r["protocol"], r["recluster_period"], r["event_count"])].append(r)
    assert len(summary) == len(groups)
    for s in summary:
        recs = groups[(s["protocol"], s["recluster_period"], s["event_count"])]
        assert int(s["trials"]) == len(recs)
        for col in cli.SUMMARY_COLUMNS[4:]:
            assert float(s[col]) == pytest.approx(fmean(float(r[col]) for r in recs), rel=1e-12)


def test_manifest_round_trip(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["compare", *FAST, "--seed", "4", "--out", str(a)]) == 0
    assert cli.main(["compare", "--config", str(a / "manifest.txt"), "--out", str(b)]) == 0
    for name in ("results.csv", "summary.csv", "manifest.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_dump_and_load_topology(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", *FAST, "--dump-topology", "--out", str(a)]) == 0
    dumped = a / "topology_trial0.txt"
    assert Topology.load(dumped).node_count == 60
    assert cli.main(["run", *FAST, "--load-topology", str(dumped), "--out", str(b)]) == 0
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()


def test_missing_topology_file(tmp_path):
    assert cli.main(["run", *FAST, "--load-topology", str(tmp_path / "nope"), "--out", str(tmp_path)]) == 2


def test_cluster_stats_fifty_nodes(tmp_path):
    # a 40 m field keeps all 50 nodes within reach of the sink
    conf = tmp_path / "c.txt"
    conf.write_text("field = 40\nsink_x = 20\n")
    out = tmp_path / "o"
    assert cli.main(["cluster-stats", "--config", str(conf), "--nodes", "50", "--trials", "2",
                     "--dump-clusters", "--out", str(out)]) == 0
    summary = list(csv.DictReader(open(out / "cluster_summary.csv")))
    assert [int(r["heads"]) for r in summary] == [3, 3]
    for r in summary:
        heads, members, orphans = int(r["heads"]), int(r["members"]), int(r["orphans"])
        assert heads + members + orphans == 50
        assert float(r["mean_size"]) == members / heads
    sizes = list(csv.DictReader(open(out / "cluster_sizes.csv")))
    assert len(sizes) == 6
    lines = (out / "clusters_trial0.txt").read_text().splitlines()
    assert len([ln for ln in lines if not ln.startswith("#")]) == 50


def test_cluster_stats_partition_identity(tmp_path):
    cfg = cli.parse_config({"trials": 1})
    _, a = cli.cluster_snapshot(cfg, 0)
    assert len(a.heads) == 15
    sizes = a.cluster_sizes()
    assert sum(sizes.values()) / 15 == (300 - 15 - len(a.orphans)) / 15


def test_runtime_failure_exits_one(tmp_path, monkeypatch):
    from rtbcsim.errors import RoutingLoop

    def boom(*args, **kwargs):
        raise RoutingLoop("synthetic")

    monkeypatch.setattr(cli, "run_trial", boom)
    out = tmp_path / "o"
    assert cli.main(["run", *FAST, "--out", str(out)]) == 1
    assert "# FAILED" in (out / "results.csv").read_text()


def test_help_documents_csv_schema():
    proc = subprocess.run([sys.executable, "-m", "rtbcsim", "compare", "--help"],
                          capture_output=True, text=True, check=True)
    assert ",".join(cli.RESULT_COLUMNS) in proc.stdout


def test_load_topology_overrides_node_count(tmp_path):
    topo = generate_topology(TopologyConfig(node_count=45, field_side=40.0, sink_position=(20.0, 0.0)), 1)
    topo.save(tmp_path / "t.txt")
    out = tmp_path / "o"
    assert cli.main(["cluster-stats", "--trials", "1", "--load-topology", str(tmp_path / "t.txt"),
                     "--out", str(out)]) == 0
    r = next(csv.DictReader(open(out / "cluster_summary.csv")))
    assert int(r["heads"]) + int(r["members"]) + int(r["orphans"]) == 45
