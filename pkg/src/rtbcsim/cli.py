"""Batch command-line front end.

Settings come from the reference defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags (last one wins).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from statistics import fmean

import numpy as np

from .engine import SimConfig, run_trial, trial_seed, trial_streams
from .energy import EnergyLedger
from .errors import InvalidConfig, SimulationError
from .radio import Radio
from .rtbc import RotationHistory, census, form_clusters, select_cluster_heads
from .topology import Topology, TopologyConfig, generate_topology

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

COMPARE_PERIODS = (50, 100, 200)
COMPARE_EVENTS = (100, 200, 300, 400, 500)

DEFAULTS = {
    "nodes": 300,
    "field": 100.0,
    "radius": 10.0,
    "spacing": 5.0,
    "sink_x": 50.0,
    "sink_y": 0.0,
    "energy": 100.0,
    "fraction": 0.05,
    "trials": 10,
    "events": 300,
    "recluster_period": 100,
    "protocol": "rtbc",
    "k_dup": 3,
    "seed": 0,
    "placement": "poisson_disk",
    "load_topology": None,
}
_CASTS = {k: type(v) for k, v in DEFAULTS.items() if v is not None}
_CASTS["load_topology"] = str

RESULT_COLUMNS = (
    "protocol", "recluster_period", "event_count", "trial", "interest_msgs",
    "data_msgs", "energy_total", "duplicates_suppressed", "delivered", "undelivered",
)
SUMMARY_COLUMNS = (
    "protocol", "recluster_period", "event_count", "trials", "interest_msgs",
    "data_msgs", "energy_total", "duplicates_suppressed", "delivered", "undelivered",
)

CSV_HELP = f"""\
output files (comma-separated, header row, LF line endings):
  results.csv          {','.join(RESULT_COLUMNS)}
                       one row per trial
  summary.csv          {','.join(SUMMARY_COLUMNS)}
                       arithmetic means over trials
  cluster_sizes.csv    trial,head,size
  cluster_summary.csv  trial,heads,members,orphans,mean_size
  manifest.txt         resolved settings; rerun with --config manifest.txt

interest_msgs counts sink-originated interest transmissions; census, ADV and
REP overhead is charged to energy_total but not counted there.
A failed trial leaves a '# FAILED ...' line after the rows already written.
"""


def read_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"{path}:{lineno}: expected 'key = value'", line)
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _cast(key: str, value):
    if key not in DEFAULTS:
        raise InvalidConfig(f"unknown setting {key!r}", key)
    if value is None:
        return None
    try:
        return _CASTS[key](value)
    except ValueError:
        raise InvalidConfig(f"bad value for {key}: {value!r}", key) from None


def resolve_settings(file_values: dict | None = None, flag_values: dict | None = None):
    """Merge defaults < file < flags. Returns (settings, keys set explicitly)."""
    settings = dict(DEFAULTS)
    explicit = set()
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            settings[key] = _cast(key, value)
            explicit.add(key)
    return settings, explicit


def config_from_settings(settings: dict) -> SimConfig:
    try:
        topo = TopologyConfig(
            node_count=settings["nodes"],
            field_side=settings["field"],
            comm_radius=settings["radius"],
            min_node_spacing=settings["spacing"],
            sink_position=(settings["sink_x"], settings["sink_y"]),
            placement=settings["placement"],
        )
        return SimConfig(
            topology=topo,
            protocol=settings["protocol"],
            ch_fraction=settings["fraction"],
            recluster_period=settings["recluster_period"],
            total_events=settings["events"],
            trials=settings["trials"],
            master_seed=settings["seed"],
            k_dup=settings["k_dup"],
            initial_energy=settings["energy"],
        )
    except InvalidConfig:
        raise
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(str(exc)) from None


def parse_config(flags: dict | None = None, config_file=None) -> SimConfig:
    """Flags override file values, which override the reference defaults."""
    file_values = read_config_file(config_file) if config_file else None
    settings, _ = resolve_settings(file_values, flags)
    return config_from_settings(settings)


def write_manifest(path: Path, command: str, settings: dict, explicit: set) -> None:
    lines = [f"# rtbcsim {command}"]
    for key in DEFAULTS:
        value = settings[key]
        if value is None or (key == "events" and command == "compare" and key not in explicit):
            continue
        lines.append(f"{key} = {value}")
    path.write_text("\n".join(lines) + "\n")


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _csv_line(values) -> str:
    return ",".join(_fmt(v) for v in values) + "\n"


def _load_topology(settings: dict, config: SimConfig):
    path = settings.get("load_topology")
    if not path:
        return config, None
    try:
        topology = Topology.load(path)
    except OSError as exc:
        raise InvalidConfig(f"cannot read topology file: {exc}", "load_topology") from None
    return replace(config, topology=topology.config), topology


def _trial_task(args):
    config, index, topology = args
    try:
        return run_trial(config, trial_seed(config.master_seed, index), topology, trial=index)
    except SimulationError as exc:
        return f"{config.protocol} period={config.recluster_period} events={config.total_events} trial={index}: {type(exc).__name__}: {exc}"


def _run_tasks(tasks, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(_trial_task, tasks)
    else:
        yield from map(_trial_task, tasks)


def _dump_topologies(config: SimConfig, out: Path, topology) -> None:
    for i in range(config.trials):
        topo = topology
        if topo is None:
            topo = generate_topology(config.topology, trial_streams(trial_seed(config.master_seed, i))[0])
        topo.save(out / f"topology_trial{i}.txt")


def _print_table(header, rows, stream=sys.stdout) -> None:
    cells = [list(map(str, header))] + [[_short(v) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    for row in cells:
        print("  ".join(c.rjust(w) for c, w in zip(row, widths)), file=stream)


def _short(v) -> str:
    return f"{v:.1f}" if isinstance(v, float) else str(v)


def _write_results(out: Path, config_rows, jobs) -> int:
    """Run every (config, trial) and write results/summary CSVs. Returns exit code."""
    tasks = [(cfg, i, topo) for cfg, topo in config_rows for i in range(cfg.trials)]
    groups: dict[tuple, list] = {}
    failure = None
    with open(out / "results.csv", "w", newline="\n") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for result in _run_tasks(tasks, jobs):
            if isinstance(result, str):
                failure = result
                fh.write(f"# FAILED {result}\n")
                break
            r = result
            fh.write(_csv_line([r.protocol, r.recluster_period, r.event_count, r.trial,
                                r.interest_msgs, r.data_msgs, r.energy_total,
                                r.duplicates_suppressed, r.delivered, r.undelivered]))
            fh.flush()
            groups.setdefault((r.protocol, r.recluster_period, r.event_count), []).append(r)

    summary = []
    for (proto, period, events), recs in groups.items():
        summary.append([proto, period, events, len(recs)] + [
            fmean([float(getattr(r, c)) for r in recs]) for c in SUMMARY_COLUMNS[4:]
        ])
    with open(out / "summary.csv", "w", newline="\n") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in summary:
            fh.write(_csv_line(row))
    _print_table(SUMMARY_COLUMNS, summary)
    if failure:
        print(f"trial failed: {failure}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_compare(settings: dict, explicit: set, out: Path, jobs: int = 1, dump_topology=False) -> int:
    """RTBC at each re-clustering period and DD, across the event-count sweep.

    DD refreshes its gradients every ``recluster_period`` events (the configured
    base period).
    """
    config, topology = _load_topology(settings, config_from_settings(settings))
    events = [config.total_events] if "events" in explicit else list(COMPARE_EVENTS)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out / "manifest.txt", "compare", settings, explicit)
    if dump_topology:
        _dump_topologies(config, out, topology)
    variants = [("rtbc", p) for p in COMPARE_PERIODS] + [("dd", config.recluster_period)]
    config_rows = [
        (replace(config, protocol=proto, recluster_period=period, total_events=n), topology)
        for proto, period in variants
        for n in events
    ]
    return _write_results(out, config_rows, jobs)


def cmd_run(settings: dict, explicit: set, out: Path, jobs: int = 1, dump_topology=False) -> int:
    config, topology = _load_topology(settings, config_from_settings(settings))
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out / "manifest.txt", "run", settings, explicit)
    if dump_topology:
        _dump_topologies(config, out, topology)
    return _write_results(out, [(config, topology)], jobs)


def cluster_snapshot(config: SimConfig, index: int, topology: Topology | None = None):
    """First-round census, election and formation for trial ``index``."""
    topo_seed, _, elect_seed = trial_streams(trial_seed(config.master_seed, index))
    if topology is None:
        topology = generate_topology(config.topology, topo_seed)
    radio = Radio(topology, EnergyLedger(topology.sensors, config.initial_energy))
    answered = census(radio)
    heads = select_cluster_heads(
        answered, config.ch_fraction, 0, RotationHistory(), np.random.default_rng(elect_seed)
    )
    return topology, form_clusters(radio, heads)


def cmd_cluster_stats(settings: dict, explicit: set, out: Path, dump_clusters=False, dump_topology=False) -> int:
    config, topology = _load_topology(settings, config_from_settings(settings))
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out / "manifest.txt", "cluster-stats", settings, explicit)
    rows = []
    code = EXIT_OK
    with open(out / "cluster_sizes.csv", "w", newline="\n") as sizes_fh:
        sizes_fh.write("trial,head,size\n")
        for i in range(config.trials):
            try:
                topo, assignment = cluster_snapshot(config, i, topology)
            except SimulationError as exc:
                sizes_fh.write(f"# FAILED trial={i}: {type(exc).__name__}: {exc}\n")
                print(f"trial {i} failed: {exc}", file=sys.stderr)
                code = EXIT_FAILURE
                break
            sizes = assignment.cluster_sizes()
            for head, size in sizes.items():
                sizes_fh.write(_csv_line([i, head, size]))
            members = sum(sizes.values())
            rows.append([i, len(sizes), members, len(assignment.orphans), members / len(sizes)])
            if dump_clusters:
                (out / f"clusters_trial{i}.txt").write_text(assignment.to_text())
            if dump_topology:
                topo.save(out / f"topology_trial{i}.txt")
    with open(out / "cluster_summary.csv", "w", newline="\n") as fh:
        fh.write("trial,heads,members,orphans,mean_size\n")
        for row in rows:
            fh.write(_csv_line(row))
    _print_table(["trial", "heads", "members", "orphans", "mean_size"], rows)
    if rows:
        n = config.topology.node_count
        print(f"mean cluster size {fmean(r[4] for r in rows):.2f}, "
              f"orphan fraction {fmean(r[3] / n for r in rows):.4f}")
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key = value settings file")
    common.add_argument("--nodes", type=int)
    common.add_argument("--events", type=int, help="events per trial (compare: restricts the 100..500 sweep)")
    common.add_argument("--trials", type=int)
    common.add_argument("--recluster-period", type=int, dest="recluster_period")
    common.add_argument("--protocol", choices=("rtbc", "dd"))
    common.add_argument("--k-dup", type=int, dest="k_dup", help="co-detecting neighbors per event")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--fraction", type=float, help="cluster-head fraction")
    common.add_argument("--energy", type=float, help="initial energy per node")
    common.add_argument("--placement", choices=("poisson_disk", "uniform"))
    common.add_argument("--load-topology", metavar="FILE", dest="load_topology")
    common.add_argument("--dump-topology", action="store_true", help="write topology_trial<i>.txt files")
    common.add_argument("--out", metavar="DIR", default="rtbc_out")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (output is unaffected)")

    parser = argparse.ArgumentParser(
        prog="rtbcsim",
        description="Cluster-based routing vs. Direct Diffusion sensor-network simulator.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("compare", "RTBC(50/100/200) vs DD over the event sweep"),
        ("run", "batch of a single protocol configuration"),
        ("cluster-stats", "cluster size distribution after formation"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_, epilog=CSV_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        if name == "cluster-stats":
            p.add_argument("--dump-clusters", action="store_true",
                           help="write clusters_trial<i>.txt (node_id ch_id dn_id hop)")
    return parser


_SETTING_FLAGS = ("nodes", "events", "trials", "recluster_period", "protocol", "k_dup",
                  "seed", "fraction", "energy", "placement", "load_topology")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = read_config_file(args.config) if args.config else None
        settings, explicit = resolve_settings(
            file_values, {k: getattr(args, k) for k in _SETTING_FLAGS}
        )
        config_from_settings(settings)
        out = Path(args.out)
        if args.command == "compare":
            return cmd_compare(settings, explicit, out, args.jobs, args.dump_topology)
        if args.command == "run":
            return cmd_run(settings, explicit, out, args.jobs, args.dump_topology)
        return cmd_cluster_stats(settings, explicit, out, args.dump_clusters, args.dump_topology)
    except InvalidConfig as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"rtbcsim: invalid config{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"rtbcsim: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
