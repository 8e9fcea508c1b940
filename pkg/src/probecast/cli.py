"""Command-line entry points: check, run, serve, replay, summarize.

Every flag has an environment-variable twin (PROBECAST_SEED, PROBECAST_DT,
PROBECAST_OUT, PROBECAST_PORT, PROBECAST_PACE); precedence is
flag > environment > scenario file > built-in default.

Exit codes: 0 success, 1 usage or parse failure, 2 compatibility check
failure, 3 run terminated by a controller fault.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from pathlib import Path
from typing import Callable

from .datalog import (SampleLog, assemble_profiles, depth_normalized_summary,
                      read_ndjson, write_csv, write_manifest,
                      write_profiles_csv, write_summary_csv)
from .mission import MissionRunner
from .scenario import Scenario, ScenarioError, build_session, load_scenario
from .serve import ReplayDriver, SessionDriver, TranscriptRecorder, \
    load_transcript, make_snapshot
from .specs import SpecError, check_probe_compatibility, buoyant_force, \
    max_total_weight, structural_safety_factor
from .units import Unit

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCOMPATIBLE = 2
EXIT_FAULTED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):           # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve(flag, env_name: str, file_value, default, cast: Callable):
    if flag is not None:
        return flag
    env = os.environ.get(env_name, "")
    if env:
        try:
            return cast(env)
        except ValueError as exc:
            raise ScenarioError(f"bad {env_name}={env!r}: {exc}") from exc
    if file_value is not None:
        return file_value
    return default


def _load(path: str) -> Scenario:
    try:
        return load_scenario(path)
    except SpecError as exc:                  # spec invariant inside the file
        raise ScenarioError(f"{path}: {exc}") from exc


def cmd_check(args) -> int:
    scenario = _load(args.scenario)
    force = buoyant_force(scenario.platform).to(Unit.NEWTON)
    weight = max_total_weight(scenario.platform).to(Unit.KILOGRAM)
    sf = structural_safety_factor(scenario.structure)
    report = check_probe_compatibility(scenario.probe, scenario.winch,
                                       scenario.platform)
    print(f"scenario: {scenario.name}")
    print(f"buoyant force: {force:.2f} N")
    print(f"max total weight: {weight:.2f} kg")
    print(f"structural safety factor: {sf:.3f}")
    for line in report.lines():
        print(line)
    print(f"RESULT: {'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_INCOMPATIBLE


def _run_dir(scenario: Scenario, out_root: Path) -> Path:
    run_id = scenario.config_hash()[:8]
    return out_root / f"{scenario.name}_{scenario.seed}_{run_id}"


def cmd_run(args) -> int:
    scenario = _load(args.scenario)
    seed = _resolve(args.seed, "PROBECAST_SEED", scenario.seed, 0, int)
    dt = _resolve(args.dt, "PROBECAST_DT", scenario.dt, 0.01, float)
    out_root = Path(_resolve(args.out, "PROBECAST_OUT", None, "runs", str))

    report = check_probe_compatibility(scenario.probe, scenario.winch,
                                       scenario.platform)
    if not report.passed:
        for line in report.lines():
            print(line, file=sys.stderr)
        print("error: compatibility check failed; refusing to run",
              file=sys.stderr)
        return EXIT_INCOMPATIBLE

    scenario = dataclasses.replace(scenario, seed=seed, dt=dt)
    out_dir = _run_dir(scenario, out_root)
    out_dir.mkdir(parents=True, exist_ok=True)

    session = build_session(scenario)
    sample_log = SampleLog(out_dir / "records.ndjson")
    session.sample_listeners.append(sample_log.append)

    transcript = TranscriptRecorder(out_dir / "transcript.ndjson")
    transcript.record("state", make_snapshot(session, scenario.name))
    session.state_listeners.append(lambda p: transcript.record("state", p))
    session.sample_listeners.append(
        lambda r: transcript.record("sample", r.to_json_obj()))
    session.fault_listeners.append(lambda p: transcript.record("fault", p))
    session.event_listeners.append(
        lambda p: transcript.record("mission_event", p))

    runner = MissionRunner(session, scenario.plan)
    started = time.monotonic()
    result = runner.run()
    elapsed = time.monotonic() - started
    sample_log.close()
    transcript.close()

    records = result.records
    write_csv(records, out_dir / "records.csv")
    profiles = assemble_profiles(records)
    write_profiles_csv(profiles, out_dir / "profiles.csv")
    summary_files = []
    for parameter in scenario.probe.parameters:
        try:
            summary = depth_normalized_summary(records, parameter)
        except ValueError:
            continue
        name = f"summary_{parameter}.csv"
        write_summary_csv(summary, out_dir / name)
        summary_files.append(name)

    manifest = {
        "scenario": scenario.name,
        "config_hash": scenario.config_hash(),
        "seed": scenario.seed,
        "dt": scenario.dt,
        "status": result.status,
        "fault_reason": result.fault_reason,
        "record_count": len(records),
        "profile_count": len(profiles),
        "sim_duration_s": session.time,
        "files": ["records.ndjson", "records.csv", "profiles.csv",
                  "transcript.ndjson"] + summary_files,
    }
    write_manifest(manifest, out_dir / "manifest.json")

    print(f"run {result.status}: {len(records)} records, "
          f"{len(profiles)} profiles, {session.time:.1f} s simulated "
          f"in {elapsed:.2f} s -> {out_dir}")
    if result.status == "faulted":
        print(f"fault: {result.fault_reason}", file=sys.stderr)
        return EXIT_FAULTED
    return EXIT_OK


def _console_root() -> Path | None:
    bundle = Path(__file__).resolve().parents[2] / "console" / "dist"
    return bundle if bundle.is_dir() else None


def cmd_serve(args) -> int:
    scenario = _load(args.scenario)
    seed = _resolve(args.seed, "PROBECAST_SEED", scenario.seed, 0, int)
    dt = _resolve(args.dt, "PROBECAST_DT", scenario.dt, 0.01, float)
    port = _resolve(args.port, "PROBECAST_PORT", scenario.telemetry_port,
                    8765, int)
    pace = _resolve(args.pace, "PROBECAST_PACE", scenario.pacing, "realtime",
                    str)

    session = build_session(scenario, seed=seed, dt=dt)
    runner = MissionRunner(session, scenario.plan)
    try:
        driver = SessionDriver(
            session, runner, scenario_name=scenario.name, host=args.host,
            port=port, pacing=pace, speed=args.speed,
            static_root=_console_root())
    except OSError as exc:
        print(f"error: cannot listen on port {port}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    driver.start()
    print(f"serving {scenario.name} on {args.host}:{driver.server.port} "
          f"({pace}); commands: set_target_depth, manual_step, set_underway, "
          f"start_mission, pause, resume, ack_fault", flush=True)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        driver.stop()
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        messages = load_transcript(Path(args.transcript))
    except (OSError, ValueError) as exc:
        print(f"error: cannot replay {args.transcript}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    port = _resolve(args.port, "PROBECAST_PORT", None, 8765, int)
    try:
        driver = ReplayDriver(messages, host=args.host, port=port,
                              speed=args.speed, static_root=_console_root())
    except OSError as exc:
        print(f"error: cannot listen on port {port}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    driver.start()
    print(f"replaying {len(messages)} messages on {args.host}:"
          f"{driver.server.port} at {args.speed}x", flush=True)
    try:
        driver.wait()
    except KeyboardInterrupt:
        pass
    finally:
        driver.stop()
    return EXIT_OK


def cmd_summarize(args) -> int:
    try:
        records = read_ndjson(Path(args.records))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parameters = sorted({name for r in records for name in r.values})
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    for parameter in parameters:
        try:
            summary = depth_normalized_summary(records, parameter,
                                               bin_width=args.bin_width)
        except ValueError as exc:
            print(f"{parameter}: skipped ({exc})")
            continue
        print(f"{parameter}:")
        for b in summary.bins:
            print(f"  {b.depth_low:5.1f}-{b.depth_high:5.1f} m  "
                  f"n={b.count:<5d} mean={b.mean:.4f} spread={b.spread:.4f}")
        if out_dir is not None:
            write_summary_csv(summary, out_dir / f"summary_{parameter}.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="probecast",
                     description="Winch-deployed probe simulator and console")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="static feasibility checks")
    check.add_argument("scenario")
    check.set_defaults(func=cmd_check)

    run = sub.add_parser("run", help="run the mission headless, write artifacts")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int)
    run.add_argument("--dt", type=float)
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    serve = sub.add_parser("serve", help="live telemetry endpoint")
    serve.add_argument("scenario")
    serve.add_argument("--seed", type=int)
    serve.add_argument("--dt", type=float)
    serve.add_argument("--port", type=int)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--pace", choices=["realtime", "fast"])
    serve.add_argument("--speed", type=float, default=1.0,
                       help="realtime multiplier")
    serve.set_defaults(func=cmd_serve)

    replay = sub.add_parser("replay", help="re-serve a recorded transcript")
    replay.add_argument("transcript")
    replay.add_argument("--port", type=int)
    replay.add_argument("--host", default="127.0.0.1")
    replay.add_argument("--speed", type=float, default=1.0)
    replay.set_defaults(func=cmd_replay)

    summarize = sub.add_parser("summarize",
                               help="depth-binned normalized summaries")
    summarize.add_argument("records", help="records.ndjson from a run")
    summarize.add_argument("--out")
    summarize.add_argument("--bin-width", type=float, default=0.5)
    summarize.set_defaults(func=cmd_summarize)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
