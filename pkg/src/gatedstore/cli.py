"""Command-line interface.

Subcommands:

* ``run``    execute a scenario under the deterministic scheduler (or the
             socket transport), write metrics, trace, verdicts and figures
             to the output directory.
* ``bench``  wall-clock benchmarks of the three access-control schemes and
             a small end-to-end pass; figures and delimited output.
* ``replay`` re-execute a recorded (config, seed) pair and compare trace
             hashes.

Every flag can also be set through an environment variable with the
``GATEDSTORE_`` prefix (``GATEDSTORE_SEED=9`` mirrors ``--seed 9``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .sim import bench as bench_mod
from .sim import metrics as metrics_mod
from .sim import report as report_mod
from .sim.scenario import SimConfig, run_scenario

ENV_PREFIX = "GATEDSTORE_"


def _env(name: str, default):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=_env("seed", 1), help="64-bit run seed")
    parser.add_argument("--n", type=int, default=_env("n", 4), help="replica count (3f+1)")
    parser.add_argument("--f", type=int, default=_env("f", 1), help="fault bound")
    parser.add_argument(
        "--batch", type=int, default=_env("batch", 40), help="epoch batch cap across replicas"
    )
    parser.add_argument(
        "--clients", type=int, default=_env("clients", 8), help="requester count / group size"
    )
    parser.add_argument(
        "--size", type=int, default=_env("size", 250), help="payload size in bytes"
    )
    parser.add_argument(
        "--access",
        choices=("abe", "be", "te"),
        default=_env("access", "te"),
        help="access-control scheme",
    )
    parser.add_argument(
        "--adversary",
        default=_env("adversary", "none"),
        help="e.g. crash:3@0 | mute:1 | equivocate_rbc:2 | garbage_read_replies:0 | delay:1@10",
    )
    parser.add_argument(
        "--transport",
        choices=("in-process", "sockets"),
        default=_env("transport", "in-process"),
    )
    parser.add_argument("--out", type=Path, default=None, help="output directory")


def _config_from_args(args) -> SimConfig:
    return SimConfig(
        seed=args.seed,
        n=args.n,
        f=args.f,
        batch_cap=args.batch,
        client_count=args.clients,
        data_size=args.size,
        access=args.access,
        adversary=args.adversary,
        writes=args.writes,
        reads=args.reads,
        transport=args.transport,
    )


def _write_run_outputs(out: Path, system, result) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(result.config.to_json())
    (out / "trace_hash.txt").write_text(result.trace_hash + "\n")
    with (out / "trace.ndjson").open("w") as fh:
        for ev in system.net.trace:
            fh.write(
                json.dumps(
                    {
                        "t": ev.t,
                        "seq": ev.seq,
                        "kind": ev.kind,
                        "sender": ev.sender,
                        "dest": ev.dest,
                        "info": ev.info,
                    }
                )
                + "\n"
            )
    (out / "verdicts.json").write_text(
        json.dumps(
            [{"name": v.name, "passed": v.passed, "details": v.details} for v in result.verdicts],
            indent=2,
        )
    )
    (out / "metrics.json").write_text(json.dumps(result.metrics, indent=2, default=str))
    with (out / "audit.ndjson").open("w") as fh:
        for entry in system.verifier.audit_log:
            fh.write(json.dumps(entry) + "\n")
    metrics_mod.write_epoch_csv(result.metrics, out / "epochs.csv")
    metrics_mod.write_phase_csv(result.metrics, out / "phases.csv")
    report_mod.phase_latency_figure(result.metrics, out / "phase_latency.png")
    report_mod.epoch_throughput_figure(result.metrics, out / "epoch_profile.png")


def _print_violation_excerpt(system, result) -> None:
    failed = [v for v in result.verdicts if not v.passed]
    print("\nproperty violations:", file=sys.stderr)
    for v in failed:
        print(f"  {v.line()}", file=sys.stderr)
    tail = system.net.trace[-40:]
    print(f"\ntrace excerpt (last {len(tail)} events):", file=sys.stderr)
    for ev in tail:
        print("  " + ev.line(), file=sys.stderr)


def cmd_run(args) -> int:
    if args.transport == "sockets":
        from .sockets import run_socket_demo

        result = run_socket_demo(access=args.access, data_size=args.size, writes=min(args.writes, 5))
        print(json.dumps(result, indent=2))
        ok = all(r["status"] == "done" for r in result["reads"]) and result["payload_verified"]
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "socket_demo.json").write_text(json.dumps(result, indent=2))
        return 0 if ok else 1

    config = _config_from_args(args)
    system, result = run_scenario(config)
    print(f"seed={config.seed} access={config.access} adversary={config.adversary}")
    print(f"steps={result.steps} final_time={result.metrics['final_time']}")
    print(f"trace_hash={result.trace_hash}")
    print()
    for v in result.verdicts:
        print(v.line())
    if args.out:
        _write_run_outputs(args.out, system, result)
        print(f"\noutputs written to {args.out}")
    if not result.all_passed():
        _print_violation_excerpt(system, result)
        return 1
    return 0


def cmd_bench(args) -> int:
    report = bench_mod.run_bench(payload_size=args.size, reps=args.reps, seed=args.seed)
    print(f"payload={report['payload_size']}B reps={report['reps']}")
    for scheme in ("abe", "be", "te"):
        stats = report["schemes"][scheme]
        print(
            f"  {scheme.upper():3} enc {stats['encrypt_ms']['mean']:10.3f} ms"
            f"   dec {stats['decrypt_ms']['mean']:10.3f} ms"
        )
    ordering = report["encryption_ordering_be_lt_te_lt_abe"]
    print(f"encryption ordering BE < TE < ABE: {'holds' if ordering else 'VIOLATED'}")
    for access, e2e in report["end_to_end"].items():
        print(
            f"  end-to-end {access}: {e2e['wall_s']:.2f}s wall, "
            f"properties {'pass' if e2e['all_properties_pass'] else 'FAIL'}"
        )
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "bench.json").write_text(json.dumps(report, indent=2))
        with (args.out / "bench.csv").open("w") as fh:
            fh.write("scheme,phase,mean_ms,min_ms,max_ms,stdev_ms\n")
            for scheme in ("abe", "be", "te"):
                for phase in ("encrypt_ms", "decrypt_ms"):
                    s = report["schemes"][scheme][phase]
                    fh.write(
                        f"{scheme},{phase},{s['mean']:.4f},{s['min']:.4f},"
                        f"{s['max']:.4f},{s['stdev']:.4f}\n"
                    )
        report_mod.bench_latency_figure(report, args.out / "bench_latency.png")
        print(f"outputs written to {args.out}")
    return 0 if ordering else 1


def cmd_replay(args) -> int:
    src = Path(args.dir)
    config = SimConfig.from_json((src / "config.json").read_text())
    recorded = (src / "trace_hash.txt").read_text().strip()
    system, result = run_scenario(config)
    print(f"recorded: {recorded}")
    print(f"replayed: {result.trace_hash}")
    if result.trace_hash == recorded:
        print("traces identical")
        return 0
    print("TRACE MISMATCH")
    return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gatedstore",
        description="policy-gated replicated storage with an on-chain anchor",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and evaluate properties")
    _add_common(p_run)
    p_run.add_argument("--writes", type=int, default=_env("writes", 1000), help="total writes (K)")
    p_run.add_argument(
        "--reads",
        choices=("none", "honest", "honest+denied"),
        default=_env("reads", "honest"),
    )
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="wall-clock scheme benchmarks")
    _add_common(p_bench)
    p_bench.add_argument("--reps", type=int, default=_env("reps", 20))
    p_bench.set_defaults(func=cmd_bench)

    p_replay = sub.add_parser("replay", help="replay a recorded run and compare trace hashes")
    p_replay.add_argument("dir", help="output directory of a previous run")
    p_replay.set_defaults(func=cmd_replay)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
