"""Command-line harness: run any example protocol in centralized, simulated,
or real-TCP endpoint mode; compare message counts between variants; drive the
conformance suites.

Output is deterministic for a fixed configuration (including the seed) in
centralized and simulate modes: one `RESULT endpoint json` line per endpoint,
in census order.  Exit status is 0 only if every endpoint produced a result.
"""

import argparse
import json
import sys
from pathlib import Path

from . import conformance
from .errors import ChoreoError, ConfigError
from .examples import build_example, example_names
from .protocols.gmw import parse_circuit
from .protocols.kvs import parse_script
from .protocols.lottery import Tamper
from .runtime import project_and_run, run_centralized, run_simulated
from .runtime.views import view_json
from .transport import TcpTransport


def _parse_inputs(example: str, text: str | None) -> dict | None:
    if text is None:
        return None
    streams: dict[str, list] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, value = part.partition("=")
        if not sep or not name or not value:
            raise ConfigError(f"bad --inputs entry {part!r}, expected name=value")
        if example == "gmw":
            if any(c not in "01" for c in value):
                raise ConfigError(f"gmw inputs are bit strings, got {value!r}")
            streams.setdefault(name, []).extend(c == "1" for c in value)
        elif example == "lottery":
            try:
                streams.setdefault(name, []).append(int(value))
            except ValueError:
                raise ConfigError(f"lottery inputs are integers, got {value!r}") from None
        else:
            raise ConfigError(f"--inputs is not used by example {example!r}")
    return streams


def _parse_tamper(text: str | None) -> Tamper | None:
    if text is None:
        return None
    server, sep, which = text.partition(":")
    if not sep or which not in ("draw", "salt"):
        raise ConfigError("--tamper takes SERVER:draw or SERVER:salt")
    return Tamper(server, which)


def _parse_ordinals(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad ordinal list {text!r}") from None


def _load_example(ns) -> "object":
    options = {}
    if ns.script:
        options["script"] = parse_script(Path(ns.script).read_text())
    if ns.circuit:
        path = Path(ns.circuit)
        text = path.read_text() if path.exists() else ns.circuit
        options["circuit"] = parse_circuit(text)
    inputs = _parse_inputs(ns.example, ns.inputs)
    if inputs is not None:
        options["inputs"] = inputs
    if ns.backups is not None:
        options["backups"] = ns.backups
    if ns.servers is not None:
        options["servers"] = ns.servers
    if ns.clients is not None:
        options["clients"] = ns.clients
    if ns.parties is not None:
        options["parties"] = ns.parties
    if getattr(ns, "tamper", None):
        options["tamper"] = _parse_tamper(ns.tamper)
    if getattr(ns, "fail_puts", None):
        options["fail_puts"] = _parse_ordinals(ns.fail_puts)
    if getattr(ns, "fail_backups", None):
        options["fail_backups"] = [p for p in ns.fail_backups.split(",") if p]
    return build_example(ns.example, **options)


def _load_address_book(path: str, census_names) -> dict[str, str]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read address book {path!r}: {exc}") from exc
    book = data.get("locations")
    if not isinstance(book, dict):
        raise ConfigError('address book must look like {"locations": {name: "host:port"}}')
    missing = [n for n in census_names if n not in book]
    if missing:
        raise ConfigError(f"address book is missing locations: {missing}")
    return {str(k): str(v) for k, v in book.items()}


def _write_report(path: str | None, report) -> None:
    if path:
        Path(path).write_text(report.serialize())


def _cmd_run(ns) -> int:
    ex = _load_example(ns)
    if ns.mode in ("centralized", "simulate"):
        if ns.mode == "centralized":
            report = run_centralized(
                ex.choreography, ex.census, ex.args, seed=ns.seed, inputs=ex.inputs
            )
        else:
            report = run_simulated(
                ex.choreography, ex.census, ex.args, seed=ns.seed,
                inputs=ex.inputs, step_budget=ns.step_budget,
            )
        status = 0
        for name in ex.census.names:
            err = report.endpoints[name].error
            if err is not None:
                print(f"ERROR {name} {type(err).__name__}: {err}")
                status = 1
            else:
                print(f"RESULT {name} {view_json(report.result_view(name))}")
        _write_report(ns.report, report)
        return status
    # endpoint mode: exactly one endpoint per OS process
    if not ns.role:
        raise ConfigError("endpoint mode needs --role")
    if not ns.config:
        raise ConfigError("endpoint mode needs --config with the address book")
    if ns.role not in ex.census.names:
        raise ConfigError(f"--role {ns.role!r} is not in census {list(ex.census.names)}")
    book = _load_address_book(ns.config, ex.census.names)
    transport = TcpTransport(ns.role, book, recv_timeout=ns.recv_timeout)
    try:
        result, report = project_and_run(
            ex.choreography, ex.census, ns.role, transport,
            ex.args, seed=ns.seed, inputs=ex.inputs,
        )
    except ChoreoError as exc:
        print(f"ERROR {ns.role} {type(exc).__name__}: {exc}")
        return 1
    finally:
        transport.close()
    print(f"RESULT {ns.role} {view_json(result)}")
    _write_report(ns.report, report)
    return 0


def _cmd_count_messages(ns) -> int:
    first, _, second = ns.pair.partition(",")
    if not second:
        raise ConfigError("--pair takes two example names, e.g. kvs-broadcast,kvs-enclave")
    script = parse_script(Path(ns.script).read_text()) if ns.script else None
    counts = {}
    for name in (first, second):
        options = {"script": list(script)} if script else {}
        ex = build_example(name, **options)
        report = run_simulated(
            ex.choreography, ex.census, ex.args, seed=ns.seed, inputs=ex.inputs
        )
        report.require_success()
        counts[name] = len(report.messages)
        print(f"MESSAGES {name} {counts[name]}")
    print(f"DELTA {counts[first] - counts[second]}")
    return 0


def _cmd_conformance(ns) -> int:
    names = ns.suite if ns.suite else None
    parties_counts = (ns.parties,) if ns.parties else (2, 3)
    try:
        results = conformance.run_suites(
            names,
            seeds=ns.seeds,
            deadlock_seeds=ns.deadlock_seeds,
            lottery_runs=ns.lottery_runs,
            parties_counts=parties_counts,
            gmw_depth=ns.gmw_depth,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for result in results:
        print(result.line())
    return 0 if all(r.passed for r in results) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="choreo",
        description="Run choreographic example protocols and their conformance suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one example in one mode")
    run.add_argument("--example", required=True, choices=example_names())
    run.add_argument("--mode", choices=("centralized", "simulate", "endpoint"),
                     default="simulate")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--role", help="this endpoint's location (endpoint mode)")
    run.add_argument("--config", help="address book JSON (endpoint mode)")
    run.add_argument("--script", help="request script file for the kvs examples")
    run.add_argument("--circuit", help="circuit file or literal s-expression for gmw")
    run.add_argument("--inputs", help="per-location inputs, e.g. p1=10,p2=1")
    run.add_argument("--backups", type=int, help="backup count for kvs-poly")
    run.add_argument("--servers", type=int, help="server count for the lottery")
    run.add_argument("--clients", type=int, help="client count for the lottery")
    run.add_argument("--parties", type=int, help="party count for gmw")
    run.add_argument("--step-budget", type=int, default=10_000, dest="step_budget")
    run.add_argument("--report", help="write the run report to this file")
    run.add_argument("--recv-timeout", type=float, default=30.0, dest="recv_timeout")
    run.add_argument("--tamper", help="lottery tamper injection, SERVER:draw|salt")
    run.add_argument("--fail-puts", dest="fail_puts",
                     help="request ordinals whose backup put fails (kvs-error-handling)")
    run.add_argument("--fail-backups", dest="fail_backups",
                     help="backup names that fail puts (kvs-poly)")
    run.set_defaults(func=_cmd_run)

    count = sub.add_parser("count-messages", help="compare message counts of two variants")
    count.add_argument("--pair", default="kvs-broadcast,kvs-enclave")
    count.add_argument("--script", help="request script file")
    count.add_argument("--seed", type=int, default=0)
    count.set_defaults(func=_cmd_count_messages)

    conf = sub.add_parser("conformance", help="run the conformance suites")
    conf.add_argument("--suite", action="append",
                      help="suite name (repeatable); default runs all positive suites")
    conf.add_argument("--seeds", type=int, default=20)
    conf.add_argument("--deadlock-seeds", type=int, default=50, dest="deadlock_seeds")
    conf.add_argument("--lottery-runs", type=int, default=100, dest="lottery_runs")
    conf.add_argument("--parties", type=int, help="restrict the gmw suite to one party count")
    conf.add_argument("--gmw-depth", type=int, default=2, dest="gmw_depth")
    conf.set_defaults(func=_cmd_conformance)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"CONFIG ERROR: {exc}", file=sys.stderr)
        return 2
    except ChoreoError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
