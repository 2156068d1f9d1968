"""Named, runnable protocol instances for the CLI and the conformance suites.

Each builder turns harness options into a concrete (choreography, census,
args, inputs) bundle ready for any of the three run modes.
"""

from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError
from .locations import Census, census_of
from .ops import Choreography, OperatorBundle
from .protocols import gmw as gmw_mod
from .protocols import kvs as kvs_mod
from .protocols import lottery as lottery_mod
from .protocols.kvs import Get, KvsArgs, Put
from .protocols.lottery import FIELD_MODULUS, Tamper


@dataclass
class ExampleRun:
    name: str
    choreography: Choreography
    census: Census
    args: Any
    inputs: dict[str, list] = field(default_factory=dict)


DEFAULT_SCRIPT = [Put("k", 5), Get("k")]
DEFAULT_CIRCUIT = gmw_mod.XorGate(
    gmw_mod.AndGate(gmw_mod.InputWire("p1"), gmw_mod.InputWire("p2")),
    gmw_mod.LitWire(True),
)


def _kvs_example(name: str, proc, census_names, options) -> ExampleRun:
    script = options.get("script") or list(DEFAULT_SCRIPT)
    args = KvsArgs(
        n_requests=len(script),
        fail_puts=frozenset(options.get("fail_puts", ())),
        fail_backups=frozenset(options.get("fail_backups", ())),
    )
    return ExampleRun(
        name=name,
        choreography=Choreography(proc, name=name),
        census=census_of(census_names),
        args=args,
        inputs={"client": list(script)},
    )


def _build_kvs_broadcast(options) -> ExampleRun:
    return _kvs_example(
        "kvs-broadcast", kvs_mod.kvs_broadcast, ["client", "primary", "backup"], options
    )


def _build_kvs_enclave(options) -> ExampleRun:
    return _kvs_example(
        "kvs-enclave", kvs_mod.kvs_enclave, ["client", "primary", "backup"], options
    )


def _build_kvs_error_handling(options) -> ExampleRun:
    return _kvs_example(
        "kvs-error-handling",
        kvs_mod.kvs_error_handling,
        ["client", "primary", "backup"],
        options,
    )


def _build_kvs_poly(options) -> ExampleRun:
    backups = options.get("backups", 2)
    if backups < 0:
        raise ConfigError("--backups must be >= 0")
    names = ["client", "primary"] + [f"backup{i}" for i in range(1, backups + 1)]
    return _kvs_example("kvs-poly", kvs_mod.kvs_poly, names, options)


def _gmw_proc(b: OperatorBundle, circuit) -> bool:
    return gmw_mod.mpc(b, circuit)


def _build_gmw(options) -> ExampleRun:
    circuit = options.get("circuit") or DEFAULT_CIRCUIT
    parties = options.get("parties")
    inputs = options.get("inputs")
    owners = gmw_mod.circuit_input_owners(circuit)
    if parties:
        names = [f"p{i}" for i in range(1, parties + 1)]
    else:
        seen = list(dict.fromkeys(owners)) or ["p1"]
        names = sorted(seen) if inputs is None else sorted(set(seen) | set(inputs))
    if inputs is None:
        inputs = {}
        for owner in owners:
            inputs.setdefault(owner, []).append(False)
    missing = [o for o in owners if o not in names]
    if missing:
        raise ConfigError(f"circuit uses parties outside the census: {missing}")
    return ExampleRun(
        name="gmw",
        choreography=Choreography(_gmw_proc, name="gmw"),
        census=census_of(names),
        args=circuit,
        inputs={k: list(v) for k, v in inputs.items()},
    )


@dataclass(frozen=True)
class LotteryArgs:
    servers: tuple[str, ...]
    clients: tuple[str, ...]
    analyst: str = "analyst"
    draw_range: int | None = None
    tamper: Tamper | None = None


def _lottery_proc(b: OperatorBundle, args: LotteryArgs):
    servers = census_of(args.servers)
    clients = census_of(args.clients)
    secrets = b.parallel(
        b.subset(args.clients), lambda loc, un: int(un.next_input()) % FIELD_MODULUS
    )
    return lottery_mod.lottery(
        b,
        servers,
        clients,
        args.analyst,
        secrets,
        draw_range=args.draw_range,
        tamper=args.tamper,
    )


def _build_lottery(options) -> ExampleRun:
    n_servers = options.get("servers", 3)
    n_clients = options.get("clients", 4)
    if n_servers < 1 or n_clients < 1:
        raise ConfigError("the lottery needs at least one server and one client")
    servers = tuple(f"server{i}" for i in range(1, n_servers + 1))
    clients = tuple(f"client{i}" for i in range(1, n_clients + 1))
    secrets = options.get("inputs") or {}
    inputs = {}
    for i, name in enumerate(clients):
        given = secrets.get(name)
        inputs[name] = list(given) if given else [(1000 + 13 * i) % FIELD_MODULUS]
    args = LotteryArgs(
        servers=servers,
        clients=clients,
        draw_range=options.get("draw_range"),
        tamper=options.get("tamper"),
    )
    return ExampleRun(
        name="lottery",
        choreography=Choreography(_lottery_proc, name="lottery"),
        census=census_of(["analyst", *servers, *clients]),
        args=args,
        inputs=inputs,
    )


def _broken_proc(b: OperatorBundle, args) -> None:
    # Deliberate negative control: the second location blocks on a receive
    # that the first location never performs a matching send for.  Reaches
    # past the operator bundle on purpose; only projected modes can run it.
    state = getattr(b, "_state", None)
    if state is None or not hasattr(state, "self_name"):
        raise ConfigError("the broken example runs only in simulate/endpoint mode")
    first, second = b.census.names[0], b.census.names[1]
    if state.self_name == second:
        state.recv(first)
    return None


def _build_broken(options) -> ExampleRun:
    return ExampleRun(
        name="broken-pair",
        choreography=Choreography(_broken_proc, name="broken-pair"),
        census=census_of(["one", "two"]),
        args=None,
    )


BUILDERS = {
    "kvs-broadcast": _build_kvs_broadcast,
    "kvs-enclave": _build_kvs_enclave,
    "kvs-error-handling": _build_kvs_error_handling,
    "kvs-poly": _build_kvs_poly,
    "gmw": _build_gmw,
    "lottery": _build_lottery,
    "broken-pair": _build_broken,
}


def example_names() -> list[str]:
    return sorted(BUILDERS)


def build_example(name: str, **options) -> ExampleRun:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown example {name!r}; choose from {', '.join(example_names())}"
        ) from None
    return builder(options)
