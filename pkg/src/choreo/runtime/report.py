"""Run reports: per-endpoint results, message log, branch log, and the
bookkeeping the invariants are checked against.

Serialized form (golden-file friendly): one `MSG sender receiver bytes t`
line per message in send order, then one `BRANCH endpoint site outcome` line
per branch event, grouped by endpoint in census order.
"""

from dataclasses import dataclass, field
from typing import Any

from ..errors import ChoreoError
from ..transport import MessageRecord


@dataclass
class BranchRecord:
    """Outcome of one naked/broadcast evaluation at one endpoint.

    `sig` is the census the evaluation ran under; `index` counts the
    endpoint's branch events within that census context, which is how records
    align across endpoints of the same (possibly enclaved) census.
    """

    sig: tuple[str, ...]
    index: int
    outcome: bytes


@dataclass
class ValueRecord:
    """Construction record of one located or faceted value at one endpoint.

    (sig, seq) identifies the same logical value across endpoints: all members
    of a census context execute the same operator sequence, so their per-sig
    counters align.  `state` is present/absent for located values and
    facet/nofacet for faceted values; `payload` is the canonical encoding when
    the payload is portable and visible here.
    """

    sig: tuple[str, ...]
    seq: int
    kind: str  # "mlv" | "faceted"
    owners: tuple[str, ...]
    state: str  # "present" | "absent" | "facet" | "nofacet"
    payload: bytes | None


@dataclass
class EndpointLog:
    name: str
    events: list[tuple] = field(default_factory=list)
    branches: list[BranchRecord] = field(default_factory=list)
    values: list[ValueRecord] = field(default_factory=list)
    result: Any = None
    error: BaseException | None = None


@dataclass
class RunReport:
    mode: str
    seed: int
    census_names: tuple[str, ...]
    endpoints: dict[str, EndpointLog]
    messages: list[MessageRecord]

    @property
    def ok(self) -> bool:
        return all(log.error is None for log in self.endpoints.values())

    def errors(self) -> dict[str, BaseException]:
        return {n: log.error for n, log in self.endpoints.items() if log.error is not None}

    def require_success(self) -> "RunReport":
        for name in self.census_names:
            err = self.endpoints[name].error
            if err is not None:
                if isinstance(err, ChoreoError):
                    raise err
                raise ChoreoError(f"endpoint {name!r} failed: {err!r}") from err
        return self

    def result_view(self, name: str) -> Any:
        return self.endpoints[name].result

    def branch_outcomes(self, name: str) -> list[tuple[tuple[str, ...], int, str]]:
        return [(b.sig, b.index, b.outcome.hex()) for b in self.endpoints[name].branches]

    def message_count(self, senders=None, receivers=None) -> int:
        return count_messages(self.messages, senders=senders, receivers=receivers)

    def serialize(self) -> str:
        lines = []
        for m in sorted(self.messages, key=lambda m: (m.t_send, m.sender, m.receiver)):
            lines.append(f"MSG {m.sender} {m.receiver} {m.nbytes} {m.t_send}")
        for name in self.census_names:
            log = self.endpoints.get(name)
            if log is None:
                continue
            for b in log.branches:
                lines.append(f"BRANCH {name} {_site(b.sig, b.index)} {b.outcome.hex()}")
        return "\n".join(lines) + ("\n" if lines else "")


def _site(sig: tuple[str, ...], index: int) -> str:
    return "+".join(sig).replace(" ", "_") + f"#{index}"


def count_messages(messages, senders=None, receivers=None, t_range=None) -> int:
    """Count messages, optionally filtered by sender set, receiver set, and a
    half-open send-time interval (t_lo, t_hi)."""
    total = 0
    for m in messages:
        if senders is not None and m.sender not in senders:
            continue
        if receivers is not None and m.receiver not in receivers:
            continue
        if t_range is not None and not (t_range[0] <= m.t_send < t_range[1]):
            continue
        total += 1
    return total


def check_fifo(report: RunReport) -> list[str]:
    """Per ordered pair, delivered seq values must be 0,1,2,... with no gaps,
    and consumption order must follow send order."""
    problems = []
    by_pair: dict[tuple[str, str], list[MessageRecord]] = {}
    for m in report.messages:
        by_pair.setdefault((m.sender, m.receiver), []).append(m)
    for pair, records in sorted(by_pair.items()):
        records.sort(key=lambda m: m.t_send)
        for i, m in enumerate(records):
            if m.seq != i:
                problems.append(f"{pair}: send #{i} has seq {m.seq}")
        consumed = [m for m in records if m.t_recv is not None]
        ts = [m.t_recv for m in sorted(consumed, key=lambda m: m.seq)]
        if ts != sorted(ts):
            problems.append(f"{pair}: consumption order violates FIFO")
    return problems


def check_branch_agreement(report: RunReport) -> list[str]:
    """Knowledge-of-choice discipline: within every (possibly enclaved) census
    that evaluated branch decisions, all members logged identical outcome
    sequences."""
    problems = []
    per_sig: dict[tuple[str, ...], dict[str, list[bytes]]] = {}
    for name, log in report.endpoints.items():
        for rec in log.branches:
            per_sig.setdefault(rec.sig, {}).setdefault(name, []).append(rec.outcome)
    for sig, by_endpoint in sorted(per_sig.items()):
        sequences = {tuple(seq) for seq in by_endpoint.values()}
        if len(sequences) > 1:
            problems.append(f"branch outcomes disagree within census {sig}")
        missing = [n for n in sig if n not in by_endpoint]
        if missing and len(by_endpoint) > 0:
            problems.append(f"{missing[0]} logged no branch outcomes for census {sig}")
    return problems


def check_value_agreement(report: RunReport) -> list[str]:
    """Every multiply-owned value must have byte-identical canonical encodings
    at all owners, be present exactly at owners, and faceted values must have
    facets exactly at owners."""
    problems = []
    groups: dict[tuple, list[tuple[str, ValueRecord]]] = {}
    for name, log in report.endpoints.items():
        for rec in log.values:
            groups.setdefault((rec.sig, rec.seq, rec.kind), []).append((name, rec))
    for key, entries in sorted(groups.items()):
        sig, seq, kind = key
        owners = entries[0][1].owners
        where = f"{kind} #{seq} under {sig}"
        if any(rec.owners != owners for _, rec in entries):
            problems.append(f"{where}: endpoints disagree on the owner set")
            continue
        if kind == "mlv":
            payloads = []
            for name, rec in entries:
                expect = "present" if name in owners else "absent"
                if rec.state != expect:
                    problems.append(f"{where}: {rec.state} at {name}, expected {expect}")
                if rec.state == "present":
                    payloads.append((name, rec.payload))
            encodings = {p for _, p in payloads if p is not None}
            if len(encodings) > 1:
                problems.append(f"{where}: owners hold different encodings")
            if any(p is None for _, p in payloads) and any(p is not None for _, p in payloads):
                problems.append(f"{where}: owners disagree on encodability")
        else:
            for name, rec in entries:
                expect = "facet" if name in owners else "nofacet"
                if rec.state != expect:
                    problems.append(f"{where}: {rec.state} at {name}, expected {expect}")
    return problems
