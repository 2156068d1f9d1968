"""Endpoint projection as dependency injection.

`project_and_run` builds an operator bundle whose implementations act for one
location over a transport, then simply calls the choreography with it: values
this endpoint does not own surface as absent, sends happen where this endpoint
is the sender, receives where it is a recipient, and enclaves it is outside of
are skipped entirely.
"""

from collections import deque
from typing import Any

from ..errors import (
    CensusNotOwnedError,
    ContractError,
    EmptyCensusError,
    NotAnOwnerError,
    WitnessMismatchError,
)
from ..located import (
    Faceted,
    MultiplyLocated,
    Quire,
    _faceted_endpoint,
    _located,
)
from ..locations import Census, MembershipWitness, SubsetWitness
from ..ops import Choreography, OperatorBundle, Unwrapper, as_callable
from ..portable import decode, encode
from ..seeding import location_rng
from ..transport import MessageRecord, Transport
from .report import BranchRecord, EndpointLog, RunReport, ValueRecord
from .views import canonical_bytes, try_encode, view


def _endpoint_resolve(container, reader):
    if isinstance(container, Faceted):
        return container._own
    return container._value


class EndpointState:
    """Everything one endpoint's bundle closes over besides the census."""

    def __init__(self, name: str, transport: Transport, rng, inputs, log: EndpointLog):
        self.self_name = name
        self.transport = transport
        self.rng = rng
        self.inputs = inputs
        self.log = log
        self.clock = 0
        self.value_counters: dict[tuple, int] = {}
        self.branch_counters: dict[tuple, int] = {}
        self.seqs: dict[str, int] = {}
        self.sent: list[MessageRecord] = []

    def tick(self) -> int:
        t = self.clock
        self.clock += 1
        return t

    def send(self, to: str, data: bytes) -> None:
        seq = self.seqs.get(to, 0)
        self.seqs[to] = seq + 1
        self.sent.append(
            MessageRecord(self.self_name, to, len(data), seq, t_send=self.tick())
        )
        self.log.events.append(("send", to, len(data)))
        self.transport.send(to, data)

    def recv(self, frm: str) -> bytes:
        data = self.transport.recv(frm)
        self.tick()
        self.log.events.append(("recv", frm, len(data)))
        return data


class EndpointBundle(OperatorBundle):
    def __init__(self, state: EndpointState, census: Census):
        super().__init__(census)
        self._state = state

    def _child(self, census: Census) -> "EndpointBundle":
        return EndpointBundle(self._state, census)

    # -- recording ----------------------------------------------------------

    def _record_mlv(self, mlv: MultiplyLocated) -> MultiplyLocated:
        sig = self._census.names
        seq = self._state.value_counters.get(sig, 0)
        self._state.value_counters[sig] = seq + 1
        if mlv._present:
            rec = ValueRecord(sig, seq, "mlv", mlv.owners.names, "present",
                              try_encode(mlv._value))
        else:
            rec = ValueRecord(sig, seq, "mlv", mlv.owners.names, "absent", None)
        self._state.log.values.append(rec)
        return mlv

    def _record_faceted(self, f: Faceted) -> Faceted:
        sig = self._census.names
        seq = self._state.value_counters.get(sig, 0)
        self._state.value_counters[sig] = seq + 1
        if f._has_own:
            rec = ValueRecord(sig, seq, "faceted", f.owners.names, "facet",
                              try_encode(f._own))
        else:
            rec = ValueRecord(sig, seq, "faceted", f.owners.names, "nofacet", None)
        self._state.log.values.append(rec)
        return f

    def _record_branch(self, value: Any) -> None:
        sig = self._census.names
        index = self._state.branch_counters.get(sig, 0)
        self._state.branch_counters[sig] = index + 1
        self._state.log.branches.append(BranchRecord(sig, index, canonical_bytes(value)))

    # -- core operators -------------------------------------------------------

    def locally(self, w: MembershipWitness, body) -> MultiplyLocated:
        self._require_member(w)
        owners = Census((w.location,))
        if w.location.name == self._state.self_name:
            un = Unwrapper(
                w.location, self._state.rng, self._state.inputs, None, _endpoint_resolve
            )
            mlv = _located(owners, True, body(un))
        else:
            mlv = _located(owners, False, None)
        return self._record_mlv(mlv)

    def multicast(self, s: MembershipWitness, r: SubsetWitness, v) -> MultiplyLocated:
        self._require_member(s)
        self._require_subset(r)
        if not isinstance(v, MultiplyLocated):
            raise ContractError("multicast takes a multiply-located value")
        sender = s.location.name
        if sender not in v.owners:
            raise NotAnOwnerError(f"{sender!r} does not own the value being sent")
        if len(r.sub) == 0:
            raise EmptyCensusError("multicast needs at least one recipient")
        me = self._state.self_name
        if me == sender:
            data = encode(v._value)
            for q in r.sub.names:
                if q != me:
                    self._state.send(q, data)
            if me in r.sub:
                mlv = _located(r.sub, True, decode(data))
            else:
                mlv = _located(r.sub, False, None)
        elif me in r.sub:
            data = self._state.recv(sender)
            mlv = _located(r.sub, True, decode(data))
        else:
            mlv = _located(r.sub, False, None)
        return self._record_mlv(mlv)

    def naked(self, v) -> Any:
        if not isinstance(v, MultiplyLocated):
            raise ContractError("naked takes a multiply-located value")
        missing = [n for n in self._census.names if n not in v.owners]
        if missing:
            raise CensusNotOwnedError(
                f"census member {missing[0]!r} does not own the value"
            )
        self._record_branch(v._value)
        return v._value

    def enclave(self, s: SubsetWitness, c) -> MultiplyLocated:
        self._require_subset(s)
        if len(s.sub) == 0:
            raise EmptyCensusError("an enclave census may not be empty")
        proc = as_callable(c, s.sub)
        sig = s.sub.names
        if self._state.self_name in s.sub:
            self._state.log.events.append(("enter", sig))
            ret = proc(self._child(s.sub))
            self._state.log.events.append(("exit", sig))
            mlv = _located(s.sub, True, ret)
        else:
            mlv = _located(s.sub, False, None)
        return self._record_mlv(mlv)

    def replicated(self, body) -> MultiplyLocated:
        un = Unwrapper(None, None, None, self._census, _endpoint_resolve)
        value = body(un)
        return self._record_mlv(_located(self._census, True, value))

    def fanout(self, qs: SubsetWitness, per) -> Faceted:
        self._require_subset(qs)
        me = self._state.self_name
        has_own = me in qs.sub
        own = None
        for i, loc in enumerate(qs.sub.members):
            proc = as_callable(per(MembershipWitness(loc, qs.sub, i)), self._census)
            ret = proc(self)
            if not isinstance(ret, MultiplyLocated) or ret.owners.names != (loc.name,):
                raise ContractError(
                    f"fanout iteration must yield a value located exactly at {loc.name!r}"
                )
            if loc.name == me:
                own = ret._value
        return self._record_faceted(_faceted_endpoint(qs.sub, has_own, own))

    def fanin(self, qs: SubsetWitness, rs: SubsetWitness, per) -> MultiplyLocated:
        self._require_subset(qs)
        self._require_subset(rs)
        if len(rs.sub) == 0:
            raise EmptyCensusError("fanin needs at least one recipient")
        me = self._state.self_name
        entries = {}
        for i, loc in enumerate(qs.sub.members):
            proc = as_callable(per(MembershipWitness(loc, qs.sub, i)), self._census)
            ret = proc(self)
            if not isinstance(ret, MultiplyLocated) or ret.owners != rs.sub:
                raise ContractError(
                    "fanin iteration must yield a value located at the recipients"
                )
            if me in rs.sub:
                entries[loc.name] = ret._value
        if me in rs.sub:
            mlv = _located(rs.sub, True, Quire(qs.sub, entries))
        else:
            mlv = _located(rs.sub, False, None)
        return self._record_mlv(mlv)

    def flatten(self, outer: SubsetWitness, inner: SubsetWitness, v) -> MultiplyLocated:
        if not isinstance(v, MultiplyLocated):
            raise ContractError("flatten takes a multiply-located value")
        if outer.sup != v.owners:
            raise WitnessMismatchError("outer witness must target the value's owners")
        if outer.sub != inner.sub:
            raise WitnessMismatchError("flatten witnesses must share the narrowed set")
        if len(outer.sub) == 0:
            raise EmptyCensusError("cannot flatten to an empty owner set")
        me = self._state.self_name
        if me in outer.sub:
            payload = v._value
            if not isinstance(payload, MultiplyLocated):
                raise ContractError("flatten needs a nested located value")
            if inner.sup != payload.owners:
                raise WitnessMismatchError("inner witness must target the nested owners")
            mlv = _located(outer.sub, True, payload._value)
        else:
            mlv = _located(outer.sub, False, None)
        return self._record_mlv(mlv)

    def others_forget(self, t: SubsetWitness, v) -> MultiplyLocated:
        if not isinstance(v, MultiplyLocated):
            raise ContractError("others_forget takes a multiply-located value")
        if t.sup != v.owners:
            raise WitnessMismatchError("witness must target the value's owners")
        if len(t.sub) == 0:
            raise EmptyCensusError("cannot shrink ownership to the empty set")
        me = self._state.self_name
        if me in t.sub:
            mlv = _located(t.sub, True, v._value)
        else:
            mlv = _located(t.sub, False, None)
        return self._record_mlv(mlv)


def project_and_run(
    c,
    census: Census,
    self_name: str,
    transport: Transport,
    args: Any = None,
    seed: int = 0,
    inputs: dict | None = None,
) -> tuple[Any, RunReport]:
    """Run the choreography as one endpoint over a real transport.

    Returns this endpoint's view of the result and a single-endpoint report
    fragment (its sends, receives, branch log).  Protocol and transport errors
    propagate to the caller.
    """
    if self_name not in census:
        raise WitnessMismatchError(f"{self_name!r} is not in census {census.names}")
    if isinstance(c, Choreography):
        if c.census is not None and c.census != census:
            raise WitnessMismatchError(
                f"choreography declared census {c.census.names}, got {census.names}"
            )
        proc = c.proc
    else:
        proc = c
    log = EndpointLog(self_name)
    stream = deque((inputs or {}).get(self_name, []))
    state = EndpointState(self_name, transport, location_rng(seed, self_name), stream, log)
    bundle = EndpointBundle(state, census)
    ret = proc(bundle, args)
    log.result = view(ret, self_name)
    report = RunReport("endpoint", seed, census.names, {self_name: log}, state.sent)
    return log.result, report
