"""Message transports.

Both implementations satisfy one delivery contract: `send(to, body)` is
non-blocking and buffered, `recv(frm)` blocks until the next in-order message
from that exact sender, delivery is per-(sender, receiver) FIFO with no loss
and no duplication, and failures surface as TransportError rather than silent
drops.
"""

from dataclasses import dataclass
from typing import Protocol, runtime_checkable


@dataclass
class MessageRecord:
    """One message as seen by the instrumentation.

    `t_send` is the logical timestamp serialized in reports; simulated runs
    additionally stamp delivery and consumption times, which the ordering
    checks use.
    """

    sender: str
    receiver: str
    nbytes: int
    seq: int
    t_send: int
    t_deliver: int | None = None
    t_recv: int | None = None


@runtime_checkable
class Transport(Protocol):
    def send(self, to: str, body: bytes) -> None: ...

    def recv(self, frm: str) -> bytes: ...


from .sim import SimNet, sim_make  # noqa: E402
from .tcp import TcpTransport, free_port  # noqa: E402

__all__ = [
    "MessageRecord",
    "Transport",
    "SimNet",
    "sim_make",
    "TcpTransport",
    "free_port",
]
