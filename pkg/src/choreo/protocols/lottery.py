"""Commit-reveal lottery over a prime field.

Clients additively secret-share their field-element secrets to the servers.
Each server draws a random index contribution and a salt, publishes a
commitment digest, and only after holding everyone's commitments opens first
the salts and then the draws.  Every server verifies every opened pair against
its commitment; the winning client index is the field sum of the draws modulo
the client count, and the servers forward that client's shares to the analyst,
who reconstructs the one chosen secret.  The commitment round is what stops
the last server from steering the index: by the time anyone opens, every draw
is pinned down.
"""

import hashlib
from dataclasses import dataclass

from ..errors import CommitmentFailed, ContractError
from ..located import Faceted
from ..locations import Census, compose
from ..ops import OperatorBundle
from ..portable import encode

FIELD_MODULUS = 999_983


def field_add(a: int, b: int) -> int:
    return (a + b) % FIELD_MODULUS


def field_sub(a: int, b: int) -> int:
    return (a - b) % FIELD_MODULUS


def field_rand(rng) -> int:
    return rng.randrange(FIELD_MODULUS)


def commit(draw: int, salt: int) -> bytes:
    """32-byte digest of the canonical encoding of the (draw, salt) pair."""
    return hashlib.sha256(encode((draw, salt))).digest()


def verify(commitment: bytes, draw: int, salt: int) -> bool:
    return commit(draw, salt) == commitment


def winning_index(draws, n_clients: int) -> int:
    """Field-sum the servers' draws, then reduce modulo the client count."""
    total = 0
    for value in draws:
        total = field_add(total, value % FIELD_MODULUS)
    return total % n_clients


@dataclass(frozen=True)
class Tamper:
    """Test hook: the named server opens a perturbed value after committing."""

    server: str
    field: str  # "draw" | "salt"


def lottery(
    b: OperatorBundle,
    servers: Census,
    clients: Census,
    analyst: str,
    secrets: Faceted,
    draw_range: int | None = None,
    tamper: Tamper | None = None,
):
    """Reveal one randomly selected client secret to the analyst.

    Returns the reconstructed secret located at the analyst.  A server whose
    commitment check fails raises CommitmentFailed, aborting that endpoint.
    """
    names = set(b.census.names)
    groups = [analyst, *servers.names, *clients.names]
    if len(set(groups)) != len(groups):
        raise ContractError("analyst, servers, and clients must be disjoint")
    if not set(groups) <= names:
        raise ContractError("lottery participants must belong to the census")
    if len(servers) < 1 or len(clients) < 1:
        raise ContractError("need at least one server and one client")
    if not isinstance(secrets, Faceted) or secrets.owners != clients:
        raise ContractError("secrets must be faceted over the clients")

    servers_sub = b.subset(servers)
    clients_sub = b.subset(clients)
    server_names = servers.names
    if draw_range is None:
        draw_range = 8 * len(clients)

    # Clients split their secrets additively; the last share makes the sum.
    def split(loc, un):
        free = [field_rand(un.rng) for _ in range(len(server_names) - 1)]
        total = 0
        for f in free:
            total = field_add(total, f)
        last = field_sub(un(secrets) % FIELD_MODULUS, total)
        return dict(zip(server_names, [*free, last]))

    share_maps = b.parallel(clients_sub, split)

    def per_server(s_in_servers):
        s = compose(s_in_servers, servers_sub)
        s_name = s.location.name

        def collect(bb: OperatorBundle):
            def per_client(c_in_clients):
                c = compose(c_in_clients, clients_sub)

                def send_share(b2: OperatorBundle):
                    share = b2.locally(c, lambda un: un(share_maps)[s_name])
                    return b2.multicast(c, b2.subset([s_name]), share)

                return send_share

            return bb.fanin(clients_sub, bb.subset([s_name]), per_client)

        return collect

    held_shares = b.fanout(servers_sub, per_server)

    draws = b.parallel(servers_sub, lambda loc, un: un.rng.randrange(draw_range))
    salts = b.parallel(servers_sub, lambda loc, un: un.rng.randrange(1 << 18, 1 << 20))
    commitments = b.parallel(
        servers_sub, lambda loc, un: commit(un(draws), un(salts)).hex()
    )

    # All commitments circulate before anyone opens anything.
    opened_commitments = _open_round(b, servers_sub, commitments, None)
    opened_salts = _open_round(
        b, servers_sub, salts, tamper if tamper and tamper.field == "salt" else None
    )
    opened_draws = _open_round(
        b, servers_sub, draws, tamper if tamper and tamper.field == "draw" else None
    )

    def check(loc, un):
        published = un(opened_commitments)
        opened_d = un(opened_draws)
        opened_s = un(opened_salts)
        for name in server_names:
            if published[name] != commit(opened_d[name], opened_s[name]).hex():
                raise CommitmentFailed(f"commitment of {name!r} failed verification")
        return True

    b.parallel(servers_sub, check)

    winner = b.parallel(
        servers_sub, lambda loc, un: winning_index(un(opened_draws).values(), len(clients))
    )
    chosen = b.parallel(
        servers_sub, lambda loc, un: un(held_shares).values()[un(winner)]
    )

    def per_server_forward(s_in_servers):
        s = compose(s_in_servers, servers_sub)

        def forward(bb: OperatorBundle):
            share = bb.locally(s, lambda un: un(chosen))
            return bb.multicast(s, bb.subset([analyst]), share)

        return forward

    winner_shares = b.fanin(servers_sub, b.subset([analyst]), per_server_forward)

    def reconstruct(un):
        total = 0
        for value in un(winner_shares).values():
            total = field_add(total, value)
        return total

    return b.locally(b.member(analyst), reconstruct)


def _open_round(b: OperatorBundle, servers_sub, values: Faceted, tamper: Tamper | None):
    """One all-to-all opening round among the servers."""

    def per(s_in_servers):
        s = compose(s_in_servers, servers_sub)
        s_name = s.location.name

        def publish(bb: OperatorBundle):
            def read(un):
                value = un(values)
                if tamper is not None and tamper.server == s_name:
                    value = value + 1  # no longer matches the commitment
                return value

            own = bb.locally(s, read)
            return bb.multicast(s, servers_sub, own)

        return publish

    return b.fanin(servers_sub, servers_sub, per)
